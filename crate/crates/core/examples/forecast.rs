//! LSTM + HNN forecaster on synthetic seasonal data:
//! `cargo run --release --example forecast`. Env overrides: HIDDEN, LOOKBACK, EPOCHS, LR.

use hnn_core::bench::persistence_forecast;
use hnn_core::bench::rse;
use hnn_core::bench::synthetic::seasonal_var_series;
use hnn_core::timeseries::{build_series_graph, evaluate, make_windows, train_forecaster, ForecastConfig, Forecaster};

fn env<T: std::str::FromStr>(key: &str, default: T) -> T {
    std::env::var(key).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let series = seasonal_var_series(5, 3000, 24, 7)?;
    let mut cfg = ForecastConfig::default();
    cfg.hidden = env("HIDDEN", 16);
    cfg.lookback = env("LOOKBACK", 24);
    cfg.train.max_epochs = env("EPOCHS", 30);
    cfg.train.learning_rate = env("LR", 3e-3);
    cfg.train.patience = 5;
    let splits = make_windows(&series, cfg.lookback, cfg.horizon, cfg.split)?;
    let (_, diagram) = build_series_graph(&series, splits.train_end, cfg.similarity)?;
    let start = std::time::Instant::now();
    let f = Forecaster::new(&diagram, series.n_series(), &cfg)?;
    let (trained, history) = train_forecaster(&f, &splits, &cfg.train)?;
    let scores = evaluate(&trained, &splits.test, &splits.scaler)?;
    let truth: Vec<Vec<f64>> = splits.test.targets().iter().map(|r| splits.scaler.inverse_row(r)).collect();
    let naive = rse(&truth, &persistence_forecast(&splits.test, &splits.scaler))?;
    println!(
        "epochs {} best {} test rse {:.4} corr {:.4} persistence rse {:.4} ({:.1?})",
        history.epochs.len(),
        history.best_epoch,
        scores.rse,
        scores.corr,
        naive,
        start.elapsed()
    );
    Ok(())
}
