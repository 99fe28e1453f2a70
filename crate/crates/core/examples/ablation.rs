//! Synthetic tabular ablation: `cargo run --release --example ablation -- [datasets] [rows]`.

use hnn_core::bench::experiment::{run_tabular_experiment, AblationSpec, TabularConfig};
use hnn_core::bench::synthetic::planted_tmfg_data;
use hnn_core::bench::Summary;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let datasets: u64 = args.next().map_or(Ok(10), |s| s.parse())?;
    let rows: usize = args.next().map_or(Ok(5000), |s| s.parse())?;
    let spec = AblationSpec::default();
    let mut cfg = TabularConfig::default();
    if let Ok(v) = std::env::var("LR") {
        cfg.train.learning_rate = v.parse()?;
    }
    if let Ok(v) = std::env::var("CH") {
        cfg.train.channels = v.parse()?;
    }
    if std::env::var("GRID").is_ok() {
        cfg.grid = hnn_core::bench::experiment::Grid { learning_rates: vec![1e-3, 3e-3, 1e-2], channels: match std::env::var("GRID").unwrap().as_str() { "2" => vec![1, 2], "c2" => vec![2], _ => vec![1] } };
    }
    let mut scores: Vec<(String, Vec<f64>)> = Vec::new();
    for seed in 0..datasets {
        let data = planted_tmfg_data(20, rows, 0.1, seed)?;
        let run = run_tabular_experiment(&data.dataset, &spec, &cfg)?;
        for r in &run.results {
            println!("dataset {seed} {:<8} r2 {:.4} params {} epochs {} lr {:?} ch {:?}", r.model, r.r2, r.n_params, r.epochs_run, r.learning_rate, r.channels);
            match scores.iter_mut().find(|(m, _)| *m == r.model) {
                Some((_, v)) => v.push(r.r2),
                None => scores.push((r.model.clone(), vec![r.r2])),
            }
        }
    }
    for (model, v) in &scores {
        let s = Summary::of(v)?;
        println!("{model:<8} median {:.4} mean {:.4} q10 {:.4} q90 {:.4}", s.q50, s.mean, s.q10, s.q90);
    }
    Ok(())
}
