//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 7 needs the public exchange-rate file (8 columns, one row per
//! day); point `HNN_EXCHANGE_RATE` at it to run the check. It never gates.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hnn_core::bench::experiment::{run_tabular_experiment, AblationSpec, TabularConfig};
use hnn_core::bench::synthetic::{planted_tmfg_data, seasonal_var_series};
use hnn_core::bench::{paired_t_test, persistence_forecast, r2_score, rse, Summary};
use hnn_core::hnn::{finite_diff_grad, max_relative_error, Activation, Architecture, HnnModel, Loss, TrainConfig};
use hnn_core::homology::{clique_tree, maximal_cliques, mcs_order, HasseDiagram};
use hnn_core::timeseries::{
    build_series_graph, evaluate, make_windows, train_forecaster, ForecastConfig, Forecaster, MultivariateSeries, SplitFractions,
};
use hnn_core::tmfg::{clique_census, tmfg_construct};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn tmfg_suite() -> Outcome {
    let mut p137 = Duration::ZERO;
    for p in [4usize, 5, 10, 50, 137] {
        for seed in 0..50u64 {
            let w = common::random_similarity(p, &mut common::rng(seed * 1000 + p as u64));
            let start = Instant::now();
            let (g, _) = ok(tmfg_construct(&w))?;
            if p == 137 {
                p137 += start.elapsed();
            }
            let c = clique_census(&g);
            ensure!(g.edge_count() == 3 * p - 6, "p={p} seed={seed}: {} edges", g.edge_count());
            ensure!(c.triangles == 3 * p - 8, "p={p} seed={seed}: {} triangles", c.triangles);
            ensure!(c.tetrahedra == p - 3, "p={p} seed={seed}: {} tetrahedra", c.tetrahedra);
            ensure!(mcs_order(&g).is_chordal, "p={p} seed={seed}: not chordal");
        }
    }
    ensure!(p137 < Duration::from_secs(5), "p=137 took {p137:?}");
    Ok(format!("250 graphs, p=137 total {p137:.2?}"))
}

fn seven_vertex() -> Outcome {
    let g = common::seven_vertex_graph();
    let h = ok(HasseDiagram::from_graph(&g))?;
    let cliques = ok(maximal_cliques(&g))?;
    let tree = ok(clique_tree(&cliques, &g))?;
    let seps: Vec<(Vec<usize>, usize)> = tree
        .separators
        .iter()
        .map(|s| (s.vertices.iter().map(|v| v + 1).collect(), s.multiplicity))
        .collect();
    ensure!(h.layer_sizes() == vec![7, 11, 6, 1], "layers {:?}", h.layer_sizes());
    ensure!(cliques.len() == 4, "{} maximal cliques", cliques.len());
    ensure!(tree.tree_edges.len() == 3, "{} tree edges", tree.tree_edges.len());
    ensure!(seps == vec![(vec![4], 1), (vec![4, 6], 2)], "separators {seps:?}");
    Ok(format!("layers {:?}, separators {{4}}x1 {{4,6}}x2", h.layer_sizes()))
}

fn gradients() -> Outcome {
    let mut worst = 0.0f64;
    for trial in 0..20u64 {
        let mut rng = common::rng(7000 + trial);
        let p = rng.random_range(4..=10);
        let w = common::random_similarity(p, &mut rng);
        let d = ok(HasseDiagram::from_graph(&ok(tmfg_construct(&w))?.0))?;
        let cfg = TrainConfig {
            activation: Activation::Tanh,
            channels: 1 + trial as usize % 2,
            seed: trial,
            ..TrainConfig::default()
        };
        let mut m = ok(HnnModel::build(&d, Architecture::ALL[trial as usize % 4], &cfg, 1 + trial as usize % 2))?;
        m.params_mut().iter_mut().for_each(|v| *v += rng.random_range(-0.1..0.1));
        let x = common::random_inputs(8, p, &mut rng);
        let y = common::random_inputs(8, m.output_dim(), &mut rng);
        let (_, g) = ok(m.mse_and_grad(&x, &y))?;
        let fd = ok(finite_diff_grad(&m, &x, &y, Loss::Mse, 1e-5))?;
        worst = worst.max(max_relative_error(&g.values, &fd.values));
    }
    ensure!(worst < 1e-4, "network max relative error {worst:.2e}");

    let s = ok(seasonal_var_series(4, 80, 12, 1))?;
    let splits = ok(make_windows(&s, 4, 3, SplitFractions::default()))?;
    let (_, d) = ok(build_series_graph(&s, splits.train_end, Default::default()))?;
    let mut cfg = ForecastConfig {
        lookback: 4,
        horizon: 3,
        hidden: 3,
        ..ForecastConfig::default()
    };
    cfg.train.activation = Activation::Tanh;
    let mut f = ok(Forecaster::new(&d, 4, &cfg))?;
    let mut rng = common::rng(1);
    let base: Vec<f64> = f.params().iter().map(|v| v + rng.random_range(-0.2..0.2)).collect();
    ok(f.set_params(&base))?;
    let batch = hnn_core::timeseries::WindowedSeries {
        samples: splits.train.samples[..6].to_vec(),
        ..splits.train.clone()
    };
    let idx: Vec<usize> = (0..6).collect();
    let (_, analytic) = f.mse_grad_on(&batch, &idx);
    let mut fd = vec![0.0; base.len()];
    let mut g = f.clone();
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] += 1e-5;
        ok(g.set_params(&p))?;
        let up = ok(g.mse(&batch))?;
        p[i] = base[i] - 1e-5;
        ok(g.set_params(&p))?;
        let down = ok(g.mse(&batch))?;
        fd[i] = (up - down) / 2e-5;
    }
    let composite = max_relative_error(&analytic, &fd);
    ensure!(composite < 1e-4, "LSTM-HNN max relative error {composite:.2e}");
    Ok(format!("20 triples worst {worst:.2e}; LSTM-HNN composite {composite:.2e}"))
}

fn sparse_dense() -> Outcome {
    let mut checked = 0;
    for p in 4..=12usize {
        for arch in Architecture::ALL {
            let mut rng = common::rng(p as u64 * 31);
            let w = common::random_similarity(p, &mut rng);
            let d = ok(HasseDiagram::from_graph(&ok(tmfg_construct(&w))?.0))?;
            let mut m = ok(HnnModel::build(&d, arch, &TrainConfig::default(), 1))?;
            m.params_mut().iter_mut().for_each(|v| *v += rng.random_range(-0.1..0.1));
            let x = common::random_inputs(100, p, &mut rng);
            let out = ok(m.predict(&x))?;
            for (xs, ys) in x.iter().zip(&out) {
                ensure!(&common::dense_masked_forward(&m, xs) == ys, "p={p} {arch}: outputs differ");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} forwards bit-equal, p = 4..12, all variants"))
}

fn ablation() -> Outcome {
    let start = Instant::now();
    let mut cfg = TabularConfig::default();
    cfg.train.learning_rate = 3e-3;
    let spec = AblationSpec {
        variants: vec![Architecture::Hnn, Architecture::MlpHnn, Architecture::Mlp],
        include_linear: false,
    };
    let mut r2: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for seed in 0..10u64 {
        let data = ok(planted_tmfg_data(20, 5000, 0.1, seed))?;
        let run = ok(run_tabular_experiment(&data.dataset, &spec, &cfg))?;
        for r in run.results {
            r2.entry(r.model).or_default().push(r.r2);
        }
    }
    let med = |m: &str| Summary::of(&r2[m]).map(|s| s.q50).map_err(|e| e.to_string());
    let (h, mh, d) = (med("hnn")?, med("mlp_hnn")?, med("mlp")?);
    let elapsed = start.elapsed();
    let detail = format!("median R2 hnn {h:.4} mlp_hnn {mh:.4} mlp {d:.4} in {elapsed:.0?}");
    ensure!(h >= mh && mh >= d, "ordering violated: {detail}");
    ensure!(h >= 0.8, "hnn median below 0.8: {detail}");
    ensure!(elapsed < Duration::from_secs(600), "too slow: {detail}");
    Ok(detail)
}

fn forecasting() -> Outcome {
    let start = Instant::now();
    let s = ok(seasonal_var_series(5, 3000, 24, 7))?;
    let mut cfg = ForecastConfig {
        hidden: 16,
        ..ForecastConfig::default()
    };
    cfg.train.max_epochs = 10;
    cfg.train.patience = 5;
    cfg.train.learning_rate = 3e-3;
    let splits = ok(make_windows(&s, cfg.lookback, cfg.horizon, cfg.split))?;
    let (_, d) = ok(build_series_graph(&s, splits.train_end, cfg.similarity))?;
    let f = ok(Forecaster::new(&d, 5, &cfg))?;
    let (trained, _) = ok(train_forecaster(&f, &splits, &cfg.train))?;
    let scores = ok(evaluate(&trained, &splits.test, &splits.scaler))?;
    let truth: Vec<Vec<f64>> = splits.test.targets().iter().map(|r| splits.scaler.inverse_row(r)).collect();
    let naive = ok(rse(&truth, &persistence_forecast(&splits.test, &splits.scaler)))?;
    let elapsed = start.elapsed();
    let detail = format!("test RSE {:.4} (persistence {naive:.4}), CORR {:.4} in {elapsed:.0?}", scores.rse, scores.corr);
    ensure!(scores.rse < 1.0 && scores.rse <= naive, "{detail}");
    ensure!(elapsed < Duration::from_secs(600), "too slow: {detail}");
    Ok(detail)
}

fn exchange_rates() -> Option<Outcome> {
    let path = std::env::var_os("HNN_EXCHANGE_RATE")?;
    Some((|| {
        let s = ok(MultivariateSeries::load(&path))?;
        let mut cfg = ForecastConfig {
            hidden: 32,
            ..ForecastConfig::default()
        };
        cfg.train.max_epochs = 50;
        let splits = ok(make_windows(&s, cfg.lookback, cfg.horizon, cfg.split))?;
        let (_, d) = ok(build_series_graph(&s, splits.train_end, cfg.similarity))?;
        let f = ok(Forecaster::new(&d, s.n_series(), &cfg))?;
        let (trained, _) = ok(train_forecaster(&f, &splits, &cfg.train))?;
        let sc = ok(evaluate(&trained, &splits.test, &splits.scaler))?;
        let detail = format!("horizon 3: RSE {:.4} CORR {:.4}", sc.rse, sc.corr);
        ensure!(sc.rse <= 0.05 && sc.corr >= 0.90, "{detail}");
        Ok(detail)
    })())
}

fn parameter_economy() -> Outcome {
    // any 8-vertex TMFG has the same layer sizes, so random weights stand in
    // for the exchange-rate correlations
    let w = common::random_similarity(8, &mut common::rng(8));
    let d = ok(HasseDiagram::from_graph(&ok(tmfg_construct(&w))?.0))?;
    let m = ok(HnnModel::build(&d, Architecture::Hnn, &TrainConfig::default(), 8))?;
    let pc = m.param_count();
    ensure!(pc.total < pc.dense_total, "HNN {} vs dense {}", pc.total, pc.dense_total);
    ensure!(pc.link_weights < pc.dense_link_weights, "links {} vs dense {}", pc.link_weights, pc.dense_link_weights);
    Ok(format!(
        "layers {:?}: HNN unit {} parameters ({} links) vs dense {} ({} links)",
        d.layer_sizes(),
        pc.total,
        pc.link_weights,
        pc.dense_total,
        pc.dense_link_weights
    ))
}

fn metric_identities() -> Outcome {
    let mut rng = common::rng(9);
    let y: Vec<Vec<f64>> = (0..50).map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let mean = y.iter().flatten().sum::<f64>() / 200.0;
    let r = ok(rse(&y, &vec![vec![mean; 4]; 50]))?;
    ensure!(r == 1.0, "rse(mean) = {r}");
    let flat: Vec<f64> = y.iter().map(|r| r[0]).collect();
    let m = flat.iter().sum::<f64>() / 50.0;
    let r2 = ok(r2_score(&flat, &[m; 50]))?;
    ensure!(r2 == 0.0, "r2(mean) = {r2}");
    let d = [1.2, 2.4, 1.3, 1.3, 0.0, 1.0, 1.8, 0.8, 4.6, 1.4];
    let t = ok(paired_t_test(&d, &[0.0; 10]))?;
    let oracle = common::t_tail_oracle(t.t, 9.0);
    ensure!((t.p - oracle).abs() < 1e-4, "p {} vs oracle {oracle}", t.p);
    Ok(format!("rse 1.0, r2 0.0, t-test p {:.6} vs oracle {oracle:.6}", t.p))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 TMFG structural suite", tmfg_suite),
        ("2 seven-vertex chordal fixture", seven_vertex),
        ("3 gradient correctness", gradients),
        ("4 sparse-dense equivalence", sparse_dense),
        ("5 ablation ordering", ablation),
        ("6 time-series property suite", forecasting),
        ("8 parameter economy", parameter_economy),
        ("9 metric identities", metric_identities),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    match exchange_rates() {
        None => println!("SKIP  7 exchange-rate reproduction (optional): HNN_EXCHANGE_RATE not set"),
        Some(Ok(detail)) => println!("PASS  7 exchange-rate reproduction (optional): {detail}"),
        Some(Err(detail)) => println!("FAIL  7 exchange-rate reproduction (optional, not gating): {detail}"),
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
    println!("all gating criteria passed");
}
