use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hnn_core::bench::{
    fit_variant, forecast_table, persistence_forecast, prepare_tabular, r2_score, rse, tabular_table, ForecastEntry, RunManifest,
    Table,
};
use hnn_core::corr::{load_csv, pearson_similarity, zscore, SimilarityVariant};
use hnn_core::hnn::Checkpoint;
use hnn_core::homology::HasseDiagram;
use hnn_core::timeseries::{
    all_windows, build_series_graph, evaluate, make_windows, predict_original, train_forecaster, write_forecast_csv,
    ForecastCheckpoint, Forecaster, MultivariateSeries, WindowedSeries,
};
use hnn_core::tmfg::tmfg_construct;
use hnn_core::{Error, Result};
use serde_json::json;

use crate::args::*;
use crate::config::{forecast_config, tabular_config, TsOverrides};

/// Environment variable naming the directory searched for relative inputs.
pub const DATA_DIR_ENV: &str = "HNN_DATA_DIR";

fn resolve_input(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_hasse(path: &Path) -> Result<HasseDiagram> {
    HasseDiagram::from_json(&read_to_string(path)?)
}

fn display(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

pub fn graph_build(a: &GraphBuildArgs) -> Result<()> {
    let input = resolve_input(&a.csv.input);
    let ds = load_csv(&input, !a.csv.no_header, a.target.as_deref())?;
    let variant: SimilarityVariant = a.similarity.parse()?;
    let (z, _) = zscore(&ds)?;
    let w = pearson_similarity(&z, variant)?;
    let (g, _) = tmfg_construct(&w)?;
    let g = g.with_labels(z.names())?;
    let h = HasseDiagram::from_graph(&g)?;
    write(&a.out, g.to_json()?)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(p) = &a.hasse {
        write(p, h.to_json()?)?;
        outputs.push(p);
    }
    if let Some(p) = &a.dot {
        write(p, h.to_dot(g.labels()))?;
        outputs.push(p);
    }
    log::info!("TMFG on {} vertices: {} edges, layers {:?}", g.p(), g.edge_count(), h.layer_sizes());

    let config = json!({ "similarity": variant, "target": a.target, "header": !a.csv.no_header });
    let mut m = RunManifest::new("graph build", 0, &config, ds.content_hash())?;
    m.inputs = display(&[&input]);
    m.outputs = display(&outputs);
    m.diagram_hash = Some(h.content_hash());
    m.metrics = json!({ "vertices": g.p(), "edges": g.edge_count(), "layer_sizes": h.layer_sizes() });
    let path = a.manifest.clone().unwrap_or_else(|| a.out.with_extension("manifest.json"));
    m.save(path)
}

pub fn tabular_train(a: &TabularTrainArgs) -> Result<()> {
    let input = resolve_input(&a.csv.input);
    let ds = load_csv(&input, !a.csv.no_header, Some(&a.target))?;
    let (cfg, arch) = tabular_config(&a.train, a.test_fraction, a.split_seed)?;
    let prep = prepare_tabular(&ds, &cfg)?;
    let (model, history, tc) = fit_variant(&prep, arch, &cfg)?;
    let pred = prep.unscale(&model.predict(&prep.test.x)?);
    let r2 = r2_score(&prep.test_target, &pred)?;
    log::info!("{arch}: test R2 {r2:.4} after {} epochs ({} parameters)", history.epochs.len(), model.n_params());

    let dir = &a.out_dir;
    let mut ckpt = Checkpoint::new(&model, &tc)?;
    ckpt.normalization = Some(prep.normalization.clone());
    ckpt.target_scale = Some(prep.target_scale);
    let paths = [dir.join("checkpoint.json"), dir.join("graph.json"), dir.join("hasse.json"), dir.join("history.csv"), dir.join("metrics.json")];
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    ckpt.save(&paths[0])?;
    write(&paths[1], prep.graph.clone().with_labels(prep.normalization.names.clone())?.to_json()?)?;
    write(&paths[2], prep.diagram.to_json()?)?;
    let mut buf = Vec::new();
    history.write_csv(&mut buf)?;
    write(&paths[3], buf)?;
    let metrics = json!({
        "kind": "tabular",
        "model": arch.name(),
        "r2": r2,
        "n_params": model.n_params(),
        "epochs_run": history.epochs.len(),
        "best_epoch": history.best_epoch,
        "n_train": prep.train.len(),
        "n_valid": prep.valid.len(),
        "n_test": prep.test.len(),
    });
    write(&paths[4], serde_json::to_string_pretty(&metrics)?)?;
    println!("{}", serde_json::to_string(&metrics)?);

    let run_cfg = json!({ "architecture": arch, "target": a.target, "header": !a.csv.no_header, "tabular": cfg });
    let mut m = RunManifest::new("tabular train", tc.seed, &run_cfg, ds.content_hash())?;
    m.inputs = display(&[&input]);
    m.outputs = paths.iter().map(|p| p.display().to_string()).collect();
    m.diagram_hash = Some(prep.diagram.content_hash());
    m.metrics = metrics;
    m.save(dir.join("manifest.json"))
}

pub fn tabular_eval(a: &TabularEvalArgs) -> Result<()> {
    let input = resolve_input(&a.csv.input);
    let ds = load_csv(&input, !a.csv.no_header, a.target.as_deref())?;
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let hasse_path = a.hasse.clone().unwrap_or_else(|| a.checkpoint.with_file_name("hasse.json"));
    let diagram = load_hasse(&hasse_path)?;
    let model = ckpt.restore(&diagram)?;
    let norm = ckpt.normalization.as_ref().ok_or_else(|| Error::Checkpoint("checkpoint has no feature normalization".into()))?;
    let scale = ckpt.target_scale.ok_or_else(|| Error::Checkpoint("checkpoint has no target scale".into()))?;
    let x = norm.apply(&ds)?.rows();
    let pred: Vec<f64> = model.predict(&x)?.iter().map(|r| r[0] * scale.std + scale.mean).collect();

    let dir = &a.out_dir;
    let pred_path = dir.join("predictions.csv");
    let mut text = String::from("row,prediction\n");
    for (i, p) in pred.iter().enumerate() {
        text += &format!("{i},{p}\n");
    }
    write(&pred_path, text)?;
    let r2 = ds.target().map(|y| r2_score(y, &pred)).transpose()?;
    let metrics = json!({ "kind": "tabular_eval", "model": ckpt.architecture.name(), "r2": r2, "n_rows": pred.len() });
    println!("{}", serde_json::to_string(&metrics)?);

    let mut m = RunManifest::new("tabular eval", ckpt.config.seed, &ckpt.config, ds.content_hash())?;
    m.inputs = display(&[&input, &a.checkpoint, &hasse_path]);
    m.outputs = display(&[&pred_path]);
    m.diagram_hash = Some(diagram.content_hash());
    m.metrics = metrics;
    m.save(dir.join("manifest.json"))
}

fn scaled_windows(series: &MultivariateSeries, ckpt: &ForecastCheckpoint, first_target: usize, first_start: usize) -> WindowedSeries {
    let mut ws = all_windows(series, ckpt.config.lookback, ckpt.config.horizon);
    ws.samples.retain(|w| w.target_index >= first_target && w.start >= first_start);
    for w in &mut ws.samples {
        for (k, row) in w.window.iter_mut().enumerate() {
            row.iter_mut().for_each(|v| *v = ckpt.scaler.transform(k, *v));
        }
        for (k, v) in w.target.iter_mut().enumerate() {
            *v = ckpt.scaler.transform(k, *v);
        }
    }
    ws
}

fn forecast_outputs(
    dir: &Path,
    series: &MultivariateSeries,
    f: &Forecaster,
    ckpt: &ForecastCheckpoint,
    test: &WindowedSeries,
) -> Result<(serde_json::Value, PathBuf)> {
    let scores = evaluate(f, test, &ckpt.scaler)?;
    let truth: Vec<Vec<f64>> = test.targets().iter().map(|r| ckpt.scaler.inverse_row(r)).collect();
    let naive = rse(&truth, &persistence_forecast(test, &ckpt.scaler))?;
    let pred = predict_original(f, test, &ckpt.scaler)?;
    let stamps: Vec<usize> = test.samples.iter().map(|w| w.target_index).collect();
    let mut buf = Vec::new();
    write_forecast_csv(&mut buf, series.names(), &stamps, &pred)?;
    let path = dir.join("predictions.csv");
    write(&path, buf)?;
    let metrics = json!({
        "kind": "forecast",
        "model": ckpt.config.architecture.name(),
        "horizon": ckpt.config.horizon,
        "rse": scores.rse,
        "corr": scores.corr,
        "persistence_rse": naive,
        "n_test": test.len(),
        "n_params": f.n_params(),
    });
    Ok((metrics, path))
}

pub fn ts_train(a: &TsTrainArgs) -> Result<()> {
    let input = resolve_input(&a.input);
    let series = MultivariateSeries::load(&input)?;
    let overrides = TsOverrides {
        lookback: a.lookback,
        horizon: a.horizon,
        hidden: a.hidden,
        train_fraction: a.train_fraction,
    };
    let cfg = forecast_config(&a.train, &overrides)?;
    let splits = make_windows(&series, cfg.lookback, cfg.horizon, cfg.split)?;
    let (graph, diagram) = build_series_graph(&series, splits.train_end, cfg.similarity)?;
    let init = Forecaster::new(&diagram, series.n_series(), &cfg)?;
    let (f, history) = train_forecaster(&init, &splits, &cfg.train)?;
    let ckpt = ForecastCheckpoint::new(&f, &diagram, &cfg, &splits.scaler);

    let dir = &a.out_dir;
    let paths = [dir.join("forecaster.json"), dir.join("graph.json"), dir.join("hasse.json"), dir.join("history.csv"), dir.join("metrics.json")];
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    ckpt.save(&paths[0])?;
    write(&paths[1], graph.with_labels(series.names().to_vec())?.to_json()?)?;
    write(&paths[2], diagram.to_json()?)?;
    let mut buf = Vec::new();
    history.write_csv(&mut buf)?;
    write(&paths[3], buf)?;
    let (mut metrics, pred_path) = forecast_outputs(dir, &series, &f, &ckpt, &splits.test)?;
    metrics["epochs_run"] = json!(history.epochs.len());
    metrics["best_epoch"] = json!(history.best_epoch);
    write(&paths[4], serde_json::to_string_pretty(&metrics)?)?;
    log::info!("test RSE {} CORR {}", metrics["rse"], metrics["corr"]);
    println!("{}", serde_json::to_string(&metrics)?);

    let mut m = RunManifest::new("ts train", cfg.train.seed, &cfg, series.content_hash())?;
    m.inputs = display(&[&input]);
    m.outputs = paths.iter().chain([&pred_path]).map(|p| p.display().to_string()).collect();
    m.diagram_hash = Some(diagram.content_hash());
    m.metrics = metrics;
    m.save(dir.join("manifest.json"))
}

pub fn ts_eval(a: &TsEvalArgs) -> Result<()> {
    let input = resolve_input(&a.input);
    let series = MultivariateSeries::load(&input)?;
    let ckpt = ForecastCheckpoint::load(&a.model)?;
    if series.n_series() != ckpt.n_series {
        return Err(Error::Dimension(format!("model expects {} series, input has {}", ckpt.n_series, series.n_series())));
    }
    let hasse_path = a.hasse.clone().unwrap_or_else(|| a.model.with_file_name("hasse.json"));
    let diagram = load_hasse(&hasse_path)?;
    let f = ckpt.restore(&diagram)?;
    // the test span of the training split: targets past the validation span,
    // windows starting after the training span
    let t = series.len() as f64;
    let split = ckpt.config.split;
    let test = scaled_windows(&series, &ckpt, (t * (split.train + split.valid)).floor() as usize, (t * split.train).floor() as usize);
    if test.is_empty() {
        return Err(Error::Degenerate("series has no windows in the test span".into()));
    }
    let (metrics, pred_path) = forecast_outputs(&a.out_dir, &series, &f, &ckpt, &test)?;
    println!("{}", serde_json::to_string(&metrics)?);

    let mut m = RunManifest::new("ts eval", ckpt.config.train.seed, &ckpt.config, series.content_hash())?;
    m.inputs = display(&[&input, &a.model, &hasse_path]);
    m.outputs = display(&[&pred_path]);
    m.diagram_hash = Some(diagram.content_hash());
    m.metrics = metrics;
    m.save(a.out_dir.join("manifest.json"))
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut tabular: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut forecasts = Vec::new();
    for path in &a.manifests {
        let m = RunManifest::load(path)?;
        let metrics = &m.metrics;
        let model = metrics["model"].as_str().unwrap_or("unknown").to_string();
        match metrics["kind"].as_str() {
            Some("tabular") => {
                if let Some(r2) = metrics["r2"].as_f64() {
                    tabular.entry(model).or_default().push(r2);
                }
            }
            Some("forecast") => {
                let get = |k: &str| metrics[k].as_f64().ok_or_else(|| Error::Config(format!("{}: metric {k} missing", path.display())));
                let horizon = metrics["horizon"].as_u64().unwrap_or(0) as usize;
                forecasts.push(ForecastEntry { model, horizon, rse: get("rse")?, corr: get("corr")? });
                forecasts.push(ForecastEntry {
                    model: "persistence".into(),
                    horizon,
                    rse: get("persistence_rse")?,
                    corr: f64::NAN,
                });
            }
            _ => log::warn!("{}: {} run carries no reportable scores", path.display(), m.command),
        }
    }
    let mut tables: Vec<Table> = Vec::new();
    if !tabular.is_empty() {
        tables.push(tabular_table(&tabular)?);
    }
    if !forecasts.is_empty() {
        tables.push(forecast_table(&forecasts));
    }
    if tables.is_empty() {
        return Err(Error::Empty("no manifest carries tabular or forecasting scores".into()));
    }
    let text = match a.format.as_str() {
        "json" => serde_json::to_string_pretty(&tables)?,
        "csv" => tables.iter().map(Table::to_csv).collect::<Result<Vec<_>>>()?.join("\n"),
        "markdown" => tables.iter().map(|t| format!("## {}\n\n{}", t.title, t.to_markdown())).collect::<Vec<_>>().join("\n"),
        other => return Err(Error::Config(format!("unknown report format {other:?}"))),
    };
    match &a.out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

