use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use dglm_ppm::config::{ModelKind, RunConfig};
use dglm_ppm::dglm::ModelSpec;
use dglm_ppm::ef_models::ObservationModel;
use dglm_ppm::eval::{one_step_forecasts, ComparisonEntry, ForecastBand, ModelComparison};
use dglm_ppm::gibbs::{read_chain_jsonl, run_chain, summarize, write_chain_jsonl, ChainSample, PosteriorSummary};
use dglm_ppm::io::{load_series, Series};
use dglm_ppm::sim::{run_monte_carlo, StudyConfig};
use dglm_ppm::{Error, Result};

use crate::{CompareArgs, FitArgs, ForecastArgs, Overrides, SimulateArgs};

const OUT_ENV: &str = "DGLM_PPM_OUT";
const DEFAULT_OUT: &str = "dglm-ppm-out";

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Applies command-line values over the file and validates the result.
fn resolve(o: &Overrides) -> Result<RunConfig> {
    let mut cfg = load_config(o.config.as_deref())?;
    if let Some(d) = &o.data {
        cfg.data.source = d.clone();
    }
    if let Some(p) = o.pi_prior {
        cfg.prior.pi = p;
    }
    if let Some(p) = o.delta_prior {
        cfg.prior.delta = p;
    }
    let c = &mut cfg.chain;
    c.iterations = o.chain.unwrap_or(c.iterations);
    c.burn_in = o.burnin.unwrap_or(c.burn_in);
    c.thin = o.thin.unwrap_or(c.thin);
    c.seed = o.seed.unwrap_or(c.seed);
    c.chains = o.chains.unwrap_or(c.chains);
    if let Some(dir) = &o.out {
        cfg.output.dir = Some(dir.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output
        .dir
        .clone()
        .or_else(|| std::env::var(OUT_ENV).ok().filter(|s| !s.is_empty()))
        .unwrap_or_else(|| DEFAULT_OUT.into())
        .into()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Data(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    fs::write(path, body).map_err(io_err(path))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}

struct Fitted {
    series: Series,
    model: ObservationModel,
    spec: ModelSpec,
    samples: Vec<ChainSample>,
}

fn prepare(cfg: &RunConfig) -> Result<(Series, ObservationModel, ModelSpec)> {
    let series = load_series(&cfg.data.source)?;
    let model = cfg.observation_model()?;
    model.check_series(&series.y)?;
    let spec = cfg.model_spec(&series)?;
    Ok((series, model, spec))
}

/// Runs `chains` independent streams under one seed and concatenates them.
fn run_chains(cfg: &RunConfig, y: &[f64], model: &ObservationModel, spec: &ModelSpec) -> Result<Vec<ChainSample>> {
    let mut all = Vec::new();
    for stream in 0..cfg.chain.chains as u64 {
        let chain = cfg.chain_config(stream)?;
        log::info!(
            "chain {stream}: {} sweeps, {} retained",
            chain.iterations,
            chain.retained()
        );
        all.extend(run_chain(y, model, spec, &chain)?);
    }
    Ok(all)
}

fn fit_config(cfg: &RunConfig) -> Result<Fitted> {
    let (series, model, spec) = prepare(cfg)?;
    let samples = run_chains(cfg, &series.y, &model, &spec)?;
    Ok(Fitted {
        series,
        model,
        spec,
        samples,
    })
}

fn write_forecast(path: &Path, series: &Series, band: &ForecastBand) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "y", "mean", "lo", "hi"]).map_err(csv_err)?;
    for i in 0..series.len() {
        w.write_record([
            series.t[i].clone(),
            series.y[i].to_string(),
            band.mean[i].to_string(),
            band.lo[i].to_string(),
            band.hi[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_states(path: &Path, series: &Series, summary: &PosteriorSummary) -> Result<()> {
    let d = summary.product_estimate_m.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut head = vec!["t".to_string()];
    if d == 1 {
        head.push("m".into());
    } else {
        head.extend((1..=d).map(|k| format!("m{k}")));
    }
    w.write_record(&head).map_err(csv_err)?;
    for (t, m) in series.t.iter().zip(&summary.product_estimate_m) {
        let mut row = vec![t.clone()];
        row.extend(m.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Break probability after each observation, labelled by that observation's `t`.
fn write_breaks(path: &Path, series: &Series, summary: &PosteriorSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "prob"]).map_err(csv_err)?;
    for (t, p) in series.t.iter().zip(&summary.change_point_prob) {
        w.write_record([t.clone(), p.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_chain(path: &Path, samples: &[ChainSample]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_chain_jsonl(&mut w, samples).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    if args.dglm {
        cfg.model.kind = ModelKind::Dglm;
    }
    let dir = out_dir(&cfg);
    let f = fit_config(&cfg)?;
    let summary = summarize(&f.series.y, &f.model, &f.spec, &f.samples)?;
    let band = one_step_forecasts(&f.series.y, &f.model, &f.spec, &f.samples, args.mass)?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_chain(&dir.join("chain.jsonl"), &f.samples)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Data(e.to_string()))?;
    write_file(&dir.join("summary.json"), json.as_bytes())?;
    write_forecast(&dir.join("forecast.csv"), &f.series, &band)?;
    write_states(&dir.join("states.csv"), &f.series, &summary)?;
    write_breaks(&dir.join("change_points.csv"), &f.series, &summary)?;
    let hpd = |h: Option<(f64, f64)>| h.map_or("n/a".to_string(), |(a, b)| format!("[{a:.3}, {b:.3}]"));
    println!(
        "n = {}, samples = {}, delta mean {:.4} HPD {}, blocks mean {:.2} median {} HPD {}",
        summary.n,
        summary.samples,
        summary.delta_mean,
        hpd(summary.delta_hpd),
        summary.block_mean,
        summary.block_median,
        hpd(summary.block_hpd)
    );
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    cfg.simulate.replications = args.replications.unwrap_or(cfg.simulate.replications);
    cfg.simulate.n = args.n.unwrap_or(cfg.simulate.n);
    cfg.validate()?;
    let dir = out_dir(&cfg);
    let m = &cfg.model;
    let study = StudyConfig {
        model: cfg.observation_model()?,
        spec: ModelSpec {
            evolve_first_block: m.evolve_first_block,
            ..ModelSpec::local_level(m.f, m.g, m.m0, m.c0, m.delta0)
        },
        chain: cfg.chain_config(0)?,
    };
    let report = run_monte_carlo(cfg.simulate.replications, &cfg.generator_spec(), &study)?;
    report.write(&dir)?;
    let a = &report.aggregate;
    println!(
        "replications = {}, mean RB ppm {:.3}% dglm {:.3}%, mean delta ppm {:.4} dglm {:.4}, mean blocks {:.2}, background break prob {:.4}",
        report.replications.len(),
        a.overall_mean_rb_ppm,
        a.overall_mean_rb_dglm,
        a.mean_delta_ppm,
        a.mean_delta_dglm,
        a.mean_blocks_ppm,
        a.background_change_prob
    );
    println!("wrote {}", dir.display());
    Ok(())
}

fn label(cfg: &RunConfig, file: Option<&Path>) -> String {
    let stem = file
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned());
    let model = match cfg.model.kind {
        ModelKind::Dglm => "DGLM".to_string(),
        ModelKind::Ppm => format!("B({},{})", cfg.prior.pi[0], cfg.prior.pi[1]),
    };
    match stem {
        Some(s) => format!("{s}:{model}"),
        None => model,
    }
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let files: Vec<Option<PathBuf>> = if args.configs.is_empty() {
        vec![None]
    } else {
        args.configs.iter().cloned().map(Some).collect()
    };
    let mut models: Vec<(String, RunConfig)> = Vec::new();
    for file in &files {
        let overrides = Overrides {
            config: file.clone(),
            data: args.data.clone(),
            delta_prior: args.delta_prior,
            chain: args.chain,
            burnin: args.burnin,
            thin: args.thin,
            seed: args.seed,
            out: args.out.clone(),
            ..Overrides::default()
        };
        let base = resolve(&overrides)?;
        if args.pi_priors.is_empty() {
            models.push((label(&base, file.as_deref()), base));
        } else {
            for p in &args.pi_priors {
                let mut cfg = base.clone();
                cfg.prior.pi = *p;
                cfg.model.kind = ModelKind::Ppm;
                cfg.validate()?;
                models.push((label(&cfg, file.as_deref()), cfg));
            }
        }
    }
    if args.include_dglm {
        let mut cfg = models[0].1.clone();
        cfg.model.kind = ModelKind::Dglm;
        models.push(("DGLM".into(), cfg));
    }
    let dir = out_dir(&models[0].1);
    let mut entries = Vec::with_capacity(models.len());
    let mut y_ref: Option<Vec<f64>> = None;
    for (name, cfg) in &models {
        let f = fit_config(cfg)?;
        match &y_ref {
            Some(y) if *y != f.series.y => {
                return Err(Error::Config(format!(
                    "{name} uses a different series; models must share the data"
                )))
            }
            None => y_ref = Some(f.series.y.clone()),
            _ => {}
        }
        let summary = summarize(&f.series.y, &f.model, &f.spec, &f.samples)?;
        let band = one_step_forecasts(&f.series.y, &f.model, &f.spec, &f.samples, args.mass)?;
        entries.push(ComparisonEntry::from_fit(
            name.clone(),
            &f.samples,
            &summary,
            &band,
            &f.series.y,
        )?);
    }
    let cmp = ModelComparison::new(entries)?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_file(&dir.join("comparison.json"), cmp.to_json().as_bytes())?;
    write_file(&dir.join("comparison.csv"), cmp.to_csv()?.as_bytes())?;
    for e in &cmp.entries {
        println!(
            "{:<24} pmp {:.4}  mae {:.4}  mse {:.4}  delta {:.4}  blocks {:.2}",
            e.label, e.pmp, e.mae, e.mse, e.delta_mean, e.block_mean
        );
    }
    println!("best: {}", cmp.best().label);
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn forecast(args: &ForecastArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    if args.dglm {
        cfg.model.kind = ModelKind::Dglm;
    }
    let dir = out_dir(&cfg);
    let (series, model, spec) = prepare(&cfg)?;
    let samples = match &args.chain_file {
        Some(path) => {
            let file = File::open(path).map_err(io_err(path))?;
            let samples = read_chain_jsonl(BufReader::new(file)).map_err(|e| match e {
                Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
                other => other,
            })?;
            if let Some(s) = samples.iter().find(|s| s.u.n() != series.len()) {
                return Err(Error::Data(format!(
                    "{}: chain covers {} observations, series has {}",
                    path.display(),
                    s.u.n(),
                    series.len()
                )));
            }
            samples
        }
        None => run_chains(&cfg, &series.y, &model, &spec)?,
    };
    let band = one_step_forecasts(&series.y, &model, &spec, &samples, args.mass)?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_forecast(&dir.join("forecast.csv"), &series, &band)?;
    let outside = band.covers(&series.y).iter().filter(|c| !**c).count();
    println!(
        "{} observations, {outside} outside the {:.0}% band",
        series.len(),
        args.mass * 100.0
    );
    println!("wrote {}", dir.display());
    Ok(())
}
