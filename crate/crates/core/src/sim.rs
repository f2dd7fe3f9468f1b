//! Poisson local-level generator with level jumps and a Monte Carlo harness
//! comparing the partition model against the conventional DGLM.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dglm::ModelSpec;
use crate::ef_models::ObservationModel;
use crate::error::{domain, Error, Result};
use crate::gibbs::{run_chain, summarize, ChainConfig, PosteriorSummary};

/// Cap on the simulated log mean.
pub const GAMMA_CAP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// 1-based time of the first observation at the new level.
    pub t: usize,
    /// Additive shift of the Poisson mean, in counts.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub phi: f64,
    /// Variance of the log-mean innovations.
    pub w: f64,
    /// Log mean before the first observation.
    pub gamma0: f64,
    pub jumps: Vec<Jump>,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n: 100,
            phi: 0.99,
            w: 0.001,
            gamma0: 100f64.ln(),
            jumps: [20, 40, 60, 80].iter().map(|&t| Jump { t, shift: 100.0 }).collect(),
            seed: 1,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain("generator needs at least two observations");
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return domain(format!("phi must lie in (0, 1], got {}", self.phi));
        }
        if !(self.w >= 0.0) || !self.w.is_finite() || !self.gamma0.is_finite() {
            return domain("innovation variance must be non-negative and gamma0 finite");
        }
        for j in &self.jumps {
            if j.t <= 1 || j.t >= self.n {
                return domain(format!("jump time {} must lie strictly inside (1, {})", j.t, self.n));
            }
            if !j.shift.is_finite() {
                return domain("jump shifts must be finite");
            }
        }
        Ok(())
    }

    /// Zero-based indicator positions of the true breaks.
    pub fn break_positions(&self) -> Vec<usize> {
        self.jumps.iter().map(|j| j.t - 2).collect()
    }
}

/// Simulated counts and the true log means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulated {
    pub y: Vec<f64>,
    pub gamma: Vec<f64>,
}

pub fn generate<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<Simulated> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.w.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut gamma = Vec::with_capacity(spec.n);
    let mut y = Vec::with_capacity(spec.n);
    let mut g = spec.gamma0;
    for t in 1..=spec.n {
        g = spec.phi * g + noise.sample(rng);
        for j in spec.jumps.iter().filter(|j| j.t == t) {
            g = (g.exp() + j.shift).ln();
        }
        if g > GAMMA_CAP {
            log::warn!("log mean {g} capped at {GAMMA_CAP} at t = {t}");
            g = GAMMA_CAP;
        }
        if !g.is_finite() {
            return domain(format!("log mean is not finite at t = {t}"));
        }
        let lambda = g.exp();
        let draw = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::Domain(e.to_string()))?
                .sample(rng)
        } else {
            0.0
        };
        gamma.push(g);
        y.push(draw);
    }
    Ok(Simulated { y, gamma })
}

/// `100 (estimate - truth) / |truth|`; `None` when `truth == 0`.
pub fn relative_bias(estimate: f64, truth: f64) -> Option<f64> {
    (truth != 0.0).then(|| 100.0 * (estimate - truth) / truth.abs())
}

/// Per-observation running sums of relative bias and squared error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAccumulator {
    rb_sum: Vec<f64>,
    rb_count: Vec<usize>,
    sq_sum: Vec<f64>,
    reps: usize,
}

impl MetricAccumulator {
    pub fn new(n: usize) -> Self {
        Self {
            rb_sum: vec![0.0; n],
            rb_count: vec![0; n],
            sq_sum: vec![0.0; n],
            reps: 0,
        }
    }

    pub fn push(&mut self, estimate: &[f64], truth: &[f64]) {
        for t in 0..self.rb_sum.len() {
            if let Some(rb) = relative_bias(estimate[t], truth[t]) {
                self.rb_sum[t] += rb;
                self.rb_count[t] += 1;
            }
            self.sq_sum[t] += (estimate[t] - truth[t]).powi(2);
        }
        self.reps += 1;
    }

    pub fn mean_rb(&self) -> Vec<f64> {
        self.rb_sum
            .iter()
            .zip(&self.rb_count)
            .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect()
    }

    pub fn rmse(&self) -> Vec<f64> {
        self.sq_sum.iter().map(|s| (s / self.reps as f64).sqrt()).collect()
    }
}

/// Per-observation mean relative bias over replications (rows).
pub fn mean_rb_batch(estimates: &[Vec<f64>], truths: &[Vec<f64>]) -> Vec<f64> {
    let n = truths.first().map_or(0, Vec::len);
    (0..n)
        .map(|t| {
            let rbs: Vec<f64> = estimates
                .iter()
                .zip(truths)
                .filter_map(|(e, g)| relative_bias(e[t], g[t]))
                .collect();
            if rbs.is_empty() {
                f64::NAN
            } else {
                rbs.iter().sum::<f64>() / rbs.len() as f64
            }
        })
        .collect()
}

/// Per-observation root mean squared error over replications (rows).
pub fn rmse_batch(estimates: &[Vec<f64>], truths: &[Vec<f64>]) -> Vec<f64> {
    let n = truths.first().map_or(0, Vec::len);
    (0..n)
        .map(|t| {
            let s: f64 = estimates.iter().zip(truths).map(|(e, g)| (e[t] - g[t]).powi(2)).sum();
            (s / truths.len() as f64).sqrt()
        })
        .collect()
}

/// Fitted-model output kept per replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelRun {
    pub change_point_prob: Vec<f64>,
    pub delta_mean: f64,
    pub delta_hpd: Option<(f64, f64)>,
    pub block_mean: f64,
    /// Estimated linear predictor `F' m` per observation.
    pub estimate: Vec<f64>,
    pub rb: Vec<Option<f64>>,
}

impl ModelRun {
    fn from_summary(s: &PosteriorSummary, gamma: &[f64]) -> Self {
        Self {
            change_point_prob: s.change_point_prob.clone(),
            delta_mean: s.delta_mean,
            delta_hpd: s.delta_hpd,
            block_mean: s.block_mean,
            rb: s
                .linear_predictor
                .iter()
                .zip(gamma)
                .map(|(e, g)| relative_bias(*e, *g))
                .collect(),
            estimate: s.linear_predictor.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplicationResult {
    pub index: usize,
    pub series: Vec<f64>,
    pub true_states: Vec<f64>,
    pub ppm: ModelRun,
    pub dglm: ModelRun,
}

/// Everything the study needs besides the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub model: ObservationModel,
    pub spec: ModelSpec,
    pub chain: ChainConfig,
}

impl StudyConfig {
    /// Local level with `F = 0.99`, `G = 1`, `(m0, C0) = (1, 10)`.
    pub fn standard() -> Self {
        Self {
            model: ObservationModel::poisson(),
            spec: ModelSpec::local_level(0.99, 1.0, 1.0, 10.0, 0.5),
            chain: ChainConfig::default(),
        }
    }
}

/// Per-observation curves and headline numbers over all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StudyAggregate {
    pub mean_rb_ppm: Vec<f64>,
    pub mean_rb_dglm: Vec<f64>,
    pub rmse_ppm: Vec<f64>,
    pub rmse_dglm: Vec<f64>,
    pub mean_change_point_prob: Vec<f64>,
    pub overall_mean_rb_ppm: f64,
    pub overall_mean_rb_dglm: f64,
    pub median_rb_ppm: f64,
    pub median_rb_dglm: f64,
    pub mean_delta_ppm: f64,
    pub mean_delta_dglm: f64,
    pub mean_blocks_ppm: f64,
    /// Share of replications with break probability >= 0.95 at each jump.
    pub jump_detection_rate: Vec<f64>,
    /// Mean break probability away from the jumps.
    pub background_change_prob: f64,
    /// Mean |RB| over the five observations from each jump: (t, ppm, dglm).
    pub post_jump_abs_rb: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub generator: GeneratorSpec,
    pub replications: Vec<ReplicationResult>,
    pub aggregate: StudyAggregate,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One replication: simulate, fit both models, score.
pub fn run_replication(index: usize, gen: &GeneratorSpec, study: &StudyConfig) -> Result<ReplicationResult> {
    let base = 3 * index as u64;
    let sim = generate(gen, &mut rng_for(gen.seed, base))?;
    let fit = |chain: ChainConfig| -> Result<PosteriorSummary> {
        let samples = run_chain(&sim.y, &study.model, &study.spec, &chain)?;
        summarize(&sim.y, &study.model, &study.spec, &samples)
    };
    let ppm = fit(ChainConfig {
        seed: gen.seed,
        stream: base + 1,
        ..study.chain.clone()
    })?;
    let dglm = fit(ChainConfig {
        seed: gen.seed,
        stream: base + 2,
        ..study.chain.clone()
    }
    .conventional_dglm())?;
    Ok(ReplicationResult {
        index,
        ppm: ModelRun::from_summary(&ppm, &sim.gamma),
        dglm: ModelRun::from_summary(&dglm, &sim.gamma),
        series: sim.y,
        true_states: sim.gamma,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    s / c as f64
}

pub fn aggregate(gen: &GeneratorSpec, reps: &[ReplicationResult]) -> StudyAggregate {
    let n = gen.n;
    let truths: Vec<Vec<f64>> = reps.iter().map(|r| r.true_states.clone()).collect();
    let est_ppm: Vec<Vec<f64>> = reps.iter().map(|r| r.ppm.estimate.clone()).collect();
    let est_dglm: Vec<Vec<f64>> = reps.iter().map(|r| r.dglm.estimate.clone()).collect();
    let breaks = gen.break_positions();
    let all_rb = |pick: fn(&ReplicationResult) -> &ModelRun| -> Vec<f64> {
        reps.iter().flat_map(|r| pick(r).rb.iter().flatten().copied()).collect()
    };
    let rb_ppm = all_rb(|r| &r.ppm);
    let rb_dglm = all_rb(|r| &r.dglm);
    let post_jump = gen
        .jumps
        .iter()
        .map(|j| {
            let window = (j.t - 1)..(j.t + 4).min(n);
            let score = |pick: fn(&ReplicationResult) -> &ModelRun| {
                mean(reps.iter().flat_map(|r| {
                    let rb = &pick(r).rb;
                    window.clone().filter_map(move |t| rb[t].map(f64::abs))
                }))
            };
            (j.t, score(|r| &r.ppm), score(|r| &r.dglm))
        })
        .collect();
    StudyAggregate {
        mean_rb_ppm: mean_rb_batch(&est_ppm, &truths),
        mean_rb_dglm: mean_rb_batch(&est_dglm, &truths),
        rmse_ppm: rmse_batch(&est_ppm, &truths),
        rmse_dglm: rmse_batch(&est_dglm, &truths),
        mean_change_point_prob: (0..n - 1)
            .map(|r| mean(reps.iter().map(|x| x.ppm.change_point_prob[r])))
            .collect(),
        overall_mean_rb_ppm: mean(rb_ppm.iter().copied()),
        overall_mean_rb_dglm: mean(rb_dglm.iter().copied()),
        median_rb_ppm: median(rb_ppm),
        median_rb_dglm: median(rb_dglm),
        mean_delta_ppm: mean(reps.iter().map(|r| r.ppm.delta_mean)),
        mean_delta_dglm: mean(reps.iter().map(|r| r.dglm.delta_mean)),
        mean_blocks_ppm: mean(reps.iter().map(|r| r.ppm.block_mean)),
        jump_detection_rate: breaks
            .iter()
            .map(|&r| {
                mean(
                    reps.iter()
                        .map(|x| f64::from(u8::from(x.ppm.change_point_prob[r] >= 0.95))),
                )
            })
            .collect(),
        background_change_prob: mean(
            reps.iter()
                .flat_map(|x| x.ppm.change_point_prob.iter().enumerate())
                .filter(|(r, _)| !breaks.contains(r))
                .map(|(_, p)| *p),
        ),
        post_jump_abs_rb: post_jump,
    }
}

/// Runs `l` independent replications in parallel.
pub fn run_monte_carlo(l: usize, gen: &GeneratorSpec, study: &StudyConfig) -> Result<StudyReport> {
    if l == 0 {
        return domain("need at least one replication");
    }
    gen.validate()?;
    let replications = (0..l)
        .into_par_iter()
        .map(|i| run_replication(i, gen, study))
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyReport {
        aggregate: aggregate(gen, &replications),
        generator: gen.clone(),
        replications,
    })
}

fn matrix_csv<'a>(header: &[String], rows: impl Iterator<Item = (usize, &'a [f64])>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(header).map_err(err)?;
    for (i, row) in rows {
        let mut rec = vec![i.to_string()];
        rec.extend(
            row.iter()
                .map(|v| if v.is_nan() { String::new() } else { v.to_string() }),
        );
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl StudyReport {
    /// Writes `report.json`, `change_point_prob.csv`, `rb_ppm.csv`,
    /// `rb_dglm.csv` and `curves.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Data(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))?;
        fs::write(dir.join("report.json"), json).map_err(io)?;

        let n = self.generator.n;
        let mut head = vec!["replication".to_string()];
        head.extend((1..n).map(|r| format!("r{r}")));
        let cp: Vec<&[f64]> = self
            .replications
            .iter()
            .map(|r| r.ppm.change_point_prob.as_slice())
            .collect();
        fs::write(
            dir.join("change_point_prob.csv"),
            matrix_csv(&head, cp.into_iter().enumerate())?,
        )
        .map_err(io)?;

        let mut head = vec!["replication".to_string()];
        head.extend((1..=n).map(|t| format!("t{t}")));
        for (name, pick) in [
            (
                "rb_ppm.csv",
                (|r: &ReplicationResult| &r.ppm) as fn(&ReplicationResult) -> &ModelRun,
            ),
            ("rb_dglm.csv", |r: &ReplicationResult| &r.dglm),
        ] {
            let rows: Vec<Vec<f64>> = self
                .replications
                .iter()
                .map(|r| pick(r).rb.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
                .collect();
            let body = matrix_csv(&head, rows.iter().map(Vec::as_slice).enumerate())?;
            fs::write(dir.join(name), body).map_err(io)?;
        }

        let a = &self.aggregate;
        let head: Vec<String> = [
            "t",
            "mean_rb_ppm",
            "mean_rb_dglm",
            "rmse_ppm",
            "rmse_dglm",
            "change_point_prob",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|t| {
                vec![
                    a.mean_rb_ppm[t],
                    a.mean_rb_dglm[t],
                    a.rmse_ppm[t],
                    a.rmse_dglm[t],
                    a.mean_change_point_prob.get(t).copied().unwrap_or(f64::NAN),
                ]
            })
            .collect();
        let body = matrix_csv(
            &head,
            rows.iter().map(Vec::as_slice).enumerate().map(|(t, r)| (t + 1, r)),
        )?;
        fs::write(dir.join("curves.csv"), body).map_err(io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn relative_bias_examples() {
        assert_relative_eq!(relative_bias(1.01, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(relative_bias(0.9, -1.0).unwrap(), 190.0, epsilon = 1e-12);
        assert_eq!(relative_bias(1.0, 0.0), None);
    }

    #[test]
    fn noiseless_level_has_constant_mean() {
        let spec = GeneratorSpec {
            n: 10_000,
            phi: 1.0,
            w: 0.0,
            gamma0: 5f64.ln(),
            jumps: vec![],
            seed: 3,
        };
        let sim = generate(&spec, &mut rng_for(3, 0)).unwrap();
        let mean = sim.y.iter().sum::<f64>() / sim.y.len() as f64;
        assert!((mean - 5.0).abs() < 0.07, "{mean}");
        assert!(sim.gamma.iter().all(|&g| (g - 5f64.ln()).abs() < 1e-12));
    }

    #[test]
    fn ar1_moments_across_paths() {
        // gamma_t = phi gamma_{t-1} + eta, gamma_0 = 0: mean 0,
        // variance W (1 - phi^(2t)) / (1 - phi^2)
        let (phi, w, t) = (0.9, 0.04, 30);
        let spec = GeneratorSpec {
            n: t,
            phi,
            w,
            gamma0: 0.0,
            jumps: vec![],
            seed: 0,
        };
        let paths = 100_000;
        let mut rng = rng_for(8, 0);
        let ends: Vec<f64> = (0..paths)
            .map(|_| *generate(&spec, &mut rng).unwrap().gamma.last().unwrap())
            .collect();
        let m = ends.iter().sum::<f64>() / paths as f64;
        let v = ends.iter().map(|g| (g - m).powi(2)).sum::<f64>() / (paths - 1) as f64;
        let v_exact = w * (1.0 - phi.powi(2 * t as i32)) / (1.0 - phi * phi);
        assert!(m.abs() < 4.0 * (v_exact / paths as f64).sqrt(), "mean {m}");
        // variance of the sample variance is about 2 v^2 / paths
        assert!(
            (v - v_exact).abs() < 4.0 * v_exact * (2.0 / paths as f64).sqrt(),
            "{v} vs {v_exact}"
        );
    }

    #[test]
    fn jumps_shift_the_mean_by_the_requested_counts() {
        // the log level decays between jumps, so the shift is checked at the
        // jump instant against the undisturbed AR step
        let spec = GeneratorSpec::default();
        let mut rng = rng_for(5, 0);
        let mut shifts = Vec::new();
        for _ in 0..200 {
            let sim = generate(&spec, &mut rng).unwrap();
            for j in &spec.jumps {
                let t = j.t - 1;
                shifts.push(sim.gamma[t].exp() - (spec.phi * sim.gamma[t - 1]).exp());
            }
        }
        let d = shifts.iter().sum::<f64>() / shifts.len() as f64;
        assert!((d - 100.0).abs() < 1.0, "{d}");
        let noiseless = GeneratorSpec { w: 0.0, ..spec };
        let sim = generate(&noiseless, &mut rng).unwrap();
        for j in &noiseless.jumps {
            let t = j.t - 1;
            assert_relative_eq!(
                sim.gamma[t].exp() - (0.99 * sim.gamma[t - 1]).exp(),
                100.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let spec = GeneratorSpec::default();
        let a = generate(&spec, &mut rng_for(9, 4)).unwrap();
        let b = generate(&spec, &mut rng_for(9, 4)).unwrap();
        assert_eq!(a, b);
        let c = generate(&spec, &mut rng_for(9, 5)).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn generator_validation() {
        let ok = GeneratorSpec::default();
        assert!(GeneratorSpec { phi: 0.0, ..ok.clone() }.validate().is_err());
        assert!(GeneratorSpec { w: -1.0, ..ok.clone() }.validate().is_err());
        assert!(GeneratorSpec {
            jumps: vec![Jump { t: 100, shift: 1.0 }],
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GeneratorSpec {
            jumps: vec![Jump { t: 1, shift: 1.0 }],
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn streaming_and_batch_metrics_agree() {
        let mut rng = rng_for(2, 0);
        let truths: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..12).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let mut ests = truths.clone();
        for row in &mut ests {
            for v in row.iter_mut() {
                *v += rng.random_range(-0.5..0.5);
            }
        }
        ests[0][3] = 1.0;
        let mut truths = truths;
        truths[2][5] = 0.0;
        let mut acc = MetricAccumulator::new(12);
        for (e, g) in ests.iter().zip(&truths) {
            acc.push(e, g);
        }
        for (a, b) in acc.mean_rb().iter().zip(mean_rb_batch(&ests, &truths)) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        for (a, b) in acc.rmse().iter().zip(rmse_batch(&ests, &truths)) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn homogeneous_replication_has_low_break_probabilities() {
        // constant level: phi = 1 and no innovations
        let gen = GeneratorSpec {
            n: 40,
            phi: 1.0,
            w: 0.0,
            jumps: vec![],
            seed: 21,
            ..GeneratorSpec::default()
        };
        let study = StudyConfig {
            chain: ChainConfig {
                iterations: 1_500,
                burn_in: 500,
                thin: 2,
                ..ChainConfig::default()
            },
            ..StudyConfig::standard()
        };
        let report = run_monte_carlo(1, &gen, &study).unwrap();
        let cp = &report.replications[0].ppm.change_point_prob;
        let mean = cp.iter().sum::<f64>() / cp.len() as f64;
        // Beta(1, 1) on pi puts a uniform prior on the block count, so the
        // prior break probability is 0.5; the data must pull well below it.
        assert!(mean < 0.3, "{mean}");
        assert!(report.aggregate.jump_detection_rate.is_empty());
        let again = run_monte_carlo(1, &gen, &study).unwrap();
        assert_eq!(report, again);
    }
}
