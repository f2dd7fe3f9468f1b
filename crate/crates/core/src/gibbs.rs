//! Gibbs sampler over the change-point indicators with interleaved ARMS
//! updates of the discount factor, and posterior summaries of a chain.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arms::{draw_delta, ArmsConfig, ArmsSampler, BetaPrior, DeltaPosterior};
use crate::dglm::{Filter, ModelSpec, StateMoments};
use crate::ef_models::ObservationModel;
use crate::error::{domain, Error, Result};
use crate::eval::hpd_interval;
use crate::partition::{CohesionPrior, IndicatorVector};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialU {
    /// Single block.
    #[default]
    AllOnes,
    /// A break after every observation.
    AllZeros,
    /// Each indicator is 1 with probability `p`.
    Random(f64),
    Given(IndicatorVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    /// Positions visited left to right.
    #[default]
    Sequential,
    /// A fresh random permutation of positions each sweep.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// ChaCha stream; distinct streams give independent chains under one seed.
    pub stream: u64,
    pub initial_u: InitialU,
    pub delta_prior: BetaPrior,
    pub cohesion: CohesionPrior,
    pub scan: ScanOrder,
    /// When false the discount factor stays at the spec's value.
    pub sample_delta: bool,
    /// When false the partition stays at `initial_u`.
    pub sample_partition: bool,
    pub arms: ArmsConfig,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 4_000,
            burn_in: 1_000,
            thin: 3,
            seed: 0,
            stream: 0,
            initial_u: InitialU::AllOnes,
            delta_prior: BetaPrior::UNIFORM,
            cohesion: CohesionPrior::BetaPi { a_pi: 1.0, b_pi: 1.0 },
            scan: ScanOrder::Sequential,
            sample_delta: true,
            sample_partition: true,
            arms: ArmsConfig::default(),
        }
    }
}

impl ChainConfig {
    /// Conventional DGLM: a break after every observation, only the
    /// discount factor is sampled.
    pub fn conventional_dglm(mut self) -> Self {
        self.initial_u = InitialU::AllZeros;
        self.sample_partition = false;
        self
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.thin == 0 {
            return Err(Error::Config("iterations and thin must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if self.retained() == 0 {
            return Err(Error::Config("burn-in and thinning leave no retained samples".into()));
        }
        if let InitialU::Random(p) = self.initial_u {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "initial indicator probability {p} outside [0, 1]"
                )));
            }
        }
        self.cohesion.validate()?;
        self.delta_prior.validate()
    }

    fn keeps(&self, sweep: usize) -> bool {
        sweep > self.burn_in && (sweep - self.burn_in).is_multiple_of(self.thin)
    }
}

/// One retained draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSample {
    /// 1-based sweep index.
    pub iteration: usize,
    pub u: IndicatorVector,
    pub delta: f64,
    /// Total one-step log predictive of the series under `(u, delta)`.
    pub log_pred: f64,
    pub log_posterior: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainRecord {
    iter: usize,
    u: String,
    delta: f64,
    #[serde(rename = "logPosterior")]
    log_posterior: f64,
    #[serde(rename = "logPred")]
    log_pred: f64,
}

impl ChainSample {
    pub fn num_blocks(&self) -> usize {
        self.u.num_blocks()
    }

    pub fn to_json_line(&self) -> String {
        let rec = ChainRecord {
            iter: self.iteration,
            u: self.u.to_string(),
            delta: self.delta,
            log_posterior: self.log_posterior,
            log_pred: self.log_pred,
        };
        serde_json::to_string(&rec).expect("plain record serialises")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let rec: ChainRecord = serde_json::from_str(line).map_err(|e| Error::Data(format!("bad chain record: {e}")))?;
        let u: IndicatorVector = rec.u.parse()?;
        if !(rec.delta > 0.0 && rec.delta < 1.0) {
            return Err(Error::Data(format!("chain record delta {} outside (0, 1)", rec.delta)));
        }
        Ok(Self {
            iteration: rec.iter,
            u,
            delta: rec.delta,
            log_pred: rec.log_pred,
            log_posterior: rec.log_posterior,
        })
    }
}

pub fn write_chain_jsonl<W: Write>(mut w: W, samples: &[ChainSample]) -> std::io::Result<()> {
    for s in samples {
        writeln!(w, "{}", s.to_json_line())?;
    }
    Ok(())
}

/// Reads a chain file; blank lines are skipped, all samples must share `n`.
pub fn read_chain_jsonl<R: BufRead>(r: R) -> Result<Vec<ChainSample>> {
    let mut out: Vec<ChainSample> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Data(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let s = ChainSample::from_json_line(&line).map_err(|e| Error::Data(format!("line {}: {e}", i + 1)))?;
        if let Some(first) = out.first() {
            if first.u.n() != s.u.n() {
                return Err(Error::Data(format!(
                    "line {}: series length changes within the chain",
                    i + 1
                )));
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// `U_r = 1` when `R_r >= (1 - v)/v`, `v ~ U(0, 1)`; equivalent to a
/// Bernoulli(R/(1+R)) draw.
#[inline]
pub fn accept_merge(log_r: f64, v: f64) -> bool {
    log_r >= (1.0 - v).ln() - v.ln()
}

fn total_log_pred(y: &[f64], model: &ObservationModel, spec: &ModelSpec, u: &IndicatorVector) -> Result<f64> {
    let mut f = Filter::new_unchecked(y, model, spec);
    let mut s = f.initial_state();
    f.run_from(&mut s, 0, |t| u.starts_block(t))
}

/// Log ratio of the configuration with `u[r] = 1` to the one with
/// `u[r] = 0`, other indicators held at `u`. `r` is zero-based, so it is
/// the gap between observations `r` and `r + 1`.
pub fn flip_log_ratio(
    r: usize,
    u: &IndicatorVector,
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    cohesion: &CohesionPrior,
) -> Result<f64> {
    let n = y.len();
    if u.n() != n {
        return Err(Error::InvalidPartition(
            "indicator length does not match the series".into(),
        ));
    }
    if r + 1 >= n {
        return domain(format!("flip position {r} outside 0..{}", n.saturating_sub(1)));
    }
    model.check_series(y)?;
    spec.validate(n)?;
    let mut one = u.clone();
    one.as_mut_slice()[r] = true;
    let mut zero = u.clone();
    zero.as_mut_slice()[r] = false;
    let lp_one = total_log_pred(y, model, spec, &one)?;
    let lp_zero = total_log_pred(y, model, spec, &zero)?;
    Ok(lp_one - lp_zero + cohesion.log_merge_ratio(zero.num_blocks(), n)?)
}

/// Running state of one chain.
pub struct Chain<'a> {
    y: &'a [f64],
    model: &'a ObservationModel,
    spec: ModelSpec,
    config: ChainConfig,
    rng: ChaCha8Rng,
    arms: ArmsSampler,
    u: IndicatorVector,
    blocks: usize,
    log_pred: f64,
    sweeps: usize,
    order: Vec<usize>,
}

impl<'a> Chain<'a> {
    pub fn new(y: &'a [f64], model: &'a ObservationModel, spec: &ModelSpec, config: ChainConfig) -> Result<Self> {
        config.validate()?;
        model.validate()?;
        model.check_series(y)?;
        spec.validate(y.len())?;
        if y.is_empty() {
            return Err(Error::Data("empty series".into()));
        }
        let n = y.len();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(config.stream);
        let u = match &config.initial_u {
            InitialU::AllOnes => IndicatorVector::all_ones(n),
            InitialU::AllZeros => IndicatorVector::all_zeros(n),
            InitialU::Random(p) => IndicatorVector::new((1..n).map(|_| rng.random_bool(*p)).collect()),
            InitialU::Given(u) if u.n() == n => u.clone(),
            InitialU::Given(u) => {
                return Err(Error::InvalidPartition(format!(
                    "initial partition covers {} observations, series has {n}",
                    u.n()
                )))
            }
        };
        let mut spec = spec.clone();
        if config.sample_delta {
            spec.delta = spec.delta.clamp(crate::arms::DELTA_EPS, 1.0 - crate::arms::DELTA_EPS);
        }
        let log_pred = total_log_pred(y, model, &spec, &u)
            .map_err(|e| Error::Chain(format!("initial partition has no valid filter pass: {e}")))?;
        Ok(Self {
            y,
            model,
            blocks: u.num_blocks(),
            arms: ArmsSampler::new(config.arms),
            order: (0..n - 1).collect(),
            spec,
            config,
            rng,
            u,
            log_pred,
            sweeps: 0,
        })
    }

    pub fn indicators(&self) -> &IndicatorVector {
        &self.u
    }

    pub fn delta(&self) -> f64 {
        self.spec.delta
    }

    pub fn log_pred(&self) -> f64 {
        self.log_pred
    }

    pub fn log_posterior(&self) -> Result<f64> {
        let mut lp = self.log_pred + self.config.cohesion.log_weight(self.blocks, self.y.len())?;
        if self.config.sample_delta {
            lp += self.config.delta_prior.ln_pdf(self.spec.delta);
        }
        Ok(lp)
    }

    pub fn sample(&self) -> Result<ChainSample> {
        Ok(ChainSample {
            iteration: self.sweeps,
            u: self.u.clone(),
            delta: self.spec.delta,
            log_pred: self.log_pred,
            log_posterior: self.log_posterior()?,
        })
    }

    /// One pass over the indicators followed by one discount-factor draw.
    pub fn sweep(&mut self) -> Result<()> {
        if self.config.sample_partition {
            self.sweep_indicators()?;
        }
        if self.config.sample_delta {
            self.update_delta()?;
        }
        self.sweeps += 1;
        Ok(())
    }

    fn sweep_indicators(&mut self) -> Result<()> {
        let n = self.y.len();
        if n < 2 {
            return Ok(());
        }
        if self.config.scan == ScanOrder::Random {
            self.order.shuffle(&mut self.rng);
        }
        let mut filter = Filter::new_unchecked(self.y, self.model, &self.spec);
        let init = filter.initial_state();
        // `prefix` holds the state after observations 0..prefix_len
        let mut prefix = init.clone();
        let mut prefix_len = 0usize;
        let mut prefix_lp = 0.0;
        let mut work = StateMoments {
            m: init.m.clone(),
            c: init.c.clone(),
        };
        for k in 0..n - 1 {
            let r = self.order[k];
            if prefix_len > r + 1 {
                prefix.clone_from(&init);
                prefix_len = 0;
                prefix_lp = 0.0;
            }
            while prefix_len <= r {
                let t = prefix_len;
                prefix_lp += filter
                    .step(&mut prefix, t, self.u.starts_block(t))
                    .map_err(|e| Error::Chain(format!("filter failed at observation {t}: {e}")))?;
                prefix_len += 1;
            }

            let cur = self.u.as_slice()[r];
            self.u.as_mut_slice()[r] = !cur;
            work.clone_from(&prefix);
            let u = &self.u;
            let alt = match filter.run_from(&mut work, r + 1, |t| u.starts_block(t)) {
                Ok(suffix) => prefix_lp + suffix,
                Err(_) => f64::NEG_INFINITY,
            };
            self.u.as_mut_slice()[r] = cur;

            let (lp_one, lp_zero) = if cur {
                (self.log_pred, alt)
            } else {
                (alt, self.log_pred)
            };
            let b_break = if cur { self.blocks + 1 } else { self.blocks };
            let log_r = lp_one - lp_zero + self.config.cohesion.log_merge_ratio(b_break, n)?;
            if log_r.is_nan() {
                return Err(Error::Chain(format!("flip ratio undefined at position {r}")));
            }
            let v: f64 = self.rng.random();
            let new = accept_merge(log_r, v);
            if new != cur {
                self.u.as_mut_slice()[r] = new;
                self.log_pred = alt;
                self.blocks = if new { self.blocks - 1 } else { self.blocks + 1 };
            }
        }
        Ok(())
    }

    fn update_delta(&mut self) -> Result<()> {
        let current = self.spec.delta;
        let mut ctx = DeltaPosterior::new(self.y, self.model, &self.spec, &self.u, self.config.delta_prior)?;
        ctx.remember(current, self.log_pred);
        let delta = draw_delta(&mut self.arms, &mut ctx, current, &mut self.rng).map_err(|e| {
            Error::Chain(format!(
                "discount factor update failed at sweep {}: {e}",
                self.sweeps + 1
            ))
        })?;
        if delta != current {
            self.spec.delta = delta;
            self.log_pred = total_log_pred(self.y, self.model, &self.spec, &self.u)
                .map_err(|e| Error::Chain(format!("filter failed at delta {delta}: {e}")))?;
        }
        Ok(())
    }
}

/// Runs a chain, handing each retained sample to `sink`.
pub fn run_chain_with(
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    config: &ChainConfig,
    mut sink: impl FnMut(ChainSample) -> Result<()>,
) -> Result<usize> {
    let mut chain = Chain::new(y, model, spec, config.clone())?;
    let mut kept = 0;
    for sweep in 1..=config.iterations {
        chain.sweep()?;
        if config.keeps(sweep) {
            sink(chain.sample()?)?;
            kept += 1;
        }
    }
    Ok(kept)
}

pub fn run_chain(
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    config: &ChainConfig,
) -> Result<Vec<ChainSample>> {
    let mut out = Vec::with_capacity(config.retained());
    run_chain_with(y, model, spec, config, |s| {
        out.push(s);
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PosteriorSummary {
    pub n: usize,
    pub samples: usize,
    /// Frequency of a break after each observation (length `n - 1`).
    pub change_point_prob: Vec<f64>,
    pub block_count_samples: Vec<usize>,
    pub delta_samples: Vec<f64>,
    /// Sample average of the filtered state mean at each observation.
    pub product_estimate_m: Vec<Vec<f64>>,
    /// Sample average of `F_t' m_t`.
    pub linear_predictor: Vec<f64>,
    pub delta_mean: f64,
    pub block_mean: f64,
    pub block_median: f64,
    pub delta_hpd: Option<(f64, f64)>,
    pub block_hpd: Option<(f64, f64)>,
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Posterior summaries from retained samples (possibly several chains).
pub fn summarize(
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    samples: &[ChainSample],
) -> Result<PosteriorSummary> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let n = y.len();
    let d = spec.dim();
    let mut breaks = vec![0usize; n.saturating_sub(1)];
    let mut m_sum = vec![vec![0.0; d]; n];
    let mut lin_sum = vec![0.0; n];
    for s in samples {
        if s.u.n() != n {
            return Err(Error::InvalidPartition(format!(
                "sample covers {} observations, series has {n}",
                s.u.n()
            )));
        }
        for (b, &v) in breaks.iter_mut().zip(s.u.as_slice()) {
            *b += usize::from(!v);
        }
        let sp = spec.with_delta(s.delta);
        let mut f = Filter::new(y, model, &sp)?;
        let mut st = f.initial_state();
        for t in 0..n {
            f.step(&mut st, t, s.u.starts_block(t))?;
            let fv = sp.regressors.at(t);
            for (acc, v) in m_sum[t].iter_mut().zip(&st.m) {
                *acc += v;
            }
            lin_sum[t] += fv.iter().zip(&st.m).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    let k = samples.len() as f64;
    let block_count_samples: Vec<usize> = samples.iter().map(|s| s.num_blocks()).collect();
    let delta_samples: Vec<f64> = samples.iter().map(|s| s.delta).collect();
    let blocks_f: Vec<f64> = block_count_samples.iter().map(|&b| b as f64).collect();
    let mut sorted_b = blocks_f.clone();
    sorted_b.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(PosteriorSummary {
        n,
        samples: samples.len(),
        change_point_prob: breaks.iter().map(|&c| c as f64 / k).collect(),
        product_estimate_m: m_sum
            .into_iter()
            .map(|v| v.into_iter().map(|x| x / k).collect())
            .collect(),
        linear_predictor: lin_sum.into_iter().map(|x| x / k).collect(),
        delta_mean: delta_samples.iter().sum::<f64>() / k,
        block_mean: blocks_f.iter().sum::<f64>() / k,
        block_median: median(&sorted_b),
        delta_hpd: hpd_interval(&delta_samples, 0.95).ok(),
        block_hpd: hpd_interval(&blocks_f, 0.95).ok(),
        block_count_samples,
        delta_samples,
    })
}
