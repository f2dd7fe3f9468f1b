//! Adaptive rejection Metropolis sampling for univariate targets on a
//! bounded interval, and the discount-factor posterior it is used on.
//!
//! The proposal envelope is the piecewise-linear (on the log scale) hull of
//! Gilks, Best & Tan (1995): on `[x_i, x_{i+1}]` it is
//! `max(L_{i,i+1}, min(L_{i-1,i}, L_{i+1,i+2}))`, where `L_{j,k}` is the line
//! through the log density at `x_j` and `x_k`; the tails extend the outermost
//! chords. Rejected proposals refine the envelope. Because the envelope is not
//! guaranteed to dominate a non-log-concave target, accepted proposals go
//! through a Metropolis-Hastings step against the current state.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dglm::{Filter, ModelSpec};
use crate::ef_models::ObservationModel;
use crate::error::{domain, Error, Result};
use crate::partition::IndicatorVector;
use crate::special::ln_beta;

/// Smallest distance kept between a discount-factor draw and 0 or 1.
pub const DELTA_EPS: f64 = 1e-6;

/// Initial abscissae for the discount factor on (0, 1).
pub const DELTA_ABSCISSAE: [f64; 4] = [0.05, 0.35, 0.65, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmsConfig {
    /// Cap on the number of abscissae kept in the envelope.
    pub max_abscissae: usize,
    /// Rejection-sampling attempts per draw before giving up.
    pub max_attempts: usize,
    /// Envelope rebuilds with a denser grid before reporting degeneracy.
    pub max_retries: usize,
}

impl Default for ArmsConfig {
    fn default() -> Self {
        Self {
            max_abscissae: 64,
            max_attempts: 10_000,
            max_retries: 10,
        }
    }
}

/// An unnormalised log density on `(low, high)` with starting abscissae.
pub struct ArmsTarget<F> {
    pub log_density: F,
    pub low: f64,
    pub high: f64,
    pub abscissae: Vec<f64>,
}

impl<F: FnMut(f64) -> f64> ArmsTarget<F> {
    pub fn new(log_density: F, low: f64, high: f64, abscissae: Vec<f64>) -> Result<Self> {
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return domain(format!("ARMS support ({low}, {high}) must be a finite interval"));
        }
        if abscissae.len() < 3 {
            return domain("ARMS needs at least three initial abscissae");
        }
        if abscissae.windows(2).any(|w| w[0] >= w[1]) || abscissae.iter().any(|&x| x <= low || x >= high) {
            return domain("ARMS abscissae must be strictly increasing and inside the support");
        }
        Ok(Self {
            log_density,
            low,
            high,
            abscissae,
        })
    }
}

/// Piecewise-linear log envelope on knots `z` with values `e`.
#[derive(Debug, Clone, Default)]
struct Envelope {
    z: Vec<f64>,
    e: Vec<f64>,
    cum: Vec<f64>,
    emax: f64,
}

impl Envelope {
    fn value(&self, x: f64) -> f64 {
        let j = match self.z.binary_search_by(|v| v.partial_cmp(&x).expect("finite knots")) {
            Ok(j) => return self.e[j],
            Err(j) => j.clamp(1, self.z.len() - 1) - 1,
        };
        let w = self.z[j + 1] - self.z[j];
        self.e[j] + (self.e[j + 1] - self.e[j]) * (x - self.z[j]) / w
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cum.last().expect("non-empty envelope");
        let target = rng.random::<f64>() * total;
        let j = self.cum.partition_point(|&c| c < target).min(self.cum.len() - 1);
        let (z0, z1) = (self.z[j], self.z[j + 1]);
        if z1 <= z0 {
            return z0;
        }
        let d = self.e[j + 1] - self.e[j];
        let u: f64 = rng.random();
        let s = if d.abs() < 1e-10 {
            u
        } else if d > 0.0 {
            1.0 + (u + (1.0 - u) * (-d).exp()).ln() / d
        } else {
            (u * d.exp_m1()).ln_1p() / d
        };
        z0 + s.clamp(0.0, 1.0) * (z1 - z0)
    }

    fn build(&mut self, xs: &[f64], hs: &[f64], low: f64, high: f64) -> bool {
        let k = xs.len();
        self.z.clear();
        self.e.clear();
        let line = |i: usize, j: usize, x: f64| hs[i] + (hs[j] - hs[i]) / (xs[j] - xs[i]) * (x - xs[i]);

        // left tail
        self.z.push(low);
        self.e.push(line(0, 1, low));
        self.z.push(xs[0]);
        self.e.push(hs[0]);
        for i in 0..k - 1 {
            let (a, b) = (xs[i], xs[i + 1]);
            let chord = (hs[i], (hs[i + 1] - hs[i]) / (b - a), a);
            let mut lines = vec![chord];
            let left = (i >= 1).then(|| (hs[i - 1], (hs[i] - hs[i - 1]) / (xs[i] - xs[i - 1]), xs[i - 1]));
            let right = (i + 2 < k).then(|| (hs[i + 1], (hs[i + 2] - hs[i + 1]) / (xs[i + 2] - xs[i + 1]), xs[i + 1]));
            lines.extend(left);
            lines.extend(right);
            let eval = |x: f64| {
                let at = |l: (f64, f64, f64)| l.0 + l.1 * (x - l.2);
                let c = at(chord);
                let upper = match (left, right) {
                    (Some(l), Some(r)) => at(l).min(at(r)),
                    (Some(l), None) => at(l),
                    (None, Some(r)) => at(r),
                    (None, None) => c,
                };
                c.max(upper)
            };
            let mut knots = vec![a, b];
            for p in 0..lines.len() {
                for q in p + 1..lines.len() {
                    let (l1, l2) = (lines[p], lines[q]);
                    if (l1.1 - l2.1).abs() < 1e-300 {
                        continue;
                    }
                    // l1.0 + l1.1 (x - l1.2) = l2.0 + l2.1 (x - l2.2)
                    let x = (l2.0 - l1.0 + l1.1 * l1.2 - l2.1 * l2.2) / (l1.1 - l2.1);
                    if x > a && x < b && x.is_finite() {
                        knots.push(x);
                    }
                }
            }
            knots.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
            // The envelope may jump at abscissae, so interval ends are
            // pushed even when they repeat the previous knot.
            for x in knots {
                self.z.push(x);
                self.e.push(eval(x));
            }
        }
        self.z.push(xs[k - 1]);
        self.e.push(hs[k - 1]);
        self.z.push(high);
        self.e.push(line(k - 2, k - 1, high));

        self.emax = self.e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !self.emax.is_finite() || self.e.iter().any(|v| v.is_nan()) {
            return false;
        }
        self.cum.clear();
        let mut acc = 0.0;
        for j in 0..self.z.len() - 1 {
            let w = self.z[j + 1] - self.z[j];
            let (e0, e1) = (self.e[j] - self.emax, self.e[j + 1] - self.emax);
            let d = e1 - e0;
            let mass = if d.abs() < 1e-8 {
                w * e0.exp() * (1.0 + 0.5 * d)
            } else {
                w * (e1.exp() - e0.exp()) / d
            };
            acc += mass.max(0.0);
            self.cum.push(acc);
        }
        acc > 0.0 && acc.is_finite()
    }
}

/// Reusable ARMS state. One instance per chain; never shared.
#[derive(Debug, Clone, Default)]
pub struct ArmsSampler {
    config: ArmsConfig,
    xs: Vec<f64>,
    hs: Vec<f64>,
    envelope: Envelope,
    /// Log-density evaluations in the most recent draw.
    pub evaluations: usize,
}

impl ArmsSampler {
    pub fn new(config: ArmsConfig) -> Self {
        Self {
            config,
            ..Default::default()
        }
    }

    fn initialise<F: FnMut(f64) -> f64>(&mut self, target: &mut ArmsTarget<F>) -> Result<()> {
        let mut grid = target.abscissae.clone();
        for attempt in 0..=self.config.max_retries {
            self.xs.clear();
            self.hs.clear();
            for &x in &grid {
                let h = (target.log_density)(x);
                self.evaluations += 1;
                if h.is_finite() {
                    self.xs.push(x);
                    self.hs.push(h);
                } else if h.is_nan() || h == f64::INFINITY {
                    return Err(Error::Arms(format!("log density is {h} at {x}")));
                }
            }
            if self.xs.len() >= 3 && self.envelope.build(&self.xs, &self.hs, target.low, target.high) {
                return Ok(());
            }
            // Widen: spread a denser grid over the whole support.
            let k = grid.len() * 2 + 1;
            let (lo, hi) = (target.low, target.high);
            grid = (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect();
            log::debug!("ARMS envelope degenerate, retry {} with {} abscissae", attempt + 1, k);
        }
        Err(Error::Arms(format!(
            "envelope degenerate after {} retries: fewer than three finite log-density values",
            self.config.max_retries
        )))
    }

    fn insert(&mut self, x: f64, h: f64, low: f64, high: f64) {
        if self.xs.len() >= self.config.max_abscissae || !h.is_finite() {
            return;
        }
        let pos = self.xs.partition_point(|&v| v < x);
        if self.xs.get(pos) == Some(&x) {
            return;
        }
        self.xs.insert(pos, x);
        self.hs.insert(pos, h);
        if !self.envelope.build(&self.xs, &self.hs, low, high) {
            self.xs.remove(pos);
            self.hs.remove(pos);
            self.envelope.build(&self.xs, &self.hs, low, high);
        }
    }

    /// One ARMS transition from `current`. `current_log_density` may supply
    /// the already-known target value at `current`.
    pub fn draw<F, R>(
        &mut self,
        target: &mut ArmsTarget<F>,
        current: f64,
        current_log_density: Option<f64>,
        rng: &mut R,
    ) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
        R: Rng + ?Sized,
    {
        if !(current > target.low && current < target.high) {
            return domain(format!(
                "current point {current} outside ({}, {})",
                target.low, target.high
            ));
        }
        self.evaluations = 0;
        self.initialise(target)?;

        let mut candidate = None;
        for _ in 0..self.config.max_attempts {
            let x = self.envelope.sample(rng);
            if !(x > target.low && x < target.high) {
                continue;
            }
            let hx = (target.log_density)(x);
            self.evaluations += 1;
            if hx.is_nan() {
                return Err(Error::Arms(format!("log density is NaN at {x}")));
            }
            let ex = self.envelope.value(x);
            let log_u = rng.random::<f64>().ln();
            if log_u <= hx - ex {
                candidate = Some((x, hx, ex));
                break;
            }
            self.insert(x, hx, target.low, target.high);
        }
        let Some((x, hx, ex)) = candidate else {
            return Err(Error::Arms(format!(
                "no proposal accepted in {} attempts",
                self.config.max_attempts
            )));
        };

        let hc = match current_log_density {
            Some(h) => h,
            None => {
                self.evaluations += 1;
                (target.log_density)(current)
            }
        };
        if !hc.is_finite() {
            return Ok(x);
        }
        let ec = self.envelope.value(current);
        let log_alpha = hx + hc.min(ec) - hc - hx.min(ex);
        if log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha {
            Ok(x)
        } else {
            Ok(current)
        }
    }
}

/// Convenience wrapper: a single ARMS transition with default settings.
pub fn arms_draw<F, R>(target: &mut ArmsTarget<F>, current: f64, rng: &mut R) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    R: Rng + ?Sized,
{
    ArmsSampler::new(ArmsConfig::default()).draw(target, current, None, rng)
}

/// Beta prior parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl BetaPrior {
    pub const UNIFORM: BetaPrior = BetaPrior { a: 1.0, b: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite() {
            Ok(())
        } else {
            domain(format!(
                "Beta prior parameters must be positive, got ({}, {})",
                self.a, self.b
            ))
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let term = |p: f64, v: f64| if p == 1.0 { 0.0 } else { (p - 1.0) * v.ln() };
        term(self.a, x) + term(self.b, 1.0 - x) - ln_beta(self.a, self.b)
    }
}

/// Posterior of the discount factor given a fixed partition.
pub struct DeltaPosterior<'a> {
    y: &'a [f64],
    model: &'a ObservationModel,
    spec: &'a ModelSpec,
    partition: &'a IndicatorVector,
    prior: BetaPrior,
    cache: HashMap<u64, f64>,
}

impl<'a> DeltaPosterior<'a> {
    pub fn new(
        y: &'a [f64],
        model: &'a ObservationModel,
        spec: &'a ModelSpec,
        partition: &'a IndicatorVector,
        prior: BetaPrior,
    ) -> Result<Self> {
        prior.validate()?;
        if partition.n() != y.len() {
            return Err(Error::InvalidPartition(
                "indicator length does not match the series".into(),
            ));
        }
        Ok(Self {
            y,
            model,
            spec,
            partition,
            prior,
            cache: HashMap::new(),
        })
    }

    /// Total one-step log predictive at `delta`.
    pub fn log_likelihood(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta <= 1.0) {
            return domain(format!("discount factor {delta} outside (0, 1]"));
        }
        let spec = self.spec.with_delta(delta);
        let mut filter = Filter::new_unchecked(self.y, self.model, &spec);
        let mut s = filter.initial_state();
        let u = self.partition;
        filter.run_from(&mut s, 0, |t| u.starts_block(t))
    }

    /// Seeds the memo with an already computed log likelihood.
    pub fn remember(&mut self, delta: f64, log_likelihood: f64) {
        self.cache
            .insert(delta.to_bits(), log_likelihood + self.prior.ln_pdf(delta));
    }

    /// Unnormalised log posterior; `-inf` outside `(0, 1]` or where the prior vanishes.
    pub fn log_posterior(&mut self, delta: f64) -> f64 {
        if let Some(&v) = self.cache.get(&delta.to_bits()) {
            return v;
        }
        let lp = self.prior.ln_pdf(delta);
        let v = if lp == f64::NEG_INFINITY || !(delta > 0.0 && delta <= 1.0) {
            f64::NEG_INFINITY
        } else {
            match self.log_likelihood(delta) {
                Ok(ll) => ll + lp,
                Err(e) => {
                    log::debug!("discount factor {delta} gives an invalid filter pass: {e}");
                    f64::NEG_INFINITY
                }
            }
        };
        self.cache.insert(delta.to_bits(), v);
        v
    }
}

/// `log p(delta | y, partition)` up to a constant.
pub fn delta_log_posterior(delta: f64, ctx: &mut DeltaPosterior<'_>) -> f64 {
    ctx.log_posterior(delta)
}

/// One ARMS update of the discount factor.
pub fn draw_delta<R: Rng + ?Sized>(
    sampler: &mut ArmsSampler,
    ctx: &mut DeltaPosterior<'_>,
    current: f64,
    rng: &mut R,
) -> Result<f64> {
    let current = current.clamp(DELTA_EPS, 1.0 - DELTA_EPS);
    let hc = ctx.log_posterior(current);
    let mut target = ArmsTarget::new(
        |d: f64| ctx.log_posterior(d),
        DELTA_EPS,
        1.0 - DELTA_EPS,
        DELTA_ABSCISSAE.to_vec(),
    )?;
    sampler.draw(&mut target, current, Some(hc), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{Beta, ContinuousCDF};

    #[test]
    fn envelope_dominates_log_concave_target() {
        let h = |x: f64| x.ln() + 4.0 * (1.0 - x).ln();
        let xs = [0.05, 0.2, 0.35, 0.65, 0.95];
        let hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
        let mut env = Envelope::default();
        assert!(env.build(&xs, &hs, 1e-9, 1.0 - 1e-9));
        for i in 1..1000 {
            let x = i as f64 / 1000.0;
            assert!(env.value(x) >= h(x) - 1e-9, "x = {x}");
        }
        for (&x, &hx) in xs.iter().zip(&hs).skip(1).take(xs.len() - 2) {
            assert_relative_eq!(env.value(x), hx, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_target_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sampler = ArmsSampler::new(ArmsConfig::default());
        let mut target = ArmsTarget::new(|_| 0.0, 0.0, 1.0, vec![0.2, 0.4, 0.6, 0.8]).unwrap();
        let mut x = 0.5;
        let mut sum = 0.0;
        let n = 100_000;
        for _ in 0..n {
            x = sampler.draw(&mut target, x, None, &mut rng).unwrap();
            assert!(x > 0.0 && x < 1.0);
            sum += x;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.005);
    }

    #[test]
    fn beta_target_passes_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sampler = ArmsSampler::new(ArmsConfig::default());
        let prior = BetaPrior { a: 2.0, b: 5.0 };
        let mut target = ArmsTarget::new(|x| prior.ln_pdf(x), 0.0, 1.0, DELTA_ABSCISSAE.to_vec()).unwrap();
        let n = 20_000;
        let mut draws = Vec::with_capacity(n);
        let mut x = 0.3;
        for _ in 0..n {
            x = sampler.draw(&mut target, x, None, &mut rng).unwrap();
            draws.push(x);
        }
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let beta = Beta::new(2.0, 5.0).unwrap();
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = beta.cdf(x);
                (c - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - c).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (n as f64).sqrt(), "KS D = {d}");
    }

    #[test]
    fn chain_leaves_bimodal_target_invariant() {
        // equal mixture of Beta(3, 12) and Beta(12, 3): not log-concave
        let (b1, b2) = (Beta::new(3.0, 12.0).unwrap(), Beta::new(12.0, 3.0).unwrap());
        let p1 = BetaPrior { a: 3.0, b: 12.0 };
        let p2 = BetaPrior { a: 12.0, b: 3.0 };
        let mut target = ArmsTarget::new(
            |x| crate::special::log_sum_exp(&[p1.ln_pdf(x), p2.ln_pdf(x)]),
            0.0,
            1.0,
            DELTA_ABSCISSAE.to_vec(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut sampler = ArmsSampler::new(ArmsConfig::default());
        let bins = 20;
        let mut counts = vec![0usize; bins];
        // thinned so serial correlation does not inflate the statistic
        let (kept, lag) = (20_000, 20);
        let mut x = 0.5;
        for i in 0..kept * lag {
            x = sampler.draw(&mut target, x, None, &mut rng).unwrap();
            if i % lag == 0 {
                counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
            }
        }
        let cdf = |v: f64| 0.5 * (b1.cdf(v) + b2.cdf(v));
        let chi2: f64 = (0..bins)
            .map(|k| {
                let p = cdf((k + 1) as f64 / bins as f64) - cdf(k as f64 / bins as f64);
                let e = p * kept as f64;
                (counts[k] as f64 - e).powi(2) / e
            })
            .sum();
        // 99% quantile of chi-square with 19 degrees of freedom
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn degenerate_target_errors_after_retries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut target = ArmsTarget::new(|_| f64::NEG_INFINITY, 0.0, 1.0, vec![0.2, 0.5, 0.8]).unwrap();
        match arms_draw(&mut target, 0.5, &mut rng) {
            Err(Error::Arms(msg)) => assert!(msg.contains("retries"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sparse_support_is_recovered_by_widening() {
        // finite only on (0.4, 0.45): the initial abscissae all miss it
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut target = ArmsTarget::new(
            |x| if x > 0.4 && x < 0.45 { 0.0 } else { f64::NEG_INFINITY },
            0.0,
            1.0,
            vec![0.1, 0.3, 0.6, 0.9],
        )
        .unwrap();
        let mut sampler = ArmsSampler::new(ArmsConfig::default());
        let x = sampler.draw(&mut target, 0.42, None, &mut rng).unwrap();
        assert!(x > 0.4 && x < 0.45);
    }

    #[test]
    fn target_validation() {
        assert!(ArmsTarget::new(|_| 0.0, 1.0, 0.0, vec![0.2, 0.5, 0.8]).is_err());
        assert!(ArmsTarget::new(|_| 0.0, 0.0, 1.0, vec![0.2, 0.8]).is_err());
        assert!(ArmsTarget::new(|_| 0.0, 0.0, 1.0, vec![0.2, 0.8, 0.5]).is_err());
        assert!(ArmsTarget::new(|_| 0.0, 0.0, 1.0, vec![0.0, 0.5, 0.8]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = ArmsTarget::new(|_| 0.0, 0.0, 1.0, vec![0.2, 0.5, 0.8]).unwrap();
        assert!(arms_draw(&mut t, 1.5, &mut rng).is_err());
    }

    #[test]
    fn beta_prior_density() {
        assert_relative_eq!(BetaPrior::UNIFORM.ln_pdf(0.3), 0.0, epsilon = 1e-12);
        assert_relative_eq!(BetaPrior::UNIFORM.ln_pdf(1.0), 0.0, epsilon = 1e-12);
        let p = BetaPrior { a: 2.0, b: 5.0 };
        assert_relative_eq!(p.ln_pdf(0.2), (30.0 * 0.2 * 0.8f64.powi(4)).ln(), epsilon = 1e-12);
        assert_eq!(p.ln_pdf(1.0), f64::NEG_INFINITY);
        assert_eq!(p.ln_pdf(1.2), f64::NEG_INFINITY);
    }

    #[test]
    fn delta_posterior_under_flat_prior_is_the_likelihood() {
        let y = [3.0, 5.0, 2.0, 9.0, 11.0, 10.0];
        let model = ObservationModel::poisson();
        let spec = ModelSpec::local_level(1.0, 1.0, 1.0, 10.0, 0.5);
        let u: IndicatorVector = "11011".parse().unwrap();
        let mut ctx = DeltaPosterior::new(&y, &model, &spec, &u, BetaPrior::UNIFORM).unwrap();
        for &d in &[0.1, 0.4, 0.9] {
            let ll = ctx.log_likelihood(d).unwrap();
            assert_eq!(delta_log_posterior(d, &mut ctx), ll);
        }
        let diff = delta_log_posterior(0.2, &mut ctx) - delta_log_posterior(0.7, &mut ctx);
        assert_relative_eq!(
            diff,
            ctx.log_likelihood(0.2).unwrap() - ctx.log_likelihood(0.7).unwrap()
        );
        assert_eq!(delta_log_posterior(0.0, &mut ctx), f64::NEG_INFINITY);
        let mut strict = DeltaPosterior::new(&y, &model, &spec, &u, BetaPrior { a: 2.0, b: 2.0 }).unwrap();
        assert_eq!(delta_log_posterior(1.0, &mut strict), f64::NEG_INFINITY);
    }

    #[test]
    fn delta_draws_stay_inside_the_open_interval() {
        let y = [3.0, 5.0, 2.0, 9.0, 11.0, 10.0, 30.0, 28.0];
        let model = ObservationModel::poisson();
        let spec = ModelSpec::local_level(1.0, 1.0, 1.0, 10.0, 0.5);
        let u = IndicatorVector::all_zeros(8);
        let mut ctx = DeltaPosterior::new(&y, &model, &spec, &u, BetaPrior::UNIFORM).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sampler = ArmsSampler::new(ArmsConfig::default());
        let mut d = 0.5;
        for _ in 0..200 {
            d = draw_delta(&mut sampler, &mut ctx, d, &mut rng).unwrap();
            assert!((DELTA_EPS..=1.0 - DELTA_EPS).contains(&d));
        }
    }
}
