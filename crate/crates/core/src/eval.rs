//! Model comparison and one-step-ahead forecasting from chain output.

use serde::{Deserialize, Serialize};

use crate::dglm::Filter;
use crate::dglm::ModelSpec;
use crate::ef_models::{ObservationModel, Predictive};
use crate::error::{domain, Error, Result};
use crate::gibbs::{ChainSample, PosteriorSummary};
use crate::special::log_sum_exp;

/// Posterior model probabilities: softmax of `log_marginals + log_priors`.
pub fn pmp(log_marginals: &[f64], log_priors: &[f64]) -> Result<Vec<f64>> {
    if log_marginals.is_empty() || log_marginals.len() != log_priors.len() {
        return domain(format!(
            "need equally many marginals and priors, got {} and {}",
            log_marginals.len(),
            log_priors.len()
        ));
    }
    let w: Vec<f64> = log_marginals.iter().zip(log_priors).map(|(m, p)| m + p).collect();
    let z = log_sum_exp(&w);
    if !z.is_finite() {
        return domain("model weights are not finite");
    }
    Ok(w.iter().map(|v| (v - z).exp()).collect())
}

/// `log( mean_i exp(log_pred_i) )` over retained draws.
pub fn log_marginal_estimate(samples: &[ChainSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let lp: Vec<f64> = samples.iter().map(|s| s.log_pred).collect();
    Ok(log_sum_exp(&lp) - (lp.len() as f64).ln())
}

pub fn mae(forecast: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(forecast, y)?;
    Ok(forecast.iter().zip(y).map(|(f, v)| (f - v).abs()).sum::<f64>() / y.len() as f64)
}

pub fn mse(forecast: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(forecast, y)?;
    Ok(forecast.iter().zip(y).map(|(f, v)| (f - v).powi(2)).sum::<f64>() / y.len() as f64)
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "forecast length {} vs series length {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Shortest window holding `ceil(mass * N)` sorted samples; ties go left.
pub fn hpd_interval(samples: &[f64], mass: f64) -> Result<(f64, f64)> {
    if samples.len() < 20 {
        return Err(Error::InsufficientSamples {
            needed: 20,
            got: samples.len(),
        });
    }
    if !(mass > 0.0 && mass < 1.0) {
        return domain(format!("HPD mass {mass} outside (0, 1)"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return domain("HPD samples contain NaN");
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let k = ((mass * s.len() as f64).ceil() as usize).clamp(1, s.len());
    let mut best = (s[0], s[k - 1]);
    for i in 1..=s.len() - k {
        if s[i + k - 1] - s[i] < best.1 - best.0 {
            best = (s[i], s[i + k - 1]);
        }
    }
    Ok(best)
}

/// Mixture one-step predictive summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBand {
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ForecastBand {
    pub fn covers(&self, y: &[f64]) -> Vec<bool> {
        y.iter()
            .enumerate()
            .map(|(t, &v)| self.lo[t] <= v && v <= self.hi[t])
            .collect()
    }
}

/// One-step predictives for every observation under every retained draw.
pub fn predictive_draws(
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    samples: &[ChainSample],
) -> Result<Vec<Vec<Predictive>>> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let n = y.len();
    let mut out = vec![Vec::with_capacity(samples.len()); n];
    for s in samples {
        if s.u.n() != n {
            return Err(Error::InvalidPartition(
                "sample does not match the series length".into(),
            ));
        }
        let sp = spec.with_delta(s.delta);
        let mut f = Filter::new(y, model, &sp)?;
        let mut st = f.initial_state();
        for (t, slot) in out.iter_mut().enumerate() {
            let rec = f.step_recorded(&mut st, t, s.u.starts_block(t))?;
            slot.push(model.predictive(rec.hyper));
        }
    }
    Ok(out)
}

fn mixture_quantile(mix: &[Predictive], p: f64) -> f64 {
    let k = mix.len() as f64;
    if mix[0].is_discrete() {
        let mut acc = 0.0;
        let mut j = 0u64;
        loop {
            acc += mix.iter().map(|d| d.ln_pmf(j).exp()).sum::<f64>() / k;
            if acc >= p || j >= 10_000_000 {
                return j as f64;
            }
            j += 1;
        }
    }
    let cdf = |x: f64| mix.iter().map(|d| d.cdf(x)).sum::<f64>() / k;
    let centre = mix.iter().map(|d| d.mean()).filter(|m| m.is_finite()).sum::<f64>() / k;
    let mut step = centre.abs().max(1.0);
    let (mut lo, mut hi) = (centre - step, centre + step);
    while cdf(lo) > p {
        step *= 2.0;
        lo = centre - step;
    }
    while cdf(hi) < p {
        step *= 2.0;
        hi = centre + step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mixture mean and central `mass` band of the one-step predictives.
pub fn one_step_forecasts(
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    samples: &[ChainSample],
    mass: f64,
) -> Result<ForecastBand> {
    if !(mass > 0.0 && mass < 1.0) {
        return domain(format!("band mass {mass} outside (0, 1)"));
    }
    let draws = predictive_draws(y, model, spec, samples)?;
    let tail = 0.5 * (1.0 - mass);
    let mut band = ForecastBand {
        mean: Vec::with_capacity(y.len()),
        lo: Vec::with_capacity(y.len()),
        hi: Vec::with_capacity(y.len()),
    };
    for mix in &draws {
        band.mean
            .push(mix.iter().map(|d| d.mean()).sum::<f64>() / mix.len() as f64);
        band.lo.push(mixture_quantile(mix, tail));
        band.hi.push(mixture_quantile(mix, 1.0 - tail));
    }
    Ok(band)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonEntry {
    pub label: String,
    pub log_marginal: f64,
    pub log_prior: f64,
    pub pmp: f64,
    pub mae: f64,
    pub mse: f64,
    pub delta_mean: f64,
    pub delta_hpd: Option<(f64, f64)>,
    pub block_mean: f64,
    pub block_hpd: Option<(f64, f64)>,
}

impl ComparisonEntry {
    /// Entry for a fitted model; `pmp` is filled in by [`ModelComparison::new`].
    pub fn from_fit(
        label: impl Into<String>,
        samples: &[ChainSample],
        summary: &PosteriorSummary,
        band: &ForecastBand,
        y: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            label: label.into(),
            log_marginal: log_marginal_estimate(samples)?,
            log_prior: 0.0,
            pmp: f64::NAN,
            mae: mae(&band.mean, y)?,
            mse: mse(&band.mean, y)?,
            delta_mean: summary.delta_mean,
            delta_hpd: summary.delta_hpd,
            block_mean: summary.block_mean,
            block_hpd: summary.block_hpd,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub entries: Vec<ComparisonEntry>,
}

impl ModelComparison {
    pub fn new(mut entries: Vec<ComparisonEntry>) -> Result<Self> {
        let lm: Vec<f64> = entries.iter().map(|e| e.log_marginal).collect();
        let lp: Vec<f64> = entries.iter().map(|e| e.log_prior).collect();
        for (e, p) in entries.iter_mut().zip(pmp(&lm, &lp)?) {
            e.pmp = p;
        }
        Ok(Self { entries })
    }

    pub fn best(&self) -> &ComparisonEntry {
        self.entries
            .iter()
            .max_by(|a, b| a.pmp.total_cmp(&b.pmp))
            .expect("comparison has entries")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record([
            "label",
            "log_marginal",
            "pmp",
            "mae",
            "mse",
            "delta_mean",
            "delta_lo",
            "delta_hi",
            "block_mean",
            "block_lo",
            "block_hi",
        ])
        .map_err(io)?;
        let opt =
            |v: Option<(f64, f64)>, hi: bool| v.map(|(a, b)| if hi { b } else { a }.to_string()).unwrap_or_default();
        for e in &self.entries {
            w.write_record([
                e.label.clone(),
                e.log_marginal.to_string(),
                e.pmp.to_string(),
                e.mae.to_string(),
                e.mse.to_string(),
                e.delta_mean.to_string(),
                opt(e.delta_hpd, false),
                opt(e.delta_hpd, true),
                e.block_mean.to_string(),
                opt(e.block_hpd, false),
                opt(e.block_hpd, true),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::IndicatorVector;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Beta as BetaDist, Distribution};
    use statrs::distribution::{Beta, ContinuousCDF};

    #[test]
    fn pmp_examples() {
        let p = pmp(&[1.0; 4], &[0.0; 4]).unwrap();
        for v in p {
            assert_relative_eq!(v, 0.25, epsilon = 1e-15);
        }
        let p = pmp(&[0.0, 3f64.ln()], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(p[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(p[1], 0.75, epsilon = 1e-15);
        assert!(pmp(&[], &[]).is_err());
        assert!(pmp(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn pmp_is_shift_invariant_and_sums_to_one() {
        let lm = [-1200.3, -1201.9, -1199.2, -1210.0];
        let lp = [0.0, -0.5, 0.2, 0.0];
        let a = pmp(&lm, &lp).unwrap();
        let shifted: Vec<f64> = lm.iter().map(|v| v + 1187.4).collect();
        let b = pmp(&shifted, &lp).unwrap();
        for (x, z) in a.iter().zip(&b) {
            assert_relative_eq!(x, z, epsilon = 1e-12);
        }
        assert_relative_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn error_metrics() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 1.0);
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 1.0);
        let f = [0.3, 5.0, 2.2, 9.0];
        let y = [1.0, 2.0, 3.0, 4.0];
        assert!(mae(&f, &y).unwrap() <= mse(&f, &y).unwrap().sqrt());
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn hpd_uniform_grid_takes_leftmost() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(hpd_interval(&s, 0.95).unwrap(), (1.0, 95.0));
        assert!(hpd_interval(&s[..10], 0.95).is_err());
        assert!(hpd_interval(&s, 1.0).is_err());
    }

    #[test]
    fn hpd_beta_is_narrower_than_equal_tails() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = BetaDist::new(2.0, 5.0).unwrap();
        let s: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng)).collect();
        let (lo, hi) = hpd_interval(&s, 0.95).unwrap();
        let exact = Beta::new(2.0, 5.0).unwrap();
        let (q_lo, q_hi) = (exact.inverse_cdf(0.025), exact.inverse_cdf(0.975));
        assert!(lo < 0.2 && 0.2 < hi);
        assert!(hi - lo < q_hi - q_lo);
    }

    #[test]
    fn log_marginal_is_log_mean_exp() {
        let mk = |lp: f64| ChainSample {
            iteration: 0,
            u: IndicatorVector::all_ones(2),
            delta: 0.5,
            log_pred: lp,
            log_posterior: 0.0,
        };
        let v = log_marginal_estimate(&[mk(-1000.0), mk(-1000.0 + 3f64.ln())]).unwrap();
        assert_relative_eq!(v, -1000.0 + 2f64.ln(), epsilon = 1e-10);
        assert!(log_marginal_estimate(&[]).is_err());
    }

    #[test]
    fn forecast_band_orders_and_matches_single_predictive() {
        let y = [2.0, 3.0, 1.0, 7.0, 6.0];
        let model = ObservationModel::poisson();
        let spec = ModelSpec::local_level(1.0, 1.0, 1.0, 10.0, 0.4);
        let s = ChainSample {
            iteration: 1,
            u: "1011".parse().unwrap(),
            delta: 0.4,
            log_pred: 0.0,
            log_posterior: 0.0,
        };
        let band = one_step_forecasts(&y, &model, &spec, &[s.clone(), s.clone()], 0.95).unwrap();
        let draws = predictive_draws(&y, &model, &spec, &[s]).unwrap();
        #[allow(clippy::needless_range_loop)]
        for t in 0..5 {
            assert!(band.lo[t] <= band.mean[t] && band.mean[t] <= band.hi[t]);
            let d = draws[t][0];
            assert_relative_eq!(band.mean[t], d.mean(), max_relative = 1e-12);
            // lo is the smallest k with F(k) >= 0.025
            let k = band.lo[t];
            assert!(d.cdf(k) >= 0.025 - 1e-12);
            assert!(k == 0.0 || d.cdf(k - 1.0) < 0.025);
        }
    }

    #[test]
    fn continuous_quantiles_invert_the_mixture_cdf() {
        let mix = [
            Predictive::Normal {
                mean: 0.0,
                variance: 1.0,
            },
            Predictive::Normal {
                mean: 4.0,
                variance: 0.25,
            },
        ];
        for &p in &[0.025, 0.5, 0.975] {
            let q = mixture_quantile(&mix, p);
            let f = 0.5 * (mix[0].cdf(q) + mix[1].cdf(q));
            assert_relative_eq!(f, p, epsilon = 1e-8);
        }
    }

    #[test]
    fn comparison_tables() {
        let mk = |label: &str, lm: f64| ComparisonEntry {
            label: label.into(),
            log_marginal: lm,
            log_prior: 0.0,
            pmp: f64::NAN,
            mae: 1.0,
            mse: 2.0,
            delta_mean: 0.3,
            delta_hpd: Some((0.1, 0.5)),
            block_mean: 4.0,
            block_hpd: None,
        };
        let c = ModelComparison::new(vec![mk("a", -10.0), mk("b", -9.0)]).unwrap();
        assert_eq!(c.best().label, "b");
        let csv = c.to_csv().unwrap();
        assert!(csv.starts_with("label,log_marginal,pmp"));
        assert_eq!(csv.lines().count(), 3);
        let back: ModelComparison = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let single = ModelComparison::new(vec![mk("only", -3.0)]).unwrap();
        assert_eq!(single.entries[0].pmp, 1.0);
    }
}
