//! Exponential-family observation models and their conjugate guide priors.
//!
//! Each family is parameterised on its canonical link, so the linear
//! predictor `lambda = F' theta` is the natural parameter `eta`. The
//! conjugate prior on `eta` is summarised by a pair `(alpha, beta)` that is
//! elicited from the prior mean and variance `(f, q)` of the linear
//! predictor, updated by the observation, and read back as posterior guide
//! moments `(f*, q*)` for the linear Bayes update of the state.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use crate::error::{domain, Error, Result};
use crate::special::{digamma, inverse_trigamma, ln_beta, ln_gamma, trigamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Counts with log link.
    Poisson,
    /// Gaussian with known observation variance and identity link.
    Normal { variance: f64 },
    /// Successes out of a fixed number of trials, logit link.
    Binomial { trials: u32 },
    /// Positive reals with known shape; the linear predictor is minus the rate.
    Gamma { shape: f64 },
    /// Listed for completeness; no guide-prior algebra is available for it.
    NegativeBinomial,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Poisson => "poisson",
            Family::Normal { .. } => "normal",
            Family::Binomial { .. } => "binomial",
            Family::Gamma { .. } => "gamma",
            Family::NegativeBinomial => "negative-binomial",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Family::Poisson | Family::Binomial { .. })
    }
}

/// How the guide prior is matched to `(f, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMatching {
    /// First-order approximations psi(x) ~ log(x) and psi'(x) ~ 1/x.
    #[default]
    FirstOrder,
    /// Exact digamma/trigamma moment matching.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    pub family: Family,
    #[serde(default)]
    pub moments: MomentMatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateHyper {
    pub alpha: f64,
    pub beta: f64,
}

/// Prior and posterior guide moments of the linear predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuideMoments {
    pub f: f64,
    pub q: f64,
    pub f_star: f64,
    pub q_star: f64,
}

/// Conjugate update of the hyperparameters: `(alpha + tau y, beta + tau)`.
pub fn posterior_hyper(h: ConjugateHyper, y: f64, tau: f64) -> Result<ConjugateHyper> {
    if !y.is_finite() {
        return domain(format!("observation {y} is not finite"));
    }
    if !(tau > 0.0) {
        return domain(format!("scale tau must be positive, got {tau}"));
    }
    Ok(ConjugateHyper {
        alpha: h.alpha + tau * y,
        beta: h.beta + tau,
    })
}

impl ObservationModel {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            moments: MomentMatching::FirstOrder,
        }
    }

    pub fn poisson() -> Self {
        Self::new(Family::Poisson)
    }

    pub fn normal(variance: f64) -> Self {
        Self::new(Family::Normal { variance })
    }

    pub fn with_moments(mut self, moments: MomentMatching) -> Self {
        self.moments = moments;
        self
    }

    /// Checks the family's own parameters.
    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::Poisson => Ok(()),
            Family::Normal { variance } if variance > 0.0 && variance.is_finite() => Ok(()),
            Family::Normal { variance } => domain(format!("normal variance must be positive, got {variance}")),
            Family::Binomial { trials } if trials > 0 => Ok(()),
            Family::Binomial { .. } => domain("binomial trials must be at least 1"),
            Family::Gamma { shape } if shape > 0.0 && shape.is_finite() => Ok(()),
            Family::Gamma { shape } => domain(format!("gamma shape must be positive, got {shape}")),
            Family::NegativeBinomial => Err(unsupported()),
        }
    }

    /// Observation scale tau.
    pub fn scale(&self) -> f64 {
        match self.family {
            Family::Normal { variance } => 1.0 / variance,
            _ => 1.0,
        }
    }

    pub fn in_support(&self, y: f64) -> bool {
        if !y.is_finite() {
            return false;
        }
        match self.family {
            Family::Poisson => y >= 0.0 && y.fract() == 0.0,
            Family::Normal { .. } => true,
            Family::Binomial { trials } => y >= 0.0 && y <= trials as f64 && y.fract() == 0.0,
            Family::Gamma { .. } => y > 0.0,
            Family::NegativeBinomial => y >= 0.0 && y.fract() == 0.0,
        }
    }

    /// Validates every observation of a series; done once at ingestion.
    pub fn check_series(&self, y: &[f64]) -> Result<()> {
        self.validate()?;
        match y.iter().position(|&v| !self.in_support(v)) {
            Some(index) => Err(Error::Support {
                index,
                value: y[index],
                family: self.family.name(),
            }),
            None => Ok(()),
        }
    }

    /// Elicit the conjugate guide prior from the linear predictor's moments.
    pub fn elicit_hyper(&self, f: f64, q: f64) -> Result<ConjugateHyper> {
        if !(q > 0.0) || !q.is_finite() {
            return domain(format!("predictor variance q must be positive and finite, got {q}"));
        }
        if !f.is_finite() {
            return domain(format!("predictor mean f must be finite, got {f}"));
        }
        let h = match (self.family, self.moments) {
            (Family::Poisson, MomentMatching::FirstOrder) => ConjugateHyper {
                alpha: 1.0 / q,
                beta: (-f).exp() / q,
            },
            (Family::Poisson, MomentMatching::Exact) => {
                let alpha = inverse_trigamma(q);
                ConjugateHyper {
                    alpha,
                    beta: (digamma(alpha) - f).exp(),
                }
            }
            (Family::Normal { .. }, _) => ConjugateHyper { alpha: f, beta: q },
            (Family::Binomial { .. }, MomentMatching::FirstOrder) => ConjugateHyper {
                alpha: (1.0 + f.exp()) / q,
                beta: (1.0 + (-f).exp()) / q,
            },
            (Family::Binomial { .. }, MomentMatching::Exact) => {
                let (alpha, beta) = solve_logit_beta(f, q);
                ConjugateHyper { alpha, beta }
            }
            (Family::Gamma { .. }, _) => {
                if f >= 0.0 {
                    return domain(format!(
                        "gamma linear predictor is minus the rate and must be negative, got f = {f}"
                    ));
                }
                ConjugateHyper {
                    alpha: f * f / q,
                    beta: -f / q,
                }
            }
            (Family::NegativeBinomial, _) => return Err(unsupported()),
        };
        Ok(h)
    }

    /// Posterior guide moments `(f*, q*)` from the prior hyperparameters and `y`.
    pub fn posterior_guide(&self, h: ConjugateHyper, y: f64) -> Result<(f64, f64)> {
        self.check_hyper(h)?;
        if !self.in_support(y) {
            return domain(format!("observation {y} outside the {} support", self.family.name()));
        }
        let out = match (self.family, self.moments) {
            (Family::Poisson, MomentMatching::FirstOrder) => {
                let a = h.alpha + y;
                ((a / (h.beta + 1.0)).ln(), 1.0 / a)
            }
            (Family::Poisson, MomentMatching::Exact) => {
                let a = h.alpha + y;
                (digamma(a) - (h.beta + 1.0).ln(), trigamma(a))
            }
            (Family::Normal { variance }, _) => {
                let denom = variance + h.beta;
                ((h.beta * y + h.alpha * variance) / denom, h.beta * variance / denom)
            }
            (Family::Binomial { trials }, MomentMatching::FirstOrder) => {
                let a = h.alpha + y;
                let b = h.beta + trials as f64 - y;
                ((a / b).ln(), 1.0 / a + 1.0 / b)
            }
            (Family::Binomial { trials }, MomentMatching::Exact) => {
                let a = h.alpha + y;
                let b = h.beta + trials as f64 - y;
                (digamma(a) - digamma(b), trigamma(a) + trigamma(b))
            }
            (Family::Gamma { shape }, _) => {
                let a = h.alpha + shape;
                let b = h.beta + y;
                (-a / b, a / (b * b))
            }
            (Family::NegativeBinomial, _) => return Err(unsupported()),
        };
        Ok(out)
    }

    /// One-step log predictive density (or mass) of `y`.
    ///
    /// For the Poisson family this is the negative-binomial log pmf with
    /// shape `alpha` and success probability `beta / (1 + beta)`.
    pub fn log_predictive(&self, h: ConjugateHyper, y: f64) -> f64 {
        if !self.in_support(y) {
            return f64::NEG_INFINITY;
        }
        match self.family {
            Family::Poisson => {
                let (a, b) = (h.alpha, h.beta);
                ln_gamma(a + y) - ln_gamma(a) - ln_gamma(y + 1.0) + a * (b / (1.0 + b)).ln() - y * (1.0 + b).ln()
            }
            Family::Normal { variance } => {
                let var = h.beta + variance;
                let r = y - h.alpha;
                -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + r * r / var)
            }
            Family::Binomial { trials } => {
                let k = trials as f64;
                ln_choose(k, y) + ln_beta(h.alpha + y, h.beta + k - y) - ln_beta(h.alpha, h.beta)
            }
            Family::Gamma { shape } => {
                let (a, b) = (h.alpha, h.beta);
                ln_gamma(a + shape) - ln_gamma(a) - ln_gamma(shape) + a * b.ln() + (shape - 1.0) * y.ln()
                    - (a + shape) * (b + y).ln()
            }
            Family::NegativeBinomial => f64::NAN,
        }
    }

    /// Full guide-moment step for one observation: elicit, update, score.
    pub fn guide_step(&self, f: f64, q: f64, y: f64) -> Result<(GuideMoments, f64)> {
        let h = self.elicit_hyper(f, q)?;
        let (f_star, q_star) = self.posterior_guide(h, y)?;
        Ok((GuideMoments { f, q, f_star, q_star }, self.log_predictive(h, y)))
    }

    pub fn predictive(&self, h: ConjugateHyper) -> Predictive {
        match self.family {
            Family::Poisson => Predictive::NegBinomial {
                shape: h.alpha,
                rate: h.beta,
            },
            Family::Normal { variance } => Predictive::Normal {
                mean: h.alpha,
                variance: h.beta + variance,
            },
            Family::Binomial { trials } => Predictive::BetaBinomial {
                trials,
                alpha: h.alpha,
                beta: h.beta,
            },
            Family::Gamma { shape } => Predictive::GammaGamma {
                shape,
                alpha: h.alpha,
                beta: h.beta,
            },
            Family::NegativeBinomial => Predictive::Normal {
                mean: f64::NAN,
                variance: f64::NAN,
            },
        }
    }

    fn check_hyper(&self, h: ConjugateHyper) -> Result<()> {
        let ok = match self.family {
            Family::Normal { .. } => h.alpha.is_finite() && h.beta > 0.0,
            _ => h.alpha > 0.0 && h.beta > 0.0,
        };
        if ok && h.beta.is_finite() {
            Ok(())
        } else {
            domain(format!("invalid hyperparameters ({}, {})", h.alpha, h.beta))
        }
    }
}

fn unsupported() -> Error {
    Error::UnsupportedFamily(
        "negative binomial has no usable guide-prior elicitation; use poisson, normal, binomial or gamma".into(),
    )
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Exact logit-Beta moment matching: psi(a) - psi(b) = f, psi'(a) + psi'(b) = q.
fn solve_logit_beta(f: f64, q: f64) -> (f64, f64) {
    let mut a = (1.0 + f.exp()) / q;
    let mut b = (1.0 + (-f).exp()) / q;
    for _ in 0..200 {
        let r1 = digamma(a) - digamma(b) - f;
        let r2 = trigamma(a) + trigamma(b) - q;
        let (ta, tb) = (trigamma(a), trigamma(b));
        let (da, db) = (tetragamma_fd(a), tetragamma_fd(b));
        // Jacobian [[ta, -tb], [da, db]]
        let det = ta * db + tb * da;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_a = (r1 * db + tb * r2) / det;
        let step_b = (ta * r2 - da * r1) / det;
        let mut na = a - step_a;
        let mut nb = b - step_b;
        if na <= 0.0 {
            na = a / 2.0;
        }
        if nb <= 0.0 {
            nb = b / 2.0;
        }
        let done = (na - a).abs() <= 1e-13 * a && (nb - b).abs() <= 1e-13 * b;
        a = na;
        b = nb;
        if done {
            break;
        }
    }
    (a, b)
}

fn tetragamma_fd(x: f64) -> f64 {
    let h = 1e-5 * x.max(1e-3);
    (trigamma(x + h) - trigamma(x - h.min(x / 2.0))) / (h + h.min(x / 2.0))
}

/// One-step predictive distribution of an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predictive {
    NegBinomial {
        shape: f64,
        rate: f64,
    },
    Normal {
        mean: f64,
        variance: f64,
    },
    BetaBinomial {
        trials: u32,
        alpha: f64,
        beta: f64,
    },
    /// Gamma observation with Gamma-distributed rate.
    GammaGamma {
        shape: f64,
        alpha: f64,
        beta: f64,
    },
}

impl Predictive {
    pub fn is_discrete(&self) -> bool {
        matches!(self, Predictive::NegBinomial { .. } | Predictive::BetaBinomial { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Predictive::NegBinomial { shape, rate } => shape / rate,
            Predictive::Normal { mean, .. } => mean,
            Predictive::BetaBinomial { trials, alpha, beta } => trials as f64 * alpha / (alpha + beta),
            Predictive::GammaGamma { shape, alpha, beta } => {
                if alpha > 1.0 {
                    shape * beta / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Log mass at an integer `k` (discrete variants only).
    pub fn ln_pmf(&self, k: u64) -> f64 {
        let y = k as f64;
        match *self {
            Predictive::NegBinomial { shape, rate } => {
                ln_gamma(shape + y) - ln_gamma(shape) - ln_gamma(y + 1.0) + shape * (rate / (1.0 + rate)).ln()
                    - y * (1.0 + rate).ln()
            }
            Predictive::BetaBinomial { trials, alpha, beta } => {
                if k > trials as u64 {
                    return f64::NEG_INFINITY;
                }
                let n = trials as f64;
                ln_choose(n, y) + ln_beta(alpha + y, beta + n - y) - ln_beta(alpha, beta)
            }
            _ => f64::NAN,
        }
    }

    /// Cumulative distribution function at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            Predictive::Normal { mean, variance } => 0.5 * erfc(-(y - mean) / (2.0 * variance).sqrt()),
            Predictive::GammaGamma { shape, alpha, beta } => {
                if y <= 0.0 {
                    0.0
                } else {
                    beta_reg(shape, alpha, y / (beta + y))
                }
            }
            Predictive::NegBinomial { shape, rate } => {
                if y < 0.0 {
                    0.0
                } else {
                    beta_reg(shape, y.floor() + 1.0, rate / (1.0 + rate))
                }
            }
            Predictive::BetaBinomial { .. } => {
                if y < 0.0 {
                    return 0.0;
                }
                let top = y.floor() as u64;
                (0..=top).map(|k| self.ln_pmf(k).exp()).sum::<f64>().min(1.0)
            }
        }
    }
}
