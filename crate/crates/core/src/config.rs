//! Run configuration read from TOML. Every section is optional; unknown keys
//! are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arms::BetaPrior;
use crate::dglm::{Matrix, ModelSpec, Regressors};
use crate::ef_models::{Family, MomentMatching, ObservationModel};
use crate::error::{Error, Result};
use crate::gibbs::{ChainConfig, InitialU, ScanOrder};
use crate::io::Series;
use crate::partition::{BetaOrientation, CohesionPrior};
use crate::sim::{GeneratorSpec, Jump};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data: DataSection,
    pub model: ModelSection,
    pub prior: PriorSection,
    pub chain: ChainSection,
    pub simulate: SimulateSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// A bundled dataset name or a CSV path.
    pub source: String,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { source: "coal".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Partition model: indicators and discount factor sampled.
    #[default]
    Ppm,
    /// Conventional DGLM: a break after every observation.
    Dglm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// poisson, normal, binomial or gamma.
    pub family: String,
    /// Must name the family's canonical link when given.
    pub link: Option<String>,
    pub variance: Option<f64>,
    pub trials: Option<u32>,
    pub shape: Option<f64>,
    pub moments: MomentMatching,
    /// Scalar regression constant, ignored when the series has x columns.
    pub f: f64,
    /// Scalar evolution, ignored when the series has x columns.
    pub g: f64,
    pub m0: f64,
    pub c0: f64,
    /// Starting value of the discount factor.
    pub delta0: f64,
    pub evolve_first_block: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Ppm,
            family: "poisson".into(),
            link: None,
            variance: None,
            trials: None,
            shape: None,
            moments: MomentMatching::FirstOrder,
            f: 1.0,
            g: 1.0,
            m0: 1.0,
            c0: 10.0,
            delta0: 0.5,
            evolve_first_block: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSection {
    /// Beta hyperparameters for the change probability.
    pub pi: [f64; 2],
    pub orientation: BetaOrientation,
    /// Beta hyperparameters `(a, b)` for the discount factor, density
    /// proportional to `delta^(a-1) (1-delta)^(b-1)`.
    pub delta: [f64; 2],
}

impl Default for PriorSection {
    fn default() -> Self {
        Self {
            pi: [1.0, 1.0],
            orientation: BetaOrientation::NoChangeFirst,
            delta: [1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    #[default]
    AllOnes,
    AllZeros,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Independent chains merged into one summary.
    pub chains: usize,
    pub initial: InitialKind,
    /// Probability of a 1 when `initial = "random"`.
    pub initial_p: f64,
    pub scan: ScanOrder,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            iterations: 4_000,
            burn_in: 1_000,
            thin: 3,
            seed: 1,
            chains: 1,
            initial: InitialKind::AllOnes,
            initial_p: 0.5,
            scan: ScanOrder::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub replications: usize,
    pub n: usize,
    pub phi: f64,
    pub w: f64,
    pub gamma0: f64,
    /// 1-based jump times.
    pub jumps: Vec<usize>,
    pub shift: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            replications: 25,
            n: 100,
            phi: 0.99,
            w: 0.001,
            gamma0: 100f64.ln(),
            jumps: vec![20, 40, 60, 80],
            shift: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.observation_model()?;
        let m = &self.model;
        let finite = [m.f, m.g, m.m0, m.c0].iter().all(|v| v.is_finite());
        if !finite || !(m.c0 > 0.0) {
            return Err(config_err("model f, g, m0 must be finite and c0 positive"));
        }
        if !(m.delta0 > 0.0 && m.delta0 <= 1.0) {
            return Err(config_err(format!("delta0 must lie in (0, 1], got {}", m.delta0)));
        }
        let positive = |p: [f64; 2], what: &str| {
            if p.iter().all(|v| *v > 0.0 && v.is_finite()) {
                Ok(())
            } else {
                Err(config_err(format!(
                    "{what} prior parameters must be positive, got {p:?}"
                )))
            }
        };
        positive(self.prior.pi, "pi")?;
        positive(self.prior.delta, "delta")?;
        if !(0.0..=1.0).contains(&self.chain.initial_p) {
            return Err(config_err(format!(
                "initial_p must lie in [0, 1], got {}",
                self.chain.initial_p
            )));
        }
        if self.chain.chains == 0 {
            return Err(config_err("chains must be at least 1"));
        }
        self.chain_config(0)?.validate()?;
        if self.simulate.replications == 0 {
            return Err(config_err("replications must be at least 1"));
        }
        self.generator_spec()
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        Ok(())
    }

    pub fn observation_model(&self) -> Result<ObservationModel> {
        let m = &self.model;
        let need =
            |v: Option<f64>, what: &str| v.ok_or_else(|| config_err(format!("family {} needs {what}", m.family)));
        let (family, link) = match m.family.as_str() {
            "poisson" => (Family::Poisson, "log"),
            "normal" => (
                Family::Normal {
                    variance: need(m.variance, "variance")?,
                },
                "identity",
            ),
            "binomial" => (
                Family::Binomial {
                    trials: m.trials.ok_or_else(|| config_err("family binomial needs trials"))?,
                },
                "logit",
            ),
            "gamma" => (
                Family::Gamma {
                    shape: need(m.shape, "shape")?,
                },
                "negative-rate",
            ),
            "negative-binomial" => {
                return Err(Error::UnsupportedFamily(
                    "negative-binomial has no guide-prior algebra".into(),
                ))
            }
            other => return Err(config_err(format!("unknown family {other:?}"))),
        };
        if let Some(l) = &m.link {
            if l != link {
                return Err(config_err(format!("family {} uses the {link} link, not {l}", m.family)));
            }
        }
        let model = ObservationModel::new(family).with_moments(m.moments);
        model.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(model)
    }

    /// Local level from `f, g`, or `F_t = x_t`, `G = I` when the series
    /// carries regressors.
    pub fn model_spec(&self, series: &Series) -> Result<ModelSpec> {
        let m = &self.model;
        let k = series.regressor_count();
        let mut spec = if k == 0 {
            ModelSpec::local_level(m.f, m.g, m.m0, m.c0, m.delta0)
        } else {
            ModelSpec {
                regressors: Regressors::PerObservation(series.x.clone()),
                evolution: Matrix::identity(k),
                m0: vec![m.m0; k],
                c0: Matrix::scaled_identity(k, m.c0),
                delta: m.delta0,
                evolve_first_block: true,
            }
        };
        spec.evolve_first_block = m.evolve_first_block;
        spec.validate(series.len())?;
        Ok(spec)
    }

    pub fn cohesion(&self) -> CohesionPrior {
        CohesionPrior::beta(self.prior.pi[0], self.prior.pi[1], self.prior.orientation)
    }

    pub fn chain_config(&self, stream: u64) -> Result<ChainConfig> {
        let c = &self.chain;
        let cfg = ChainConfig {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            seed: c.seed,
            stream,
            initial_u: match c.initial {
                InitialKind::AllOnes => InitialU::AllOnes,
                InitialKind::AllZeros => InitialU::AllZeros,
                InitialKind::Random => InitialU::Random(c.initial_p),
            },
            delta_prior: BetaPrior {
                a: self.prior.delta[0],
                b: self.prior.delta[1],
            },
            cohesion: self.cohesion(),
            scan: c.scan,
            ..ChainConfig::default()
        };
        Ok(match self.model.kind {
            ModelKind::Ppm => cfg,
            ModelKind::Dglm => cfg.conventional_dglm(),
        })
    }

    pub fn generator_spec(&self) -> GeneratorSpec {
        let s = &self.simulate;
        GeneratorSpec {
            n: s.n,
            phi: s.phi,
            w: s.w,
            gamma0: s.gamma0,
            jumps: s.jumps.iter().map(|&t| Jump { t, shift: s.shift }).collect(),
            seed: self.chain.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_series;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn full_document() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [data]
            source = "coal"
            [model]
            family = "poisson"
            link = "log"
            f = 1.0
            [prior]
            pi = [10.0, 1.0]
            [chain]
            iterations = 45000
            burn_in = 5000
            thin = 10
            seed = 7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.cohesion(), CohesionPrior::BetaPi { a_pi: 1.0, b_pi: 10.0 });
        let chain = cfg.chain_config(0).unwrap();
        assert_eq!(chain.retained(), 4000);
        let series = load_series("coal").unwrap();
        let spec = cfg.model_spec(&series).unwrap();
        assert_eq!(spec.dim(), 1);
    }

    #[test]
    fn rejects_bad_documents() {
        for (doc, code) in [
            ("[model]\nfamliy = \"poisson\"", "unknown field"),
            ("[model]\nfamily = \"weibull\"", "unknown family"),
            ("[model]\nfamily = \"normal\"", "variance"),
            ("[model]\nlink = \"identity\"", "log link"),
            ("[prior]\npi = [0.0, 1.0]", "pi prior"),
            ("[chain]\nburn_in = 20000", "burn-in"),
            ("[chain]\nchains = 0", "chains"),
            ("[model]\ndelta0 = 1.5", "delta0"),
            ("[simulate]\njumps = [100]", "jump"),
            ("iterations = 3", "unknown field"),
        ] {
            match RunConfig::from_toml_str(doc) {
                Err(Error::Config(msg)) => assert!(msg.contains(code), "{doc}: {msg}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
        assert!(matches!(
            RunConfig::from_toml_str("[model]\nfamily = \"negative-binomial\""),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn regressors_define_the_state() {
        let series = crate::io::parse_series_csv("t,y,x1,x2\n1,3,1,0\n2,4,1,1\n3,5,1,2\n").unwrap();
        let spec = RunConfig::default().model_spec(&series).unwrap();
        assert_eq!(spec.dim(), 2);
        assert_eq!(spec.regressors.at(2), &[1.0, 2.0]);
    }

    #[test]
    fn dglm_kind_fixes_the_partition() {
        let cfg = RunConfig::from_toml_str("[model]\nkind = \"dglm\"").unwrap();
        let chain = cfg.chain_config(0).unwrap();
        assert!(!chain.sample_partition);
        assert_eq!(chain.initial_u, InitialU::AllZeros);
    }
}
