//! JSON model configuration shared by the command-line tool.
//!
//! A document carries exactly one model form: discrete laws
//! (`px`, `ec`, `ac_y`, `ac_z`), `gaussian`, or `binary`. Matrices must be
//! row-stochastic within [`STOCHASTIC_TOL`]; they are renormalized after the
//! check. Schema problems are reported as [`Error::Schema`] and mass problems
//! as [`Error::InvalidDistribution`] / [`Error::InvalidChannel`].

use serde::{Deserialize, Serialize};

use crate::binary::BinaryModelParams;
use crate::classify::ClassifierSettings;
use crate::error::{Error, Result};
use crate::gaussian::GaussianModelParams;
use crate::info::{Channel, DiscreteDistribution, InfoUnit};
use crate::region::{AuthModel, SamplerConfig, TwoAuxCaps};
use crate::sim::{Binning, RateOverrides, SimConfig};

pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSettings {
    pub two_aux_samples: usize,
    pub max_u: usize,
    pub max_v: usize,
}

impl Default for CompareSettings {
    fn default() -> Self {
        Self {
            two_aux_samples: 100_000,
            max_u: 4,
            max_v: 3,
        }
    }
}

impl CompareSettings {
    pub fn caps(&self) -> TwoAuxCaps {
        TwoAuxCaps {
            max_u: self.max_u,
            max_v: self.max_v,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulator {
    n: usize,
    gamma: f64,
    test_channel: Vec<Vec<f64>>,
    #[serde(default)]
    rate_overrides: Option<RateOverrides>,
    #[serde(default)]
    binning: Binning,
    exact_leakage_limit: Option<usize>,
    trials: Option<usize>,
    max_codewords: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    px: Option<Vec<f64>>,
    ec: Option<Vec<Vec<f64>>>,
    ac_y: Option<Vec<Vec<f64>>>,
    ac_z: Option<Vec<Vec<f64>>>,
    gaussian: Option<GaussianModelParams>,
    binary: Option<BinaryModelParams>,
    unit: Option<InfoUnit>,
    seed: Option<u64>,
    sampler: Option<SamplerConfig>,
    classifier: Option<ClassifierSettings>,
    simulator: Option<RawSimulator>,
    compare: Option<CompareSettings>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Discrete {
        px: DiscreteDistribution,
        ec: Channel,
        ac_y: Channel,
        ac_z: Channel,
    },
    Gaussian(GaussianModelParams),
    Binary(BinaryModelParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub model: ModelSpec,
    pub unit: Option<InfoUnit>,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub classifier: ClassifierSettings,
    pub simulator: Option<SimConfig>,
    pub compare: CompareSettings,
}

fn stochastic(v: &[f64], what: &str) -> std::result::Result<Vec<f64>, String> {
    if v.is_empty() {
        return Err(format!("{what} is empty"));
    }
    if let Some(p) = v.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("{what} has entry {p}"));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(format!("{what} sums to {total}"));
    }
    Ok(v.iter().map(|p| p / total).collect())
}

/// Validates a matrix from a config document and renormalizes its rows.
pub fn channel_from_rows(rows: &[Vec<f64>], name: &str) -> Result<Channel> {
    if rows.is_empty() {
        return Err(Error::InvalidChannel(format!("{name} has no rows")));
    }
    let width = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Schema(format!(
            "{name} row {i} has {} entries, expected {width}",
            rows[i].len()
        )));
    }
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| stochastic(r, &format!("{name} row {i}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Error::InvalidChannel)?;
    Channel::new(rows)
}

/// Validates a probability vector from a config document and renormalizes it.
pub fn distribution_from_probs(probs: &[f64], name: &str) -> Result<DiscreteDistribution> {
    DiscreteDistribution::new(stochastic(probs, name).map_err(Error::InvalidDistribution)?)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ModelConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let discrete = [
        raw.px.is_some(),
        raw.ec.is_some(),
        raw.ac_y.is_some(),
        raw.ac_z.is_some(),
    ];
    let forms = usize::from(discrete.iter().any(|&b| b))
        + usize::from(raw.gaussian.is_some())
        + usize::from(raw.binary.is_some());
    if forms != 1 {
        return Err(Error::Schema(format!(
            "expected exactly one model form (px/ec/ac_y/ac_z, gaussian, binary), found {forms}"
        )));
    }
    let model = match (raw.px, raw.ec, raw.ac_y, raw.ac_z, raw.gaussian, raw.binary) {
        (Some(px), Some(ec), Some(ac_y), Some(ac_z), None, None) => {
            let px = distribution_from_probs(&px, "px")?;
            let (ec, ac_y, ac_z) = (
                channel_from_rows(&ec, "ec")?,
                channel_from_rows(&ac_y, "ac_y")?,
                channel_from_rows(&ac_z, "ac_z")?,
            );
            for (name, c) in [("ec", &ec), ("ac_y", &ac_y), ("ac_z", &ac_z)] {
                if c.inputs() != px.len() {
                    return Err(Error::Schema(format!(
                        "{name} has {} rows but px has {} entries",
                        c.inputs(),
                        px.len()
                    )));
                }
            }
            ModelSpec::Discrete { px, ec, ac_y, ac_z }
        }
        (None, None, None, None, Some(g), None) => {
            g.validate().map_err(|e| Error::Schema(e.to_string()))?;
            ModelSpec::Gaussian(g)
        }
        (None, None, None, None, None, Some(b)) => {
            b.validate().map_err(|e| Error::Schema(e.to_string()))?;
            ModelSpec::Binary(b)
        }
        _ => {
            return Err(Error::Schema(
                "discrete models need all of px, ec, ac_y and ac_z".into(),
            ))
        }
    };

    let simulator = match raw.simulator {
        None => None,
        Some(s) => {
            let mut cfg = SimConfig::new(
                s.n,
                channel_from_rows(&s.test_channel, "simulator.test_channel")?,
                s.gamma,
            );
            cfg.rate_overrides = s.rate_overrides;
            cfg.binning = s.binning;
            cfg.exact_leakage_limit = s.exact_leakage_limit.unwrap_or(cfg.exact_leakage_limit);
            cfg.trials = s.trials.unwrap_or(cfg.trials);
            cfg.max_codewords = s.max_codewords.unwrap_or(cfg.max_codewords);
            Some(cfg)
        }
    };
    let mut cfg = ModelConfig {
        model,
        unit: raw.unit,
        seed: 0,
        sampler: raw.sampler.unwrap_or_default(),
        classifier: raw.classifier.unwrap_or_default(),
        simulator,
        compare: raw.compare.unwrap_or_default(),
    };
    if let Some(seed) = raw.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

impl ModelConfig {
    /// Applies one seed to every randomized component.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.sampler.seed = seed;
        self.classifier.seed = seed;
        if let Some(s) = self.simulator.as_mut() {
            s.seed = seed;
        }
    }

    /// The discrete model, classified. Binary parameters are expanded into
    /// their channel matrices; Gaussian models have no discrete form.
    pub fn auth_model(&self) -> Result<AuthModel> {
        match &self.model {
            ModelSpec::Discrete { px, ec, ac_y, ac_z } => {
                AuthModel::new(px.clone(), ec.clone(), ac_y.clone(), ac_z.clone(), &self.classifier)
            }
            ModelSpec::Binary(b) => b.to_model(&self.classifier),
            ModelSpec::Gaussian(_) => Err(Error::Schema("a discrete or binary model is required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_form() {
        let c = parse_config(r#"{"binary": {"p": 0.1, "q": 0.5, "eps": 0.2}, "seed": 7}"#).unwrap();
        assert!(matches!(c.model, ModelSpec::Binary(b) if b.beta_step == 1e-3));
        assert_eq!((c.seed, c.sampler.seed, c.classifier.seed), (7, 7, 7));
        assert_eq!(c.unit, None);
    }

    #[test]
    fn gaussian_form() {
        let c = parse_config(r#"{"gaussian": {"rho1_sq": 0.875, "rho2_sq": 0.8, "rho3_sq": 0.6666}, "unit": "nats"}"#)
            .unwrap();
        assert!(matches!(c.model, ModelSpec::Gaussian(g) if g.alpha_points == 400));
        assert_eq!(c.unit, Some(InfoUnit::Nats));
        assert!(c.auth_model().is_err());
    }

    #[test]
    fn discrete_form_renormalizes() {
        let text = r#"{
            "px": [0.5, 0.5],
            "ec": [[0.9, 0.1], [0.1, 0.9]],
            "ac_y": [[0.9, 0.1], [0.1, 0.9000000001]],
            "ac_z": [[0.8, 0.2], [0.2, 0.8]]
        }"#;
        let c = parse_config(text).unwrap();
        let ModelSpec::Discrete { ac_y, .. } = &c.model else {
            panic!()
        };
        assert!((ac_y.row(1).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schema_errors() {
        for text in [
            "",
            "[]",
            r#"{"binary": {"p": 0.1, "q": 0.5, "eps": 0.2}, "gaussian": {"rho1_sq": 0.5, "rho2_sq": 0.4, "rho3_sq": 0.1}}"#,
            r#"{"px": [0.5, 0.5]}"#,
            r#"{"binary": {"p": 0.1, "q": 0.5}}"#,
            r#"{"binary": {"p": 0.1, "q": 0.5, "eps": 0.2, "extra": 1}}"#,
            r#"{"binary": {"p": 0.7, "q": 0.5, "eps": 0.2}}"#,
            r#"{"binary": {"p": 0.1, "q": 0.5, "eps": 0.2}, "colour": 1}"#,
            r#"{"px": [0.5, 0.5], "ec": [[1.0]], "ac_y": [[1.0]], "ac_z": [[1.0]]}"#,
            r#"{"px": [1.0], "ec": [[0.5, 0.5], [1.0]], "ac_y": [[1.0]], "ac_z": [[1.0]]}"#,
        ] {
            assert!(matches!(parse_config(text), Err(Error::Schema(_))), "{text}");
        }
    }

    #[test]
    fn stochasticity_errors() {
        let row =
            r#"{"px": [0.5, 0.5], "ec": [[0.8, 0.1], [0.1, 0.9]], "ac_y": [[1, 0], [0, 1]], "ac_z": [[1, 0], [0, 1]]}"#;
        assert!(matches!(parse_config(row), Err(Error::InvalidChannel(_))));
        let px = r#"{"px": [0.5, 0.6], "ec": [[1, 0], [0, 1]], "ac_y": [[1, 0], [0, 1]], "ac_z": [[1, 0], [0, 1]]}"#;
        assert!(matches!(parse_config(px), Err(Error::InvalidDistribution(_))));
        let neg = r#"{"px": [1.2, -0.2], "ec": [[1, 0], [0, 1]], "ac_y": [[1, 0], [0, 1]], "ac_z": [[1, 0], [0, 1]]}"#;
        assert!(matches!(parse_config(neg), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn simulator_block() {
        let text = r#"{
            "binary": {"p": 0.1, "q": 0.5, "eps": 0.2},
            "seed": 3,
            "simulator": {"n": 6, "gamma": 0.1, "test_channel": [[0.95, 0.05], [0.05, 0.95]], "trials": 100}
        }"#;
        let c = parse_config(text).unwrap();
        let s = c.simulator.unwrap();
        assert_eq!((s.n, s.trials, s.seed, s.exact_leakage_limit), (6, 100, 3, 10));
    }
}
