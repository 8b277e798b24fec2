use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{SetId, DEFAULT_TOLERANCE};
use crate::oracle::common_info_channel;
use crate::probkit::{AuxChannel, Distortion, ProbTensor, SourceModel};
use crate::regions::{RegionProblem, TraceConfig, DEFAULT_EPSILON};

fn config_error(field: &str, message: impl std::fmt::Display) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Doubly symmetric binary source with crossover `p`.
    Dsbs(f64),
    /// Row-major `p(u, v)`.
    Joint(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DistortionSpec {
    #[default]
    Hamming,
    Matrices { d1: Vec<Vec<f64>>, d2: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizesSpec {
    pub x1: usize,
    pub x2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Inline(AuxChannel),
    CommonInfo { f1: Vec<usize>, f2: Vec<usize>, s_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    #[serde(default = "default_block_lengths")]
    pub n: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Auxiliary sizes of the sampled encoders; default `|U| + 1`, `|V| + 1`.
    #[serde(default)]
    pub sizes: Option<SizesSpec>,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec {
            n: default_block_lengths(),
            trials: default_trials(),
            sizes: None,
        }
    }
}

fn default_block_lengths() -> Vec<usize> {
    vec![1, 2]
}

fn default_trials() -> usize {
    500
}

fn default_sets() -> Vec<SetId> {
    SetId::ALL.to_vec()
}

fn default_weights() -> usize {
    17
}

fn default_budget() -> usize {
    200
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// A run description, read from JSON. Every field except those a
/// subcommand needs is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub distortion: DistortionSpec,
    #[serde(default)]
    pub d: Option<[f64; 2]>,
    #[serde(default = "default_sets")]
    pub sets: Vec<SetId>,
    #[serde(default)]
    pub sizes: Option<SizesSpec>,
    #[serde(default = "default_weights")]
    pub weights: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Three-axis joint for the DPI check, in chain order.
    #[serde(default)]
    pub triple: Option<ProbTensor>,
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub validate: Option<ValidateSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

/// Values given on the command line, which win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub out: Option<PathBuf>,
    pub sets: Vec<SetId>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(budget) = o.budget {
            self.budget = budget;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if !o.sets.is_empty() {
            self.sets = o.sets.clone();
        }
    }

    pub fn source_model(&self) -> Result<SourceModel> {
        let joint = match &self.source {
            None => return Err(config_error("source", "missing")),
            Some(SourceSpec::Dsbs(p)) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(config_error("source", format!("dsbs crossover {p} outside [0, 1]")));
                }
                SourceModel::dsbs(*p).map_err(|e| config_error("source", e))?.joint().clone()
            }
            Some(SourceSpec::Joint(rows)) => ProbTensor::from_matrix("U", "V", rows).map_err(|e| config_error("source", e))?,
        };
        let (d1, d2) = match &self.distortion {
            DistortionSpec::Hamming => (Distortion::hamming(joint.sizes()[0]), Distortion::hamming(joint.sizes()[1])),
            DistortionSpec::Matrices { d1, d2 } => (
                Distortion::new(d1.clone()).map_err(|e| config_error("distortion", e))?,
                Distortion::new(d2.clone()).map_err(|e| config_error("distortion", e))?,
            ),
        };
        SourceModel::new(joint, d1, d2).map_err(|e| config_error("distortion", e))
    }

    pub fn region_problem(&self) -> Result<RegionProblem> {
        let source = self.source_model()?;
        let d = self.d.ok_or_else(|| config_error("d", "missing"))?;
        if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(config_error("d", format!("{d:?} must be finite and nonnegative")));
        }
        let sizes = self.sizes.unwrap_or(SizesSpec {
            x1: source.u_size() + 1,
            x2: source.v_size() + 1,
        });
        if sizes.x1 == 0 || sizes.x2 == 0 {
            return Err(config_error("sizes", "auxiliary alphabets must be nonempty"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(config_error("tolerance", "must be finite and nonnegative"));
        }
        Ok(RegionProblem::new(source, d, sizes.x1, sizes.x2)?.with_tolerance(self.tolerance))
    }

    pub fn trace_config(&self) -> Result<TraceConfig> {
        if self.budget == 0 {
            return Err(config_error("budget", "must be at least 1"));
        }
        if self.weights < 2 {
            return Err(config_error("weights", "must be at least 2"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(config_error("epsilon", "must be finite and nonnegative"));
        }
        if self.sets.is_empty() {
            return Err(config_error("sets", "empty"));
        }
        Ok(TraceConfig::new(self.weights, self.budget, self.seed))
    }

    pub fn channel(&self) -> Result<AuxChannel> {
        match &self.channel {
            None => Err(config_error("channel", "missing")),
            Some(ChannelSpec::Inline(ch)) => Ok(ch.clone()),
            Some(ChannelSpec::CommonInfo { f1, f2, s_size }) => {
                common_info_channel(f1, f2, *s_size).map_err(|e| config_error("channel", e))
            }
        }
    }

    pub fn triple(&self) -> Result<&ProbTensor> {
        let t = self.triple.as_ref().ok_or_else(|| config_error("triple", "missing"))?;
        if t.rank() != 3 {
            return Err(config_error("triple", format!("expected 3 axes, found {}", t.rank())));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(r#"{"source": {"dsbs": 0.1}, "d": [0.05, 0.05]}"#).unwrap();
        assert_eq!(c.weights, 17);
        assert_eq!(c.sets, SetId::ALL.to_vec());
        let p = c.region_problem().unwrap();
        assert_eq!((p.sizes.x1, p.sizes.x2), (3, 3));
    }

    #[test]
    fn unknown_fields_are_refused() {
        assert!(RunConfig::from_json(r#"{"sorce": {"dsbs": 0.1}}"#).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let c = RunConfig::from_json(r#"{"source": {"dsbs": 0.1}, "d": [-0.1, 0]}"#).unwrap();
        match c.region_problem() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "d"),
            other => panic!("unexpected {other:?}"),
        }
        let c = RunConfig::from_json(r#"{"source": {"joint": [[0.5, 0.6]]}, "d": [0, 0]}"#).unwrap();
        assert!(matches!(c.region_problem(), Err(Error::Config { field, .. }) if field == "source"));
        let mut c = RunConfig::default();
        c.budget = 0;
        assert!(matches!(c.trace_config(), Err(Error::Config { field, .. }) if field == "budget"));
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::default();
        c.apply(&Overrides {
            seed: Some(9),
            budget: Some(3),
            out: None,
            sets: vec![SetId::In],
        });
        assert_eq!((c.seed, c.budget, c.sets.clone()), (9, 3, vec![SetId::In]));
    }

    #[test]
    fn channel_specs() {
        let c = RunConfig::from_json(r#"{"channel": {"common_info": {"f1": [0, 1], "f2": [0, 1], "s_size": 2}}}"#).unwrap();
        assert_eq!(c.channel().unwrap().sizes().x1, 4);
        let inline = serde_json::to_string(&c.channel().unwrap()).unwrap();
        let c2 = RunConfig::from_json(&format!(r#"{{"channel": {{"inline": {inline}}}}}"#)).unwrap();
        assert_eq!(c2.channel().unwrap(), c.channel().unwrap());
    }
}
