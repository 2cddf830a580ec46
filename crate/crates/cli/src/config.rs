use std::fmt;

use pegasus_core::bicycle::{BicycleConfig, TrainOptions};
use pegasus_core::theory::BoundInputs;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("params for `{command}`: {source}")]
    Params { command: Command, source: serde_json::Error },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Gridworld,
    BicycleTrain,
    BicycleEval,
    Counterexample,
    Bounds,
    Fidelity,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridworldParams {
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub h: usize,
    pub gamma: f64,
}

impl Default for GridworldParams {
    fn default() -> Self {
        Self { m_values: vec![1, 5, 10, 30, 100], trials: 200, h: 100, gamma: 0.99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BicycleTrainParams {
    pub bicycle: BicycleConfig,
    pub training: TrainOptions,
    /// Starting weights, `w1` then `w2`; zero if absent.
    pub init_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BicycleEvalParams {
    pub bicycle: BicycleConfig,
    /// Output of a `bicycle-train` run.
    pub weights_path: Option<String>,
    /// Inline weights, `w1` then `w2`.
    pub weights: Option<Vec<f64>>,
    pub rides: usize,
}

impl Default for BicycleEvalParams {
    fn default() -> Self {
        Self { bicycle: BicycleConfig::default(), weights_path: None, weights: None, rides: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleParams {
    pub m_values: Vec<usize>,
    pub h: usize,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        Self { m_values: vec![1, 10, 100, 10_000], h: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsParams {
    pub epsilon: f64,
    pub delta: f64,
    pub d: u32,
    pub d_s: u32,
    pub d_p: u32,
    pub b: f64,
    pub b_r: f64,
    pub m_big: f64,
    /// Horizon used by the capacity and sample-size bounds; derived from `gamma` if absent.
    pub h_eps: Option<u32>,
    pub gamma: Option<f64>,
}

impl Default for BoundsParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            delta: 0.1,
            d: 1,
            d_s: 1,
            d_p: 1,
            b: 1.0,
            b_r: 1.0,
            m_big: 1.0,
            h_eps: None,
            gamma: Some(0.5),
        }
    }
}

impl BoundsParams {
    pub fn inputs(&self, h_eps: u32) -> BoundInputs {
        BoundInputs {
            epsilon: self.epsilon,
            delta: self.delta,
            d: self.d,
            d_s: self.d_s,
            d_p: self.d_p,
            b: self.b,
            b_r: self.b_r,
            h_eps,
            m_big: self.m_big,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridVariant {
    #[default]
    Normal,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FidelityParams {
    pub variant: GridVariant,
    pub n: usize,
}

impl Default for FidelityParams {
    fn default() -> Self {
        Self { variant: GridVariant::Normal, n: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Gridworld(GridworldParams),
    BicycleTrain(BicycleTrainParams),
    BicycleEval(BicycleEvalParams),
    Counterexample(CounterexampleParams),
    Bounds(BoundsParams),
    Fidelity(FidelityParams),
}

impl Params {
    fn parse(command: Command, raw: Value) -> Result<Self, ConfigError> {
        let wrap = |source| ConfigError::Params { command, source };
        Ok(match command {
            Command::Gridworld => Params::Gridworld(serde_json::from_value(raw).map_err(wrap)?),
            Command::BicycleTrain => Params::BicycleTrain(serde_json::from_value(raw).map_err(wrap)?),
            Command::BicycleEval => Params::BicycleEval(serde_json::from_value(raw).map_err(wrap)?),
            Command::Counterexample => Params::Counterexample(serde_json::from_value(raw).map_err(wrap)?),
            Command::Bounds => Params::Bounds(serde_json::from_value(raw).map_err(wrap)?),
            Command::Fidelity => Params::Fidelity(serde_json::from_value(raw).map_err(wrap)?),
        })
    }

    fn to_value(&self) -> Value {
        let v = match self {
            Params::Gridworld(p) => serde_json::to_value(p),
            Params::BicycleTrain(p) => serde_json::to_value(p),
            Params::BicycleEval(p) => serde_json::to_value(p),
            Params::Counterexample(p) => serde_json::to_value(p),
            Params::Bounds(p) => serde_json::to_value(p),
            Params::Fidelity(p) => serde_json::to_value(p),
        };
        v.expect("params serialize")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    seed: u64,
    #[serde(default)]
    params: Option<Value>,
    #[serde(default)]
    output_path: Option<String>,
}

#[derive(Debug, Serialize)]
struct EffectiveConfig<'a> {
    command: Command,
    seed: u64,
    params: Value,
    output_path: &'a Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub params: Params,
    pub output_path: Option<String>,
}

/// Prefix of the header line carrying the effective config.
pub const CONFIG_LINE: &str = "# config=";

impl RunConfig {
    /// Parses a JSON config. A previous run's output is accepted too: its
    /// `# config=` header line is used.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let json = text.lines().find_map(|l| l.strip_prefix(CONFIG_LINE)).unwrap_or(text);
        let raw: RawConfig = serde_json::from_str(json)?;
        let params = Params::parse(raw.command, raw.params.unwrap_or_else(|| Value::Object(Default::default())))?;
        let mut config = Self { command: raw.command, seed: raw.seed, params, output_path: raw.output_path };
        config.sync_seed();
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &str) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_string(), source })?;
        Self::parse(&text)
    }

    /// Replaces the seed, keeping nested seeds in step.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.sync_seed();
    }

    /// The run seed wins over a nested `bicycle.seed`.
    fn sync_seed(&mut self) {
        match &mut self.params {
            Params::BicycleTrain(p) => p.bicycle.seed = self.seed,
            Params::BicycleEval(p) => p.bicycle.seed = self.seed,
            _ => {}
        }
    }

    /// The effective config as one line of JSON, defaults included.
    pub fn to_json(&self) -> String {
        let eff = EffectiveConfig {
            command: self.command,
            seed: self.seed,
            params: self.params.to_value(),
            output_path: &self.output_path,
        };
        serde_json::to_string(&eff).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.params {
            Params::Gridworld(p) => {
                if p.trials < 2 {
                    return Err(invalid("trials", "need at least 2 trials"));
                }
                if p.m_values.is_empty() || p.m_values.contains(&0) {
                    return Err(invalid("m_values", "need a nonempty list of positive counts"));
                }
                if p.h == 0 {
                    return Err(invalid("h", "must be positive"));
                }
                if !(p.gamma > 0.0 && p.gamma < 1.0) {
                    return Err(invalid("gamma", "must lie in (0, 1)"));
                }
            }
            Params::BicycleTrain(p) => {
                validate_bicycle(&p.bicycle)?;
                let t = &p.training;
                if t.iters == 0 {
                    return Err(invalid("iters", "must be positive"));
                }
                for (key, v) in [
                    ("perturb_scale", t.perturb_scale),
                    ("step_size", t.step_size),
                    ("clamp", t.clamp),
                    ("grad_step", t.grad_step),
                ] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(invalid(key, "must be positive and finite"));
                    }
                }
                if let Some(w) = &p.init_weights {
                    validate_weights("init_weights", w)?;
                }
            }
            Params::BicycleEval(p) => {
                validate_bicycle(&p.bicycle)?;
                if p.rides == 0 {
                    return Err(invalid("rides", "must be positive"));
                }
                match (&p.weights, &p.weights_path) {
                    (Some(w), None) => validate_weights("weights", w)?,
                    (None, Some(_)) => {}
                    _ => return Err(invalid("weights", "give exactly one of weights and weights_path")),
                }
            }
            Params::Counterexample(p) => {
                if p.m_values.is_empty() || p.m_values.contains(&0) {
                    return Err(invalid("m_values", "need a nonempty list of positive counts"));
                }
                if p.h == 0 {
                    return Err(invalid("h", "must be positive"));
                }
            }
            Params::Bounds(p) => {
                if p.h_eps.is_none() && p.gamma.is_none() {
                    return Err(invalid("h_eps", "give h_eps or gamma"));
                }
                if let Some(g) = p.gamma {
                    if !(0.0..1.0).contains(&g) {
                        return Err(invalid("gamma", "must lie in [0, 1)"));
                    }
                }
                p.inputs(0).validate().map_err(|e| invalid("params", e.to_string()))?;
                if p.epsilon > p.m_big {
                    return Err(invalid("epsilon", "must not exceed m_big"));
                }
            }
            Params::Fidelity(p) => {
                if p.n < 1000 {
                    return Err(invalid("n", "need at least 1000 samples"));
                }
            }
        }
        Ok(())
    }
}

fn validate_bicycle(c: &BicycleConfig) -> Result<(), ConfigError> {
    c.validate().map_err(|e| invalid("bicycle", e.to_string()))
}

fn validate_weights(key: &str, w: &[f64]) -> Result<(), ConfigError> {
    if w.len() != pegasus_core::bicycle::BikeWeights::LEN || w.iter().any(|x| !x.is_finite()) {
        return Err(invalid(key, format!("need {} finite numbers", pegasus_core::bicycle::BikeWeights::LEN)));
    }
    Ok(())
}
