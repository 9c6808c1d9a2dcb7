use std::path::{Path, PathBuf};

use aags_core::envs::{GridConfig, SailingConfig, TunnelConfig, MAX_STEPS};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Top-level experiment description. Unknown keys anywhere are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub algo: AlgoConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    Grid(GridConfig),
    Sailing(SailingConfig),
    Tunnel(TunnelConfig),
    Bandit(BanditConfig),
    Chain(ChainConfig),
}

impl EnvConfig {
    pub fn id(&self) -> &'static str {
        match self {
            EnvConfig::Grid(_) => "grid",
            EnvConfig::Sailing(_) => "sailing",
            EnvConfig::Tunnel(_) => "tunnel",
            EnvConfig::Bandit(_) => "bandit",
            EnvConfig::Chain(_) => "chain",
        }
    }

    /// Whether AAGS should keep its graph between steps by default. Worlds
    /// with drifting dynamics (the sailing wind) start afresh every step.
    pub fn is_static(&self) -> bool {
        !matches!(self, EnvConfig::Sailing(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditConfig {
    /// Per arm, `(reward, weight)` outcomes.
    pub arms: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub len: u32,
    #[serde(default)]
    pub quit_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgoConfig {
    Aags(AagsSettings),
    Uct(UctSettings),
}

impl AlgoConfig {
    pub fn id(&self) -> &'static str {
        match self {
            AlgoConfig::Aags(_) => "aags",
            AlgoConfig::Uct(_) => "uct",
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            AlgoConfig::Aags(a) => a.gamma,
            AlgoConfig::Uct(u) => u.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AagsSettings {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_confidence")]
    pub epsilon: f64,
    #[serde(default = "default_confidence")]
    pub delta: f64,
    /// Trajectory length.
    #[serde(default = "default_aags_horizon")]
    pub horizon: usize,
    /// Defaults to keeping the graph in static worlds only.
    #[serde(default)]
    pub reuse_graph: Option<bool>,
    #[serde(default)]
    pub beta_floor: Option<f64>,
    #[serde(default)]
    pub root_action_selection: bool,
}

impl Default for AagsSettings {
    fn default() -> Self {
        Self {
            gamma: default_gamma(),
            epsilon: default_confidence(),
            delta: default_confidence(),
            horizon: default_aags_horizon(),
            reuse_graph: None,
            beta_floor: None,
            root_action_selection: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UctSettings {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub c: f64,
    #[serde(default = "default_rollout_horizon")]
    pub rollout_horizon: usize,
}

fn default_gamma() -> f64 {
    0.95
}

fn default_confidence() -> f64 {
    0.1
}

fn default_aags_horizon() -> usize {
    20
}

fn default_rollout_horizon() -> usize {
    25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Ambiguity attitudes; ignored by UCT.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub pairs: PairSpec,
    pub episodes: usize,
}

fn default_alphas() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSpec {
    /// The start and goal of the env config.
    #[default]
    Fixed,
    /// Start-goal pairs drawn uniformly without replacement (grid, sailing).
    Sampled {
        count: usize,
        #[serde(default)]
        min_distance: f64,
        #[serde(default = "unbounded")]
        max_distance: f64,
    },
    /// Goal distances for generated tunnel layouts.
    Distances(Vec<i32>),
}

fn unbounded() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// AAGS trajectories or UCT iterations per environment step.
    #[serde(default = "default_samples")]
    pub samples_per_step: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Measure wall-clock time per episode. Off by default so that output
    /// files are reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

fn default_samples() -> usize {
    500
}

fn default_max_steps() -> usize {
    MAX_STEPS
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            samples_per_step: default_samples(),
            max_steps: default_max_steps(),
            seed: 0,
            out: None,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file; a relative tunnel `map_file` is resolved against
    /// the config's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_json(&text)?;
        if let EnvConfig::Tunnel(t) = &mut config.env {
            if let Some(map) = &t.map_file {
                if map.is_relative() {
                    let base = path.parent().unwrap_or(Path::new("."));
                    t.map_file = Some(base.join(map));
                }
            }
        }
        Ok(config)
    }

    /// Attitudes actually swept: none for UCT.
    pub fn alphas(&self) -> Vec<Option<f64>> {
        match self.algo {
            AlgoConfig::Aags(_) => self.sweep.alphas.iter().copied().map(Some).collect(),
            AlgoConfig::Uct(_) => vec![None],
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.sweep.episodes == 0 {
            return err("sweep.episodes must be at least 1".into());
        }
        if self.sweep.alphas.is_empty() {
            return err("sweep.alphas must not be empty".into());
        }
        if let Some(a) = self.sweep.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return err(format!("sweep.alphas: {a} outside [0, 1]"));
        }
        if self.run.samples_per_step == 0 || self.run.max_steps == 0 {
            return err("run.samples_per_step and run.max_steps must be at least 1".into());
        }
        let gamma = self.algo.gamma();
        if !(gamma > 0.0 && gamma < 1.0) {
            return err(format!("algo.gamma {gamma} outside (0, 1)"));
        }
        match (&self.sweep.pairs, &self.env) {
            (PairSpec::Sampled { .. }, EnvConfig::Grid(_) | EnvConfig::Sailing(_)) => {}
            (PairSpec::Sampled { .. }, env) => return err(format!("sweep.pairs.sampled is not supported for env {}", env.id())),
            (PairSpec::Distances(_), EnvConfig::Tunnel(_)) => {}
            (PairSpec::Distances(_), env) => return err(format!("sweep.pairs.distances is not supported for env {}", env.id())),
            (PairSpec::Fixed, _) => {}
        }
        match &self.sweep.pairs {
            PairSpec::Sampled { count: 0, .. } => return err("sweep.pairs.sampled.count must be at least 1".into()),
            PairSpec::Distances(d) if d.is_empty() || d.iter().any(|&d| d < 1) => {
                return err("sweep.pairs.distances must be nonempty and positive".into())
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "env": {"grid": {"width": 10, "height": 10}},
        "algo": {"aags": {}},
        "sweep": {"alphas": [0.0, 1.0], "episodes": 2}
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.run.samples_per_step, 500);
        assert_eq!(c.run.max_steps, 100);
        assert_eq!(c.sweep.pairs, PairSpec::Fixed);
        assert_eq!(c.alphas(), vec![Some(0.0), Some(1.0)]);
        let EnvConfig::Grid(g) = &c.env else { panic!() };
        assert_eq!(g.p_stay, 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for bad in [
            MINIMAL.replace("\"sweep\"", "\"extra\": 1, \"sweep\""),
            MINIMAL.replace("\"width\"", "\"widht\""),
            MINIMAL.replace("\"aags\": {}", "\"aags\": {\"alpah\": 1}"),
            MINIMAL.replace("\"episodes\"", "\"episode\""),
            MINIMAL.replace("\"grid\"", "\"maze\""),
        ] {
            let e = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
            assert!(e.contains("unknown") || e.contains("missing"), "{e}");
        }
    }

    #[test]
    fn offending_key_is_named() {
        let e = ExperimentConfig::from_json(&MINIMAL.replace("\"grid\"", "\"maze\"")).unwrap_err();
        assert!(e.to_string().contains("maze"), "{e}");
        let e = ExperimentConfig::from_json(&MINIMAL.replace("\"aags\"", "\"gbop\"")).unwrap_err();
        assert!(e.to_string().contains("gbop"), "{e}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("[0.0, 1.0]", "[]")).is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("[0.0, 1.0]", "[1.5]")).is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"episodes\": 2", "\"episodes\": 0")).is_err());
        let distances = MINIMAL.replace("\"episodes\": 2", "\"episodes\": 2, \"pairs\": {\"distances\": [5]}");
        assert!(ExperimentConfig::from_json(&distances).is_err());
    }

    #[test]
    fn uct_ignores_alphas() {
        let c = ExperimentConfig::from_json(&MINIMAL.replace("\"aags\": {}", "\"uct\": {\"c\": 0.5}")).unwrap();
        assert_eq!(c.alphas(), vec![None]);
    }
}
