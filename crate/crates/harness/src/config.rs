//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [experiment]
//! horizon = 5
//! episodes = 2000
//! reps = 50
//! base_seed = 0
//!
//! [env]
//! type = "oil"
//! dim = 1
//! survey = "laplace"
//!
//! [agent]
//! type = "adaql"
//! bonus_scale = 0.1
//!
//! [output]
//! dir = "out/oil"
//! ```

use std::path::{Path, PathBuf};

use adarl::envs::{AmbulanceConfig, Arrival, OilConfig, Survey, TransitionNoise};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub env: EnvSection,
    pub agent: AgentSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tune: Option<TuneSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    /// Mean wall-clock time per step spent inside the agent. Makes the metrics file vary between runs.
    Wall,
    /// Report zero step times so that metrics files are byte-for-byte reproducible.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub horizon: usize,
    pub episodes: usize,
    pub reps: usize,
    pub base_seed: u64,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    pub timing: Timing,
    pub dump_partitions: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            horizon: 5,
            episodes: 2000,
            reps: 50,
            base_seed: 0,
            workers: 0,
            timing: Timing::None,
            dump_partitions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnvSection {
    Oil(OilSection),
    Ambulance(AmbulanceSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OilSection {
    pub dim: usize,
    pub survey: Survey,
    pub alpha: f64,
    pub reward_noise_sd: f64,
    pub transition: TransitionNoise,
    pub cost_norm: f64,
}

impl Default for OilSection {
    fn default() -> Self {
        let base = OilConfig::new(1, 1, Survey::Laplace);
        Self {
            dim: base.dim,
            survey: base.survey,
            alpha: base.alpha,
            reward_noise_sd: base.reward_noise_sd,
            transition: base.transition,
            cost_norm: base.cost_norm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    Beta,
    Shifting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmbulanceSection {
    pub fleet: usize,
    pub alpha: f64,
    pub arrival: ArrivalKind,
    pub beta_a: f64,
    pub beta_b: f64,
    pub half_width: f64,
    pub norm: f64,
}

impl Default for AmbulanceSection {
    fn default() -> Self {
        Self {
            fleet: 1,
            alpha: 0.25,
            arrival: ArrivalKind::Beta,
            beta_a: 5.0,
            beta_b: 2.0,
            half_width: 0.25,
            norm: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Adaql,
    Adamb,
    EpsQl,
    EpsMb,
    Stable,
    Median,
    Random,
}

impl AgentKind {
    /// The fixed-grid counterpart of an adaptive agent.
    pub fn uniform_counterpart(self) -> Option<AgentKind> {
        match self {
            AgentKind::Adaql => Some(AgentKind::EpsQl),
            AgentKind::Adamb => Some(AgentKind::EpsMb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    #[serde(rename = "type")]
    pub kind: AgentKind,
    pub bonus_scale: f64,
    pub split_scale: f64,
    pub epsilon: f64,
    /// Lipschitz constant of the value function. The model-free agents default it to 1;
    /// the model-based agent derives it from the reward and transition constants.
    pub lipschitz: Option<f64>,
    pub lipschitz_reward: f64,
    pub lipschitz_transition: f64,
    pub delta: f64,
    pub max_depth: Option<u32>,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            kind: AgentKind::Adaql,
            bonus_scale: 1.0,
            split_scale: 1.0,
            epsilon: 0.125,
            lipschitz: None,
            lipschitz_reward: 1.0,
            lipschitz_transition: 1.0,
            delta: 0.05,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneParam {
    BonusScale,
    SplitScale,
    Epsilon,
    Lipschitz,
}

impl TuneParam {
    pub fn name(self) -> &'static str {
        match self {
            TuneParam::BonusScale => "bonus_scale",
            TuneParam::SplitScale => "split_scale",
            TuneParam::Epsilon => "epsilon",
            TuneParam::Lipschitz => "lipschitz",
        }
    }

    pub fn apply(self, agent: &mut AgentSection, value: f64) {
        match self {
            TuneParam::BonusScale => agent.bonus_scale = value,
            TuneParam::SplitScale => agent.split_scale = value,
            TuneParam::Epsilon => agent.epsilon = value,
            TuneParam::Lipschitz => agent.lipschitz = Some(value),
        }
    }
}

impl std::str::FromStr for TuneParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bonus_scale" => Ok(TuneParam::BonusScale),
            "split_scale" => Ok(TuneParam::SplitScale),
            "epsilon" => Ok(TuneParam::Epsilon),
            "lipschitz" => Ok(TuneParam::Lipschitz),
            other => Err(HarnessError::Config(format!(
                "unknown tuning parameter `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    pub param: TuneParam,
    pub grid: Vec<f64>,
    pub reps: usize,
}

impl Default for TuneSection {
    fn default() -> Self {
        Self {
            param: TuneParam::BonusScale,
            grid: Vec::new(),
            reps: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks counts and builds the environment and the agent once so that bad
    /// parameters are reported before any work starts.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.horizon == 0 || e.episodes == 0 || e.reps == 0 {
            return Err(HarnessError::Config(
                "horizon, episodes and reps must be at least 1".into(),
            ));
        }
        if let Some(t) = &self.tune {
            if t.grid.is_empty() || t.reps == 0 {
                return Err(HarnessError::Config(
                    "tuning needs a nonempty grid and reps >= 1".into(),
                ));
            }
        }
        let env = crate::runner::build_env(self)?;
        crate::runner::build_agent(self, env.spec())?;
        Ok(())
    }

    pub fn oil_config(&self, s: &OilSection) -> OilConfig {
        OilConfig {
            dim: s.dim,
            horizon: self.experiment.horizon,
            survey: s.survey,
            alpha: s.alpha,
            reward_noise_sd: s.reward_noise_sd,
            transition: s.transition,
            cost_norm: s.cost_norm,
        }
    }

    pub fn ambulance_config(&self, s: &AmbulanceSection) -> AmbulanceConfig {
        let arrival = match s.arrival {
            ArrivalKind::Beta => Arrival::Beta {
                a: s.beta_a,
                b: s.beta_b,
            },
            ArrivalKind::Shifting => Arrival::Shifting {
                half_width: s.half_width,
            },
        };
        AmbulanceConfig {
            fleet: s.fleet,
            horizon: self.experiment.horizon,
            alpha: s.alpha,
            arrival,
            norm: s.norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg =
            ExperimentConfig::from_toml("[env]\ntype = \"oil\"\n[agent]\ntype = \"random\"\n")
                .unwrap();
        assert_eq!(cfg.experiment.horizon, 5);
        assert_eq!(cfg.experiment.episodes, 2000);
        assert_eq!(cfg.experiment.reps, 50);
        assert_eq!(cfg.env, EnvSection::Oil(OilSection::default()));
        assert_eq!(cfg.agent.kind, AgentKind::Random);
        assert!(cfg.tune.is_none());
    }

    #[test]
    fn round_trips_through_toml() {
        let text = r#"
            [experiment]
            horizon = 3
            episodes = 10
            reps = 2
            base_seed = 7
            timing = "none"

            [env]
            type = "ambulance"
            fleet = 2
            arrival = "shifting"

            [agent]
            type = "adamb"
            lipschitz = 2.0

            [tune]
            param = "split_scale"
            grid = [0.5, 1.0]
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        match &cfg.env {
            EnvSection::Ambulance(a) => {
                assert_eq!((a.fleet, a.arrival), (2, ArrivalKind::Shifting))
            }
            other => panic!("unexpected env {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            "[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\nbonus = 1.0\n",
            "[env]\ntype = \"lake\"\n[agent]\ntype = \"adaql\"\n",
            "[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\n[experiment]\nreps = 0\n",
            "[env]\ntype = \"oil\"\n[agent]\ntype = \"eps_ql\"\nepsilon = 0.0\n",
            "[env]\ntype = \"oil\"\nalpha = -1.0\n[agent]\ntype = \"adaql\"\n",
            "[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\n[tune]\ngrid = []\n",
        ];
        for text in bad {
            let err = ExperimentConfig::from_toml(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }
}
