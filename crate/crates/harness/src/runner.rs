//! Seeded replications and their output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use adarl::adamb::{AdaMbAgent, AdaMbConfig};
use adarl::adaql::{AdaQlAgent, AdaQlConfig};
use adarl::baselines::{
    EpsMbAgent, EpsMbConfig, EpsNet, EpsQlAgent, MedianAgent, RandomAgent, StableAgent,
};
use adarl::envs::{AmbulanceEnv, Environment, OilEnv};
use adarl::{play_episode, Agent, LeafRecord, MetricSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AgentKind, EnvSection, ExperimentConfig, Timing};
use crate::error::{HarnessError, Result};

pub const METRICS_HEADER: &str = "algo,env,rep,episode,ep_reward,cum_reward,step_time_ns,nodes";

/// One line of the metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub algo: String,
    pub env: String,
    pub rep: usize,
    pub episode: usize,
    pub ep_reward: f64,
    pub cum_reward: f64,
    /// Mean agent time per step over the episode.
    pub step_time_ns: u64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    pub rep: usize,
    pub records: Vec<MetricsRecord>,
    pub partition: Vec<LeafRecord>,
}

impl RepOutcome {
    pub fn final_cum_reward(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_reward)
    }
}

pub fn build_env(cfg: &ExperimentConfig) -> Result<Box<dyn Environment<f64>>> {
    Ok(match &cfg.env {
        EnvSection::Oil(s) => Box::new(OilEnv::new(cfg.oil_config(s))?),
        EnvSection::Ambulance(s) => Box::new(AmbulanceEnv::new(cfg.ambulance_config(s))?),
    })
}

fn ql_config(cfg: &ExperimentConfig) -> AdaQlConfig<f64> {
    let a = &cfg.agent;
    let mut c = AdaQlConfig::new(cfg.experiment.horizon, cfg.experiment.episodes);
    c.delta = a.delta;
    c.bonus_scale = a.bonus_scale;
    c.split_scale = a.split_scale;
    c.lipschitz = a.lipschitz.unwrap_or(1.0);
    if let Some(d) = a.max_depth {
        c.max_depth = d;
    }
    c
}

fn mb_config(cfg: &ExperimentConfig) -> AdaMbConfig<f64> {
    let a = &cfg.agent;
    let mut c = AdaMbConfig::new(cfg.experiment.horizon, cfg.experiment.episodes);
    c.delta = a.delta;
    c.bonus_scale = a.bonus_scale;
    c.split_scale = a.split_scale;
    c.lipschitz_reward = a.lipschitz_reward;
    c.lipschitz_transition = a.lipschitz_transition;
    c.lipschitz_value = a.lipschitz;
    if let Some(d) = a.max_depth {
        c.max_depth = d;
    }
    c
}

pub fn build_agent(cfg: &ExperimentConfig, spec: MetricSpec) -> Result<Box<dyn Agent<f64>>> {
    let a = &cfg.agent;
    let horizon = cfg.experiment.horizon;
    Ok(match a.kind {
        AgentKind::Adaql => Box::new(AdaQlAgent::new(spec, ql_config(cfg))?),
        AgentKind::Adamb => Box::new(AdaMbAgent::new(spec, mb_config(cfg))?),
        AgentKind::EpsQl => Box::new(EpsQlAgent::new(
            spec,
            EpsNet::new(a.epsilon)?,
            ql_config(cfg),
        )?),
        AgentKind::EpsMb => {
            let mut c = EpsMbConfig::new(horizon, cfg.experiment.episodes);
            c.delta = a.delta;
            c.bonus_scale = a.bonus_scale;
            Box::new(EpsMbAgent::new(spec, EpsNet::new(a.epsilon)?, c)?)
        }
        AgentKind::Stable => Box::new(StableAgent),
        AgentKind::Median => Box::new(MedianAgent::<f64>::new(spec.action_dim, horizon)),
        AgentKind::Random => Box::new(RandomAgent::new(spec.action_dim)),
    })
}

/// Generators for replication `rep`: the environment and the agent get separate
/// streams of the same seed `base_seed + rep`.
pub fn rep_rngs(cfg: &ExperimentConfig, rep: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let seed = cfg.experiment.base_seed.wrapping_add(rep as u64);
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    env_rng.set_stream(0);
    let mut agent_rng = ChaCha8Rng::seed_from_u64(seed);
    agent_rng.set_stream(1);
    (env_rng, agent_rng)
}

/// Runs every episode of one replication.
pub fn run_rep(cfg: &ExperimentConfig, rep: usize) -> Result<RepOutcome> {
    let env = build_env(cfg)?;
    let mut agent = build_agent(cfg, env.spec())?;
    let (mut env_rng, mut agent_rng) = rep_rngs(cfg, rep);
    let algo = agent.name().to_string();
    let env_id = env.id();
    let horizon = cfg.experiment.horizon as u128;
    let mut cum = 0.0;
    let mut records = Vec::with_capacity(cfg.experiment.episodes);
    for episode in 1..=cfg.experiment.episodes {
        let report = play_episode(env.as_ref(), agent.as_mut(), &mut env_rng, &mut agent_rng)?;
        let ep_reward = report.total_reward();
        cum += ep_reward;
        let step_time_ns = match cfg.experiment.timing {
            Timing::Wall => {
                u64::try_from(report.agent_time.as_nanos() / horizon).unwrap_or(u64::MAX)
            }
            Timing::None => 0,
        };
        records.push(MetricsRecord {
            algo: algo.clone(),
            env: env_id.clone(),
            rep,
            episode,
            ep_reward,
            cum_reward: cum,
            step_time_ns,
            nodes: agent.node_count(),
        });
    }
    Ok(RepOutcome {
        rep,
        records,
        partition: agent.partition_dump(),
    })
}

/// A pool of the configured width; zero means one thread per core.
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))
}

/// Runs all replications in parallel; results come back in replication order.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<RepOutcome>> {
    let pool = worker_pool(cfg.experiment.workers)?;
    pool.install(|| {
        (0..cfg.experiment.reps)
            .into_par_iter()
            .map(|rep| run_rep(cfg, rep))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub metrics: PathBuf,
    pub partitions: Vec<PathBuf>,
}

pub fn write_metrics(path: &Path, outcomes: &[RepOutcome]) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    for rec in outcomes.iter().flat_map(|o| &o.records) {
        w.serialize(rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Config(format!("{}: {other:?}", path.display())),
    })?;
    let header = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != METRICS_HEADER {
        return Err(HarnessError::Config(format!(
            "{}: unexpected header `{header}`",
            path.display()
        )));
    }
    r.deserialize()
        .map(|rec| rec.map_err(|e| HarnessError::Config(format!("{}: {e}", path.display()))))
        .collect()
}

fn write_partition(path: &Path, leaves: &[LeafRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for leaf in leaves {
        let line = serde_json::to_string(leaf).expect("leaf records serialize");
        writeln!(w, "{line}").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes `metrics.csv` and, for agents with a partition, one `partition_rep<r>.jsonl`
/// per replication into `dir`.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    outcomes: &[RepOutcome],
    dir: &Path,
) -> Result<RunFiles> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let metrics = dir.join("metrics.csv");
    write_metrics(&metrics, outcomes)?;
    let mut partitions = Vec::new();
    if cfg.experiment.dump_partitions {
        for o in outcomes.iter().filter(|o| !o.partition.is_empty()) {
            let path = dir.join(format!("partition_rep{}.jsonl", o.rep));
            write_partition(&path, &o.partition)?;
            partitions.push(path);
        }
    }
    Ok(RunFiles {
        metrics,
        partitions,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunFiles> {
    let outcomes = run_all(cfg)?;
    write_outputs(cfg, &outcomes, dir)
}
