//! The agent interface and the episode loop shared by the harness and the tests.

use std::time::{Duration, Instant};

use rand::RngCore;

use crate::envs::{EnvOutcome, Environment};
use crate::error::Result;
use crate::geometry::Point;
use crate::partition::LeafRecord;
use crate::scalar::Real;

/// An online episodic learner. Steps are 1-based.
pub trait Agent<T: Real> {
    fn name(&self) -> &'static str;

    fn act(&mut self, h: usize, state: &Point<T>, rng: &mut dyn RngCore) -> Result<Point<T>>;

    fn observe(
        &mut self,
        h: usize,
        state: &Point<T>,
        action: &Point<T>,
        outcome: &EnvOutcome<T>,
    ) -> Result<()>;

    /// Called once after step `H` of every episode.
    fn end_episode(&mut self) -> Result<()> {
        Ok(())
    }

    /// Leaves summed over the horizon for adaptive agents, table cells for grid agents.
    fn node_count(&self) -> usize;

    fn partition_dump(&self) -> Vec<LeafRecord> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport<T> {
    pub start: Point<T>,
    pub rewards: Vec<T>,
    /// Time spent inside the agent (act, observe and end-of-episode work).
    pub agent_time: Duration,
}

impl<T: Real> EpisodeReport<T> {
    pub fn total_reward(&self) -> T {
        self.rewards.iter().copied().sum()
    }
}

/// Plays one episode of `env.horizon()` steps.
///
/// The environment and the agent draw from separate generators so that an agent
/// consuming randomness does not perturb the environment's noise stream.
pub fn play_episode<T: Real>(
    env: &dyn Environment<T>,
    agent: &mut dyn Agent<T>,
    env_rng: &mut dyn RngCore,
    agent_rng: &mut dyn RngCore,
) -> Result<EpisodeReport<T>> {
    let start = env.reset(env_rng);
    let mut state = start.clone();
    let mut rewards = Vec::with_capacity(env.horizon());
    let mut agent_time = Duration::ZERO;
    for h in 1..=env.horizon() {
        let t0 = Instant::now();
        let action = agent.act(h, &state, agent_rng)?;
        agent_time += t0.elapsed();

        let outcome = env.step(h, &state, &action, env_rng);

        let t1 = Instant::now();
        agent.observe(h, &state, &action, &outcome)?;
        agent_time += t1.elapsed();

        rewards.push(outcome.reward);
        state = outcome.next_state;
    }
    let t2 = Instant::now();
    agent.end_episode()?;
    agent_time += t2.elapsed();
    Ok(EpisodeReport {
        start,
        rewards,
        agent_time,
    })
}
