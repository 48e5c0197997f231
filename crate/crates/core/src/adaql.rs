//! Model-free adaptive Q-learning.
//!
//! Each step of the horizon owns an [`AdaptivePartition`]. On a visit the
//! selected ball receives a recency-weighted one-step update towards
//! `r + bonus + V̂_{h+1}(x') + Bias(B)` with learning rate `(H+1)/(H+t)`,
//! after which it may split.

use rand::RngCore;

use crate::agent::Agent;
use crate::envs::EnvOutcome;
use crate::error::{Error, Result};
use crate::geometry::{MetricSpec, Point};
use crate::partition::{AdaptivePartition, LeafRecord, NodeId, SplitRule};
use crate::scalar::Real;

/// Splitting exponent used by the model-free agent.
pub const QL_SPLIT_EXPONENT: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaQlConfig<T> {
    pub horizon: usize,
    pub episodes: usize,
    /// Confidence level of the bonuses.
    pub delta: T,
    /// Multiplier on the reward and transition bonuses.
    pub bonus_scale: T,
    /// Scale of the splitting threshold `Conf = scale / sqrt(n)`.
    pub split_scale: T,
    /// Lipschitz constant of the value function; enters `Bias(B) = 2·L_V·diam(B)`.
    pub lipschitz: T,
    pub max_depth: u32,
}

impl<T: Real> AdaQlConfig<T> {
    pub fn new(horizon: usize, episodes: usize) -> Self {
        Self {
            horizon,
            episodes,
            delta: T::lit(0.05),
            bonus_scale: T::one(),
            split_scale: T::one(),
            lipschitz: T::one(),
            max_depth: crate::geometry::MAX_DEPTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.episodes == 0 {
            return Err(Error::InvalidParameter(
                "horizon and episodes must be positive".into(),
            ));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "delta {} outside (0, 1)",
                self.delta
            )));
        }
        if !(self.bonus_scale >= T::zero()) || !(self.lipschitz >= T::zero()) {
            return Err(Error::InvalidParameter(
                "bonus scale and Lipschitz constant must be >= 0".into(),
            ));
        }
        if !(self.split_scale > T::zero()) {
            return Err(Error::InvalidParameter(
                "split scale must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `log(2 H K^2 / δ)`.
    pub fn log_term(&self) -> T {
        let h = T::from_count(self.horizon as u64);
        let k = T::from_count(self.episodes as u64);
        (T::lit(2.0) * h * k * k / self.delta).ln()
    }
}

/// `α_t = (H+1)/(H+t)`.
pub fn learning_rate<T: Real>(t: u64, horizon: usize) -> Result<T> {
    if t == 0 {
        return Err(Error::ZeroCount);
    }
    let h = T::from_count(horizon as u64);
    Ok((h + T::one()) / (h + T::from_count(t)))
}

/// `(α_t^1, …, α_t^t)` with `α_t^i = α_i ∏_{j=i+1}^{t} (1 - α_j)`.
pub fn alpha_weights<T: Real>(t: u64, horizon: usize) -> Vec<T> {
    let mut out = vec![T::zero(); t as usize];
    let mut tail = T::one();
    for i in (1..=t).rev() {
        let a = learning_rate::<T>(i, horizon).expect("i >= 1");
        out[(i - 1) as usize] = a * tail;
        tail = tail * (T::one() - a);
    }
    out
}

/// Reward and transition bonuses `(2√(H·L/t), 2√(H³·L/t))` scaled by the bonus scale,
/// with `L = log(2HK²/δ)`.
pub fn bonuses_ql<T: Real>(t: u64, cfg: &AdaQlConfig<T>) -> Result<(T, T)> {
    if t == 0 {
        return Err(Error::ZeroCount);
    }
    let h = T::from_count(cfg.horizon as u64);
    let base = (cfg.log_term() / T::from_count(t)).sqrt();
    let two = T::lit(2.0);
    let r = cfg.bonus_scale * two * h.sqrt() * base;
    let tr = cfg.bonus_scale * two * (h * h * h).sqrt() * base;
    Ok((r, tr))
}

/// What a single update did to the selected ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QlStep<T> {
    /// Visit count after the update.
    pub t: u64,
    pub learning_rate: T,
    /// `r + rbonus + V̂_{h+1}(x') + tbonus + Bias(B)`.
    pub target: T,
    pub split: bool,
}

#[derive(Debug, Clone)]
pub struct AdaQlAgent<T> {
    config: AdaQlConfig<T>,
    spec: MetricSpec,
    partitions: Vec<AdaptivePartition<T>>,
    pending: Vec<Option<NodeId>>,
}

impl<T: Real> AdaQlAgent<T> {
    pub fn new(spec: MetricSpec, config: AdaQlConfig<T>) -> Result<Self> {
        config.validate()?;
        let rule = SplitRule::new(config.split_scale, QL_SPLIT_EXPONENT)?;
        let h_total = config.horizon;
        let partitions = (1..=h_total)
            .map(|h| {
                let init = T::from_count((h_total - h + 1) as u64);
                AdaptivePartition::new(spec, h, rule, init, false).with_max_depth(config.max_depth)
            })
            .collect();
        Ok(Self {
            config,
            spec,
            partitions,
            pending: vec![None; h_total],
        })
    }

    /// An agent whose partitions are refined uniformly to `depth` and frozen there,
    /// i.e. tabular Q-learning over the dyadic grid of that depth.
    pub fn frozen_at_depth(
        spec: MetricSpec,
        mut config: AdaQlConfig<T>,
        depth: u32,
    ) -> Result<Self> {
        config.max_depth = depth;
        let mut agent = Self::new(spec, config)?;
        for p in &mut agent.partitions {
            p.refine_uniform(depth)?;
        }
        Ok(agent)
    }

    pub fn config(&self) -> &AdaQlConfig<T> {
        &self.config
    }

    pub fn spec(&self) -> MetricSpec {
        self.spec
    }

    /// Partition of step `h` (1-based).
    pub fn partition(&self, h: usize) -> &AdaptivePartition<T> {
        &self.partitions[h - 1]
    }

    pub fn partition_mut(&mut self, h: usize) -> &mut AdaptivePartition<T> {
        &mut self.partitions[h - 1]
    }

    fn check_step(&self, h: usize) -> Result<()> {
        if h == 0 || h > self.config.horizon {
            return Err(Error::StepOutOfRange {
                step: h,
                horizon: self.config.horizon,
            });
        }
        Ok(())
    }

    pub fn select(&self, h: usize, x: &Point<T>) -> NodeId {
        self.partition(h).select_ball(x)
    }

    /// `min(H, max_{B relevant} Q̂_h(B))`, and `0` past the horizon.
    pub fn v_hat(&self, h: usize, x: &Point<T>) -> T {
        if h > self.config.horizon {
            return T::zero();
        }
        let p = self.partition(h);
        let best = p
            .relevant(x)
            .into_iter()
            .map(|id| p.node(id).qhat)
            .fold(T::neg_infinity(), T::max);
        best.min(T::from_count(self.config.horizon as u64))
    }

    pub fn bias(&self, diameter: T) -> T {
        T::lit(2.0) * self.config.lipschitz * diameter
    }

    /// Records the visit of `ball` at step `h`, applies the one-step update and splits
    /// the ball if it has reached its threshold.
    ///
    /// Steps must be updated in increasing order within an episode so that the
    /// `V̂_{h+1}` read here still reflects the previous episode.
    pub fn step_update(
        &mut self,
        h: usize,
        ball: NodeId,
        reward: T,
        x_next: &Point<T>,
    ) -> Result<QlStep<T>> {
        self.check_step(h)?;
        let reward = reward.max(T::zero()).min(T::one());
        let v_next = self.v_hat(h + 1, x_next);
        let t = self.partitions[h - 1].record_visit(ball)?;
        let lr = learning_rate::<T>(t, self.config.horizon)?;
        let (rb, tb) = bonuses_ql(t, &self.config)?;
        let diameter = self.partition(h).node(ball).diameter();
        let target = reward + rb + v_next + tb + self.bias(diameter);
        let part = &mut self.partitions[h - 1];
        let node = part.node_mut(ball);
        node.qhat = (T::one() - lr) * node.qhat + lr * target;
        let split = part.maybe_split(ball)?;
        Ok(QlStep {
            t,
            learning_rate: lr,
            target,
            split,
        })
    }

    pub fn total_leaves(&self) -> usize {
        self.partitions.iter().map(|p| p.node_count()).sum()
    }
}

impl<T: Real> Agent<T> for AdaQlAgent<T> {
    fn name(&self) -> &'static str {
        "adaql"
    }

    fn act(&mut self, h: usize, state: &Point<T>, _rng: &mut dyn RngCore) -> Result<Point<T>> {
        self.check_step(h)?;
        let ball = self.select(h, state);
        self.pending[h - 1] = Some(ball);
        Ok(self.partition(h).node(ball).action())
    }

    fn observe(
        &mut self,
        h: usize,
        _state: &Point<T>,
        _action: &Point<T>,
        outcome: &EnvOutcome<T>,
    ) -> Result<()> {
        self.check_step(h)?;
        let ball = self.pending[h - 1].take().ok_or_else(|| {
            Error::InvalidParameter(format!("observe at step {h} without a prior act"))
        })?;
        self.step_update(h, ball, outcome.reward, &outcome.next_state)?;
        Ok(())
    }

    fn node_count(&self) -> usize {
        self.total_leaves()
    }

    fn partition_dump(&self) -> Vec<LeafRecord> {
        self.partitions.iter().flat_map(|p| p.dump()).collect()
    }
}
