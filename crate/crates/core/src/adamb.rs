//! Model-based adaptive discretization.
//!
//! Every ball keeps an empirical reward mean and an empirical transition
//! distribution over the state cells at its own level. After each episode the
//! agent runs a full optimistic value-iteration sweep over all leaves, from the
//! last step backwards, and extrapolates the resulting values across the state
//! space with a Lipschitz envelope.

use std::collections::BTreeMap;

use rand::RngCore;

use crate::agent::Agent;
use crate::envs::EnvOutcome;
use crate::error::{Error, Result};
use crate::geometry::{
    cell_children, cell_containing, center_coords, sup_distance, DyadicCell, MetricSpec, Point,
};
use crate::partition::{AdaptivePartition, LeafRecord, ModelStats, NodeId, SplitRule};
use crate::scalar::Real;

/// Splitting exponent of the model-based agent for a state space of dimension `state_dim`.
pub fn mb_split_exponent(state_dim: usize) -> u32 {
    if state_dim <= 2 {
        2
    } else {
        state_dim as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaMbConfig<T> {
    pub horizon: usize,
    pub episodes: usize,
    pub delta: T,
    /// Multiplier on the bonuses and the aggregation bias.
    pub bonus_scale: T,
    pub split_scale: T,
    pub lipschitz_reward: T,
    pub lipschitz_transition: T,
    /// Derived from the reward and transition constants when absent.
    pub lipschitz_value: Option<T>,
    pub max_depth: u32,
}

impl<T: Real> AdaMbConfig<T> {
    pub fn new(horizon: usize, episodes: usize) -> Self {
        Self {
            horizon,
            episodes,
            delta: T::lit(0.05),
            bonus_scale: T::one(),
            split_scale: T::one(),
            lipschitz_reward: T::one(),
            lipschitz_transition: T::one(),
            lipschitz_value: None,
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
        let nonneg = [
            self.bonus_scale,
            self.lipschitz_reward,
            self.lipschitz_transition,
            self.lipschitz_value(),
        ];
        if nonneg.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidParameter(
                "bonus scale and Lipschitz constants must be >= 0".into(),
            ));
        }
        if !(self.split_scale > T::zero()) {
            return Err(Error::InvalidParameter(
                "split scale must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `L_V`, or `Σ_{i=0}^{H} L_r L_T^i` when it was not given.
    pub fn lipschitz_value(&self) -> T {
        self.lipschitz_value.unwrap_or_else(|| {
            (0..=self.horizon as i32)
                .map(|i| self.lipschitz_reward * self.lipschitz_transition.powi(i))
                .sum()
        })
    }

    /// `log(2 H K^2 / δ)`.
    pub fn log_term(&self) -> T {
        let h = T::from_count(self.horizon as u64);
        let k = T::from_count(self.episodes as u64);
        (T::lit(2.0) * h * k * k / self.delta).ln()
    }
}

/// Folds one observation into the running means of a ball visited `t` times (this visit included).
/// Transition mass is tracked over the state cells at `level`.
pub fn update_model<T: Real>(
    model: &mut ModelStats<T>,
    t: u64,
    reward: T,
    x_next: &Point<T>,
    level: u32,
) -> Result<()> {
    if t == 0 {
        return Err(Error::ZeroCount);
    }
    let t_real = T::from_count(t);
    let keep = T::from_count(t - 1) / t_real;
    let fresh = T::one() / t_real;
    model.rbar = keep * model.rbar + fresh * reward;
    for mass in model.tbar.values_mut() {
        *mass = *mass * keep;
    }
    let slot = model
        .tbar
        .entry(cell_containing(x_next, level))
        .or_insert_with(T::zero);
    *slot = *slot + fresh;
    Ok(())
}

/// Spreads each cell's mass evenly over its children one level down.
pub fn split_transition<T: Real>(parent: &BTreeMap<DyadicCell, T>) -> BTreeMap<DyadicCell, T> {
    let mut out = BTreeMap::new();
    for (cell, &mass) in parent {
        let kids =
            cell_children(cell, u32::MAX).expect("transition cells stay below the depth cap");
        let share = mass / T::from_count(kids.len() as u64);
        for kid in kids {
            out.insert(kid, share);
        }
    }
    out
}

/// `(rbonus, tbonus, bias)` for a ball at `level` with `t` visits and `d_S = state_dim`.
pub fn bonuses_mb<T: Real>(
    t: u64,
    level: u32,
    state_dim: usize,
    cfg: &AdaMbConfig<T>,
) -> Result<(T, T, T)> {
    if t == 0 {
        return Err(Error::ZeroCount);
    }
    let c = cfg.bonus_scale;
    let lv = cfg.lipschitz_value();
    let t_real = T::from_count(t);
    let log_term = cfg.log_term();
    let rb = c * (T::lit(2.0) * log_term / t_real).sqrt();
    let concentration = if state_dim > 2 {
        T::one() / t_real.root(state_dim as u32)
    } else {
        T::from_count(cfg.episodes as u64).ln() / t_real.sqrt()
    };
    let tb = c * lv * (T::lit(4.0) * (log_term / t_real).sqrt() + concentration);
    let diam = T::dyadic(level);
    let bias = c
        * (T::lit(4.0) * cfg.lipschitz_reward
            + lv * (T::lit(5.0) * cfg.lipschitz_transition + T::lit(4.0)))
        * diam;
    Ok((rb, tb, bias))
}

/// Per-step table of `Ṽ` over the state cells induced by the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<T> {
    cells: BTreeMap<DyadicCell, T>,
}

impl<T: Real> ValueTable<T> {
    /// A table covering `S` with a single cell valued `init`.
    pub fn uniform(state_dim: usize, init: T) -> Self {
        Self {
            cells: BTreeMap::from([(DyadicCell::root(state_dim), init)]),
        }
    }

    pub fn from_cells(cells: BTreeMap<DyadicCell, T>) -> Self {
        Self { cells }
    }

    pub fn cells(&self) -> &BTreeMap<DyadicCell, T> {
        &self.cells
    }

    pub fn get(&self, cell: &DyadicCell) -> Option<T> {
        self.cells.get(cell).copied()
    }

    /// Value stored for `cell` or, failing that, for its nearest stored ancestor.
    pub fn inherited(&self, cell: &DyadicCell) -> Option<T> {
        std::iter::successors(Some(cell.clone()), DyadicCell::parent).find_map(|c| self.get(&c))
    }

    /// `min_A (Ṽ(A) + L_V · ‖x - center(A)‖_∞)`.
    pub fn extrapolate(&self, x: &[T], lipschitz: T) -> T {
        self.cells
            .iter()
            .map(|(cell, &v)| v + lipschitz * sup_distance(x, &center_coords::<T>(cell)))
            .fold(T::infinity(), T::min)
    }
}

#[derive(Debug, Clone)]
pub struct AdaMbAgent<T> {
    config: AdaMbConfig<T>,
    spec: MetricSpec,
    lipschitz_value: T,
    partitions: Vec<AdaptivePartition<T>>,
    tables: Vec<ValueTable<T>>,
    pending: Vec<Option<NodeId>>,
}

impl<T: Real> AdaMbAgent<T> {
    pub fn new(spec: MetricSpec, config: AdaMbConfig<T>) -> Result<Self> {
        config.validate()?;
        let rule = SplitRule::new(config.split_scale, mb_split_exponent(spec.state_dim))?;
        let horizon = config.horizon;
        let cap = |h: usize| T::from_count((horizon - h + 1) as u64);
        let partitions = (1..=horizon)
            .map(|h| {
                AdaptivePartition::new(spec, h, rule, cap(h), true).with_max_depth(config.max_depth)
            })
            .collect();
        let tables = (1..=horizon)
            .map(|h| ValueTable::uniform(spec.state_dim, cap(h)))
            .collect();
        Ok(Self {
            lipschitz_value: config.lipschitz_value(),
            config,
            spec,
            partitions,
            tables,
            pending: vec![None; horizon],
        })
    }

    pub fn config(&self) -> &AdaMbConfig<T> {
        &self.config
    }

    pub fn spec(&self) -> MetricSpec {
        self.spec
    }

    pub fn partition(&self, h: usize) -> &AdaptivePartition<T> {
        &self.partitions[h - 1]
    }

    pub fn partition_mut(&mut self, h: usize) -> &mut AdaptivePartition<T> {
        &mut self.partitions[h - 1]
    }

    pub fn value_table(&self, h: usize) -> &ValueTable<T> {
        &self.tables[h - 1]
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

    fn cap(&self, h: usize) -> T {
        T::from_count((self.config.horizon - h + 1) as u64)
    }

    pub fn select(&self, h: usize, x: &Point<T>) -> NodeId {
        self.partition(h).select_ball(x)
    }

    /// The Lipschitz extrapolation of `Ṽ_h` to the point `x`; zero past the horizon.
    pub fn v_hat(&self, h: usize, x: &Point<T>) -> T {
        if h > self.config.horizon {
            return T::zero();
        }
        self.tables[h - 1].extrapolate(x.coords(), self.lipschitz_value)
    }

    /// Records a visit of `ball` at step `h`, folds the observation into its model and
    /// splits the ball if it reached its threshold. Estimates change only in [`Self::q_sweep`].
    pub fn record(&mut self, h: usize, ball: NodeId, reward: T, x_next: &Point<T>) -> Result<bool> {
        self.check_step(h)?;
        let reward = reward.max(T::zero()).min(T::one());
        let part = &mut self.partitions[h - 1];
        let t = part.record_visit(ball)?;
        let node = part.node_mut(ball);
        let level = node.level();
        let model = node.model.get_or_insert_with(ModelStats::default);
        update_model(model, t, reward, x_next, level)?;
        part.maybe_split(ball)
    }

    /// Recomputes `Q̂` for every visited leaf and refreshes `Ṽ`, from step `H` down to 1.
    pub fn q_sweep(&mut self) -> Result<()> {
        for h in (1..=self.config.horizon).rev() {
            let updates = self.sweep_step(h)?;
            let part = &mut self.partitions[h - 1];
            for (id, q) in updates {
                part.node_mut(id).qhat = q;
            }
            self.vtilde_refresh(h);
        }
        Ok(())
    }

    fn sweep_step(&self, h: usize) -> Result<Vec<(NodeId, T)>> {
        let part = self.partition(h);
        let cap = self.cap(h);
        let last = h == self.config.horizon;
        let mut next_values: BTreeMap<&DyadicCell, T> = BTreeMap::new();
        let mut out = Vec::new();
        for id in part.leaves() {
            let node = part.node(id);
            if node.count == 0 {
                continue;
            }
            let model = node
                .model
                .as_ref()
                .expect("model-based partitions carry statistics");
            let (rb, tb, bias) =
                bonuses_mb(node.count, node.level(), self.spec.state_dim, &self.config)?;
            let mut q = model.rbar + rb + bias;
            if !last {
                let mut expect = T::zero();
                for (cell, &mass) in &model.tbar {
                    let v = *next_values.entry(cell).or_insert_with(|| {
                        self.tables[h].extrapolate(&center_coords::<T>(cell), self.lipschitz_value)
                    });
                    expect = expect + mass * v;
                }
                q = q + expect + tb;
            }
            out.push((id, q.max(T::zero()).min(cap)));
        }
        Ok(out)
    }

    /// `Ṽ_h(A) ← min(Ṽ_h(A), max_{B: S(B) ⊇ A} Q̂_h(B))` over the induced state cells.
    /// Cells created by a split start from the value of their nearest ancestor.
    pub fn vtilde_refresh(&mut self, h: usize) {
        let part = &self.partitions[h - 1];
        let old = &self.tables[h - 1];
        let cap = self.cap(h);
        let fresh = part
            .induced_state_partition()
            .into_iter()
            .map(|cell| {
                // no node sits strictly inside an induced cell, so the leaves relevant
                // to its center are exactly those whose state cell contains it
                let center = Point::clamped(center_coords::<T>(&cell));
                let best = part
                    .relevant(&center)
                    .into_iter()
                    .map(|id| part.node(id).qhat)
                    .fold(T::neg_infinity(), T::max);
                let prev = old.inherited(&cell).unwrap_or(cap);
                (cell, prev.min(best))
            })
            .collect();
        self.tables[h - 1] = ValueTable::from_cells(fresh);
    }

    pub fn total_leaves(&self) -> usize {
        self.partitions.iter().map(|p| p.node_count()).sum()
    }
}

impl<T: Real> Agent<T> for AdaMbAgent<T> {
    fn name(&self) -> &'static str {
        "adamb"
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
        self.record(h, ball, outcome.reward, &outcome.next_state)?;
        Ok(())
    }

    fn end_episode(&mut self) -> Result<()> {
        self.q_sweep()
    }

    fn node_count(&self) -> usize {
        self.total_leaves()
    }

    fn partition_dump(&self) -> Vec<LeafRecord> {
        self.partitions.iter().flat_map(|p| p.dump()).collect()
    }
}
