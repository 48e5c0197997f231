//! Comparison agents: Q-learning and UCBVI over a fixed grid, and three heuristics.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use crate::adaql::{bonuses_ql, learning_rate, AdaQlConfig};
use crate::agent::Agent;
use crate::envs::EnvOutcome;
use crate::error::{Error, Result};
use crate::geometry::{MetricSpec, Point};
use crate::scalar::Real;

/// Largest table an ε-net agent will allocate or index.
pub const MAX_TABLE_CELLS: u64 = 1 << 40;

/// A uniform grid with `ceil(1/ε)` cells per axis and centers `(i + ½)/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsNet<T> {
    pub epsilon: T,
    per_axis: u32,
}

impl<T: Real> EpsNet<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {epsilon} outside (0, 1]"
            )));
        }
        let per_axis = (T::one() / epsilon).ceil().to_u32().unwrap_or(u32::MAX);
        Ok(Self { epsilon, per_axis })
    }

    /// A net with exactly `m` cells per axis.
    pub fn with_cells(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "a net needs at least one cell per axis".into(),
            ));
        }
        Ok(Self {
            epsilon: T::one() / T::from_count(u64::from(m)),
            per_axis: m,
        })
    }

    pub fn per_axis(&self) -> u32 {
        self.per_axis
    }

    /// Cell width `1/m`; equals `ε` whenever `1/ε` is an integer.
    pub fn pitch(&self) -> T {
        T::one() / T::from_count(u64::from(self.per_axis))
    }

    pub fn center(&self, i: u32) -> T {
        (T::from_count(u64::from(i)) + T::lit(0.5)) * self.pitch()
    }

    /// Index of the nearest center along one axis; ties go to the smaller index.
    pub fn snap_axis(&self, p: T) -> u32 {
        let m = T::from_count(u64::from(self.per_axis));
        let raw = (p * m).ceil() - T::one();
        raw.max(T::zero())
            .to_u32()
            .unwrap_or(0)
            .min(self.per_axis - 1)
    }

    pub fn snap(&self, p: &Point<T>) -> Vec<u32> {
        p.coords().iter().map(|&c| self.snap_axis(c)).collect()
    }

    /// Row-major flat index, first axis most significant.
    pub fn flatten(&self, idx: &[u32]) -> u64 {
        idx.iter().fold(0u64, |acc, &i| {
            acc * u64::from(self.per_axis) + u64::from(i)
        })
    }

    pub fn unflatten(&self, mut flat: u64, dim: usize) -> Vec<u32> {
        let m = u64::from(self.per_axis);
        let mut out = vec![0u32; dim];
        for slot in out.iter_mut().rev() {
            *slot = (flat % m) as u32;
            flat /= m;
        }
        out
    }

    pub fn cells(&self, dim: usize) -> u64 {
        u64::from(self.per_axis).saturating_pow(dim as u32)
    }

    pub fn center_point(&self, idx: &[u32]) -> Point<T> {
        Point::clamped(idx.iter().map(|&i| self.center(i)).collect())
    }

    fn flat_snap(&self, p: &Point<T>) -> u64 {
        self.flatten(&self.snap(p))
    }

    fn check_size(&self, spec: MetricSpec) -> Result<(u64, u64)> {
        let s = self.cells(spec.state_dim);
        let a = self.cells(spec.action_dim);
        match s.checked_mul(a) {
            Some(total) if total <= MAX_TABLE_CELLS => Ok((s, a)),
            _ => Err(Error::InvalidParameter(format!(
                "epsilon {} gives a table too large for dimensions {}+{}",
                self.epsilon, spec.state_dim, spec.action_dim
            ))),
        }
    }
}

fn step_error(h: usize, horizon: usize) -> Error {
    Error::StepOutOfRange { step: h, horizon }
}

fn no_pending(h: usize) -> Error {
    Error::InvalidParameter(format!("observe at step {h} without a prior act"))
}

fn clamp01<T: Real>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// Model-free Q-learning on an ε-net, with the adaptive agent's learning rate and bonuses.
#[derive(Debug, Clone)]
pub struct EpsQlAgent<T> {
    config: AdaQlConfig<T>,
    net: EpsNet<T>,
    spec: MetricSpec,
    actions: u64,
    q: Vec<Vec<T>>,
    counts: Vec<Vec<u64>>,
    pending: Vec<Option<u64>>,
}

impl<T: Real> EpsQlAgent<T> {
    pub fn new(spec: MetricSpec, net: EpsNet<T>, config: AdaQlConfig<T>) -> Result<Self> {
        config.validate()?;
        let (states, actions) = net.check_size(spec)?;
        let size = usize::try_from(states * actions)
            .map_err(|_| Error::InvalidParameter("ε-net table does not fit in memory".into()))?;
        let horizon = config.horizon;
        let q = (1..=horizon)
            .map(|h| vec![T::from_count((horizon - h + 1) as u64); size])
            .collect();
        Ok(Self {
            config,
            net,
            spec,
            actions,
            q,
            counts: vec![vec![0; size]; horizon],
            pending: vec![None; horizon],
        })
    }

    pub fn net(&self) -> &EpsNet<T> {
        &self.net
    }

    pub fn q_value(&self, h: usize, state: &[u32], action: &[u32]) -> T {
        self.q[h - 1][(self.net.flatten(state) * self.actions + self.net.flatten(action)) as usize]
    }

    fn best_action(&self, h: usize, s: u64) -> (u64, T) {
        let row = &self.q[h - 1][(s * self.actions) as usize..((s + 1) * self.actions) as usize];
        row.iter()
            .enumerate()
            .fold((0u64, T::neg_infinity()), |best, (a, &q)| {
                if q > best.1 {
                    (a as u64, q)
                } else {
                    best
                }
            })
    }

    pub fn v_hat(&self, h: usize, x: &Point<T>) -> T {
        if h > self.config.horizon {
            return T::zero();
        }
        let (_, best) = self.best_action(h, self.net.flat_snap(x));
        best.min(T::from_count(self.config.horizon as u64))
    }

    fn update(&mut self, h: usize, cell: u64, reward: T, x_next: &Point<T>) -> Result<()> {
        let reward = clamp01(reward);
        let v_next = self.v_hat(h + 1, x_next);
        let i = cell as usize;
        self.counts[h - 1][i] += 1;
        let t = self.counts[h - 1][i];
        let lr = learning_rate::<T>(t, self.config.horizon)?;
        let (rb, tb) = bonuses_ql(t, &self.config)?;
        // a cell of side `pitch` lies within `pitch / 2` of its center
        let bias = T::lit(2.0) * self.config.lipschitz * self.net.pitch() * T::lit(0.5);
        let target = reward + rb + v_next + tb + bias;
        let q = &mut self.q[h - 1][i];
        *q = (T::one() - lr) * *q + lr * target;
        Ok(())
    }
}

impl<T: Real> Agent<T> for EpsQlAgent<T> {
    fn name(&self) -> &'static str {
        "eps_ql"
    }

    fn act(&mut self, h: usize, state: &Point<T>, _rng: &mut dyn RngCore) -> Result<Point<T>> {
        if h == 0 || h > self.config.horizon {
            return Err(step_error(h, self.config.horizon));
        }
        let s = self.net.flat_snap(state);
        let (a, _) = self.best_action(h, s);
        self.pending[h - 1] = Some(s * self.actions + a);
        Ok(self
            .net
            .center_point(&self.net.unflatten(a, self.spec.action_dim)))
    }

    fn observe(
        &mut self,
        h: usize,
        _state: &Point<T>,
        _action: &Point<T>,
        outcome: &EnvOutcome<T>,
    ) -> Result<()> {
        if h == 0 || h > self.config.horizon {
            return Err(step_error(h, self.config.horizon));
        }
        let cell = self.pending[h - 1].take().ok_or_else(|| no_pending(h))?;
        self.update(h, cell, outcome.reward, &outcome.next_state)
    }

    fn node_count(&self) -> usize {
        self.config.horizon * self.q[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsMbConfig<T> {
    pub horizon: usize,
    pub episodes: usize,
    pub delta: T,
    pub bonus_scale: T,
}

impl<T: Real> EpsMbConfig<T> {
    pub fn new(horizon: usize, episodes: usize) -> Self {
        Self {
            horizon,
            episodes,
            delta: T::lit(0.05),
            bonus_scale: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.episodes == 0 {
            return Err(Error::InvalidParameter(
                "horizon and episodes must be positive".into(),
            ));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) || !(self.bonus_scale >= T::zero()) {
            return Err(Error::InvalidParameter(
                "need delta in (0, 1) and bonus scale >= 0".into(),
            ));
        }
        Ok(())
    }

    /// `c · √(H² log(2HK²/δ) / n)`.
    pub fn bonus(&self, n: u64) -> T {
        let h = T::from_count(self.horizon as u64);
        let k = T::from_count(self.episodes as u64);
        let log_term = (T::lit(2.0) * h * k * k / self.delta).ln();
        self.bonus_scale * (h * h * log_term / T::from_count(n)).sqrt()
    }
}

/// Statistics of one visited (state cell, action cell) pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabularStats<T> {
    pub n: u64,
    pub reward_sum: T,
    /// Next-state cell (flat index) → visits.
    pub next: BTreeMap<u64, u64>,
    pub q: T,
}

impl<T: Real> TabularStats<T> {
    /// Empirical transition probabilities; they sum to one once visited.
    pub fn transition(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        let n = T::from_count(self.n);
        self.next
            .iter()
            .map(move |(&s, &c)| (s, T::from_count(c) / n))
    }
}

/// UCBVI with Hoeffding bonuses over an ε-net. Only visited pairs are stored;
/// every other pair keeps the optimistic value `H - h + 1`.
#[derive(Debug, Clone)]
pub struct EpsMbAgent<T> {
    config: EpsMbConfig<T>,
    net: EpsNet<T>,
    spec: MetricSpec,
    actions: u64,
    table_cells: u64,
    stats: Vec<BTreeMap<(u64, u64), TabularStats<T>>>,
    values: Vec<BTreeMap<u64, T>>,
    pending: Vec<Option<(u64, u64)>>,
}

impl<T: Real> EpsMbAgent<T> {
    pub fn new(spec: MetricSpec, net: EpsNet<T>, config: EpsMbConfig<T>) -> Result<Self> {
        config.validate()?;
        let (states, actions) = net.check_size(spec)?;
        let horizon = config.horizon;
        Ok(Self {
            config,
            net,
            spec,
            actions,
            table_cells: states * actions,
            stats: vec![BTreeMap::new(); horizon],
            values: vec![BTreeMap::new(); horizon],
            pending: vec![None; horizon],
        })
    }

    pub fn net(&self) -> &EpsNet<T> {
        &self.net
    }

    fn cap(&self, h: usize) -> T {
        T::from_count((self.config.horizon - h + 1) as u64)
    }

    pub fn stats(&self, h: usize, state: u64, action: u64) -> Option<&TabularStats<T>> {
        self.stats[h - 1].get(&(state, action))
    }

    pub fn q_value(&self, h: usize, state: u64, action: u64) -> T {
        self.stats(h, state, action)
            .map_or_else(|| self.cap(h), |s| s.q)
    }

    /// Optimistic state value; zero past the horizon.
    pub fn value(&self, h: usize, state: u64) -> T {
        if h > self.config.horizon {
            return T::zero();
        }
        self.values[h - 1]
            .get(&state)
            .copied()
            .unwrap_or_else(|| self.cap(h))
    }

    /// Backward value iteration over the visited pairs.
    pub fn sweep(&mut self) {
        for h in (1..=self.config.horizon).rev() {
            let cap = self.cap(h);
            let updated: Vec<((u64, u64), T)> = self.stats[h - 1]
                .iter()
                .map(|(&key, st)| {
                    let mean = st.reward_sum / T::from_count(st.n);
                    let future: T = st.transition().map(|(s, p)| p * self.value(h + 1, s)).sum();
                    let q = (mean + self.config.bonus(st.n) + future)
                        .max(T::zero())
                        .min(cap);
                    (key, q)
                })
                .collect();
            let table = &mut self.stats[h - 1];
            let mut per_state: BTreeMap<u64, (u64, T)> = BTreeMap::new();
            for (key, q) in updated {
                table.get_mut(&key).expect("visited pair").q = q;
                let e = per_state.entry(key.0).or_insert((0, T::neg_infinity()));
                e.0 += 1;
                e.1 = e.1.max(q);
            }
            // a state with an unvisited action keeps the optimistic cap
            self.values[h - 1] = per_state
                .into_iter()
                .filter(|(_, (seen, _))| *seen == self.actions)
                .map(|(s, (_, v))| (s, v))
                .collect();
        }
    }

    fn greedy(&self, h: usize, s: u64) -> u64 {
        let cap = self.cap(h);
        let mut best = (0u64, T::neg_infinity());
        for a in 0..self.actions {
            let q = self.q_value(h, s, a);
            if q > best.1 {
                best = (a, q);
            }
            if q >= cap {
                break;
            }
        }
        best.0
    }
}

impl<T: Real> Agent<T> for EpsMbAgent<T> {
    fn name(&self) -> &'static str {
        "eps_mb"
    }

    fn act(&mut self, h: usize, state: &Point<T>, _rng: &mut dyn RngCore) -> Result<Point<T>> {
        if h == 0 || h > self.config.horizon {
            return Err(step_error(h, self.config.horizon));
        }
        let s = self.net.flat_snap(state);
        let a = self.greedy(h, s);
        self.pending[h - 1] = Some((s, a));
        Ok(self
            .net
            .center_point(&self.net.unflatten(a, self.spec.action_dim)))
    }

    fn observe(
        &mut self,
        h: usize,
        _state: &Point<T>,
        _action: &Point<T>,
        outcome: &EnvOutcome<T>,
    ) -> Result<()> {
        if h == 0 || h > self.config.horizon {
            return Err(step_error(h, self.config.horizon));
        }
        let key = self.pending[h - 1].take().ok_or_else(|| no_pending(h))?;
        let next = self.net.flat_snap(&outcome.next_state);
        let cap = self.cap(h);
        let st = self.stats[h - 1]
            .entry(key)
            .or_insert_with(|| TabularStats {
                q: cap,
                ..TabularStats::default()
            });
        st.n += 1;
        st.reward_sum = st.reward_sum + clamp01(outcome.reward);
        *st.next.entry(next).or_insert(0) += 1;
        Ok(())
    }

    fn end_episode(&mut self) -> Result<()> {
        self.sweep();
        Ok(())
    }

    fn node_count(&self) -> usize {
        usize::try_from(self.table_cells.saturating_mul(self.config.horizon as u64))
            .unwrap_or(usize::MAX)
    }
}

/// Keeps every ambulance where it is.
#[derive(Debug, Clone, Default)]
pub struct StableAgent;

impl<T: Real> Agent<T> for StableAgent {
    fn name(&self) -> &'static str {
        "stable"
    }

    fn act(&mut self, _h: usize, state: &Point<T>, _rng: &mut dyn RngCore) -> Result<Point<T>> {
        Ok(state.clone())
    }

    fn observe(
        &mut self,
        _h: usize,
        _s: &Point<T>,
        _a: &Point<T>,
        _o: &EnvOutcome<T>,
    ) -> Result<()> {
        Ok(())
    }

    fn node_count(&self) -> usize {
        0
    }
}

/// Sorts `data`, cuts it into `k` contiguous blocks of (nearly) equal size and returns the
/// lower-middle element of each block. Empty blocks yield `0.5`.
pub fn block_medians<T: Real>(data: &[T], k: usize) -> Vec<T> {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("arrivals are finite"));
    let n = sorted.len();
    (0..k)
        .map(|j| {
            let (lo, hi) = (j * n / k, (j + 1) * n / k);
            if lo == hi {
                T::lit(0.5)
            } else {
                sorted[lo + (hi - lo - 1) / 2]
            }
        })
        .collect()
}

/// Positions the fleet at the block medians of past arrivals seen at the same step.
#[derive(Debug, Clone)]
pub struct MedianAgent<T> {
    fleet: usize,
    history: Vec<Vec<T>>,
}

impl<T: Real> MedianAgent<T> {
    pub fn new(fleet: usize, horizon: usize) -> Self {
        Self {
            fleet,
            history: vec![Vec::new(); horizon],
        }
    }

    pub fn history(&self, h: usize) -> &[T] {
        &self.history[h - 1]
    }
}

impl<T: Real> Agent<T> for MedianAgent<T> {
    fn name(&self) -> &'static str {
        "median"
    }

    fn act(&mut self, h: usize, _state: &Point<T>, _rng: &mut dyn RngCore) -> Result<Point<T>> {
        let hist = self
            .history
            .get(h.wrapping_sub(1))
            .ok_or_else(|| step_error(h, self.history.len()))?;
        Ok(Point::clamped(block_medians(hist, self.fleet)))
    }

    fn observe(
        &mut self,
        h: usize,
        _s: &Point<T>,
        _a: &Point<T>,
        outcome: &EnvOutcome<T>,
    ) -> Result<()> {
        let horizon = self.history.len();
        let hist = self
            .history
            .get_mut(h.wrapping_sub(1))
            .ok_or_else(|| step_error(h, horizon))?;
        if let Some(p) = outcome.arrival {
            hist.push(p);
        }
        Ok(())
    }

    fn node_count(&self) -> usize {
        0
    }
}

/// Plays uniformly random actions.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    action_dim: usize,
}

impl RandomAgent {
    pub fn new(action_dim: usize) -> Self {
        Self { action_dim }
    }
}

impl<T: Real> Agent<T> for RandomAgent {
    fn name(&self) -> &'static str {
        "random"
    }

    fn act(&mut self, _h: usize, _state: &Point<T>, rng: &mut dyn RngCore) -> Result<Point<T>> {
        Ok(Point::clamped(
            (0..self.action_dim)
                .map(|_| T::lit(rng.random::<f64>()))
                .collect(),
        ))
    }

    fn observe(
        &mut self,
        _h: usize,
        _s: &Point<T>,
        _a: &Point<T>,
        _o: &EnvOutcome<T>,
    ) -> Result<()> {
        Ok(())
    }

    fn node_count(&self) -> usize {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> Point<f64> {
        Point::from_f64(v).unwrap()
    }

    fn outcome(reward: f64, next: &[f64], arrival: Option<f64>) -> EnvOutcome<f64> {
        EnvOutcome {
            reward,
            next_state: pt(next),
            arrival,
        }
    }

    #[test]
    fn snap_examples() {
        let net = EpsNet::new(0.25).unwrap();
        assert_eq!(net.snap_axis(0.3), 1);
        assert_eq!(net.center(1), 0.375);
        assert_eq!(net.snap_axis(0.125), 0);
        assert_eq!(net.snap_axis(0.25), 0);
        assert_eq!(net.snap_axis(0.0), 0);
        assert_eq!(net.snap_axis(1.0), 3);
        let coarse = EpsNet::new(1.0).unwrap();
        for p in [0.0, 0.3, 0.5, 1.0] {
            assert_eq!(coarse.snap_axis(p), 0);
        }
        assert_eq!(coarse.center(0), 0.5);
        assert!(EpsNet::new(0.0).is_err());
        assert!(EpsNet::new(1.5).is_err());
    }

    #[test]
    fn every_point_is_covered() {
        for eps in [0.3, 0.25, 0.1, 0.07] {
            let net = EpsNet::new(eps).unwrap();
            assert!(net.pitch() <= eps + 1e-15);
            for i in 0..=1000 {
                let p = i as f64 / 1000.0;
                let c = net.center(net.snap_axis(p));
                assert!((p - c).abs() <= net.pitch() / 2.0 + 1e-12);
                // no other center is strictly closer
                for j in 0..net.per_axis() {
                    assert!((p - net.center(j)).abs() >= (p - c).abs() - 1e-12);
                }
            }
        }
    }

    #[test]
    fn flat_indices_round_trip() {
        let net = EpsNet::<f64>::new(0.2).unwrap();
        for flat in 0..net.cells(3) {
            assert_eq!(net.flatten(&net.unflatten(flat, 3)), flat);
        }
        assert_eq!(net.flatten(&[1, 2]), 7);
    }

    #[test]
    fn eps_ql_first_update() {
        let spec = MetricSpec::new(1, 1).unwrap();
        let mut cfg = AdaQlConfig::<f64>::new(1, 10);
        cfg.bonus_scale = 0.0;
        cfg.lipschitz = 1.0;
        let mut agent = EpsQlAgent::new(spec, EpsNet::new(0.25).unwrap(), cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = agent.act(1, &pt(&[0.3]), &mut rng).unwrap();
        assert_eq!(a.coords(), &[0.125]);
        agent
            .observe(1, &pt(&[0.3]), &a, &outcome(0.4, &[0.2], None))
            .unwrap();
        assert!((agent.q_value(1, &[1], &[0]) - (0.4 + 0.25)).abs() < 1e-15);
        assert_eq!(Agent::<f64>::node_count(&agent), 16);
    }

    #[test]
    fn ucbvi_transitions_are_normalised() {
        let spec = MetricSpec::new(1, 1).unwrap();
        let mut agent = EpsMbAgent::new(
            spec,
            EpsNet::new(0.25).unwrap(),
            EpsMbConfig::<f64>::new(2, 50),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..50 {
            let mut x = pt(&[0.5]);
            for h in 1..=2 {
                let a = agent.act(h, &x, &mut rng).unwrap();
                let next = [((k * 3 + h) % 5) as f64 / 4.0];
                agent
                    .observe(h, &x, &a, &outcome(0.5, &next, None))
                    .unwrap();
                x = pt(&next);
            }
            agent.end_episode().unwrap();
        }
        for h in 1..=2 {
            for st in agent.stats[h - 1].values() {
                let total: f64 = st.transition().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(st.q <= (3 - h) as f64 && st.q >= 0.0);
            }
        }
    }

    #[test]
    fn ucbvi_sweep_without_bonus_is_value_iteration() {
        // two steps, one state cell, two actions with fixed rewards
        let spec = MetricSpec::new(1, 1).unwrap();
        let mut cfg = EpsMbConfig::<f64>::new(2, 10);
        cfg.bonus_scale = 0.0;
        let mut agent = EpsMbAgent::new(spec, EpsNet::new(0.5).unwrap(), cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rewards = |a: &Point<f64>| if a.coords()[0] < 0.5 { 0.2 } else { 0.9 };
        for _ in 0..4 {
            let x = pt(&[0.25]);
            let a1 = agent.act(1, &x, &mut rng).unwrap();
            agent
                .observe(1, &x, &a1, &outcome(rewards(&a1), &[0.25], None))
                .unwrap();
            let a2 = agent.act(2, &x, &mut rng).unwrap();
            agent
                .observe(2, &x, &a2, &outcome(rewards(&a2), &[0.25], None))
                .unwrap();
            agent.end_episode().unwrap();
        }
        assert!((agent.value(2, 0) - 0.9).abs() < 1e-12);
        assert!((agent.value(1, 0) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn stable_returns_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut agent = StableAgent;
        assert_eq!(agent.act(1, &pt(&[0.3]), &mut rng).unwrap(), pt(&[0.3]));
        assert_eq!(
            agent.act(2, &pt(&[0.1, 0.9]), &mut rng).unwrap(),
            pt(&[0.1, 0.9])
        );
    }

    #[test]
    fn median_examples() {
        assert_eq!(block_medians(&[0.9, 0.1, 0.5], 1), vec![0.5]);
        assert_eq!(block_medians(&[0.8, 0.2], 1), vec![0.2]);
        assert_eq!(block_medians(&[0.9, 0.2, 0.8, 0.1], 2), vec![0.1, 0.8]);
        assert_eq!(block_medians::<f64>(&[], 2), vec![0.5, 0.5]);

        let mut agent = MedianAgent::<f64>::new(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(agent.act(1, &pt(&[0.5]), &mut rng).unwrap(), pt(&[0.5]));
        for p in [0.1, 0.5, 0.9] {
            agent
                .observe(1, &pt(&[0.5]), &pt(&[0.5]), &outcome(1.0, &[p], Some(p)))
                .unwrap();
        }
        assert_eq!(agent.act(1, &pt(&[0.0]), &mut rng).unwrap(), pt(&[0.5]));
        assert!(agent.history(2).is_empty());
    }

    #[test]
    fn random_actions_in_unit_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut agent = RandomAgent::new(3);
        for _ in 0..200 {
            let a: Point<f64> = agent.act(1, &pt(&[0.5]), &mut rng).unwrap();
            assert_eq!(a.dim(), 3);
            assert!(a.coords().iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }
}
