//! Ground truth for evaluation: grid dynamic programming, regret curves, and
//! the small analysis utilities (clip, 1-D Wasserstein distance, near-optimal packings).

use std::io::{self, Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::EpsNet;
use crate::envs::{Environment, WeightedOutcome};
use crate::error::{Error, Result};
use crate::geometry::{sup_distance, Point};

/// One row per step.
pub type Tables = Vec<Vec<f64>>;

/// Optimal values on a uniform grid of `m` centers per axis.
///
/// `q[h-1]` is indexed by `state * A + action` with flat row-major cell indices,
/// `v[h-1]` by state.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDp {
    pub horizon: usize,
    pub resolution: u32,
    pub state_dim: usize,
    pub action_dim: usize,
    pub v: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    mc_samples: usize,
    seed: u64,
}

/// Settings for [`GridDp::solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpOptions {
    pub resolution: u32,
    /// Samples per state-action pair when the environment cannot enumerate its transition.
    pub mc_samples: usize,
    pub seed: u64,
}

impl DpOptions {
    pub fn new(resolution: u32) -> Self {
        Self {
            resolution,
            mc_samples: 64,
            seed: 0,
        }
    }
}

impl GridDp {
    /// Backward induction from `V*_{H+1} = 0`. Next states are snapped to the nearest
    /// grid center. Monte-Carlo draws use a dedicated stream per (step, state, action),
    /// so the result is independent of the thread count.
    pub fn solve(env: &dyn Environment<f64>, opts: DpOptions) -> Result<Self> {
        if opts.resolution < 2 {
            return Err(Error::InvalidParameter(
                "grid resolution must be at least 2".into(),
            ));
        }
        let spec = env.spec();
        let net = grid_net(opts.resolution);
        let states = checked_cells(&net, spec.state_dim)?;
        let actions = checked_cells(&net, spec.action_dim)?;
        let horizon = env.horizon();
        let mut dp = Self {
            horizon,
            resolution: opts.resolution,
            state_dim: spec.state_dim,
            action_dim: spec.action_dim,
            v: vec![Vec::new(); horizon],
            q: vec![Vec::new(); horizon],
            mc_samples: opts.mc_samples.max(1),
            seed: opts.seed,
        };
        let action_points: Vec<Point<f64>> = (0..actions as u64)
            .map(|a| net.center_point(&net.unflatten(a, spec.action_dim)))
            .collect();
        for h in (1..=horizon).rev() {
            let rows: Vec<Vec<f64>> = (0..states as u64)
                .into_par_iter()
                .map(|s| {
                    let x = net.center_point(&net.unflatten(s, spec.state_dim));
                    action_points
                        .iter()
                        .enumerate()
                        .map(|(a, ap)| dp.backup(env, h, &x, ap, (s * actions as u64) + a as u64))
                        .collect()
                })
                .collect();
            dp.v[h - 1] = rows
                .iter()
                .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            dp.q[h - 1] = rows.into_iter().flatten().collect();
        }
        Ok(dp)
    }

    fn net(&self) -> EpsNet<f64> {
        grid_net(self.resolution)
    }

    fn outcomes(
        &self,
        env: &dyn Environment<f64>,
        h: usize,
        x: &Point<f64>,
        a: &Point<f64>,
        stream: u64,
    ) -> Vec<WeightedOutcome<f64>> {
        if let Some(atoms) = env.enumerate(h, x, a, self.resolution as usize) {
            return atoms;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((h as u64) << 48) ^ stream);
        let w = 1.0 / self.mc_samples as f64;
        (0..self.mc_samples)
            .map(|_| {
                let out = env.step(h, x, a, &mut rng);
                WeightedOutcome {
                    weight: w,
                    reward: out.reward,
                    next_state: out.next_state,
                }
            })
            .collect()
    }

    fn backup(
        &self,
        env: &dyn Environment<f64>,
        h: usize,
        x: &Point<f64>,
        a: &Point<f64>,
        stream: u64,
    ) -> f64 {
        self.outcomes(env, h, x, a, stream)
            .iter()
            .map(|o| o.weight * (o.reward + self.value_snapped(h + 1, &o.next_state)))
            .sum()
    }

    /// `V*_h` at the grid center nearest to `x`; zero past the horizon.
    pub fn value_snapped(&self, h: usize, x: &Point<f64>) -> f64 {
        if h > self.horizon {
            return 0.0;
        }
        let net = self.net();
        self.v[h - 1][net.flatten(&net.snap(x)) as usize]
    }

    /// One-step lookahead from the exact state `x` over the grid actions.
    pub fn value_at(&self, env: &dyn Environment<f64>, h: usize, x: &Point<f64>) -> f64 {
        let net = self.net();
        (0..net.cells(self.action_dim))
            .map(|a| {
                let ap = net.center_point(&net.unflatten(a, self.action_dim));
                self.backup(env, h, x, &ap, u64::MAX - a)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn states(&self) -> usize {
        self.v[0].len()
    }

    pub fn actions(&self) -> usize {
        self.q[0].len() / self.v[0].len()
    }

    pub fn q_at(&self, h: usize, state: usize, action: usize) -> f64 {
        self.q[h - 1][state * self.actions() + action]
    }

    pub fn gaps(&self) -> GapField {
        let actions = self.actions();
        let gaps = self
            .q
            .iter()
            .zip(&self.v)
            .map(|(q, v)| {
                q.iter()
                    .enumerate()
                    .map(|(i, &qv)| v[i / actions] - qv)
                    .collect()
            })
            .collect();
        GapField {
            horizon: self.horizon,
            resolution: self.resolution,
            state_dim: self.state_dim,
            action_dim: self.action_dim,
            gaps,
        }
    }

    /// Little-endian dump: `u32` header `{H, m, d_S, d_A}`, then every `V*_h`, then every `Q*_h`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        for x in [
            self.horizon as u32,
            self.resolution,
            self.state_dim as u32,
            self.action_dim as u32,
        ] {
            w.write_all(&x.to_le_bytes())?;
        }
        for x in self.v.iter().chain(&self.q).flatten() {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()
    }

    /// Reads back the tables written by [`Self::write_binary`]: per-step V and Q rows, then
    /// the header `[H, m, d_S, d_A]`.
    pub fn read_tables<R: Read>(mut r: R) -> io::Result<(Tables, Tables, [u32; 4])> {
        let mut header = [0u32; 4];
        let mut buf4 = [0u8; 4];
        for slot in &mut header {
            r.read_exact(&mut buf4)?;
            *slot = u32::from_le_bytes(buf4);
        }
        let [h, m, ds, da] = header;
        let states = (m as usize).pow(ds);
        let actions = (m as usize).pow(da);
        let mut read_block = |len: usize| -> io::Result<Vec<f64>> {
            let mut buf8 = [0u8; 8];
            (0..len)
                .map(|_| {
                    r.read_exact(&mut buf8)?;
                    Ok(f64::from_le_bytes(buf8))
                })
                .collect()
        };
        let v = (0..h)
            .map(|_| read_block(states))
            .collect::<io::Result<_>>()?;
        let q = (0..h)
            .map(|_| read_block(states * actions))
            .collect::<io::Result<_>>()?;
        Ok((v, q, header))
    }
}

/// Grid with exactly `m` cells per axis.
fn grid_net(m: u32) -> EpsNet<f64> {
    EpsNet::with_cells(m).expect("m >= 1")
}

fn checked_cells(net: &EpsNet<f64>, dim: usize) -> Result<usize> {
    usize::try_from(net.cells(dim))
        .ok()
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::InvalidParameter("DP grid too large".into()))
}

/// `V*_h(x) - Q*_h(x, a)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GapField {
    pub horizon: usize,
    pub resolution: u32,
    pub state_dim: usize,
    pub action_dim: usize,
    pub gaps: Vec<Vec<f64>>,
}

impl GapField {
    fn point(&self, flat: usize) -> Vec<f64> {
        let net = grid_net(self.resolution);
        let actions = net.cells(self.action_dim) as usize;
        let s = net.unflatten((flat / actions) as u64, self.state_dim);
        let a = net.unflatten((flat % actions) as u64, self.action_dim);
        s.iter().chain(&a).map(|&i| net.center(i)).collect()
    }

    pub fn gap(&self, h: usize, state: usize, action: usize) -> f64 {
        let actions = grid_net(self.resolution).cells(self.action_dim) as usize;
        self.gaps[h - 1][state * actions + action]
    }
}

/// Size of a greedy `r`-packing (pairwise sup-distance at least `r`) of the grid
/// pairs at step `h` whose gap is at most `C (H+1) r`.
pub fn near_optimal_packing(gaps: &GapField, h: usize, r: f64, c: f64) -> usize {
    let threshold = c * (gaps.horizon as f64 + 1.0) * r;
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for (flat, &g) in gaps.gaps[h - 1].iter().enumerate() {
        if g > threshold {
            continue;
        }
        let p = gaps.point(flat);
        if kept.iter().all(|k| sup_distance(k, &p) >= r) {
            kept.push(p);
        }
    }
    kept.len()
}

/// `μ · 1{μ ≥ ν}`.
pub fn clip(mu: f64, nu: f64) -> f64 {
    if mu >= nu {
        mu
    } else {
        0.0
    }
}

/// 1-Wasserstein distance between two finitely supported distributions on the line,
/// given as `(location, weight)` atoms, computed as `∫ |F_p - F_q|`.
pub fn wasserstein1_1d(p: &[(f64, f64)], q: &[(f64, f64)]) -> f64 {
    let mut events: Vec<(f64, f64)> = p
        .iter()
        .map(|&(x, w)| (x, w))
        .chain(q.iter().map(|&(x, w)| (x, -w)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for pair in events.windows(2) {
        diff += pair[0].1;
        total += diff.abs() * (pair[1].0 - pair[0].0);
    }
    total
}

/// Per-episode and cumulative regret of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub per_episode: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RegretCurve {
    /// `optimal[k]` is `V*_1` at the start of episode `k`, `returns[k]` the realised return.
    pub fn new(optimal: &[f64], returns: &[f64]) -> Self {
        let per_episode: Vec<f64> = optimal.iter().zip(returns).map(|(v, r)| v - r).collect();
        let cumulative = per_episode
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect();
        Self {
            per_episode,
            cumulative,
        }
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Least-squares slope of `log R(k)` against `log k` for episodes `lo..=hi` (1-based),
    /// skipping points where the cumulative regret is not positive.
    pub fn loglog_slope(&self, lo: usize, hi: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (lo.max(1)..=hi.min(self.cumulative.len()))
            .filter(|&k| self.cumulative[k - 1] > 0.0)
            .map(|k| ((k as f64).ln(), self.cumulative[k - 1].ln()))
            .collect();
        fit_slope(&pts)
    }
}

/// Ordinary least-squares slope through `(x, y)` pairs.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{AmbulanceConfig, AmbulanceEnv, Arrival, OilConfig, OilEnv, Survey};

    fn quiet_oil(survey: Survey, horizon: usize) -> OilEnv {
        let mut cfg = OilConfig::new(1, horizon, survey);
        cfg.reward_noise_sd = 0.0;
        OilEnv::new(cfg).unwrap()
    }

    #[test]
    fn oil_closed_form() {
        let env = quiet_oil(Survey::Laplace, 3);
        let m = 32;
        let dp = GridDp::solve(&env, DpOptions::new(m)).unwrap();
        let centers: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let best = |h: usize| {
            centers
                .iter()
                .map(|&x| env.survey(h, &[x]))
                .fold(f64::MIN, f64::max)
        };
        for h in 1..=3 {
            let tail: f64 = (h + 1..=3).map(best).sum();
            for (s, &x) in centers.iter().enumerate() {
                assert!((dp.v[h - 1][s] - (env.survey(h, &[x]) + tail)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_step_is_mean_reward() {
        let mut cfg = OilConfig::new(1, 1, Survey::Quadratic);
        cfg.reward_noise_sd = 0.0;
        cfg.transition = crate::envs::TransitionNoise::Coupled;
        let env = OilEnv::new(cfg).unwrap();
        let dp = GridDp::solve(&env, DpOptions::new(8)).unwrap();
        for s in 0..8 {
            let x = (s as f64 + 0.5) / 8.0;
            for a in 0..8 {
                assert!((dp.q_at(1, s, a) - (1.0 - (x - 1.0 / 9.0).abs())).abs() < 1e-12);
            }
        }
        assert_eq!(dp.value_snapped(2, &Point::from_f64(&[0.3]).unwrap()), 0.0);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let mut cfg = OilConfig::new(1, 2, Survey::Laplace);
        cfg.transition = crate::envs::TransitionNoise::Coupled;
        let env = OilEnv::new(cfg).unwrap();
        let opts = DpOptions {
            resolution: 8,
            mc_samples: 16,
            seed: 7,
        };
        let a = GridDp::solve(&env, opts).unwrap();
        let b = GridDp::solve(&env, opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ambulance_gap_is_distance() {
        let env = AmbulanceEnv::new(AmbulanceConfig::new(1, 3, 1.0, Arrival::beta52())).unwrap();
        let dp = GridDp::solve(&env, DpOptions::new(16)).unwrap();
        let gaps = dp.gaps();
        for h in 1..=3 {
            for s in 0..16 {
                assert!((dp.v[h - 1][s] - (4 - h) as f64).abs() < 1e-9);
                let mut min_gap = f64::MAX;
                for a in 0..16 {
                    let g = gaps.gap(h, s, a);
                    assert!(g >= -1e-12);
                    assert!((g - (s as f64 - a as f64).abs() / 16.0).abs() < 1e-9);
                    min_gap = min_gap.min(g);
                }
                assert!(min_gap.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let env = quiet_oil(Survey::Quadratic, 2);
        let dp = GridDp::solve(&env, DpOptions::new(4)).unwrap();
        let mut buf = Vec::new();
        dp.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * (2 * 4 + 2 * 16));
        let (v, q, header) = GridDp::read_tables(&buf[..]).unwrap();
        assert_eq!(header, [2, 4, 1, 1]);
        assert_eq!(v, dp.v);
        assert_eq!(q, dp.q);
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip(0.5, 0.2), 0.5);
        assert_eq!(clip(0.1, 0.2), 0.0);
        assert_eq!(clip(0.2, 0.2), 0.2);
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein1_1d(&[(0.0, 1.0)], &[(1.0, 1.0)]), 1.0);
        assert_eq!(
            wasserstein1_1d(&[(0.0, 0.5), (1.0, 0.5)], &[(0.5, 1.0)]),
            0.5
        );
        let p = [(0.1, 0.3), (0.7, 0.7)];
        assert_eq!(wasserstein1_1d(&p, &p), 0.0);
    }

    #[test]
    fn packing_of_whole_space() {
        let gaps = GapField {
            horizon: 1,
            resolution: 16,
            state_dim: 1,
            action_dim: 1,
            gaps: vec![vec![0.0; 256]],
        };
        assert_eq!(near_optimal_packing(&gaps, 1, 1.0, 1.0), 1);
        assert_eq!(near_optimal_packing(&gaps, 1, 0.25, 1.0), 16);
        assert_eq!(near_optimal_packing(&gaps, 1, 1.0 / 16.0, 1.0), 256);
    }

    #[test]
    fn regret_curve_and_slope() {
        let optimal = vec![1.0; 100];
        let returns = vec![0.5; 100];
        let curve = RegretCurve::new(&optimal, &returns);
        assert_eq!(curve.total(), 50.0);
        assert!((curve.loglog_slope(10, 100).unwrap() - 1.0).abs() < 1e-12);
        let sqrt_like: Vec<f64> = (1..=100)
            .map(|k: i32| f64::from(k).sqrt() - f64::from(k - 1).sqrt())
            .collect();
        let curve = RegretCurve::new(
            &vec![0.0; 100],
            &sqrt_like.iter().map(|r| -r).collect::<Vec<_>>(),
        );
        assert!((curve.loglog_slope(10, 100).unwrap() - 0.5).abs() < 1e-9);
    }
}
