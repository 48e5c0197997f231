//! Episodic environments over `[0,1]^d × [0,1]^d`: oil discovery and ambulance routing.
//!
//! Environments are stateless; all randomness comes from the generator passed to
//! [`Environment::step`], so trajectories replay exactly for a fixed seed.

use rand::{Rng, RngCore};
use rand_distr::{Beta as BetaDist, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta as BetaCdf, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::{MetricSpec, Point};
use crate::scalar::Real;

/// Reward and next state of one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvOutcome<T> {
    pub reward: T,
    pub next_state: Point<T>,
    /// Location of the realised request, for environments that have one.
    pub arrival: Option<T>,
}

/// One atom of an exactly enumerated transition: probability, expected reward, next state.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOutcome<T> {
    pub weight: T,
    pub reward: T,
    pub next_state: Point<T>,
}

pub trait Environment<T: Real>: Send + Sync {
    /// Short identifier used in metrics files.
    fn id(&self) -> String;

    fn spec(&self) -> MetricSpec;

    fn horizon(&self) -> usize;

    fn reset(&self, rng: &mut dyn RngCore) -> Point<T>;

    fn step(&self, h: usize, x: &Point<T>, a: &Point<T>, rng: &mut dyn RngCore) -> EnvOutcome<T>;

    /// The transition as a finite mixture when it can be written down exactly,
    /// with continuous randomness discretised onto `resolution` cells where needed.
    /// `None` means the caller has to sample.
    fn enumerate(
        &self,
        _h: usize,
        _x: &Point<T>,
        _a: &Point<T>,
        _resolution: usize,
    ) -> Option<Vec<WeightedOutcome<T>>> {
        None
    }
}

/// `ℓ_p` norm of `x - y`; `p = ∞` gives the sup norm.
fn p_norm_diff<T: Real>(x: &[T], y: &[T], p: f64) -> T {
    if p.is_infinite() {
        return crate::geometry::sup_distance(x, y);
    }
    let p_t = T::lit(p);
    let s: T = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (a - b).abs().powf(p_t))
        .sum();
    s.powf(T::one() / p_t)
}

fn clamp01<T: Real>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Survey {
    /// `exp(-2‖x - h/9‖₂)`
    Laplace,
    /// `1 - ‖x - h/9‖₂`
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionNoise {
    /// The next state is exactly the action.
    Zero,
    /// Gaussian perturbation with standard deviation `½‖x + a‖₂`.
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OilConfig {
    pub dim: usize,
    pub horizon: usize,
    pub survey: Survey,
    /// Weight of the movement cost `α‖x - a‖`.
    pub alpha: f64,
    pub reward_noise_sd: f64,
    pub transition: TransitionNoise,
    /// Norm used for the movement cost.
    pub cost_norm: f64,
}

impl OilConfig {
    pub fn new(dim: usize, horizon: usize, survey: Survey) -> Self {
        Self {
            dim,
            horizon,
            survey,
            alpha: 0.0,
            reward_noise_sd: 0.1,
            transition: TransitionNoise::Zero,
            cost_norm: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OilEnv {
    cfg: OilConfig,
}

impl OilEnv {
    pub fn new(cfg: OilConfig) -> Result<Self> {
        if cfg.dim == 0 || cfg.horizon == 0 {
            return Err(Error::InvalidParameter(
                "oil dimension and horizon must be positive".into(),
            ));
        }
        if !(cfg.alpha >= 0.0) || !(cfg.reward_noise_sd >= 0.0) || !(cfg.cost_norm >= 1.0) {
            return Err(Error::InvalidParameter(
                "oil needs alpha >= 0, reward noise >= 0 and a cost norm >= 1".into(),
            ));
        }
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &OilConfig {
        &self.cfg
    }

    /// The survey value at state `x` in step `h`.
    pub fn survey<T: Real>(&self, h: usize, x: &[T]) -> T {
        let peak = T::from_count(h as u64) / T::lit(9.0);
        let dist: T = x.iter().map(|&c| (c - peak) * (c - peak)).sum::<T>().sqrt();
        match self.cfg.survey {
            Survey::Laplace => (T::lit(-2.0) * dist).exp(),
            Survey::Quadratic => T::one() - dist,
        }
    }

    /// Noise-free reward before truncation: `f_h(x) - α‖x - a‖`.
    pub fn mean_reward<T: Real>(&self, h: usize, x: &[T], a: &[T]) -> T {
        self.survey(h, x) - T::lit(self.cfg.alpha) * p_norm_diff(x, a, self.cfg.cost_norm)
    }

    fn sigma<T: Real>(&self, x: &[T], a: &[T]) -> T {
        match self.cfg.transition {
            TransitionNoise::Zero => T::zero(),
            TransitionNoise::Coupled => {
                let s: T = x.iter().zip(a).map(|(&p, &q)| (p + q) * (p + q)).sum();
                T::lit(0.5) * s.sqrt()
            }
        }
    }
}

/// `E[clamp(μ + ε, 0, 1)]` for `ε ~ N(0, sd²)`.
pub fn expected_truncated_normal(mu: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mu.clamp(0.0, 1.0);
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    let lo = -mu / sd;
    let hi = (1.0 - mu) / sd;
    mu * (n.cdf(hi) - n.cdf(lo)) + sd * (n.pdf(lo) - n.pdf(hi)) + (1.0 - n.cdf(hi))
}

impl<T: Real> Environment<T> for OilEnv {
    fn id(&self) -> String {
        let survey = match self.cfg.survey {
            Survey::Laplace => "laplace",
            Survey::Quadratic => "quadratic",
        };
        let noise = match self.cfg.transition {
            TransitionNoise::Zero => "",
            TransitionNoise::Coupled => "-coupled",
        };
        format!("oil-{survey}-d{}-a{}{noise}", self.cfg.dim, self.cfg.alpha)
    }

    fn spec(&self) -> MetricSpec {
        MetricSpec {
            state_dim: self.cfg.dim,
            action_dim: self.cfg.dim,
        }
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    fn reset(&self, _rng: &mut dyn RngCore) -> Point<T> {
        Point::splat(T::lit(0.5), self.cfg.dim)
    }

    fn step(&self, h: usize, x: &Point<T>, a: &Point<T>, rng: &mut dyn RngCore) -> EnvOutcome<T> {
        let z: f64 = StandardNormal.sample(rng);
        let eps = T::lit(self.cfg.reward_noise_sd * z);
        let reward = clamp01(self.mean_reward(h, x.coords(), a.coords()) + eps);
        let sigma = self.sigma(x.coords(), a.coords());
        let next = a
            .coords()
            .iter()
            .map(|&ai| {
                let z: f64 = StandardNormal.sample(rng);
                ai + sigma * T::lit(z)
            })
            .collect();
        EnvOutcome {
            reward,
            next_state: Point::clamped(next),
            arrival: None,
        }
    }

    fn enumerate(
        &self,
        h: usize,
        x: &Point<T>,
        a: &Point<T>,
        _resolution: usize,
    ) -> Option<Vec<WeightedOutcome<T>>> {
        if self.cfg.transition != TransitionNoise::Zero {
            return None;
        }
        let mu = self.mean_reward(h, x.coords(), a.coords()).as_f64();
        Some(vec![WeightedOutcome {
            weight: T::one(),
            reward: T::lit(expected_truncated_normal(mu, self.cfg.reward_noise_sd)),
            next_state: a.clone(),
        }])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Arrival {
    Beta {
        a: f64,
        b: f64,
    },
    /// Uniform on `[(h-1)/H - w, (h-1)/H + w] ∩ [0,1]`.
    Shifting {
        half_width: f64,
    },
}

impl Arrival {
    pub fn beta52() -> Self {
        Arrival::Beta { a: 5.0, b: 2.0 }
    }

    pub fn shifting() -> Self {
        Arrival::Shifting { half_width: 0.25 }
    }

    fn window(h: usize, horizon: usize, half_width: f64) -> (f64, f64) {
        let center = (h - 1) as f64 / horizon as f64;
        (
            (center - half_width).max(0.0),
            (center + half_width).min(1.0),
        )
    }

    pub fn cdf(&self, h: usize, horizon: usize, p: f64) -> f64 {
        match *self {
            Arrival::Beta { a, b } => BetaCdf::new(a, b)
                .expect("valid beta")
                .cdf(p.clamp(0.0, 1.0)),
            Arrival::Shifting { half_width } => {
                let (lo, hi) = Self::window(h, horizon, half_width);
                if hi <= lo {
                    return if p >= lo { 1.0 } else { 0.0 };
                }
                ((p - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }
}

/// One draw from the shifting-window arrival distribution at step `h`.
pub fn shifting_uniform_sample(
    h: usize,
    horizon: usize,
    half_width: f64,
    rng: &mut dyn RngCore,
) -> f64 {
    let (lo, hi) = Arrival::window(h, horizon, half_width);
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbulanceConfig {
    /// Fleet size; also the state and action dimension.
    pub fleet: usize,
    pub horizon: usize,
    pub alpha: f64,
    pub arrival: Arrival,
    pub norm: f64,
}

impl AmbulanceConfig {
    pub fn new(fleet: usize, horizon: usize, alpha: f64, arrival: Arrival) -> Self {
        Self {
            fleet,
            horizon,
            alpha,
            arrival,
            norm: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AmbulanceEnv {
    cfg: AmbulanceConfig,
    beta: Option<BetaDist<f64>>,
}

impl AmbulanceEnv {
    pub fn new(cfg: AmbulanceConfig) -> Result<Self> {
        if cfg.fleet == 0 || cfg.horizon == 0 {
            return Err(Error::InvalidParameter(
                "fleet size and horizon must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&cfg.alpha) || !(cfg.norm >= 1.0) {
            return Err(Error::InvalidParameter(
                "ambulance needs alpha in [0,1] and norm >= 1".into(),
            ));
        }
        let beta = match cfg.arrival {
            Arrival::Beta { a, b } => Some(
                BetaDist::new(a, b)
                    .map_err(|e| Error::InvalidParameter(format!("beta arrival: {e}")))?,
            ),
            Arrival::Shifting { half_width } if !(half_width > 0.0) => {
                return Err(Error::InvalidParameter(
                    "shifting window must be positive".into(),
                ))
            }
            Arrival::Shifting { .. } => None,
        };
        Ok(Self { cfg, beta })
    }

    pub fn config(&self) -> &AmbulanceConfig {
        &self.cfg
    }

    pub fn sample_arrival(&self, h: usize, rng: &mut dyn RngCore) -> f64 {
        match (self.cfg.arrival, &self.beta) {
            (Arrival::Beta { .. }, Some(beta)) => beta.sample(rng),
            (Arrival::Shifting { half_width }, _) => {
                shifting_uniform_sample(h, self.cfg.horizon, half_width, rng)
            }
            _ => unreachable!("beta sampler built with the environment"),
        }
    }

    /// Reward and next state once the request location `p` is known.
    pub fn serve<T: Real>(&self, x: &[T], a: &[T], p: T) -> (T, Point<T>) {
        let (nearest, gap) = a
            .iter()
            .enumerate()
            .map(|(i, &ai)| (i, (ai - p).abs()))
            .fold(
                (0, T::infinity()),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        let k = T::from_count(self.cfg.fleet as u64);
        let alpha = T::lit(self.cfg.alpha);
        let travel =
            alpha / k.powf(T::one() / T::lit(self.cfg.norm)) * p_norm_diff(x, a, self.cfg.norm);
        let reward = clamp01(T::one() - (travel + (T::one() - alpha) * gap));
        let mut next = a.to_vec();
        next[nearest] = p;
        (reward, Point::clamped(next))
    }
}

impl<T: Real> Environment<T> for AmbulanceEnv {
    fn id(&self) -> String {
        let arrival = match self.cfg.arrival {
            Arrival::Beta { .. } => "beta",
            Arrival::Shifting { .. } => "shifting",
        };
        format!(
            "ambulance-{arrival}-k{}-a{}",
            self.cfg.fleet, self.cfg.alpha
        )
    }

    fn spec(&self) -> MetricSpec {
        MetricSpec {
            state_dim: self.cfg.fleet,
            action_dim: self.cfg.fleet,
        }
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    fn reset(&self, _rng: &mut dyn RngCore) -> Point<T> {
        Point::splat(T::lit(0.5), self.cfg.fleet)
    }

    fn step(&self, h: usize, x: &Point<T>, a: &Point<T>, rng: &mut dyn RngCore) -> EnvOutcome<T> {
        let p = T::lit(self.sample_arrival(h, rng));
        let (reward, next_state) = self.serve(x.coords(), a.coords(), p);
        EnvOutcome {
            reward,
            next_state,
            arrival: Some(p),
        }
    }

    /// Arrivals discretised onto `resolution` equal cells, each represented by its
    /// midpoint and weighted by the probability mass of the cell.
    fn enumerate(
        &self,
        h: usize,
        x: &Point<T>,
        a: &Point<T>,
        resolution: usize,
    ) -> Option<Vec<WeightedOutcome<T>>> {
        let m = resolution.max(1);
        let mut prev = self.cfg.arrival.cdf(h, self.cfg.horizon, 0.0);
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            let cdf = self
                .cfg
                .arrival
                .cdf(h, self.cfg.horizon, (j + 1) as f64 / m as f64);
            let w = cdf - prev;
            prev = cdf;
            if w <= 0.0 {
                continue;
            }
            let p = T::lit((j as f64 + 0.5) / m as f64);
            let (reward, next_state) = self.serve(x.coords(), a.coords(), p);
            out.push(WeightedOutcome {
                weight: T::lit(w),
                reward,
                next_state,
            });
        }
        Some(out)
    }
}
