//! Adaptive discretization for reinforcement learning in metric spaces.
//!
//! Two learners refine a dyadic partition of the joint state-action space as
//! data arrives: [`AdaQlAgent`] (model-free, one-step Q updates) and
//! [`AdaMbAgent`] (model-based, a value-iteration sweep per episode). The crate
//! also holds the fixed-grid baselines, the benchmark environments and a grid
//! dynamic-programming oracle.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the scalar to `f64`.

// parameter checks are written as `!(x >= 0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adamb;
pub mod adaql;
pub mod agent;
pub mod baselines;
pub mod envs;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod partition;
pub mod scalar;

pub use adamb::{AdaMbAgent, AdaMbConfig};
pub use adaql::{AdaQlAgent, AdaQlConfig};
pub use agent::{play_episode, Agent, EpisodeReport};
pub use baselines::{
    EpsMbAgent, EpsMbConfig, EpsNet, EpsQlAgent, MedianAgent, RandomAgent, StableAgent,
};
pub use envs::{
    AmbulanceConfig, AmbulanceEnv, Arrival, EnvOutcome, Environment, OilConfig, OilEnv, Survey,
    TransitionNoise,
};
pub use error::{Error, Result};
pub use geometry::{DyadicCell, MetricSpec, Point};
pub use oracle::{DpOptions, GapField, GridDp, RegretCurve};
pub use partition::{AdaptivePartition, LeafRecord, NodeId, SplitRule};
pub use scalar::Real;

pub type Point64 = Point<f64>;
pub type Partition = AdaptivePartition<f64>;
pub type AdaQl = AdaQlAgent<f64>;
pub type AdaMb = AdaMbAgent<f64>;
pub type EpsQl = EpsQlAgent<f64>;
pub type EpsMb = EpsMbAgent<f64>;
pub type Median = MedianAgent<f64>;
