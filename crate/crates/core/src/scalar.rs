//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the agents, partitions and environments are generic over.
///
/// Implemented for `f32` and `f64`. Transcendental functions (square roots,
/// logarithms, exponentials) appear in the confidence bonuses and survey
/// functions, so exact rational arithmetic is not supported.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; constants in the algorithms are written as `f64` literals.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// `2^-level`, the diameter of a dyadic cell at `level`.
    #[inline]
    fn dyadic(level: u32) -> Self {
        Self::lit(0.5f64.powi(level as i32))
    }

    /// Integral root `x^(1/k)` routed through `sqrt`/`cbrt` where possible so that
    /// perfect powers come out exact.
    #[inline]
    fn root(self, k: u32) -> Self {
        match k {
            1 => self,
            2 => self.sqrt(),
            3 => self.cbrt(),
            4 => self.sqrt().sqrt(),
            _ => self.powf(Self::one() / Self::lit(k as f64)),
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
