//! Scalar type used for bit counts.
//!
//! Code lengths are integers; the only non-integral input is the cost factor,
//! so any ordered field-like type works. `f64` is the default everywhere,
//! `f32` is supported, and `Ratio<i64>` gives exact arithmetic.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Bits:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    fn from_len(len: u32) -> Self {
        Self::from_u32(len).expect("code length representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Total order; incomparable values (NaN) sort as equal.
    fn cmp_total(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl<T> Bits for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Exact bit counts.
pub type Exact = num_rational::Ratio<i64>;

pub type Learned32 = crate::pipeline::Learned<f32>;
pub type LearnedExact = crate::pipeline::Learned<Exact>;
pub type Config32 = crate::model::Config<f32>;
pub type ConfigExact = crate::model::Config<Exact>;
