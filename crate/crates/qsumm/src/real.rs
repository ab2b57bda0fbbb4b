//! Scalar abstraction for the numeric core.
//!
//! Vector-space math, ROUGE scores and the linear models are generic over
//! [`Real`] so the same code runs in `f32` or `f64`. The crate root exports
//! `f64` aliases, which is what the pipeline and CLI use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable everywhere in the numeric core.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from usize counts (corpus sizes, term counts).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + Sum
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
