//! Scalar abstraction for the estimator arithmetic.
//!
//! Risk tables, product-limit curves and the log-rank statistic are built
//! from integer counts with field operations only, so they are generic over
//! the scalar they accumulate in. `f64` is the workhorse; `f32` works; and
//! exact rationals (`num_rational::BigRational`) satisfy the same bounds,
//! which lets tests assert arithmetic identities with no rounding at all.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field the censoring-aware estimators accumulate in.
///
/// Blanket-implemented for anything with ring/field operations, a sign, an
/// order and integer embeddings — in particular `f32`, `f64` and
/// `BigRational`.
pub trait Real: Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone + Debug {
    /// Embed an integer count into the scalar field.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// Lossy view as `f64`, used only where a value leaves the field
    /// (tail-probability evaluation, report emission).
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone + Debug {}
