//! Scalar abstraction for the model layer.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the optimization core is generic over.
///
/// `f32` and `f64` implement it; tolerances inside the core scale with
/// [`Float::epsilon`] so both widths behave sensibly.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert into the scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
