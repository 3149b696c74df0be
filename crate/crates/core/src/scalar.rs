//! Scalar abstraction shared by every module.
//!
//! All geometry and dynamics are written against [`Real`], which is implemented
//! for `f32` and `f64`. The concrete aliases at the crate root fix `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance used for structural checks (orthogonality, skew-symmetry).
    const GEOM_TOL: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot hold,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f64 {
    const GEOM_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const GEOM_TOL: f64 = 1e-4;
}
