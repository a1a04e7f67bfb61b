//! Floating-point abstraction shared by the group, dither, cost and dynamics code.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the numerical core is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Orthogonality tolerance ‖RᵀR − I‖_F for accepting a rotation block.
    const GROUP_TOL: f64;
    /// Rotation angle below which the exponential maps switch to Taylor series.
    const SMALL_ANGLE: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real converts to f64")
    }
}

impl Real for f64 {
    const GROUP_TOL: f64 = 1e-8;
    const SMALL_ANGLE: f64 = 1e-4;
}

impl Real for f32 {
    const GROUP_TOL: f64 = 1e-4;
    const SMALL_ANGLE: f64 = 1e-2;
}
