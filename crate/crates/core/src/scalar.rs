//! Scalar abstraction shared by the linear algebra and the closed-form
//! certification formulas.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the toolkit can be instantiated with (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Smallest absolute tolerance this precision can honour. Requested
    /// tolerances below it are raised to it.
    const RESOLUTION: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in target precision")
    }

    /// A tolerance of `t`, floored at [`Real::RESOLUTION`].
    #[inline]
    fn tol(t: f64) -> Self {
        Self::lit(t.max(Self::RESOLUTION))
    }

    #[inline]
    fn as_f64(self) -> f64 {
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

    /// `sqrt(max(x, 0))`.
    #[inline]
    fn sqrt_clamped(self) -> Self {
        self.max(Self::zero()).sqrt()
    }
}

impl Real for f64 {
    const RESOLUTION: f64 = 0.0;
}

impl Real for f32 {
    const RESOLUTION: f64 = 1e-5;
}

/// Numerical tolerances used across the crate.
pub mod tolerance {
    /// Hermiticity check on operators flagged Hermitian.
    pub const HERMITIAN: f64 = 1e-9;
    /// Lowest eigenvalue accepted as positive semidefinite.
    pub const PSD: f64 = 1e-9;
    /// Unit-trace check on density operators.
    pub const TRACE: f64 = 1e-12;
    /// Bloch vectors with norm in `(1, 1 + BLOCH_NORM]` are clamped onto the sphere.
    pub const BLOCH_NORM: f64 = 1e-9;
    /// Slack on the valid-POVM condition `|alpha| <= 1 - |n|`.
    pub const POVM: f64 = 1e-9;
    /// Radicands in `[-RADICAND, 0)` are clamped to zero.
    pub const RADICAND: f64 = 1e-12;
    /// Radicands within this of zero are rounding noise from inputs a few ulp
    /// off an endpoint and are set to zero before the square root.
    pub const ROUNDING: f64 = 1e-14;
    /// Two sharpness bounds closer than this are treated as equal when
    /// judging interval consistency.
    pub const INTERVAL: f64 = 1e-12;
    /// Normalization of conditional distributions.
    pub const NORMALIZATION: f64 = 1e-12;
}
