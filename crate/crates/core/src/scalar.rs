//! Scalar abstraction for the metric code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point type the metrics are computed in: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Exact conversion of a token count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("token counts fit in a float")
    }

    fn half() -> Self {
        Self::from_f64(0.5).expect("0.5 is representable")
    }

    fn ten() -> Self {
        Self::from_u8(10).expect("10 is representable")
    }

    fn nine() -> Self {
        Self::from_u8(9).expect("9 is representable")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Real for f32 {}
impl Real for f64 {}
