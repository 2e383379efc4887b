//! Floating-point scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar usable by the solvers: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Validation tolerance: `base` for double precision, widened to a
    /// multiple of machine epsilon when the scalar cannot resolve `base`.
    #[inline]
    fn tolerance(base: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(1.0e3);
        Self::lit(base).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_keeps_double_precision_thresholds() {
        assert_eq!(<f64 as Real>::tolerance(1e-9), 1e-9);
        assert!(<f32 as Real>::tolerance(1e-9) > 1e-5);
    }
}
