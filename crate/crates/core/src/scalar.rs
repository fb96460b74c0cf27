use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, NumAssignOps};

/// Floating-point scalar used by the geometry layer.
pub trait Real:
    Float + FloatConst + NumAssignOps + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the implementors below.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + NumAssignOps + Debug + Display + Default + Send + Sync + 'static
{
}
