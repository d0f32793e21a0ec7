//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for literals and sampled uniforms.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    /// Lossy conversion from an integer count.
    fn count(x: u64) -> Self {
        <Self as NumCast>::from(x).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ceiling that ignores floating point noise just above an integer, so that
/// e.g. `4096^0.25` evaluated as `8.000000000000002` still yields 8.
pub(crate) fn ceil_tolerant<F: Real>(x: F) -> F {
    let r = x.round();
    if (x - r).abs() <= F::lit(1e-9) * F::one().max(r.abs()) {
        r
    } else {
        x.ceil()
    }
}

/// Neumaier compensated summation.
pub(crate) fn compensated_sum<F: Real, I: IntoIterator<Item = F>>(it: I) -> F {
    let mut sum = F::zero();
    let mut c = F::zero();
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c = c + ((sum - t) + x);
        } else {
            c = c + ((x - t) + sum);
        }
        sum = t;
    }
    sum + c
}
