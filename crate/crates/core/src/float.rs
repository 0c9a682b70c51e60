//! Scalar abstraction so the statistical core works with `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// Wraps `num_traits::Float` with the conversions and special functions the
/// test statistics need. Implemented for `f32` and `f64`; all tolerances
/// quoted in this crate's documentation assume `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Sum + Display + Debug + Send + Sync + 'static
{
    fn erf(self) -> Self;
    fn erfc(self) -> Self;

    /// Lossy view as `f64`, for diagnostics and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Conversion from `f64` literals and precomputed constants.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("f64 conversion")
    }

    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).expect("usize conversion")
    }
}

impl Scalar for f64 {
    fn erf(self) -> Self {
        libm::erf(self)
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Scalar for f32 {
    fn erf(self) -> Self {
        libm::erff(self)
    }

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Neumaier compensated accumulator.
///
/// The double sums behind the MMD statistic add O(N^2) terms of magnitude at
/// most one with heavy cancellation in the cross term, so plain summation
/// loses digits at the sample sizes the simulation harness uses.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator<F> {
    sum: F,
    compensation: F,
}

impl<F: Scalar> Default for Accumulator<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> Accumulator<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            compensation: F::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: F) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> F {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<F: Scalar, I: IntoIterator<Item = F>>(values: I) -> F {
    let mut acc = Accumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}
