//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{iθ}`.
#[inline]
pub fn unit<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Kahan–Babuška (Neumaier) compensated accumulator for complex sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T: Real> {
    sum: Complex<T>,
    carry: Complex<T>,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: Complex::new(T::zero(), T::zero()),
            carry: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn add(&mut self, x: Complex<T>) {
        let (re, cre) = neumaier(self.sum.re, self.carry.re, x.re);
        let (im, cim) = neumaier(self.sum.im, self.carry.im, x.im);
        self.sum = Complex::new(re, im);
        self.carry = Complex::new(cre, cim);
    }

    pub fn total(&self) -> Complex<T> {
        self.sum + self.carry
    }
}

#[inline]
fn neumaier<T: Real>(sum: T, carry: T, x: T) -> (T, T) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() {
        (sum - t) + x
    } else {
        (x - t) + sum
    };
    (t, carry + c)
}
