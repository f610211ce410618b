use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::{unit, Real};

/// Map an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = x % two_pi;
    if r > T::PI() {
        r = r - two_pi;
    } else if r <= -T::PI() {
        r = r + two_pi;
    }
    r
}

/// Eigenangles `θ_1 ≤ … ≤ θ_N` of a unitary matrix, each in `(-π, π]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenAngles<T: Real> {
    angles: Vec<T>,
}

impl<T: Real> EigenAngles<T> {
    /// Validates range and ordering.
    pub fn new(angles: Vec<T>) -> Result<Self> {
        if angles.is_empty() {
            return Err(invalid("angles", "spectrum must be non-empty"));
        }
        if let Some(bad) = angles.iter().find(|&&a| !(a > -T::PI() && a <= T::PI())) {
            return Err(invalid("angles", format!("{bad} outside (-pi, pi]")));
        }
        if angles.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("angles", "not sorted ascending"));
        }
        Ok(Self { angles })
    }

    /// Wraps every angle into `(-π, π]` and sorts.
    pub fn from_unsorted(mut angles: Vec<T>) -> Result<Self> {
        for a in angles.iter_mut() {
            *a = wrap_angle(*a);
        }
        angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angle"));
        Self::new(angles)
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.angles
    }

    pub fn into_vec(self) -> Vec<T> {
        self.angles
    }

    /// `z_j = e^{iθ_j}` in angle order.
    pub fn eigenvalues(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.angles.iter().map(|&a| unit(a))
    }

    /// Spectrum of the adjoint matrix: angles `-θ_j`.
    pub fn adjoint(&self) -> Self {
        Self::from_unsorted(self.angles.iter().map(|&a| -a).collect())
            .expect("negated spectrum stays valid")
    }

    pub fn cast<U: Real>(&self) -> EigenAngles<U> {
        EigenAngles::from_unsorted(self.angles.iter().map(|a| U::lit(a.to_f64_lossy())).collect())
            .expect("cast spectrum stays valid")
    }

    /// `Π_j (z − e^{iθ_j})`.
    pub fn char_poly(&self, z: Complex<T>) -> Complex<T> {
        self.eigenvalues().fold(Complex::new(T::one(), T::zero()), |acc, w| acc * (z - w))
    }
}
