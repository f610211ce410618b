//! Averages of products of logarithmic derivatives over `U(N)`: the exact
//! ratios formula `J*` and two independent evaluations of `J`.

mod jstar;
mod weyl;
mod zfn;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use jstar::{j_star, j_star_traced, JStarTerm, DAGGER_ZERO_TOL};
pub use weyl::{
    grid_angles, j_weyl, weyl_average, weyl_average_indexed, weyl_marginal_density, WeylEstimate,
    DEFAULT_WEYL_GRID, MAX_WEYL_DIMENSION,
};
pub use zfn::{z_fn, z_logd, z_logd_prime, Z_POLE_TOL};

use crate::error::{invalid, Error, Result};
use crate::sampler::{map_spectra, EigenAngles, RngStream};
use crate::scalar::{unit, Real};
use crate::stats::{batch_means, DEFAULT_BATCHES};

/// Enumeration limit per side.
pub const MAX_SHIFTS: usize = 3;

/// Minimum distance between shifts of the same side.
pub const MIN_SHIFT_SEPARATION: f64 = 1e-6;

pub const MIN_MONTE_CARLO_SAMPLES: usize = 1_000;

/// Shift sets `A`, `B` (positive real parts) and the matrix size.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSpec<T: Real> {
    pub shifts_a: Vec<Complex<T>>,
    pub shifts_b: Vec<Complex<T>>,
    pub n: usize,
}

fn check_side<T: Real>(name: &'static str, shifts: &[Complex<T>]) -> Result<()> {
    if let Some(bad) = shifts.iter().find(|s| !(s.re > T::zero())) {
        return Err(invalid(name, format!("shift {bad} needs a positive real part")));
    }
    for (i, x) in shifts.iter().enumerate() {
        for y in &shifts[i + 1..] {
            if (*x - *y).norm() < T::lit(MIN_SHIFT_SEPARATION) {
                return Err(invalid(name, format!("shifts {x} and {y} coincide")));
            }
        }
    }
    Ok(())
}

impl<T: Real> RatioSpec<T> {
    pub fn new(shifts_a: Vec<Complex<T>>, shifts_b: Vec<Complex<T>>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_side("shifts_a", &shifts_a)?;
        check_side("shifts_b", &shifts_b)?;
        Ok(Self { shifts_a, shifts_b, n })
    }

    pub fn real(a: &[f64], b: &[f64], n: usize) -> Result<Self> {
        let lift = |xs: &[f64]| xs.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect();
        Self::new(lift(a), lift(b), n)
    }

    /// `K` when `|A| = |B| = K`.
    pub fn order(&self) -> usize {
        self.shifts_a.len()
    }
}

/// `Π_A (−e^{−α}) P'/P(e^{−α}) · Π_B (−e^{−β}) P*'/P*(e^{−β})`, where `P*`
/// is the characteristic polynomial of `U*` (eigenangles `−θ_j`).
pub fn ratio_integrand<T: Real>(angles: &EigenAngles<T>, spec: &RatioSpec<T>) -> Complex<T> {
    let mut product = Complex::new(T::one(), T::zero());
    for (shifts, sign) in [(&spec.shifts_a, T::one()), (&spec.shifts_b, -T::one())] {
        for &shift in shifts.iter() {
            let x = (-shift).exp();
            let sum = angles
                .as_slice()
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, &t| acc + (x - unit(sign * t)).inv());
            product = product * (-x) * sum;
        }
    }
    product
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub mean: Complex<f64>,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub samples: usize,
}

impl RatioEstimate {
    /// Componentwise agreement with `target` within `k` standard errors.
    pub fn agrees_with(&self, target: Complex<f64>, k: f64) -> bool {
        (self.mean.re - target.re).abs() <= k * self.std_error_re
            && (self.mean.im - target.im).abs() <= k * self.std_error_im
    }
}

/// Haar Monte Carlo estimate of `J(A; B)` with batch-means standard errors.
pub fn j_monte_carlo(spec: &RatioSpec<f64>, samples: usize, stream: &RngStream, workers: usize) -> Result<RatioEstimate> {
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_MONTE_CARLO_SAMPLES,
            got: samples,
        });
    }
    let values = map_spectra(spec.n, stream, samples, workers, |_, a| ratio_integrand(&a, spec))?;
    Ok(estimate_from_values(&values))
}

pub fn estimate_from_values(values: &[Complex<f64>]) -> RatioEstimate {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    let er = batch_means(&re, DEFAULT_BATCHES).expect("non-empty");
    let ei = batch_means(&im, DEFAULT_BATCHES).expect("non-empty");
    RatioEstimate {
        mean: Complex::new(er.mean, ei.mean),
        std_error_re: er.std_error,
        std_error_im: ei.std_error,
        samples: values.len(),
    }
}

/// `|J*|·N^{−2K}` with `A = B = {δ, 2δ, …, Kδ}`.
pub fn scaled_j_star(n: usize, k: usize, delta: f64) -> Result<f64> {
    let shifts: Vec<f64> = (1..=k).map(|j| delta * j as f64).collect();
    let spec = RatioSpec::<f64>::real(&shifts, &shifts, n)?;
    Ok(j_star(&spec)?.norm() / (n as f64).powi(2 * k as i32))
}
