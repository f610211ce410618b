//! Local-zero approximation of `P'/P` near the unit circle.
//!
//! `P'/P(z) = Σ_{|θ_j|<c/N} 1/(z − z_j) + 𝓔` with `𝓔 = X1 + X2 − X3`, where
//! `X1 = P'/P(z0)`, `X2` is the non-local increment from `z0` to `z`, and `X3`
//! is the local sum at `z0 = 1 − 1/N`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::logderiv::{log_deriv, q_log_deriv_direct, POLE_TOL};
use crate::sampler::{map_spectra, EigenAngles, RngStream};
use crate::scalar::{unit, Real};
use crate::stats::{batch_means, heavy_tailed, DEFAULT_BATCHES};

/// Tolerance of the two decomposition identities.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Constant in the testable form `c·|z0 − z_j| ≤ 10·|z − z_j|`.
pub const X2_COMPARISON_CONSTANT: f64 = 10.0;

pub const DEFAULT_GRID_POINTS: usize = 1024;

/// `z0 = 1 − 1/N`.
pub fn z0<T: Real>(n: usize) -> T {
    T::one() - T::one() / T::from_usize_lossy(n)
}

/// `(c, K, z)` with `0 < c ≤ 1` and real `z ∈ [z0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Params<T: Real> {
    pub c: T,
    pub k_moment: u32,
    pub z: T,
}

impl<T: Real> Theorem1Params<T> {
    pub fn new(n: usize, c: T, k_moment: u32, z: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if !(c > T::zero() && c <= T::one()) {
            return Err(invalid("c", format!("need 0 < c <= 1, got {c}")));
        }
        if k_moment == 0 {
            return Err(invalid("k_moment", "must be positive"));
        }
        if !(z >= z0::<T>(n) && z <= T::one()) {
            return Err(invalid("z", format!("need 1 - 1/N <= z <= 1, got {z}")));
        }
        Ok(Self { c, k_moment, z })
    }
}

/// Strict window `|θ| < c/N`.
#[inline]
pub fn in_window<T: Real>(theta: T, c: T, n: usize) -> bool {
    theta.abs() < c / T::from_usize_lossy(n)
}

fn reciprocal<T: Real>(z: Complex<T>, w: Complex<T>, index: usize) -> Result<Complex<T>> {
    let d = z - w;
    let distance = d.norm();
    if distance <= T::lit(POLE_TOL) {
        return Err(Error::PoleProximity {
            index,
            distance: distance.to_f64_lossy(),
        });
    }
    Ok(d.inv())
}

/// `Σ_{|θ_j|<c/N} 1/(z − z_j)`; zero for an empty window.
pub fn local_sum<T: Real>(angles: &EigenAngles<T>, z: Complex<T>, c: T) -> Result<Complex<T>> {
    let n = angles.n();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (j, &theta) in angles.as_slice().iter().enumerate() {
        if in_window(theta, c, n) {
            acc = acc + reciprocal(z, unit(theta), j)?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelbergDecomposition<T: Real> {
    pub local_sum: Complex<T>,
    pub error: Complex<T>,
    pub x1: Complex<T>,
    pub x2: Complex<T>,
    pub x3: Complex<T>,
    pub full: Complex<T>,
}

/// `|a − b|` relative to `max(|a|, 1)`.
fn scaled_residual<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    (a - b).norm() / a.norm().max(T::one())
}

impl<T: Real> SelbergDecomposition<T> {
    /// Residual of `full = local_sum + error`.
    pub fn split_residual(&self) -> T {
        scaled_residual(self.full, self.local_sum + self.error)
    }

    /// Residual of `error = X1 + X2 − X3`.
    pub fn error_residual(&self) -> T {
        scaled_residual(self.error, self.x1 + self.x2 - self.x3)
    }

    pub fn holds(&self, tol: T) -> bool {
        self.split_residual() <= tol && self.error_residual() <= tol
    }
}

/// Decomposition of `P'/P(z)` around `z0 = 1 − 1/N`.
///
/// `z` may be any complex point off the spectrum; the identities are
/// algebraic, the moment bounds concern real `z ∈ [z0, 1]`.
pub fn decompose<T: Real>(angles: &EigenAngles<T>, z: Complex<T>, c: T) -> Result<SelbergDecomposition<T>> {
    let n = angles.n();
    let z_0 = Complex::new(z0::<T>(n), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let (mut local, mut x1, mut x2, mut x3, mut full) = (zero, zero, zero, zero, zero);
    for (j, &theta) in angles.as_slice().iter().enumerate() {
        let w = unit(theta);
        let at_z = reciprocal(z, w, j)?;
        let at_z0 = reciprocal(z_0, w, j)?;
        full = full + at_z;
        x1 = x1 + at_z0;
        if in_window(theta, c, n) {
            local = local + at_z;
            x3 = x3 + at_z0;
        } else {
            x2 = x2 + (at_z - at_z0);
        }
    }
    Ok(SelbergDecomposition {
        local_sum: local,
        error: x1 + x2 - x3,
        x1,
        x2,
        x3,
        full,
    })
}

/// `max_j c·|z0 − z_j| / |z − z_j|` over the non-local zeros (0 if none).
pub fn x2_comparison_ratio<T: Real>(angles: &EigenAngles<T>, z: Complex<T>, c: T) -> T {
    let n = angles.n();
    let z_0 = Complex::new(z0::<T>(n), T::zero());
    angles
        .as_slice()
        .iter()
        .filter(|&&t| !in_window(t, c, n))
        .map(|&t| {
            let w = unit(t);
            c * (z_0 - w).norm() / (z - w).norm()
        })
        .fold(T::zero(), T::max)
}

/// `Σ_j |z0 − z_j|^{−2}`.
pub fn inverse_square_sum<T: Real>(angles: &EigenAngles<T>, z_0: T) -> Result<T> {
    let z_0 = Complex::new(z_0, T::zero());
    let mut acc = T::zero();
    for (j, w) in angles.eigenvalues().enumerate() {
        acc = acc + reciprocal(z_0, w, j)?.norm_sqr();
    }
    Ok(acc)
}

/// `Σ_j |z0 − z_j|^{−2} / (N·(N + |X1|))` at `z0 = 1 − 1/N`.
pub fn claim_ratio<T: Real>(angles: &EigenAngles<T>) -> Result<T> {
    let n = angles.n();
    let nf = T::from_usize_lossy(n);
    let z_0 = z0::<T>(n);
    let x1 = log_deriv(angles, Complex::new(z_0, T::zero()))?;
    Ok(inverse_square_sum(angles, z_0)? / (nf * (nf + x1.norm())))
}

/// `N/2 − Re(Q'/Q(s0))` with `s0 = log(1 − 1/N)`; a sum of positive terms.
pub fn positivity_margin<T: Real>(angles: &EigenAngles<T>) -> Result<T> {
    let n = angles.n();
    let s0 = Complex::new(z0::<T>(n).ln(), T::zero());
    let q = q_log_deriv_direct(angles, s0)?;
    Ok(T::from_usize_lossy(n) / (T::one() + T::one()) - q.re)
}

/// One step of the circle search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleStep {
    pub radius: f64,
    /// `|P'/P|` at the circle's centre.
    pub center_abs: f64,
    /// Trapezoid average of `|P'/P|` over the circle.
    pub mean_abs: f64,
    pub max_abs: f64,
    pub min_abs: f64,
    /// `|trapezoid mean of P'/P − P'/P(centre)|`; the mean value property makes this vanish.
    pub mean_value_residual: f64,
    /// Quadrature slack `1e−3·(max − min)/max`.
    pub slack: f64,
    pub argmax_index: usize,
    /// Another grid point matched the maximum within 1e−15 (relative).
    pub tie: bool,
    /// `center ≤ (1 + slack)·mean ≤ (1 + slack)·max`.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkChainReport {
    pub points: Vec<Complex<f64>>,
    /// `|P'/P(w_k)|` for `k = 1..K`.
    pub values: Vec<f64>,
    /// `|P'/P(z0)|`.
    pub origin_value: f64,
    pub steps: Vec<CircleStep>,
    /// `|P'/P(z0)|^{2K} ≤ Π_k |P'/P(w_k)|²`, compared in log space.
    pub chain_holds: bool,
    /// Every step certified by the mean-value route.
    pub certified: bool,
    /// `min_{i≠j} |w_i − w_j| / r` with `r = 1/(2N)`; `None` for `K = 1`.
    pub min_spacing_over_r: Option<f64>,
}

/// Greedy circle chain `w_k = argmax_{C(w_{k−1}, r_k)} |P'/P|`, `w_0 = z0`,
/// `r_k = 1/(2N·2^k)`, maximised over an `m`-point uniform grid.
pub fn wk_chain<T: Real>(angles: &EigenAngles<T>, k_moment: usize, grid_points: usize) -> Result<WkChainReport> {
    if k_moment == 0 {
        return Err(invalid("k_moment", "must be positive"));
    }
    if grid_points < 3 {
        return Err(invalid("grid_points", "need at least 3 points"));
    }
    let n = angles.n();
    let r = T::one() / (T::lit(2.0) * T::from_usize_lossy(n));
    let origin = Complex::new(z0::<T>(n), T::zero());
    let origin_value = log_deriv(angles, origin)?.norm();

    let mut center = origin;
    let mut center_abs = origin_value;
    let mut radius = r;
    let mut points = Vec::with_capacity(k_moment);
    let mut values = Vec::with_capacity(k_moment);
    let mut steps = Vec::with_capacity(k_moment);
    let two_pi = T::PI() + T::PI();
    let m = T::from_usize_lossy(grid_points);

    for _ in 0..k_moment {
        radius = radius / T::lit(2.0);
        for (j, w) in angles.eigenvalues().enumerate() {
            let gap = ((w - center).norm() - radius).abs();
            if gap <= T::lit(1e-12) {
                return Err(Error::PoleProximity {
                    index: j,
                    distance: gap.to_f64_lossy(),
                });
            }
        }
        let mut sum = Complex::new(T::zero(), T::zero());
        let mut sum_abs = T::zero();
        let mut best = (0usize, T::neg_infinity());
        let mut min_abs = T::infinity();
        let mut grid_abs = Vec::with_capacity(grid_points);
        for j in 0..grid_points {
            let phi = two_pi * T::from_usize_lossy(j) / m;
            let w = center + unit(phi) * radius;
            let value = log_deriv(angles, w)?;
            let a = value.norm();
            sum = sum + value;
            sum_abs = sum_abs + a;
            min_abs = min_abs.min(a);
            if a > best.1 {
                best = (j, a);
            }
            grid_abs.push(a);
        }
        let (arg, max_abs) = best;
        let tie_tol = T::lit(1e-15) * max_abs;
        let tie = grid_abs
            .iter()
            .enumerate()
            .any(|(j, &a)| j != arg && (max_abs - a).abs() <= tie_tol);
        let mean_abs = sum_abs / m;
        let mean = sum / m;
        let center_value = log_deriv(angles, center)?;
        let slack = T::lit(1e-3) * (max_abs - min_abs) / max_abs;
        let certified = center_abs <= (T::one() + slack) * mean_abs && mean_abs <= max_abs;
        steps.push(CircleStep {
            radius: radius.to_f64_lossy(),
            center_abs: center_abs.to_f64_lossy(),
            mean_abs: mean_abs.to_f64_lossy(),
            max_abs: max_abs.to_f64_lossy(),
            min_abs: min_abs.to_f64_lossy(),
            mean_value_residual: (mean - center_value).norm().to_f64_lossy(),
            slack: slack.to_f64_lossy(),
            argmax_index: arg,
            tie,
            certified,
        });
        let phi = two_pi * T::from_usize_lossy(arg) / m;
        center = center + unit(phi) * radius;
        center_abs = max_abs;
        points.push(center);
        values.push(max_abs);
    }

    let k = T::from_usize_lossy(k_moment);
    let lhs = T::lit(2.0) * k * origin_value.ln();
    let rhs = values.iter().fold(T::zero(), |acc, &v| acc + T::lit(2.0) * v.ln());
    let chain_holds = lhs <= rhs;
    let min_spacing_over_r = if k_moment >= 2 {
        let mut best = T::infinity();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                best = best.min((points[i] - points[j]).norm());
            }
        }
        Some((best / r).to_f64_lossy())
    } else {
        None
    };
    Ok(WkChainReport {
        points: points
            .iter()
            .map(|p| Complex::new(p.re.to_f64_lossy(), p.im.to_f64_lossy()))
            .collect(),
        values: values.iter().map(|v| v.to_f64_lossy()).collect(),
        origin_value: origin_value.to_f64_lossy(),
        certified: steps.iter().all(|s| s.certified),
        steps,
        chain_holds,
        min_spacing_over_r,
    })
}

/// Monte Carlo estimate of `E|𝓔|^{2K}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n: usize,
    pub c: f64,
    pub k_moment: u32,
    pub mean: f64,
    pub std_error: f64,
    /// `E|𝓔|^{2K}·(c/N)^{2K}`.
    pub normalized: f64,
    pub normalized_std_error: f64,
    pub samples: usize,
    pub heavy_tail_warning: bool,
}

impl MomentEstimate {
    /// From pre-computed `|𝓔|²` values.
    pub fn from_abs_squared(abs_sq: &[f64], n: usize, c: f64, k_moment: u32) -> Result<Self> {
        let powers: Vec<f64> = abs_sq.iter().map(|x| x.powi(k_moment as i32)).collect();
        let est = batch_means(&powers, DEFAULT_BATCHES)?;
        let scale = (c / n as f64).powi(2 * k_moment as i32);
        Ok(Self {
            n,
            c,
            k_moment,
            mean: est.mean,
            std_error: est.std_error,
            normalized: est.mean * scale,
            normalized_std_error: est.std_error * scale,
            samples: est.count,
            heavy_tail_warning: heavy_tailed(&powers),
        })
    }
}

pub const MIN_MOMENT_SAMPLES: usize = 100;

/// `E|𝓔|^{2K}` at real `z` over `samples` Haar spectra of size `n`.
pub fn error_moment_estimate(
    n: usize,
    params: &Theorem1Params<f64>,
    samples: usize,
    stream: &RngStream,
    workers: usize,
) -> Result<MomentEstimate> {
    Theorem1Params::new(n, params.c, params.k_moment, params.z)?;
    if samples < MIN_MOMENT_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_MOMENT_SAMPLES,
            got: samples,
        });
    }
    let z = Complex::new(params.z, 0.0);
    let abs_sq: Vec<f64> = map_spectra(n, stream, samples, workers, |_, a| {
        decompose(&a, z, params.c).map(|d| d.error.norm_sqr())
    })?
    .into_iter()
    .collect::<Result<_>>()?;
    MomentEstimate::from_abs_squared(&abs_sq, n, params.c, params.k_moment)
}
