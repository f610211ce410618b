//! `P'/P` for a spectrum, the mesoscopic test functions `f`, `g`, `h`, their
//! linear statistics, and the lattice representation of `Q'/Q` with
//! `Q(s) = P(e^s)`.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::sampler::EigenAngles;
use crate::scalar::{unit, Real};

/// Minimum distance from an eigenvalue before an evaluation is refused.
pub const POLE_TOL: f64 = 1e-14;

/// Default lattice truncation for [`q_log_deriv_lattice`].
pub const DEFAULT_LATTICE_TERMS: usize = 100_000;

/// An evaluation point in both coordinates, `z = e^s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint<T: Real> {
    pub z: Complex<T>,
    pub s: Complex<T>,
}

impl<T: Real> EvalPoint<T> {
    /// Principal logarithm for `s`.
    pub fn from_z(z: Complex<T>) -> Self {
        Self { z, s: z.ln() }
    }

    pub fn from_s(s: Complex<T>) -> Self {
        Self { z: s.exp(), s }
    }

    /// `z_0 = 1 − 1/N`.
    pub fn z0(n: usize) -> Self {
        Self::from_z(Complex::new(T::one() - T::one() / T::from_usize_lossy(n), T::zero()))
    }
}

/// Parameters `(N, L, u, v)` of the mesoscopic statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MesoscopicSpec<T: Real> {
    pub n: usize,
    pub l: T,
    pub u: T,
    pub v: T,
}

impl<T: Real> MesoscopicSpec<T> {
    pub fn new(n: usize, l: T, u: T, v: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if !(l > T::zero() && l < T::from_usize_lossy(n)) {
            return Err(invalid("l", format!("need 0 < L < N, got L={l}, N={n}")));
        }
        if !(u.is_finite() && v.is_finite()) {
            return Err(invalid("u, v", "must be finite"));
        }
        Ok(Self { n, l, u, v })
    }

    /// `L/N`.
    pub fn ratio(&self) -> T {
        self.l / T::from_usize_lossy(self.n)
    }

    /// Radius `1 − L/N` at which `P'/P` is evaluated.
    pub fn radius(&self) -> T {
        T::one() - self.ratio()
    }

    pub fn with_uv(&self, u: T, v: T) -> Self {
        Self { u, v, ..*self }
    }
}

/// `Σ_j 1/(z − e^{iθ_j})`, summed in index order.
pub fn log_deriv<T: Real>(angles: &EigenAngles<T>, z: Complex<T>) -> Result<Complex<T>> {
    let tol = T::lit(POLE_TOL);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (index, w) in angles.eigenvalues().enumerate() {
        let d = z - w;
        let distance = d.norm();
        if distance <= tol {
            return Err(Error::PoleProximity {
                index,
                distance: distance.to_f64_lossy(),
            });
        }
        acc = acc + d.inv();
    }
    Ok(acc)
}

/// `f(θ) = (L/N) / ((1 − L/N) − e^{iθ})`.
pub fn f_value<T: Real>(theta: T, spec: &MesoscopicSpec<T>) -> Complex<T> {
    let denom = Complex::new(spec.radius(), T::zero()) - unit(theta);
    Complex::new(spec.ratio(), T::zero()) / denom
}

pub fn g_value<T: Real>(theta: T, spec: &MesoscopicSpec<T>) -> T {
    f_value(theta, spec).re
}

pub fn h_value<T: Real>(theta: T, spec: &MesoscopicSpec<T>) -> T {
    f_value(theta, spec).im
}

/// `F = u·g + v·h`.
pub fn big_f_value<T: Real>(theta: T, spec: &MesoscopicSpec<T>) -> T {
    let f = f_value(theta, spec);
    spec.u * f.re + spec.v * f.im
}

/// `S_N(f) = Σ_j f(θ_j)`.
pub fn s_n_f<T: Real>(angles: &EigenAngles<T>, spec: &MesoscopicSpec<T>) -> Complex<T> {
    angles
        .as_slice()
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &t| acc + f_value(t, spec))
}

pub fn s_n_g<T: Real>(angles: &EigenAngles<T>, spec: &MesoscopicSpec<T>) -> T {
    angles.as_slice().iter().map(|&t| g_value(t, spec)).sum()
}

pub fn s_n_h<T: Real>(angles: &EigenAngles<T>, spec: &MesoscopicSpec<T>) -> T {
    angles.as_slice().iter().map(|&t| h_value(t, spec)).sum()
}

/// `Q'/Q(s) = e^s · (P'/P)(e^s)`.
pub fn q_log_deriv_direct<T: Real>(angles: &EigenAngles<T>, s: Complex<T>) -> Result<Complex<T>> {
    let z = s.exp();
    Ok(z * log_deriv(angles, z)?)
}

/// `N/2 + Σ_j Σ_{|n|≤n_max} 1/(s − i(θ_j + 2nπ))`.
///
/// The `±n` terms are combined as `2a/(a² + (2nπ)²)` with `a = s − iθ_j`
/// before accumulation, so the truncated tail is `O(N/n_max)`.
pub fn q_log_deriv_lattice<T: Real>(angles: &EigenAngles<T>, s: Complex<T>, n_max: usize) -> Result<Complex<T>> {
    let tol = T::lit(POLE_TOL);
    let two_pi = T::PI() + T::PI();
    let two = T::one() + T::one();
    let i = Complex::new(T::zero(), T::one());
    let mut acc = Complex::new(T::from_usize_lossy(angles.n()) / two, T::zero());
    for (index, &theta) in angles.as_slice().iter().enumerate() {
        // Nearest lattice pole in the imaginary direction.
        let nearest = ((s.im - theta) / two_pi).round();
        if nearest.abs() <= T::from_usize_lossy(n_max) {
            let distance = (s - i * (theta + nearest * two_pi)).norm();
            if distance <= tol {
                return Err(Error::PoleProximity {
                    index,
                    distance: distance.to_f64_lossy(),
                });
            }
        }
        let a = s - i * theta;
        let a2 = a * a;
        let mut row = a.inv();
        for n in 1..=n_max {
            let b = two_pi * T::from_usize_lossy(n);
            row = row + (a + a) / (a2 + Complex::new(b * b, T::zero()));
        }
        acc = acc + row;
    }
    Ok(acc)
}

/// Asymptotic value of the part of the paired lattice sum beyond `n_max`,
/// `Σ_j Σ_{n>n_max} 2a_j/(a_j² + (2nπ)²)` with `a_j = s − iθ_j`, from the
/// expansion `a/(2π²n²) − a³/(8π⁴n⁴) + …`. Used only to diagnose truncation.
pub fn lattice_tail_remainder<T: Real>(angles: &EigenAngles<T>, s: Complex<T>, n_max: usize) -> Complex<T> {
    let m = T::from_usize_lossy(n_max.max(1));
    let (m2, m3) = (m * m, m * m * m);
    // Σ_{n>m} n^{-2} and Σ_{n>m} n^{-4} by Euler–Maclaurin.
    let t2 = m.recip() - T::lit(0.5) / m2 + T::lit(1.0 / 6.0) / m3;
    let t4 = T::lit(1.0 / 3.0) / m3 - T::lit(0.5) / (m3 * m);
    let pi2 = T::PI() * T::PI();
    let i = Complex::new(T::zero(), T::one());
    angles.as_slice().iter().fold(Complex::new(T::zero(), T::zero()), |acc, &theta| {
        let a = s - i * theta;
        acc + a * (t2 / (pi2 + pi2)) - a * a * a * (t4 / (T::lit(8.0) * pi2 * pi2))
    })
}

/// `Re` of each lattice term at real `s`: `s/|s − i(θ_j + 2nπ)|²`, summed.
/// Equals `Re(Q'/Q(s)) − N/2`; strictly negative for `s < 0`.
pub fn lattice_real_part_terms<T: Real>(angles: &EigenAngles<T>, s: T, n_max: usize) -> T {
    let two_pi = T::PI() + T::PI();
    let mut acc = T::zero();
    for &theta in angles.as_slice() {
        for n in -(n_max as i64)..=(n_max as i64) {
            let im = theta + T::lit(n as f64) * two_pi;
            acc = acc + s / (s * s + im * im);
        }
    }
    acc
}
