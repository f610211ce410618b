//! Haar-random unitary matrices and their eigenangle spectra.

mod angles;
mod rng;

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;

pub use angles::{wrap_angle, EigenAngles};
pub use rng::RngStream;

use crate::error::{Error, Result};
use crate::parallel::map_ordered;

/// Entrywise tolerance on `UU* − I`.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A dense unitary matrix in double precision.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix {
    entries: Mat<c64>,
}

impl UnitaryMatrix {
    /// Wraps `entries`, rejecting non-square or non-unitary input.
    pub fn new(entries: Mat<c64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::EmptyMatrix);
        }
        let u = Self { entries };
        let deviation = u.unitarity_deviation();
        if deviation > UNITARITY_TOL * (u.n() as f64).max(1.0) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub fn diagonal(phases: &[c64]) -> Result<Self> {
        let n = phases.len();
        Self::new(Mat::from_fn(n, n, |i, j| if i == j { phases[i] } else { c64::new(0.0, 0.0) }))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<c64> {
        &self.entries
    }

    /// `max_{ij} |(UU*)_{ij} − δ_{ij}|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = &self.entries * self.entries.adjoint();
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> c64 {
        (0..self.n()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Determinant via LU.
    pub fn determinant(&self) -> c64 {
        self.entries.determinant()
    }
}

/// Haar-distributed `U ∈ U(n)` from a complex Ginibre matrix: `U = Q·diag(r_jj/|r_jj|)`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut ginibre = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            ginibre[(i, j)] = c64::new(re * scale, im * scale);
        }
    }
    let qr = ginibre.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { c64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix { entries: q })
}

/// Eigenangles of a unitary matrix, validated for unitarity first.
pub fn eigenangles(u: &UnitaryMatrix) -> Result<EigenAngles<f64>> {
    let deviation = u.unitarity_deviation();
    if deviation > UNITARITY_TOL * (u.n() as f64).max(1.0) {
        return Err(Error::NotUnitary { deviation });
    }
    eigenangles_unchecked(u, 0)
}

/// Eigenvalues are renormalised to unit modulus before taking arguments; the
/// solver's radial drift carries no information about `θ`.
fn eigenangles_unchecked(u: &UnitaryMatrix, sample: usize) -> Result<EigenAngles<f64>> {
    let values = u
        .entries
        .eigenvalues()
        .map_err(|_| Error::EigenSolver { sample })?;
    let angles: Vec<f64> = values
        .iter()
        .map(|w| {
            let w = w / w.norm();
            w.im.atan2(w.re)
        })
        .collect();
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::EigenSolver { sample });
    }
    EigenAngles::from_unsorted(angles).map_err(|_| Error::EigenSolver { sample })
}

/// One Haar spectrum for sample `index` of `stream`.
pub fn sample_spectrum(n: usize, stream: &RngStream, index: usize) -> Result<EigenAngles<f64>> {
    let mut rng = stream.sample_rng(index as u64);
    let u = sample_haar_unitary(n, &mut rng)?;
    // The QR construction is unitary to rounding; a spot check every hundredth
    // sample is enough to catch a broken backend.
    if index % 100 == 0 {
        let deviation = u.unitarity_deviation();
        if deviation > UNITARITY_TOL * (n as f64).max(1.0) {
            return Err(Error::NotUnitary { deviation });
        }
    }
    eigenangles_unchecked(&u, index)
}

/// `count` independent CUE spectra; sample `i` always comes from substream `i`.
pub fn sample_cue_angles(n: usize, stream: &RngStream, count: usize) -> Result<Vec<EigenAngles<f64>>> {
    sample_cue_angles_par(n, stream, count, 1)
}

pub fn sample_cue_angles_par(
    n: usize,
    stream: &RngStream,
    count: usize,
    workers: usize,
) -> Result<Vec<EigenAngles<f64>>> {
    map_spectra(n, stream, count, workers, |_, a| a)
}

/// Samples spectra and reduces each to a statistic without keeping the spectrum.
pub fn map_spectra<R, F>(n: usize, stream: &RngStream, count: usize, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, EigenAngles<f64>) -> R + Sync + Send,
{
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if count == 0 {
        return Err(Error::NoSamples);
    }
    map_ordered(count, workers, |i| sample_spectrum(n, stream, i).map(|a| f(i, a)))
}

/// Same as [`map_spectra`] but hands the whole matrix to `f`.
pub fn map_unitaries<R, F>(n: usize, stream: &RngStream, count: usize, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, &UnitaryMatrix) -> R + Sync + Send,
{
    if count == 0 {
        return Err(Error::NoSamples);
    }
    map_ordered(count, workers, |i| {
        let mut rng = stream.sample_rng(i as u64);
        sample_haar_unitary(n, &mut rng).map(|u| f(i, &u))
    })
}
