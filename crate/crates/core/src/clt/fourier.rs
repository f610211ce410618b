//! Fourier coefficients of the mesoscopic test functions and the exact
//! cumulant sums built from them.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::logderiv::{big_f_value, MesoscopicSpec};
use crate::scalar::{unit, Real};

/// Closed-form Fourier coefficients of `f`, `g`, `h` and `F = u·g + v·h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierCoefficients<T: Real> {
    pub spec: MesoscopicSpec<T>,
}

impl<T: Real> FourierCoefficients<T> {
    pub fn new(spec: MesoscopicSpec<T>) -> Self {
        Self { spec }
    }

    /// `(1 − L/N)^{|k|−1}` for `k ≠ 0`.
    fn decay(&self, k: i64) -> T {
        self.spec.radius().powi((k.unsigned_abs() - 1) as i32)
    }

    fn half_ratio(&self) -> T {
        self.spec.ratio() / (T::one() + T::one())
    }

    /// `f̂(k)`: zero for `k ≥ 0`, `−(L/N)(1 − L/N)^{−k−1}` for `k < 0`.
    pub fn f(&self, k: i64) -> Complex<T> {
        if k >= 0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(-self.spec.ratio() * self.decay(k), T::zero())
        }
    }

    /// `ĝ(k) = −(L/2N)(1 − L/N)^{|k|−1}` for `k ≠ 0`.
    pub fn g(&self, k: i64) -> Complex<T> {
        if k == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        Complex::new(-self.half_ratio() * self.decay(k), T::zero())
    }

    /// `ĥ(k) = ∓(L/2iN)(1 − L/N)^{|k|−1}` for `k ≶ 0`.
    pub fn h(&self, k: i64) -> Complex<T> {
        if k == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        // 1/(2i) = −i/2
        let mag = self.half_ratio() * self.decay(k);
        let sign = if k < 0 { T::one() } else { -T::one() };
        Complex::new(T::zero(), sign * mag)
    }

    /// `F̂(k) = u·ĝ(k) + v·ĥ(k) = −(L/2N)(1 − L/N)^{|k|−1}·(u ∓ iv)` for `k ≶ 0`.
    pub fn big_f(&self, k: i64) -> Complex<T> {
        if k == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        let scale = -self.half_ratio() * self.decay(k);
        let v = if k < 0 { -self.spec.v } else { self.spec.v };
        Complex::new(scale * self.spec.u, scale * v)
    }
}

/// `F̂(k)` from the closed form.
pub fn fhat_closed<T: Real>(k: i64, spec: &MesoscopicSpec<T>) -> Complex<T> {
    FourierCoefficients::new(*spec).big_f(k)
}

pub const MIN_QUADRATURE_POINTS: usize = 1 << 10;

/// `(1/M) Σ_j φ(θ_j) e^{−ikθ_j}` on `θ_j = 2πj/M`.
pub fn trapezoid_coefficient<T: Real>(k: i64, grid_points: usize, phi: impl Fn(T) -> Complex<T>) -> Complex<T> {
    let m = T::from_usize_lossy(grid_points);
    let two_pi = T::PI() + T::PI();
    let mut acc = Complex::new(T::zero(), T::zero());
    for j in 0..grid_points {
        let theta = two_pi * T::from_usize_lossy(j) / m;
        // Reduce kj mod M before scaling so large |k| keeps full phase accuracy.
        let phase_index = (k.rem_euclid(grid_points as i64) as usize * j) % grid_points;
        let phase = two_pi * T::from_usize_lossy(phase_index) / m;
        acc = acc + phi(theta) * unit(-phase);
    }
    acc / m
}

/// `F̂(k)` by trapezoid quadrature of its defining integral (an oracle for
/// [`fhat_closed`]).
pub fn fhat_numeric<T: Real>(k: i64, spec: &MesoscopicSpec<T>, grid_points: usize) -> Result<Complex<T>> {
    if grid_points < MIN_QUADRATURE_POINTS {
        return Err(invalid("grid_points", format!("need at least {MIN_QUADRATURE_POINTS}")));
    }
    Ok(trapezoid_coefficient(k, grid_points, |t| {
        Complex::new(big_f_value(t, spec), T::zero())
    }))
}

/// `B(x) = Σ_{k≥1} x^{2k} = (1 − x²)^{−1} − 1`.
pub fn series_b<T: Real>(x: T) -> T {
    T::one() / (T::one() - x * x) - T::one()
}

/// `A(x) = Σ_{k≥1} k x^{2k} = x²(1 − x²)^{−2}`.
pub fn series_a<T: Real>(x: T) -> T {
    let d = T::one() - x * x;
    x * x / (d * d)
}

fn c2_closed<T: Real>(ratio: T, u: T, v: T) -> T {
    let two = T::one() + T::one();
    let d = two - ratio;
    (u * u + v * v) / two / (d * d)
}

/// `Σ_k |k||F̂(k)|² = (u² + v²)/2 · (2 − L/N)^{−2}`.
pub fn exact_c2_sum<T: Real>(spec: &MesoscopicSpec<T>) -> Result<T> {
    let ratio = spec.ratio();
    if !(ratio > T::zero() && ratio < T::one()) {
        return Err(invalid("l", "need 0 < L/N < 1"));
    }
    Ok(c2_closed(ratio, spec.u, spec.v))
}

/// The same sum routed through `A(x)`: `(u²+v²)/2 · (L/N)² · x^{−2} · A(x)`.
pub fn exact_c2_sum_via_series<T: Real>(spec: &MesoscopicSpec<T>) -> T {
    let x = spec.radius();
    let r = spec.ratio();
    let two = T::one() + T::one();
    (spec.u * spec.u + spec.v * spec.v) / two * r * r / (x * x) * series_a(x)
}

/// `lim_{L/N→0} Σ_k |k||F̂(k)|² = (u² + v²)/8`.
pub fn c2_sum_limit<T: Real>(u: T, v: T) -> T {
    c2_closed(T::zero(), u, v)
}

/// `M`, the least integer greater than `N/2`.
pub fn tail_start(n: usize) -> usize {
    n / 2 + 1
}

/// `Σ_{|k|>N/2} |k||F̂(k)|²` in closed form:
/// `(u²+v²)/2 · (L/N)² x^{−2} · x^{2M}(M + (1−M)x²) / ((L/N)²(2 − L/N)²)`, `x = 1 − L/N`.
pub fn tail_sum<T: Real>(spec: &MesoscopicSpec<T>) -> Result<T> {
    let ratio = spec.ratio();
    let half = T::lit(0.5);
    if !(ratio > T::zero() && ratio < half) {
        return Err(invalid("l", "need 0 < L/N < 1/2"));
    }
    let x = spec.radius();
    let m = tail_start(spec.n);
    let mf = T::from_usize_lossy(m);
    let two = T::one() + T::one();
    let pref = (spec.u * spec.u + spec.v * spec.v) / two * ratio * ratio / (x * x);
    let geometric = x.powi(2 * m as i32) * (mf + (T::one() - mf) * x * x);
    let denom = ratio * ratio * (two - ratio) * (two - ratio);
    Ok(pref * geometric / denom)
}

/// `tail_sum / (e^{−L}·L)`, the constant in the `e^{−L}L` decay.
pub fn tail_decay_constant<T: Real>(spec: &MesoscopicSpec<T>) -> Result<T> {
    Ok(tail_sum(spec)? / ((-spec.l).exp() * spec.l))
}

/// `C₁(F) = F̂(0)·N`; zero for this `F`.
pub fn soshnikov_c1<T: Real>(spec: &MesoscopicSpec<T>) -> T {
    fhat_closed(0, spec).re * T::from_usize_lossy(spec.n)
}

/// `(L/N)^ℓ Σ_{k>N/ℓ} k^{ℓ−1}(1 − L/N)^{2k}`, the majorant governing `C_ℓ` for `ℓ ≥ 3`.
pub fn cumulant_majorant<T: Real>(spec: &MesoscopicSpec<T>, ell: u32) -> T {
    let ratio = spec.ratio();
    let y = spec.radius() * spec.radius();
    let start = spec.n / ell as usize + 1;
    let mut acc = T::zero();
    let mut k = start;
    let mut power = y.powi(start as i32);
    loop {
        let term = T::from_usize_lossy(k).powi(ell as i32 - 1) * power;
        acc = acc + term;
        if term <= acc * T::epsilon() || power == T::zero() {
            break;
        }
        k += 1;
        power = power * y;
    }
    ratio.powi(ell as i32) * acc
}

/// `e^{−2L/ℓ} L^{ℓ−1}`.
pub fn cumulant_decay_rate<T: Real>(l: T, ell: u32) -> T {
    (-(l + l) / T::from_u32(ell).expect("small")).exp() * l.powi(ell as i32 - 1)
}
