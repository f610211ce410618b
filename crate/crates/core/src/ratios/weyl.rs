//! Averages of class functions over `U(N)`, `N ≤ 3`, by tensor trapezoid
//! quadrature against the Weyl density `Π_{j<k}|e^{iθ_j} − e^{iθ_k}|² / (N!(2π)^N)`.

use num_complex::Complex;

use super::RatioSpec;
use crate::error::{invalid, Result};
use crate::scalar::{unit, Real};

pub const MAX_WEYL_DIMENSION: usize = 3;
pub const DEFAULT_WEYL_GRID: usize = 400;

/// Quadrature value at `grid` points per axis, and at `grid/2` for comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylEstimate<T: Real> {
    pub value: Complex<T>,
    pub coarse: Complex<T>,
    /// `|value − coarse|`: the change from doubling the grid.
    pub self_consistency: T,
    pub grid: usize,
}

/// `θ_i = 2πi/m`.
pub fn grid_angles<T: Real>(m: usize) -> Vec<T> {
    let two_pi = T::PI() + T::PI();
    (0..m)
        .map(|i| two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(m))
        .collect()
}

/// Weyl average of `f`, which receives grid indices (one per eigenangle).
pub fn weyl_average_indexed<T: Real>(n: usize, m: usize, f: impl Fn(&[usize]) -> Complex<T>) -> Result<Complex<T>> {
    if n == 0 || n > MAX_WEYL_DIMENSION {
        return Err(invalid("n", format!("Weyl quadrature supports 1 <= N <= {MAX_WEYL_DIMENSION}")));
    }
    if m < 2 {
        return Err(invalid("grid", "need at least 2 points"));
    }
    // |e^{iθ_j} − e^{iθ_k}|² = 2 − 2cos(θ_j − θ_k) depends only on (j − k) mod m.
    let angles = grid_angles::<T>(m);
    let two = T::one() + T::one();
    let vdm: Vec<T> = angles.iter().map(|&d| two - two * d.cos()).collect();
    let diff = |j: usize, k: usize| vdm[(j + m - k) % m];

    let mut acc = Complex::new(T::zero(), T::zero());
    let mut idx = vec![0usize; n];
    match n {
        1 => {
            for i in 0..m {
                idx[0] = i;
                acc = acc + f(&idx);
            }
        }
        2 => {
            for i in 0..m {
                for j in 0..m {
                    let w = diff(i, j);
                    if w == T::zero() {
                        continue;
                    }
                    idx[0] = i;
                    idx[1] = j;
                    acc = acc + f(&idx) * w;
                }
            }
        }
        _ => {
            for i in 0..m {
                for j in 0..m {
                    let wij = diff(i, j);
                    if wij == T::zero() {
                        continue;
                    }
                    let mut row = Complex::new(T::zero(), T::zero());
                    for k in 0..m {
                        let w = wij * diff(i, k) * diff(j, k);
                        if w == T::zero() {
                            continue;
                        }
                        idx[0] = i;
                        idx[1] = j;
                        idx[2] = k;
                        row = row + f(&idx) * w;
                    }
                    acc = acc + row;
                }
            }
        }
    }
    let factorial = T::from_usize_lossy((1..=n).product());
    let cells = T::from_usize_lossy(m).powi(n as i32);
    Ok(acc / (factorial * cells))
}

/// Weyl average of a function of the eigenangles.
pub fn weyl_average<T: Real>(n: usize, m: usize, f: impl Fn(&[T]) -> Complex<T>) -> Result<Complex<T>> {
    let angles = grid_angles::<T>(m);
    weyl_average_indexed(n, m, |idx| {
        let mut theta = [T::zero(); MAX_WEYL_DIMENSION];
        for (slot, &i) in theta.iter_mut().zip(idx) {
            *slot = angles[i];
        }
        f(&theta[..idx.len()])
    })
}

/// One-point density of the eigenangles at `theta` (integrating out the others).
pub fn weyl_marginal_density<T: Real>(n: usize, theta: T, m: usize) -> Result<T> {
    if n == 0 || n > MAX_WEYL_DIMENSION {
        return Err(invalid("n", format!("Weyl quadrature supports 1 <= N <= {MAX_WEYL_DIMENSION}")));
    }
    let two_pi = T::PI() + T::PI();
    let angles = grid_angles::<T>(m);
    let vdm = |x: T, y: T| (unit(x) - unit(y)).norm_sqr();
    let others = n - 1;
    let mut acc = T::zero();
    match others {
        0 => acc = T::one(),
        1 => {
            for &a in &angles {
                acc = acc + vdm(theta, a);
            }
        }
        _ => {
            for &a in &angles {
                for &b in &angles {
                    acc = acc + vdm(theta, a) * vdm(theta, b) * vdm(a, b);
                }
            }
        }
    }
    let factorial = T::from_usize_lossy((1..=n).product());
    let cells = T::from_usize_lossy(m).powi(others as i32);
    // n symmetric slots, each with density (1/N!)·(2π)^{−N}·∫…; normalised per eigenangle.
    Ok(T::from_usize_lossy(n) * acc / (factorial * cells * two_pi) / T::from_usize_lossy(n))
}

fn j_weyl_at<T: Real>(spec: &RatioSpec<T>, m: usize) -> Result<Complex<T>> {
    let angles = grid_angles::<T>(m);
    // Per-grid-point factors 1/(e^{−α} − e^{iθ}) and 1/(e^{−β} − e^{−iθ}).
    let table = |shift: Complex<T>, sign: T| -> (Complex<T>, Vec<Complex<T>>) {
        let x = (-shift).exp();
        let column = angles.iter().map(|&t| (x - unit(sign * t)).inv()).collect();
        (-x, column)
    };
    let a_tables: Vec<_> = spec.shifts_a.iter().map(|&s| table(s, T::one())).collect();
    let b_tables: Vec<_> = spec.shifts_b.iter().map(|&s| table(s, -T::one())).collect();
    weyl_average_indexed(spec.n, m, |idx| {
        let mut product = Complex::new(T::one(), T::zero());
        for (weight, column) in a_tables.iter().chain(&b_tables) {
            let sum = idx
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, &i| acc + column[i]);
            product = product * *weight * sum;
        }
        product
    })
}

/// `J(A; B)` by Weyl quadrature at `grid` and `grid/2` points per axis.
pub fn j_weyl<T: Real>(spec: &RatioSpec<T>, grid: usize) -> Result<WeylEstimate<T>> {
    if spec.n > MAX_WEYL_DIMENSION {
        return Err(invalid("n", format!("Weyl quadrature supports N <= {MAX_WEYL_DIMENSION}")));
    }
    let value = j_weyl_at(spec, grid)?;
    let coarse = j_weyl_at(spec, grid / 2)?;
    Ok(WeylEstimate {
        value,
        coarse,
        self_consistency: (value - coarse).norm(),
        grid,
    })
}
