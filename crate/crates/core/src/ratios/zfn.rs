use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Closest admissible distance to a pole `2πin` of `z`.
pub const Z_POLE_TOL: f64 = 1e-8;

fn check_pole<T: Real>(x: Complex<T>) -> Result<()> {
    let two_pi = T::PI() + T::PI();
    let nearest = (x.im / two_pi).round() * two_pi;
    let distance = Complex::new(x.re, x.im - nearest).norm();
    if distance < T::lit(Z_POLE_TOL) {
        return Err(Error::Ratio(format!(
            "z evaluated within {:e} of a pole at x = {}",
            distance.to_f64_lossy(),
            x
        )));
    }
    Ok(())
}

fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// `z(x) = (1 − e^{−x})^{−1}`.
pub fn z_fn<T: Real>(x: Complex<T>) -> Result<Complex<T>> {
    check_pole(x)?;
    Ok((one::<T>() - (-x).exp()).inv())
}

/// `z'/z(x) = −1/(e^x − 1)`.
pub fn z_logd<T: Real>(x: Complex<T>) -> Result<Complex<T>> {
    check_pole(x)?;
    Ok(-(x.exp() - one::<T>()).inv())
}

/// `(z'/z)'(x) = e^x/(e^x − 1)²`.
pub fn z_logd_prime<T: Real>(x: Complex<T>) -> Result<Complex<T>> {
    check_pole(x)?;
    let e = x.exp();
    let d = e - one::<T>();
    Ok(e / (d * d))
}
