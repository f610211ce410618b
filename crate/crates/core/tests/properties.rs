use std::f64::consts::PI;

use cue_spectra::clt::{exact_c2_sum, fhat_closed};
use cue_spectra::logderiv::{
    lattice_real_part_terms, log_deriv, q_log_deriv_direct, s_n_f, s_n_g, s_n_h, MesoscopicSpec,
};
use cue_spectra::ratios::{j_star, RatioSpec};
use cue_spectra::sampler::wrap_angle;
use cue_spectra::selberg::{decompose, IDENTITY_TOL};
use cue_spectra::{Angles, Complex};
use proptest::prelude::*;

fn spectrum(max: usize) -> impl Strategy<Value = Angles> {
    prop::collection::vec(-10.0f64..10.0, 1..max).prop_map(|v| Angles::from_unsorted(v).unwrap())
}

proptest! {
    #[test]
    fn wrapped_angles_stay_in_range(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        let turns = (x - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn adjoint_conjugates_log_derivative(a in spectrum(12), r in 0.0f64..0.95, phi in -3.0f64..3.0) {
        let z = Complex::from_polar(r, phi);
        let lhs = log_deriv(&a.adjoint(), z.conj()).unwrap();
        let rhs = log_deriv(&a, z).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn statistic_splits_into_parts(a in spectrum(40), u in -3.0f64..3.0, v in -3.0f64..3.0, l in 1.5f64..10.0) {
        let spec = MesoscopicSpec::new(64, l, u, v).unwrap();
        let f = s_n_f(&a, &spec);
        prop_assert!((s_n_g(&a, &spec) - f.re).abs() <= 1e-12 * (1.0 + f.re.abs()));
        prop_assert!((s_n_h(&a, &spec) - f.im).abs() <= 1e-12 * (1.0 + f.im.abs()));
    }

    #[test]
    fn fourier_coefficients_are_hermitian(k in 1i64..200, u in -2.0f64..2.0, v in -2.0f64..2.0, l in 1.5f64..30.0) {
        let spec = MesoscopicSpec::new(64, l, u, v).unwrap();
        let plus = fhat_closed(k, &spec);
        let minus = fhat_closed(-k, &spec);
        prop_assert!((minus - plus.conj()).norm() <= 1e-15);
        prop_assert!(exact_c2_sum(&spec).unwrap() >= 0.0);
    }

    #[test]
    fn decomposition_is_exact(a in spectrum(30), c in 0.01f64..1.0, t in 0.0f64..1.0) {
        let n = a.n().max(2);
        let z = 1.0 - t / n as f64;
        // Skip evaluation points sitting on an eigenvalue.
        prop_assume!(a.eigenvalues().all(|w| (w - z).norm() > 1e-6));
        let d = decompose(&a, Complex::new(z, 0.0), c).unwrap();
        prop_assert!(d.holds(IDENTITY_TOL));
    }

    #[test]
    fn lattice_terms_negative_inside(a in spectrum(10), s in -2.0f64..-0.01) {
        let re = lattice_real_part_terms(&a, s, 200);
        prop_assert!(re < 0.0);
        let direct = q_log_deriv_direct(&a, Complex::new(s, 0.0)).unwrap();
        prop_assert!(direct.re <= a.n() as f64 / 2.0 + 1e-9);
    }

    #[test]
    fn j_star_respects_conjugation(a in 0.05f64..1.0, b in 0.05f64..1.0, ai in -1.0f64..1.0, bi in -1.0f64..1.0, n in 1usize..6) {
        let spec = RatioSpec::new(vec![Complex::new(a, ai)], vec![Complex::new(b, bi)], n).unwrap();
        let conj = RatioSpec::new(vec![Complex::new(a, -ai)], vec![Complex::new(b, -bi)], n).unwrap();
        let (x, y) = (j_star(&spec).unwrap(), j_star(&conj).unwrap());
        prop_assert!((x - y.conj()).norm() <= 1e-9 * (1.0 + x.norm()));
    }
}
