//! Exact enumeration of the ratios formula `J*(A; B)`.

use num_complex::Complex;

use super::zfn::{z_fn, z_logd, z_logd_prime};
use super::RatioSpec;
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Arguments of `Z†` below this modulus are the omitted `z(0)` factors.
pub const DAGGER_ZERO_TOL: f64 = 1e-12;

/// One `(S, T, matching)` contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct JStarTerm<T: Real> {
    pub subset_s: Vec<usize>,
    pub subset_t: Vec<usize>,
    /// `(α-index, β-index)` mixed pairs.
    pub matching: Vec<(usize, usize)>,
    pub singletons_a: Vec<usize>,
    pub singletons_b: Vec<usize>,
    pub value: Complex<T>,
}

fn members(mask: usize, len: usize) -> Vec<usize> {
    (0..len).filter(|i| mask & (1 << i) != 0).collect()
}

/// All partial matchings between `left` and `right`, as `(pairs, unmatched_left, unmatched_right)`.
fn partial_matchings(left: &[usize], right: &[usize]) -> Vec<(Vec<(usize, usize)>, Vec<usize>, Vec<usize>)> {
    fn recurse(
        left: &[usize],
        free: &mut Vec<usize>,
        pairs: &mut Vec<(usize, usize)>,
        lone: &mut Vec<usize>,
        out: &mut Vec<(Vec<(usize, usize)>, Vec<usize>, Vec<usize>)>,
    ) {
        let Some((&a, rest)) = left.split_first() else {
            out.push((pairs.clone(), lone.clone(), free.clone()));
            return;
        };
        lone.push(a);
        recurse(rest, free, pairs, lone, out);
        lone.pop();
        for i in 0..free.len() {
            let b = free.remove(i);
            pairs.push((a, b));
            recurse(rest, free, pairs, lone, out);
            pairs.pop();
            free.insert(i, b);
        }
    }
    let mut out = Vec::new();
    recurse(left, &mut right.to_vec(), &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

fn term_error(s: &[usize], t: &[usize], e: Error) -> Error {
    Error::Ratio(format!("term S={s:?} T={t:?}: {e}"))
}

/// `J*(A; B)` and its term-by-term trace.
pub fn j_star_traced<T: Real>(spec: &RatioSpec<T>) -> Result<(Complex<T>, Vec<JStarTerm<T>>)> {
    let (a, b) = (&spec.shifts_a, &spec.shifts_b);
    if a.len() != b.len() {
        return Err(Error::Ratio(format!("|A| = {} differs from |B| = {}", a.len(), b.len())));
    }
    if a.len() > super::MAX_SHIFTS {
        return Err(Error::Ratio(format!("at most {} shifts per side", super::MAX_SHIFTS)));
    }
    let n = T::from_usize_lossy(spec.n);
    let zero_tol = T::lit(DAGGER_ZERO_TOL);
    let cone = Complex::new(T::one(), T::zero());
    let mut total = CompensatedSum::new();
    let mut terms = Vec::new();

    for s_mask in 0..(1usize << a.len()) {
        for t_mask in 0..(1usize << b.len()) {
            if s_mask.count_ones() != t_mask.count_ones() {
                continue;
            }
            let s = members(s_mask, a.len());
            let t = members(t_mask, b.len());
            let fail = |e| term_error(&s, &t, e);

            let shift_sum = s.iter().map(|&i| a[i]).chain(t.iter().map(|&j| b[j])).fold(
                Complex::new(T::zero(), T::zero()),
                |acc, x| acc + x,
            );
            let mut prefactor = (-shift_sum * n).exp();
            for &i in &s {
                for &j in &t {
                    prefactor = prefactor * z_fn(a[i] + b[j]).map_err(fail)?;
                    prefactor = prefactor * z_fn(-a[i] - b[j]).map_err(fail)?;
                }
            }
            let mut dagger = cone;
            for side in [(&s, a), (&t, b)] {
                let (idx, shifts) = side;
                for &i in idx.iter() {
                    for &k in idx.iter() {
                        let arg = shifts[i] - shifts[k];
                        if arg.norm() < zero_tol {
                            continue;
                        }
                        dagger = dagger * z_fn(arg).map_err(fail)?;
                    }
                }
            }
            prefactor = prefactor / dagger;

            let rest_a: Vec<usize> = (0..a.len()).filter(|i| s_mask & (1 << i) == 0).collect();
            let rest_b: Vec<usize> = (0..b.len()).filter(|j| t_mask & (1 << j) == 0).collect();

            // Singleton blocks do not depend on the matching; cache them.
            let mut h_alpha = vec![Complex::new(T::zero(), T::zero()); a.len()];
            for &i in &rest_a {
                let mut h = Complex::new(T::zero(), T::zero());
                for &k in &s {
                    h = h + z_logd(a[i] - a[k]).map_err(fail)?;
                }
                for &j in &t {
                    h = h - z_logd(a[i] + b[j]).map_err(fail)?;
                }
                h_alpha[i] = h;
            }
            let mut h_beta = vec![Complex::new(T::zero(), T::zero()); b.len()];
            for &j in &rest_b {
                let mut h = Complex::new(T::zero(), T::zero());
                for &l in &t {
                    h = h + z_logd(b[j] - b[l]).map_err(fail)?;
                }
                for &k in &s {
                    h = h - z_logd(b[j] + a[k]).map_err(fail)?;
                }
                h_beta[j] = h;
            }

            for (pairs, lone_a, lone_b) in partial_matchings(&rest_a, &rest_b) {
                let mut product = prefactor;
                for &(i, j) in &pairs {
                    product = product * z_logd_prime(a[i] + b[j]).map_err(fail)?;
                }
                for &i in &lone_a {
                    product = product * h_alpha[i];
                }
                for &j in &lone_b {
                    product = product * h_beta[j];
                }
                total.add(product);
                terms.push(JStarTerm {
                    subset_s: s.clone(),
                    subset_t: t.clone(),
                    matching: pairs,
                    singletons_a: lone_a,
                    singletons_b: lone_b,
                    value: product,
                });
            }
        }
    }
    Ok((total.total(), terms))
}

/// `J*(A; B)`.
pub fn j_star<T: Real>(spec: &RatioSpec<T>) -> Result<Complex<T>> {
    j_star_traced(spec).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn real(xs: &[f64]) -> Vec<Complex<f64>> {
        xs.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn empty_sets_give_one() {
        let spec = RatioSpec::new(vec![], vec![], 5).unwrap();
        let (v, terms) = j_star_traced(&spec).unwrap();
        assert_eq!(v, Complex::new(1.0, 0.0));
        assert_eq!(terms.len(), 1);
    }

    #[test]
    fn one_by_one_closed_form() {
        // S = T = ∅ contributes (z'/z)'(α+β) (the singleton split is zero);
        // S = {α}, T = {β} contributes e^{−N(α+β)} z(α+β) z(−α−β).
        for (alpha, beta, n) in [(0.2, 0.2, 2usize), (0.3, 0.45, 3), (0.1, 0.6, 7)] {
            let spec = RatioSpec::new(real(&[alpha]), real(&[beta]), n).unwrap();
            let x = Complex::new(alpha + beta, 0.0);
            let expected = z_logd_prime(x).unwrap()
                + (-x * n as f64).exp() * z_fn(x).unwrap() * z_fn(-x).unwrap();
            let got = j_star(&spec).unwrap();
            assert!((got - expected).norm() < 1e-13 * expected.norm());
            // For N = 1 this reduces to e^{−x}/(1 − e^{−x}) by direct expansion.
        }
        let spec = RatioSpec::new(real(&[0.3]), real(&[0.4]), 1).unwrap();
        let x: f64 = 0.7;
        let direct = (-x).exp() / (1.0 - (-x).exp());
        assert!((j_star(&spec).unwrap().re - direct).abs() < 1e-13);
    }

    #[test]
    fn term_count_matches_direct_count() {
        // Independent count: Σ_{|S|=|T|=s} C(2,s)² · #partial matchings of (2−s)×(2−s).
        fn binom(n: usize, k: usize) -> usize {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        fn matchings(m: usize) -> usize {
            (0..=m).map(|k| binom(m, k) * binom(m, k) * (1..=k).product::<usize>()).sum()
        }
        let expected: usize = (0..=2).map(|s| binom(2, s) * binom(2, s) * matchings(2 - s)).sum();
        assert_eq!(expected, 16);
        let spec = RatioSpec::new(real(&[0.3, 0.5]), real(&[0.4, 0.6]), 3).unwrap();
        let (_, terms) = j_star_traced(&spec).unwrap();
        assert_eq!(terms.len(), expected);
        let distinct: BTreeSet<_> = terms
            .iter()
            .map(|t| (t.subset_s.clone(), t.subset_t.clone(), t.matching.clone()))
            .collect();
        assert_eq!(distinct.len(), expected);
        for t in &terms {
            assert_eq!(t.subset_s.len(), t.subset_t.len());
            let mut seen_a: Vec<usize> = t.subset_s.iter().chain(&t.singletons_a).copied().collect();
            seen_a.extend(t.matching.iter().map(|p| p.0));
            seen_a.sort();
            assert_eq!(seen_a, vec![0, 1]);
            let mut seen_b: Vec<usize> = t.subset_t.iter().chain(&t.singletons_b).copied().collect();
            seen_b.extend(t.matching.iter().map(|p| p.1));
            seen_b.sort();
            assert_eq!(seen_b, vec![0, 1]);
        }
        let three = RatioSpec::new(real(&[0.1, 0.2, 0.3]), real(&[0.4, 0.5, 0.6]), 3).unwrap();
        let count3: usize = (0..=3).map(|s| binom(3, s) * binom(3, s) * matchings(3 - s)).sum();
        assert_eq!(j_star_traced(&three).unwrap().1.len(), count3);
    }

    #[test]
    fn conjugation_symmetry() {
        let a = vec![Complex::new(0.3, 0.2), Complex::new(0.5, -0.1)];
        let b = vec![Complex::new(0.4, 0.05), Complex::new(0.6, 0.3)];
        let j = j_star(&RatioSpec::new(a.clone(), b.clone(), 3).unwrap()).unwrap();
        let conj = |v: &Vec<Complex<f64>>| v.iter().map(|x| x.conj()).collect::<Vec<_>>();
        let swapped = j_star(&RatioSpec::new(conj(&b), conj(&a), 3).unwrap()).unwrap();
        assert!((swapped - j.conj()).norm() < 1e-10 * j.norm().max(1.0));
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let spec = RatioSpec::new(real(&[0.3]), real(&[0.4, 0.5]), 3).unwrap();
        assert!(j_star(&spec).is_err());
    }

    #[test]
    fn dagger_pole_reported_with_term() {
        // Shifts differing by 2πi make z(α − α') singular.
        let a = vec![Complex::new(0.3, 0.0), Complex::new(0.3, 2.0 * std::f64::consts::PI)];
        let b = real(&[0.4, 0.5]);
        let err = j_star(&RatioSpec::new(a, b, 2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Ratio(ref m) if m.contains("term S=")), "{err}");
    }
}
