//! Estimators used by the Monte Carlo campaigns: batch-means standard errors,
//! k-statistics, Kolmogorov–Smirnov tests and empirical characteristic
//! functions.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{unit, Real};

pub const DEFAULT_BATCHES: usize = 50;

/// Mean of i.i.d. draws with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Contiguous near-equal batches (sizes differ by at most one).
fn batch_ranges(n: usize, batches: usize) -> Vec<std::ops::Range<usize>> {
    let b = batches.clamp(1, n.max(1));
    (0..b).map(|k| (k * n / b)..((k + 1) * n / b)).collect()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

/// Overall mean with the standard error computed from the spread of batch means.
pub fn batch_means<T: Real>(values: &[T], batches: usize) -> Result<MeanEstimate> {
    if values.is_empty() {
        return Err(Error::NoSamples);
    }
    let n = values.len();
    let mean = values.iter().map(|x| x.to_f64_lossy()).sum::<f64>() / n as f64;
    let batch_avgs: Vec<f64> = batch_ranges(n, batches)
        .into_iter()
        .map(|r| {
            let len = r.len() as f64;
            values[r].iter().map(|x| x.to_f64_lossy()).sum::<f64>() / len
        })
        .collect();
    let (_, std_error) = mean_and_se(&batch_avgs);
    Ok(MeanEstimate {
        mean,
        std_error,
        count: n,
    })
}

/// Whether the largest 1% of `values` (non-negative) carry more than half the total.
pub fn heavy_tailed(values: &[f64]) -> bool {
    if values.is_empty() {
        return false;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let top = (values.len() / 100).max(1);
    let total: f64 = sorted.iter().sum();
    total > 0.0 && sorted[..top].iter().sum::<f64>() > 0.5 * total
}

/// Cumulant estimate of one order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimate {
    pub order: usize,
    pub value: f64,
    pub std_error: f64,
    pub sample_count: usize,
}

pub const MAX_CUMULANT_ORDER: usize = 6;

/// Point estimates of cumulants `1..=max_order`: k-statistics through order 4,
/// central-moment polynomials for orders 5 and 6.
pub fn cumulant_point_estimates(values: &[f64], max_order: usize) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut m = [0.0f64; MAX_CUMULANT_ORDER + 1];
    for &x in values {
        let d = x - mean;
        let mut p = 1.0;
        for slot in m.iter_mut().skip(1) {
            p *= d;
            *slot += p;
        }
    }
    for slot in m.iter_mut() {
        *slot /= n;
    }
    let (m2, m3, m4, m5, m6) = (m[2], m[3], m[4], m[5], m[6]);
    (1..=max_order)
        .map(|order| match order {
            1 => mean,
            2 => n / (n - 1.0) * m2,
            3 => n * n / ((n - 1.0) * (n - 2.0)) * m3,
            4 => n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0)),
            5 => m5 - 10.0 * m3 * m2,
            6 => m6 - 15.0 * m4 * m2 - 10.0 * m3 * m3 + 30.0 * m2 * m2 * m2,
            _ => unreachable!("order bounded by MAX_CUMULANT_ORDER"),
        })
        .collect()
}

/// Cumulants with batch-means standard errors.
///
/// Uses 50 batches when every batch keeps at least `2·max_order` samples,
/// fewer otherwise.
pub fn empirical_cumulants<T: Real>(values: &[T], max_order: usize) -> Result<Vec<CumulantEstimate>> {
    if max_order == 0 || max_order > MAX_CUMULANT_ORDER {
        return Err(invalid("max_order", format!("must be in 1..={MAX_CUMULANT_ORDER}")));
    }
    let required = 10 * max_order;
    if values.len() < required {
        return Err(Error::InsufficientSamples {
            required,
            got: values.len(),
        });
    }
    let xs: Vec<f64> = values.iter().map(|x| x.to_f64_lossy()).collect();
    let n = xs.len();
    let point = cumulant_point_estimates(&xs, max_order);
    let batches = DEFAULT_BATCHES.min(n / (2 * max_order)).max(2);
    let per_batch: Vec<Vec<f64>> = batch_ranges(n, batches)
        .into_iter()
        .map(|r| cumulant_point_estimates(&xs[r], max_order))
        .collect();
    Ok((0..max_order)
        .map(|k| {
            let column: Vec<f64> = per_batch.iter().map(|b| b[k]).collect();
            let (_, std_error) = mean_and_se(&column);
            CumulantEstimate {
                order: k + 1,
                value: point[k],
                std_error,
                sample_count: n,
            }
        })
        .collect())
}

/// Sample covariance with a batch-means standard error.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<MeanEstimate> {
    if xs.len() != ys.len() {
        return Err(invalid("ys", "length differs from xs"));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let products: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let est = batch_means(&products, DEFAULT_BATCHES)?;
    Ok(MeanEstimate {
        mean: est.mean * n / (n - 1.0),
        ..est
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`, the Kolmogorov survival function.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // Series is alternating with terms near 1; the complement form converges fast here.
        let s: f64 = (1..=20)
            .map(|k| {
                let t = (2 * k - 1) as f64 * std::f64::consts::PI / (8.0f64.sqrt() * lambda);
                (-t * t).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut total = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        total += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * total).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// KS test of `values` against `cdf`, p-value from the asymptotic Kolmogorov
/// law with Stephens' small-sample correction of the argument.
pub fn ks_test(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if values.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let root = n.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
        n: sorted.len(),
    })
}

/// `(1/n) Σ e^{i(u x_k + v y_k)}`.
pub fn empirical_cf(xs: &[f64], ys: &[f64], u: f64, v: f64) -> Complex<f64> {
    let n = xs.len() as f64;
    xs.iter()
        .zip(ys)
        .fold(Complex::new(0.0, 0.0), |acc, (x, y)| acc + unit(u * x + v * y))
        / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn single_value_has_zero_error() {
        let m = batch_means(&[4.0f64], DEFAULT_BATCHES).unwrap();
        assert_eq!((m.mean, m.std_error, m.count), (4.0, 0.0, 1));
    }

    #[test]
    fn batch_means_matches_iid_error_for_iid_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = Normal::new(0.0, 2.0).unwrap();
        let xs: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng)).collect();
        let m = batch_means(&xs, 50).unwrap();
        let iid = 2.0 / (xs.len() as f64).sqrt();
        assert!((m.std_error / iid - 1.0).abs() < 0.35, "{} vs {iid}", m.std_error);
    }

    #[test]
    fn constant_list_cumulants() {
        let xs = vec![3.5f64; 200];
        let c = empirical_cumulants(&xs, 6).unwrap();
        assert_eq!(c[0].value, 3.5);
        for k in &c[1..] {
            assert!(k.value.abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn too_few_samples() {
        let xs = vec![1.0f64, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            empirical_cumulants(&xs, 6),
            Err(Error::InsufficientSamples { required: 60, got: 5 })
        ));
        assert!(empirical_cumulants(&xs, 7).is_err());
    }

    #[test]
    fn k_statistics_on_a_known_sample() {
        // Reference values from scipy.stats.kstat.
        let xs = [1.0, 2.0, 3.0, 4.0, 10.0];
        let k = cumulant_point_estimates(&xs, 4);
        for (got, want) in k.iter().zip([4.0, 12.5, 75.0, 492.5]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn synthetic_normal_cumulants() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = Normal::new(0.0, (0.125f64).sqrt()).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let c = empirical_cumulants(&xs, 4).unwrap();
        assert!((c[1].value - 0.125).abs() < 3.0 * c[1].std_error, "{:?}", c[1]);
        assert!(c[2].value.abs() < 3.0 * c[2].std_error, "{:?}", c[2]);
        assert!(c[3].value.abs() < 3.0 * c[3].std_error, "{:?}", c[3]);
        assert!(c.iter().all(|k| k.std_error > 0.0));
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Tabulated: Q(1.36) ≈ 0.0494, Q(1.63) ≈ 0.0098.
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_survival(1.63) - 0.0098).abs() < 3e-4);
        // Both branches agree where they meet.
        let a = kolmogorov_survival(0.2 - 1e-12);
        let b = kolmogorov_survival(0.2);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = rand_distr::Uniform::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..5_000).map(|_| d.sample(&mut rng)).collect();
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        assert!(ks_test(&xs, cdf).unwrap().p_value > 0.001);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.9).collect();
        assert!(ks_test(&shifted, cdf).unwrap().p_value < 1e-6);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        let p = normal_cdf(1.96);
        assert!((p - 0.975_002_104_851_779_5).abs() < 1e-11, "{p}");
    }

    #[test]
    fn ecf_at_origin_is_one() {
        let xs = [0.3, -1.0, 2.0];
        assert_eq!(empirical_cf(&xs, &xs, 0.0, 0.0), Complex::new(1.0, 0.0));
    }

    #[test]
    fn heavy_tail_flag() {
        let mut xs = vec![1.0; 199];
        xs.push(1000.0);
        assert!(heavy_tailed(&xs));
        assert!(!heavy_tailed(&[1.0; 200]));
    }
}
