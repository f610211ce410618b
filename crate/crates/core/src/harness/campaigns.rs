//! Per-campaign statistics. Each matrix size `N` in the config gets its own
//! substream `(seed, i)`; all grid points at that size share its spectra.

use std::f64::consts::PI;

use num_complex::Complex;

use super::config::{ExperimentConfig, LChoice};
use super::record::StatRow;
use crate::clt::{clt_report_from_values, draw_linear_statistics, fhat_closed, DEFAULT_UV_GRID};
use crate::error::Result;
use crate::logderiv::{
    lattice_tail_remainder, q_log_deriv_direct, q_log_deriv_lattice, MesoscopicSpec, DEFAULT_LATTICE_TERMS,
};
use crate::ratios::{
    estimate_from_values, j_star, j_weyl, ratio_integrand, scaled_j_star, RatioSpec, DEFAULT_WEYL_GRID,
    MAX_WEYL_DIMENSION,
};
use crate::sampler::{eigenangles, map_spectra, map_unitaries, RngStream};
use crate::selberg::{
    claim_ratio, decompose, positivity_margin, wk_chain, z0, MomentEstimate, DEFAULT_GRID_POINTS, IDENTITY_TOL,
};
use crate::stats::{batch_means, ks_test, DEFAULT_BATCHES};

/// Angle rows are written only while `samples·N` stays below this.
pub const MAX_ANGLE_ROWS: usize = 4096;
/// Lattice sums are checked on this many leading samples per size.
pub const LATTICE_SAMPLES: usize = 100;
pub const KS_THRESHOLD: f64 = 1e-3;
pub const SE_MULTIPLIER: f64 = 3.0;
/// Consecutive-`N` moment ratios must stay within this factor.
pub const SCALING_FACTOR: f64 = 2.0;
/// Bound on max/min of the normalised moment over the whole grid.
pub const GRID_SPREAD: f64 = 50.0;
pub const RATIO_REL_TOL: f64 = 1e-6;

/// Monte Carlo checks are asserted only from this many samples on.
const MIN_ASSERTED_SAMPLES: usize = 100;

fn sorted_sizes(config: &ExperimentConfig) -> Vec<(u64, usize)> {
    let mut sizes: Vec<(u64, usize)> = config.n.iter().enumerate().map(|(i, &n)| (i as u64, n)).collect();
    sizes.sort_by_key(|&(_, n)| n);
    sizes
}

pub fn sample(config: &ExperimentConfig) -> Result<Vec<StatRow>> {
    let mut rows = Vec::new();
    for (i, n) in sorted_sizes(config) {
        let stream = RngStream::new(config.seed, i);
        let draws = map_unitaries(n, &stream, config.samples, config.workers, |_, u| {
            eigenangles(u).map(|a| (u.trace().norm_sqr(), a))
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let traces: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let est = batch_means(&traces, DEFAULT_BATCHES)?;
        let name = format!("n={n} trace_abs_sq_mean");
        rows.push(if config.samples >= MIN_ASSERTED_SAMPLES {
            StatRow::within_se(name, est.mean, est.std_error, 1.0, SE_MULTIPLIER)
        } else {
            StatRow::info(name, est.mean).with_se(est.std_error)
        });

        let pooled: Vec<f64> = draws.iter().flat_map(|d| d.1.as_slice().iter().copied()).collect();
        let ks = ks_test(&pooled, |x| (x + PI) / (2.0 * PI))?;
        let name = format!("n={n} angle_uniform_ks_p");
        rows.push(if pooled.len() >= MIN_ASSERTED_SAMPLES {
            StatRow::above(name, ks.p_value, KS_THRESHOLD)
        } else {
            StatRow::info(name, ks.p_value)
        });

        // Nearest-neighbour repulsion: unfolded spacings below 0.1 (≈ 0.095 for
        // independent points, ≈ 1e-3 for this ensemble).
        let mut small = 0usize;
        for d in &draws {
            let t = d.1.as_slice();
            for j in 0..t.len() {
                let next = if j + 1 < t.len() { t[j + 1] } else { t[0] + 2.0 * PI };
                if (next - t[j]) * n as f64 / (2.0 * PI) < 0.1 {
                    small += 1;
                }
            }
        }
        rows.push(StatRow::info(format!("n={n} small_spacing_fraction"), small as f64 / pooled.len() as f64));

        if pooled.len() <= MAX_ANGLE_ROWS {
            for (s, d) in draws.iter().enumerate() {
                for (j, &theta) in d.1.as_slice().iter().enumerate() {
                    rows.push(StatRow::info(format!("n={n} sample={s} theta[{j}]"), theta));
                }
            }
        }
    }
    Ok(rows)
}

struct Thm1Sample {
    abs_sq: Vec<f64>,
    max_residual: Vec<f64>,
    claim: f64,
    margin: f64,
}

pub fn thm1(config: &ExperimentConfig) -> Result<Vec<StatRow>> {
    let mut rows = Vec::new();
    // normalised moment per (c, k), indexed by position in the size list.
    let mut grid: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); config.k_moment.len()]; config.c.len()];
    let mut claims = Vec::new();
    let z = Complex::new(config.z, 0.0);
    let sizes = sorted_sizes(config);
    for &(i, n) in &sizes {
        let stream = RngStream::new(config.seed, i);
        let draws = map_spectra(n, &stream, config.samples, config.workers, |_, a| -> Result<Thm1Sample> {
            let mut abs_sq = Vec::with_capacity(config.c.len());
            let mut max_residual = Vec::with_capacity(config.c.len());
            for &c in &config.c {
                let d = decompose(&a, z, c)?;
                abs_sq.push(d.error.norm_sqr());
                max_residual.push(d.split_residual().max(d.error_residual()));
            }
            Ok(Thm1Sample {
                abs_sq,
                max_residual,
                claim: claim_ratio(&a)?,
                margin: positivity_margin(&a)?,
            })
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        for (ci, &c) in config.c.iter().enumerate() {
            let abs_sq: Vec<f64> = draws.iter().map(|d| d.abs_sq[ci]).collect();
            for (ki, &k) in config.k_moment.iter().enumerate() {
                let m = MomentEstimate::from_abs_squared(&abs_sq, n, c, k)?;
                let tag = format!("n={n} c={c} k={k}");
                rows.push(StatRow::info(format!("{tag} moment"), m.mean).with_se(m.std_error));
                rows.push(StatRow::info(format!("{tag} normalized_moment"), m.normalized).with_se(m.normalized_std_error));
                rows.push(StatRow::info(format!("{tag} heavy_tail_warning"), m.heavy_tail_warning as u8 as f64));
                grid[ci][ki].push(m.normalized);
            }
            let residual = draws.iter().map(|d| d.max_residual[ci]).fold(0.0, f64::max);
            rows.push(StatRow::at_most(format!("n={n} c={c} identity_residual_max"), residual, IDENTITY_TOL));
        }
        let claim = draws.iter().map(|d| d.claim).fold(0.0, f64::max);
        claims.push(claim);
        rows.push(StatRow::info(format!("n={n} claim_ratio_max"), claim));
        let margin = draws.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min);
        rows.push(StatRow::above(format!("n={n} positivity_margin_min"), margin, 0.0));
    }

    for (ci, &c) in config.c.iter().enumerate() {
        for (ki, &k) in config.k_moment.iter().enumerate() {
            for (w, pair) in grid[ci][ki].windows(2).enumerate() {
                let name = format!("c={c} k={k} n={}/n={} normalized_moment_ratio", sizes[w + 1].1, sizes[w].1);
                let ratio = pair[1] / pair[0];
                rows.push(if k == 1 {
                    StatRow::within_factor(name, ratio, 1.0, SCALING_FACTOR)
                } else {
                    StatRow::info(name, ratio)
                });
            }
        }
    }
    for (ki, &k) in config.k_moment.iter().enumerate() {
        let all: Vec<f64> = grid.iter().flat_map(|per_c| per_c[ki].iter().copied()).collect();
        let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = all.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(StatRow::info(format!("k={k} normalized_moment_grid_max"), max));
        if all.len() > 1 {
            let name = format!("k={k} normalized_moment_grid_spread");
            rows.push(if k == 1 {
                StatRow::at_most(name, max / min, GRID_SPREAD)
            } else {
                StatRow::info(name, max / min)
            });
        }
    }
    for (w, pair) in claims.windows(2).enumerate() {
        rows.push(StatRow::at_most(
            format!("n={}/n={} claim_ratio_max_growth", sizes[w + 1].1, sizes[w].1),
            pair[1] / pair[0],
            SCALING_FACTOR,
        ));
    }
    Ok(rows)
}

pub fn clt(config: &ExperimentConfig) -> Result<Vec<StatRow>> {
    let mut rows = Vec::new();
    let mut previous: Option<(usize, f64)> = None;
    let l_choice = config.l.unwrap_or(LChoice::Sqrt);
    for (i, n) in sorted_sizes(config) {
        let l = l_choice.resolve(n);
        let spec = MesoscopicSpec::new(n, l, 1.0, 0.0)?;
        let stream = RngStream::new(config.seed, i);
        let (gs, hs) = draw_linear_statistics(&spec, &stream, config.samples, config.workers)?;
        let report = clt_report_from_values(&spec, &DEFAULT_UV_GRID, &gs, &hs)?;
        let tag = format!("n={n} l={l}");
        rows.push(StatRow::info(format!("{tag} exact_c2"), report.exact_c2));
        rows.push(StatRow::info(format!("{tag} tail"), report.tail));
        for (label, marginal, (u, v)) in [("g", &report.g, (1.0, 0.0)), ("h", &report.h, (0.0, 1.0))] {
            let mean_target = n as f64 * fhat_closed(0, &spec.with_uv(u, v)).re;
            let k = &marginal.cumulants;
            rows.push(StatRow::within_se(format!("{tag} {label} mean"), k[0].value, k[0].std_error, mean_target, SE_MULTIPLIER));
            rows.push(StatRow::within_se(format!("{tag} {label} var"), k[1].value, k[1].std_error, report.exact_c2, SE_MULTIPLIER));
            rows.push(StatRow::within_se(format!("{tag} {label} c3"), k[2].value, k[2].std_error, 0.0, SE_MULTIPLIER));
            rows.push(StatRow::within_se(format!("{tag} {label} c4"), k[3].value, k[3].std_error, 0.0, SE_MULTIPLIER));
            rows.push(StatRow::above(format!("{tag} {label} ks_p"), marginal.ks_analytic.p_value, KS_THRESHOLD));
            rows.push(StatRow::info(format!("{tag} {label} ks_p_limit_variance"), marginal.ks_limit.p_value));
        }
        let cov = &report.covariance;
        rows.push(StatRow::within_se(format!("{tag} cov"), cov.mean, cov.std_error, 0.0, SE_MULTIPLIER));
        rows.push(StatRow::info(format!("{tag} max_ecf_deviation"), report.max_ecf_deviation));
        if let Some((prev_n, prev)) = previous {
            rows.push(StatRow::at_most(
                format!("n={n} vs n={prev_n} max_ecf_deviation"),
                report.max_ecf_deviation,
                prev,
            ));
        }
        previous = Some((n, report.max_ecf_deviation));
    }
    Ok(rows)
}

const SHIFTS_A: [f64; 3] = [0.3, 0.5, 0.7];
const SHIFTS_B: [f64; 3] = [0.4, 0.6, 0.8];

pub fn ratio_spec(n: usize, k: usize) -> Result<RatioSpec<f64>> {
    RatioSpec::real(&SHIFTS_A[..k], &SHIFTS_B[..k], n)
}

pub fn ratios(config: &ExperimentConfig) -> Result<Vec<StatRow>> {
    let mut rows = Vec::new();
    for (i, n) in sorted_sizes(config) {
        let specs = config
            .k_moment
            .iter()
            .map(|&k| ratio_spec(n, k as usize))
            .collect::<Result<Vec<_>>>()?;
        let stream = RngStream::new(config.seed, i);
        let draws = map_spectra(n, &stream, config.samples, config.workers, |_, a| {
            specs.iter().map(|s| ratio_integrand(&a, s)).collect::<Vec<_>>()
        })?;
        for (si, spec) in specs.iter().enumerate() {
            let k = spec.order();
            let tag = format!("n={n} k={k}");
            let exact = j_star(spec)?;
            rows.push(StatRow::info(format!("{tag} j_star re"), exact.re));
            rows.push(StatRow::info(format!("{tag} j_star im"), exact.im));
            let values: Vec<Complex<f64>> = draws.iter().map(|d| d[si]).collect();
            let est = estimate_from_values(&values);
            rows.push(StatRow::within_se(format!("{tag} monte_carlo re"), est.mean.re, est.std_error_re, exact.re, SE_MULTIPLIER));
            rows.push(StatRow::within_se(format!("{tag} monte_carlo im"), est.mean.im, est.std_error_im, exact.im, SE_MULTIPLIER));
            if n <= MAX_WEYL_DIMENSION {
                let w = j_weyl(spec, DEFAULT_WEYL_GRID)?;
                rows.push(StatRow::info(format!("{tag} weyl_grid_change"), w.self_consistency));
                rows.push(StatRow::at_most(
                    format!("{tag} weyl_relative_difference"),
                    (w.value - exact).norm() / exact.norm(),
                    RATIO_REL_TOL,
                ));
            }
            for d in [1.0, 2.0, 4.0] {
                rows.push(StatRow::info(
                    format!("{tag} delta={d}/n scaled_j_star"),
                    scaled_j_star(n, k, d / n as f64)?,
                ));
            }
        }
    }
    Ok(rows)
}

struct IdentitySample {
    /// Plain truncation error and error after adding the tail estimate, per `s`.
    lattice: Option<[[f64; 2]; 2]>,
    /// Per `c`, per `z`.
    residuals: Vec<[f64; 3]>,
    /// Per `K`: chain holds and is certified; spacing over `r`.
    chains: Vec<(bool, Option<f64>)>,
}

pub fn identities(config: &ExperimentConfig) -> Result<Vec<StatRow>> {
    let mut rows = Vec::new();
    for (i, n) in sorted_sizes(config) {
        let zs = {
            let lo: f64 = z0(n);
            [lo, 0.5 * (lo + 1.0), 1.0]
        };
        let s_points = [Complex::new(z0::<f64>(n).ln(), 0.0), Complex::new(-0.1, 0.3)];
        let stream = RngStream::new(config.seed, i);
        let draws = map_spectra(n, &stream, config.samples, config.workers, |idx, a| -> Result<IdentitySample> {
            let lattice = if idx < LATTICE_SAMPLES {
                let mut errs = [[0.0; 2]; 2];
                for (e, &s) in errs.iter_mut().zip(&s_points) {
                    let direct = q_log_deriv_direct(&a, s)?;
                    let lattice = q_log_deriv_lattice(&a, s, DEFAULT_LATTICE_TERMS)?;
                    let tail = lattice_tail_remainder(&a, s, DEFAULT_LATTICE_TERMS);
                    *e = [
                        (lattice - direct).norm() / direct.norm(),
                        (lattice + tail - direct).norm() / direct.norm(),
                    ];
                }
                Some(errs)
            } else {
                None
            };
            let mut residuals = Vec::with_capacity(config.c.len());
            for &c in &config.c {
                let mut r = [0.0; 3];
                for (slot, &z) in r.iter_mut().zip(&zs) {
                    let d = decompose(&a, Complex::new(z, 0.0), c)?;
                    *slot = d.split_residual().max(d.error_residual());
                }
                residuals.push(r);
            }
            let chains = config
                .k_moment
                .iter()
                .map(|&k| match wk_chain(&a, k as usize, DEFAULT_GRID_POINTS) {
                    Ok(rep) => (rep.chain_holds && rep.certified, rep.min_spacing_over_r),
                    Err(_) => (false, None),
                })
                .collect();
            Ok(IdentitySample {
                lattice,
                residuals,
                chains,
            })
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        for (si, label) in ["s0", "s=-0.1+0.3i"].iter().enumerate() {
            let worst = |which: usize| {
                draws
                    .iter()
                    .filter_map(|d| d.lattice.map(|e| e[si][which]))
                    .fold(0.0, f64::max)
            };
            rows.push(StatRow::at_most(format!("n={n} {label} lattice_relative_error_max"), worst(0), RATIO_REL_TOL));
            rows.push(StatRow::info(format!("n={n} {label} tail_corrected_relative_error_max"), worst(1)));
        }
        for (ci, &c) in config.c.iter().enumerate() {
            for (zi, label) in ["z0", "mid", "1"].iter().enumerate() {
                let worst = draws.iter().map(|d| d.residuals[ci][zi]).fold(0.0, f64::max);
                rows.push(StatRow::at_most(format!("n={n} c={c} z={label} identity_residual_max"), worst, IDENTITY_TOL));
            }
        }
        for (ki, &k) in config.k_moment.iter().enumerate() {
            let held = draws.iter().filter(|d| d.chains[ki].0).count();
            rows.push(StatRow::within(
                format!("n={n} k={k} wk_chain_fraction"),
                held as f64 / draws.len() as f64,
                1.0,
                0.0,
            ));
            if k >= 2 {
                let spacing = draws
                    .iter()
                    .map(|d| d.chains[ki].1.unwrap_or(0.0))
                    .fold(f64::INFINITY, f64::min);
                rows.push(StatRow::at_most(
                    format!("n={n} k={k} wk_spacing_deficit"),
                    0.125 - spacing,
                    0.125 * 1e-12,
                ));
            }
        }
    }
    Ok(rows)
}
