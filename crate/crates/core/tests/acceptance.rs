//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Spectrum pools at N = 64, 128 and 256 are drawn once and shared between the
//! criteria that need them. Runs on all available cores; about 20 minutes on one.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

use cue_spectra::clt::{
    c2_sum_limit, exact_c2_sum, fhat_closed, fhat_numeric, linear_statistics, clt_report_from_values,
    DEFAULT_UV_GRID,
};
use cue_spectra::harness::{execute, to_csv, ConfigPatch, ExperimentConfig};
use cue_spectra::logderiv::{
    lattice_tail_remainder, q_log_deriv_direct, q_log_deriv_lattice, MesoscopicSpec, DEFAULT_LATTICE_TERMS,
};
use cue_spectra::ratios::{
    j_monte_carlo, j_star, j_weyl, weyl_average, weyl_marginal_density, RatioSpec, DEFAULT_WEYL_GRID,
};
use cue_spectra::sampler::{eigenangles, map_unitaries, sample_cue_angles_par, sample_spectrum};
use cue_spectra::selberg::{claim_ratio, decompose, wk_chain, z0, MomentEstimate, DEFAULT_GRID_POINTS};
use cue_spectra::stats::{batch_means, ks_test, DEFAULT_BATCHES};
use cue_spectra::{Angles, Complex, Result, RngStream};

const SEED: u64 = 0x5eed_2024;
const POOL_SAMPLES: usize = 10_000;
const SUBSET: usize = 1_000;
const C_GRID: [f64; 3] = [0.25, 0.5, 1.0];

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Shared spectra, one substream per size.
fn pool(n: usize) -> &'static [Angles] {
    static P64: OnceLock<Vec<Angles>> = OnceLock::new();
    static P128: OnceLock<Vec<Angles>> = OnceLock::new();
    static P256: OnceLock<Vec<Angles>> = OnceLock::new();
    let cell = match n {
        64 => &P64,
        128 => &P128,
        256 => &P256,
        _ => unreachable!("no pool at N={n}"),
    };
    cell.get_or_init(|| {
        let t = Instant::now();
        let p = sample_cue_angles_par(n, &RngStream::new(SEED, n as u64), POOL_SAMPLES, workers()).expect("pool");
        eprintln!("  (drew {POOL_SAMPLES} spectra at N={n} in {:.1}s)", t.elapsed().as_secs_f64());
        p
    })
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within_se(value: f64, se: f64, target: f64) -> bool {
    (value - target).abs() <= 3.0 * se
}

fn fourier_closed_form() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for (n, l) in [(64, 8.0), (256, 16.0)] {
        for (u, v) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let spec = MesoscopicSpec::new(n, l, u, v)?;
            for k in -64..=64 {
                let d = (fhat_closed(k, &spec) - fhat_numeric(k, &spec, 1 << 14)?).norm();
                worst = worst.max(d);
            }
        }
    }
    Ok(verdict(worst <= 1e-10, format!("max |closed − quadrature| = {worst:.2e} (tol 1e-10)")))
}

fn exact_c2() -> Result<Verdict> {
    let spec = MesoscopicSpec::new(100, 10.0, 1.0, 0.0)?;
    let mut direct = 0.0;
    for k in (1..=100_000i64).rev() {
        direct += k as f64 * (fhat_closed(k, &spec).norm_sqr() + fhat_closed(-k, &spec).norm_sqr());
    }
    let closed = exact_c2_sum(&spec)?;
    let rel = (closed - direct).abs() / direct;
    let limit = c2_sum_limit(1.0, 0.0);
    Ok(verdict(
        rel <= 1e-9 && limit == 0.125,
        format!("closed {closed:.15} vs direct {direct:.15}: rel {rel:.1e} (tol 1e-9); limit {limit}"),
    ))
}

fn clt_campaign() -> Result<Verdict> {
    let spec = MesoscopicSpec::new(256, 16.0, 1.0, 0.0)?;
    let (gs, hs) = linear_statistics(&spec, pool(256));
    let r = clt_report_from_values(&spec, &DEFAULT_UV_GRID, &gs, &hs)?;
    let small = MesoscopicSpec::new(64, 8.0, 1.0, 0.0)?;
    let (gs64, hs64) = linear_statistics(&small, pool(64));
    let r64 = clt_report_from_values(&small, &DEFAULT_UV_GRID, &gs64, &hs64)?;

    let mut failures = Vec::new();
    for (name, m) in [("g", &r.g), ("h", &r.h)] {
        let k = &m.cumulants;
        if !within_se(k[1].value, k[1].std_error, r.exact_c2) {
            failures.push(format!("Var {name} = {:.5} ± {:.5}", k[1].value, k[1].std_error));
        }
        for order in [2, 3] {
            if !within_se(k[order].value, k[order].std_error, 0.0) {
                failures.push(format!("C{} {name} = {:.2e} ± {:.1e}", order + 1, k[order].value, k[order].std_error));
            }
        }
        if m.ks_analytic.p_value <= 1e-3 {
            failures.push(format!("KS {name} p = {:.2e}", m.ks_analytic.p_value));
        }
    }
    if !within_se(r.covariance.mean, r.covariance.std_error, 0.0) {
        failures.push(format!("Cov = {:.2e} ± {:.1e}", r.covariance.mean, r.covariance.std_error));
    }
    if r.max_ecf_deviation >= r64.max_ecf_deviation {
        failures.push(format!("ECF {:.4} !< {:.4}", r.max_ecf_deviation, r64.max_ecf_deviation));
    }
    let summary = format!(
        "target {:.5}; Var g {:.5}±{:.5}, Var h {:.5}±{:.5}; KS p {:.3}/{:.3}; ECF dev {:.4} (N=64: {:.4})",
        r.exact_c2,
        r.g.cumulants[1].value,
        r.g.cumulants[1].std_error,
        r.h.cumulants[1].value,
        r.h.cumulants[1].std_error,
        r.g.ks_analytic.p_value,
        r.h.ks_analytic.p_value,
        r.max_ecf_deviation,
        r64.max_ecf_deviation
    );
    Ok(if failures.is_empty() {
        verdict(true, summary)
    } else {
        verdict(false, format!("{summary}; failed: {}", failures.join(", ")))
    })
}

fn theorem_identities() -> Result<Verdict> {
    let n8 = sample_cue_angles_par(8, &RngStream::new(SEED, 8), SUBSET, workers())?;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for (n, spectra) in [(8, &n8[..]), (64, &pool(64)[..SUBSET]), (256, &pool(256)[..SUBSET])] {
        let lo: f64 = z0(n);
        for z in [lo, 0.5 * (lo + 1.0), 1.0] {
            for c in C_GRID {
                for a in spectra {
                    let d = decompose(a, Complex::new(z, 0.0), c)?;
                    worst = worst.max(d.split_residual()).max(d.error_residual());
                    checked += 1;
                }
            }
        }
    }
    Ok(verdict(worst <= 1e-9, format!("{checked} decompositions, max residual {worst:.2e} (tol 1e-9)")))
}

fn moment_scaling() -> Result<Verdict> {
    let sizes = [64, 128, 256];
    let mut table = vec![[0.0; 3]; C_GRID.len()];
    for (ni, &n) in sizes.iter().enumerate() {
        let spectra = pool(n);
        for (ci, &c) in C_GRID.iter().enumerate() {
            let abs_sq = spectra
                .iter()
                .map(|a| decompose(a, Complex::new(1.0, 0.0), c).map(|d| d.error.norm_sqr()))
                .collect::<Result<Vec<_>>>()?;
            table[ci][ni] = MomentEstimate::from_abs_squared(&abs_sq, n, c, 1)?.normalized;
        }
    }
    let mut ratios_ok = true;
    let mut ratio_text = Vec::new();
    for (ci, row) in table.iter().enumerate() {
        for w in row.windows(2) {
            let r = w[1] / w[0];
            ratios_ok &= (0.5..=2.0).contains(&r);
            ratio_text.push(format!("c={}: {r:.3}", C_GRID[ci]));
        }
    }
    let all = table.iter().flatten().copied();
    let max = all.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = all.fold(f64::INFINITY, f64::min);
    Ok(verdict(
        ratios_ok && max / min < 50.0,
        format!(
            "consecutive-N ratios [{}]; max/min {:.2} (< 50); constant max E|E|²(c/N)² = {max:.4}",
            ratio_text.join(", "),
            max / min
        ),
    ))
}

fn claim_statistic() -> Result<Verdict> {
    let max_at = |n: usize| -> Result<f64> {
        pool(n)[..SUBSET]
            .iter()
            .map(claim_ratio)
            .try_fold(0.0f64, |m, x| x.map(|x| m.max(x)))
    };
    let (a, b) = (max_at(64)?, max_at(256)?);
    Ok(verdict(b / a <= 2.0, format!("max ratio {a:.4} (N=64) → {b:.4} (N=256), growth {:.3} (≤ 2)", b / a)))
}

fn lattice_identity() -> Result<Verdict> {
    let mut worst = [0.0f64; 2];
    let mut corrected = 0.0f64;
    let mut over = 0usize;
    let s_points = [Complex::new(z0::<f64>(16).ln(), 0.0), Complex::new(-0.1, 0.3)];
    for seed in 0..100u64 {
        let a = sample_spectrum(16, &RngStream::new(SEED + seed, 0), 0)?;
        for (i, &s) in s_points.iter().enumerate() {
            let direct = q_log_deriv_direct(&a, s)?;
            let lattice = q_log_deriv_lattice(&a, s, DEFAULT_LATTICE_TERMS)?;
            let rel = (lattice - direct).norm() / direct.norm();
            over += (rel > 1e-6) as usize;
            worst[i] = worst[i].max(rel);
            let tail = lattice_tail_remainder(&a, s, DEFAULT_LATTICE_TERMS);
            corrected = corrected.max((lattice + tail - direct).norm() / direct.norm());
        }
    }
    Ok(verdict(
        over == 0,
        format!(
            "max rel error {:.2e} at s0, {:.2e} at -0.1+0.3i (tol 1e-6; {over}/200 over); \
             with asymptotic tail added {corrected:.1e}",
            worst[0], worst[1]
        ),
    ))
}

fn wk_chain_check() -> Result<Verdict> {
    let spectra = sample_cue_angles_par(64, &RngStream::new(SEED, 1064), 100, workers())?;
    let mut held = 0;
    let mut min_spacing = f64::INFINITY;
    for a in &spectra {
        let rep = wk_chain(a, 3, DEFAULT_GRID_POINTS)?;
        held += (rep.chain_holds && rep.certified) as usize;
        min_spacing = min_spacing.min(rep.min_spacing_over_r.unwrap_or(0.0));
    }
    let spacing_ok = min_spacing >= 0.125 * (1.0 - 1e-12);
    Ok(verdict(
        held == 100 && spacing_ok,
        format!("{held}/100 certified chains; min spacing {min_spacing:.6}·r (≥ r/8)"),
    ))
}

fn ratios_agreement() -> Result<Verdict> {
    let shifts = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        for &a in &shifts {
            for &b in &shifts {
                let spec = RatioSpec::<f64>::real(&[a], &[b], n)?;
                let exact = j_star(&spec)?;
                let w = j_weyl(&spec, DEFAULT_WEYL_GRID)?;
                worst = worst.max((w.value - exact).norm() / exact.norm());
            }
        }
    }
    let mut mc_ok = true;
    let mut mc_text = Vec::new();
    for (k, (a, b)) in [(&[0.3][..], &[0.4][..]), (&[0.3, 0.5][..], &[0.4, 0.6][..])].into_iter().enumerate() {
        let spec = RatioSpec::real(a, b, 3)?;
        let exact = j_star(&spec)?;
        let est = j_monte_carlo(&spec, 1_000_000, &RngStream::new(SEED, 3000 + k as u64), workers())?;
        let ok = est.agrees_with(exact, 3.0);
        mc_ok &= ok;
        mc_text.push(format!(
            "K={}: J* {:.6} vs MC {:.6}±{:.1e} (im {:.1e}±{:.1e})",
            k + 1,
            exact.re,
            est.mean.re,
            est.std_error_re,
            est.mean.im,
            est.std_error_im
        ));
    }
    Ok(verdict(
        worst <= 1e-6 && mc_ok,
        format!("J* vs Weyl max rel {worst:.1e} (tol 1e-6); {}", mc_text.join("; ")),
    ))
}

fn trace_moment(n: usize, samples: usize, stream: u64) -> Result<(f64, f64)> {
    let tr = map_unitaries(n, &RngStream::new(SEED, stream), samples, workers(), |_, u| u.trace().norm_sqr())?;
    let est = batch_means(&tr, DEFAULT_BATCHES)?;
    Ok((est.mean, est.std_error))
}

fn sampler_validity() -> Result<Verdict> {
    let uniform = |x: f64| (x + PI) / (2.0 * PI);
    // N = 2 first: quadrature against the Weyl density, then Monte Carlo.
    let weyl2 = weyl_average(2, 64, |t: &[f64]| {
        let tr: Complex<f64> = t.iter().map(|&x| Complex::from_polar(1.0, x)).sum();
        Complex::new(tr.norm_sqr(), 0.0)
    })?
    .re;
    let (m2, se2) = trace_moment(2, 100_000, 2002)?;
    let density_dev = [-3.0, -1.0, 0.0, 1.5, 3.0]
        .iter()
        .map(|&t| weyl_marginal_density(2, t, 256).map(|d| (d - 1.0 / (2.0 * PI)).abs()))
        .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))?;
    let n2 = map_unitaries(2, &RngStream::new(SEED, 2003), 20_000, workers(), |_, u| eigenangles(u))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let pooled2: Vec<f64> = n2.iter().flat_map(|a| a.as_slice().to_vec()).collect();
    let ks2 = ks_test(&pooled2, uniform)?;
    let n2_ok = (weyl2 - 1.0).abs() < 1e-12 && within_se(m2, se2, weyl2) && density_dev < 1e-12 && ks2.p_value > 1e-3;

    let (m8, se8) = trace_moment(8, 100_000, 2008)?;
    let pooled64: Vec<f64> = pool(64).iter().flat_map(|a| a.as_slice().to_vec()).collect();
    let ks64 = ks_test(&pooled64, uniform)?;
    Ok(verdict(
        n2_ok && within_se(m8, se8, 1.0) && ks64.p_value > 1e-3,
        format!(
            "N=2: Weyl {weyl2:.12}, MC {m2:.4}±{se2:.4}, KS p {:.3}; N=8: E|TrU|² {m8:.4}±{se8:.4}; N=64 pooled KS p {:.3}",
            ks2.p_value, ks64.p_value
        ),
    ))
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::resolve(ConfigPatch::parse(text).expect("config")).expect("valid config")
}

fn determinism() -> Result<Verdict> {
    let mut same = true;
    for text in [
        "campaign = sample\nn = 4, 16\nsamples = 200\nseed = 1",
        "campaign = thm1\nn = 16, 32\nsamples = 200\nseed = 2",
        "campaign = clt\nn = 64\nsamples = 200\nseed = 3",
        "campaign = ratios\nn = 3\nsamples = 2000\nseed = 4",
        "campaign = identities\nn = 8\nsamples = 20\nseed = 5",
    ] {
        let one = to_csv(&execute(&config(&format!("{text}\nworkers = 1")))?);
        let many = to_csv(&execute(&config(&format!("{text}\nworkers = 4")))?);
        let again = to_csv(&execute(&config(&format!("{text}\nworkers = 1")))?);
        same &= one == many && one == again;
    }
    // End to end through the binary.
    let dirs = [tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir")];
    let mut files = Vec::new();
    for (dir, w) in dirs.iter().zip(["1", "3"]) {
        let status = Command::new(env!("CARGO_BIN_EXE_cue-spectra"))
            .args(["thm1", "--n", "16,32", "--samples", "300", "--seed", "11", "--workers", w])
            .arg("--out")
            .arg(dir.path())
            .output()
            .expect("run binary")
            .status;
        let path = std::fs::read_dir(dir.path()).expect("out dir").next().expect("one file").expect("entry").path();
        files.push((status.code(), std::fs::read(path).expect("csv")));
    }
    let cli_same = files[0] == files[1];
    Ok(verdict(
        same && cli_same,
        format!("five campaigns at 1 and 4 workers: {}; CLI files: {}", same, cli_same),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>); 11] = [
        ("Fourier closed form vs quadrature", fourier_closed_form),
        ("exact C2 sum and its limit", exact_c2),
        ("CLT at N=256, L=16", clt_campaign),
        ("decomposition identities", theorem_identities),
        ("error-moment scaling (K=1)", moment_scaling),
        ("claim statistic growth", claim_statistic),
        ("lattice identity", lattice_identity),
        ("w_k chain (N=64, K=3)", wk_chain_check),
        ("ratios: J* vs Weyl vs Monte Carlo", ratios_agreement),
        ("sampler validity", sampler_validity),
        ("determinism", determinism),
    ];
    println!("acceptance suite ({} workers)", workers());
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        println!(
            "criterion {:>2} {} — {name}: {} [{:.1}s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
