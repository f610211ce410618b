//! Mesoscopic central limit theorem for `(S_N(g), S_N(h))`.

mod fourier;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use fourier::{
    c2_sum_limit, cumulant_decay_rate, cumulant_majorant, exact_c2_sum, exact_c2_sum_via_series, fhat_closed,
    fhat_numeric, series_a, series_b, soshnikov_c1, tail_decay_constant, tail_start, tail_sum,
    trapezoid_coefficient, FourierCoefficients, MIN_QUADRATURE_POINTS,
};

use crate::error::{invalid, Result};
use crate::logderiv::{s_n_f, MesoscopicSpec};
use crate::sampler::{map_spectra, EigenAngles, RngStream};
use crate::stats::{
    batch_means, covariance, empirical_cf, empirical_cumulants, ks_test, normal_cdf, CumulantEstimate, KsResult,
    MeanEstimate, DEFAULT_BATCHES,
};

/// ECF grid for each coordinate.
pub const DEFAULT_UV_GRID: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

/// Limiting variance of each coordinate.
pub const LIMIT_VARIANCE: f64 = 0.125;

/// `⌈√N⌉`.
pub fn sqrt_rule(n: usize) -> f64 {
    (n as f64).sqrt().ceil()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltConfig {
    pub n: usize,
    pub l: f64,
    pub uv_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl CltConfig {
    pub fn new(n: usize, l: Option<f64>, samples: usize, seed: u64) -> Self {
        Self {
            n,
            l: l.unwrap_or_else(|| sqrt_rule(n)),
            uv_grid: DEFAULT_UV_GRID.to_vec(),
            samples,
            seed,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 1.0 && self.l < self.n as f64 / 2.0) {
            return Err(invalid("l", format!("need 1 < L < N/2, got L={} N={}", self.l, self.n)));
        }
        if self.samples < 10 * 6 {
            return Err(invalid("samples", "need at least 60 samples"));
        }
        if self.uv_grid.is_empty() {
            return Err(invalid("uv_grid", "must be non-empty"));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<MesoscopicSpec<f64>> {
        MesoscopicSpec::new(self.n, self.l, 1.0, 0.0)
    }
}

/// Draws `(S_N(g), S_N(h))` for each sample.
pub fn draw_linear_statistics(
    spec: &MesoscopicSpec<f64>,
    stream: &RngStream,
    samples: usize,
    workers: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs = map_spectra(spec.n, stream, samples, workers, |_, a| {
        let s = s_n_f(&a, spec);
        (s.re, s.im)
    })?;
    Ok(pairs.into_iter().unzip())
}

/// `(S_N(g), S_N(h))` over pre-drawn spectra.
pub fn linear_statistics(spec: &MesoscopicSpec<f64>, spectra: &[EigenAngles<f64>]) -> (Vec<f64>, Vec<f64>) {
    spectra
        .iter()
        .map(|a| {
            let s = s_n_f(a, spec);
            (s.re, s.im)
        })
        .unzip()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub u: f64,
    pub v: f64,
    /// Orders 1 to 4 of `u·S_N(g) + v·S_N(h)`.
    pub cumulants: Vec<CumulantEstimate>,
    pub c2_target: f64,
    pub c2_tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcfRow {
    pub u: f64,
    pub v: f64,
    pub empirical: Complex<f64>,
    /// `e^{−(u²+v²)/16}`.
    pub limit: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub mean: MeanEstimate,
    /// Orders 1 to 4.
    pub cumulants: Vec<CumulantEstimate>,
    /// Raw values against `N(0, exact_c2_sum)`.
    pub ks_analytic: KsResult,
    /// Raw values against the limit `N(0, 1/8)`.
    pub ks_limit: KsResult,
    /// Studentised values against `N(0, 1)`.
    pub ks_studentized: KsResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub l: f64,
    pub samples: usize,
    /// `exact_c2_sum` at `(u, v) = (1, 0)`.
    pub exact_c2: f64,
    /// `tail_sum` at `(u, v) = (1, 0)`.
    pub tail: f64,
    pub g: MarginalReport,
    pub h: MarginalReport,
    pub covariance: MeanEstimate,
    pub projections: Vec<ProjectionRow>,
    pub ecf: Vec<EcfRow>,
    pub max_ecf_deviation: f64,
}

fn marginal(values: &[f64], c2: f64) -> Result<MarginalReport> {
    let cumulants = empirical_cumulants(values, 4)?;
    let mean = batch_means(values, DEFAULT_BATCHES)?;
    let sd = c2.sqrt();
    let ks_analytic = ks_test(values, |x| normal_cdf(x / sd))?;
    let limit_sd = LIMIT_VARIANCE.sqrt();
    let ks_limit = ks_test(values, |x| normal_cdf(x / limit_sd))?;
    let (m, s) = (cumulants[0].value, cumulants[1].value.max(f64::MIN_POSITIVE).sqrt());
    let ks_studentized = ks_test(values, |x| normal_cdf((x - m) / s))?;
    Ok(MarginalReport {
        mean,
        cumulants,
        ks_analytic,
        ks_limit,
        ks_studentized,
    })
}

/// Builds the report from already-drawn `(S_N(g), S_N(h))` values.
pub fn clt_report_from_values(spec: &MesoscopicSpec<f64>, uv_grid: &[f64], gs: &[f64], hs: &[f64]) -> Result<CltReport> {
    let base = spec.with_uv(1.0, 0.0);
    let exact_c2 = exact_c2_sum(&base)?;
    let tail = tail_sum(&base)?;
    let g = marginal(gs, exact_c2)?;
    let h = marginal(hs, exact_c2)?;
    let cov = covariance(gs, hs)?;

    let mut projections = Vec::with_capacity(uv_grid.len() * uv_grid.len());
    let mut ecf = Vec::with_capacity(uv_grid.len() * uv_grid.len());
    for &u in uv_grid {
        for &v in uv_grid {
            let proj: Vec<f64> = gs.iter().zip(hs).map(|(x, y)| u * x + v * y).collect();
            let weighted = spec.with_uv(u, v);
            projections.push(ProjectionRow {
                u,
                v,
                cumulants: empirical_cumulants(&proj, 4)?,
                c2_target: exact_c2_sum(&weighted)?,
                c2_tail: tail_sum(&weighted)?,
            });
            let empirical = empirical_cf(gs, hs, u, v);
            let limit = (-(u * u + v * v) / 16.0).exp();
            ecf.push(EcfRow {
                u,
                v,
                empirical,
                limit,
                deviation: (empirical - Complex::new(limit, 0.0)).norm(),
            });
        }
    }
    let max_ecf_deviation = ecf.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(CltReport {
        n: spec.n,
        l: spec.l,
        samples: gs.len(),
        exact_c2,
        tail,
        g,
        h,
        covariance: cov,
        projections,
        ecf,
        max_ecf_deviation,
    })
}

/// Draws spectra per `config` and builds the full report.
pub fn clt_report(config: &CltConfig) -> Result<CltReport> {
    config.validate()?;
    let spec = config.spec()?;
    let stream = RngStream::new(config.seed, 0);
    let (gs, hs) = draw_linear_statistics(&spec, &stream, config.samples, config.workers)?;
    clt_report_from_values(&spec, &config.uv_grid, &gs, &hs)
}
