//! Kernel density estimates of the finite-sample distributions of the
//! `Z` statistic (standardized by the true standard deviation) and the `S`
//! statistic (studentized by the estimated standard error).

use std::collections::HashMap;

use rayon::prelude::*;

use crate::distributions::{sm_sample_stream, theoretical_index, SMParams};
use crate::error::{Error, Result};
use crate::measures::{estimate, two_sample_s};
use crate::numeric::{quantile_sorted, sample_variance, skewness};
use crate::rng::Stream;
use crate::sample::MeasureKind;

/// Smallest number of replications accepted for a density curve.
pub const MIN_DENSITY_REPLICATIONS: usize = 1000;

const CALIBRATION_SALT: u64 = 0xCA1B_0000_0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// `0.9 min(sd, IQR/1.34) n^(-1/5)`.
    #[default]
    Silverman,
    /// `1.06 sd n^(-1/5)`.
    Scott,
    Fixed(f64),
}

impl Bandwidth {
    pub fn select(&self, values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let sd = sample_variance(values).sqrt();
        match *self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Scott => 1.06 * sd * n.powf(-0.2),
            Bandwidth::Silverman => {
                let mut sorted = values.to_vec();
                sorted.sort_unstable_by(|a, b| a.total_cmp(b));
                let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
                let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
                0.9 * spread * n.powf(-0.2)
            }
        }
    }
}

/// Gaussian-kernel density of `values` evaluated at each grid point.
pub fn kde(values: &[f64], grid: &[f64], h: f64) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.par_iter()
        .map(|&g| {
            values
                .iter()
                .map(|&v| {
                    let z = (g - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Trapezoid-rule integral of `y` over `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityDesign {
    /// `L̂` against the population value.
    OneSample,
    /// `L̂_I - L̂_Y` for two independent samples of size `n` from the same
    /// generator.
    TwoSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pub generator: SMParams,
    pub measure: MeasureKind,
    pub design: DensityDesign,
    pub n: usize,
    pub replications: usize,
    /// Replications of the pass that estimates the true standard deviation.
    pub calibration_replications: usize,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub bandwidth: Bandwidth,
}

impl DensitySpec {
    pub fn new(generator: SMParams, measure: MeasureKind, design: DensityDesign, n: usize) -> Self {
        DensitySpec {
            generator,
            measure,
            design,
            n,
            replications: super::DEFAULT_REPLICATIONS,
            calibration_replications: super::DEFAULT_REPLICATIONS,
            seed: 1,
            grid: linspace(-10.0, 10.0, 401),
            bandwidth: Bandwidth::Silverman,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    /// `"Z"` or `"S"`.
    pub statistic: &'static str,
    pub n: usize,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Sample skewness of the simulated statistic.
    pub skewness: f64,
    /// Replications whose statistic was undefined and left out.
    pub dropped: usize,
}

impl DensityCurve {
    pub fn label(&self) -> String {
        format!("{}_N{}", self.statistic, self.n)
    }
}

type DesignKey = (u64, u64, u64, String, DensityDesign, usize, usize, u64);

/// True standard deviations from calibration passes, keyed by design.
#[derive(Debug, Default)]
pub struct TrueSdCache {
    entries: HashMap<DesignKey, f64>,
}

impl TrueSdCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn get_or_compute(&mut self, spec: &DensitySpec) -> Result<f64> {
        let g = &spec.generator;
        let key = (
            g.a().to_bits(),
            g.b().to_bits(),
            g.c().to_bits(),
            spec.measure.short_name(),
            spec.design,
            spec.n,
            spec.calibration_replications,
            spec.seed,
        );
        if let Some(&sd) = self.entries.get(&key) {
            return Ok(sd);
        }
        let stream = Stream::from_seed(spec.seed ^ CALIBRATION_SALT);
        let values = (0..spec.calibration_replications)
            .into_par_iter()
            .map(|r| estimator_draw(spec, &stream.child(r as u64)).map(|(v, _)| v))
            .collect::<Result<Vec<f64>>>()?;
        let sd = sample_variance(&values).sqrt();
        if !(sd > 0.0) {
            return Err(Error::Degenerate("calibration pass produced no spread".into()));
        }
        self.entries.insert(key, sd);
        Ok(sd)
    }
}

/// Estimator value (or difference) and the `S` statistic, `None` when the
/// standard error vanishes.
fn estimator_draw(spec: &DensitySpec, stream: &Stream) -> Result<(f64, Option<f64>)> {
    let si = sm_sample_stream(&spec.generator, spec.n, &stream.child(0));
    let ei = estimate(&si, spec.measure)?;
    match spec.design {
        DensityDesign::OneSample => Ok((ei.value, None)),
        DensityDesign::TwoSample => {
            let sy = sm_sample_stream(&spec.generator, spec.n, &stream.child(1));
            let ey = estimate(&sy, spec.measure)?;
            Ok((ei.value - ey.value, two_sample_s(&ei, &ey, 0.0).ok()))
        }
    }
}

/// Densities of `Z` and `S` for one design.
pub fn z_s_density_diagnostic(spec: &DensitySpec, cache: &mut TrueSdCache) -> Result<(DensityCurve, DensityCurve)> {
    if spec.replications < MIN_DENSITY_REPLICATIONS {
        return Err(Error::spec(format!(
            "density curves need at least {MIN_DENSITY_REPLICATIONS} replications"
        )));
    }
    if spec.calibration_replications < 2 || spec.n < 2 || spec.grid.len() < 2 {
        return Err(Error::spec("density design needs n >= 2, a calibration pass and a grid"));
    }
    let truth = match spec.design {
        DensityDesign::OneSample => theoretical_index(&spec.generator, spec.measure)?,
        DensityDesign::TwoSample => 0.0,
    };
    let sd = cache.get_or_compute(spec)?;

    let stream = Stream::from_seed(spec.seed);
    let draws = (0..spec.replications)
        .into_par_iter()
        .map(|r| {
            let rs = stream.child(r as u64);
            match spec.design {
                DensityDesign::OneSample => {
                    let si = sm_sample_stream(&spec.generator, spec.n, &rs.child(0));
                    let e = estimate(&si, spec.measure)?;
                    let s = (e.se > 0.0).then(|| (e.value - truth) / e.se);
                    Ok(((e.value - truth) / sd, s))
                }
                DensityDesign::TwoSample => {
                    let (d, s) = estimator_draw(spec, &rs)?;
                    Ok((d / sd, s))
                }
            }
        })
        .collect::<Result<Vec<(f64, Option<f64>)>>>()?;

    let z: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let s: Vec<f64> = draws.iter().filter_map(|d| d.1).collect();
    let dropped = draws.len() - s.len();
    let curve = |statistic: &'static str, values: &[f64], dropped: usize| {
        let h = spec.bandwidth.select(values);
        DensityCurve {
            statistic,
            n: spec.n,
            grid: spec.grid.clone(),
            density: kde(values, &spec.grid, h),
            bandwidth: h,
            skewness: skewness(values),
            dropped,
        }
    };
    Ok((curve("Z", &z, 0), curve("S", &s, dropped)))
}
