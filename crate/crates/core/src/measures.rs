//! Inequality indices with their consistent standard errors, and the
//! `Z` / `S` statistics built from them.
//!
//! The Gini coefficient is the mean absolute difference over distinct pairs,
//! i.e. the plug-in value scaled by `n / (n - 1)`, which removes its `O(1/n)`
//! bias; its standard error follows the influence-function construction from
//! sorted partial sums, scaled alike. Theil and GE(α) are plug-in, with the
//! delta method on the joint sample moments. All routines sort a copy once and reuse that order.

use crate::error::{Error, Result};
use crate::sample::{MeasureKind, Sample};

/// A point estimate of an index with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEstimate {
    pub kind: MeasureKind,
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

fn check_len(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "an inequality index needs at least 2 observations, got {}",
            xs.len()
        )));
    }
    Ok(())
}

fn check_positive(xs: &[f64], what: &str) -> Result<()> {
    if let Some((i, v)) = xs.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::domain(format!(
            "{what} requires strictly positive incomes; observation {} is {v}",
            i + 1
        )));
    }
    Ok(())
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}

/// Estimate `kind` on a raw slice of observations.
pub fn estimate_values(xs: &[f64], kind: MeasureKind) -> Result<MeasureEstimate> {
    match kind.canonical() {
        MeasureKind::Gini => gini_values(xs),
        MeasureKind::Theil => theil_values(xs),
        MeasureKind::Ge(alpha) => ge_values(xs, alpha),
    }
}

/// Estimate `kind` on a sample.
pub fn estimate(s: &Sample, kind: MeasureKind) -> Result<MeasureEstimate> {
    estimate_values(s.values(), kind)
}

/// Estimate on data already sorted ascending; skips the copy and sort for
/// the Gini index.
pub(crate) fn estimate_sorted(sorted: &[f64], kind: MeasureKind) -> Result<MeasureEstimate> {
    match kind.canonical() {
        MeasureKind::Gini => {
            check_len(sorted)?;
            gini_sorted(sorted, sorted.len())
        }
        other => estimate_values(sorted, other),
    }
}

/// Bias-corrected Gini coefficient `Σ_{i≠j} |x_i - x_j| / (2 n (n - 1) μ)`.
pub fn gini(s: &Sample) -> Result<MeasureEstimate> {
    gini_values(s.values())
}

pub fn gini_values(xs: &[f64]) -> Result<MeasureEstimate> {
    check_len(xs)?;
    let n = xs.len();
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    gini_sorted(&sorted, n)
}

/// Gini on already-sorted data (ascending).
pub(crate) fn gini_sorted(sorted: &[f64], n: usize) -> Result<MeasureEstimate> {
    let nf = n as f64;
    let total: f64 = sorted.iter().sum();
    let mu = total / nf;
    if !(mu > 0.0) {
        return Err(Error::domain("Gini requires a positive mean income"));
    }
    if is_constant(sorted) {
        return Ok(MeasureEstimate {
            kind: MeasureKind::Gini,
            value: 0.0,
            se: 0.0,
            n,
        });
    }
    // G = 2 Σ i x_(i) / (n² μ) - (n + 1)/n
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (i + 1) as f64 * x)
        .sum();
    let g = 2.0 * weighted / (nf * nf * mu) - (nf + 1.0) / nf;

    // Z_i = -(G + 1) x_(i) + (2i - 1)/n x_(i) - (2/n) Σ_{j<=i} x_(j)
    let mut partial = 0.0;
    let z: Vec<f64> = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            partial += x;
            let rank = (i + 1) as f64;
            -(g + 1.0) * x + (2.0 * rank - 1.0) / nf * x - 2.0 / nf * partial
        })
        .collect();
    let z_bar = z.iter().sum::<f64>() / nf;
    let ss: f64 = z.iter().map(|zi| (zi - z_bar) * (zi - z_bar)).sum();
    let var = ss / (nf * mu).powi(2);
    let correction = nf / (nf - 1.0);
    Ok(MeasureEstimate {
        kind: MeasureKind::Gini,
        value: g * correction,
        se: var.sqrt() * correction,
        n,
    })
}

/// Plug-in Theil index `(1/n) Σ (x/μ) ln(x/μ)`.
pub fn theil(s: &Sample) -> Result<MeasureEstimate> {
    theil_values(s.values())
}

pub fn theil_values(xs: &[f64]) -> Result<MeasureEstimate> {
    check_len(xs)?;
    check_positive(xs, "the Theil index")?;
    let n = xs.len();
    if is_constant(xs) {
        return Ok(MeasureEstimate {
            kind: MeasureKind::Theil,
            value: 0.0,
            se: 0.0,
            n,
        });
    }
    let nf = n as f64;
    let mu = xs.iter().sum::<f64>() / nf;
    let terms: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| {
            let r = x / mu;
            (r, r * r.ln())
        })
        .collect();
    let t = terms.iter().map(|(_, rl)| rl).sum::<f64>() / nf;
    // Influence of (μ, ν = E[X ln X]) on T = ν/μ - ln μ, normalised to μ = 1.
    let ss: f64 = terms
        .iter()
        .map(|&(r, rl)| {
            let inf = (rl - t) - (t + 1.0) * (r - 1.0);
            inf * inf
        })
        .sum();
    Ok(MeasureEstimate {
        kind: MeasureKind::Theil,
        value: t.max(0.0),
        se: (ss / (nf * nf)).sqrt(),
        n,
    })
}

/// Generalized entropy index GE(α).
///
/// `ge_index(s, 1.0)` is computed by [`theil`] and GE(0) is the mean log
/// deviation.
pub fn ge_index(s: &Sample, alpha: f64) -> Result<MeasureEstimate> {
    ge_values(s.values(), alpha)
}

pub fn ge_values(xs: &[f64], alpha: f64) -> Result<MeasureEstimate> {
    if !alpha.is_finite() {
        return Err(Error::domain("GE parameter must be finite"));
    }
    if alpha == 1.0 {
        return theil_values(xs);
    }
    check_len(xs)?;
    if alpha <= 1.0 {
        check_positive(xs, "GE(α) with α ≤ 1")?;
    }
    let n = xs.len();
    let kind = MeasureKind::Ge(alpha);
    let nf = n as f64;
    let mu = xs.iter().sum::<f64>() / nf;
    if !(mu > 0.0) {
        return Err(Error::domain("GE(α) requires a positive mean income"));
    }
    if is_constant(xs) {
        return Ok(MeasureEstimate {
            kind,
            value: 0.0,
            se: 0.0,
            n,
        });
    }
    if alpha == 0.0 {
        let logs: Vec<(f64, f64)> = xs.iter().map(|&x| (x / mu, (x / mu).ln())).collect();
        let mean_log = logs.iter().map(|(_, l)| l).sum::<f64>() / nf;
        let ss: f64 = logs
            .iter()
            .map(|&(r, l)| {
                let inf = -(l - mean_log) + (r - 1.0);
                inf * inf
            })
            .sum();
        return Ok(MeasureEstimate {
            kind,
            value: (-mean_log).max(0.0),
            se: (ss / (nf * nf)).sqrt(),
            n,
        });
    }
    let denom = alpha * (alpha - 1.0);
    let powers: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| {
            let r = x / mu;
            (r, r.powf(alpha))
        })
        .collect();
    let m = powers.iter().map(|(_, p)| p).sum::<f64>() / nf;
    let value = (m - 1.0) / denom;
    let ss: f64 = powers
        .iter()
        .map(|&(r, p)| {
            let inf = (p - m) / denom - m * (r - 1.0) / (alpha - 1.0);
            inf * inf
        })
        .sum();
    Ok(MeasureEstimate {
        kind,
        value: value.max(0.0),
        se: (ss / (nf * nf)).sqrt(),
        n,
    })
}

/// `(value - true_value) / true_sd`.
pub fn z_statistic(est: &MeasureEstimate, true_value: f64, true_sd: f64) -> Result<f64> {
    if !(true_sd > 0.0) {
        return Err(Error::domain("true standard deviation must be positive"));
    }
    Ok((est.value - true_value) / true_sd)
}

/// `(value - hypothesized) / se`.
pub fn s_statistic(est: &MeasureEstimate, hypothesized: f64) -> Result<f64> {
    if !(est.se > 0.0) {
        return Err(Error::Degenerate(
            "standard error is zero; the S statistic is undefined".into(),
        ));
    }
    Ok((est.value - hypothesized) / est.se)
}

/// Studentized difference `(L̂_I - L̂_Y - d0) / sqrt(se_I² + se_Y²)`.
pub fn two_sample_s(est_i: &MeasureEstimate, est_y: &MeasureEstimate, d0: f64) -> Result<f64> {
    let se = (est_i.se * est_i.se + est_y.se * est_y.se).sqrt();
    if !(se > 0.0) {
        return Err(Error::Degenerate(
            "both standard errors are zero; the two-sample S statistic is undefined".into(),
        ));
    }
    Ok((est_i.value - est_y.value - d0) / se)
}
