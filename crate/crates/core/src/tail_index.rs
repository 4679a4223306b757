//! Power-law tail index from the log-log rank-size regression with the
//! rank − ½ shift.

use crate::error::{Error, Result};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub zeta: f64,
    pub se: f64,
    /// Number of observations in the regression.
    pub k: usize,
    pub ci95: (f64, f64),
}

/// Which observations form the tail sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailTruncation {
    /// The largest `⌈f n⌉` observations.
    #[default]
    TopAsTail,
    /// Drop the largest `⌈f n⌉` observations and regress over the next
    /// `⌈f n⌉`, keeping their ranks in the full sample.
    DiscardTop,
}

/// Rank-size estimate over the top `⌈tail_fraction · n⌉` observations.
pub fn rank_size_estimate(s: &Sample, tail_fraction: f64) -> Result<TailEstimate> {
    rank_size_estimate_with(s, tail_fraction, TailTruncation::TopAsTail)
}

pub fn rank_size_estimate_with(
    s: &Sample,
    tail_fraction: f64,
    truncation: TailTruncation,
) -> Result<TailEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::spec(format!(
            "tail fraction must lie in (0, 0.5], got {tail_fraction}"
        )));
    }
    let n = s.len();
    let k = (tail_fraction * n as f64).ceil() as usize;
    if k < 3 {
        return Err(Error::InsufficientData(format!(
            "tail sample has {k} observations; at least 3 are needed"
        )));
    }
    let skip = match truncation {
        TailTruncation::TopAsTail => 0,
        TailTruncation::DiscardTop => k,
    };
    if skip + k > n {
        return Err(Error::InsufficientData(format!(
            "{n} observations cannot supply {skip} discarded and {k} tail values"
        )));
    }
    let mut desc = s.values().to_vec();
    desc.sort_unstable_by(|a, b| b.total_cmp(a));
    let tail = &desc[skip..skip + k];
    if let Some(v) = tail.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::domain(format!(
            "tail observations must be positive, found {v}"
        )));
    }

    let xs: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = (0..k)
        .map(|i| ((skip + i + 1) as f64 - 0.5).ln())
        .collect();
    let kf = k as f64;
    let x_bar = xs.iter().sum::<f64>() / kf;
    let y_bar = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar) * (x - x_bar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    if !(sxx > 1e-300) || sxx <= 1e-24 * xs.iter().map(|x| x * x).sum::<f64>() {
        return Err(Error::Singular(
            "tail observations are tied; the rank-size regression is singular".into(),
        ));
    }
    let zeta = -sxy / sxx;
    if !(zeta > 0.0) {
        return Err(Error::Degenerate(format!(
            "rank-size slope gives a non-positive tail index {zeta}"
        )));
    }
    let se = zeta * (2.0 / kf).sqrt();
    Ok(TailEstimate {
        zeta,
        se,
        k,
        ci95: (zeta - 1.96 * se, zeta + 1.96 * se),
    })
}
