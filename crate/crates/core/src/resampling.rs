//! Competitor tests on the studentized difference of two indices: the
//! asymptotic normal test, a permutation test of equality and a symmetric
//! percentile-t bootstrap test.
//!
//! Resample `b` draws from `stream.child(b)`, so p-values do not depend on
//! how many worker threads run the loop.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{estimate_sorted, estimate_values, two_sample_s, s_statistic, MeasureEstimate};
use crate::numeric::{normal_quantile, normal_sf};
use crate::rng::Stream;
use crate::robust_tests::{Degeneracy, TestOutcome, Validity, Warning};
use crate::sample::{MeasureKind, Sample};

pub const DEFAULT_RESAMPLES: usize = 999;

/// Relative slack when comparing resampled statistics with the observed one,
/// so that rounding noise does not decide ties.
const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResamplingKind {
    Asymptotic,
    Permutation,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResamplingSpec {
    pub kind: ResamplingKind,
    /// Number of resamples `B`; ignored by the asymptotic test.
    pub resamples: usize,
    pub stream: Stream,
}

impl ResamplingSpec {
    pub fn asymptotic() -> Self {
        ResamplingSpec {
            kind: ResamplingKind::Asymptotic,
            resamples: 0,
            stream: Stream::from_seed(0),
        }
    }

    pub fn permutation(resamples: usize, stream: Stream) -> Self {
        ResamplingSpec {
            kind: ResamplingKind::Permutation,
            resamples,
            stream,
        }
    }

    pub fn bootstrap(resamples: usize, stream: Stream) -> Self {
        ResamplingSpec {
            kind: ResamplingKind::Bootstrap,
            resamples,
            stream,
        }
    }

    fn require(&self, kind: ResamplingKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::spec(format!(
                "expected a {kind:?} specification, got {:?}",
                self.kind
            )));
        }
        if self.resamples == 0 {
            return Err(Error::spec("the number of resamples must be at least 1"));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::spec(format!("level must lie in (0, 1), got {alpha}")))
    }
}

fn normal_outcome(statistic: f64, center: f64, se: f64, alpha: f64) -> TestOutcome {
    let z = normal_quantile(1.0 - alpha / 2.0);
    TestOutcome {
        statistic,
        df: None,
        alpha,
        critical_value: Some(z),
        p_value: (2.0 * normal_sf(statistic.abs())).min(1.0),
        reject: statistic.abs() > z,
        ci: Some((center - z * se, center + z * se)),
        validity: Validity::NotApplicable,
        degenerate: None,
        warnings: Vec::new(),
    }
}

/// Two-sample asymptotic test of `H0: L_I - L_Y = d0` against the standard
/// normal.
pub fn asymptotic_test(
    est_i: &MeasureEstimate,
    est_y: &MeasureEstimate,
    d0: f64,
    alpha: f64,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let s = two_sample_s(est_i, est_y, d0)?;
    let se = (est_i.se * est_i.se + est_y.se * est_y.se).sqrt();
    Ok(normal_outcome(s, est_i.value - est_y.value, se, alpha))
}

/// One-sample asymptotic test of `H0: L = l0`.
pub fn asymptotic_one_sample_test(est: &MeasureEstimate, l0: f64, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let s = s_statistic(est, l0)?;
    Ok(normal_outcome(s, est.value, est.se, alpha))
}

/// Studentized difference on sorted inputs; `None` when both standard
/// errors vanish.
fn studentized(
    sorted_i: &[f64],
    sorted_y: &[f64],
    measure: MeasureKind,
    center: f64,
) -> Result<Option<(f64, f64, f64)>> {
    let ei = estimate_sorted(sorted_i, measure)?;
    let ey = estimate_sorted(sorted_y, measure)?;
    let diff = ei.value - ey.value;
    let se = (ei.se * ei.se + ey.se * ey.se).sqrt();
    if se > 0.0 {
        Ok(Some(((diff - center) / se, diff, se)))
    } else {
        Ok(None)
    }
}

/// Observed statistic; zero spread gives a signed infinity or zero.
struct Observed {
    statistic: f64,
    diff: f64,
    se: f64,
    degenerate: Option<Degeneracy>,
}

fn observe(si: &Sample, sy: &Sample, measure: MeasureKind, d0: f64) -> Result<Observed> {
    let ei = estimate_values(si.values(), measure)?;
    let ey = estimate_values(sy.values(), measure)?;
    let diff = ei.value - ey.value;
    let se = (ei.se * ei.se + ey.se * ey.se).sqrt();
    if se > 0.0 {
        return Ok(Observed {
            statistic: (diff - d0) / se,
            diff,
            se,
            degenerate: None,
        });
    }
    let (statistic, degenerate) = if diff == d0 {
        (0.0, Degeneracy::NonRejection)
    } else {
        (f64::INFINITY.copysign(diff - d0), Degeneracy::Rejection)
    };
    Ok(Observed {
        statistic,
        diff,
        se,
        degenerate: Some(degenerate),
    })
}

fn as_extreme(resampled: f64, observed: f64) -> bool {
    let obs = observed.abs();
    if obs.is_infinite() {
        resampled.abs().is_infinite()
    } else {
        resampled.abs() >= obs - TIE_TOLERANCE * obs.max(1.0)
    }
}

fn sorted_copy(s: &Sample) -> Vec<f64> {
    let mut v = s.values().to_vec();
    v.sort_unstable_by(|a, b| a.total_cmp(b));
    v
}

fn check_sizes(si: &Sample, sy: &Sample) -> Result<()> {
    if si.len() < 2 || sy.len() < 2 {
        return Err(Error::InsufficientData(
            "both samples need at least 2 observations".into(),
        ));
    }
    Ok(())
}

/// `C(n, k)` saturating at `u128::MAX`.
fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order, starting with `0..k`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Split the sorted pool by a membership mask; both halves stay sorted.
fn split_sorted(pool: &[f64], in_first: &[bool], n1: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(n1);
    let mut b = Vec::with_capacity(pool.len() - n1);
    for (&x, &first) in pool.iter().zip(in_first) {
        if first {
            a.push(x);
        } else {
            b.push(x);
        }
    }
    (a, b)
}

fn resampling_outcome(
    obs: &Observed,
    p_value: f64,
    alpha: f64,
    ci: Option<(f64, f64)>,
    degenerate_resamples: usize,
) -> TestOutcome {
    let mut warnings = Vec::new();
    if degenerate_resamples > 0 {
        log::debug!("{degenerate_resamples} resamples had zero standard error");
        warnings.push(Warning::DegenerateResamples {
            count: degenerate_resamples,
        });
    }
    TestOutcome {
        statistic: obs.statistic,
        df: None,
        alpha,
        critical_value: None,
        p_value,
        reject: p_value <= alpha,
        ci,
        validity: Validity::NotApplicable,
        degenerate: obs.degenerate,
        warnings,
    }
}

/// Permutation test of equal indices for independent samples.
///
/// The pooled observations are split at random into groups of the original
/// sizes and the studentized difference is recomputed; the p-value is
/// `(1 + #{|S*| >= |S0|}) / (B + 1)`. When there are no more distinct splits
/// than `B`, every split is enumerated instead and the p-value is the exact
/// fraction `#{|S*| >= |S0|} / C(N1 + N2, N1)`.
pub fn permutation_test(
    si: &Sample,
    sy: &Sample,
    measure: MeasureKind,
    alpha: f64,
    spec: &ResamplingSpec,
) -> Result<TestOutcome> {
    spec.require(ResamplingKind::Permutation)?;
    check_alpha(alpha)?;
    check_sizes(si, sy)?;
    let obs = observe(si, sy, measure, 0.0)?;
    let (n1, n2) = (si.len(), sy.len());
    let n = n1 + n2;
    let mut pool: Vec<f64> = si.values().iter().chain(sy.values()).copied().collect();
    pool.sort_unstable_by(|a, b| a.total_cmp(b));

    let stat_for = |mask: &[bool]| -> Result<Option<f64>> {
        let (a, b) = split_sorted(&pool, mask, n1);
        Ok(studentized(&a, &b, measure, 0.0)?.map(|(s, _, _)| s))
    };
    let tally = |stats: Vec<Option<f64>>| -> (usize, usize) {
        let degenerate = stats.iter().filter(|s| s.is_none()).count();
        let extreme = stats
            .iter()
            .filter(|s| as_extreme(s.unwrap_or(0.0), obs.statistic))
            .count();
        (extreme, degenerate)
    };

    let splits = binomial(n, n1);
    if splits <= spec.resamples as u128 {
        let combos = combinations(n, n1);
        // Enumerate on the original order so the identity split reproduces S0.
        let original: Vec<f64> = si.values().iter().chain(sy.values()).copied().collect();
        let stats = combos
            .par_iter()
            .map(|c| {
                let mut mask = vec![false; n];
                for &i in c {
                    mask[i] = true;
                }
                let (mut a, mut b) = split_sorted(&original, &mask, n1);
                a.sort_unstable_by(|x, y| x.total_cmp(y));
                b.sort_unstable_by(|x, y| x.total_cmp(y));
                Ok(studentized(&a, &b, measure, 0.0)?.map(|(s, _, _)| s))
            })
            .collect::<Result<Vec<_>>>()?;
        let (extreme, degenerate) = tally(stats);
        let p = extreme as f64 / combos.len() as f64;
        return Ok(resampling_outcome(&obs, p, alpha, None, degenerate));
    }

    let stats = (0..spec.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = spec.stream.child(b as u64).rng();
            let mut mask = vec![false; n];
            for i in index::sample(&mut rng, n, n1) {
                mask[i] = true;
            }
            stat_for(&mask)
        })
        .collect::<Result<Vec<_>>>()?;
    let (extreme, degenerate) = tally(stats);
    let p = (1 + extreme) as f64 / (spec.resamples + 1) as f64;
    Ok(resampling_outcome(&obs, p, alpha, None, degenerate))
}

/// Sorted bootstrap resample of a sorted sample, built by counting draws.
fn resample_sorted<R: Rng + ?Sized>(sorted: &[f64], rng: &mut R, counts: &mut [u32]) -> Vec<f64> {
    let n = sorted.len();
    counts.iter_mut().for_each(|c| *c = 0);
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (&x, &c) in sorted.iter().zip(counts.iter()) {
        for _ in 0..c {
            out.push(x);
        }
    }
    out
}

/// Symmetric percentile-t bootstrap test of `H0: L_I - L_Y = d0`.
///
/// Each sample is resampled independently with replacement and
/// `S*_b = (diff*_b - diff) / se*_b` is compared in absolute value with the
/// observed statistic. The interval is `diff ± c* se` with `c*` the
/// `(1 - α)` bootstrap quantile of `|S*|`.
pub fn bootstrap_test(
    si: &Sample,
    sy: &Sample,
    measure: MeasureKind,
    d0: f64,
    alpha: f64,
    spec: &ResamplingSpec,
) -> Result<TestOutcome> {
    spec.require(ResamplingKind::Bootstrap)?;
    check_alpha(alpha)?;
    check_sizes(si, sy)?;
    let obs = observe(si, sy, measure, d0)?;
    let sorted_i = sorted_copy(si);
    let sorted_y = sorted_copy(sy);

    let stats = (0..spec.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = spec.stream.child(b as u64).rng();
            let mut counts_i = vec![0u32; sorted_i.len()];
            let mut counts_y = vec![0u32; sorted_y.len()];
            let a = resample_sorted(&sorted_i, &mut rng, &mut counts_i);
            let c = resample_sorted(&sorted_y, &mut rng, &mut counts_y);
            Ok(studentized(&a, &c, measure, obs.diff)?.map(|(s, _, _)| s))
        })
        .collect::<Result<Vec<_>>>()?;

    let degenerate = stats.iter().filter(|s| s.is_none()).count();
    let mut abs: Vec<f64> = stats.iter().map(|s| s.unwrap_or(0.0).abs()).collect();
    let extreme = abs.iter().filter(|&&s| as_extreme(s, obs.statistic)).count();
    let p = (1 + extreme) as f64 / (spec.resamples + 1) as f64;

    abs.sort_unstable_by(|a, b| a.total_cmp(b));
    let rank = ((spec.resamples + 1) as f64 * (1.0 - alpha)).ceil() as usize;
    let c_star = if rank == 0 {
        0.0
    } else if rank > abs.len() {
        f64::INFINITY
    } else {
        abs[rank - 1]
    };
    let ci = if obs.se > 0.0 {
        (obs.diff - c_star * obs.se, obs.diff + c_star * obs.se)
    } else {
        (obs.diff, obs.diff)
    };
    Ok(resampling_outcome(&obs, p, alpha, Some(ci), degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sm_sample_stream, SMParams};
    use crate::measures::gini_values;
    use approx::assert_relative_eq;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec(), "t").unwrap()
    }

    fn est(value: f64, se: f64) -> MeasureEstimate {
        MeasureEstimate {
            kind: MeasureKind::Gini,
            value,
            se,
            n: 100,
        }
    }

    #[test]
    fn asymptotic_examples() {
        let out = asymptotic_test(&est(0.3, 0.01), &est(0.3, 0.01), 0.0, 0.05).unwrap();
        assert_eq!(out.p_value, 1.0);
        assert!(!out.reject);

        let out = asymptotic_test(&est(0.30, 0.01), &est(0.26, 0.01), 0.0, 0.05).unwrap();
        assert_relative_eq!(out.statistic, 4.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert!(out.reject);

        // |S| = 1.96 sits just above the 1.959964 critical value
        let out = asymptotic_test(&est(1.96, 1.0), &est(0.0, 0.0), 0.0, 0.05).unwrap();
        assert!(out.reject);
        let z = normal_quantile(0.975);
        let out = asymptotic_test(&est(z, 1.0), &est(0.0, 0.0), 0.0, 0.05).unwrap();
        assert!(!out.reject, "boundary value must not reject");

        assert!(matches!(
            asymptotic_test(&est(0.3, 0.0), &est(0.2, 0.0), 0.0, 0.05),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn constant_samples_never_reject() {
        let s = sample(&[2.0; 10]);
        let stream = Stream::from_seed(1);
        let out = permutation_test(&s, &s, MeasureKind::Gini, 0.05, &ResamplingSpec::permutation(99, stream)).unwrap();
        assert_eq!(out.p_value, 1.0);
        assert!(!out.reject);
        let out = bootstrap_test(&s, &s, MeasureKind::Theil, 0.0, 0.05, &ResamplingSpec::bootstrap(99, stream)).unwrap();
        assert_eq!(out.p_value, 1.0);
    }

    /// Brute-force oracle over every split of six observations.
    fn enumerated_p(xi: &[f64], xy: &[f64]) -> f64 {
        let pooled: Vec<f64> = xi.iter().chain(xy).copied().collect();
        let stat = |a: &[f64], b: &[f64]| {
            let (ea, eb) = (gini_values(a).unwrap(), gini_values(b).unwrap());
            let se = (ea.se * ea.se + eb.se * eb.se).sqrt();
            if se > 0.0 {
                (ea.value - eb.value) / se
            } else {
                0.0
            }
        };
        let s0 = stat(xi, xy).abs();
        let (mut hits, mut total) = (0, 0);
        for i in 0..6 {
            for j in i + 1..6 {
                for k in j + 1..6 {
                    let a: Vec<f64> = [i, j, k].iter().map(|&t| pooled[t]).collect();
                    let b: Vec<f64> = (0..6)
                        .filter(|t| ![i, j, k].contains(t))
                        .map(|t| pooled[t])
                        .collect();
                    total += 1;
                    if stat(&a, &b).abs() >= s0 * (1.0 - 1e-10) {
                        hits += 1;
                    }
                }
            }
        }
        assert_eq!(total, 20);
        hits as f64 / total as f64
    }

    #[test]
    fn permutation_exact_enumeration() {
        let xi = [1.0, 2.5, 7.0];
        let xy = [1.5, 1.7, 2.0];
        let expected = enumerated_p(&xi, &xy);
        let (si, sy) = (sample(&xi), sample(&xy));
        let stream = Stream::from_seed(5);
        let exact = permutation_test(&si, &sy, MeasureKind::Gini, 0.05, &ResamplingSpec::permutation(20, stream)).unwrap();
        assert_eq!(exact.p_value, expected);

        let b = 19_999;
        let mc = permutation_test(&si, &sy, MeasureKind::Gini, 0.05, &ResamplingSpec::permutation(b, stream)).unwrap();
        let sd = (expected * (1.0 - expected) / b as f64).sqrt();
        assert!((mc.p_value - expected).abs() < 4.0 * sd + 1.0 / (b + 1) as f64);
    }

    #[test]
    fn exact_permutation_level_holds_over_all_assignments() {
        let pooled = [0.7, 1.1, 1.9, 2.4, 3.3, 5.0, 8.2, 13.6];
        let splits = combinations(8, 4);
        let p_values: Vec<f64> = splits
            .iter()
            .map(|idx| {
                let a: Vec<f64> = idx.iter().map(|&t| pooled[t]).collect();
                let b: Vec<f64> = (0..8).filter(|t| !idx.contains(t)).map(|t| pooled[t]).collect();
                let spec = ResamplingSpec::permutation(100, Stream::from_seed(1));
                permutation_test(&sample(&a), &sample(&b), MeasureKind::Gini, 0.05, &spec)
                    .unwrap()
                    .p_value
            })
            .collect();
        assert_eq!(p_values.len(), 70);
        for alpha in [0.05, 0.1, 0.2, 0.5] {
            let share = p_values.iter().filter(|&&p| p <= alpha).count() as f64 / 70.0;
            assert!(share <= alpha + 1e-12, "alpha {alpha}: share {share}");
        }
    }

    #[test]
    fn combinations_enumerate_everything() {
        let c = combinations(6, 3);
        assert_eq!(c.len(), 20);
        assert_eq!(c[0], vec![0, 1, 2]);
        assert_eq!(c[19], vec![3, 4, 5]);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(400, 200), u128::MAX);
        assert_eq!(combinations(4, 1).len(), 4);
    }

    #[test]
    fn resampling_p_values_are_on_the_lattice_and_deterministic() {
        let p = SMParams::with_b0(2.8, 1.7).unwrap();
        let si = sm_sample_stream(&p, 60, &Stream::from_seed(1));
        let sy = sm_sample_stream(&p, 40, &Stream::from_seed(2));
        let b = 199;
        for spec in [
            ResamplingSpec::permutation(b, Stream::from_seed(9)),
            ResamplingSpec::bootstrap(b, Stream::from_seed(9)),
        ] {
            let run = || match spec.kind {
                ResamplingKind::Permutation => permutation_test(&si, &sy, MeasureKind::Theil, 0.05, &spec),
                _ => bootstrap_test(&si, &sy, MeasureKind::Theil, 0.0, 0.05, &spec),
            }
            .unwrap();
            let first = run();
            let k = first.p_value * (b + 1) as f64;
            assert!((k - k.round()).abs() < 1e-9 && k >= 1.0 && k <= (b + 1) as f64);
            assert_eq!(first, run());

            let scaled = match spec.kind {
                ResamplingKind::Permutation => permutation_test(
                    &si.scaled(37.0).unwrap(), &sy.scaled(37.0).unwrap(), MeasureKind::Theil, 0.05, &spec),
                _ => bootstrap_test(
                    &si.scaled(37.0).unwrap(), &sy.scaled(37.0).unwrap(), MeasureKind::Theil, 0.0, 0.05, &spec),
            }
            .unwrap();
            assert_eq!(scaled.reject, first.reject);
        }
    }

    #[test]
    fn bootstrap_detects_large_difference() {
        let pi = SMParams::with_b0(5.8, 1.5).unwrap();
        let py = SMParams::with_b0(1.5, 1.5).unwrap();
        let si = sm_sample_stream(&pi, 300, &Stream::from_seed(3));
        let sy = sm_sample_stream(&py, 300, &Stream::from_seed(4));
        let spec = ResamplingSpec::bootstrap(199, Stream::from_seed(11));
        let out = bootstrap_test(&si, &sy, MeasureKind::Gini, 0.0, 0.05, &spec).unwrap();
        assert!(out.reject);
        let (lo, hi) = out.ci.unwrap();
        assert!(hi < 0.0 && lo < hi);
    }

    #[test]
    fn rejects_bad_specifications() {
        let s = sample(&[1.0, 2.0, 3.0]);
        let stream = Stream::from_seed(0);
        assert!(permutation_test(&s, &s, MeasureKind::Gini, 0.05, &ResamplingSpec::bootstrap(9, stream)).is_err());
        assert!(permutation_test(&s, &s, MeasureKind::Gini, 0.05, &ResamplingSpec::permutation(0, stream)).is_err());
        assert!(bootstrap_test(&s, &sample(&[1.0]), MeasureKind::Gini, 0.0, 0.05, &ResamplingSpec::bootstrap(9, stream)).is_err());
    }
}
