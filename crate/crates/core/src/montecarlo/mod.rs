//! Monte Carlo engine for empirical size and size-adjusted power of the
//! group t-tests and their competitors on Singh-Maddala samples.
//!
//! Replication `r` draws sample I from `seed.child(r).child(0)`, sample Y
//! from `.child(1)` and gives the `i`-th roster test `.child(2 + i)` for its
//! resamples. A null run and an alternative run with the same seed therefore
//! share random numbers, and no result depends on the worker count.

pub mod density;
pub mod presets;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distributions::{sm_sample_stream, theoretical_index, SMParams};
use crate::error::{Error, Result};
use crate::measures::estimate;
use crate::resampling::{
    asymptotic_one_sample_test, asymptotic_test, bootstrap_test, permutation_test, ResamplingSpec,
};
use crate::rng::Stream;
use crate::robust_tests::{
    group_estimates, one_sample_test, paired_difference_test, two_sample_test, GroupEstimates,
};
use crate::sample::{MeasureKind, Sample};

pub use density::{
    kde, z_s_density_diagnostic, Bandwidth, DensityCurve, DensityDesign, DensitySpec, TrueSdCache,
};
pub use presets::{find_preset, preset_catalog, Preset, PresetColumn, PresetKind};

pub const DEFAULT_REPLICATIONS: usize = 10_000;

/// One entry of a test roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestSpec {
    /// Normal approximation to the full-sample `S` statistic.
    Asymptotic,
    /// One-sample group t-test with `q` groups.
    OneSample { q: usize },
    /// Two-sample group t-test with `q1` groups in I and `q2` in Y.
    TwoSample { q1: usize, q2: usize },
    /// One-sample t-test on the `q` paired group differences.
    Paired { q: usize },
    Permutation { b: usize },
    Bootstrap { b: usize },
}

impl TestSpec {
    pub fn is_resampling(&self) -> bool {
        matches!(self, TestSpec::Permutation { .. } | TestSpec::Bootstrap { .. })
    }

    /// Parseable form, the inverse of [`FromStr`].
    pub fn code(&self) -> String {
        match self {
            TestSpec::Asymptotic => "asymptotic".into(),
            TestSpec::OneSample { q } => format!("t:{q}"),
            TestSpec::TwoSample { q1, q2 } => format!("t2:{q1},{q2}"),
            TestSpec::Paired { q } => format!("tdiff:{q}"),
            TestSpec::Permutation { b } => format!("perm:{b}"),
            TestSpec::Bootstrap { b } => format!("boot:{b}"),
        }
    }

    fn needs_second_sample(&self) -> bool {
        matches!(
            self,
            TestSpec::TwoSample { .. }
                | TestSpec::Paired { .. }
                | TestSpec::Permutation { .. }
                | TestSpec::Bootstrap { .. }
        )
    }
}

impl fmt::Display for TestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestSpec::Asymptotic => write!(f, "asymptotic"),
            TestSpec::OneSample { q } => write!(f, "t(q={q})"),
            TestSpec::TwoSample { q1, q2 } if q1 == q2 => write!(f, "t2(q={q1})"),
            TestSpec::TwoSample { q1, q2 } => write!(f, "t2(q1={q1},q2={q2})"),
            TestSpec::Paired { q } => write!(f, "tdiff(q={q})"),
            TestSpec::Permutation { .. } => write!(f, "permutation"),
            TestSpec::Bootstrap { .. } => write!(f, "bootstrap"),
        }
    }
}

/// Parses `asymptotic`, `t:4`, `t2:4,4`, `tdiff:4`, `perm:999`, `boot:999`.
impl FromStr for TestSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Usage(format!("cannot parse test '{s}'"));
        let num = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        if s == "asymptotic" {
            return Ok(TestSpec::Asymptotic);
        }
        let (head, tail) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "t" => Ok(TestSpec::OneSample { q: num(tail)? }),
            "t2" => {
                let (a, b) = tail.split_once(',').unwrap_or((tail, tail));
                Ok(TestSpec::TwoSample { q1: num(a)?, q2: num(b)? })
            }
            "tdiff" => Ok(TestSpec::Paired { q: num(tail)? }),
            "perm" => Ok(TestSpec::Permutation { b: num(tail)? }),
            "boot" => Ok(TestSpec::Bootstrap { b: num(tail)? }),
            _ => Err(bad()),
        }
    }
}

/// A single simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub label: String,
    pub generator_i: SMParams,
    /// `None` for one-sample designs.
    pub generator_y: Option<SMParams>,
    pub n1: usize,
    pub n2: usize,
    pub measure: MeasureKind,
    pub tests: Vec<TestSpec>,
    pub alpha: f64,
    pub replications: usize,
    pub seed: u64,
    /// Hypothesized difference (two-sample) or level (one-sample); the
    /// population value under the generators when `None`.
    pub hypothesis: Option<f64>,
}

impl SimSpec {
    pub fn is_two_sample(&self) -> bool {
        self.generator_y.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::spec("replications must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::spec(format!("level must lie in (0, 1), got {}", self.alpha)));
        }
        if self.n1 < 2 || (self.is_two_sample() && self.n2 < 2) {
            return Err(Error::spec("sample sizes must be at least 2"));
        }
        for t in &self.tests {
            if t.needs_second_sample() && !self.is_two_sample() {
                return Err(Error::spec(format!("{t} needs a second sample")));
            }
            if matches!(t, TestSpec::OneSample { .. }) && self.is_two_sample() {
                return Err(Error::spec(format!("{t} is a one-sample test")));
            }
            let fits = |q: usize, n: usize| q >= 2 && n >= 2 * q;
            let ok = match *t {
                TestSpec::Asymptotic => true,
                TestSpec::OneSample { q } => fits(q, self.n1),
                TestSpec::TwoSample { q1, q2 } => fits(q1, self.n1) && fits(q2, self.n2),
                TestSpec::Paired { q } => fits(q, self.n1) && fits(q, self.n2),
                TestSpec::Permutation { b } | TestSpec::Bootstrap { b } => b >= 1,
            };
            if !ok {
                return Err(Error::spec(format!(
                    "{t} is not applicable with N1 = {}, N2 = {}",
                    self.n1, self.n2
                )));
            }
        }
        Ok(())
    }

    /// Hypothesized value: explicit, or the population value under the
    /// generators.
    pub fn resolved_hypothesis(&self) -> Result<f64> {
        if let Some(h) = self.hypothesis {
            return Ok(h);
        }
        let li = theoretical_index(&self.generator_i, self.measure)?;
        match &self.generator_y {
            None => Ok(li),
            Some(gy) => Ok(li - theoretical_index(gy, self.measure)?),
        }
    }
}

/// Rejection rate of one test, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct SizePowerCell {
    pub test: TestSpec,
    pub rejection_rate: f64,
    /// Monte Carlo standard error in percentage points; `None` below two
    /// replications.
    pub mc_se: Option<f64>,
    pub rejections: usize,
    pub replications: usize,
    /// Whether the critical value was calibrated on a null run.
    pub size_adjusted: bool,
}

impl SizePowerCell {
    fn new(test: TestSpec, rejections: usize, replications: usize, size_adjusted: bool) -> Self {
        let r = rejections as f64 / replications as f64;
        let mc_se = (replications >= 2).then(|| 100.0 * (r * (1.0 - r) / replications as f64).sqrt());
        SizePowerCell {
            test,
            rejection_rate: 100.0 * r,
            mc_se,
            rejections,
            replications,
            size_adjusted,
        }
    }
}

/// Statistic and decision of one test in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestDraw {
    pub statistic: f64,
    pub reject: bool,
}

struct Replication<'a> {
    i: Sample,
    y: Option<Sample>,
    groups: Vec<(bool, usize, GroupEstimates)>,
    measure: MeasureKind,
    stream: &'a Stream,
}

impl Replication<'_> {
    fn groups(&mut self, second: bool, q: usize) -> Result<GroupEstimates> {
        if let Some((_, _, g)) = self.groups.iter().find(|(s, k, _)| *s == second && *k == q) {
            return Ok(g.clone());
        }
        let sample = if second { self.y.as_ref().expect("validated") } else { &self.i };
        let g = group_estimates(sample, self.measure, q)?;
        self.groups.push((second, q, g.clone()));
        Ok(g)
    }
}

fn run_one(spec: &SimSpec, hypothesis: f64, tests: &[(usize, TestSpec)], r: usize) -> Result<Vec<TestDraw>> {
    let stream = Stream::from_seed(spec.seed).child(r as u64);
    let i = sm_sample_stream(&spec.generator_i, spec.n1, &stream.child(0));
    let y = spec
        .generator_y
        .as_ref()
        .map(|g| sm_sample_stream(g, spec.n2, &stream.child(1)));
    let mut rep = Replication {
        i,
        y,
        groups: Vec::new(),
        measure: spec.measure,
        stream: &stream,
    };
    let alpha = spec.alpha;
    let mut out = Vec::with_capacity(tests.len());
    for &(idx, test) in tests {
        let outcome = match test {
            TestSpec::Asymptotic => match &rep.y {
                None => asymptotic_one_sample_test(&estimate(&rep.i, spec.measure)?, hypothesis, alpha)?,
                Some(y) => asymptotic_test(
                    &estimate(&rep.i, spec.measure)?,
                    &estimate(y, spec.measure)?,
                    hypothesis,
                    alpha,
                )?,
            },
            TestSpec::OneSample { q } => one_sample_test(&rep.groups(false, q)?, hypothesis, alpha)?,
            TestSpec::TwoSample { q1, q2 } => {
                let gi = rep.groups(false, q1)?;
                let gy = rep.groups(true, q2)?;
                two_sample_test(&gi, &gy, hypothesis, alpha)?
            }
            TestSpec::Paired { q } => {
                let gi = rep.groups(false, q)?;
                let gy = rep.groups(true, q)?;
                paired_difference_test(&gi, &gy, hypothesis, alpha)?
            }
            TestSpec::Permutation { b } => {
                let rs = ResamplingSpec::permutation(b, rep.stream.child(2 + idx as u64));
                permutation_test(&rep.i, rep.y.as_ref().expect("validated"), spec.measure, alpha, &rs)?
            }
            TestSpec::Bootstrap { b } => {
                let rs = ResamplingSpec::bootstrap(b, rep.stream.child(2 + idx as u64));
                bootstrap_test(&rep.i, rep.y.as_ref().expect("validated"), spec.measure, hypothesis, alpha, &rs)?
            }
        };
        out.push(TestDraw {
            statistic: outcome.statistic,
            reject: outcome.reject,
        });
    }
    Ok(out)
}

/// Run every replication of `spec` for the roster entries in `tests`,
/// returning draws indexed `[replication][test]`.
fn simulate(spec: &SimSpec, hypothesis: f64, tests: &[(usize, TestSpec)]) -> Result<Vec<Vec<TestDraw>>> {
    (0..spec.replications)
        .into_par_iter()
        .map(|r| run_one(spec, hypothesis, tests, r))
        .collect()
}

/// All per-replication draws of a design, for diagnostics and custom
/// aggregation.
pub fn simulate_draws(spec: &SimSpec) -> Result<Vec<Vec<TestDraw>>> {
    spec.validate()?;
    let hypothesis = spec.resolved_hypothesis()?;
    let roster: Vec<(usize, TestSpec)> = spec.tests.iter().copied().enumerate().collect();
    simulate(spec, hypothesis, &roster)
}

/// Empirical size (or raw rejection rate) of each roster test.
pub fn run_size_experiment(spec: &SimSpec) -> Result<Vec<SizePowerCell>> {
    let draws = simulate_draws(spec)?;
    Ok(spec
        .tests
        .iter()
        .enumerate()
        .map(|(t, &test)| {
            let rejections = draws.iter().filter(|d| d[t].reject).count();
            SizePowerCell::new(test, rejections, spec.replications, false)
        })
        .collect())
}

/// Rejection rate each size-adjusted test is calibrated to hit under the
/// null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjustmentTarget {
    /// The nominal level α.
    #[default]
    Nominal,
    /// The empirical null rejection rate of the permutation test in the
    /// roster.
    Permutation,
}

/// Empirical critical value: the smallest `c` among the observed `|t|` with
/// at most a fraction `rate` of them exceeding it.
pub fn empirical_critical_value(abs_stats: &mut [f64], rate: f64) -> f64 {
    abs_stats.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = abs_stats.len();
    let k = ((1.0 - rate) * n as f64).ceil() as usize;
    if k == 0 {
        return 0.0;
    }
    abs_stats[k.min(n) - 1]
}

/// Size-adjusted power of every non-resampling test, with permutation and
/// bootstrap tests reported unadjusted.
///
/// The critical value of each adjusted test is the empirical quantile of
/// `|statistic|` over `null_spec`'s replications; both runs share random
/// numbers through the seed. Both designs test the hypothesis of `null_spec`.
pub fn run_power_experiment(spec: &SimSpec, null_spec: &SimSpec) -> Result<Vec<SizePowerCell>> {
    run_power_experiment_with(spec, null_spec, AdjustmentTarget::Nominal)
}

pub fn run_power_experiment_with(
    spec: &SimSpec,
    null_spec: &SimSpec,
    target: AdjustmentTarget,
) -> Result<Vec<SizePowerCell>> {
    spec.validate()?;
    null_spec.validate()?;
    if spec.measure != null_spec.measure
        || spec.tests != null_spec.tests
        || spec.alpha != null_spec.alpha
        || spec.n1 != null_spec.n1
        || spec.n2 != null_spec.n2
        || spec.replications != null_spec.replications
        || spec.is_two_sample() != null_spec.is_two_sample()
    {
        return Err(Error::spec(
            "power and null designs must share measure, roster, level, sizes and replications",
        ));
    }
    let hypothesis = null_spec.resolved_hypothesis()?;

    let perm_index = spec.tests.iter().position(|t| matches!(t, TestSpec::Permutation { .. }));
    let null_roster: Vec<(usize, TestSpec)> = spec
        .tests
        .iter()
        .copied()
        .enumerate()
        .filter(|(i, t)| !t.is_resampling() || (target == AdjustmentTarget::Permutation && Some(*i) == perm_index))
        .collect();
    let null_draws = simulate(null_spec, hypothesis, &null_roster)?;

    let target_rate = match target {
        AdjustmentTarget::Nominal => spec.alpha,
        AdjustmentTarget::Permutation => {
            let p = perm_index
                .ok_or_else(|| Error::spec("permutation-matched adjustment needs a permutation test"))?;
            let col = null_roster.iter().position(|(i, _)| *i == p).expect("kept");
            null_draws.iter().filter(|d| d[col].reject).count() as f64 / null_spec.replications as f64
        }
    };
    let mut critical = vec![f64::NAN; spec.tests.len()];
    for (col, &(i, test)) in null_roster.iter().enumerate() {
        if test.is_resampling() {
            continue;
        }
        let mut abs: Vec<f64> = null_draws.iter().map(|d| d[col].statistic.abs()).collect();
        critical[i] = empirical_critical_value(&mut abs, target_rate);
    }

    let roster: Vec<(usize, TestSpec)> = spec.tests.iter().copied().enumerate().collect();
    let draws = simulate(spec, hypothesis, &roster)?;
    Ok(spec
        .tests
        .iter()
        .enumerate()
        .map(|(t, &test)| {
            let adjusted = !test.is_resampling();
            let rejections = draws
                .iter()
                .filter(|d| {
                    if adjusted {
                        d[t].statistic.abs() > critical[t]
                    } else {
                        d[t].reject
                    }
                })
                .count();
            SizePowerCell::new(test, rejections, spec.replications, adjusted)
        })
        .collect())
}

/// Run `f` on a dedicated pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Usage("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
