//! C ABI for `robust-ineq`.
//!
//! Samples are opaque handles created with [`ri_sample_new`] and released
//! with [`ri_sample_free`]. Every fallible call returns an [`RiStatus`] and
//! writes its result through an out-pointer; on failure the out-pointer is
//! left untouched and [`ri_last_error`] returns a message for the calling
//! thread. Measures are selected with an `RI_MEASURE_*` code plus a GE
//! parameter that is ignored for Gini and Theil.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use robust_ineq::distributions::{theoretical_index, SMParams};
use robust_ineq::error::Error;
use robust_ineq::measures::estimate;
use robust_ineq::resampling::{asymptotic_test, bootstrap_test, permutation_test, ResamplingSpec};
use robust_ineq::rng::Stream;
use robust_ineq::robust_tests::{
    robust_pipeline, Alternative, Degeneracy, GroupSpec, Hypothesis, PipelineInput, TestOutcome, Validity,
};
use robust_ineq::sample::{MeasureKind, Sample};
use robust_ineq::tail_index::{rank_size_estimate_with, TailTruncation};

pub const RI_MEASURE_GINI: u32 = 0;
pub const RI_MEASURE_THEIL: u32 = 1;
pub const RI_MEASURE_GE: u32 = 2;

pub const RI_ALTERNATIVE_TWO_SIDED: u32 = 0;
pub const RI_ALTERNATIVE_GREATER: u32 = 1;
pub const RI_ALTERNATIVE_LESS: u32 = 2;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    MomentNonexistent = 4,
    InsufficientData = 5,
    Degenerate = 6,
    Singular = 7,
    Specification = 8,
    Data = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiValidity {
    Guaranteed = 0,
    OutsideGuarantee = 1,
    NotApplicable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiDegeneracy {
    None = 0,
    Rejection = 1,
    NonRejection = 2,
}

/// Opaque sample handle.
pub struct RiSample {
    inner: Sample,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiEstimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

/// Outcome of a test. Absent quantities are NaN; `df` is -1 when the
/// reference distribution is not Student-t.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiTestResult {
    pub statistic: f64,
    pub df: i32,
    pub alpha: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub validity: RiValidity,
    pub degenerate: RiDegeneracy,
    pub warning_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiTailEstimate {
    pub zeta: f64,
    pub se: f64,
    pub k: usize,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RiStatus {
    match e {
        Error::Domain(_) => RiStatus::Domain,
        Error::MomentNonexistent { .. } => RiStatus::MomentNonexistent,
        Error::InsufficientData(_) => RiStatus::InsufficientData,
        Error::Degenerate(_) => RiStatus::Degenerate,
        Error::Singular(_) => RiStatus::Singular,
        Error::Specification(_) | Error::Usage(_) => RiStatus::Specification,
        Error::Data { .. } => RiStatus::Data,
        Error::Io(_) => RiStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Run `f`, writing its value to `out` on success and recording the error
/// otherwise.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, Failure>) -> RiStatus {
    if out.is_null() {
        set_last_error("output pointer is null".into());
        return RiStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller guarantees it is writable.
            unsafe { out.write(v) };
            RiStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            RiStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_last_error(msg);
            RiStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RiStatus::Panic
        }
    }
}

fn measure(kind: u32, ge_alpha: f64) -> Result<MeasureKind, Failure> {
    match kind {
        RI_MEASURE_GINI => Ok(MeasureKind::Gini),
        RI_MEASURE_THEIL => Ok(MeasureKind::Theil),
        RI_MEASURE_GE if ge_alpha.is_finite() => Ok(MeasureKind::Ge(ge_alpha)),
        RI_MEASURE_GE => Err(Failure::Arg(format!("GE parameter must be finite, got {ge_alpha}"))),
        other => Err(Failure::Arg(format!("unknown measure code {other}"))),
    }
}

fn alternative(code: u32) -> Result<Alternative, Failure> {
    match code {
        RI_ALTERNATIVE_TWO_SIDED => Ok(Alternative::TwoSided),
        RI_ALTERNATIVE_GREATER => Ok(Alternative::Greater),
        RI_ALTERNATIVE_LESS => Ok(Alternative::Less),
        other => Err(Failure::Arg(format!("unknown alternative code {other}"))),
    }
}

fn sample<'a>(s: *const RiSample, what: &'static str) -> Result<&'a Sample, Failure> {
    // SAFETY: a non-null handle came from `ri_sample_new` and is still live.
    unsafe { s.as_ref() }.map(|h| &h.inner).ok_or(Failure::Null(what))
}

fn to_result(o: TestOutcome) -> RiTestResult {
    let (ci_lower, ci_upper) = o.ci.unwrap_or((f64::NAN, f64::NAN));
    RiTestResult {
        statistic: o.statistic,
        df: o.df.map_or(-1, |d| d as i32),
        alpha: o.alpha,
        critical_value: o.critical_value.unwrap_or(f64::NAN),
        p_value: o.p_value,
        reject: o.reject,
        ci_lower,
        ci_upper,
        validity: match o.validity {
            Validity::Guaranteed => RiValidity::Guaranteed,
            Validity::OutsideGuarantee => RiValidity::OutsideGuarantee,
            Validity::NotApplicable => RiValidity::NotApplicable,
        },
        degenerate: match o.degenerate {
            None => RiDegeneracy::None,
            Some(Degeneracy::Rejection) => RiDegeneracy::Rejection,
            Some(Degeneracy::NonRejection) => RiDegeneracy::NonRejection,
        },
        warning_count: o.warnings.len(),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ri_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ri_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Copy `len` observations into a new sample handle. Observations must be
/// finite and non-negative; `values` may be null only when `len` is 0.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ri_sample_new(values: *const f64, len: usize, out: *mut *mut RiSample) -> RiStatus {
    guarded(out, || {
        let data = if len == 0 {
            Vec::new()
        } else if values.is_null() {
            return Err(Failure::Null("values"));
        } else {
            // SAFETY: caller guarantees `len` readable doubles.
            unsafe { std::slice::from_raw_parts(values, len) }.to_vec()
        };
        let inner = Sample::new(data, "ffi")?;
        Ok(Box::into_raw(Box::new(RiSample { inner })))
    })
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `s` must be null or a live handle from [`ri_sample_new`], not used again.
#[no_mangle]
pub unsafe extern "C" fn ri_sample_free(s: *mut RiSample) {
    if !s.is_null() {
        // SAFETY: `s` came from `Box::into_raw` in `ri_sample_new`.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Number of observations; 0 for null.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ri_sample_len(s: *const RiSample) -> usize {
    // SAFETY: see function contract.
    unsafe { s.as_ref() }.map_or(0, |h| h.inner.len())
}

/// Point estimate and asymptotic standard error.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_estimate(s: *const RiSample, kind: u32, ge_alpha: f64, out: *mut RiEstimate) -> RiStatus {
    guarded(out, || {
        let e = estimate(sample(s, "sample")?, measure(kind, ge_alpha)?)?;
        Ok(RiEstimate {
            value: e.value,
            se: e.se,
            n: e.n,
        })
    })
}

/// Group t-test of `H0: L = l0` with `q` groups.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_one_sample_test(
    s: *const RiSample,
    kind: u32,
    ge_alpha: f64,
    q: usize,
    l0: f64,
    alpha: f64,
    alt: u32,
    out: *mut RiTestResult,
) -> RiStatus {
    guarded(out, || {
        let o = robust_pipeline(
            PipelineInput::One(sample(s, "sample")?),
            measure(kind, ge_alpha)?,
            GroupSpec::One(q),
            Hypothesis::Level(l0),
            alpha,
            alternative(alt)?,
        )?;
        Ok(to_result(o))
    })
}

/// Group t-test of `H0: L_I - L_Y = d0` for independent samples.
///
/// # Safety
/// `si`, `sy` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_two_sample_test(
    si: *const RiSample,
    sy: *const RiSample,
    kind: u32,
    ge_alpha: f64,
    q1: usize,
    q2: usize,
    d0: f64,
    alpha: f64,
    alt: u32,
    out: *mut RiTestResult,
) -> RiStatus {
    guarded(out, || {
        let o = robust_pipeline(
            PipelineInput::Two(sample(si, "first sample")?, sample(sy, "second sample")?),
            measure(kind, ge_alpha)?,
            GroupSpec::Two(q1, q2),
            Hypothesis::Difference(d0),
            alpha,
            alternative(alt)?,
        )?;
        Ok(to_result(o))
    })
}

/// Group t-test on paired group differences, `q` groups in each sample.
///
/// # Safety
/// `si`, `sy` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_paired_difference_test(
    si: *const RiSample,
    sy: *const RiSample,
    kind: u32,
    ge_alpha: f64,
    q: usize,
    d0: f64,
    alpha: f64,
    alt: u32,
    out: *mut RiTestResult,
) -> RiStatus {
    guarded(out, || {
        let o = robust_pipeline(
            PipelineInput::Two(sample(si, "first sample")?, sample(sy, "second sample")?),
            measure(kind, ge_alpha)?,
            GroupSpec::One(q),
            Hypothesis::PairedDifference(d0),
            alpha,
            alternative(alt)?,
        )?;
        Ok(to_result(o))
    })
}

/// Two-sample test against the standard normal.
///
/// # Safety
/// `si`, `sy` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_asymptotic_test(
    si: *const RiSample,
    sy: *const RiSample,
    kind: u32,
    ge_alpha: f64,
    d0: f64,
    alpha: f64,
    out: *mut RiTestResult,
) -> RiStatus {
    guarded(out, || {
        let m = measure(kind, ge_alpha)?;
        let ei = estimate(sample(si, "first sample")?, m)?;
        let ey = estimate(sample(sy, "second sample")?, m)?;
        Ok(to_result(asymptotic_test(&ei, &ey, d0, alpha)?))
    })
}

/// Permutation test of equal indices with `resamples` random splits.
///
/// # Safety
/// `si`, `sy` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_permutation_test(
    si: *const RiSample,
    sy: *const RiSample,
    kind: u32,
    ge_alpha: f64,
    alpha: f64,
    resamples: usize,
    seed: u64,
    out: *mut RiTestResult,
) -> RiStatus {
    guarded(out, || {
        let spec = ResamplingSpec::permutation(resamples, Stream::from_seed(seed));
        let o = permutation_test(
            sample(si, "first sample")?,
            sample(sy, "second sample")?,
            measure(kind, ge_alpha)?,
            alpha,
            &spec,
        )?;
        Ok(to_result(o))
    })
}

/// Bootstrap test of `H0: L_I - L_Y = d0` with `resamples` draws.
///
/// # Safety
/// `si`, `sy` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_bootstrap_test(
    si: *const RiSample,
    sy: *const RiSample,
    kind: u32,
    ge_alpha: f64,
    d0: f64,
    alpha: f64,
    resamples: usize,
    seed: u64,
    out: *mut RiTestResult,
) -> RiStatus {
    guarded(out, || {
        let spec = ResamplingSpec::bootstrap(resamples, Stream::from_seed(seed));
        let o = bootstrap_test(
            sample(si, "first sample")?,
            sample(sy, "second sample")?,
            measure(kind, ge_alpha)?,
            d0,
            alpha,
            &spec,
        )?;
        Ok(to_result(o))
    })
}

/// Rank-size tail index over the top `tail_fraction` of the sample, or over
/// the next block when `discard_top` is set.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ri_tail_index(
    s: *const RiSample,
    tail_fraction: f64,
    discard_top: bool,
    out: *mut RiTailEstimate,
) -> RiStatus {
    guarded(out, || {
        let truncation = if discard_top {
            TailTruncation::DiscardTop
        } else {
            TailTruncation::TopAsTail
        };
        let t = rank_size_estimate_with(sample(s, "sample")?, tail_fraction, truncation)?;
        Ok(RiTailEstimate {
            zeta: t.zeta,
            se: t.se,
            k: t.k,
            ci_lower: t.ci95.0,
            ci_upper: t.ci95.1,
        })
    })
}

/// Population index of the Singh-Maddala distribution with shape `a`,
/// scale `b` and shape `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ri_sm_theoretical_index(
    a: f64,
    b: f64,
    c: f64,
    kind: u32,
    ge_alpha: f64,
    out: *mut f64,
) -> RiStatus {
    guarded(out, || {
        let p = SMParams::new(a, b, c)?;
        Ok(theoretical_index(&p, measure(kind, ge_alpha)?)?)
    })
}
