//! The C entry points agree with the Rust library they wrap.

use std::ffi::CStr;
use std::ptr;

use robust_ineq::distributions::{sm_sample_stream, theoretical_index, SMParams};
use robust_ineq::measures::estimate;
use robust_ineq::resampling::{permutation_test, ResamplingSpec};
use robust_ineq::rng::Stream;
use robust_ineq::robust_tests::{group_estimates, one_sample_test, two_sample_test};
use robust_ineq::sample::{MeasureKind, Sample};
use robust_ineq::tail_index::rank_size_estimate;
use robust_ineq_ffi::*;

struct Handle(*mut RiSample);

impl Handle {
    fn new(xs: &[f64]) -> Self {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { ri_sample_new(xs.as_ptr(), xs.len(), &mut h) }, RiStatus::Ok);
        Handle(h)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { ri_sample_free(self.0) };
    }
}

fn draw(a: f64, c: f64, n: usize, seed: u64) -> Sample {
    sm_sample_stream(&SMParams::with_b0(a, c).unwrap(), n, &Stream::from_seed(seed))
}

fn blank() -> RiTestResult {
    RiTestResult {
        statistic: 0.0,
        df: 0,
        alpha: 0.0,
        critical_value: 0.0,
        p_value: 0.0,
        reject: false,
        ci_lower: 0.0,
        ci_upper: 0.0,
        validity: RiValidity::NotApplicable,
        degenerate: RiDegeneracy::None,
        warning_count: 0,
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ri_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn estimates_match_library() {
    let s = draw(2.8, 1.7, 500, 1);
    let h = Handle::new(s.values());
    assert_eq!(unsafe { ri_sample_len(h.0) }, 500);
    for (code, ge, kind) in [
        (RI_MEASURE_GINI, 0.0, MeasureKind::Gini),
        (RI_MEASURE_THEIL, 0.0, MeasureKind::Theil),
        (RI_MEASURE_GE, 2.0, MeasureKind::Ge(2.0)),
    ] {
        let mut e = RiEstimate { value: 0.0, se: 0.0, n: 0 };
        assert_eq!(unsafe { ri_estimate(h.0, code, ge, &mut e) }, RiStatus::Ok);
        let r = estimate(&s, kind).unwrap();
        assert_eq!((e.value, e.se, e.n), (r.value, r.se, r.n));
    }
}

#[test]
fn group_tests_match_library() {
    let (si, sy) = (draw(2.8, 1.7, 800, 2), draw(2.8, 0.7, 600, 3));
    let (hi, hy) = (Handle::new(si.values()), Handle::new(sy.values()));

    let mut r = blank();
    let st = unsafe { ri_one_sample_test(hi.0, RI_MEASURE_GINI, 0.0, 8, 0.28, 0.05, RI_ALTERNATIVE_TWO_SIDED, &mut r) };
    assert_eq!(st, RiStatus::Ok);
    let o = one_sample_test(&group_estimates(&si, MeasureKind::Gini, 8).unwrap(), 0.28, 0.05).unwrap();
    assert_eq!(r.statistic, o.statistic);
    assert_eq!(r.p_value, o.p_value);
    assert_eq!(r.df, 7);
    assert_eq!(r.reject, o.reject);
    assert_eq!((r.ci_lower, r.ci_upper), o.ci.unwrap());
    assert_eq!(r.validity, RiValidity::Guaranteed);

    let st = unsafe {
        ri_two_sample_test(hi.0, hy.0, RI_MEASURE_THEIL, 0.0, 8, 6, 0.0, 0.05, RI_ALTERNATIVE_TWO_SIDED, &mut r)
    };
    assert_eq!(st, RiStatus::Ok);
    let o = two_sample_test(
        &group_estimates(&si, MeasureKind::Theil, 8).unwrap(),
        &group_estimates(&sy, MeasureKind::Theil, 6).unwrap(),
        0.0,
        0.05,
    )
    .unwrap();
    assert_eq!((r.statistic, r.p_value, r.df), (o.statistic, o.p_value, 5));

    let st = unsafe {
        ri_paired_difference_test(hi.0, hy.0, RI_MEASURE_GINI, 0.0, 4, 0.0, 0.05, RI_ALTERNATIVE_GREATER, &mut r)
    };
    assert_eq!(st, RiStatus::Ok);
    assert_eq!(r.df, 3);
    assert!(r.ci_upper.is_infinite() || r.ci_upper.is_nan() || r.ci_upper > r.ci_lower);
}

#[test]
fn resampling_tests_are_seeded() {
    let (si, sy) = (draw(2.8, 1.7, 60, 4), draw(2.8, 1.7, 40, 5));
    let (hi, hy) = (Handle::new(si.values()), Handle::new(sy.values()));
    let (mut a, mut b) = (blank(), blank());
    unsafe {
        assert_eq!(ri_permutation_test(hi.0, hy.0, RI_MEASURE_GINI, 0.0, 0.05, 199, 9, &mut a), RiStatus::Ok);
        assert_eq!(ri_permutation_test(hi.0, hy.0, RI_MEASURE_GINI, 0.0, 0.05, 199, 9, &mut b), RiStatus::Ok);
    }
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.df, -1);
    assert!(a.critical_value.is_nan());
    let spec = ResamplingSpec::permutation(199, Stream::from_seed(9));
    let o = permutation_test(&si, &sy, MeasureKind::Gini, 0.05, &spec).unwrap();
    assert_eq!(a.p_value, o.p_value);

    unsafe {
        assert_eq!(ri_bootstrap_test(hi.0, hy.0, RI_MEASURE_THEIL, 0.0, 0.0, 0.05, 199, 9, &mut a), RiStatus::Ok);
        assert_eq!(ri_asymptotic_test(hi.0, hy.0, RI_MEASURE_THEIL, 0.0, 0.0, 0.05, &mut b), RiStatus::Ok);
    }
    assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    assert_eq!(b.validity, RiValidity::NotApplicable);
}

#[test]
fn tail_and_theoretical_values() {
    let s = draw(2.8, 1.7, 2000, 6);
    let h = Handle::new(s.values());
    let mut t = RiTailEstimate { zeta: 0.0, se: 0.0, k: 0, ci_lower: 0.0, ci_upper: 0.0 };
    assert_eq!(unsafe { ri_tail_index(h.0, 0.05, false, &mut t) }, RiStatus::Ok);
    let r = rank_size_estimate(&s, 0.05).unwrap();
    assert_eq!((t.zeta, t.se, t.k, t.ci_lower, t.ci_upper), (r.zeta, r.se, r.k, r.ci95.0, r.ci95.1));

    let mut g = 0.0;
    let p = SMParams::with_b0(2.8, 1.7).unwrap();
    assert_eq!(
        unsafe { ri_sm_theoretical_index(2.8, p.b(), 1.7, RI_MEASURE_GINI, 0.0, &mut g) },
        RiStatus::Ok
    );
    assert_eq!(g, theoretical_index(&p, MeasureKind::Gini).unwrap());
}

#[test]
fn failures_set_status_and_message() {
    let mut h = ptr::null_mut();
    let st = unsafe { ri_sample_new([1.0, -2.0].as_ptr(), 2, &mut h) };
    assert_eq!(st, RiStatus::Domain);
    assert!(h.is_null());
    assert!(last_error().contains("non-negative"));

    assert_eq!(unsafe { ri_sample_new(ptr::null(), 3, &mut h) }, RiStatus::NullPointer);

    let small = Handle::new(&[1.0, 2.0, 3.0]);
    let mut r = blank();
    let st = unsafe { ri_one_sample_test(small.0, RI_MEASURE_GINI, 0.0, 8, 0.2, 0.05, 0, &mut r) };
    assert_eq!(st, RiStatus::InsufficientData);
    let st = unsafe { ri_one_sample_test(small.0, RI_MEASURE_GINI, 0.0, 1, 0.2, 0.05, 0, &mut r) };
    assert_eq!(st, RiStatus::Specification);
    let st = unsafe { ri_one_sample_test(small.0, RI_MEASURE_GINI, 0.0, 2, 0.2, 0.05, 9, &mut r) };
    assert_eq!(st, RiStatus::InvalidArgument);
    let st = unsafe { ri_one_sample_test(ptr::null(), RI_MEASURE_GINI, 0.0, 2, 0.2, 0.05, 0, &mut r) };
    assert_eq!(st, RiStatus::NullPointer);
    assert_eq!(r, blank());

    let mut x = 0.0;
    let st = unsafe { ri_sm_theoretical_index(2.0, 1.0, 0.4, RI_MEASURE_THEIL, 0.0, &mut x) };
    assert_eq!(st, RiStatus::MomentNonexistent);

    let flat = Handle::new(&[2.0; 200]);
    let mut t = RiTailEstimate { zeta: 0.0, se: 0.0, k: 0, ci_lower: 0.0, ci_upper: 0.0 };
    let st = unsafe { ri_tail_index(flat.0, 0.05, false, &mut t) };
    assert!(matches!(st, RiStatus::Degenerate | RiStatus::Singular), "{st:?}");
    unsafe { ri_sample_free(ptr::null_mut()) };
    assert_eq!(unsafe { ri_sample_len(ptr::null()) }, 0);
}
