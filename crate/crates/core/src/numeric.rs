//! Numerical building blocks: normal and Student-t distribution functions,
//! double-exponential quadrature, and a few sample summaries.

use statrs::function::beta::beta_reg;
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Upper tail `P(T_df > t)` for `t >= 0`.
fn t_upper_tail(df: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let x = df / (df + t * t);
    0.5 * beta_reg(0.5 * df, 0.5, x)
}

/// Student-t cdf with `df` degrees of freedom.
pub fn student_t_cdf(df: u32, t: f64) -> f64 {
    assert!(df >= 1, "student_t_cdf: df must be >= 1");
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let df = df as f64;
    if t >= 0.0 {
        1.0 - t_upper_tail(df, t)
    } else {
        t_upper_tail(df, -t)
    }
}

/// Student-t survival function `P(T_df > t)`.
pub fn student_t_sf(df: u32, t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    if t >= 0.0 {
        t_upper_tail(df as f64, t)
    } else {
        1.0 - t_upper_tail(df as f64, -t)
    }
}

/// Student-t density.
pub fn student_t_pdf(df: u32, t: f64) -> f64 {
    let v = df as f64;
    let ln_norm = ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v) - 0.5 * (v * PI).ln();
    (ln_norm - 0.5 * (v + 1.0) * (t * t / v).ln_1p()).exp()
}

/// Student-t quantile `Q(df, p)`, accurate to roughly 1e-12 relative.
///
/// df = 1 and df = 2 use their closed forms; otherwise a Cornish-Fisher start
/// is polished by safeguarded Newton steps on the upper tail.
pub fn student_t_quantile(df: u32, p: f64) -> f64 {
    assert!(df >= 1, "student_t_quantile: df must be >= 1");
    assert!(p > 0.0 && p < 1.0, "student_t_quantile: p must lie in (0, 1)");
    if p == 0.5 {
        return 0.0;
    }
    if p < 0.5 {
        return -student_t_quantile(df, 1.0 - p);
    }
    // Upper-tail probability; solving in terms of it avoids cancellation.
    let tail = 1.0 - p;
    match df {
        1 => return (PI * (p - 0.5)).tan(),
        2 => {
            let a = 4.0 * p * tail;
            return (2.0 * p - 1.0) * (2.0 / a).sqrt();
        }
        _ => {}
    }
    let v = df as f64;
    let z = normal_quantile(p);
    let z2 = z * z;
    let g1 = (z2 + 1.0) * z / 4.0;
    let g2 = ((5.0 * z2 + 16.0) * z2 + 3.0) * z / 96.0;
    let g3 = (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) * z / 384.0;
    let mut t = z + g1 / v + g2 / (v * v) + g3 / (v * v * v);
    if !t.is_finite() || t <= 0.0 {
        t = z.max(1e-3);
    }

    // Bracket [lo, hi] on the decreasing upper-tail function.
    let mut lo = 0.0_f64;
    let mut hi = t.max(1.0);
    while t_upper_tail(v, hi) > tail {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let f = t_upper_tail(v, t) - tail;
        if f > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let step = f / student_t_pdf(df, t);
        let mut next = t + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * next.abs().max(1.0) {
            return next;
        }
        t = next;
    }
    t
}

/// Integrate `f(x, 1 - x)` over (0, 1) by tanh-sinh quadrature.
///
/// The integrand receives both the abscissa and its complement, each computed
/// without cancellation, so endpoint singularities can be evaluated accurately.
/// Levels are refined until successive estimates agree to `tol` (absolute).
/// Returns the estimate and the last observed change.
pub fn tanh_sinh_unit<F>(f: F, tol: f64) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64,
{
    // Abscissa x = (1 + tanh(π/2 sinh t)) / 2 ; complement 1 - x computed directly.
    let node = |t: f64| -> Option<(f64, f64, f64)> {
        let s = 0.5 * PI * t.sinh();
        let c = 0.5 * PI * t.cosh();
        let left = 1.0 / (1.0 + (-2.0 * s).exp()); // x
        let right = 1.0 / (1.0 + (2.0 * s).exp()); // 1 - x
        // dx/dt = (π/2) cosh t / cosh^2(s) / 2
        let cosh_s = s.cosh();
        let w = 0.5 * c / (cosh_s * cosh_s);
        if left <= 0.0 || right <= 0.0 || !w.is_finite() {
            None
        } else {
            Some((left, right, w))
        }
    };
    let eval = |t: f64| -> f64 {
        match node(t) {
            Some((x, xc, w)) if w > 0.0 => {
                let v = f(x, xc);
                if v.is_finite() {
                    v * w
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    };

    let t_max = 6.5_f64;
    let mut h = 0.5_f64;
    let mut sum = eval(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _level in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        change = (next - estimate).abs();
        estimate = next;
        if change <= tol {
            break;
        }
    }
    (estimate, change)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n - 1` divisor.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Moment-based sample skewness `m3 / m2^{3/2}`.
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Linear-interpolated empirical quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent oracle: composite Simpson on the t density from 0 to x.
    fn t_cdf_by_simpson(df: u32, x: f64) -> f64 {
        let n = 200_000;
        let h = x / n as f64;
        let mut s = student_t_pdf(df, 0.0) + student_t_pdf(df, x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * student_t_pdf(df, i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn t_quantile_reference_values() {
        // 3.182446305284263 from standard tables, confirmed by the Simpson oracle.
        let q = student_t_quantile(3, 0.975);
        assert!((q - 3.182446305284263).abs() < 1e-8);
        assert!((t_cdf_by_simpson(3, q) - 0.975).abs() < 1e-10);
        assert_relative_eq!(student_t_quantile(1, 0.75), 1.0, epsilon = 1e-12);
        assert_eq!(student_t_quantile(7, 0.5), 0.0);
    }

    #[test]
    fn t_quantile_symmetry_and_roundtrip() {
        for df in [1, 2, 3, 5, 7, 11, 15, 30, 49, 120] {
            for p in [1e-6, 0.001, 0.025, 0.1, 0.3, 0.6, 0.9, 0.95, 0.995, 0.99999] {
                let q = student_t_quantile(df, p);
                assert_relative_eq!(q, -student_t_quantile(df, 1.0 - p), epsilon = 1e-9);
                assert_relative_eq!(student_t_cdf(df, q), p, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn t_cdf_matches_simpson() {
        for df in [1, 3, 7, 15] {
            for x in [0.3, 1.0, 2.5] {
                assert!((student_t_cdf(df, x) - t_cdf_by_simpson(df, x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normal_functions() {
        assert_relative_eq!(normal_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
        assert_relative_eq!(normal_cdf(0.0), 0.5);
        assert_relative_eq!(normal_sf(1.959963984540054), 0.025, epsilon = 1e-11);
    }

    #[test]
    fn quadrature_handles_endpoint_singularities() {
        // ∫ x^{-1/2} = 2, ∫ (1-x)^{-0.7} = 1/0.3
        let (v, _) = tanh_sinh_unit(|x, _| x.powf(-0.5), 1e-12);
        assert_relative_eq!(v, 2.0, epsilon = 1e-10);
        let (v, _) = tanh_sinh_unit(|_, xc| xc.powf(-0.7), 1e-12);
        assert_relative_eq!(v, 1.0 / 0.3, epsilon = 1e-9);
        let (v, _) = tanh_sinh_unit(|x, _| (-x.ln()).ln(), 1e-12);
        // ∫ ln(-ln x) dx = -γ
        assert_relative_eq!(v, -0.5772156649015329, epsilon = 1e-10);
    }
}
