//! The Singh-Maddala income distribution family.
//!
//! `F(x) = 1 - [1 + (x/b)^a]^(-c)` for `x > 0`. The upper tail decays like
//! `(x/b)^(-a c)`, so `a·c` is the tail index and moments of order `p`
//! exist exactly when `-a < p < a·c`.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::tanh_sinh_unit;
use crate::rng::Stream;
use crate::sample::{MeasureKind, Sample};

/// Scale `b0 = 100^(-1/2.8)` shared by every simulation grid, rounded once
/// from a 40-digit evaluation.
pub const B0: f64 = 0.193_069_772_888_325_016_700_707_479_984;

/// Absolute tolerance for quadrature-based theoretical indices.
const QUAD_TOL: f64 = 1e-11;
/// Refinement change above which a quadrature result is rejected.
const QUAD_ACCEPT: f64 = 1e-8;

/// Singh-Maddala parameters `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMParams {
    a: f64,
    b: f64,
    c: f64,
}

impl SMParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "Singh-Maddala parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(SMParams { a, b, c })
    }

    /// Shorthand for `SM(a, B0, c)`.
    pub fn with_b0(a: f64, c: f64) -> Result<Self> {
        Self::new(a, B0, c)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Upper-tail index `ζ = a·c`.
    pub fn tail_index(&self) -> f64 {
        self.a * self.c
    }

    /// Whether `E[X^order]` is finite.
    pub fn moment_exists(&self, order: f64) -> bool {
        if order >= 0.0 {
            self.tail_index() > order
        } else {
            self.a > -order
        }
    }

    fn require_moment(&self, order: f64) -> Result<()> {
        if self.moment_exists(order) {
            Ok(())
        } else {
            Err(Error::MomentNonexistent {
                order,
                tail_index: self.tail_index(),
            })
        }
    }

    pub fn with_scale(&self, b: f64) -> Result<Self> {
        Self::new(self.a, b, self.c)
    }

    /// Quantile evaluated from the upper-tail probability `tail = 1 - u`,
    /// with the lower-tail probability `u` supplied alongside so neither end
    /// suffers cancellation.
    fn quantile_split(&self, u: f64, tail: f64) -> f64 {
        let ln_tail = if u < 0.5 { (-u).ln_1p() } else { tail.ln() };
        let inner = (-ln_tail / self.c).exp_m1();
        self.b * inner.powf(1.0 / self.a)
    }
}

/// Distribution function.
pub fn sm_cdf(p: &SMParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let z = (x / p.b).powf(p.a);
    -(-p.c * z.ln_1p()).exp_m1()
}

/// Survival function `1 - F(x)`, accurate in the far tail.
pub fn sm_sf(p: &SMParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let z = (x / p.b).powf(p.a);
    (-p.c * z.ln_1p()).exp()
}

/// Inverse distribution function for `0 <= u < 1`.
pub fn sm_quantile(p: &SMParams, u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain(format!(
            "quantile level must lie in [0, 1), got {u}"
        )));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok(p.quantile_split(u, 1.0 - u))
}

/// `n` i.i.d. draws by inversion of uniforms on `[0, 1)` from `rng`.
pub fn sm_sample<R: Rng + ?Sized>(p: &SMParams, n: usize, rng: &mut R) -> Sample {
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            if u == 0.0 {
                0.0
            } else {
                p.quantile_split(u, 1.0 - u)
            }
        })
        .collect();
    // Inversion of [0, 1) uniforms yields finite non-negative values.
    Sample::new(values, format!("SM({}, {}, {})", p.a, p.b, p.c))
        .expect("inversion sampling produced an invalid observation")
}

/// Convenience wrapper drawing from a fresh generator for `stream`.
pub fn sm_sample_stream(p: &SMParams, n: usize, stream: &Stream) -> Sample {
    sm_sample(p, n, &mut stream.rng())
}

/// Population value of an inequality index.
///
/// Gini uses the closed form; Theil and GE(α) integrate the quantile
/// function over (0, 1) by tanh-sinh quadrature.
pub fn theoretical_index(p: &SMParams, m: MeasureKind) -> Result<f64> {
    p.require_moment(1.0)?;
    match m.canonical() {
        MeasureKind::Gini => Ok(sm_gini_closed_form(p)),
        MeasureKind::Theil => {
            let mu = quantile_integral(p, |q| q)?;
            let nu = quantile_integral(p, |q| if q > 0.0 { q * q.ln() } else { 0.0 })?;
            Ok(nu / mu - mu.ln())
        }
        MeasureKind::Ge(0.0) => {
            let mu = quantile_integral(p, |q| q)?;
            let mean_log = quantile_integral(p, |q| q.ln())?;
            Ok(mu.ln() - mean_log)
        }
        MeasureKind::Ge(alpha) => {
            p.require_moment(alpha)?;
            let mu = quantile_integral(p, |q| q)?;
            let m_alpha = quantile_integral(p, |q| q.powf(alpha))?;
            Ok((m_alpha / mu.powf(alpha) - 1.0) / (alpha * (alpha - 1.0)))
        }
    }
}

/// `1 - Γ(c)Γ(2c - 1/a) / (Γ(c - 1/a)Γ(2c))`.
fn sm_gini_closed_form(p: &SMParams) -> f64 {
    let (a, c) = (p.a, p.c);
    let ln_ratio = ln_gamma(c) + ln_gamma(2.0 * c - 1.0 / a) - ln_gamma(c - 1.0 / a) - ln_gamma(2.0 * c);
    1.0 - ln_ratio.exp()
}

fn quantile_integral<F: Fn(f64) -> f64>(p: &SMParams, g: F) -> Result<f64> {
    let (value, change) = tanh_sinh_unit(|u, tail| g(p.quantile_split(u, tail)), QUAD_TOL);
    if !value.is_finite() || change > QUAD_ACCEPT * value.abs().max(1.0) {
        return Err(Error::domain(format!(
            "quadrature for SM({}, {}, {}) did not converge (last change {change:e})",
            p.a, p.b, p.c
        )));
    }
    Ok(value)
}

/// A named list of `(a, c)` pairs sharing the scale [`B0`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub measure: MeasureKind,
    pub entries: Vec<(f64, f64)>,
}

/// Heavy-tail extras appended to both iso-index grids (ζ = 2.2 and 1.4).
pub const HEAVY_TAIL_EXTRAS: [(f64, f64); 2] = [(2.0, 1.1), (2.0, 0.7)];

/// Pairs holding the Theil index at its benchmark value 0.1401151.
pub const THEIL_ISO_PAIRS: [(f64, f64); 10] = [
    (2.5, 2.502199),
    (2.6, 2.149747),
    (2.7, 1.894309),
    (2.8, 1.7),
    (3.0, 1.4223847),
    (3.2, 1.2320215),
    (3.4, 1.0922125),
    (3.8, 0.8984488),
    (4.8, 0.6366578),
    (5.8, 0.4996163),
];

/// Pairs holding the Gini index at its benchmark value 0.2887138.
pub const GINI_ISO_PAIRS: [(f64, f64); 10] = [
    (2.5, 2.640350),
    (2.6, 2.218091),
    (2.7, 1.920967),
    (2.8, 1.7),
    (3.0, 1.3921126),
    (3.2, 1.1866026),
    (3.4, 1.0388049),
    (3.8, 0.8387663),
    (4.8, 0.5784599),
    (5.8, 0.4473111),
];

impl ParamGrid {
    pub fn theil() -> Self {
        ParamGrid {
            measure: MeasureKind::Theil,
            entries: THEIL_ISO_PAIRS.iter().chain(HEAVY_TAIL_EXTRAS.iter()).copied().collect(),
        }
    }

    pub fn gini() -> Self {
        ParamGrid {
            measure: MeasureKind::Gini,
            entries: GINI_ISO_PAIRS.iter().chain(HEAVY_TAIL_EXTRAS.iter()).copied().collect(),
        }
    }

    pub fn params(&self) -> Vec<SMParams> {
        self.entries
            .iter()
            .map(|&(a, c)| SMParams::with_b0(a, c).expect("grid entries are positive"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::digamma;

    fn bench() -> SMParams {
        SMParams::with_b0(2.8, 1.7).unwrap()
    }

    #[test]
    fn b0_matches_definition() {
        assert_relative_eq!(B0, 100f64.powf(-1.0 / 2.8), max_relative = 1e-15);
    }

    #[test]
    fn cdf_examples() {
        let p = SMParams::new(2.8, 1.0, 1.7).unwrap();
        assert_eq!(sm_cdf(&p, 0.0), 0.0);
        // 1 - 2^(-1.7), direct evaluation
        assert_relative_eq!(sm_cdf(&p, 1.0), 1.0 - 2f64.powf(-1.7), epsilon = 1e-15);
        assert_relative_eq!(sm_cdf(&p, 1.0), 0.692_213_896_663_771, epsilon = 1e-12);
        for &(a, c) in GINI_ISO_PAIRS.iter() {
            let q = SMParams::with_b0(a, c).unwrap();
            assert!((1.0 - sm_cdf(&q, q.b() * 1e6)).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_examples() {
        let p = SMParams::new(2.8, 1.0, 1.7).unwrap();
        assert_eq!(sm_quantile(&p, 0.0).unwrap(), 0.0);
        let u = 1.0 - 2f64.powf(-1.7);
        assert_relative_eq!(sm_quantile(&p, u).unwrap(), 1.0, max_relative = 1e-12);
        let p = SMParams::new(2.0, 1.0, 0.7).unwrap();
        let expected = (2f64.powf(1.0 / 0.7) - 1.0).sqrt();
        assert_relative_eq!(sm_quantile(&p, 0.5).unwrap(), expected, max_relative = 1e-14);
        assert!(sm_quantile(&p, 1.0).is_err());
        assert!(sm_quantile(&p, -0.1).is_err());
    }

    #[test]
    fn cdf_quantile_roundtrip() {
        let mut grid: Vec<(f64, f64)> = GINI_ISO_PAIRS.to_vec();
        grid.extend(HEAVY_TAIL_EXTRAS);
        let levels = [1e-6, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999, 1.0 - 1e-6];
        for (a, c) in grid {
            let p = SMParams::with_b0(a, c).unwrap();
            for &u in &levels {
                let x = sm_quantile(&p, u).unwrap();
                assert_relative_eq!(sm_cdf(&p, x), u, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn upper_tail_follows_power_law() {
        for &(a, c) in GINI_ISO_PAIRS.iter().chain(HEAVY_TAIL_EXTRAS.iter()) {
            let p = SMParams::with_b0(a, c).unwrap();
            // deep in the tail, 1 - F = 1e-12
            let x = sm_quantile(&p, 1.0 - 1e-12).unwrap();
            let ratio = sm_sf(&p, x) / (x / p.b()).powf(-p.tail_index());
            assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio} for ({a}, {c})");
        }
    }

    #[test]
    fn moment_existence_rule() {
        let p = SMParams::with_b0(2.0, 0.7).unwrap();
        assert!(p.moment_exists(1.0));
        assert!(!p.moment_exists(2.0));
        assert!(!p.moment_exists(1.4));
        assert!(p.moment_exists(-1.9));
        assert!(!p.moment_exists(-2.0));
        let bad = SMParams::with_b0(2.0, 0.4).unwrap();
        assert!(matches!(
            theoretical_index(&bad, MeasureKind::Gini),
            Err(Error::MomentNonexistent { .. })
        ));
        assert!(matches!(
            theoretical_index(&p, MeasureKind::Ge(2.0)),
            Err(Error::MomentNonexistent { .. })
        ));
    }

    /// Midpoint-rule integral of Q(u)^order over [0, 1 - eps]: converges as
    /// eps -> 0 when the moment exists and keeps growing otherwise.
    fn truncated_moment(p: &SMParams, order: f64, eps: f64) -> f64 {
        // substitute tail = 1 - u on a log grid to reach deep into the tail
        // fixed step from the centre outward, so a smaller eps only adds terms
        let h = 0.01;
        let n = (-eps.ln() / h).ceil() as usize;
        (0..n)
            .map(|i| {
                let lt = -(i as f64 + 0.5) * h;
                let tail = lt.exp();
                let q = p.quantile_split(1.0 - tail, tail);
                q.powf(order) * tail * h
            })
            .sum()
    }

    #[test]
    fn moment_existence_agrees_with_truncated_quadrature() {
        let p = SMParams::with_b0(2.0, 1.1).unwrap(); // ζ = 2.2
        for (order, exists) in [(1.0, true), (2.0, true), (2.5, false), (3.0, false)] {
            assert_eq!(p.moment_exists(order), exists);
            let m1 = truncated_moment(&p, order, 1e-100);
            let m2 = truncated_moment(&p, order, 1e-200);
            let growth = m2 / m1;
            if exists {
                assert!(growth < 1.0 + 1e-6, "order {order}: growth {growth}");
            } else {
                assert!(growth > 2.0, "order {order}: growth {growth}");
            }
        }
    }

    #[test]
    fn benchmark_theoretical_values() {
        let p = bench();
        let theil = theoretical_index(&p, MeasureKind::Theil).unwrap();
        let gini = theoretical_index(&p, MeasureKind::Gini).unwrap();
        assert!((theil - 0.1401151).abs() < 1e-6, "theil {theil}");
        assert!((gini - 0.2887138).abs() < 1e-6, "gini {gini}");
    }

    /// Closed form via digamma: T = ln b + (ψ(1+1/a) - ψ(c-1/a))/a - ln μ.
    fn theil_closed_form(p: &SMParams) -> f64 {
        let (a, b, c) = (p.a(), p.b(), p.c());
        let ln_mu = b.ln() + ln_gamma(1.0 + 1.0 / a) + ln_gamma(c - 1.0 / a) - ln_gamma(c);
        b.ln() + (digamma(1.0 + 1.0 / a) - digamma(c - 1.0 / a)) / a - ln_mu
    }

    fn moment_closed_form(p: &SMParams, k: f64) -> f64 {
        let (a, b, c) = (p.a(), p.b(), p.c());
        (k * b.ln() + ln_gamma(1.0 + k / a) + ln_gamma(c - k / a) - ln_gamma(c)).exp()
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let mut pairs = THEIL_ISO_PAIRS.to_vec();
        pairs.extend(HEAVY_TAIL_EXTRAS);
        for (a, c) in pairs {
            let p = SMParams::with_b0(a, c).unwrap();
            let t = theoretical_index(&p, MeasureKind::Theil).unwrap();
            assert!((t - theil_closed_form(&p)).abs() < 1e-9, "({a}, {c})");
            // GE(0.5) and MLD against gamma-function moments
            let mu = moment_closed_form(&p, 1.0);
            let ge_half = (moment_closed_form(&p, 0.5) / mu.sqrt() - 1.0) / (0.5 * -0.5);
            let got = theoretical_index(&p, MeasureKind::Ge(0.5)).unwrap();
            assert!((got - ge_half).abs() < 1e-9, "GE(0.5) ({a}, {c})");
            let mean_log = b0_ln() + (digamma(1.0) - digamma(c)) / a;
            let mld = mu.ln() - mean_log;
            let got = theoretical_index(&p, MeasureKind::Ge(0.0)).unwrap();
            assert!((got - mld).abs() < 1e-9, "MLD ({a}, {c})");
        }
    }

    fn b0_ln() -> f64 {
        B0.ln()
    }

    #[test]
    fn iso_index_grids() {
        for p in ParamGrid::gini().params().iter().take(10) {
            let g = theoretical_index(p, MeasureKind::Gini).unwrap();
            assert!((g - 0.2887138).abs() < 1e-6, "{p:?}: {g}");
        }
        for p in ParamGrid::theil().params().iter().take(10) {
            let t = theoretical_index(p, MeasureKind::Theil).unwrap();
            assert!((t - 0.1401151).abs() < 1e-6, "{p:?}: {t}");
        }
        assert_eq!(ParamGrid::gini().entries.len(), 12);
        assert_eq!(ParamGrid::theil().entries.len(), 12);
    }

    #[test]
    fn scale_invariance_of_theoretical_index() {
        let p = bench();
        let q = p.with_scale(2.0 * p.b()).unwrap();
        for m in [MeasureKind::Gini, MeasureKind::Theil, MeasureKind::Ge(2.0), MeasureKind::Ge(0.0)] {
            let x = theoretical_index(&p, m).unwrap();
            let y = theoretical_index(&q, m).unwrap();
            assert!((x - y).abs() < 1e-9, "{m}: {x} vs {y}");
        }
    }

    #[test]
    fn sampling_is_deterministic_and_follows_cdf() {
        let p = bench();
        let s = Stream::from_seed(7);
        let x = sm_sample_stream(&p, 100_000, &s);
        let y = sm_sample_stream(&p, 100_000, &s);
        assert!(x.values().iter().zip(y.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
        // Kolmogorov-Smirnov distance
        let mut v = x.values().to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len() as f64;
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let f = sm_cdf(&p, xi);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.01, "KS distance {d}");
    }

    /// A generator whose first draw is exactly zero.
    struct ZeroRng;
    impl rand::RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0)
        }
    }

    #[test]
    fn zero_uniform_maps_to_zero() {
        let s = sm_sample(&bench(), 1, &mut ZeroRng);
        assert_eq!(s.values(), &[0.0]);
    }
}
