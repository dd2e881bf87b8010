//! Cramér exponent: the positive root of `E A^s = 1`.
//!
//! `φ(s) = Σ w_i a_i^s` is log-convex with `φ(0) = 1`. When `E log A < 0`
//! and some `a_i > 1`, `log φ` dips below zero right after the origin and
//! eventually grows without bound, so it has exactly one positive root.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{validate, AtomicMeasure};

/// Required bound on `|φ(α) - 1|`.
pub const RESIDUAL_TOL: f64 = 1e-12;
/// Required bracket width, relative to `1 + α`.
pub const BRACKET_TOL: f64 = 1e-12;
const NEWTON_ITERS: usize = 10;
const MAX_BISECTIONS: usize = 400;

/// `s ↦ E A^s` for an atomic measure, evaluated in log-sum-exp form.
#[derive(Debug, Clone)]
pub struct MomentFunction<'a> {
    measure: &'a AtomicMeasure,
    terms: Vec<(f64, f64)>,
}

impl<'a> MomentFunction<'a> {
    pub fn new(measure: &'a AtomicMeasure) -> Self {
        let terms = measure
            .atoms()
            .iter()
            .map(|x| (x.weight.ln(), x.a.ln()))
            .collect();
        Self { measure, terms }
    }

    pub fn measure(&self) -> &AtomicMeasure {
        self.measure
    }

    /// `log φ(s)`.
    pub fn log_value(&self, s: f64) -> f64 {
        let top = self
            .terms
            .iter()
            .map(|&(lw, la)| lw + s * la)
            .fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return top;
        }
        let acc: f64 = self
            .terms
            .iter()
            .map(|&(lw, la)| (lw + s * la - top).exp())
            .sum();
        top + acc.ln()
    }

    /// `φ(s)`.
    pub fn value(&self, s: f64) -> f64 {
        self.log_value(s).exp()
    }

    /// `φ'(s) = Σ w_i a_i^s ln a_i`.
    pub fn derivative(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(lw, la)| (lw + s * la).exp() * la)
            .sum()
    }

    /// `|φ(s) - 1|` evaluated by direct summation.
    pub fn residual(&self, s: f64) -> f64 {
        let direct: f64 = self.terms.iter().map(|&(lw, la)| (lw + s * la).exp()).sum();
        (direct - 1.0).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CramerRoot {
    pub alpha: f64,
    /// `|φ(α) - 1|`
    pub residual: f64,
    /// Final enclosing interval `(lo, hi)`.
    pub bracket: (f64, f64),
}

/// Solves `E A^α = 1` starting the bracket expansion at `s = 1`.
pub fn solve_alpha(measure: &AtomicMeasure) -> Result<CramerRoot> {
    solve_alpha_from(measure, 1.0)
}

/// Solves `E A^α = 1` with the initial upper probe at `initial_hi > 0`.
///
/// The probe is doubled until `φ > 1` (capped at `s = 700 / max ln a`),
/// the bracket is bisected down to the target width, and a few Newton
/// steps polish the result inside the bracket.
pub fn solve_alpha_from(measure: &AtomicMeasure, initial_hi: f64) -> Result<CramerRoot> {
    let moments = validate(measure);
    if !moments.has_expanding_atom {
        return Err(Error::NoPositiveRoot);
    }
    if moments.mean_log_a >= 0.0 {
        return Err(Error::NotContracting {
            mean_log_a: moments.mean_log_a,
        });
    }
    if !(initial_hi > 0.0 && initial_hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial bracket end {initial_hi}"
        )));
    }
    let phi = MomentFunction::new(measure);
    let cap = 700.0 / measure.max_a().ln();

    // For s > 0, log φ(s) < 0 exactly when s < α.
    let below = |s: f64| phi.log_value(s) < 0.0;
    let (mut lo, mut hi) = (0.0, initial_hi.min(cap));
    while below(hi) {
        lo = hi;
        if hi >= cap {
            return Err(Error::Overflow { s: hi });
        }
        hi = (2.0 * hi).min(cap);
    }

    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 0.5 * BRACKET_TOL * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..NEWTON_ITERS {
        let f = phi.value(alpha) - 1.0;
        let df = phi.derivative(alpha);
        if f == 0.0 || df <= 0.0 || !df.is_finite() {
            break;
        }
        let next = alpha - f / df;
        if !(next > lo && next < hi) {
            break;
        }
        if next == alpha {
            break;
        }
        alpha = next;
    }
    // Shrink the bracket around the polished value when it can be certified.
    let width = BRACKET_TOL * (1.0 + alpha) * 0.25;
    if alpha - width > lo && below(alpha - width) {
        lo = alpha - width;
    }
    if alpha + width < hi && !below(alpha + width) {
        hi = alpha + width;
    }

    let residual = phi.residual(alpha);
    Ok(CramerRoot {
        alpha,
        residual,
        bracket: (lo, hi),
    })
}

/// Large-`s` behavior of `(E|B|^s / E A^s)^{1/s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRatioReport {
    /// `sup{s : E A^s < ∞}`; always infinite for atomic measures.
    pub s_inf: f64,
    /// `lim_{s→∞} (E|B|^s / E A^s)^{1/s} = max|b| / max a`.
    pub limit_value: f64,
    /// Whether the finite-limit condition holds.
    pub condition_met: bool,
}

/// Moment-ratio condition for atomic measures. Only the `s_∞ = ∞` branch
/// can occur; the `s_∞ < ∞` branch is inapplicable.
pub fn moment_ratio_conditions(measure: &AtomicMeasure) -> MomentRatioReport {
    let max_b = measure
        .atoms()
        .iter()
        .map(|x| x.b.abs())
        .fold(0.0, f64::max);
    let limit_value = max_b / measure.max_a();
    MomentRatioReport {
        s_inf: f64::INFINITY,
        limit_value,
        condition_met: limit_value.is_finite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use proptest::prelude::*;

    fn two_point(a1: f64, w1: f64, a2: f64) -> AtomicMeasure {
        AtomicMeasure::new(
            vec![Atom::new(a1, 0.0, w1), Atom::new(a2, 0.0, 1.0 - w1)],
            "m",
        )
        .unwrap()
    }

    fn check_post(root: &CramerRoot) {
        assert!(root.residual <= RESIDUAL_TOL, "residual {}", root.residual);
        let (lo, hi) = root.bracket;
        assert!(lo <= root.alpha && root.alpha <= hi);
        assert!(
            hi - lo <= BRACKET_TOL * (1.0 + root.alpha),
            "width {}",
            hi - lo
        );
    }

    #[test]
    fn closed_form_roots() {
        // 0.2*3 + 0.8*0.5 = 1
        let r = solve_alpha(&two_point(3.0, 0.2, 0.5)).unwrap();
        check_post(&r);
        assert!((r.alpha - 1.0).abs() < 1e-12);
        // u = 2^s solves u^2 - 3u + 2 = 0, so u = 2 and s = 1.
        let r = solve_alpha(&two_point(2.0, 1.0 / 3.0, 0.5)).unwrap();
        check_post(&r);
        assert!((r.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn root_beyond_initial_probe() {
        // a = 2 w.p. 0.1, a = 1/2 w.p. 0.9: with u = 2^s,
        // 0.1 u^2 - u + 0.9 = 0 gives u = 9, so s = log2 9 > 1.
        let r = solve_alpha(&two_point(2.0, 0.1, 0.5)).unwrap();
        check_post(&r);
        assert!((r.alpha - 9f64.log2()).abs() < 1e-11, "{}", r.alpha);
    }

    #[test]
    fn error_paths() {
        let m = AtomicMeasure::new(vec![Atom::new(0.5, 0.0, 1.0)], "m").unwrap();
        assert_eq!(solve_alpha(&m), Err(Error::NoPositiveRoot));
        let m = two_point(2.0, 0.5, 0.5);
        assert!(matches!(solve_alpha(&m), Err(Error::NotContracting { .. })));
    }

    #[test]
    fn moment_function_basics() {
        let m = two_point(3.0, 0.2, 0.5);
        let phi = MomentFunction::new(&m);
        assert_eq!(phi.value(0.0), 1.0);
        let h = 1e-6;
        let fd = (phi.value(1.0 + h) - phi.value(1.0 - h)) / (2.0 * h);
        assert!((fd - phi.derivative(1.0)).abs() < 1e-8);
        // Large arguments stay finite in log form.
        assert!(phi.log_value(5000.0).is_finite());
    }

    #[test]
    fn moment_ratio_examples() {
        let m = AtomicMeasure::uniform(&[(3.0, 1.0), (0.5, -1.0)], "m").unwrap();
        let r = moment_ratio_conditions(&m);
        assert!((r.limit_value - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.condition_met && r.s_inf.is_infinite());

        let m = AtomicMeasure::uniform(&[(2.0, 0.0), (0.5, 0.0)], "m").unwrap();
        assert_eq!(moment_ratio_conditions(&m).limit_value, 0.0);

        let m = AtomicMeasure::uniform(&[(2.0, 5.0), (0.5, -1.0)], "m").unwrap();
        assert_eq!(moment_ratio_conditions(&m).limit_value, 2.5);
    }

    #[test]
    fn moment_ratio_matches_direct_evaluation_at_large_s() {
        // Independent route: evaluate the ratio at s = 4000 in log space.
        let m = AtomicMeasure::new(
            vec![
                Atom::new(3.0, 1.0, 0.2),
                Atom::new(0.5, -1.5, 0.5),
                Atom::new(1.5, 0.25, 0.3),
            ],
            "m",
        )
        .unwrap();
        let s = 4000.0;
        let lse = |xs: Vec<f64>| {
            let top = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
        };
        let log_b = lse(m
            .atoms()
            .iter()
            .map(|x| x.weight.ln() + s * x.b.abs().ln())
            .collect());
        let log_a = lse(m
            .atoms()
            .iter()
            .map(|x| x.weight.ln() + s * x.a.ln())
            .collect());
        let direct = ((log_b - log_a) / s).exp();
        let r = moment_ratio_conditions(&m);
        assert!(
            (direct - r.limit_value).abs() < 1e-3,
            "{direct} vs {}",
            r.limit_value
        );
    }

    fn cramer_measure() -> impl Strategy<Value = AtomicMeasure> {
        // One expanding atom with small weight plus contracting atoms.
        (
            1.2f64..8.0,
            0.02f64..0.3,
            prop::collection::vec((0.05f64..0.95, 0.1f64..1.0), 1..4),
        )
            .prop_filter_map("needs E log A < 0", |(big, w_big, rest)| {
                let total: f64 = rest.iter().map(|x| x.1).sum();
                let mut atoms = vec![Atom::new(big, 1.0, w_big)];
                atoms.extend(
                    rest.iter()
                        .map(|&(a, w)| Atom::new(a, -1.0, (1.0 - w_big) * w / total)),
                );
                let m = AtomicMeasure::new(atoms, "random").ok()?;
                (m.mean_log_a() < -1e-3).then_some(m)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn log_convex_on_grid(m in cramer_measure()) {
            let phi = MomentFunction::new(&m);
            let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
            for &s in &grid {
                for &t in &grid {
                    let mid = phi.value(0.5 * (s + t));
                    let bound = phi.value(s) * phi.value(t);
                    prop_assert!(mid * mid <= bound * (1.0 + 1e-12));
                }
            }
        }

        #[test]
        fn unique_root_from_any_initial_probe(m in cramer_measure(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let reference = solve_alpha(&m).unwrap();
            check_post(&reference);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..100 {
                let start = 10f64.powf(rng.random_range(-3.0..2.0));
                let r = solve_alpha_from(&m, start).unwrap();
                prop_assert!((r.alpha - reference.alpha).abs() <= 1e-10);
            }
        }

        #[test]
        fn exponent_scales_inversely(m in cramer_measure(), power in 0.25f64..4.0) {
            let base = solve_alpha(&m).unwrap();
            let scaled = solve_alpha(&m.powered(power).unwrap()).unwrap();
            check_post(&scaled);
            prop_assert!((scaled.alpha - base.alpha / power).abs() <= 1e-10 * (1.0 + base.alpha / power));
        }
    }
}
