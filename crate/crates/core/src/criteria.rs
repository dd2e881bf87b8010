//! Closed-form positivity criteria for the tail constants.
//!
//! Everything here works on atomic measures and reads off fixed points
//! `x(a, b) = b / (1 - a)` of the individual affine maps:
//!
//! * affine recursion: the right tail constant is positive iff the
//!   stationary support is unbounded above, which the fixed-point
//!   ordering of expanding vs contracting atoms decides;
//! * Letac recursion `max(aX + b, ac + b)`: positive iff `N3 < max(N1, N2)`
//!   (or `P[A = 1, B > 0] > 0`);
//! * `max(aX + b, 0)`: positive iff `N3 < N2` or `P[A > 1, B > 0] > 0`.

use serde::{Serialize, Serializer};

use crate::cramer::{moment_ratio_conditions, solve_alpha, CramerRoot, MomentRatioReport};
use crate::engine::MapFamily;
use crate::error::{Error, Result};
use crate::measure::{
    approx_eq, arithmeticity_warning, common_fixed_point, is_unit, validate, Atom, AtomicMeasure,
    LogMoments, ABS_TOL,
};

/// Tolerance for the half-line invariance check `aN + b ≤ N`.
pub const HALFLINE_TOL: f64 = 1e-9;

/// Serializes infinities as the strings `"inf"` / `"-inf"` instead of null.
pub(crate) fn extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn extended_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => extended(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub value: f64,
    pub a: f64,
    pub b: f64,
}

/// The unique `x` with `a x + b = x`, for `a ≠ 1`.
pub fn fixed_point(a: f64, b: f64) -> Result<FixedPoint> {
    if is_unit(a) {
        return Err(if b.abs() <= ABS_TOL {
            Error::IdentityMap
        } else {
            Error::NoFixedPoint { b }
        });
    }
    Ok(FixedPoint {
        value: b / (1.0 - a),
        a,
        b,
    })
}

fn is_expanding(a: f64) -> bool {
    a > 1.0 && !is_unit(a)
}

fn is_contracting(a: f64) -> bool {
    a < 1.0 && !is_unit(a)
}

/// `x < y` with near-equal values counted as equal.
fn strictly_less(x: f64, y: f64) -> bool {
    x < y && !(x.is_finite() && y.is_finite() && approx_eq(x, y))
}

/// Smallest fixed point among expanding atoms and largest among
/// contracting atoms, with the atoms attaining them.
fn fixed_point_extremes(measure: &AtomicMeasure) -> ((f64, Option<Atom>), (f64, Option<Atom>)) {
    let mut n3 = (f64::INFINITY, None);
    let mut n2 = (f64::NEG_INFINITY, None);
    for atom in measure.atoms() {
        let x = atom.b / (1.0 - atom.a);
        if is_expanding(atom.a) && x < n3.0 {
            n3 = (x, Some(*atom));
        } else if is_contracting(atom.a) && x > n2.0 {
            n2 = (x, Some(*atom));
        }
    }
    (n3, n2)
}

/// Upper-end behavior of the affine stationary support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideClass {
    /// An expanding atom's fixed point lies strictly below a contracting
    /// atom's: the support contains a half-line in this direction.
    HalfLine,
    /// Every expanding fixed point is at or above every contracting one.
    Bounded,
    /// Some atom is a pure translation in this direction (`a = 1`).
    UnitShift,
    /// No expanding or no contracting atom; the fixed-point ordering decides nothing.
    Indeterminate,
}

impl SideClass {
    pub fn unbounded(self) -> bool {
        matches!(self, SideClass::HalfLine | SideClass::UnitShift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportClass {
    HalfLineUp,
    WholeLineCandidate,
    BoundedAbove,
    UnboundedViaA1Bpos,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportClassification {
    pub class: SupportClass,
    pub upward: SideClass,
    pub downward: SideClass,
    /// `(expanding, contracting)` atoms witnessing the upward half-line.
    pub witness_up: Option<(Atom, Atom)>,
    pub witness_down: Option<(Atom, Atom)>,
}

impl SupportClassification {
    /// Whether the right tail constant is positive, when decidable.
    pub fn right_tail_positive(&self) -> Option<bool> {
        match self.upward {
            SideClass::HalfLine | SideClass::UnitShift => Some(true),
            SideClass::Bounded => Some(false),
            SideClass::Indeterminate => None,
        }
    }

    pub fn left_tail_positive(&self) -> Option<bool> {
        match self.downward {
            SideClass::HalfLine | SideClass::UnitShift => Some(true),
            SideClass::Bounded => Some(false),
            SideClass::Indeterminate => None,
        }
    }
}

fn classify_upward(measure: &AtomicMeasure) -> (SideClass, Option<(Atom, Atom)>) {
    if measure.atoms().iter().any(|x| is_unit(x.a) && x.b > 0.0) {
        return (SideClass::UnitShift, None);
    }
    let ((n3, e), (n2, c)) = fixed_point_extremes(measure);
    match (e, c) {
        (Some(e), Some(c)) if strictly_less(n3, n2) => (SideClass::HalfLine, Some((e, c))),
        (Some(_), Some(_)) => (SideClass::Bounded, None),
        _ => (SideClass::Indeterminate, None),
    }
}

/// Classifies the support of the affine stationary law from the fixed
/// points of the atoms, in both directions.
pub fn affine_support_classification(measure: &AtomicMeasure) -> Result<SupportClassification> {
    if let Some(x) = common_fixed_point(measure) {
        return Err(Error::Degenerate { fixed_point: x });
    }
    let (upward, witness_up) = classify_upward(measure);
    let (downward, witness_down) = classify_upward(&measure.negated());
    // Map the mirrored witnesses back to the original atoms.
    let witness_down = witness_down.map(|(e, c)| (unnegate(e), unnegate(c)));
    let class = match (upward, downward.unbounded()) {
        (u, true) if u.unbounded() => SupportClass::WholeLineCandidate,
        (SideClass::HalfLine, _) => SupportClass::HalfLineUp,
        (SideClass::UnitShift, _) => SupportClass::UnboundedViaA1Bpos,
        (SideClass::Bounded, _) => SupportClass::BoundedAbove,
        (SideClass::Indeterminate, _) => SupportClass::Indeterminate,
    };
    Ok(SupportClassification {
        class,
        upward,
        downward,
        witness_up,
        witness_down,
    })
}

fn unnegate(x: Atom) -> Atom {
    Atom {
        b: -x.b,
        c: x.c.map(|c| -c),
        ..x
    }
}

/// Letac constants. Infinite values mean "no atom of that kind".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LetacConstants {
    /// `max (a c + b)`
    #[serde(serialize_with = "extended")]
    pub n1: f64,
    /// `max x(a, b)` over `a < 1`
    #[serde(serialize_with = "extended")]
    pub n2: f64,
    /// `min x(a, b)` over `a > 1`
    #[serde(serialize_with = "extended")]
    pub n3: f64,
    /// `max(N1, N2)`
    #[serde(serialize_with = "extended")]
    pub n: f64,
}

fn thresholds(measure: &AtomicMeasure) -> Result<Vec<f64>> {
    measure
        .atoms()
        .iter()
        .map(|x| x.c.ok_or(Error::MissingThreshold))
        .collect()
}

pub fn letac_constants(measure: &AtomicMeasure) -> Result<LetacConstants> {
    let cs = thresholds(measure)?;
    let n1 = measure
        .atoms()
        .iter()
        .zip(&cs)
        .map(|(x, c)| x.a * c + x.b)
        .fold(f64::NEG_INFINITY, f64::max);
    let ((n3, _), (n2, _)) = fixed_point_extremes(measure);
    Ok(LetacConstants {
        n1,
        n2,
        n3,
        n: n1.max(n2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LetacPositivity {
    pub positive: bool,
    /// `P[A = 1, B > 0] > 0`
    pub escape_hatch: bool,
    pub constants: LetacConstants,
    /// `E log A < 0`
    pub contracting: bool,
    /// Some `a > 1`, or the escape hatch.
    pub heavy_tail_possible: bool,
    pub explanation: String,
    pub witnesses: Vec<Atom>,
}

/// Positivity of the Letac tail constant `C_L`.
pub fn letac_positivity(measure: &AtomicMeasure) -> Result<LetacPositivity> {
    let constants = letac_constants(measure)?;
    let lm = validate(measure);
    let escape = measure
        .atoms()
        .iter()
        .find(|x| is_unit(x.a) && x.b > 0.0)
        .copied();
    let ((_, n3_atom), (_, n2_atom)) = fixed_point_extremes(measure);
    let n1_atom = measure
        .atoms()
        .iter()
        .copied()
        .find(|x| x.a * x.c.unwrap_or(f64::NAN) + x.b == constants.n1);

    let (positive, explanation, witnesses) = if let Some(atom) = escape {
        (
            true,
            format!(
                "P[A = 1, B > 0] > 0 via atom (a = {}, b = {})",
                atom.a, atom.b
            ),
            vec![atom],
        )
    } else if strictly_less(constants.n3, constants.n) {
        let (which, top) = if strictly_less(constants.n3, constants.n2) {
            ("N2", n2_atom)
        } else {
            ("N1", n1_atom)
        };
        let mut w: Vec<Atom> = n3_atom.into_iter().collect();
        w.extend(top);
        (
            true,
            format!(
                "N3 = {} < N = {} (attained by {which})",
                constants.n3, constants.n
            ),
            w,
        )
    } else {
        let mut w: Vec<Atom> = n3_atom.into_iter().collect();
        w.extend(if constants.n1 >= constants.n2 {
            n1_atom
        } else {
            n2_atom
        });
        (
            false,
            format!(
                "N3 = {} >= N = {}: the half-line (-inf, N] is invariant, so the support is bounded above",
                constants.n3, constants.n
            ),
            w,
        )
    };
    Ok(LetacPositivity {
        positive,
        escape_hatch: escape.is_some(),
        constants,
        contracting: lm.mean_log_a < 0.0,
        heavy_tail_possible: lm.has_expanding_atom || escape.is_some(),
        explanation,
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxZeroPositivity {
    pub positive: bool,
    #[serde(serialize_with = "extended")]
    pub n2: f64,
    #[serde(serialize_with = "extended")]
    pub n3: f64,
    /// An atom with `a > 1` and `b > 0`, if any.
    pub expanding_positive_shift: Option<Atom>,
    /// `P[A = 1, B > 0] > 0`
    pub escape_hatch: bool,
}

/// Positivity of the tail constant of `max(aX + b, 0)`.
pub fn maxzero_positivity(measure: &AtomicMeasure) -> MaxZeroPositivity {
    let ((n3, _), (n2, _)) = fixed_point_extremes(measure);
    let expanding_positive_shift = measure
        .atoms()
        .iter()
        .copied()
        .find(|x| is_expanding(x.a) && x.b > 0.0);
    let escape_hatch = measure.atoms().iter().any(|x| is_unit(x.a) && x.b > 0.0);
    MaxZeroPositivity {
        positive: escape_hatch || strictly_less(n3, n2) || expanding_positive_shift.is_some(),
        n2,
        n3,
        expanding_positive_shift,
        escape_hatch,
    }
}

/// The same measure with `c = -b / a`, so that `a c + b = 0` and the
/// Letac map becomes `max(aX + b, 0)`.
pub fn as_max_zero_letac(measure: &AtomicMeasure) -> Result<AtomicMeasure> {
    let atoms = measure
        .atoms()
        .iter()
        .map(|x| Atom {
            c: Some(-x.b / x.a),
            ..*x
        })
        .collect();
    AtomicMeasure::new(atoms, measure.label())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldieCondition {
    /// Feasible `c` with `P[B - c(1 - A) ≥ 0] = 1`, or `None` if empty.
    pub interval: Option<(f64, f64)>,
    /// A feasible `c` where the strict part also holds.
    pub witness_c: Option<f64>,
    pub met: bool,
}

/// Searches for `c` with `B - c(1 - A) ≥ 0` a.s. and
/// `P[B - c(1 - A) > 0] + P[A(C - c) > 0] > 0`.
///
/// Each atom contributes a linear constraint on `c`, so the feasible set
/// is an interval. The strict part only changes at fixed points and
/// thresholds, so checking those points, the midpoints between them and
/// one point beyond each end decides it exactly.
pub fn goldie_sufficient(measure: &AtomicMeasure) -> Result<GoldieCondition> {
    let cs = thresholds(measure)?;
    let atoms = measure.atoms();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for x in atoms {
        if is_unit(x.a) {
            if x.b < -ABS_TOL {
                return Ok(GoldieCondition {
                    interval: None,
                    witness_c: None,
                    met: false,
                });
            }
            continue;
        }
        let fp = x.b / (1.0 - x.a);
        if x.a > 1.0 {
            lo = lo.max(fp);
        } else {
            hi = hi.min(fp);
        }
    }
    if lo > hi {
        if approx_eq(lo, hi) {
            hi = lo;
        } else {
            return Ok(GoldieCondition {
                interval: None,
                witness_c: None,
                met: false,
            });
        }
    }

    let inside = |c: f64| c >= lo && c <= hi;
    let mut points: Vec<f64> = atoms
        .iter()
        .filter(|x| !is_unit(x.a))
        .map(|x| x.b / (1.0 - x.a))
        .chain(cs.iter().copied())
        .chain([lo, hi])
        .filter(|c| c.is_finite() && inside(*c))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut candidates = points.clone();
    candidates.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    match (points.first(), points.last()) {
        (Some(&first), Some(&last)) => {
            if lo == f64::NEG_INFINITY {
                candidates.push(first - 1.0);
            }
            if hi == f64::INFINITY {
                candidates.push(last + 1.0);
            }
        }
        _ => candidates.push(0.0),
    }

    let strict_at = |c: f64| {
        atoms.iter().zip(&cs).any(|(x, &cc)| {
            let slack = x.b - c * (1.0 - x.a);
            let tol = ABS_TOL * (1.0 + x.b.abs() + (c * (1.0 - x.a)).abs());
            slack > tol || x.a * (cc - c) > ABS_TOL * (1.0 + cc.abs() + c.abs())
        })
    };
    let witness_c = candidates
        .into_iter()
        .filter(|&c| inside(c))
        .find(|&c| strict_at(c));
    Ok(GoldieCondition {
        interval: Some((lo, hi)),
        witness_c,
        met: witness_c.is_some(),
    })
}

/// `P[A > 1, B > 0] > 0` or `P[A > 1, B ≥ 0, C > 0] > 0`.
pub fn cv_condition(measure: &AtomicMeasure) -> Result<bool> {
    let cs = thresholds(measure)?;
    Ok(measure
        .atoms()
        .iter()
        .zip(cs)
        .any(|(x, c)| is_expanding(x.a) && (x.b > 0.0 || (x.b >= 0.0 && c > 0.0))))
}

/// `max_i (a_i N + b_i − N)`; nonpositive when `(-∞, N]` is invariant
/// under every affine part.
pub fn invariant_halfline_check(measure: &AtomicMeasure, n: f64) -> Result<f64> {
    if !n.is_finite() {
        return Err(Error::InvalidArgument(format!("N must be finite, got {n}")));
    }
    Ok(measure
        .atoms()
        .iter()
        .map(|x| x.a * n + x.b - n)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailClaim {
    Positive,
    Zero,
    Undecided,
}

impl From<Option<bool>> for TailClaim {
    fn from(x: Option<bool>) -> Self {
        match x {
            Some(true) => TailClaim::Positive,
            Some(false) => TailClaim::Zero,
            None => TailClaim::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideVerdict {
    pub claim: TailClaim,
    pub reason: String,
}

impl SideVerdict {
    fn new(claim: TailClaim, reason: impl Into<String>) -> Self {
        Self {
            claim,
            reason: reason.into(),
        }
    }
}

/// Everything the analytic criteria say about one measure and family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaVerdict {
    pub family: String,
    pub label: String,
    pub degenerate: bool,
    pub fixed_point: Option<f64>,
    pub log_moments: LogMoments,
    pub alpha: Option<CramerRoot>,
    pub alpha_note: Option<String>,
    pub support: Option<SupportClassification>,
    pub support_class: Option<SupportClass>,
    pub letac: Option<LetacConstants>,
    pub cl_positive: Option<bool>,
    pub cl_explanation: Option<String>,
    /// Upper bound of the support when the criteria prove one.
    #[serde(serialize_with = "extended_opt")]
    pub support_upper_bound: Option<f64>,
    /// Lower bound of the support when the criteria prove one.
    #[serde(serialize_with = "extended_opt")]
    pub support_lower_bound: Option<f64>,
    /// `max(aN + b − N)` when the bounded case applies.
    pub halfline_violation: Option<f64>,
    pub cm_positive: Option<bool>,
    pub goldie: Option<GoldieCondition>,
    pub cv_flag: Option<bool>,
    pub moment_ratio: Option<MomentRatioReport>,
    pub right_tail: SideVerdict,
    pub left_tail: SideVerdict,
    /// Cross-checks between independent routes to the same conclusion.
    pub consistency_checks: Vec<String>,
    pub consistent: bool,
    pub warnings: Vec<String>,
}

impl CriteriaVerdict {
    fn shell(measure: &AtomicMeasure, family: &MapFamily) -> Self {
        Self {
            family: family.name().to_string(),
            label: measure.label().to_string(),
            degenerate: false,
            fixed_point: None,
            log_moments: validate(measure),
            alpha: None,
            alpha_note: None,
            support: None,
            support_class: None,
            letac: None,
            cl_positive: None,
            cl_explanation: None,
            support_upper_bound: None,
            support_lower_bound: None,
            halfline_violation: None,
            cm_positive: None,
            goldie: None,
            cv_flag: None,
            moment_ratio: None,
            right_tail: SideVerdict::new(TailClaim::Undecided, "not evaluated"),
            left_tail: SideVerdict::new(TailClaim::Undecided, "not evaluated"),
            consistency_checks: Vec::new(),
            consistent: true,
            warnings: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.consistency_checks
            .push(format!("{}: {what}", if ok { "ok" } else { "MISMATCH" }));
        self.consistent &= ok;
    }
}

/// Runs every criterion that applies to `family` and cross-checks them.
pub fn full_verdict(measure: &AtomicMeasure, family: &MapFamily) -> Result<CriteriaVerdict> {
    let mut v = CriteriaVerdict::shell(measure, family);
    if let Some(x) = common_fixed_point(measure) {
        v.degenerate = true;
        v.fixed_point = Some(x);
        v.right_tail = SideVerdict::new(
            TailClaim::Zero,
            format!("degenerate: the stationary law is the point mass at {x}"),
        );
        v.left_tail = v.right_tail.clone();
        return Ok(v);
    }

    match solve_alpha(measure) {
        Ok(root) => v.alpha = Some(root),
        Err(e) => v.alpha_note = Some(e.to_string()),
    }
    if !v.log_moments.is_stationary() {
        v.warnings.push(format!(
            "E log A = {} is not negative; no stationary solution",
            v.log_moments.mean_log_a
        ));
    }
    if let Some(w) = arithmeticity_warning(measure) {
        v.warnings.push(w.message);
    }

    match family {
        MapFamily::Affine => affine_verdict(measure, &mut v)?,
        MapFamily::Letac => letac_verdict(measure, &mut v)?,
        MapFamily::MaxZero => max_zero_verdict(measure, &mut v)?,
        MapFamily::Extremal => extremal_verdict(measure, &mut v),
        MapFamily::UserLipschitz(_) => {
            v.moment_ratio = Some(moment_ratio_conditions(measure));
            v.right_tail = SideVerdict::new(
                TailClaim::Undecided,
                "no closed-form criterion for user maps",
            );
            v.left_tail = v.right_tail.clone();
        }
    }
    Ok(v)
}

fn affine_verdict(measure: &AtomicMeasure, v: &mut CriteriaVerdict) -> Result<()> {
    let support = affine_support_classification(measure)?;
    v.support_class = Some(support.class);
    v.right_tail = match support.upward {
        SideClass::HalfLine => {
            SideVerdict::new(TailClaim::Positive, "support contains a half-line [c, inf)")
        }
        SideClass::UnitShift => SideVerdict::new(
            TailClaim::Positive,
            "P[A = 1, B > 0] > 0: support unbounded above",
        ),
        SideClass::Bounded => SideVerdict::new(
            TailClaim::Zero,
            "every expanding fixed point >= every contracting one: support bounded above",
        ),
        SideClass::Indeterminate => SideVerdict::new(
            TailClaim::Undecided,
            "fixed-point ordering does not decide this side",
        ),
    };
    v.left_tail = match support.downward {
        SideClass::HalfLine => SideVerdict::new(
            TailClaim::Positive,
            "support contains a half-line (-inf, c]",
        ),
        SideClass::UnitShift => SideVerdict::new(
            TailClaim::Positive,
            "P[A = 1, B < 0] > 0: support unbounded below",
        ),
        SideClass::Bounded => SideVerdict::new(TailClaim::Zero, "support bounded below"),
        SideClass::Indeterminate => SideVerdict::new(
            TailClaim::Undecided,
            "fixed-point ordering does not decide this side",
        ),
    };
    if v.alpha.is_some() {
        // With a Cramér root the support is unbounded, so at least one side
        // must be unbounded.
        let either = support.upward.unbounded() || support.downward.unbounded();
        let decided = support.upward != SideClass::Indeterminate
            && support.downward != SideClass::Indeterminate;
        v.check(
            !decided || either,
            "nondegenerate measure with a Cramér root has unbounded support on some side",
        );
    }
    // (-inf, N3] is invariant in the bounded case, and [max expanding x, inf)
    // in the mirrored one.
    let ((n3, _), _) = fixed_point_extremes(measure);
    if support.upward == SideClass::Bounded {
        v.support_upper_bound = Some(n3);
    }
    if support.downward == SideClass::Bounded {
        let ((m3, _), _) = fixed_point_extremes(&measure.negated());
        v.support_lower_bound = Some(-m3);
    }
    v.support = Some(support);
    Ok(())
}

fn letac_verdict(measure: &AtomicMeasure, v: &mut CriteriaVerdict) -> Result<()> {
    let pos = letac_positivity(measure)?;
    let c = pos.constants;
    v.letac = Some(c);
    v.cl_positive = Some(pos.positive);
    v.cl_explanation = Some(pos.explanation.clone());
    v.cv_flag = Some(cv_condition(measure)?);
    let goldie = goldie_sufficient(measure)?;
    v.check(
        !goldie.met || pos.positive,
        "Goldie's sufficient condition implies C_L > 0",
    );
    v.goldie = Some(goldie);

    // The (a, b) marginal drives the affine minorant X <= X̃.
    let (upward, _) = classify_upward(measure);
    if !pos.escape_hatch {
        let via_n2 = strictly_less(c.n3, c.n2);
        v.check(
            via_n2 == (upward == SideClass::HalfLine),
            "N3 < N2 coincides with a half-line in the affine support",
        );
        if pos.positive {
            v.check(
                via_n2 || strictly_less(c.n3, c.n1),
                "C_L > 0 arises from N3 < N2 or N3 < N1",
            );
        }
    }
    if pos.positive {
        v.right_tail = SideVerdict::new(TailClaim::Positive, pos.explanation);
    } else {
        v.support_upper_bound = Some(c.n);
        if c.n.is_finite() {
            let viol = invariant_halfline_check(measure, c.n)?;
            v.check(
                viol <= HALFLINE_TOL,
                format!("aN + b <= N for every atom (max excess {viol:e})"),
            );
            v.halfline_violation = Some(viol);
        }
        v.right_tail = SideVerdict::new(TailClaim::Zero, pos.explanation);
    }
    let floor = measure
        .atoms()
        .iter()
        .map(|x| x.a * x.c.unwrap_or(f64::NAN) + x.b)
        .fold(f64::INFINITY, f64::min);
    v.support_lower_bound = Some(floor);
    v.left_tail = SideVerdict::new(
        TailClaim::Zero,
        format!("every step is >= min(ac + b) = {floor}"),
    );
    Ok(())
}

fn max_zero_verdict(measure: &AtomicMeasure, v: &mut CriteriaVerdict) -> Result<()> {
    let mz = maxzero_positivity(measure);
    // Second route: the general Letac criterion with c = -b/a, where N1 = 0.
    let as_letac = as_max_zero_letac(measure)?;
    let via_letac = letac_positivity(&as_letac)?;
    v.check(
        via_letac.positive == mz.positive,
        "max-zero criterion agrees with the Letac criterion at N1 = 0",
    );
    v.letac = Some(via_letac.constants);
    v.cm_positive = Some(mz.positive);
    v.right_tail = if mz.positive {
        let why = if mz.escape_hatch {
            "P[A = 1, B > 0] > 0".to_string()
        } else if let Some(x) = mz.expanding_positive_shift {
            format!("atom (a = {}, b = {}) has a > 1 and b > 0", x.a, x.b)
        } else {
            format!("N3 = {} < N2 = {}", mz.n3, mz.n2)
        };
        SideVerdict::new(TailClaim::Positive, why)
    } else {
        v.support_upper_bound = Some(via_letac.constants.n);
        SideVerdict::new(
            TailClaim::Zero,
            format!(
                "N3 = {} >= N2 = {} and no atom has a > 1, b > 0",
                mz.n3, mz.n2
            ),
        )
    };
    v.support_lower_bound = Some(0.0);
    v.left_tail = SideVerdict::new(TailClaim::Zero, "values are clamped at 0");
    Ok(())
}

fn extremal_verdict(measure: &AtomicMeasure, v: &mut CriteriaVerdict) {
    v.moment_ratio = Some(moment_ratio_conditions(measure));
    let min_b = measure
        .atoms()
        .iter()
        .map(|x| x.b)
        .fold(f64::INFINITY, f64::min);
    let positive_b = measure.atoms().iter().find(|x| x.b > 0.0);
    let expanding = measure.atoms().iter().any(|x| is_expanding(x.a));
    v.right_tail = match (positive_b, expanding) {
        (Some(x), true) => SideVerdict::new(
            TailClaim::Positive,
            format!(
                "b = {} > 0 is in the support and an expanding atom pushes it to +inf",
                x.b
            ),
        ),
        (None, _) => {
            v.support_upper_bound = Some(0.0);
            SideVerdict::new(TailClaim::Zero, "all b <= 0 keep (-inf, 0] invariant")
        }
        (Some(_), false) => SideVerdict::new(TailClaim::Undecided, "no expanding atom"),
    };
    v.support_lower_bound = Some(min_b);
    v.left_tail = SideVerdict::new(TailClaim::Zero, format!("every step is >= min b = {min_b}"));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn letac_measure(atoms: &[(f64, f64, f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(
            atoms
                .iter()
                .map(|&(a, b, c, w)| Atom::with_threshold(a, b, c, w))
                .collect(),
            "m",
        )
        .unwrap()
    }

    fn counterexample() -> AtomicMeasure {
        letac_measure(&[(3.0, 1.0, -1.0, 0.2), (0.5, -1.0, 0.0, 0.8)])
    }

    fn pairs(p: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::uniform(p, "m").unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(fixed_point(3.0, 1.0).unwrap().value, -0.5);
        assert_eq!(fixed_point(0.5, -1.0).unwrap().value, -2.0);
        assert_eq!(fixed_point(2.0, 0.0).unwrap().value, 0.0);
        assert_eq!(fixed_point(1.0, 2.0), Err(Error::NoFixedPoint { b: 2.0 }));
        assert_eq!(fixed_point(1.0, 0.0), Err(Error::IdentityMap));
    }

    #[test]
    fn support_classification_examples() {
        let s = affine_support_classification(&pairs(&[(2.0, -1.0), (0.5, 1.0)])).unwrap();
        assert_eq!(s.class, SupportClass::HalfLineUp);
        assert_eq!(s.downward, SideClass::Bounded);
        let s = affine_support_classification(&pairs(&[(2.0, 1.0), (0.5, -1.0)])).unwrap();
        assert_eq!(s.class, SupportClass::BoundedAbove);
        assert_eq!(s.downward, SideClass::HalfLine);
        let m = AtomicMeasure::new(
            vec![Atom::new(1.0, 1.0, 0.3), Atom::new(0.5, 0.0, 0.7)],
            "m",
        )
        .unwrap();
        assert_eq!(
            affine_support_classification(&m).unwrap().class,
            SupportClass::UnboundedViaA1Bpos
        );
        // Only expanding atoms: nothing to compare against.
        let s = affine_support_classification(&pairs(&[(2.0, 1.0), (3.0, -1.0)])).unwrap();
        assert_eq!(s.class, SupportClass::Indeterminate);
        // Degenerate measures are rejected.
        assert!(matches!(
            affine_support_classification(&pairs(&[(2.0, -1.0), (0.5, 0.5)])),
            Err(Error::Degenerate { .. })
        ));
        // Contracting fixed points on both sides of an expanding one.
        let s =
            affine_support_classification(&pairs(&[(2.0, 0.0), (0.5, 1.0), (0.5, -1.0)])).unwrap();
        assert_eq!(s.class, SupportClass::WholeLineCandidate);
    }

    #[test]
    fn letac_constants_examples() {
        let c = letac_constants(&counterexample()).unwrap();
        assert_eq!((c.n1, c.n2, c.n3, c.n), (-1.0, -2.0, -0.5, -1.0));
        let c = letac_constants(&letac_measure(&[(0.5, -1.0, 0.0, 1.0)])).unwrap();
        assert_eq!((c.n1, c.n2, c.n3), (-1.0, -2.0, f64::INFINITY));
        let c = letac_constants(&letac_measure(&[
            (3.0, 1.0, -1.0, 0.5),
            (0.5, -1.0, 10.0, 0.5),
        ]))
        .unwrap();
        assert_eq!(c.n1, 4.0);
        assert_eq!(
            letac_constants(&pairs(&[(2.0, 1.0)])),
            Err(Error::MissingThreshold)
        );
    }

    #[test]
    fn letac_positivity_examples() {
        let p = letac_positivity(&counterexample()).unwrap();
        assert!(!p.positive && !p.escape_hatch && p.contracting && p.heavy_tail_possible);
        let p = letac_positivity(&letac_measure(&[
            (3.0, 1.0, -1.0, 0.2),
            (0.5, -1.0, 10.0, 0.8),
        ]))
        .unwrap();
        assert!(p.positive);
        let p = letac_positivity(&letac_measure(&[
            (1.0, 1.0, 0.0, 0.2),
            (0.5, -1.0, 0.0, 0.8),
        ]))
        .unwrap();
        assert!(p.positive && p.escape_hatch);
    }

    #[test]
    fn maxzero_examples() {
        assert!(maxzero_positivity(&pairs(&[(3.0, 1.0), (0.5, -1.0)])).positive);
        let m = maxzero_positivity(&pairs(&[(3.0, -1.0), (0.5, -1.0)]));
        assert_eq!((m.n3, m.n2), (0.5, -2.0));
        assert!(!m.positive);
        let m = maxzero_positivity(&pairs(&[(3.0, -4.0), (0.5, 1.0)]));
        assert_eq!((m.n3, m.n2), (2.0, 2.0));
        assert!(!m.positive);
    }

    #[test]
    fn goldie_examples() {
        let g = goldie_sufficient(&counterexample()).unwrap();
        assert_eq!(g.interval, None);
        assert!(!g.met);
        let g = goldie_sufficient(&letac_measure(&[
            (3.0, 1.0, -1.0, 0.5),
            (0.5, -1.0, 10.0, 0.5),
        ]))
        .unwrap();
        assert!(!g.met);
        let g = goldie_sufficient(&letac_measure(&[(0.5, -1.0, 5.0, 1.0)])).unwrap();
        assert_eq!(g.interval, Some((f64::NEG_INFINITY, -2.0)));
        assert!(g.met);
        // Direct substitution at c = -3: A(C - c) = 0.5 * 8 > 0.
        let (a, c_atom, c) = (0.5, 5.0, -3.0);
        assert!(a * (c_atom - c) > 0.0);
    }

    #[test]
    fn cv_examples() {
        assert!(cv_condition(&counterexample()).unwrap());
        assert!(!cv_condition(&letac_measure(&[
            (0.5, 1.0, 3.0, 0.5),
            (0.9, 2.0, 1.0, 0.5)
        ]))
        .unwrap());
        assert!(cv_condition(&letac_measure(&[(2.0, 0.0, 5.0, 1.0)])).unwrap());
    }

    #[test]
    fn halfline_examples() {
        let v = invariant_halfline_check(&counterexample(), -1.0).unwrap();
        assert_eq!(v, -0.5);
        let m = letac_measure(&[(3.0, 1.0, -1.0, 0.5), (0.5, -1.0, 10.0, 0.5)]);
        // N = 4 > N3 = -1/2: the expanding atom pushes 4 to 13.
        assert_eq!(invariant_halfline_check(&m, 4.0).unwrap(), 9.0);
        let m = letac_measure(&[(1.0, -1.0, 0.0, 1.0)]);
        assert_eq!(invariant_halfline_check(&m, 17.0).unwrap(), -1.0);
    }

    #[test]
    fn verdict_examples() {
        let v = full_verdict(&counterexample(), &MapFamily::Letac).unwrap();
        assert!(!v.degenerate);
        assert!((v.alpha.unwrap().alpha - 1.0).abs() < 1e-12);
        assert_eq!(v.cl_positive, Some(false));
        assert_eq!(v.cv_flag, Some(true));
        assert_eq!(v.support_upper_bound, Some(-1.0));
        assert_eq!(v.right_tail.claim, TailClaim::Zero);
        assert!(v.consistent, "{:?}", v.consistency_checks);

        let m = AtomicMeasure::new(
            vec![
                Atom::new(2.0, -1.0, 1.0 / 3.0),
                Atom::new(0.5, 1.0, 2.0 / 3.0),
            ],
            "m",
        )
        .unwrap();
        let v = full_verdict(&m, &MapFamily::Affine).unwrap();
        assert_eq!(v.support_class, Some(SupportClass::HalfLineUp));
        assert_eq!(v.right_tail.claim, TailClaim::Positive);
        assert!(v.consistent);

        let v = full_verdict(&pairs(&[(2.0, -1.0), (0.5, 0.5)]), &MapFamily::Affine).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.fixed_point, Some(1.0));
        assert!(v.alpha.is_none() && v.support.is_none() && v.letac.is_none());

        let v = full_verdict(&pairs(&[(3.0, -1.0), (0.5, -1.0)]), &MapFamily::MaxZero).unwrap();
        assert_eq!(v.cm_positive, Some(false));
        assert!(v.consistent);
    }

    #[test]
    fn verdict_serializes_infinities() {
        let m = letac_measure(&[(0.5, -1.0, 0.0, 1.0)]);
        let c = letac_constants(&m).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"n3\":\"inf\""), "{json}");
    }

    fn cramer_letac() -> impl Strategy<Value = AtomicMeasure> {
        let atom = (0.1f64..4.0, -3.0f64..3.0, -3.0f64..3.0, 0.05f64..1.0);
        prop::collection::vec(atom, 2..5).prop_filter_map("Cramér preconditions", |raw| {
            let total: f64 = raw.iter().map(|x| x.3).sum();
            let atoms = raw
                .iter()
                .map(|&(a, b, c, w)| Atom::with_threshold(a, b, c, w / total))
                .collect();
            let m = AtomicMeasure::new(atoms, "random").ok()?;
            let lm = validate(&m);
            (lm.mean_log_a < 0.0 && lm.has_expanding_atom && common_fixed_point(&m).is_none())
                .then_some(m)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn goldie_implies_positive_constant(m in cramer_letac()) {
            let g = goldie_sufficient(&m).unwrap();
            if g.met {
                prop_assert!(letac_positivity(&m).unwrap().positive);
            }
        }

        #[test]
        fn constants_ignore_weights_and_order(m in cramer_letac(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut atoms = m.atoms().to_vec();
            atoms.shuffle(&mut rng);
            let raw: Vec<f64> = atoms.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            for (x, w) in atoms.iter_mut().zip(raw) {
                x.weight = w / total;
            }
            let other = AtomicMeasure::new(atoms, "reweighted").unwrap();
            prop_assert_eq!(letac_constants(&m).unwrap(), letac_constants(&other).unwrap());
        }

        #[test]
        fn raising_a_threshold_never_breaks_positivity(m in cramer_letac(), idx in 0usize..5, bump in 0.0f64..5.0) {
            let before = letac_positivity(&m).unwrap().positive;
            let mut atoms = m.atoms().to_vec();
            let i = idx % atoms.len();
            atoms[i].c = atoms[i].c.map(|c| c + bump);
            let after = letac_positivity(&AtomicMeasure::new(atoms, "bumped").unwrap()).unwrap().positive;
            prop_assert!(!before || after);
        }

        #[test]
        fn fixed_points_are_fixed(a in prop_oneof![0.0001f64..0.9999, 1.0001f64..10.0], b in -1e3f64..1e3) {
            let x = fixed_point(a, b).unwrap().value;
            prop_assert!((a * x + b - x).abs() <= 1e-12 * (1.0 + x.abs()));
        }

        #[test]
        fn maxzero_agrees_with_letac_route(m in cramer_letac()) {
            let v = full_verdict(&m, &MapFamily::MaxZero).unwrap();
            prop_assert!(v.consistent, "{:?}", v.consistency_checks);
        }
    }
}
