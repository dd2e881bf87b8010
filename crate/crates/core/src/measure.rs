//! Driving measures for the recursions.
//!
//! An [`AtomicMeasure`] is a finitely supported law of `(A, B)` or
//! `(A, B, C)`; every analytic criterion works on these. A
//! [`ParametricDriver`] is a continuous family that only the simulation
//! engine accepts. [`Driver`] wraps either one.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of the weight sum from 1 before renormalizing.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Absolute tolerance for comparing atom components.
pub const ABS_TOL: f64 = 1e-12;
/// Relative tolerance for comparing derived quantities (fixed points).
pub const REL_TOL: f64 = 1e-9;
/// Tolerance used when deciding whether a ratio of logs is rational.
pub const LATTICE_TOL: f64 = 1e-9;
/// Largest continued-fraction denominator accepted as "rational".
pub const LATTICE_MAX_DENOMINATOR: i64 = 1000;

/// `true` when `a` is treated as exactly 1.
#[inline]
pub fn is_unit(a: f64) -> bool {
    (a - 1.0).abs() <= ABS_TOL
}

/// Absolute-plus-relative closeness used for fixed-point comparisons.
#[inline]
pub fn approx_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= ABS_TOL + REL_TOL * x.abs().max(y.abs())
}

/// One support point of the driver with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(a: f64, b: f64, weight: f64) -> Self {
        Self {
            a,
            b,
            c: None,
            weight,
        }
    }

    pub fn with_threshold(a: f64, b: f64, c: f64, weight: f64) -> Self {
        Self {
            a,
            b,
            c: Some(c),
            weight,
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.a
            .total_cmp(&other.a)
            .then(self.b.total_cmp(&other.b))
            .then(
                self.c
                    .unwrap_or(f64::NAN)
                    .total_cmp(&other.c.unwrap_or(f64::NAN)),
            )
            .then(self.weight.total_cmp(&other.weight))
    }
}

/// Finitely supported driving measure.
///
/// Construction validates and renormalizes the weights and stores the
/// atoms sorted by `(a, b, c, weight)`, so every sum over atoms runs in a
/// fixed order regardless of how the input was listed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    label: String,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>, label: impl Into<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let with_c = atoms[0].c.is_some();
        for (index, atom) in atoms.iter().enumerate() {
            if !atom.a.is_finite()
                || !atom.b.is_finite()
                || !atom.weight.is_finite()
                || atom.c.is_some_and(|c| !c.is_finite())
            {
                return Err(Error::NonFiniteAtom { index });
            }
            if atom.a <= 0.0 {
                return Err(Error::NonPositiveMultiplier {
                    index,
                    value: atom.a,
                });
            }
            if atom.weight <= 0.0 || atom.weight > 1.0 + WEIGHT_SUM_TOL {
                return Err(Error::InvalidWeight {
                    index,
                    value: atom.weight,
                });
            }
            if atom.c.is_some() != with_c {
                return Err(Error::MixedThreshold);
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(Atom::canonical_cmp);
        let sum: f64 = atoms.iter().map(|x| x.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        for atom in &mut atoms {
            atom.weight /= sum;
        }
        Ok(Self {
            atoms,
            label: label.into(),
        })
    }

    /// Equal-weight measure over the given `(a, b)` pairs.
    pub fn uniform(pairs: &[(f64, f64)], label: impl Into<String>) -> Result<Self> {
        let w = 1.0 / pairs.len().max(1) as f64;
        Self::new(
            pairs.iter().map(|&(a, b)| Atom::new(a, b, w)).collect(),
            label,
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_threshold(&self) -> bool {
        self.atoms[0].c.is_some()
    }

    /// The measure of `(a, -b, -c)`: the law driving `-X`.
    pub fn negated(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|x| Atom {
                a: x.a,
                b: -x.b,
                c: x.c.map(|c| -c),
                weight: x.weight,
            })
            .collect::<Vec<_>>();
        let mut out = Self {
            atoms,
            label: format!("{} (negated)", self.label),
        };
        out.atoms.sort_by(Atom::canonical_cmp);
        out
    }

    /// Replaces every `a` with `a^power`, keeping `b`, `c` and weights.
    pub fn powered(&self, power: f64) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|x| Atom {
                a: x.a.powf(power),
                ..*x
            })
            .collect();
        Self::new(atoms, self.label.clone())
    }

    /// Multiplies every `b` (and `c`) by `factor`.
    pub fn scaled_shifts(&self, factor: f64) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|x| Atom {
                b: x.b * factor,
                c: x.c.map(|c| c * factor),
                ..*x
            })
            .collect();
        Self::new(atoms, self.label.clone())
    }

    pub fn mean_log_a(&self) -> f64 {
        self.atoms.iter().map(|x| x.weight * x.a.ln()).sum()
    }

    pub fn sd_log_a(&self) -> f64 {
        let mean = self.mean_log_a();
        let var: f64 = self
            .atoms
            .iter()
            .map(|x| x.weight * (x.a.ln() - mean).powi(2))
            .sum();
        var.max(0.0).sqrt()
    }

    pub fn max_a(&self) -> f64 {
        self.atoms
            .iter()
            .map(|x| x.a)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Exact log-moment diagnostics of an atomic measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogMoments {
    /// `E log A`
    pub mean_log_a: f64,
    /// `E log⁺|B|`
    pub mean_log_plus_abs_b: f64,
    /// Some atom has `a > 1`.
    pub has_expanding_atom: bool,
    /// `P[A = 1, B > 0] > 0`.
    pub has_a1_bpos: bool,
}

impl LogMoments {
    /// `E log A < 0` and `E log⁺|B| < ∞`.
    pub fn is_stationary(&self) -> bool {
        self.mean_log_a < 0.0 && self.mean_log_plus_abs_b.is_finite()
    }
}

/// Log-moments of a (validated) atomic measure. Summation follows the
/// canonical atom order, so permuted inputs give bit-identical output.
pub fn validate(measure: &AtomicMeasure) -> LogMoments {
    let atoms = measure.atoms();
    LogMoments {
        mean_log_a: measure.mean_log_a(),
        mean_log_plus_abs_b: atoms
            .iter()
            .map(|x| x.weight * x.b.abs().ln().max(0.0))
            .sum(),
        has_expanding_atom: atoms.iter().any(|x| x.a > 1.0 && !is_unit(x.a)),
        has_a1_bpos: atoms.iter().any(|x| is_unit(x.a) && x.b > 0.0),
    }
}

/// The point fixed by every map `x ↦ a x + b` in the support, if any.
///
/// Atoms with `a = 1` must have `b = 0`; all other atoms must share the
/// fixed point `b / (1 - a)`. When every atom is the identity the origin
/// is returned.
pub fn common_fixed_point(measure: &AtomicMeasure) -> Option<f64> {
    let mut common: Option<f64> = None;
    for atom in measure.atoms() {
        if is_unit(atom.a) {
            if atom.b.abs() > ABS_TOL {
                return None;
            }
            continue;
        }
        let x = atom.b / (1.0 - atom.a);
        match common {
            None => common = Some(x),
            Some(y) if !approx_eq(x, y) => return None,
            Some(_) => {}
        }
    }
    Some(common.unwrap_or(0.0))
}

/// `true` when `P[A x + B = x] = 1` for some `x`, i.e. the stationary law
/// is a point mass.
pub fn degeneracy_check(measure: &AtomicMeasure) -> bool {
    common_fixed_point(measure).is_some()
}

/// Emitted when the logs of the multipliers appear to lie on a lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArithmeticityWarning {
    /// Detected lattice span `d` with `log a ∈ dℤ`; `None` when there is
    /// at most one nonzero log, where any span works.
    pub span: Option<f64>,
    pub message: String,
}

/// Best rational approximation `p/q` of `x` with `q <= max_den`, returned
/// only when it lies within `tol` (relative to `max(1, |x|)`).
pub fn rational_approximation(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let sign = if x < 0.0 { -1 } else { 1 };
    let target = x.abs();
    let scale = target.max(1.0);
    let (mut h_prev, mut h) = (1i64, target.floor() as i64);
    let (mut k_prev, mut k) = (0i64, 1i64);
    let mut rest = target - target.floor();
    for _ in 0..64 {
        if (target - h as f64 / k as f64).abs() <= tol * scale {
            return Some((sign * h, k));
        }
        if rest < 1e-15 {
            break;
        }
        let inv = 1.0 / rest;
        let term = inv.floor();
        rest = inv - term;
        let term = term as i64;
        let h_next = term.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = term.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > max_den {
            break;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
    }
    None
}

fn gcd(mut x: i64, mut y: i64) -> i64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x.abs()
}

/// Warns when `log A` looks arithmetic. Never an error: the engine still
/// runs such measures, but the tail limits may not exist.
pub fn arithmeticity_warning(measure: &AtomicMeasure) -> Option<ArithmeticityWarning> {
    let mut logs: Vec<f64> = Vec::new();
    for atom in measure.atoms() {
        let l = atom.a.ln();
        if l.abs() <= ABS_TOL {
            continue;
        }
        if !logs.iter().any(|&m| approx_eq(m, l)) {
            logs.push(l);
        }
    }
    let Some(&reference) = logs.first() else {
        return Some(ArithmeticityWarning {
            span: None,
            message: "every multiplier equals 1; log A is concentrated at 0".into(),
        });
    };
    if logs.len() == 1 {
        return Some(ArithmeticityWarning {
            span: Some(reference.abs()),
            message: format!(
                "single distinct multiplier; log A lies on the lattice {:.6}ℤ",
                reference.abs()
            ),
        });
    }
    let mut lcm = 1i64;
    for &l in &logs[1..] {
        let (_, q) = rational_approximation(l / reference, LATTICE_MAX_DENOMINATOR, LATTICE_TOL)?;
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > LATTICE_MAX_DENOMINATOR {
            return None;
        }
    }
    let span = reference.abs() / lcm as f64;
    Some(ArithmeticityWarning {
        span: Some(span),
        message: format!(
            "log A appears to lie on the lattice {span:.6}ℤ; tail limits may not exist"
        ),
    })
}

/// Continuous driver families, usable by the simulation engine only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ParametricDriver {
    /// `log A ~ N(mu, sigma²)`, `B ~ N(b_mean, b_sd²)`, and optionally
    /// `C ~ N(c_mean, c_sd²)`, all independent.
    LogNormalNormal {
        mu: f64,
        sigma: f64,
        b_mean: f64,
        b_sd: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_mean: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_sd: Option<f64>,
    },
}

impl ParametricDriver {
    pub fn check(&self) -> Result<()> {
        match *self {
            ParametricDriver::LogNormalNormal {
                mu,
                sigma,
                b_mean,
                b_sd,
                c_mean,
                c_sd,
            } => {
                let finite = [mu, sigma, b_mean, b_sd].iter().all(|v| v.is_finite());
                if !finite {
                    return Err(Error::InvalidParametric("parameters must be finite".into()));
                }
                if sigma < 0.0 || b_sd < 0.0 {
                    return Err(Error::InvalidParametric(
                        "standard deviations must be >= 0".into(),
                    ));
                }
                match (c_mean, c_sd) {
                    (None, None) => Ok(()),
                    (Some(m), Some(s)) if m.is_finite() && s.is_finite() && s >= 0.0 => Ok(()),
                    _ => Err(Error::InvalidParametric(
                        "c_mean and c_sd must both be given, finite, with c_sd >= 0".into(),
                    )),
                }
            }
        }
    }

    pub fn mean_log_a(&self) -> f64 {
        match *self {
            ParametricDriver::LogNormalNormal { mu, .. } => mu,
        }
    }

    pub fn sd_log_a(&self) -> f64 {
        match *self {
            ParametricDriver::LogNormalNormal { sigma, .. } => sigma,
        }
    }

    pub fn has_threshold(&self) -> bool {
        match *self {
            ParametricDriver::LogNormalNormal { c_mean, .. } => c_mean.is_some(),
        }
    }
}

/// Either kind of driving law.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Driver {
    Atomic(AtomicMeasure),
    Parametric {
        label: String,
        driver: ParametricDriver,
    },
}

impl From<AtomicMeasure> for Driver {
    fn from(m: AtomicMeasure) -> Self {
        Driver::Atomic(m)
    }
}

impl Driver {
    pub fn label(&self) -> &str {
        match self {
            Driver::Atomic(m) => m.label(),
            Driver::Parametric { label, .. } => label,
        }
    }

    pub fn as_atomic(&self) -> Result<&AtomicMeasure> {
        match self {
            Driver::Atomic(m) => Ok(m),
            Driver::Parametric { .. } => Err(Error::ParametricNotSupported),
        }
    }

    pub fn mean_log_a(&self) -> f64 {
        match self {
            Driver::Atomic(m) => m.mean_log_a(),
            Driver::Parametric { driver, .. } => driver.mean_log_a(),
        }
    }

    pub fn sd_log_a(&self) -> f64 {
        match self {
            Driver::Atomic(m) => m.sd_log_a(),
            Driver::Parametric { driver, .. } => driver.sd_log_a(),
        }
    }

    pub fn has_threshold(&self) -> bool {
        match self {
            Driver::Atomic(m) => m.has_threshold(),
            Driver::Parametric { driver, .. } => driver.has_threshold(),
        }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self)
    }
}

/// One realization of the driver. `c` is NaN when the law carries no
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl From<&Atom> for Draw {
    fn from(x: &Atom) -> Self {
        Draw {
            a: x.a,
            b: x.b,
            c: x.c.unwrap_or(f64::NAN),
        }
    }
}

/// Draws i.i.d. driver realizations.
#[derive(Debug, Clone)]
pub enum Sampler {
    Atomic {
        cumulative: Vec<f64>,
        draws: Vec<Draw>,
    },
    LogNormalNormal {
        log_a: Normal<f64>,
        b: Normal<f64>,
        c: Option<Normal<f64>>,
    },
}

impl Sampler {
    pub fn new(driver: &Driver) -> Self {
        match driver {
            Driver::Atomic(m) => {
                let mut acc = 0.0;
                let mut cumulative: Vec<f64> = m
                    .atoms()
                    .iter()
                    .map(|x| {
                        acc += x.weight;
                        acc
                    })
                    .collect();
                // Guard the top bucket against a sum that rounds below 1.
                if let Some(last) = cumulative.last_mut() {
                    *last = f64::INFINITY;
                }
                Sampler::Atomic {
                    cumulative,
                    draws: m.atoms().iter().map(Draw::from).collect(),
                }
            }
            Driver::Parametric { driver, .. } => match *driver {
                ParametricDriver::LogNormalNormal {
                    mu,
                    sigma,
                    b_mean,
                    b_sd,
                    c_mean,
                    c_sd,
                } => {
                    let normal = |m: f64, s: f64| Normal::new(m, s).expect("checked parameters");
                    Sampler::LogNormalNormal {
                        log_a: normal(mu, sigma),
                        b: normal(b_mean, b_sd),
                        c: c_mean.zip(c_sd).map(|(m, s)| normal(m, s)),
                    }
                }
            },
        }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Draw {
        match self {
            Sampler::Atomic { cumulative, draws } => {
                if draws.len() == 1 {
                    return draws[0];
                }
                let u: f64 = rng.random();
                let idx = cumulative.partition_point(|&c| c <= u);
                draws[idx.min(draws.len() - 1)]
            }
            Sampler::LogNormalNormal { log_a, b, c } => {
                let a = log_a.sample(rng).exp();
                let b = b.sample(rng);
                let c = c.as_ref().map_or(f64::NAN, |d| d.sample(rng));
                Draw { a, b, c }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample(p: f64) -> AtomicMeasure {
        AtomicMeasure::new(
            vec![
                Atom::with_threshold(3.0, 1.0, -1.0, p),
                Atom::with_threshold(0.5, -1.0, 0.0, 1.0 - p),
            ],
            "counterexample",
        )
        .unwrap()
    }

    #[test]
    fn counterexample_log_moments() {
        let lm = validate(&counterexample(0.2));
        let expected = 0.2 * 3f64.ln() - 0.8 * 2f64.ln();
        assert!((lm.mean_log_a - expected).abs() < 1e-15);
        assert!((lm.mean_log_a + 0.3348).abs() < 1e-4);
        assert!(lm.has_expanding_atom);
        assert!(!lm.has_a1_bpos);
        assert_eq!(lm.mean_log_plus_abs_b, 0.0);
    }

    #[test]
    fn identity_and_symmetric_measures_have_zero_log_mean() {
        let id = AtomicMeasure::new(vec![Atom::new(1.0, 0.0, 1.0)], "id").unwrap();
        assert_eq!(validate(&id).mean_log_a, 0.0);
        let sym = AtomicMeasure::uniform(&[(2.0, 1.0), (0.5, 1.0)], "sym").unwrap();
        assert_eq!(validate(&sym).mean_log_a, 0.0);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(AtomicMeasure::new(vec![], "x"), Err(Error::EmptyMeasure));
        assert!(matches!(
            AtomicMeasure::new(vec![Atom::new(0.0, 1.0, 1.0)], "x"),
            Err(Error::NonPositiveMultiplier { index: 0, .. })
        ));
        assert!(matches!(
            AtomicMeasure::new(
                vec![Atom::new(2.0, 1.0, 0.5), Atom::new(0.5, 1.0, 0.4)],
                "x"
            ),
            Err(Error::WeightSum { .. })
        ));
        assert_eq!(
            AtomicMeasure::new(
                vec![
                    Atom::new(2.0, 1.0, 0.5),
                    Atom::with_threshold(0.5, 1.0, 0.0, 0.5)
                ],
                "x"
            ),
            Err(Error::MixedThreshold)
        );
        assert!(matches!(
            AtomicMeasure::new(
                vec![Atom::new(2.0, 1.0, 0.0), Atom::new(0.5, 1.0, 1.0)],
                "x"
            ),
            Err(Error::InvalidWeight { .. })
        ));
    }

    #[test]
    fn near_unit_weight_sum_is_renormalized() {
        let m = AtomicMeasure::new(
            vec![
                Atom::new(2.0, 1.0, 0.333333333333333),
                Atom::new(0.5, 1.0, 0.666666666666667),
            ],
            "thirds",
        )
        .unwrap();
        let sum: f64 = m.atoms().iter().map(|x| x.weight).sum();
        assert!((sum - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn degeneracy_examples() {
        let deg = AtomicMeasure::uniform(&[(2.0, -1.0), (0.5, 0.5)], "d").unwrap();
        assert!(degeneracy_check(&deg));
        assert_eq!(common_fixed_point(&deg), Some(1.0));
        let nondeg = AtomicMeasure::uniform(&[(2.0, -1.0), (0.5, -1.0)], "n").unwrap();
        assert!(!degeneracy_check(&nondeg));
        let id = AtomicMeasure::new(vec![Atom::new(1.0, 0.0, 1.0)], "id").unwrap();
        assert!(degeneracy_check(&id));
        let shift = AtomicMeasure::uniform(&[(1.0, 1.0), (0.5, 0.0)], "s").unwrap();
        assert!(!degeneracy_check(&shift));
    }

    #[test]
    fn arithmeticity_examples() {
        let lattice = AtomicMeasure::uniform(&[(2.0, 0.0), (4.0, 1.0)], "2,4").unwrap();
        let w = arithmeticity_warning(&lattice).expect("2 and 4 share a lattice");
        assert!((w.span.unwrap() - 2f64.ln()).abs() < 1e-12);

        let generic = AtomicMeasure::uniform(&[(2.0, 0.0), (3.0, 1.0)], "2,3").unwrap();
        assert!(arithmeticity_warning(&generic).is_none());

        let mirrored = AtomicMeasure::uniform(&[(2.0, 0.0), (0.5, 1.0)], "2,1/2").unwrap();
        let w = arithmeticity_warning(&mirrored).expect("ratio -1");
        assert!((w.span.unwrap() - 2f64.ln()).abs() < 1e-12);

        let single = AtomicMeasure::uniform(&[(0.5, 0.0), (0.5, 1.0)], "single").unwrap();
        assert!(arithmeticity_warning(&single).is_some());
    }

    #[test]
    fn continued_fraction_oracle_for_log3_over_log2() {
        // Convergents of log2(3): 1, 2, 3/2, 8/5, 19/12, 65/41, 84/53, 485/306, 1054/665.
        let r = 3f64.ln() / 2f64.ln();
        assert_eq!(rational_approximation(r, 1000, 1e-9), None);
        assert_eq!(rational_approximation(r, 1000, 1e-3), Some((65, 41)));
        assert_eq!(rational_approximation(-1.0, 1000, 1e-9), Some((-1, 1)));
        assert_eq!(rational_approximation(0.75, 1000, 1e-12), Some((3, 4)));
    }

    #[test]
    fn sampler_respects_weights() {
        use rand::SeedableRng;
        let m = counterexample(0.2);
        let s = Driver::from(m).sampler();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let hits = (0..n).filter(|_| s.draw(&mut rng).a == 3.0).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.2).abs() < 0.005, "{freq}");
    }

    #[test]
    fn parametric_checks() {
        let ok = ParametricDriver::LogNormalNormal {
            mu: -0.5,
            sigma: 1.0,
            b_mean: 0.0,
            b_sd: 1.0,
            c_mean: None,
            c_sd: None,
        };
        assert!(ok.check().is_ok());
        let bad = ParametricDriver::LogNormalNormal {
            mu: -0.5,
            sigma: -1.0,
            b_mean: 0.0,
            b_sd: 1.0,
            c_mean: None,
            c_sd: None,
        };
        assert!(bad.check().is_err());
        let d = Driver::Parametric {
            label: "p".into(),
            driver: ok,
        };
        assert_eq!(d.as_atomic(), Err(Error::ParametricNotSupported));
        assert_eq!(d.mean_log_a(), -0.5);
    }
}
