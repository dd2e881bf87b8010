//! Built-in acceptance checks, shared by the `acceptance` test target and
//! `kgtail verify`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cramer::{solve_alpha, MomentFunction, RESIDUAL_TOL};
use crate::criteria::{cv_condition, goldie_sufficient, letac_constants, letac_positivity};
use crate::engine::{
    iterate_forward, pathwise_domination_check, sample_perpetuity, sample_stationary,
    sample_sup_pi, MapFamily, SimConfig,
};
use crate::error::{Error, Result};
use crate::experiment::thresholds::*;
use crate::experiment::{BACKWARD_SEED_OFFSET, SUP_PI_SEED_OFFSET};
use crate::measure::{common_fixed_point, validate, Atom, AtomicMeasure, Driver};
use crate::rng::stream_rng;
use crate::tailstats::{auto_t_range, hill_estimator, ks_distance, tail_constant};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "cramer-closed-forms"),
    (2, "letac-counterexample-constants"),
    (3, "letac-counterexample-support"),
    (4, "affine-positive-tail"),
    (5, "forward-backward-law"),
    (6, "sup-pi-tail"),
    (7, "pathwise-domination"),
    (8, "degeneracy-equivariance"),
    (9, "property-suites"),
];

/// `(passed, detail)`
type Check = Result<(bool, String)>;

fn measure(atoms: &[(f64, f64, f64)]) -> AtomicMeasure {
    AtomicMeasure::new(
        atoms.iter().map(|&(a, b, w)| Atom::new(a, b, w)).collect(),
        "",
    )
    .expect("valid measure")
}

fn letac(atoms: &[(f64, f64, f64, f64)], label: &str) -> AtomicMeasure {
    AtomicMeasure::new(
        atoms
            .iter()
            .map(|&(a, b, c, w)| Atom::with_threshold(a, b, c, w))
            .collect(),
        label,
    )
    .expect("valid measure")
}

/// `{(2, -1) w.p. 1/3, (1/2, 1) w.p. 2/3}`: `α = 1`, support `[1, ∞)`.
pub fn positive_affine() -> AtomicMeasure {
    measure(&[(2.0, -1.0, 1.0 / 3.0), (0.5, 1.0, 2.0 / 3.0)])
}

/// `{(3, 1, -1) w.p. 0.2, (1/2, -1, 0) w.p. 0.8}`.
pub fn letac_counterexample() -> AtomicMeasure {
    letac(
        &[(3.0, 1.0, -1.0, 0.2), (0.5, -1.0, 0.0, 0.8)],
        "counterexample",
    )
}

fn sim(n: usize, seed: u64) -> SimConfig {
    SimConfig {
        n_samples: n,
        seed,
        ..SimConfig::default()
    }
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(f))
}

fn c1_cramer() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for (a1, w1) in [(2.0, 1.0 / 3.0), (3.0, 0.2)] {
        let m = measure(&[(a1, 0.0, w1), (0.5, 0.0, 1.0 - w1)]);
        let start = Instant::now();
        let root = solve_alpha(&m)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let residual = (MomentFunction::new(&m).value(root.alpha) - 1.0).abs();
        let pass = (root.alpha - 1.0).abs() <= 1e-12 && residual <= RESIDUAL_TOL && ms < 1.0;
        ok &= pass;
        detail.push(format!(
            "a={a1}: alpha={} |phi-1|={residual:.1e} {ms:.3}ms",
            root.alpha
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn c2_constants() -> Check {
    let m = letac_counterexample();
    let c = letac_constants(&m)?;
    let pos = letac_positivity(&m)?.positive;
    let cv = cv_condition(&m)?;
    let ok = (c.n1, c.n2, c.n3, c.n) == (-1.0, -2.0, -0.5, -1.0) && !pos && cv;
    Ok((
        ok,
        format!(
            "N1={} N2={} N3={} N={} cl_positive={pos} cv={cv}",
            c.n1, c.n2, c.n3, c.n
        ),
    ))
}

fn c3_letac_support(seed: u64) -> Check {
    let start = Instant::now();
    let batch = with_threads(1, || {
        sample_stationary(
            &MapFamily::Letac,
            &letac_counterexample().into(),
            &sim(1_000_000, seed),
        )
    })??;
    let secs = start.elapsed().as_secs_f64();
    let max = batch
        .values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = max <= -1.0 + 1e-12 && secs < 60.0 && batch.values.len() == 1_000_000;
    Ok((
        ok,
        format!(
            "max={max} over {} samples, burn-in {:?}, {secs:.1}s single-threaded",
            batch.values.len(),
            batch.config.burn_in
        ),
    ))
}

fn c4_affine_tail(seed: u64) -> Check {
    let start = Instant::now();
    let batch = sample_stationary(
        &MapFamily::Affine,
        &positive_affine().into(),
        &sim(1_000_000, seed),
    )?;
    let (lo, hi) = auto_t_range(&batch.values)?;
    let decades = (hi / lo).log10();
    let tc = tail_constant(&batch.values, 1.0, lo, hi, 20)?;
    let hill = hill_estimator(&batch.values, Some(1000))?;
    let secs = start.elapsed().as_secs_f64();
    let ok = decades >= MIN_DECADES
        && tc.flatness_ratio <= MAX_FLATNESS
        && tc.min >= MIN_TO_MAX * tc.max
        && (HILL_LO..=HILL_HI).contains(&hill.alpha)
        && secs < 120.0;
    Ok((
        ok,
        format!(
            "t in [{lo:.3}, {hi:.3}] ({decades:.2} decades), flatness={:.3}, min/max={:.3}, Hill(k=1000)={:.4}, {secs:.1}s",
            tc.flatness_ratio,
            tc.min / tc.max,
            hill.alpha
        ),
    ))
}

fn c5_forward_backward(seed: u64) -> Check {
    let driver: Driver = positive_affine().into();
    let fwd = sample_stationary(&MapFamily::Affine, &driver, &sim(100_000, seed))?;
    let back = sample_perpetuity(
        &driver,
        &sim(100_000, seed.wrapping_add(BACKWARD_SEED_OFFSET)),
    )?;
    let d = ks_distance(&fwd.values, &back.values)?;
    let unconverged = back.truncation.map_or(0, |t| t.unconverged);
    Ok((
        d <= MAX_KS && unconverged == 0,
        format!("KS={d:.5} (<= {MAX_KS}), unconverged perpetuities {unconverged}"),
    ))
}

fn c6_sup_pi(seed: u64) -> Check {
    let m = measure(&[(3.0, 0.0, 0.2), (0.5, 0.0, 0.8)]);
    let batch = sample_sup_pi(
        &m.into(),
        &sim(1_000_000, seed.wrapping_add(SUP_PI_SEED_OFFSET)),
    )?;
    let tc = tail_constant(&batch.values, 1.0, 10.0, 1000.0, 20)?;
    let ok = tc.flatness_ratio <= MAX_FLATNESS && tc.min > 0.0;
    Ok((
        ok,
        format!(
            "flatness={:.3} over [10, 1000], C in [{:.4}, {:.4}]",
            tc.flatness_ratio, tc.min, tc.max
        ),
    ))
}

fn c7_domination(seed: u64) -> Check {
    let letac = pathwise_domination_check(
        &MapFamily::Letac,
        &letac_counterexample().into(),
        1000,
        1000,
        seed,
        0.0,
    )?;
    let mz = pathwise_domination_check(
        &MapFamily::MaxZero,
        &positive_affine().into(),
        1000,
        1000,
        seed,
        0.0,
    )?;
    let ok = letac.max_violation <= 1e-12 && mz.max_violation <= 1e-12;
    Ok((
        ok,
        format!(
            "letac max violation {:e}, max-zero max violation {:e}",
            letac.max_violation, mz.max_violation
        ),
    ))
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    f64::from_bits(x.to_bits() + 1) - x
}

/// Largest `|y - λ x|` in units of `ulp(λ x)` along two trajectories
/// driven by the same stream.
pub fn equivariance_ulps(m: &AtomicMeasure, lambda: f64, steps: u64, seed: u64) -> Result<f64> {
    let scaled = m.scaled_shifts(lambda)?;
    let run = |mm: &AtomicMeasure| -> Result<Vec<f64>> {
        let mut rng = stream_rng(seed, 0);
        let sampler = Driver::from(mm.clone()).sampler();
        Ok(
            iterate_forward(&MapFamily::Affine, &sampler, 0.0, steps, &mut rng, true)?
                .trajectory
                .unwrap_or_default(),
        )
    };
    let (x, y) = (run(m)?, run(&scaled)?);
    Ok(x.iter()
        .zip(&y)
        .map(|(&x, &y)| {
            let target = lambda * x;
            if target == 0.0 {
                y.abs() / f64::MIN_POSITIVE
            } else {
                (y - target).abs() / ulp(target)
            }
        })
        .fold(0.0, f64::max))
}

fn c8_degeneracy(seed: u64) -> Check {
    // Weights 1/3, 2/3 make E log A < 0 so the chain contracts onto x* = 1.
    let m = measure(&[(2.0, -1.0, 1.0 / 3.0), (0.5, 0.5, 2.0 / 3.0)]);
    let fp = common_fixed_point(&m);
    let batch = sample_stationary(&MapFamily::Affine, &m.clone().into(), &sim(100_000, seed))?;
    let worst = batch
        .values
        .iter()
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max);
    let ulps = equivariance_ulps(&m, 7.0, 10_000, seed)?;
    let ok = fp == Some(1.0) && worst <= 1e-9 && ulps <= 4.0;
    Ok((
        ok,
        format!("fixed point {fp:?}, max |X-1| = {worst:.2e}, b x 7 equivariance error {ulps} ulp"),
    ))
}

fn random_measure(rng: &mut ChaCha8Rng, threshold: bool) -> Option<AtomicMeasure> {
    let n = rng.random_range(2..6);
    let raw: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(0.1..4.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.05..1.0),
            )
        })
        .collect();
    let total: f64 = raw.iter().map(|x| x.3).sum();
    let atoms = raw
        .iter()
        .map(|&(a, b, c, w)| Atom {
            a,
            b,
            c: threshold.then_some(c),
            weight: w / total,
        })
        .collect();
    let m = AtomicMeasure::new(atoms, "random").ok()?;
    let lm = validate(&m);
    (lm.mean_log_a < 0.0 && lm.has_expanding_atom && common_fixed_point(&m).is_none()).then_some(m)
}

fn c9_properties(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut tested = 0;

    // Log-convexity of s -> log E A^s on a grid.
    while tested < 200 {
        let Some(m) = random_measure(&mut rng, false) else {
            continue;
        };
        tested += 1;
        let phi = MomentFunction::new(&m);
        let g: Vec<f64> = (0..=40).map(|i| phi.log_value(i as f64 * 0.25)).collect();
        if g.windows(3)
            .any(|w| w[0] + w[2] - 2.0 * w[1] < -1e-9 * (1.0 + w[1].abs()))
        {
            failures.push("log-convexity".to_string());
            break;
        }
    }

    // Hill scale invariance.
    let sample: Vec<f64> = (0..5000)
        .map(|_| 1.0 / (1.0 - rng.random::<f64>()))
        .collect();
    let base = hill_estimator(&sample, Some(100))?.alpha;
    for c in [1e-3, 0.37, 7.0, 1e5] {
        let scaled: Vec<f64> = sample.iter().map(|x| x * c).collect();
        if (hill_estimator(&scaled, Some(100))?.alpha - base).abs() > 1e-12 * base {
            failures.push(format!("Hill scale invariance at c={c}"));
        }
    }

    // Goldie's condition implies C_L > 0, and the constants ignore weights.
    let (mut measures, mut goldie_met) = (0, 0);
    while measures < 1000 {
        let Some(m) = random_measure(&mut rng, true) else {
            continue;
        };
        measures += 1;
        if goldie_sufficient(&m)?.met {
            goldie_met += 1;
            if !letac_positivity(&m)?.positive {
                failures.push("goldie => cl_positive".to_string());
            }
        }
        let reweighted: Vec<Atom> = m
            .atoms()
            .iter()
            .rev()
            .map(|x| Atom {
                weight: 1.0 / m.atoms().len() as f64,
                ..*x
            })
            .collect();
        if letac_constants(&m)? != letac_constants(&AtomicMeasure::new(reweighted, "w")?)? {
            failures.push("letac_constants weight invariance".to_string());
        }
    }

    // Same batch for 1 and 4 workers.
    let cfg = SimConfig {
        n_samples: 20_000,
        chains: 16,
        seed,
        ..SimConfig::default()
    };
    let driver: Driver = positive_affine().into();
    let one = with_threads(1, || sample_stationary(&MapFamily::Affine, &driver, &cfg))??;
    let four = with_threads(4, || sample_stationary(&MapFamily::Affine, &driver, &cfg))??;
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    if bits(&one.values) != bits(&four.values) || one.subseeds != four.subseeds {
        failures.push("1 vs 4 workers".to_string());
    }

    failures.dedup();
    let detail = if failures.is_empty() {
        format!("log-convexity x{tested}, Hill scaling, goldie => positivity x{measures} ({goldie_met} with Goldie met), weight invariance, 1 vs 4 workers identical")
    } else {
        format!("failed: {}", failures.join(", "))
    };
    Ok((failures.is_empty(), detail))
}

/// Runs one criterion by number.
pub fn run_criterion(id: u8, seed: u64) -> CriterionOutcome {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown", |c| c.1);
    let start = Instant::now();
    let result = match id {
        1 => c1_cramer(),
        2 => c2_constants(),
        3 => c3_letac_support(seed),
        4 => c4_affine_tail(seed),
        5 => c5_forward_backward(seed),
        6 => c6_sup_pi(seed),
        7 => c7_domination(seed),
        8 => c8_degeneracy(seed),
        9 => c9_properties(seed),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, seed))
        .collect()
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {} {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}
