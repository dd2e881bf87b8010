//! Forward iteration, stationary sampling, backward perpetuities and the
//! running maximum of the multiplicative walk.
//!
//! Work is split into `chains` streams. Stream `i` owns the generator
//! [`rng::stream_rng`]`(seed, i)` and a fixed slice of the output, so a
//! batch is bit-identical for any number of worker threads.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Draw, Driver, Sampler};
use crate::rng::{self, StreamRng};

/// Stream index reserved for the two-start coupling diagnostic.
pub const COUPLING_STREAM: u64 = u64::MAX;
/// Starting points of the coupling diagnostic chains.
pub const COUPLING_START: f64 = 1e6;

type MapFn = dyn Fn(&Draw, f64) -> f64 + Send + Sync;
type BoundFn = dyn Fn(&Draw) -> f64 + Send + Sync;
type MinorantFn = dyn Fn(&Draw) -> (f64, f64) + Send + Sync;

/// A user-supplied Lipschitz map `x ↦ Ψ(draw, x)` with its per-draw
/// Lipschitz bound and a declared affine minorant `Ψ(x) ≥ A x + B`.
///
/// The minorant is trusted, not checked; it only has to hold on the
/// support of the stationary law.
#[derive(Clone)]
pub struct UserMap {
    name: String,
    map: Arc<MapFn>,
    lipschitz: Arc<BoundFn>,
    minorant: Arc<MinorantFn>,
}

impl UserMap {
    pub fn new(
        name: impl Into<String>,
        map: impl Fn(&Draw, f64) -> f64 + Send + Sync + 'static,
        lipschitz: impl Fn(&Draw) -> f64 + Send + Sync + 'static,
        minorant: impl Fn(&Draw) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            map: Arc::new(map),
            lipschitz: Arc::new(lipschitz),
            minorant: Arc::new(minorant),
        }
    }
}

impl fmt::Debug for UserMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserMap")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// The random map driving the recursion.
#[derive(Debug, Clone)]
pub enum MapFamily {
    /// `a x + b`
    Affine,
    /// `max(a x, b)`
    Extremal,
    /// `max(a x + b, a c + b)`
    Letac,
    /// `max(a x + b, 0)`
    MaxZero,
    UserLipschitz(UserMap),
}

impl MapFamily {
    #[inline]
    pub fn apply(&self, d: &Draw, x: f64) -> f64 {
        match self {
            MapFamily::Affine => d.a * x + d.b,
            MapFamily::Extremal => (d.a * x).max(d.b),
            MapFamily::Letac => (d.a * x + d.b).max(d.a * d.c + d.b),
            MapFamily::MaxZero => (d.a * x + d.b).max(0.0),
            MapFamily::UserLipschitz(u) => (u.map)(d, x),
        }
    }

    pub fn lipschitz(&self, d: &Draw) -> f64 {
        match self {
            MapFamily::UserLipschitz(u) => (u.lipschitz)(d),
            _ => d.a,
        }
    }

    /// Affine minorant `(A, B)` with `Ψ(x) ≥ A x + B`.
    pub fn minorant(&self, d: &Draw) -> (f64, f64) {
        match self {
            MapFamily::Extremal => (d.a, -d.b.abs()),
            MapFamily::UserLipschitz(u) => (u.minorant)(d),
            _ => (d.a, d.b),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            MapFamily::Affine => "affine",
            MapFamily::Extremal => "extremal",
            MapFamily::Letac => "letac",
            MapFamily::MaxZero => "max-zero",
            MapFamily::UserLipschitz(u) => &u.name,
        }
    }

    fn check_threshold(&self, driver: &Driver) -> Result<()> {
        if matches!(self, MapFamily::Letac) && !driver.has_threshold() {
            return Err(Error::FamilyMismatch {
                family: self.name().into(),
                reason: "the Letac map needs a threshold c on every atom".into(),
            });
        }
        Ok(())
    }

    /// Checks that the driver provides what this family needs and that
    /// the recursion contracts on average.
    pub fn check(&self, driver: &Driver) -> Result<()> {
        self.check_threshold(driver)?;
        let mean_log_a = driver.mean_log_a();
        if mean_log_a >= 0.0 || !mean_log_a.is_finite() {
            return Err(Error::NotContracting { mean_log_a });
        }
        if let (MapFamily::UserLipschitz(u), Driver::Atomic(m)) = (self, driver) {
            let mean_log_l: f64 = m
                .atoms()
                .iter()
                .map(|x| x.weight * (u.lipschitz)(&Draw::from(x)).ln())
                .sum();
            if mean_log_l >= 0.0 || mean_log_l.is_nan() {
                return Err(Error::FamilyMismatch {
                    family: u.name.clone(),
                    reason: format!("E log L = {mean_log_l} is not negative"),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "affine" => Ok(MapFamily::Affine),
            "extremal" => Ok(MapFamily::Extremal),
            "letac" => Ok(MapFamily::Letac),
            "max-zero" | "maxzero" | "max_zero" => Ok(MapFamily::MaxZero),
            other => Err(Error::InvalidArgument(format!(
                "unknown family {other:?} (expected affine, extremal, letac or max-zero)"
            ))),
        }
    }
}

impl Serialize for MapFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Steps per stationary chain; `None` means [`default_burn_in`].
    pub burn_in: Option<u64>,
    pub n_samples: usize,
    /// Number of independent seeded streams the samples are split into.
    pub chains: usize,
    pub seed: u64,
    /// Perpetuity sums stop once `Π_n < truncation_eps`.
    pub truncation_eps: f64,
    /// The running maximum stops once `Π_n < pi_floor · max`.
    pub pi_floor: f64,
    pub max_steps: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            burn_in: None,
            n_samples: 10_000,
            chains: 64,
            seed: 0,
            truncation_eps: 1e-12,
            pi_floor: 1e-8,
            max_steps: 10_000_000,
        }
    }
}

impl SimConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.burn_in == Some(0) {
            return bad("burn_in must be >= 1");
        }
        if self.n_samples == 0 {
            return bad("n_samples must be >= 1");
        }
        if self.chains == 0 {
            return bad("chains must be >= 1");
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps < 1.0) {
            return bad("truncation_eps must lie in (0, 1)");
        }
        if !(self.pi_floor > 0.0 && self.pi_floor < 1.0) {
            return bad("pi_floor must lie in (0, 1)");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1");
        }
        Ok(())
    }

    /// Burn-in actually used for a driver with the given `E log A`.
    pub fn resolved_burn_in(&self, mean_log_a: f64) -> u64 {
        self.burn_in.unwrap_or_else(|| default_burn_in(mean_log_a))
    }
}

/// `ceil(40 ln 10 / |E log A|)`: the a-priori contraction factor
/// `exp(n E log A)` drops below `1e-40`.
pub fn default_burn_in(mean_log_a: f64) -> u64 {
    let n = (40.0 * std::f64::consts::LN_10 / mean_log_a.abs()).ceil();
    if n.is_finite() {
        (n as u64).max(1)
    } else {
        u64::MAX
    }
}

/// Sizes of the `chains` streams holding `n` samples; the first
/// `n % chains` streams take one extra.
pub fn stream_sizes(n: usize, chains: usize) -> Vec<usize> {
    let base = n / chains;
    let extra = n % chains;
    (0..chains).map(|i| base + usize::from(i < extra)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchKind {
    Stationary,
    Perpetuity,
    SupPi,
}

/// Two chains from `±COUPLING_START` driven by the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingDiagnostic {
    pub steps: u64,
    pub start_gap: f64,
    pub final_gap: f64,
    /// `start_gap · exp(steps · E log A)`
    pub apriori_bound: f64,
    /// `exp(4 · sd(log A) · sqrt(steps))`, allowance for the random walk
    /// `log Π_n` wandering above its mean.
    pub safety_factor: f64,
    /// Rounding allowance `4 ε (1 + max|x|)`.
    pub rounding_floor: f64,
    pub within_bound: bool,
}

/// Truncation bookkeeping for perpetuity batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationSummary {
    /// Largest `Π_n` at which a sum was stopped.
    pub max_final_pi: f64,
    pub max_steps_used: u64,
    /// Draws that hit `max_steps` before `Π_n < truncation_eps`.
    pub unconverged: usize,
}

/// Stopping bookkeeping for running-maximum batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopSummary {
    pub max_stop_step: u64,
    pub mean_stop_step: f64,
}

/// Reproducible batch of simulated values with provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub kind: BatchKind,
    pub family: String,
    pub label: String,
    /// Config with the burn-in resolved.
    pub config: SimConfig,
    pub subseeds: Vec<u64>,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopping: Option<StopSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardRun {
    pub value: f64,
    /// `X_0, X_1, …, X_n` when recording was requested.
    pub trajectory: Option<Vec<f64>>,
}

/// Runs `n` steps of `X_k = Ψ(ω_k, X_{k-1})` from `x0`.
pub fn iterate_forward<R: Rng + ?Sized>(
    family: &MapFamily,
    sampler: &Sampler,
    x0: f64,
    n: u64,
    rng: &mut R,
    record: bool,
) -> Result<ForwardRun> {
    let mut trajectory = record.then(|| {
        let mut v = Vec::with_capacity(n as usize + 1);
        v.push(x0);
        v
    });
    let mut x = x0;
    for step in 1..=n {
        let d = sampler.draw(rng);
        x = family.apply(&d, x);
        if !x.is_finite() {
            return Err(Error::NonFinite { step });
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(x);
        }
    }
    Ok(ForwardRun {
        value: x,
        trajectory,
    })
}

/// One truncated draw of `Σ_{k≥1} Π_{k-1} B_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpetuityDraw {
    pub value: f64,
    pub steps: u64,
    /// `Π_n` when the sum stopped.
    pub final_pi: f64,
    /// `false` when `max_steps` ran out before `Π_n < truncation_eps`.
    pub converged: bool,
}

/// Backward perpetuity: partial sums until `Π_n < truncation_eps`.
pub fn backward_perpetuity<R: Rng + ?Sized>(
    sampler: &Sampler,
    config: &SimConfig,
    rng: &mut R,
) -> PerpetuityDraw {
    let mut sum = 0.0;
    let mut pi = 1.0;
    for step in 1..=config.max_steps {
        let d = sampler.draw(rng);
        sum += pi * d.b;
        pi *= d.a;
        if pi < config.truncation_eps {
            return PerpetuityDraw {
                value: sum,
                steps: step,
                final_pi: pi,
                converged: true,
            };
        }
    }
    PerpetuityDraw {
        value: sum,
        steps: config.max_steps,
        final_pi: pi,
        converged: false,
    }
}

/// One draw of `M = max_{n≥0} Π_n` (with `Π_0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupPiDraw {
    pub max: f64,
    /// Step at which `Π_n < pi_floor · max` first held.
    pub stop_step: u64,
}

pub fn sup_pi<R: Rng + ?Sized>(
    sampler: &Sampler,
    config: &SimConfig,
    rng: &mut R,
) -> Result<SupPiDraw> {
    let mut pi = 1.0f64;
    let mut max = 1.0f64;
    for step in 1..=config.max_steps {
        pi *= sampler.draw(rng).a;
        if pi > max {
            max = pi;
        }
        if pi < config.pi_floor * max {
            return Ok(SupPiDraw {
                max,
                stop_step: step,
            });
        }
    }
    Err(Error::MaxStepsExceeded {
        steps: config.max_steps,
    })
}

fn batch_shell(kind: BatchKind, family: &str, driver: &Driver, config: SimConfig) -> SampleBatch {
    SampleBatch {
        kind,
        family: family.to_string(),
        label: driver.label().to_string(),
        subseeds: (0..config.chains as u64)
            .map(|i| rng::subseed(config.seed, i))
            .collect(),
        config,
        values: Vec::new(),
        coupling: None,
        truncation: None,
        stopping: None,
    }
}

/// Runs `work` for every stream in parallel and concatenates by index.
fn run_streams<T, F>(config: &SimConfig, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> Result<Vec<T>> + Sync,
{
    let sizes = stream_sizes(config.n_samples, config.chains);
    let parts = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &size)| {
            let mut rng = rng::stream_rng(config.seed, i as u64);
            work(&mut rng, size)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Stationary samples: each value is the endpoint of an independent chain
/// of `burn_in` steps started at 0.
pub fn sample_stationary(
    family: &MapFamily,
    driver: &Driver,
    config: &SimConfig,
) -> Result<SampleBatch> {
    config.check()?;
    family.check(driver)?;
    let burn_in = config.resolved_burn_in(driver.mean_log_a());
    let config = SimConfig {
        burn_in: Some(burn_in),
        ..*config
    };
    let sampler = driver.sampler();
    let values = run_streams(&config, |rng, size| {
        (0..size)
            .map(|_| iterate_forward(family, &sampler, 0.0, burn_in, rng, false).map(|r| r.value))
            .collect()
    })?;
    let mut batch = batch_shell(BatchKind::Stationary, family.name(), driver, config);
    batch.values = values;
    batch.coupling = Some(coupling_diagnostic(family, driver, &sampler, &config)?);
    Ok(batch)
}

/// Two-start contraction check run alongside every stationary batch.
pub fn coupling_diagnostic(
    family: &MapFamily,
    driver: &Driver,
    sampler: &Sampler,
    config: &SimConfig,
) -> Result<CouplingDiagnostic> {
    let steps = config.resolved_burn_in(driver.mean_log_a());
    let mut rng = rng::stream_rng(config.seed, COUPLING_STREAM);
    let (mut hi, mut lo) = (COUPLING_START, -COUPLING_START);
    let mut scale = COUPLING_START;
    for step in 1..=steps {
        let d = sampler.draw(&mut rng);
        hi = family.apply(&d, hi);
        lo = family.apply(&d, lo);
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::NonFinite { step });
        }
        scale = scale.max(hi.abs()).max(lo.abs());
    }
    let start_gap = 2.0 * COUPLING_START;
    let final_gap = (hi - lo).abs();
    let apriori_bound = start_gap * (steps as f64 * driver.mean_log_a()).exp();
    let safety_factor = (4.0 * driver.sd_log_a() * (steps as f64).sqrt()).exp();
    let rounding_floor = 4.0 * f64::EPSILON * (1.0 + scale);
    let within_bound = final_gap <= apriori_bound * safety_factor + rounding_floor;
    Ok(CouplingDiagnostic {
        steps,
        start_gap,
        final_gap,
        apriori_bound,
        safety_factor,
        rounding_floor,
        within_bound,
    })
}

/// Batch of truncated backward perpetuities.
pub fn sample_perpetuity(driver: &Driver, config: &SimConfig) -> Result<SampleBatch> {
    config.check()?;
    MapFamily::Affine.check(driver)?;
    let sampler = driver.sampler();
    let draws = run_streams(config, |rng, size| {
        Ok((0..size)
            .map(|_| backward_perpetuity(&sampler, config, rng))
            .collect())
    })?;
    let truncation = TruncationSummary {
        max_final_pi: draws.iter().map(|d| d.final_pi).fold(0.0, f64::max),
        max_steps_used: draws.iter().map(|d| d.steps).max().unwrap_or(0),
        unconverged: draws.iter().filter(|d| !d.converged).count(),
    };
    let mut batch = batch_shell(BatchKind::Perpetuity, "affine", driver, *config);
    batch.values = draws.iter().map(|d| d.value).collect();
    batch.truncation = Some(truncation);
    Ok(batch)
}

/// Batch of draws of `M = max_n Π_n`.
pub fn sample_sup_pi(driver: &Driver, config: &SimConfig) -> Result<SampleBatch> {
    config.check()?;
    let mean_log_a = driver.mean_log_a();
    if mean_log_a >= 0.0 {
        return Err(Error::NotContracting { mean_log_a });
    }
    let sampler = driver.sampler();
    let draws = run_streams(config, |rng, size| {
        (0..size).map(|_| sup_pi(&sampler, config, rng)).collect()
    })?;
    let stopping = StopSummary {
        max_stop_step: draws.iter().map(|d| d.stop_step).max().unwrap_or(0),
        mean_stop_step: draws.iter().map(|d| d.stop_step as f64).sum::<f64>() / draws.len() as f64,
    };
    let mut batch = batch_shell(BatchKind::SupPi, "sup-pi", driver, *config);
    batch.values = draws.iter().map(|d| d.max).collect();
    batch.stopping = Some(stopping);
    Ok(batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationReport {
    pub paths: usize,
    pub steps: u64,
    /// `max (minorant iterate − Ψ iterate)` over all paths and steps.
    pub max_violation: f64,
}

/// Runs `family` and its affine minorant on the same draws from the same
/// start and reports how far the minorant ever gets above the family.
pub fn pathwise_domination_check(
    family: &MapFamily,
    driver: &Driver,
    n_paths: usize,
    n_steps: u64,
    seed: u64,
    x0: f64,
) -> Result<DominationReport> {
    family.check_threshold(driver)?;
    let sampler = driver.sampler();
    let worst = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng::stream_rng(seed, p as u64);
            let (mut upper, mut lower) = (x0, x0);
            let mut worst = f64::NEG_INFINITY;
            for step in 1..=n_steps {
                let d = sampler.draw(&mut rng);
                let (a, b) = family.minorant(&d);
                upper = family.apply(&d, upper);
                lower = a * lower + b;
                if !upper.is_finite() || !lower.is_finite() {
                    return Err(Error::NonFinite { step });
                }
                worst = worst.max(lower - upper);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DominationReport {
        paths: n_paths,
        steps: n_steps,
        max_violation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, AtomicMeasure};
    use rand::SeedableRng;

    fn counterexample(p: f64) -> Driver {
        AtomicMeasure::new(
            vec![
                Atom::with_threshold(3.0, 1.0, -1.0, p),
                Atom::with_threshold(0.5, -1.0, 0.0, 1.0 - p),
            ],
            "counterexample",
        )
        .unwrap()
        .into()
    }

    fn single(a: f64, b: f64) -> Driver {
        AtomicMeasure::new(vec![Atom::new(a, b, 1.0)], "single")
            .unwrap()
            .into()
    }

    fn rng(seed: u64) -> StreamRng {
        StreamRng::seed_from_u64(seed)
    }

    #[test]
    fn deterministic_contraction_to_geometric_limit() {
        let s = single(0.5, 1.0).sampler();
        let run = iterate_forward(&MapFamily::Affine, &s, 0.0, 50, &mut rng(1), true).unwrap();
        assert!((run.value - 2.0).abs() < 1e-14);
        assert_eq!(run.trajectory.unwrap().len(), 51);
    }

    #[test]
    fn letac_single_step() {
        let d = Draw {
            a: 3.0,
            b: 1.0,
            c: -1.0,
        };
        assert_eq!(MapFamily::Letac.apply(&d, -5.0), -2.0);
    }

    #[test]
    fn max_zero_clamps() {
        let d = Draw {
            a: 0.5,
            b: -1.0,
            c: f64::NAN,
        };
        assert_eq!(MapFamily::MaxZero.apply(&d, 1.0), 0.0);
        assert_eq!(MapFamily::Extremal.apply(&d, 4.0), 2.0);
        assert_eq!(MapFamily::Extremal.minorant(&d), (0.5, -1.0));
    }

    #[test]
    fn non_finite_reports_step() {
        let s = single(1e200, 0.0).sampler();
        let err =
            iterate_forward(&MapFamily::Affine, &s, 1e200, 10, &mut rng(1), false).unwrap_err();
        assert_eq!(err, Error::NonFinite { step: 1 });
    }

    #[test]
    fn perpetuity_geometric_series() {
        let config = SimConfig {
            truncation_eps: 1e-12,
            ..SimConfig::default()
        };
        let d = backward_perpetuity(&single(0.5, -1.0).sampler(), &config, &mut rng(3));
        assert!(d.converged);
        assert!((d.value + 2.0).abs() <= 4e-12);
        let d = backward_perpetuity(&single(0.5, 1.0).sampler(), &config, &mut rng(3));
        assert!((d.value - 2.0).abs() <= 4e-12);
    }

    #[test]
    fn perpetuity_reports_unconverged() {
        let config = SimConfig {
            max_steps: 5,
            ..SimConfig::default()
        };
        let d = backward_perpetuity(&single(0.5, 1.0).sampler(), &config, &mut rng(3));
        assert!(!d.converged);
        assert_eq!(d.steps, 5);
    }

    #[test]
    fn sup_pi_decreasing_walk() {
        let config = SimConfig::default();
        let d = sup_pi(&single(0.5, 0.0).sampler(), &config, &mut rng(0)).unwrap();
        assert_eq!(d.max, 1.0);
        let config = SimConfig {
            max_steps: 10,
            ..SimConfig::default()
        };
        assert!(sup_pi(&single(1.0, 0.0).sampler(), &config, &mut rng(0)).is_err());
    }

    #[test]
    fn sup_pi_batch_rejects_expanding_measure() {
        let config = SimConfig {
            n_samples: 10,
            chains: 2,
            ..SimConfig::default()
        };
        assert!(matches!(
            sample_sup_pi(&single(2.0, 0.0), &config),
            Err(Error::NotContracting { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::default();
        assert!(ok.check().is_ok());
        assert!(SimConfig {
            burn_in: Some(0),
            ..ok
        }
        .check()
        .is_err());
        assert!(SimConfig { chains: 0, ..ok }.check().is_err());
        assert!(SimConfig {
            truncation_eps: 1.0,
            ..ok
        }
        .check()
        .is_err());
        assert!(SimConfig {
            pi_floor: 0.0,
            ..ok
        }
        .check()
        .is_err());
    }

    #[test]
    fn default_burn_in_formula() {
        let m = 0.2 * 3f64.ln() - 0.8 * 2f64.ln();
        assert_eq!(
            default_burn_in(m),
            (40.0 * 10f64.ln() / m.abs()).ceil() as u64
        );
        assert_eq!(default_burn_in(m), 276);
    }

    #[test]
    fn stream_sizes_cover_total() {
        assert_eq!(stream_sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(stream_sizes(2, 4), vec![1, 1, 0, 0]);
    }

    #[test]
    fn letac_needs_threshold() {
        let d: Driver = AtomicMeasure::uniform(&[(3.0, 1.0), (0.5, -1.0)], "m")
            .unwrap()
            .into();
        let config = SimConfig {
            n_samples: 10,
            chains: 1,
            ..SimConfig::default()
        };
        assert!(matches!(
            sample_stationary(&MapFamily::Letac, &d, &config),
            Err(Error::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn letac_counterexample_stays_below_n() {
        let config = SimConfig {
            n_samples: 20_000,
            chains: 8,
            seed: 11,
            ..SimConfig::default()
        };
        let batch = sample_stationary(&MapFamily::Letac, &counterexample(0.2), &config).unwrap();
        assert_eq!(batch.values.len(), 20_000);
        let max = batch
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= -1.0 + 1e-12, "{max}");
        assert!(batch.coupling.unwrap().within_bound);
    }

    #[test]
    fn family_sample_bounds() {
        let d: Driver = AtomicMeasure::new(
            vec![
                Atom::new(2.0, -1.0, 1.0 / 3.0),
                Atom::new(0.5, 1.0, 2.0 / 3.0),
            ],
            "m",
        )
        .unwrap()
        .into();
        let config = SimConfig {
            n_samples: 5000,
            chains: 4,
            seed: 2,
            ..SimConfig::default()
        };
        let mz = sample_stationary(&MapFamily::MaxZero, &d, &config).unwrap();
        assert!(mz.values.iter().all(|&x| x >= 0.0));
        let ex = sample_stationary(&MapFamily::Extremal, &d, &config).unwrap();
        assert!(ex.values.iter().all(|&x| x >= -1.0));
    }

    #[test]
    fn perpetuity_with_negative_shifts_is_negative() {
        let d: Driver = AtomicMeasure::new(
            vec![Atom::new(3.0, -0.5, 0.2), Atom::new(0.5, -1.0, 0.8)],
            "neg",
        )
        .unwrap()
        .into();
        let config = SimConfig {
            n_samples: 5000,
            chains: 4,
            seed: 9,
            ..SimConfig::default()
        };
        let batch = sample_perpetuity(&d, &config).unwrap();
        assert!(batch.values.iter().all(|&x| x < 0.0));
        assert_eq!(batch.truncation.unwrap().unconverged, 0);
    }

    #[test]
    fn user_map_behaves_like_builtin() {
        let user = MapFamily::UserLipschitz(UserMap::new(
            "clamped",
            |d, x| (d.a * x + d.b).max(0.0),
            |d| d.a,
            |d| (d.a, d.b),
        ));
        let d = counterexample(0.2);
        let config = SimConfig {
            n_samples: 1000,
            chains: 3,
            seed: 4,
            ..SimConfig::default()
        };
        let a = sample_stationary(&user, &d, &config).unwrap();
        let b = sample_stationary(&MapFamily::MaxZero, &d, &config).unwrap();
        assert_eq!(a.values, b.values);
        let rep = pathwise_domination_check(&user, &d, 10, 100, 1, 0.0).unwrap();
        assert!(rep.max_violation <= 0.0);
    }

    #[test]
    fn domination_examples() {
        let d = counterexample(0.2);
        let rep = pathwise_domination_check(&MapFamily::Affine, &d, 20, 200, 5, 0.0).unwrap();
        assert_eq!(rep.max_violation, 0.0);
        let rep = pathwise_domination_check(&MapFamily::Letac, &d, 20, 200, 5, 0.0).unwrap();
        assert!(rep.max_violation <= 1e-12);
    }

    #[test]
    fn parse_family_names() {
        assert!(matches!("letac".parse::<MapFamily>(), Ok(MapFamily::Letac)));
        assert!(matches!(
            "max-zero".parse::<MapFamily>(),
            Ok(MapFamily::MaxZero)
        ));
        assert!("logistic".parse::<MapFamily>().is_err());
    }
}
