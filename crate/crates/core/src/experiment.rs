//! End-to-end runs: criteria, simulation and tail diagnostics side by side.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::{Table, Value};

use crate::criteria::{full_verdict, CriteriaVerdict, TailClaim};
use crate::engine::{
    sample_perpetuity, sample_stationary, sample_sup_pi, CouplingDiagnostic, MapFamily,
    SampleBatch, SimConfig,
};
use crate::error::{Error, Result};
use crate::io::{batch_digest, driver_from_table, hex, parse_number, parse_toml};
use crate::measure::{Driver, ParametricDriver};
use crate::tailstats::{
    empirical_ccdf, ks_distance, quantile_sorted, tail_report, TailOptions, TailReport, TailSide,
};

/// Diagnostic thresholds shared by experiment summaries and the acceptance checks.
pub mod thresholds {
    /// `max / min` of `t^α P̂[X > t]` over the evaluation range.
    pub const MAX_FLATNESS: f64 = 3.0;
    /// Smallest allowed `min / max` of the same grid.
    pub const MIN_TO_MAX: f64 = 0.01;
    /// Two-sample KS distance between forward and backward batches.
    pub const MAX_KS: f64 = 0.01;
    /// Hill estimate must lie in `[HILL_LO α, HILL_HI α]`.
    pub const HILL_LO: f64 = 0.85;
    pub const HILL_HI: f64 = 1.15;
    pub const MIN_DECADES: f64 = 1.0;
    /// Slack on `max sample ≤ N` when the support is bounded above.
    pub const SUPPORT_SLACK: f64 = 1e-9;
}

/// Offsets added to the seed for the backward and `sup Π` batches, so
/// they use streams independent of the stationary batch.
pub const BACKWARD_SEED_OFFSET: u64 = 1;
pub const SUP_PI_SEED_OFFSET: u64 = 2;

/// Hill `k` used when the config leaves it open: `10^3`, or `sqrt(n)` for
/// small batches.
pub const DEFAULT_HILL_K: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    #[serde(skip)]
    pub measure_path: Option<PathBuf>,
    pub driver: Driver,
    pub family: MapFamily,
    pub sim: SimConfig,
    pub k: Option<usize>,
    /// `None` means `[q90, q99.9]` of the positive samples.
    pub t_range: Option<(f64, f64)>,
    pub n_grid: usize,
    /// Size of the backward perpetuity batch; defaults to `sim.n_samples`.
    pub backward_samples: Option<usize>,
    /// Size of the `sup Π` batch; defaults to `sim.n_samples`; 0 skips it.
    pub sup_pi_samples: Option<usize>,
    pub sup_pi_t_range: Option<(f64, f64)>,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(driver: Driver, family: MapFamily, sim: SimConfig) -> Self {
        Self {
            measure_path: None,
            driver,
            family,
            sim,
            k: None,
            t_range: None,
            n_grid: 20,
            backward_samples: None,
            sup_pi_samples: None,
            sup_pi_t_range: None,
            output_dir: None,
        }
    }

    pub fn digest(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        Sha256::digest(serde_json::to_vec(self).expect("serializable")).into()
    }
}

fn as_u64(v: &Value, key: &str) -> Result<u64> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as u64)
        .ok_or_else(|| Error::Parse(format!("experiment.{key} must be a nonnegative integer")))
}

fn as_range(v: &Value, key: &str) -> Result<Option<(f64, f64)>> {
    if v.as_str() == Some("auto") {
        return Ok(None);
    }
    match v.as_array().map(Vec::as_slice) {
        Some([lo, hi]) => Ok(Some((parse_number(lo)?, parse_number(hi)?))),
        _ => Err(Error::Parse(format!(
            "experiment.{key} must be \"auto\" or [lo, hi]"
        ))),
    }
}

/// Parses an experiment file: a measure file plus an `[experiment]` table.
/// Relative `output_dir` is resolved against `base_dir`.
pub fn parse_experiment(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let doc = parse_toml(text)?;
    let driver = driver_from_table(&doc)?;
    let empty = Table::new();
    let exp = match doc.get("experiment") {
        Some(v) => v
            .as_table()
            .ok_or_else(|| Error::Parse("experiment must be a table".into()))?,
        None => &empty,
    };
    let family: MapFamily = match exp.get("family") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::Parse("experiment.family must be a string".into()))?
            .parse()?,
        None => MapFamily::Affine,
    };
    let mut cfg = ExperimentConfig::new(driver, family, SimConfig::default());
    for (key, v) in exp {
        match key.as_str() {
            "family" => {}
            "samples" | "n_samples" => cfg.sim.n_samples = as_u64(v, key)? as usize,
            "chains" => cfg.sim.chains = as_u64(v, key)? as usize,
            "seed" => cfg.sim.seed = as_u64(v, key)?,
            "burn_in" => cfg.sim.burn_in = Some(as_u64(v, key)?),
            "max_steps" => cfg.sim.max_steps = as_u64(v, key)?,
            "truncation_eps" => cfg.sim.truncation_eps = parse_number(v)?,
            "pi_floor" => cfg.sim.pi_floor = parse_number(v)?,
            "k" => cfg.k = Some(as_u64(v, key)? as usize),
            "n_grid" => cfg.n_grid = as_u64(v, key)? as usize,
            "t_range" => cfg.t_range = as_range(v, key)?,
            "sup_pi_t_range" => cfg.sup_pi_t_range = as_range(v, key)?,
            "backward_samples" => cfg.backward_samples = Some(as_u64(v, key)? as usize),
            "sup_pi_samples" => cfg.sup_pi_samples = Some(as_u64(v, key)? as usize),
            "output_dir" => {
                let p = v
                    .as_str()
                    .ok_or_else(|| Error::Parse("experiment.output_dir must be a string".into()))?;
                cfg.output_dir = Some(base_dir.join(p));
            }
            other => return Err(Error::Parse(format!("unknown key experiment.{other}"))),
        }
    }
    cfg.sim.check()?;
    Ok(cfg)
}

pub fn read_experiment(path: &Path) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cfg = parse_experiment(&text, base)?;
    cfg.measure_path = Some(path.to_path_buf());
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Criteria,
    Stationary,
    RightTail,
    LeftTail,
    Backward,
    SupPi,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Criteria => "criteria",
            Stage::Stationary => "stationary",
            Stage::RightTail => "right-tail",
            Stage::LeftTail => "left-tail",
            Stage::Backward => "backward",
            Stage::SupPi => "sup-pi",
        };
        f.write_str(s)
    }
}

/// A stage error together with everything computed before it.
#[derive(Debug, Clone, thiserror::Error)]
#[error("stage {stage} failed: {error}")]
pub struct StageFailure {
    pub stage: Stage,
    pub error: Error,
    pub partial: Box<ExperimentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingDiagnostic>,
}

impl BatchSummary {
    fn of(batch: &SampleBatch) -> Self {
        let mut s = batch.values.clone();
        s.sort_by(f64::total_cmp);
        Self {
            n: s.len(),
            min: s.first().copied().unwrap_or(f64::NAN),
            max: s.last().copied().unwrap_or(f64::NAN),
            median: if s.is_empty() {
                f64::NAN
            } else {
                quantile_sorted(&s, 0.5)
            },
            digest: hex(&batch_digest(batch)),
            coupling: batch.coupling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TailOutcome {
    Analyzed { report: TailReport },
    Skipped { reason: String },
}

impl TailOutcome {
    pub fn report(&self) -> Option<&TailReport> {
        match self {
            TailOutcome::Analyzed { report } => Some(report),
            TailOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsComparison {
    pub forward_n: usize,
    pub backward_n: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub backward: BatchSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Empirical {
    /// Flat `t^α P̂` with a positive floor and a matching Hill estimate.
    PowerLaw,
    /// Every sample respects the analytic upper bound.
    Bounded,
    /// Diagnostics fail the power-law thresholds.
    NotPowerLaw,
    /// A sample exceeds the analytic upper bound.
    BoundViolated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub side: TailSide,
    pub analytic: TailClaim,
    pub empirical: Empirical,
    /// `None` when the analytic side is undecided.
    pub agrees: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_digest: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub label: String,
    pub family: String,
    pub verdict: Option<CriteriaVerdict>,
    pub alpha: Option<f64>,
    pub notes: Vec<String>,
    pub stationary: Option<BatchSummary>,
    /// Empirical CCDF of the raw stationary batch at selected quantiles.
    pub stationary_ccdf: Vec<(f64, f64)>,
    pub right_tail: Option<TailOutcome>,
    pub left_tail: Option<TailOutcome>,
    pub forward_backward: Option<KsComparison>,
    pub sup_pi: Option<BatchSummary>,
    pub sup_pi_tail: Option<TailOutcome>,
    pub agreement: Vec<Agreement>,
    pub provenance: Provenance,
}

/// `E A^s = exp(μ s + σ² s² / 2)`, so `α = -2μ / σ²`.
fn parametric_alpha(driver: &ParametricDriver) -> Option<f64> {
    match *driver {
        ParametricDriver::LogNormalNormal { mu, sigma, .. } => {
            (mu < 0.0 && sigma > 0.0).then(|| -2.0 * mu / (sigma * sigma))
        }
    }
}

/// Upper tail levels `1 - 10^{-j/4}` up to what the batch resolves, plus
/// every percentile.
fn ccdf_levels(n: usize) -> Vec<f64> {
    let mut levels: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let top = (4.0 * (n as f64).log10()).floor() as i32;
    levels.extend((9..=top).map(|j| 1.0 - 10f64.powf(-j as f64 / 4.0)));
    levels
}

fn raw_ccdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let mut grid: Vec<f64> = ccdf_levels(s.len())
        .into_iter()
        .map(|q| quantile_sorted(&s, q))
        .collect();
    grid.dedup();
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    empirical_ccdf(&s, &grid, TailSide::Right)
}

fn tail_options(
    cfg: &ExperimentConfig,
    side: TailSide,
    alpha: Option<f64>,
    n: usize,
    t_range: Option<(f64, f64)>,
) -> TailOptions {
    let k = cfg
        .k
        .unwrap_or_else(|| DEFAULT_HILL_K.min(((n as f64).sqrt() as usize).max(1)));
    TailOptions {
        side,
        k: Some(k),
        alpha,
        t_range,
        n_grid: cfg.n_grid,
        ..TailOptions::default()
    }
}

/// Runs the tail analysis, turning "not enough data" into a skip.
fn analyze(values: &[f64], opts: &TailOptions) -> Result<TailOutcome> {
    match tail_report(values, opts) {
        Ok(report) => Ok(TailOutcome::Analyzed { report }),
        Err(
            e @ (Error::TooFewPositive { .. }
            | Error::ZeroTail { .. }
            | Error::TooFewPoints { .. }
            | Error::ZeroHillDenominator),
        ) => Ok(TailOutcome::Skipped {
            reason: format!("insufficient tail data: {e}"),
        }),
        Err(e) => Err(e),
    }
}

fn claim(verdict: Option<&CriteriaVerdict>, side: TailSide) -> TailClaim {
    verdict.map_or(TailClaim::Undecided, |v| match side {
        TailSide::Right => v.right_tail.claim,
        TailSide::Left => v.left_tail.claim,
    })
}

fn power_law_ok(r: &TailReport, alpha: Option<f64>) -> (bool, String) {
    use thresholds::*;
    let flat = r.flatness_ratio <= MAX_FLATNESS;
    let floor = r.c_min >= MIN_TO_MAX * r.c_max && r.c_min > 0.0;
    let decades = r.decades >= MIN_DECADES;
    let hill = alpha.map_or(true, |a| {
        r.alpha_hill >= HILL_LO * a && r.alpha_hill <= HILL_HI * a
    });
    let note = format!(
        "flatness {:.3} (<= {MAX_FLATNESS}), min/max {:.3} (>= {MIN_TO_MAX}), decades {:.2}, Hill {:.3}{}",
        r.flatness_ratio,
        r.c_min / r.c_max,
        r.decades,
        r.alpha_hill,
        alpha.map_or(String::new(), |a| format!(" vs alpha {a:.4}")),
    );
    (flat && floor && decades && hill, note)
}

fn agreement_for(
    side: TailSide,
    analytic: TailClaim,
    outcome: &TailOutcome,
    alpha: Option<f64>,
    bound: Option<f64>,
    oriented_max: f64,
) -> Agreement {
    let (empirical, note) = match (analytic, outcome.report(), bound) {
        (TailClaim::Zero, _, Some(n)) => {
            let ok = oriented_max <= n + thresholds::SUPPORT_SLACK * (1.0 + n.abs());
            let note = match side {
                TailSide::Right => format!(
                    "max sample {oriented_max} {} bound {n}",
                    if ok { "<=" } else { ">" }
                ),
                TailSide::Left => format!(
                    "min sample {} {} bound {}",
                    -oriented_max,
                    if ok { ">=" } else { "<" },
                    -n
                ),
            };
            (
                if ok {
                    Empirical::Bounded
                } else {
                    Empirical::BoundViolated
                },
                note,
            )
        }
        (_, Some(r), _) => {
            let (ok, note) = power_law_ok(r, alpha);
            (
                if ok {
                    Empirical::PowerLaw
                } else {
                    Empirical::NotPowerLaw
                },
                note,
            )
        }
        (_, None, _) => (Empirical::Inconclusive, "no tail analysis".to_string()),
    };
    let agrees = match (analytic, empirical) {
        (TailClaim::Undecided, _) | (_, Empirical::Inconclusive) => None,
        (TailClaim::Positive, e) => Some(e == Empirical::PowerLaw),
        (TailClaim::Zero, e) => Some(matches!(e, Empirical::Bounded | Empirical::NotPowerLaw)),
    };
    Agreement {
        side,
        analytic,
        empirical,
        agrees,
        note,
    }
}

fn bound_for(verdict: Option<&CriteriaVerdict>, side: TailSide) -> Option<f64> {
    let v = verdict?;
    match side {
        TailSide::Right => v.support_upper_bound,
        TailSide::Left => v.support_lower_bound,
    }
}

/// Runs criteria, simulation, tail analysis, the forward/backward KS
/// comparison (affine only) and the `sup Π` batch.
pub fn run_experiment(
    cfg: &ExperimentConfig,
) -> std::result::Result<ExperimentReport, StageFailure> {
    let mut report = ExperimentReport {
        label: cfg.driver.label().to_string(),
        family: cfg.family.name().to_string(),
        verdict: None,
        alpha: None,
        notes: Vec::new(),
        stationary: None,
        stationary_ccdf: Vec::new(),
        right_tail: None,
        left_tail: None,
        forward_backward: None,
        sup_pi: None,
        sup_pi_tail: None,
        agreement: Vec::new(),
        provenance: Provenance {
            seed: cfg.sim.seed,
            config_digest: hex(&cfg.digest()),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    macro_rules! stage {
        ($stage:expr, $e:expr) => {
            match $e {
                Ok(x) => x,
                Err(error) => {
                    return Err(StageFailure {
                        stage: $stage,
                        error,
                        partial: Box::new(report),
                    })
                }
            }
        };
    }

    match &cfg.driver {
        Driver::Atomic(m) => {
            let v = stage!(Stage::Criteria, full_verdict(m, &cfg.family));
            report.alpha = v.alpha.map(|r| r.alpha);
            let degenerate = v.degenerate;
            if !v.consistent {
                report
                    .notes
                    .push("analytic cross-checks disagree; see verdict.consistency_checks".into());
            }
            report.verdict = Some(v);
            if degenerate {
                report
                    .notes
                    .push("degenerate measure: stopping after criteria".into());
                return Ok(report);
            }
        }
        Driver::Parametric { driver, .. } => {
            report.alpha = parametric_alpha(driver);
            report
                .notes
                .push("parametric driver: analytic criteria skipped".into());
        }
    }
    let verdict = report.verdict.clone();
    let alpha = report.alpha;

    let batch = stage!(
        Stage::Stationary,
        sample_stationary(&cfg.family, &cfg.driver, &cfg.sim)
    );
    report.stationary = Some(BatchSummary::of(&batch));
    report.stationary_ccdf = stage!(Stage::Stationary, raw_ccdf(&batch.values));
    let n = batch.values.len();

    for side in [TailSide::Right, TailSide::Left] {
        let analytic = claim(verdict.as_ref(), side);
        let bound = bound_for(verdict.as_ref(), side);
        let outcome = if analytic == TailClaim::Zero {
            let why = verdict.as_ref().map_or(String::new(), |v| match side {
                TailSide::Right => v.right_tail.reason.clone(),
                TailSide::Left => v.left_tail.reason.clone(),
            });
            TailOutcome::Skipped {
                reason: format!("analytic tail is zero: {why}"),
            }
        } else {
            let stage = if side == TailSide::Right {
                Stage::RightTail
            } else {
                Stage::LeftTail
            };
            stage!(
                stage,
                analyze(
                    &batch.values,
                    &tail_options(cfg, side, alpha, n, cfg.t_range)
                )
            )
        };
        let oriented_max = side
            .orient(&batch.values)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let bound = match side {
            TailSide::Right => bound,
            TailSide::Left => bound.map(|b| -b),
        };
        report.agreement.push(agreement_for(
            side,
            analytic,
            &outcome,
            alpha,
            bound,
            oriented_max,
        ));
        match side {
            TailSide::Right => report.right_tail = Some(outcome),
            TailSide::Left => report.left_tail = Some(outcome),
        }
    }

    if matches!(cfg.family, MapFamily::Affine) {
        let sim = SimConfig {
            n_samples: cfg.backward_samples.unwrap_or(cfg.sim.n_samples),
            seed: cfg.sim.seed.wrapping_add(BACKWARD_SEED_OFFSET),
            ..cfg.sim
        };
        let back = stage!(Stage::Backward, sample_perpetuity(&cfg.driver, &sim));
        let statistic = stage!(Stage::Backward, ks_distance(&batch.values, &back.values));
        report.forward_backward = Some(KsComparison {
            forward_n: n,
            backward_n: back.values.len(),
            statistic,
            threshold: thresholds::MAX_KS,
            backward: BatchSummary::of(&back),
        });
    }

    let m = cfg.sup_pi_samples.unwrap_or(cfg.sim.n_samples);
    if m == 0 {
        report.notes.push("sup-pi batch disabled".into());
    } else if alpha.is_none() {
        report
            .notes
            .push("no Cramér exponent: sup-pi batch skipped".into());
    } else {
        let sim = SimConfig {
            n_samples: m,
            seed: cfg.sim.seed.wrapping_add(SUP_PI_SEED_OFFSET),
            ..cfg.sim
        };
        let sup = stage!(Stage::SupPi, sample_sup_pi(&cfg.driver, &sim));
        report.sup_pi = Some(BatchSummary::of(&sup));
        let opts = tail_options(cfg, TailSide::Right, alpha, m, cfg.sup_pi_t_range);
        report.sup_pi_tail = Some(stage!(Stage::SupPi, analyze(&sup.values, &opts)));
    }
    Ok(report)
}

fn csv_rows(report: &TailReport) -> String {
    let mut s = String::from("t,ccdf,t_pow_alpha_ccdf\n");
    for ((t, p), (_, c)) in report.ccdf.iter().zip(&report.c_grid) {
        s.push_str(&format!("{t:?},{p:?},{c:?}\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotManifest {
    pub files: Vec<String>,
    pub skipped: Vec<(String, String)>,
    pub config_digest: String,
}

/// Writes CSVs for external plotting plus `manifest.json`:
///
/// * `ccdf.csv`: `x,ccdf` for the raw stationary batch;
/// * `tail_constant.csv` / `tail_constant_left.csv`: `t,ccdf,t_pow_alpha_ccdf`;
/// * `sup_pi_tail.csv`: same columns for the `sup Π` batch.
///
/// Files for skipped analyses are not written and are listed in the
/// manifest instead.
pub fn emit_plotdata(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut manifest = PlotManifest {
        files: Vec::new(),
        skipped: Vec::new(),
        config_digest: report.provenance.config_digest.clone(),
    };
    let mut put = |name: &str, body: String, manifest: &mut PlotManifest| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        manifest.files.push(name.to_string());
        written.push(path);
        Ok(())
    };

    if report.stationary.is_some() {
        let mut s = String::from("x,ccdf\n");
        for (x, p) in &report.stationary_ccdf {
            s.push_str(&format!("{x:?},{p:?}\n"));
        }
        put("ccdf.csv", s, &mut manifest)?;
    } else {
        manifest
            .skipped
            .push(("ccdf.csv".into(), "no stationary batch".into()));
    }
    let tails = [
        ("tail_constant.csv", &report.right_tail),
        ("tail_constant_left.csv", &report.left_tail),
        ("sup_pi_tail.csv", &report.sup_pi_tail),
    ];
    for (name, outcome) in tails {
        match outcome {
            Some(TailOutcome::Analyzed { report }) => put(name, csv_rows(report), &mut manifest)?,
            Some(TailOutcome::Skipped { reason }) => {
                manifest.skipped.push((name.into(), reason.clone()))
            }
            None => manifest.skipped.push((name.into(), "stage not run".into())),
        }
    }
    let path = dir.join("manifest.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&manifest).expect("serializable") + "\n",
    )?;
    written.push(path);
    Ok(written)
}

/// Writes `report.json` and `report.txt`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    std::fs::write(
        &json,
        serde_json::to_string_pretty(report).expect("serializable") + "\n",
    )?;
    let txt = dir.join("report.txt");
    std::fs::write(&txt, render_text(report))?;
    Ok(vec![json, txt])
}

fn outcome_line(name: &str, o: &Option<TailOutcome>) -> String {
    match o {
        Some(TailOutcome::Analyzed { report: r }) => format!(
            "{name}: Hill {:.4} (k = {}), flatness {:.3} over [{:.4e}, {:.4e}], c in [{:.4e}, {:.4e}]\n",
            r.alpha_hill, r.k_used, r.flatness_ratio, r.t_range.0, r.t_range.1, r.c_min, r.c_max
        ),
        Some(TailOutcome::Skipped { reason }) => format!("{name}: skipped ({reason})\n"),
        None => format!("{name}: not run\n"),
    }
}

/// Human-readable summary.
pub fn render_text(r: &ExperimentReport) -> String {
    let mut s = format!("experiment {:?} family {}\n", r.label, r.family);
    if let Some(v) = &r.verdict {
        s.push_str(&format!(
            "right tail (analytic): {:?} - {}\n",
            v.right_tail.claim, v.right_tail.reason
        ));
        s.push_str(&format!(
            "left tail (analytic): {:?} - {}\n",
            v.left_tail.claim, v.left_tail.reason
        ));
    }
    match r.alpha {
        Some(a) => s.push_str(&format!("alpha: {a}\n")),
        None => s.push_str("alpha: none\n"),
    }
    if let Some(b) = &r.stationary {
        s.push_str(&format!(
            "stationary: n = {}, min {}, median {}, max {}\n",
            b.n, b.min, b.median, b.max
        ));
    }
    s.push_str(&outcome_line("right tail", &r.right_tail));
    s.push_str(&outcome_line("left tail", &r.left_tail));
    if let Some(k) = &r.forward_backward {
        s.push_str(&format!(
            "forward/backward KS: {:.5} (threshold {})\n",
            k.statistic, k.threshold
        ));
    }
    if r.sup_pi.is_some() {
        s.push_str(&outcome_line("sup-pi tail", &r.sup_pi_tail));
    }
    for a in &r.agreement {
        let verdict = match a.agrees {
            Some(true) => "agrees",
            Some(false) => "DISAGREES",
            None => "undecided",
        };
        s.push_str(&format!(
            "{:?} tail: analytic {:?}, empirical {:?}: {verdict} ({})\n",
            a.side, a.analytic, a.empirical, a.note
        ));
    }
    for n in &r.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    s.push_str(&format!(
        "seed {} config {}\n",
        r.provenance.seed, r.provenance.config_digest
    ));
    s
}
