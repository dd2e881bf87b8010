//! Empirical tail diagnostics: CCDF, Hill estimator, `t^α P[X > t]`
//! grids, log-log slopes and the two-sample Kolmogorov–Smirnov distance.
//!
//! Left tails are handled by negating the samples; there is no separate
//! code path.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of points for a log-log regression.
pub const MIN_SLOPE_POINTS: usize = 10;
/// Exceedances above `t_hi` below which `tail_constant` warns.
pub const RECOMMENDED_EXCEEDANCES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSide {
    Right,
    Left,
}

impl TailSide {
    /// Samples oriented so that the requested tail is the right tail.
    pub fn orient(self, samples: &[f64]) -> Vec<f64> {
        match self {
            TailSide::Right => samples.to_vec(),
            TailSide::Left => samples.iter().map(|x| -x).collect(),
        }
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Number of sorted values strictly greater than `t`.
#[inline]
fn count_above(sorted: &[f64], t: f64) -> usize {
    sorted.len() - sorted.partition_point(|&x| x <= t)
}

/// Fraction of samples strictly above each grid point.
pub fn empirical_ccdf(samples: &[f64], grid: &[f64], side: TailSide) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    check_grid(grid)?;
    let s = sorted(&side.orient(samples));
    let n = s.len() as f64;
    Ok(grid
        .iter()
        .map(|&t| (t, count_above(&s, t) as f64 / n))
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::UnsortedGrid);
    }
    Ok(())
}

/// `n` points from `lo` to `hi` evenly spaced in `log t`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "geometric grid needs 0 < lo < hi and n >= 2 (got {lo}, {hi}, {n})"
        )));
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillEstimate {
    pub alpha: f64,
    /// `alpha / sqrt(k)`
    pub se: f64,
    pub k: usize,
}

/// Default number of upper order statistics: `floor(sqrt(n))`.
pub fn default_hill_k(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

/// Hill estimator `k / Σ_{i≤k} ln(X_(i) / X_(k+1))` over the positive
/// samples, with `X_(1) ≥ X_(2) ≥ …`. `k = None` uses `floor(sqrt(n))`.
pub fn hill_estimator(samples: &[f64], k: Option<usize>) -> Result<HillEstimate> {
    let mut pos: Vec<f64> = samples.iter().copied().filter(|&x| x > 0.0).collect();
    let k = k.unwrap_or_else(|| default_hill_k(pos.len()));
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if pos.len() < k + 1 {
        return Err(Error::TooFewPositive {
            needed: k + 1,
            found: pos.len(),
        });
    }
    pos.sort_by(|x, y| y.total_cmp(x));
    let threshold = pos[k];
    let denom: f64 = pos[..k].iter().map(|&x| (x / threshold).ln()).sum();
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::ZeroHillDenominator);
    }
    let alpha = k as f64 / denom;
    Ok(HillEstimate {
        alpha,
        se: alpha / (k as f64).sqrt(),
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailConstant {
    /// `(t, t^α · P̂[X > t])` on a geometric grid.
    pub c_grid: Vec<(f64, f64)>,
    /// `max / min` of the grid values.
    pub flatness_ratio: f64,
    pub min: f64,
    pub max: f64,
    pub exceedances_at_top: usize,
    pub warnings: Vec<String>,
}

/// `t^α · P̂[X > t]` on `n_grid` geometric points of `[t_lo, t_hi]`.
/// Flat values indicate `P[X > t] ~ C t^{-α}`; a positive minimum supports
/// a lower bound `P[X > t] ≥ ε t^{-α}`.
pub fn tail_constant(
    samples: &[f64],
    alpha: f64,
    t_lo: f64,
    t_hi: f64,
    n_grid: usize,
) -> Result<TailConstant> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let grid = geometric_grid(t_lo, t_hi, n_grid)?;
    let s = sorted(samples);
    let n = s.len() as f64;
    let mut c_grid = Vec::with_capacity(grid.len());
    for &t in &grid {
        let count = count_above(&s, t);
        if count == 0 {
            let largest_usable = c_grid.last().map(|&(t, _)| t);
            return Err(Error::ZeroTail { t, largest_usable });
        }
        c_grid.push((t, t.powf(alpha) * count as f64 / n));
    }
    let min = c_grid.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let max = c_grid.iter().map(|x| x.1).fold(0.0, f64::max);
    let exceedances_at_top = count_above(&s, t_hi);
    let mut warnings = Vec::new();
    if exceedances_at_top < RECOMMENDED_EXCEEDANCES {
        warnings.push(format!(
            "only {exceedances_at_top} samples exceed t_hi = {t_hi}; at least {RECOMMENDED_EXCEEDANCES} recommended"
        ));
    }
    Ok(TailConstant {
        c_grid,
        flatness_ratio: max / min,
        min,
        max,
        exceedances_at_top,
        warnings,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_distance(samples_a: &[f64], samples_b: &[f64]) -> Result<f64> {
    if samples_a.is_empty() || samples_b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let a = sorted(samples_a);
    let b = sorted(samples_b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() {
            a[i]
        } else {
            b[j]
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Quantile (type 1, inverse empirical CDF) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Least-squares slope of `ln P̂[X ≥ x]` against `ln x` over the order
/// statistics of the positive samples between quantiles `q_lo` and `q_hi`.
pub fn loglog_slope(samples: &[f64], q_lo: f64, q_hi: f64) -> Result<f64> {
    if !(0.0 < q_lo && q_lo < q_hi && q_hi < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < q_lo < q_hi < 1 (got {q_lo}, {q_hi})"
        )));
    }
    let pos = sorted(
        &samples
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .collect::<Vec<_>>(),
    );
    if pos.is_empty() {
        return Err(Error::TooFewPoints {
            needed: MIN_SLOPE_POINTS,
            found: 0,
        });
    }
    let n = pos.len();
    let lo = quantile_sorted(&pos, q_lo);
    let hi = quantile_sorted(&pos, q_hi);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &x) in pos.iter().enumerate() {
        // Ties: keep the first occurrence so the count covers all X >= x.
        if x < lo || x > hi || (i > 0 && pos[i - 1] == x) {
            continue;
        }
        let ccdf = (n - i) as f64 / n as f64;
        xs.push(x.ln());
        ys.push(ccdf.ln());
    }
    if xs.len() < MIN_SLOPE_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_SLOPE_POINTS,
            found: xs.len(),
        });
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewPoints {
            needed: MIN_SLOPE_POINTS,
            found: 1,
        });
    }
    Ok(sxy / sxx)
}

/// Options for [`tail_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailOptions {
    pub side: TailSide,
    /// Hill `k`; `None` uses `floor(sqrt(n))`.
    pub k: Option<usize>,
    /// Exponent used for `t^α P̂`; `None` uses the Hill estimate.
    pub alpha: Option<f64>,
    /// Evaluation range; `None` uses the 90th and 99.9th percentiles of
    /// the positive (oriented) samples.
    pub t_range: Option<(f64, f64)>,
    pub n_grid: usize,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            side: TailSide::Right,
            k: None,
            alpha: None,
            t_range: None,
            n_grid: 20,
            q_lo: 0.9,
            q_hi: 0.999,
        }
    }
}

/// Automatic evaluation range `[q90, q99.9]` of the positive samples.
pub fn auto_t_range(samples: &[f64]) -> Result<(f64, f64)> {
    let pos = sorted(
        &samples
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .collect::<Vec<_>>(),
    );
    if pos.len() < 2 {
        return Err(Error::TooFewPositive {
            needed: 2,
            found: pos.len(),
        });
    }
    let lo = quantile_sorted(&pos, 0.9);
    let hi = quantile_sorted(&pos, 0.999);
    if !(hi > lo && lo > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate tail range [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub side: TailSide,
    pub n: usize,
    pub n_positive: usize,
    pub alpha_hill: f64,
    pub hill_se: f64,
    pub k_used: usize,
    /// Exponent used in `c_grid`.
    pub alpha_used: f64,
    pub t_range: (f64, f64),
    pub ccdf: Vec<(f64, f64)>,
    pub c_grid: Vec<(f64, f64)>,
    /// `None` when the quantile band holds too few distinct points.
    pub loglog_slope: Option<f64>,
    pub flatness_ratio: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Evaluation decades spanned by `t_range`.
    pub decades: f64,
    pub warnings: Vec<String>,
}

/// All tail diagnostics for one side of a batch.
pub fn tail_report(samples: &[f64], opts: &TailOptions) -> Result<TailReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let oriented = opts.side.orient(samples);
    let hill = hill_estimator(&oriented, opts.k)?;
    let alpha_used = opts.alpha.unwrap_or(hill.alpha);
    let t_range = match opts.t_range {
        Some(r) => r,
        None => auto_t_range(&oriented)?,
    };
    let grid = geometric_grid(t_range.0, t_range.1, opts.n_grid)?;
    let ccdf = empirical_ccdf(&oriented, &grid, TailSide::Right)?;
    let tc = tail_constant(&oriented, alpha_used, t_range.0, t_range.1, opts.n_grid)?;
    let mut warnings = tc.warnings;
    let slope = match loglog_slope(&oriented, opts.q_lo, opts.q_hi) {
        Ok(s) => Some(s),
        Err(e @ Error::TooFewPoints { .. }) => {
            warnings.push(format!("log-log slope unavailable: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let decades = (t_range.1 / t_range.0).log10();
    if decades < 1.0 {
        warnings.push(format!("evaluation range spans only {decades:.2} decades"));
    }
    Ok(TailReport {
        side: opts.side,
        n: samples.len(),
        n_positive: oriented.iter().filter(|&&x| x > 0.0).count(),
        alpha_hill: hill.alpha,
        hill_se: hill.se,
        k_used: hill.k,
        alpha_used,
        t_range,
        ccdf,
        c_grid: tc.c_grid,
        loglog_slope: slope,
        flatness_ratio: tc.flatness_ratio,
        c_min: tc.min,
        c_max: tc.max,
        decades,
        warnings,
    })
}
