//! Outlier escalation, asymptote extraction and corridor tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, FitStatus, ParamBox, SolutionKind, SortDirection};
use crate::interval::Interval;
use crate::predicates::line_image;
use crate::seeding::SeedError;
use crate::slicer::{self, SliceOptions, SolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("need at least {need} measurements, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("max-k {max_k} must be below n - 1 = {}", .n - 1)]
    MaxK { max_k: usize, n: usize },
    #[error("no crude solution with up to {0} violated measurements")]
    Exhausted(usize),
    #[error("united set of the first {0} measurements is empty")]
    EmptyStart(usize),
    #[error("empty hull")]
    EmptyHull,
    #[error("non-finite abscissa {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    pub k_found: usize,
    pub hull: ParamBox,
    /// 1-based indices of measurements whose rectangle misses the hull's
    /// line image.
    pub outlier_indices: Vec<usize>,
}

/// Raises the number of tolerated violations from 0 until a crude solve
/// succeeds, then flags every measurement disjoint from the hull's image.
pub fn detect_outliers(d: &Dataset, opts: &SliceOptions, max_k: usize) -> Result<OutlierReport, AnalysisError> {
    let n = d.len();
    if n < 2 {
        return Err(AnalysisError::TooFew { need: 2, got: n });
    }
    if max_k + 1 >= n {
        return Err(AnalysisError::MaxK { max_k, n });
    }
    for k in 0..=max_k {
        let r = slicer::solve_crude(d, k, opts)?;
        if r.status != FitStatus::Solved {
            continue;
        }
        let outlier_indices = d
            .iter()
            .filter(|m| match line_image(&r.hull.a, &r.hull.b, &m.x) {
                Ok(img) => img.disjoint(&m.y),
                Err(_) => true,
            })
            .map(|m| m.index)
            .collect();
        return Ok(OutlierReport { k_found: k, hull: r.hull, outlier_indices });
    }
    Err(AnalysisError::Exhausted(max_k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NotNested,
    Empty,
    Exhausted,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::NotNested => "not_nested",
            StopReason::Empty => "empty",
            StopReason::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteReport {
    pub n_used: usize,
    pub hull: ParamBox,
    pub stop_reason: StopReason,
}

/// `inner ⊆ outer` up to the resolution the slicer guarantees under `opts`:
/// each endpoint may overshoot by `eps` of the outer width plus the ULP
/// floor.
pub fn nested_within_resolution(inner: &ParamBox, outer: &ParamBox, opts: &SliceOptions) -> bool {
    if inner.is_empty() {
        return true;
    }
    if outer.is_empty() {
        return false;
    }
    [(inner.a, outer.a), (inner.b, outer.b)].into_iter().all(|(i, o)| {
        let mag = o.lo().abs().max(o.hi().abs());
        let tol = opts.eps * (o.hi() - o.lo()) + opts.abs_floor * slicer::ulp(mag);
        i.lo() >= o.lo() - tol && i.hi() <= o.hi() + tol
    })
}

/// Fits growing prefixes of the x-sorted data and stops at the first hull
/// that is empty or not nested in its predecessor.
///
/// The first prefix is the shortest one containing two measurements with
/// disjoint x.
pub fn fit_asymptote(d: &Dataset, direction: SortDirection, opts: &SliceOptions) -> Result<AsymptoteReport, AnalysisError> {
    let n = d.len();
    if n < 3 {
        return Err(AnalysisError::TooFew { need: 3, got: n });
    }
    let sorted = d.sort_by_x(direction);
    let ms = sorted.measurements();
    let start =
        (1..n).find(|&j| ms[..j].iter().any(|m| m.x.disjoint(&ms[j].x))).map(|j| j + 1).ok_or(SolveError::Seed(SeedError::NoValidPair))?;
    let prefix = |len: usize| sorted.prefix(len).expect("prefix of at least 2");
    let first = slicer::solve(SolutionKind::United, &prefix(start), opts)?;
    if !first.is_solved() {
        return Err(AnalysisError::EmptyStart(start));
    }
    let mut hull = first.hull;
    for len in start + 1..=n {
        let r = slicer::solve(SolutionKind::United, &prefix(len), opts)?;
        if !r.is_solved() {
            return Ok(AsymptoteReport { n_used: len - 1, hull, stop_reason: StopReason::Empty });
        }
        if !nested_within_resolution(&r.hull, &hull, opts) {
            return Ok(AsymptoteReport { n_used: len - 1, hull, stop_reason: StopReason::NotNested });
        }
        hull = r.hull;
    }
    Ok(AsymptoteReport { n_used: n, hull, stop_reason: StopReason::Exhausted })
}

/// Straight line with standard deviations of its coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsqLine {
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
}

impl LsqLine {
    pub fn value(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    /// `sqrt((x·σa)² + σb²)`
    pub fn sigma(&self, x: f64) -> f64 {
        (x * self.sigma_a).hypot(self.sigma_b)
    }

    /// `y ± 3σ`, plain floating point.
    pub fn corridor(&self, x: f64) -> (f64, f64) {
        let (y, s) = (self.value(x), 3.0 * self.sigma(x));
        (y - s, y + s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorRow {
    pub x: f64,
    pub y_fit: Interval,
    pub lsq_corridor: Option<(f64, f64)>,
    /// `width(y_fit) / width(corridor)`; absent without a line or when the
    /// corridor has zero width.
    pub width_ratio: Option<f64>,
}

pub fn corridor_table(hull: &ParamBox, xs: &[f64], lsq: Option<&LsqLine>) -> Result<Vec<CorridorRow>, AnalysisError> {
    if hull.is_empty() {
        return Err(AnalysisError::EmptyHull);
    }
    xs.iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(AnalysisError::NonFinite(x));
            }
            let y_fit = line_image(&hull.a, &hull.b, &Interval::point(x)).map_err(|_| AnalysisError::EmptyHull)?;
            let lsq_corridor = lsq.map(|l| l.corridor(x));
            let width_ratio = lsq_corridor.and_then(|(lo, hi)| {
                let w = hi - lo;
                (w > 0.0).then(|| (y_fit.hi() - y_fit.lo()) / w)
            });
            Ok(CorridorRow { x, y_fit, lsq_corridor, width_ratio })
        })
        .collect()
}
