//! Measurements, datasets, parameter boxes and fit reports.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}: malformed numeric field {field:?}: {value:?}")]
    Malformed { row: usize, field: String, value: String },
    #[error("row {row}: negative radius in {field}")]
    NegativeRadius { row: usize, field: String },
    #[error("row {row}: reversed bounds in {field}")]
    ReversedBounds { row: usize, field: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("need at least 2 measurements, got {0}")]
    TooFew(usize),
    #[error("measurement {0} has an empty interval")]
    EmptyInterval(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One experimental point: an uncertainty rectangle `x × y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// 1-based position in the original input.
    pub index: usize,
    pub x: Interval,
    pub y: Interval,
}

/// CSV column layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvStyle {
    /// `x_lo,x_hi,y_lo,y_hi`
    Bounds,
    /// `x_center,x_radius,y_center,y_radius`
    CenterRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortDirection {
    Ascending,
    Descending,
}

/// Ordered, validated collection of measurements. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    measurements: Vec<Measurement>,
}

impl Dataset {
    /// Builds a dataset from `(x, y)` pairs, numbering them from 1.
    pub fn from_intervals(pairs: impl IntoIterator<Item = (Interval, Interval)>) -> Result<Self, DataError> {
        let measurements = pairs.into_iter().enumerate().map(|(i, (x, y))| Measurement { index: i + 1, x, y }).collect();
        Self::from_measurements(measurements)
    }

    /// Builds a dataset from measurements that already carry their indices.
    pub fn from_measurements(measurements: Vec<Measurement>) -> Result<Self, DataError> {
        if measurements.len() < 2 {
            return Err(DataError::TooFew(measurements.len()));
        }
        if let Some(m) = measurements.iter().find(|m| m.x.is_empty() || m.y.is_empty()) {
            return Err(DataError::EmptyInterval(m.index));
        }
        Ok(Dataset { measurements })
    }

    /// Convenience constructor from `(x_lo, x_hi, y_lo, y_hi)` rows.
    pub fn from_bounds(rows: &[(f64, f64, f64, f64)]) -> Result<Self, DataError> {
        let pairs = rows
            .iter()
            .enumerate()
            .map(|(i, &(xl, xh, yl, yh))| {
                let x = Interval::new(xl, xh).map_err(|e| bounds_error(i + 1, "x", e))?;
                let y = Interval::new(yl, yh).map_err(|e| bounds_error(i + 1, "y", e))?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        Self::from_intervals(pairs)
    }

    /// Convenience constructor from `(x_center, x_radius, y_center, y_radius)`
    /// rows, converted with outward rounding.
    pub fn from_center_radius(rows: &[(f64, f64, f64, f64)]) -> Result<Self, DataError> {
        let pairs = rows
            .iter()
            .enumerate()
            .map(|(i, &(xc, xr, yc, yr))| {
                let x = Interval::from_center_radius(xc, xr).map_err(|e| radius_error(i + 1, "x_radius", e))?;
                let y = Interval::from_center_radius(yc, yr).map_err(|e| radius_error(i + 1, "y_radius", e))?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        Self::from_intervals(pairs)
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Measurement> {
        self.measurements.iter()
    }

    /// First `len` measurements, keeping their original indices.
    pub fn prefix(&self, len: usize) -> Result<Dataset, DataError> {
        Self::from_measurements(self.measurements[..len.min(self.len())].to_vec())
    }

    /// Same measurements ordered by x midpoint; stable for ties.
    pub fn sort_by_x(&self, direction: SortDirection) -> Dataset {
        let mut ms = self.measurements.clone();
        let key = |m: &Measurement| m.x.midpoint().expect("non-empty x");
        match direction {
            SortDirection::Ascending => ms.sort_by(|p, q| key(p).total_cmp(&key(q))),
            SortDirection::Descending => ms.sort_by(|p, q| key(q).total_cmp(&key(p))),
        }
        Dataset { measurements: ms }
    }

    /// Returns a copy with the given measurement replaced.
    pub fn with_measurement(&self, position: usize, x: Interval, y: Interval) -> Result<Dataset, DataError> {
        let mut ms = self.measurements.clone();
        ms[position].x = x;
        ms[position].y = y;
        Self::from_measurements(ms)
    }

    /// Reads CSV with a header row. Extra columns are ignored.
    pub fn load_csv<R: Read>(source: R, style: CsvStyle) -> Result<Dataset, DataError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(source);
        let headers = rdr.headers()?.clone();
        let names: [&str; 4] = match style {
            CsvStyle::Bounds => ["x_lo", "x_hi", "y_lo", "y_hi"],
            CsvStyle::CenterRadius => ["x_center", "x_radius", "y_center", "y_radius"],
        };
        let mut cols = [0usize; 4];
        for (slot, name) in cols.iter_mut().zip(names) {
            *slot = headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
        }
        let mut pairs = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            let mut v = [0f64; 4];
            for ((val, &col), name) in v.iter_mut().zip(&cols).zip(names) {
                let raw = record.get(col).unwrap_or("");
                *val = raw.parse::<f64>().ok().filter(|f| !f.is_nan()).ok_or_else(|| DataError::Malformed {
                    row,
                    field: name.to_string(),
                    value: raw.to_string(),
                })?;
            }
            let (x, y) = match style {
                CsvStyle::Bounds => (
                    Interval::new(v[0], v[1]).map_err(|e| bounds_error(row, "x", e))?,
                    Interval::new(v[2], v[3]).map_err(|e| bounds_error(row, "y", e))?,
                ),
                CsvStyle::CenterRadius => (
                    Interval::from_center_radius(v[0], v[1]).map_err(|e| radius_error(row, "x_radius", e))?,
                    Interval::from_center_radius(v[2], v[3]).map_err(|e| radius_error(row, "y_radius", e))?,
                ),
            };
            pairs.push((x, y));
        }
        Self::from_intervals(pairs)
    }

    /// Writes the bounds CSV style with shortest round-trip endpoints.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["x_lo", "x_hi", "y_lo", "y_hi"])?;
        for m in &self.measurements {
            w.write_record([m.x.lo(), m.x.hi(), m.y.lo(), m.y.hi()].map(|v| format!("{:?}", v)))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the JSON mirror: `[{"x":[lo,hi],"y":[lo,hi]}, ...]`.
    pub fn load_json<R: Read>(source: R) -> Result<Dataset, DataError> {
        let rows: Vec<JsonRow> = serde_json::from_reader(source)?;
        let pairs = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let x = Interval::new(r.x[0], r.x[1]).map_err(|e| bounds_error(i + 1, "x", e))?;
                let y = Interval::new(r.y[0], r.y[1]).map_err(|e| bounds_error(i + 1, "y", e))?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        Self::from_intervals(pairs)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<JsonRow> = self.measurements.iter().map(|m| JsonRow { x: [m.x.lo(), m.x.hi()], y: [m.y.lo(), m.y.hi()] }).collect();
        serde_json::to_string(&rows).expect("finite endpoints serialize")
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Measurement;
    type IntoIter = std::slice::Iter<'a, Measurement>;
    fn into_iter(self) -> Self::IntoIter {
        self.measurements.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    x: [f64; 2],
    y: [f64; 2],
}

fn bounds_error(row: usize, field: &str, e: IntervalError) -> DataError {
    match e {
        IntervalError::NaN => DataError::Malformed { row, field: field.to_string(), value: "NaN".to_string() },
        _ => DataError::ReversedBounds { row, field: field.to_string() },
    }
}

fn radius_error(row: usize, field: &str, e: IntervalError) -> DataError {
    match e {
        IntervalError::NaN => DataError::Malformed { row, field: field.to_string(), value: "NaN".to_string() },
        _ => DataError::NegativeRadius { row, field: field.to_string() },
    }
}

/// One of the two line parameters: slope `a` or intercept `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    A,
    B,
}

impl Param {
    pub const ALL: [Param; 2] = [Param::A, Param::B];
}

/// Box `(a, b)` in parameter space. Empty as soon as either side is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBox {
    pub a: Interval,
    pub b: Interval,
}

impl ParamBox {
    pub const EMPTY: ParamBox = ParamBox { a: Interval::EMPTY, b: Interval::EMPTY };

    pub fn new(a: Interval, b: Interval) -> Self {
        ParamBox { a, b }
    }

    /// `([-omega, omega], [-omega, omega])`.
    pub fn symmetric(omega: f64) -> Self {
        ParamBox { a: Interval::symmetric(omega), b: Interval::symmetric(omega) }
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty() || self.b.is_empty()
    }

    pub fn get(&self, p: Param) -> Interval {
        match p {
            Param::A => self.a,
            Param::B => self.b,
        }
    }

    pub fn with(&self, p: Param, iv: Interval) -> ParamBox {
        let mut out = *self;
        match p {
            Param::A => out.a = iv,
            Param::B => out.b = iv,
        }
        out
    }

    /// Componentwise intersection; collapses to [`ParamBox::EMPTY`] if any
    /// component is empty.
    pub fn intersect(&self, other: &ParamBox) -> ParamBox {
        ParamBox { a: self.a.intersect(&other.a), b: self.b.intersect(&other.b) }.normalized()
    }

    /// Componentwise hull; empty boxes are ignored.
    pub fn hull(&self, other: &ParamBox) -> ParamBox {
        match (self.is_empty(), other.is_empty()) {
            (true, _) => other.normalized(),
            (_, true) => *self,
            _ => ParamBox { a: self.a.hull(&other.a), b: self.b.hull(&other.b) },
        }
    }

    pub fn subset(&self, other: &ParamBox) -> bool {
        self.is_empty() || (!other.is_empty() && self.a.subset(&other.a) && self.b.subset(&other.b))
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.a.contains(a) && self.b.contains(b)
    }

    fn normalized(self) -> ParamBox {
        if self.is_empty() {
            ParamBox::EMPTY
        } else {
            self
        }
    }
}

/// Which solution set a fit targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    United,
    Tolerable,
    Controllable,
    Crude,
}

impl SolutionKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolutionKind::United => "united",
            SolutionKind::Tolerable => "tolerable",
            SolutionKind::Controllable => "controllable",
            SolutionKind::Crude => "crude",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Solved,
    /// The slicing itself proved the solution set empty.
    ProvenEmpty,
    /// The pairwise intersection seed was empty, which already proves there
    /// is no tolerable (controllable) solution.
    SeedEmpty,
}

impl FitStatus {
    pub fn name(&self) -> &'static str {
        match self {
            FitStatus::Solved => "solved",
            FitStatus::ProvenEmpty => "proven_empty",
            FitStatus::SeedEmpty => "seed_empty",
        }
    }
}

/// Result of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub kind: SolutionKind,
    pub hull: ParamBox,
    pub status: FitStatus,
    pub outer_iterations: usize,
    pub eps_used: f64,
    /// Allowed violations for crude solves, 0 otherwise.
    pub k_allowed: usize,
    /// False when the outer loop stopped at its iteration cap rather than at
    /// a fixed point.
    pub idempotent: bool,
    /// A line inside the hull satisfying every measurement, when the
    /// post-solve search found one.
    pub witness: Option<(f64, f64)>,
}

impl FitReport {
    pub fn is_solved(&self) -> bool {
        self.status == FitStatus::Solved
    }
}
