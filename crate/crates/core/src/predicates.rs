//! Point membership tests for each solution kind and the box rejection rules
//! that drive slicing.
//!
//! Every rejection rule is monotone: if it rejects a box it rejects every
//! sub-box. A rejected box provably contains no solution with respect to the
//! measurement that rejected it.

use thiserror::Error;

use crate::data::{Dataset, Measurement, ParamBox, SolutionKind};
use crate::interval::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredicateError {
    #[error("{0:?} rules need an auxiliary image for every measurement")]
    MissingAux(SolutionKind),
    #[error("expected {expected} auxiliary images, got {got}")]
    AuxCount { expected: usize, got: usize },
    #[error("empty operand")]
    Empty,
    #[error("k_allowed is only meaningful for crude rule sets")]
    UnexpectedK,
}

/// Which half of the two-sided test a rule set applies.
///
/// `D` discards boxes whose lines run below a measurement, `U` those whose
/// lines run above it (for controllable solutions the roles follow the
/// covering condition instead).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    D,
    U,
}

/// Rejection rules for one slicing pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    kind: SolutionKind,
    side: Side,
    aux: Option<Vec<Interval>>,
    k_allowed: usize,
}

impl RuleSet {
    pub fn united(side: Side) -> Self {
        RuleSet { kind: SolutionKind::United, side, aux: None, k_allowed: 0 }
    }

    /// Tolerable rules with one auxiliary image `y'_k` per measurement.
    pub fn tolerable(side: Side, aux: Vec<Interval>) -> Self {
        RuleSet { kind: SolutionKind::Tolerable, side, aux: Some(aux), k_allowed: 0 }
    }

    pub fn controllable(side: Side, aux: Vec<Interval>) -> Self {
        RuleSet { kind: SolutionKind::Controllable, side, aux: Some(aux), k_allowed: 0 }
    }

    /// Crude rules reject a box once more than `k_allowed` measurements fail
    /// the united condition over the whole box. There is no D/U split.
    pub fn crude(k_allowed: usize) -> Self {
        RuleSet { kind: SolutionKind::Crude, side: Side::D, aux: None, k_allowed }
    }

    pub fn kind(&self) -> SolutionKind {
        self.kind
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn k_allowed(&self) -> usize {
        self.k_allowed
    }

    pub fn aux(&self) -> Option<&[Interval]> {
        self.aux.as_deref()
    }

    /// Checks the rule set against a dataset: auxiliary images must be
    /// present exactly for tolerable/controllable rules, one per measurement.
    pub fn validate(&self, d: &Dataset) -> Result<(), PredicateError> {
        match self.kind {
            SolutionKind::Tolerable | SolutionKind::Controllable => match &self.aux {
                None => Err(PredicateError::MissingAux(self.kind)),
                Some(v) if v.len() != d.len() => Err(PredicateError::AuxCount { expected: d.len(), got: v.len() }),
                Some(_) => Ok(()),
            },
            SolutionKind::United if self.aux.is_some() => Err(PredicateError::AuxCount { expected: 0, got: 1 }),
            _ => Ok(()),
        }
    }

    /// True if every `(a, b)` in `bx` provably fails measurement `m` under
    /// this rule set's side.
    pub fn rejects(&self, bx: &ParamBox, m: &Measurement, aux_m: Option<Interval>) -> Result<bool, PredicateError> {
        if bx.is_empty() {
            return Err(PredicateError::Empty);
        }
        Ok(match self.kind {
            SolutionKind::United => united_rejects(self.side, bx, m),
            SolutionKind::Crude => united_fails(bx, m),
            SolutionKind::Tolerable | SolutionKind::Controllable => {
                let aux = aux_m.ok_or(PredicateError::MissingAux(self.kind))?;
                aux_rejects(bx, m, &aux) || side_rejects(self.kind, self.side, bx, m)
            }
        })
    }

    /// True if the box as a whole is discarded against the dataset: some
    /// measurement rejects it, or, for crude rules, more than `k_allowed` do.
    ///
    /// The rule set must have been validated against `d`.
    pub fn rejects_box(&self, bx: &ParamBox, d: &Dataset) -> bool {
        debug_assert!(!bx.is_empty());
        match self.kind {
            SolutionKind::United => d.iter().any(|m| united_rejects(self.side, bx, m)),
            SolutionKind::Crude => count_failures(bx, d) > self.k_allowed,
            SolutionKind::Tolerable | SolutionKind::Controllable => {
                let aux = self.aux.as_deref().expect("validated rule set");
                d.iter().zip(aux).any(|(m, y)| aux_rejects(bx, m, y) || side_rejects(self.kind, self.side, bx, m))
            }
        }
    }
}

/// Natural interval extension `a·x + b`, outward rounded.
pub fn line_image(a: &Interval, b: &Interval, x: &Interval) -> Result<Interval, PredicateError> {
    a.checked_mul(x).and_then(|ax| ax.checked_add(b)).map_err(|_| PredicateError::Empty)
}

fn image(bx: &ParamBox, x: &Interval) -> Interval {
    bx.a * *x + bx.b
}

fn united_rejects(side: Side, bx: &ParamBox, m: &Measurement) -> bool {
    let img = image(bx, &m.x);
    match side {
        Side::D => img.hi() < m.y.lo(),
        Side::U => img.lo() > m.y.hi(),
    }
}

/// Full two-term united alternative: the line band misses the rectangle.
fn united_fails(bx: &ParamBox, m: &Measurement) -> bool {
    let img = image(bx, &m.x);
    img.hi() < m.y.lo() || img.lo() > m.y.hi()
}

fn aux_rejects(bx: &ParamBox, m: &Measurement, aux: &Interval) -> bool {
    image(bx, &m.x).disjoint(aux)
}

/// One-sided rules for tolerable and controllable sets, evaluated on the
/// thin images of both x endpoints.
fn side_rejects(kind: SolutionKind, side: Side, bx: &ParamBox, m: &Measurement) -> bool {
    let at_lo = image(bx, &Interval::point(m.x.lo()));
    let at_hi = image(bx, &Interval::point(m.x.hi()));
    let (y_lo, y_hi) = (m.y.lo(), m.y.hi());
    match (kind, side) {
        (SolutionKind::Tolerable, Side::D) => at_lo.hi() < y_lo || at_hi.hi() < y_lo,
        (SolutionKind::Tolerable, Side::U) => at_lo.lo() > y_hi || at_hi.lo() > y_hi,
        (SolutionKind::Controllable, Side::D) => at_lo.lo().min(at_hi.lo()) > y_lo,
        (SolutionKind::Controllable, Side::U) => at_lo.hi().max(at_hi.hi()) < y_hi,
        _ => unreachable!("side rules exist only for tolerable and controllable sets"),
    }
}

/// Whether the single line `y = a·x + b` belongs to the solution set of the
/// given kind with respect to one measurement.
///
/// The image over the x-interval is `[min(a·x_lo, a·x_hi) + b, max(..) + b]`
/// evaluated in ordinary floating point. Crude is treated as united.
pub fn point_satisfies(kind: SolutionKind, a: f64, b: f64, m: &Measurement) -> bool {
    let (p, q) = (a * m.x.lo(), a * m.x.hi());
    let lo = p.min(q) + b;
    let hi = p.max(q) + b;
    let (y_lo, y_hi) = (m.y.lo(), m.y.hi());
    match kind {
        SolutionKind::United | SolutionKind::Crude => lo <= y_hi && hi >= y_lo,
        SolutionKind::Tolerable => y_lo <= lo && hi <= y_hi,
        SolutionKind::Controllable => lo <= y_lo && y_hi <= hi,
    }
}

/// Number of measurements violated by the line `(a, b)` under the united
/// condition.
pub fn point_violations(a: f64, b: f64, d: &Dataset) -> usize {
    d.iter().filter(|m| !point_satisfies(SolutionKind::United, a, b, m)).count()
}

/// Number of measurements for which the whole box fails the united
/// condition (either term of the alternative holds).
pub fn count_failures(bx: &ParamBox, d: &Dataset) -> usize {
    d.iter().filter(|m| united_fails(bx, m)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(l: f64, h: f64) -> Interval {
        Interval::new(l, h).unwrap()
    }

    fn meas(x: Interval, y: Interval) -> Measurement {
        Measurement { index: 1, x, y }
    }

    fn bx(al: f64, ah: f64, bl: f64, bh: f64) -> ParamBox {
        ParamBox::new(iv(al, ah), iv(bl, bh))
    }

    #[test]
    fn line_image_examples() {
        let r = line_image(&iv(1.02270, 1.13159), &iv(2.06840, 2.96827), &Interval::point(20.0)).unwrap();
        assert!((r.lo() - 22.5224).abs() < 1e-9 && (r.hi() - 25.60007).abs() < 1e-9);
        assert_eq!(line_image(&Interval::point(1.0), &Interval::point(0.0), &iv(3.0, 4.0)).unwrap(), iv(3.0, 4.0));
        let r = line_image(&iv(1.0227, 1.13159), &iv(2.0684, 2.96827), &Interval::point(0.8)).unwrap();
        assert!((r.lo() - 2.88656).abs() < 1e-9 && (r.hi() - 3.873542).abs() < 1e-9);
        assert_eq!(line_image(&Interval::EMPTY, &iv(0.0, 1.0), &iv(0.0, 1.0)), Err(PredicateError::Empty));
    }

    #[test]
    fn point_membership_examples() {
        let row3 = meas(iv(2.8, 3.0), iv(5.43, 5.87));
        assert!(point_satisfies(SolutionKind::United, 1.08530271, 2.43730211, &row3));
        let m = meas(iv(0.0, 1.0), iv(-5.0, 5.0));
        assert!(point_satisfies(SolutionKind::Tolerable, 1.0, 0.0, &m));
        assert!(!point_satisfies(SolutionKind::Controllable, 1.0, 0.0, &m));
        let thin_y = meas(iv(0.0, 1.0), Interval::point(0.5));
        assert!(point_satisfies(SolutionKind::Controllable, 1.0, 0.0, &thin_y));
    }

    #[test]
    fn united_sides_on_row_ten() {
        let row10 = meas(iv(10.0, 10.2), iv(13.4, 14.0));
        let b = bx(0.0, 0.5, 0.0, 1.0);
        assert!(RuleSet::united(Side::D).rejects(&b, &row10, None).unwrap());
        assert!(!RuleSet::united(Side::U).rejects(&b, &row10, None).unwrap());
        assert!(RuleSet::crude(0).rejects(&b, &row10, None).unwrap());
    }

    #[test]
    fn true_line_never_rejected() {
        // Rectangles around y = 2x + 1.
        let ms: Vec<Measurement> = (0..5)
            .map(|i| {
                let x = i as f64;
                meas(iv(x - 0.1, x + 0.1), iv(2.0 * x + 0.5, 2.0 * x + 1.5))
            })
            .collect();
        let b = bx(2.0, 2.0, 1.0, 1.0);
        let aux = vec![iv(-100.0, 100.0)];
        for m in &ms {
            for side in [Side::D, Side::U] {
                assert!(!RuleSet::united(side).rejects(&b, m, None).unwrap());
                assert!(!RuleSet::tolerable(side, aux.clone()).rejects(&b, m, Some(aux[0])).unwrap());
                let narrow = meas(m.x, iv(m.y.lo() + 0.4, m.y.hi() - 0.4));
                assert!(!RuleSet::controllable(side, aux.clone()).rejects(&b, &narrow, Some(aux[0])).unwrap());
            }
        }
    }

    #[test]
    fn missing_aux_is_an_error() {
        let m = meas(iv(0.0, 1.0), iv(0.0, 1.0));
        let rs = RuleSet::tolerable(Side::D, vec![]);
        assert_eq!(rs.rejects(&bx(0.0, 1.0, 0.0, 1.0), &m, None), Err(PredicateError::MissingAux(SolutionKind::Tolerable)));
        let d = Dataset::from_intervals(vec![(iv(0.0, 1.0), iv(0.0, 1.0)); 2]).unwrap();
        assert!(rs.validate(&d).is_err());
        assert!(RuleSet::tolerable(Side::D, vec![iv(0.0, 1.0); 2]).validate(&d).is_ok());
    }

    #[test]
    fn aux_rule_rejects_disjoint_band() {
        let m = meas(Interval::point(1.0), iv(0.0, 10.0));
        let rs = RuleSet::tolerable(Side::D, vec![iv(0.0, 1.0)]);
        assert!(rs.rejects(&bx(5.0, 6.0, 0.0, 0.0), &m, Some(iv(0.0, 1.0))).unwrap());
    }

    #[test]
    fn controllable_side_rules() {
        let m = meas(iv(0.0, 1.0), iv(0.0, 1.0));
        let aux = Some(iv(-10.0, 10.0));
        // Lines entirely above y_lo at both endpoints cannot cover y.
        let high = bx(0.0, 0.0, 0.5, 0.6);
        assert!(RuleSet::controllable(Side::D, vec![]).rejects(&high, &m, aux).unwrap());
        assert!(RuleSet::controllable(Side::U, vec![]).rejects(&high, &m, aux).unwrap());
        let steep = bx(2.0, 2.0, -0.5, -0.5);
        assert!(!RuleSet::controllable(Side::D, vec![]).rejects(&steep, &m, aux).unwrap());
        assert!(!RuleSet::controllable(Side::U, vec![]).rejects(&steep, &m, aux).unwrap());
    }
}
