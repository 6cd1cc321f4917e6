//! Brute-force grid scans of parameter space, for checking the slicer.

use thiserror::Error;

use crate::data::{Dataset, ParamBox, SolutionKind};
use crate::interval::Interval;
use crate::predicates::{point_satisfies, point_violations};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("scan box must be non-empty and finite")]
    Box,
}

/// Result of a scan: hull of the accepted cell centres and their count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScan {
    pub hull: ParamBox,
    pub accepted: usize,
    /// Cell widths along `a` and `b`.
    pub step: (f64, f64),
}

fn scan(bx: &ParamBox, resolution: usize, accept: impl Fn(f64, f64) -> bool) -> Result<GridScan, OracleError> {
    if resolution < 2 {
        return Err(OracleError::Resolution(resolution));
    }
    if bx.is_empty() || ![bx.a.lo(), bx.a.hi(), bx.b.lo(), bx.b.hi()].iter().all(|v| v.is_finite()) {
        return Err(OracleError::Box);
    }
    let r = resolution as f64;
    let centre = |iv: Interval, i: usize| {
        let t = (i as f64 + 0.5) / r;
        iv.lo() * (1.0 - t) + iv.hi() * t
    };
    let mut a_rng: Option<(f64, f64)> = None;
    let mut b_rng: Option<(f64, f64)> = None;
    let mut accepted = 0;
    let widen = |acc: Option<(f64, f64)>, v: f64| Some(acc.map_or((v, v), |(l, h)| (l.min(v), h.max(v))));
    for i in 0..resolution {
        let a = centre(bx.a, i);
        for j in 0..resolution {
            let b = centre(bx.b, j);
            if accept(a, b) {
                accepted += 1;
                a_rng = widen(a_rng, a);
                b_rng = widen(b_rng, b);
            }
        }
    }
    let hull = match (a_rng, b_rng) {
        (Some((al, ah)), Some((bl, bh))) => ParamBox::new(Interval::new(al, ah).unwrap(), Interval::new(bl, bh).unwrap()),
        _ => ParamBox::EMPTY,
    };
    let step = ((bx.a.hi() - bx.a.lo()) / r, (bx.b.hi() - bx.b.lo()) / r);
    Ok(GridScan { hull, accepted, step })
}

/// Scans a `resolution × resolution` grid of cell centres over `bx`,
/// keeping the points whose line satisfies every measurement under `kind`.
/// `Crude` is scanned as united.
pub fn grid_hull(kind: SolutionKind, d: &Dataset, bx: &ParamBox, resolution: usize) -> Result<GridScan, OracleError> {
    scan(bx, resolution, |a, b| d.iter().all(|m| point_satisfies(kind, a, b, m)))
}

/// Like [`grid_hull`] but accepts lines violating at most `k` measurements
/// under the united condition.
pub fn crude_grid(d: &Dataset, bx: &ParamBox, resolution: usize, k: usize) -> Result<GridScan, OracleError> {
    scan(bx, resolution, |a, b| point_violations(a, b, d) <= k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(al: f64, ah: f64, bl: f64, bh: f64) -> ParamBox {
        ParamBox::new(Interval::new(al, ah).unwrap(), Interval::new(bl, bh).unwrap())
    }

    fn tiny_line() -> Dataset {
        Dataset::from_center_radius(&[(0.0, 0.0, 1.0, 0.01), (1.0, 0.0, 3.0, 0.01), (2.0, 0.0, 5.0, 0.01)]).unwrap()
    }

    #[test]
    fn everything_passes_with_k_equal_n() {
        let d = tiny_line();
        let s = crude_grid(&d, &bx(-10.0, 10.0, -10.0, 10.0), 20, 3).unwrap();
        assert_eq!(s.accepted, 400);
        assert_eq!(s.hull, bx(-9.5, 9.5, -9.5, 9.5));
    }

    #[test]
    fn crude_zero_is_united() {
        let d = tiny_line();
        let b = bx(1.0, 3.0, 0.0, 2.0);
        assert_eq!(crude_grid(&d, &b, 100, 0).unwrap(), grid_hull(SolutionKind::United, &d, &b, 100).unwrap());
    }

    #[test]
    fn true_line_cell_is_accepted() {
        // Cell centres land on (2, 1) exactly.
        let d = tiny_line();
        for kind in [SolutionKind::United, SolutionKind::Tolerable] {
            let s = grid_hull(kind, &d, &bx(1.5, 2.5, 0.5, 1.5), 5).unwrap();
            assert!(s.hull.contains(2.0, 1.0), "{kind:?}");
        }
    }

    #[test]
    fn thin_x_tolerable_matches_united() {
        let d = Dataset::from_center_radius(&[(0.0, 0.0, 1.0, 0.5), (1.0, 0.0, 3.2, 0.4), (2.0, 0.0, 4.9, 0.6)]).unwrap();
        let b = bx(0.0, 4.0, -1.0, 3.0);
        assert_eq!(grid_hull(SolutionKind::Tolerable, &d, &b, 200).unwrap(), grid_hull(SolutionKind::United, &d, &b, 200).unwrap());
    }

    #[test]
    fn bad_arguments() {
        let d = tiny_line();
        assert_eq!(grid_hull(SolutionKind::United, &d, &bx(0.0, 1.0, 0.0, 1.0), 1), Err(OracleError::Resolution(1)));
        assert_eq!(grid_hull(SolutionKind::United, &d, &ParamBox::EMPTY, 10), Err(OracleError::Box));
    }
}
