//! Analytic two-point solutions and the initial search boxes.

use thiserror::Error;

use crate::data::{Dataset, Measurement, ParamBox};
use crate::interval::Interval;
use crate::predicates::line_image;

/// Default half-width of the fallback search box.
pub const DEFAULT_OMEGA: f64 = 1e40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeedError {
    #[error("x-intervals of measurements {0} and {1} overlap")]
    OverlappingX(usize, usize),
    #[error("indeterminate seed: no pair of measurements has disjoint x-intervals")]
    NoValidPair,
    #[error("empty parameter box")]
    EmptyBox,
}

/// Two-point analytic box: `a = (y2 - y1)/(x2 - x1)`,
/// `b = (y1 - a·x1) ∩ (y2 - a·x2)`.
///
/// The slope enclosure is sharp; the intercept may be overestimated.
pub fn two_point_fit(m1: &Measurement, m2: &Measurement) -> Result<ParamBox, SeedError> {
    if !m1.x.disjoint(&m2.x) {
        return Err(SeedError::OverlappingX(m1.index, m2.index));
    }
    let dy = m2.y - m1.y;
    let dx = m2.x - m1.x;
    let a = dy.checked_div(&dx).map_err(|_| SeedError::OverlappingX(m1.index, m2.index))?;
    let b1 = m1.y - a * m1.x;
    let b2 = m2.y - a * m2.x;
    Ok(ParamBox::new(a, b1.intersect(&b2)))
}

/// Hull and intersection of the two-point boxes over every pair with
/// disjoint x-intervals, computed in one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSeeds {
    pub union: ParamBox,
    pub intersection: ParamBox,
    pub pairs: usize,
}

pub fn pair_seeds(d: &Dataset) -> PairSeeds {
    let ms = d.measurements();
    let mut union = ParamBox::EMPTY;
    let mut intersection: Option<ParamBox> = None;
    let mut pairs = 0;
    for (j, mj) in ms.iter().enumerate() {
        for mk in &ms[j + 1..] {
            let Ok(fit) = two_point_fit(mj, mk) else { continue };
            pairs += 1;
            union = union.hull(&fit);
            intersection = Some(match intersection {
                None => fit,
                Some(acc) => acc.intersect(&fit),
            });
        }
    }
    PairSeeds { union, intersection: intersection.unwrap_or(ParamBox::EMPTY), pairs }
}

/// Initial box for united (and crude) searches: hull of all two-point boxes,
/// or `([-ω, ω], [-ω, ω])` when no pair has disjoint x.
pub fn initial_union_box(d: &Dataset, omega: f64) -> ParamBox {
    let seeds = pair_seeds(d);
    if seeds.pairs == 0 {
        ParamBox::symmetric(omega)
    } else {
        seeds.union
    }
}

/// Componentwise intersection of all two-point boxes. Its emptiness proves
/// that no tolerable or controllable solution exists.
pub fn pairwise_intersection_box(d: &Dataset) -> Result<ParamBox, SeedError> {
    let seeds = pair_seeds(d);
    if seeds.pairs == 0 {
        return Err(SeedError::NoValidPair);
    }
    Ok(seeds.intersection)
}

/// `y'_k = a·x_k + b` for every measurement, with `(a, b) = v`.
pub fn auxiliary_images(v: &ParamBox, d: &Dataset) -> Result<Vec<Interval>, SeedError> {
    if v.is_empty() {
        return Err(SeedError::EmptyBox);
    }
    d.iter().map(|m| line_image(&v.a, &v.b, &m.x).map_err(|_| SeedError::EmptyBox)).collect()
}
