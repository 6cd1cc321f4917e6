//! Box slicing engine.
//!
//! A box is shrunk by probing slabs cut off one of its faces: slab widths go
//! 1/2, 1/4, 1/8, ... of the current extent, and the first slab that the rule
//! set rejects is discarded. Cycling over every parameter and both faces
//! until no slab can be removed gives a fixed point ("shave").
//!
//! The two-sided solve shaves the same box twice, once with the `D` rules and
//! once with the `U` rules, and intersects the results. An empty intersection
//! proves the solution set empty, as does a shaved box that its rule set
//! rejects as a whole. A box left unchanged by an outer iteration is the
//! hull. At most three boxes are alive at any time.

use thiserror::Error;

use crate::data::{Dataset, FitReport, FitStatus, Param, ParamBox, SolutionKind};
use crate::interval::Interval;
use crate::predicates::{point_satisfies, point_violations, PredicateError, RuleSet, Side};
use crate::seeding::{self, SeedError, DEFAULT_OMEGA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("need at least 2 measurements, got {0}")]
    TooFew(usize),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error(transparent)]
    Rules(#[from] PredicateError),
    #[error("empty box")]
    EmptyBox,
    #[error("non-finite box {0:?}")]
    Unbounded(ParamBox),
    #[error("invalid options: {0}")]
    Options(String),
}

/// Termination controls for slicing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceOptions {
    /// A face stops being probed once the slab fraction drops to `eps`.
    pub eps: f64,
    /// Cap on outer D/U iterations.
    pub max_outer: usize,
    /// Slabs narrower than this many ULPs of the local endpoint magnitude are
    /// not probed.
    pub abs_floor: f64,
    /// Half-width of the fallback seed box when no measurement pair has
    /// disjoint x-intervals.
    pub omega: f64,
    /// Bisection depth of slab probes in the final tightening pass; 0
    /// skips the pass.
    pub refine_depth: u32,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions { eps: 1e-6, max_outer: 1000, abs_floor: 4.0, omega: DEFAULT_OMEGA, refine_depth: 48 }
    }
}

impl SliceOptions {
    pub fn with_eps(eps: f64) -> Self {
        SliceOptions { eps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(SolveError::Options(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.max_outer < 1 {
            return Err(SolveError::Options("max_outer must be at least 1".into()));
        }
        if self.abs_floor.is_nan() || self.abs_floor < 0.0 {
            return Err(SolveError::Options(format!("abs_floor must be non-negative, got {}", self.abs_floor)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(SolveError::Options(format!("omega must be positive and finite, got {}", self.omega)));
        }
        Ok(())
    }
}

/// Face of a box along one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Left,
    Right,
}

pub(crate) fn ulp(v: f64) -> f64 {
    let v = v.abs();
    v.next_up() - v
}

/// Tries to cut one slab off `face` of `bx` along `param`.
///
/// Returns the (possibly) reduced box and whether a slab was removed.
pub fn slice_side(
    bx: &ParamBox,
    param: Param,
    face: Face,
    rs: &RuleSet,
    d: &Dataset,
    opts: &SliceOptions,
) -> Result<(ParamBox, bool), SolveError> {
    if bx.is_empty() {
        return Err(SolveError::EmptyBox);
    }
    rs.validate(d)?;
    Ok(slice_with(bx, param, face, &|b: &ParamBox| rs.rejects_box(b, d), opts))
}

fn slice_with(bx: &ParamBox, param: Param, face: Face, rejects: &dyn Fn(&ParamBox) -> bool, opts: &SliceOptions) -> (ParamBox, bool) {
    let iv = bx.get(param);
    let (lo, hi) = (iv.lo(), iv.hi());
    let floor = opts.abs_floor * ulp(lo.abs().max(hi.abs()));
    let mut xi: f64 = match face {
        Face::Left => 1.0,
        Face::Right => 0.0,
    };
    loop {
        xi = match face {
            Face::Left => xi / 2.0,
            Face::Right => (1.0 + xi) / 2.0,
        };
        // Convex combination: no overflow for wide boxes, and exact at the
        // endpoints.
        let cut = (lo * (1.0 - xi) + hi * xi).clamp(lo, hi);
        let (slab, rest, slab_width) = match face {
            Face::Left => (Interval::new(lo, cut), Interval::new(cut, hi), cut - lo),
            Face::Right => (Interval::new(cut, hi), Interval::new(lo, cut), hi - cut),
        };
        if cut <= lo || cut >= hi || slab_width <= floor {
            return (*bx, false);
        }
        let (slab, rest) = (slab.expect("ordered cut"), rest.expect("ordered cut"));
        if rejects(&bx.with(param, slab)) {
            return (bx.with(param, rest), true);
        }
        let fraction = match face {
            Face::Left => xi,
            Face::Right => 1.0 - xi,
        };
        if fraction <= opts.eps {
            return (*bx, false);
        }
    }
}

/// Slices every parameter from both faces, repeating full cycles until one
/// removes nothing. The result is a subset of the input that keeps every
/// point the rule set cannot reject.
pub fn shave(bx: &ParamBox, rs: &RuleSet, d: &Dataset, opts: &SliceOptions) -> Result<ParamBox, SolveError> {
    if bx.is_empty() {
        return Err(SolveError::EmptyBox);
    }
    rs.validate(d)?;
    Ok(shave_unchecked(bx, rs, d, opts))
}

fn shave_unchecked(bx: &ParamBox, rs: &RuleSet, d: &Dataset, opts: &SliceOptions) -> ParamBox {
    shave_with(bx, &|b: &ParamBox| rs.rejects_box(b, d), opts)
}

fn shave_with(bx: &ParamBox, rejects: &dyn Fn(&ParamBox) -> bool, opts: &SliceOptions) -> ParamBox {
    let mut current = *bx;
    loop {
        let mut any = false;
        for param in Param::ALL {
            for face in [Face::Left, Face::Right] {
                let (next, ok) = slice_with(&current, param, face, rejects, opts);
                current = next;
                any |= ok;
            }
        }
        if !any {
            return current;
        }
    }
}

fn check_finite(bx: &ParamBox) -> Result<(), SolveError> {
    let finite = |iv: Interval| iv.lo().is_finite() && iv.hi().is_finite();
    if bx.is_empty() {
        return Err(SolveError::EmptyBox);
    }
    if finite(bx.a) && finite(bx.b) {
        Ok(())
    } else {
        Err(SolveError::Unbounded(*bx))
    }
}

struct Outcome {
    hull: ParamBox,
    status: FitStatus,
    iterations: usize,
    idempotent: bool,
}

/// D/U fixed-point iteration from `seed`, followed by the tightening pass.
fn two_sided(seed: ParamBox, rs_d: &RuleSet, rs_u: &RuleSet, d: &Dataset, opts: &SliceOptions) -> Outcome {
    let empty = |it| Outcome { hull: ParamBox::EMPTY, status: FitStatus::ProvenEmpty, iterations: it, idempotent: true };
    let mut v = seed;
    let mut fixed = None;
    for it in 1..=opts.max_outer {
        let vd = shave_unchecked(&v, rs_d, d, opts);
        let vu = shave_unchecked(&v, rs_u, d, opts);
        let next = vd.intersect(&vu);
        // Slicing never removes a whole box, so a box rejected outright is
        // caught here.
        if next.is_empty() || rs_d.rejects_box(&vd, d) || rs_u.rejects_box(&vu, d) {
            return empty(it);
        }
        if next == v {
            fixed = Some(it);
            break;
        }
        v = next;
    }
    let iterations = fixed.unwrap_or(opts.max_outer);
    match refine(&v, &[rs_d, rs_u], d, opts) {
        Some(hull) => Outcome { hull, status: FitStatus::Solved, iterations, idempotent: fixed.is_some() },
        None => empty(iterations),
    }
}

/// Shaves `v` once more with both rule sets at once, rejecting a slab when
/// every piece of a bisection of it (up to `refine_depth` levels) is
/// rejected by one of them. `None` if the whole box goes.
fn refine(v: &ParamBox, rules: &[&RuleSet], d: &Dataset, opts: &SliceOptions) -> Option<ParamBox> {
    if opts.refine_depth == 0 {
        return Some(*v);
    }
    let scale = (v.a.hi() - v.a.lo(), v.b.hi() - v.b.lo());
    let rejects = |b: &ParamBox| split_rejects(b, rules, d, opts.refine_depth, scale);
    if rejects(v) {
        return None;
    }
    let out = shave_with(v, &rejects, opts);
    (!rejects(&out)).then_some(out)
}

fn split_rejects(b: &ParamBox, rules: &[&RuleSet], d: &Dataset, depth: u32, scale: (f64, f64)) -> bool {
    if rules.iter().any(|r| r.rejects_box(b, d)) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    let rel = |w: f64, s: f64| if s > 0.0 { w / s } else { 0.0 };
    let order =
        if rel(b.a.hi() - b.a.lo(), scale.0) >= rel(b.b.hi() - b.b.lo(), scale.1) { [Param::A, Param::B] } else { [Param::B, Param::A] };
    for param in order {
        let iv = b.get(param);
        let (lo, hi) = (iv.lo(), iv.hi());
        let mid = lo * 0.5 + hi * 0.5;
        if mid > lo && mid < hi {
            let left = b.with(param, Interval::new(lo, mid).expect("ordered"));
            let right = b.with(param, Interval::new(mid, hi).expect("ordered"));
            return split_rejects(&left, rules, d, depth - 1, scale) && split_rejects(&right, rules, d, depth - 1, scale);
        }
    }
    false
}

fn report(kind: SolutionKind, k_allowed: usize, opts: &SliceOptions, o: Outcome, d: &Dataset) -> FitReport {
    let witness = match o.status {
        FitStatus::Solved => find_witness(&o.hull, |a, b| match kind {
            SolutionKind::Crude => point_violations(a, b, d) <= k_allowed,
            _ => d.iter().all(|m| point_satisfies(kind, a, b, m)),
        }),
        _ => None,
    };
    FitReport {
        kind,
        hull: o.hull,
        status: o.status,
        outer_iterations: o.iterations,
        eps_used: opts.eps,
        k_allowed,
        idempotent: o.idempotent,
        witness,
    }
}

/// Hull of the united, tolerable or controllable solution set.
///
/// `Crude` is solved with zero allowed violations; see [`solve_crude`].
pub fn solve(kind: SolutionKind, d: &Dataset, opts: &SliceOptions) -> Result<FitReport, SolveError> {
    opts.validate()?;
    if d.len() < 2 {
        return Err(SolveError::TooFew(d.len()));
    }
    match kind {
        SolutionKind::United | SolutionKind::Crude => {
            let seed = seeding::initial_union_box(d, opts.omega);
            check_finite(&seed)?;
            let o = two_sided(seed, &RuleSet::united(Side::D), &RuleSet::united(Side::U), d, opts);
            Ok(report(kind, 0, opts, o, d))
        }
        SolutionKind::Tolerable | SolutionKind::Controllable => {
            let seeds = seeding::pair_seeds(d);
            if seeds.pairs == 0 {
                return Err(SeedError::NoValidPair.into());
            }
            if seeds.intersection.is_empty() {
                let o = Outcome { hull: ParamBox::EMPTY, status: FitStatus::SeedEmpty, iterations: 0, idempotent: true };
                return Ok(report(kind, 0, opts, o, d));
            }
            check_finite(&seeds.union)?;
            // Exact x makes tolerable membership coincide with united
            // membership, exact y does the same for controllable.
            let degenerate = match kind {
                SolutionKind::Tolerable => d.iter().all(|m| m.x.is_thin()),
                _ => d.iter().all(|m| m.y.is_thin()),
            };
            if degenerate {
                let o = two_sided(seeds.union, &RuleSet::united(Side::D), &RuleSet::united(Side::U), d, opts);
                return Ok(report(kind, 0, opts, o, d));
            }
            let aux = seeding::auxiliary_images(&seeds.intersection, d)?;
            let (rs_d, rs_u) = if kind == SolutionKind::Tolerable {
                (RuleSet::tolerable(Side::D, aux.clone()), RuleSet::tolerable(Side::U, aux))
            } else {
                (RuleSet::controllable(Side::D, aux.clone()), RuleSet::controllable(Side::U, aux))
            };
            let o = two_sided(seeds.union, &rs_d, &rs_u, d, opts);
            Ok(report(kind, 0, opts, o, d))
        }
    }
}

/// Grid resolution of the witness search run after a solve.
const WITNESS_GRID: usize = 64;
/// Points probed along each face in the witness search.
const WITNESS_FACE: usize = 256;

/// Hull of the crude solutions allowing up to `k` violated measurements.
///
/// `k = 0` is the united solve. For `k > 0` a single rule set is shaved to a
/// fixed point. Emptiness is then proven if the remaining box as a whole
/// fails more than `k` measurements; otherwise the box is searched for a
/// witness line, and if none is found the level is reported empty. That last
/// verdict is a heuristic, not a proof.
pub fn solve_crude(d: &Dataset, k: usize, opts: &SliceOptions) -> Result<FitReport, SolveError> {
    if k == 0 {
        let mut r = solve(SolutionKind::United, d, opts)?;
        r.kind = SolutionKind::Crude;
        return Ok(r);
    }
    opts.validate()?;
    if d.len() < 2 {
        return Err(SolveError::TooFew(d.len()));
    }
    let seed = seeding::initial_union_box(d, opts.omega);
    check_finite(&seed)?;
    let rs = RuleSet::crude(k);
    let shaved = shave_unchecked(&seed, &rs, d, opts);
    let proven_empty = rs.rejects_box(&shaved, d);
    let witnessed = !proven_empty && find_witness(&shaved, |a, b| point_violations(a, b, d) <= k).is_some();
    let outcome = if witnessed {
        Outcome { hull: shaved, status: FitStatus::Solved, iterations: 1, idempotent: true }
    } else {
        Outcome { hull: ParamBox::EMPTY, status: FitStatus::ProvenEmpty, iterations: 1, idempotent: true }
    };
    Ok(report(SolutionKind::Crude, k, opts, outcome, d))
}

/// Looks for a point of `bx` accepted by `ok`: cell centres of a grid, then
/// points along each face.
pub fn find_witness(bx: &ParamBox, ok: impl Fn(f64, f64) -> bool) -> Option<(f64, f64)> {
    if bx.is_empty() {
        return None;
    }
    let (al, ah, bl, bh) = (bx.a.lo(), bx.a.hi(), bx.b.lo(), bx.b.hi());
    let at = |lo: f64, hi: f64, t: f64| lo * (1.0 - t) + hi * t;
    let g = WITNESS_GRID as f64;
    for i in 0..WITNESS_GRID {
        for j in 0..WITNESS_GRID {
            let (a, b) = (at(al, ah, (i as f64 + 0.5) / g), at(bl, bh, (j as f64 + 0.5) / g));
            if ok(a, b) {
                return Some((a, b));
            }
        }
    }
    let f = WITNESS_FACE as f64;
    (0..=WITNESS_FACE).find_map(|i| {
        let t = i as f64 / f;
        let (a, b) = (at(al, ah, t), at(bl, bh, t));
        [(al, b), (ah, b), (a, bl), (a, bh)].into_iter().find(|&(p, q)| ok(p, q))
    })
}
