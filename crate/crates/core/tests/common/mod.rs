#![allow(dead_code)]

use std::fs::File;
use std::path::PathBuf;

use boxslice::data::{CsvStyle, Dataset, ParamBox};
use boxslice::interval::Interval;
use rand::Rng;

pub const REFERENCE_A: (f64, f64) = (1.02270, 1.13159);
pub const REFERENCE_B: (f64, f64) = (2.06840, 2.96827);
pub const LSQ: (f64, f64, f64, f64) = (1.08530271, 2.43730211, 0.0136506381, 0.0823259652);

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str, style: CsvStyle) -> Dataset {
    Dataset::load_csv(File::open(fixture_path(name)).unwrap(), style).unwrap()
}

pub fn table1() -> Dataset {
    fixture("table1.csv", CsvStyle::CenterRadius)
}

pub fn reference_hull() -> ParamBox {
    ParamBox::new(Interval::new(REFERENCE_A.0, REFERENCE_A.1).unwrap(), Interval::new(REFERENCE_B.0, REFERENCE_B.1).unwrap())
}

/// Exact hull of the united solution set by vertex enumeration.
///
/// For a fixed sign of `a` every measurement contributes two half-planes
/// `a·x_lo + b ≤ y_hi`, `a·x_hi + b ≥ y_lo` (mirrored for `a ≤ 0`), so the
/// set is the union of two convex polygons. Returns `[a_lo, a_hi, b_lo, b_hi]`
/// or `None` if both polygons are empty. Assumes a bounded set.
pub fn exact_united_hull(d: &Dataset) -> Option<[f64; 4]> {
    let mut best: Option<[f64; 4]> = None;
    for sign in [1.0f64, -1.0] {
        // p·a + q·b ≤ r
        let mut hp: Vec<(f64, f64, f64)> = vec![(-sign, 0.0, 0.0)];
        for m in d.iter() {
            let (xl, xh, yl, yh) = (m.x.lo(), m.x.hi(), m.y.lo(), m.y.hi());
            if sign > 0.0 {
                hp.push((xl, 1.0, yh));
                hp.push((-xh, -1.0, -yl));
            } else {
                hp.push((xh, 1.0, yh));
                hp.push((-xl, -1.0, -yl));
            }
        }
        for i in 0..hp.len() {
            for j in i + 1..hp.len() {
                let (p1, q1, r1) = hp[i];
                let (p2, q2, r2) = hp[j];
                let det = p1 * q2 - p2 * q1;
                if det.abs() < 1e-14 {
                    continue;
                }
                let a = (r1 * q2 - r2 * q1) / det;
                let b = (p1 * r2 - p2 * r1) / det;
                let tol = 1e-9 * (1.0 + a.abs() + b.abs());
                if hp.iter().all(|&(p, q, r)| p * a + q * b <= r + tol) {
                    best = Some(match best {
                        None => [a, a, b, b],
                        Some(v) => [v[0].min(a), v[1].max(a), v[2].min(b), v[3].max(b)],
                    });
                }
            }
        }
    }
    best
}

/// Five measurements scattered around a random line, boxes wide enough for
/// the united set to be non-empty as a rule.
pub fn random_five_points(rng: &mut impl Rng) -> Dataset {
    let a0 = rng.gen_range(-2.0..2.0);
    let b0 = rng.gen_range(-2.0..2.0);
    let rows: Vec<_> = (0..5)
        .map(|i| {
            let x = i as f64 + rng.gen_range(-0.2..0.2);
            let r = rng.gen_range(0.2..0.8);
            (x, rng.gen_range(0.05..0.3), a0 * x + b0 + rng.gen_range(-0.5..0.5) * r, r)
        })
        .collect();
    Dataset::from_center_radius(&rows).unwrap()
}

/// Measurements whose boxes all contain the line `y = a·x + b`.
pub fn consistent_data(rng: &mut impl Rng, n: usize, a: f64, b: f64, thin_x: bool, thin_y: bool) -> Dataset {
    let rows: Vec<_> = (0..n)
        .map(|i| {
            let xc = i as f64 * 1.5 + rng.gen_range(0.0..0.5);
            let xr = if thin_x { 0.0 } else { rng.gen_range(0.05..0.4) };
            let yr = if thin_y { 0.0 } else { rng.gen_range(0.1..0.6) };
            let yc = if thin_y { a * xc + b + rng.gen_range(-1.0..1.0) * a.abs() * xr } else { a * xc + b + rng.gen_range(-0.5..0.5) * yr };
            (xc, xr, yc, yr)
        })
        .collect();
    Dataset::from_center_radius(&rows).unwrap()
}

pub fn ulps_apart(x: f64, y: f64) -> u64 {
    let key = |v: f64| {
        let bits = v.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(x).abs_diff(key(y))
}
