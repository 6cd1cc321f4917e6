mod common;

use boxslice::data::{CsvStyle, Dataset, Measurement, ParamBox, SolutionKind, SortDirection};
use boxslice::interval::Interval;
use boxslice::oracle;
use boxslice::predicates::{count_failures, point_satisfies, RuleSet, Side};
use boxslice::seeding::{initial_union_box, pair_seeds, pairwise_intersection_box, two_point_fit, DEFAULT_OMEGA};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sub_interval(iv: Interval, s: f64, t: f64) -> Interval {
    let at = |u: f64| (iv.lo() * (1.0 - u) + iv.hi() * u).clamp(iv.lo(), iv.hi());
    Interval::new(at(s.min(t)), at(s.max(t))).unwrap()
}

fn rows() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((-50f64..50.0, 0f64..2.0, -50f64..50.0, 0f64..2.0), 2..8)
}

fn random_box(rng: &mut impl Rng) -> ParamBox {
    let c = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let w = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
    ParamBox::new(Interval::new(c.0, c.0 + w.0).unwrap(), Interval::new(c.1, c.1 + w.1).unwrap())
}

fn all_rule_sets(n: usize, rng: &mut impl Rng) -> Vec<RuleSet> {
    let aux: Vec<Interval> = (0..n)
        .map(|_| {
            let c = rng.gen_range(-5.0..5.0);
            Interval::new(c, c + rng.gen_range(0.0..3.0)).unwrap()
        })
        .collect();
    let mut v = Vec::new();
    for side in [Side::D, Side::U] {
        v.push(RuleSet::united(side));
        v.push(RuleSet::tolerable(side, aux.clone()));
        v.push(RuleSet::controllable(side, aux.clone()));
    }
    v.push(RuleSet::crude(0));
    v.push(RuleSet::crude(1));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_csv_round_trip(rows in rows()) {
        let d = Dataset::from_center_radius(&rows).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::load_csv(buf.as_slice(), CsvStyle::Bounds).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn center_radius_encloses_endpoints(rows in rows()) {
        let d = Dataset::from_center_radius(&rows).unwrap();
        for (m, &(xc, xr, yc, yr)) in d.iter().zip(&rows) {
            prop_assert!(m.x.lo() <= xc - xr && m.x.hi() >= xc + xr);
            prop_assert!(m.y.lo() <= yc - yr && m.y.hi() >= yc + yr);
        }
    }

    #[test]
    fn sorting_is_idempotent(rows in rows()) {
        let d = Dataset::from_center_radius(&rows).unwrap();
        for dir in [SortDirection::Ascending, SortDirection::Descending] {
            let once = d.sort_by_x(dir);
            prop_assert_eq!(once.sort_by_x(dir), once.clone());
        }
    }

    #[test]
    fn monotone_probe(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = common::random_five_points(&mut rng);
        for rs in all_rule_sets(d.len(), &mut rng) {
            for _ in 0..50 {
                let w = random_box(&mut rng);
                let v = ParamBox::new(sub_interval(w.a, rng.gen(), rng.gen()), sub_interval(w.b, rng.gen(), rng.gen()));
                if rs.rejects_box(&w, &d) {
                    prop_assert!(rs.rejects_box(&v, &d), "{:?} rejects {:?} but not {:?}", rs.kind(), w, v);
                }
            }
        }
    }

    #[test]
    fn united_rejection_is_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = common::random_five_points(&mut rng);
        for side in [Side::D, Side::U] {
            let rs = RuleSet::united(side);
            for _ in 0..20 {
                let bx = random_box(&mut rng);
                for m in d.iter() {
                    if rs.rejects(&bx, m, None).unwrap() {
                        for _ in 0..1000 {
                            let a = sub_interval(bx.a, rng.gen(), rng.gen()).lo();
                            let b = sub_interval(bx.b, rng.gen(), rng.gen()).lo();
                            prop_assert!(!point_satisfies(SolutionKind::United, a, b, m));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn thin_coordinate_point_equivalences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let thin_x = common::consistent_data(&mut rng, 5, 1.5, -0.5, true, false);
        let thin_y = common::consistent_data(&mut rng, 5, 1.5, -0.5, false, true);
        for _ in 0..500 {
            let (a, b) = (rng.gen_range(0.0..3.0), rng.gen_range(-3.0..2.0));
            for m in thin_x.iter() {
                prop_assert_eq!(point_satisfies(SolutionKind::Tolerable, a, b, m), point_satisfies(SolutionKind::United, a, b, m));
            }
            for m in thin_y.iter() {
                prop_assert_eq!(point_satisfies(SolutionKind::Controllable, a, b, m), point_satisfies(SolutionKind::United, a, b, m));
            }
        }
    }

    #[test]
    fn two_point_slope_contains_member_slopes(x1 in -10f64..10.0, gap in 0.1f64..5.0, r in prop::array::uniform4(0f64..1.0), seed in any::<u64>()) {
        let m1 = Measurement { index: 1, x: Interval::new(x1, x1 + r[0]).unwrap(), y: Interval::new(0.0, r[1]).unwrap() };
        let x2 = x1 + r[0] + gap;
        let m2 = Measurement { index: 2, x: Interval::new(x2, x2 + r[2]).unwrap(), y: Interval::new(1.0, 1.0 + r[3]).unwrap() };
        let fit = two_point_fit(&m1, &m2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let p = |iv: Interval, rng: &mut ChaCha8Rng| sub_interval(iv, rng.gen(), rng.gen()).lo();
            let (px1, py1, px2, py2) = (p(m1.x, &mut rng), p(m1.y, &mut rng), p(m2.x, &mut rng), p(m2.y, &mut rng));
            let a = (py2 - py1) / (px2 - px1);
            prop_assert!(fit.a.contains(a), "{a} not in {:?}", fit.a);
            prop_assert!(fit.b.contains(py1 - a * px1) || (py1 - a * px1 - fit.b.lo()).abs() < 1e-12 || (py1 - a * px1 - fit.b.hi()).abs() < 1e-12);
        }
    }

    #[test]
    fn intersection_seed_inside_union_seed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = common::random_five_points(&mut rng);
        let s = pair_seeds(&d);
        if !s.intersection.is_empty() {
            prop_assert!(s.intersection.subset(&s.union));
        }
    }
}

#[test]
fn union_seed_never_excludes_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let d = common::random_five_points(&mut rng);
        let seed = initial_union_box(&d, DEFAULT_OMEGA);
        let wide = |iv: Interval| {
            let w = iv.hi() - iv.lo();
            Interval::new(iv.lo() - w, iv.hi() + w).unwrap()
        };
        let region = ParamBox::new(wide(seed.a), wide(seed.b));
        let scan = oracle::grid_hull(SolutionKind::United, &d, &region, 150).unwrap();
        assert!(scan.hull.subset(&seed), "{:?} outside {:?}", scan.hull, seed);
        if let Some(e) = common::exact_united_hull(&d) {
            assert!(seed.a.lo() <= e[0] && e[1] <= seed.a.hi() && seed.b.lo() <= e[2] && e[3] <= seed.b.hi());
        }
    }
}

#[test]
fn table1_seeds() {
    let d = common::table1();
    let seed = initial_union_box(&d, DEFAULT_OMEGA);
    assert!(common::reference_hull().subset(&seed));
    let inter = pairwise_intersection_box(&d).unwrap();
    assert!(!inter.is_empty() && inter.subset(&seed));
    let aux = boxslice::seeding::auxiliary_images(&inter, &d).unwrap();
    assert!(!aux[0].disjoint(&d.measurements()[0].y));
}

#[test]
fn table1_failure_counts() {
    let d = common::table1();
    assert_eq!(count_failures(&common::reference_hull(), &d), 0);
    let zero = ParamBox::new(Interval::point(0.0), Interval::point(0.0));
    assert_eq!(count_failures(&zero, &d), 10);
}

#[test]
fn table1_row3_accepts_lsq_line() {
    let d = common::table1();
    let (a, b, _, _) = common::LSQ;
    assert!(point_satisfies(SolutionKind::United, a, b, &d.measurements()[2]));
}

#[test]
fn table1_is_already_ascending() {
    let d = common::table1();
    assert_eq!(d.sort_by_x(SortDirection::Ascending), d);
}
