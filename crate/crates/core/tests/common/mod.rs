//! Randomized property suites shared by the `properties` and `acceptance` targets.
#![allow(dead_code)]

use std::collections::BTreeSet;

use diffelim::ags::{build_ags, tau_of};
use diffelim::analysis::{build_ps, is_super_essential, jacobi_number, jacobi_numbers, order_matrix, super_essential_subsystem, support_gaps};
use diffelim::det::{det_bareiss, det_minor_expansion, determinant, DetMethod, PolyMatrix};
use diffelim::frontend::{parse_system, print_system};
use diffelim::matching::has_perfect_matching;
use diffelim::poly::{derive, diff_support, exact_divide, rat, DerivationRules, Mono, MultiPoly, ParamRule, Var};
use diffelim::polytope::{convex_hull, in_hull, lattice_index, lattice_rank, minkowski_sum, mixed_volume, mixed_volumes_minus, volume, Point};
use diffelim::poly::deflate_linear;
use diffelim::specialize::{algorithm_specialize, coefficient_order, diff_generic_zero_eval};
use diffelim::sylvester::build_sylvester;
use diffelim::system::DiffSystem;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const SEED: u64 = 0x5eed_d1ff;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, max_global_rejects: 20_000, ..Config::default() })
}

fn finish(r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Every suite with its name, in the order the acceptance target runs them.
pub fn suites() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("derivation laws", derivation_laws),
        ("support propagation", support_propagation),
        ("division and deflation", division_and_deflation),
        ("matching and jacobi numbers", matching_and_jacobi),
        ("interval filling", interval_filling),
        ("bareiss equals cofactor", bareiss_equals_cofactor),
        ("bernstein scaling", bernstein_scaling),
        ("hull and volume oracles", hull_and_volume),
        ("translation invariance", translation_invariance),
        ("nonzero specialization", nonzero_specialization),
    ]
}

// ---- polynomials ----

fn rules() -> DerivationRules {
    let mut r = DerivationRules::new();
    r.set("t", ParamRule::Free).set("a", ParamRule::Constant);
    r.set("s", ParamRule::Expr(&MultiPoly::var_pow(Var::diff_param("t", 0), 2) + &MultiPoly::one()));
    r
}

fn pool() -> Vec<Var> {
    vec![
        Var::diff_ind(1, 0),
        Var::diff_ind(1, 1),
        Var::diff_ind(2, 0),
        Var::diff_ind(2, 2),
        Var::diff_param("t", 0),
        Var::diff_param("t", 1),
        Var::diff_param("a", 0),
        Var::diff_param("s", 0),
        Var::diff_coeff(1, 0, 0),
    ]
}

/// Random Laurent polynomial over `vars` with small integer coefficients.
fn poly_over(vars: Vec<Var>, lo: i32, hi: i32, max_terms: usize) -> impl Strategy<Value = MultiPoly> {
    let n = vars.len();
    prop::collection::vec((-3i64..=3, prop::collection::vec(lo..=hi, n)), 1..=max_terms).prop_map(move |terms| {
        MultiPoly::from_terms(terms.into_iter().map(|(c, e)| (Mono::from_pairs(vars.iter().copied().zip(e)), rat(c))))
    })
}

pub fn derivation_laws() -> Result<(), String> {
    let strat = (poly_over(pool(), -2, 3, 4), poly_over(pool(), -2, 3, 4));
    finish(runner(256).run(&strat, |(p, q)| {
        let r = rules();
        let d = |x: &MultiPoly| derive(x, &r).unwrap();
        prop_assert_eq!(d(&(&p * &q)), &(&d(&p) * &q) + &(&p * &d(&q)));
        prop_assert_eq!(d(&(&p + &q)), &d(&p) + &d(&q));
        prop_assert!(d(&MultiPoly::var(Var::diff_param("a", 0))).is_zero());
        Ok(())
    }))
}

pub fn support_propagation() -> Result<(), String> {
    let vars = vec![Var::diff_ind(1, 0), Var::diff_ind(1, 1), Var::diff_ind(1, 3), Var::diff_param("t", 0), Var::diff_ind(2, 1)];
    finish(runner(256).run(&poly_over(vars, -2, 3, 5), |f| {
        let df = derive(&f, &rules()).unwrap();
        let s = diff_support(&f);
        let ds = diff_support(&df);
        for &(j, k) in &s {
            if !s.contains(&(j, k + 1)) {
                prop_assert!(ds.contains(&(j, k + 1)), "u{}^({}) missing from the derivative of {}", j, k + 1, f);
            }
        }
        Ok(())
    }))
}

pub fn division_and_deflation() -> Result<(), String> {
    let c = Var::gen_coeff(1, 0);
    let others = vec![Var::gen_coeff(2, 0), Var::gen_coeff(2, 1), Var::alg(1)];
    let with_c = {
        let mut v = others.clone();
        v.push(c);
        v
    };
    let strat = (poly_over(with_c.clone(), 0, 2, 4), poly_over(with_c, 0, 2, 3), poly_over(others, 0, 2, 3), 0u32..3);
    finish(runner(128).run(&strat, |(a, b, v, s)| {
        if !b.is_zero() {
            prop_assert_eq!(exact_divide(&(&a * &b), &b).unwrap(), a.clone());
        }
        if a.is_zero() {
            return Ok(());
        }
        let lin = &MultiPoly::var(c) - &v;
        let h = &lin.pow(s) * &a;
        let (k, hbar) = deflate_linear(&h, c, &v).unwrap();
        prop_assert!(k >= s);
        prop_assert_eq!(&lin.pow(k) * &hbar, h);
        Ok(())
    }))
}

// ---- order matrices ----

fn brute_jacobi(o: &[Vec<Option<i64>>]) -> Option<i64> {
    fn rec(o: &[Vec<Option<i64>>], row: usize, used: &mut Vec<bool>) -> Option<i64> {
        if row == o.len() {
            return Some(0);
        }
        let mut best = None;
        for c in 0..o.len() {
            if used[c] {
                continue;
            }
            if let Some(w) = o[row][c] {
                used[c] = true;
                if let Some(rest) = rec(o, row + 1, used) {
                    best = best.max(Some(w + rest));
                }
                used[c] = false;
            }
        }
        best
    }
    rec(o, 0, &mut vec![false; o.len()])
}

fn order_matrix_strategy(max_n: usize, density: f64, max_order: i64) -> impl Strategy<Value = Vec<Vec<Option<i64>>>> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(prop::option::weighted(density, 0..=max_order), n - 1), n)
    })
}

pub fn matching_and_jacobi() -> Result<(), String> {
    finish(runner(200).run(&order_matrix_strategy(6, 0.55, 4), |o| {
        let js = jacobi_numbers(&o);
        for (i, ji) in js.iter().enumerate() {
            let minor: Vec<Vec<Option<i64>>> = o.iter().enumerate().filter(|(r, _)| *r != i).map(|(_, r)| r.clone()).collect();
            let pattern: Vec<Vec<bool>> = minor.iter().map(|r| r.iter().map(Option::is_some).collect()).collect();
            prop_assert_eq!(*ji, brute_jacobi(&minor));
            prop_assert_eq!(*ji, jacobi_number(&minor));
            prop_assert_eq!(ji.is_some(), has_perfect_matching(&pattern));
        }
        if js.iter().all(Option::is_some) {
            let total: i64 = js.iter().map(|j| j.unwrap()).sum();
            let m: i64 = (0..o.len() - 1).map(|j| o.iter().zip(&js).filter_map(|(r, ji)| r[j].map(|x| x + ji.unwrap())).max().unwrap()).sum();
            prop_assert_eq!(total, m);
        }
        Ok(())
    }))
}

/// A random system whose order matrix is `o` (`None` entries leave the variable out).
/// Each present entry contributes a term at that order and a few lower-order factors.
fn system_strategy(o: Vec<Vec<Option<i64>>>, laurent: bool) -> impl Strategy<Value = DiffSystem> {
    let n = o.len();
    let lo = if laurent { -1 } else { 0 };
    let extras = prop::collection::vec(prop::collection::vec((1i64..=3, prop::collection::vec((0i64..=2, lo..=2i32), n - 1)), 0..=2), n);
    let lead_exps = prop::collection::vec(prop::collection::vec(1i32..=2, n - 1), n);
    (Just(o), extras, lead_exps, any::<bool>()).prop_map(move |(o, extras, leads, constant)| {
        let polys = o
            .iter()
            .zip(extras.iter().zip(&leads))
            .map(|(row, (extra, lead))| {
                let mut f = if constant { MultiPoly::one() } else { MultiPoly::zero() };
                for (j, e) in row.iter().enumerate() {
                    if let Some(k) = e {
                        f += &MultiPoly::var_pow(Var::diff_ind(j as u32 + 1, *k as u32), lead[j]);
                    }
                }
                for (c, mono) in extra {
                    let m = Mono::from_pairs(row.iter().zip(mono).enumerate().filter_map(|(j, (e, &(dk, ex)))| {
                        e.map(|k| (Var::diff_ind(j as u32 + 1, (k - dk).max(0) as u32), ex))
                    }));
                    f += &MultiPoly::term(m, rat(*c));
                }
                if f.len() < 2 {
                    f += &MultiPoly::int(2);
                }
                f
            })
            .collect();
        let names = (1..n).map(|j| format!("u{j}")).collect();
        DiffSystem::new(polys, names, DerivationRules::new()).unwrap_or_else(|e| panic!("{e}"))
    })
}

fn super_essential_orders(max_n: usize, max_order: i64) -> impl Strategy<Value = Vec<Vec<Option<i64>>>> {
    order_matrix_strategy(max_n, 0.7, max_order).prop_filter("super-essential with every variable present", |o| {
        is_super_essential(o) && (0..o[0].len()).all(|j| o.iter().any(|r| r[j].is_some()))
    })
}

pub fn interval_filling() -> Result<(), String> {
    let strat = super_essential_orders(4, 2).prop_flat_map(|o| system_strategy(o, true));
    finish(runner(50).run(&strat, |sys| {
        prop_assert!(is_super_essential(&order_matrix(&sys)));
        let ps = build_ps(&sys).unwrap();
        let window: Vec<(i64, i64)> = ps.shape.gamma_per_var.iter().copied().zip(ps.shape.upper.iter().copied()).collect();
        let gaps = support_gaps(&ps.entries, &window);
        prop_assert!(gaps.iter().all(Vec::is_empty), "gaps {:?} in {}", gaps, print_system(&sys));
        let seen: BTreeSet<(u32, u32)> = ps.entries.iter().flat_map(|e| diff_support(&e.poly)).collect();
        prop_assert_eq!(seen.into_iter().collect::<Vec<_>>(), ps.window_vars());
        prop_assert_eq!(ps.window_vars().len() + 1, ps.entries.len());
        prop_assert_eq!(parse_system(&print_system(&sys)).unwrap(), sys.clone());
        Ok(())
    }))?;
    // Arbitrary systems: the extracted subsystem is super-essential on the variables it uses.
    let strat = order_matrix_strategy(5, 0.5, 2)
        .prop_filter("every variable present", |o| (0..o[0].len()).all(|j| o.iter().any(|r| r[j].is_some())))
        .prop_flat_map(|o| system_strategy(o, false));
    finish(runner(60).run(&strat, |sys| {
        let info = super_essential_subsystem(&sys).unwrap();
        let o = order_matrix(&sys);
        let used: Vec<usize> = (0..sys.num_vars()).filter(|&j| info.indices.iter().any(|&i| o[i][j].is_some())).collect();
        let sub: Vec<Vec<Option<i64>>> = info.indices.iter().map(|&i| used.iter().map(|&j| o[i][j]).collect()).collect();
        prop_assert_eq!(sub.len(), used.len() + 1);
        prop_assert!(is_super_essential(&sub));
        Ok(())
    }))
}

// ---- determinants ----

fn matrix_strategy() -> impl Strategy<Value = PolyMatrix> {
    (1usize..=8).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec((0u8..10, -3i64..=3), n), n).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, r)| {
                    r.into_iter()
                        .enumerate()
                        .map(|(j, (kind, c))| {
                            let x = MultiPoly::var(Var::structural(i as u32 + 1, j as u32 + 1));
                            match kind {
                                0..=3 => MultiPoly::zero(),
                                4..=6 => MultiPoly::int(c),
                                7 | 8 => x,
                                _ => &x + &MultiPoly::int(c),
                            }
                        })
                        .collect()
                })
                .collect()
        })
    })
}

/// Leibniz formula over all permutations.
fn leibniz(m: &PolyMatrix) -> MultiPoly {
    fn rec(m: &PolyMatrix, row: usize, used: &mut Vec<bool>, sign: bool, acc: MultiPoly, out: &mut MultiPoly) {
        if acc.is_zero() {
            return;
        }
        if row == m.len() {
            *out += &if sign { -acc } else { acc };
            return;
        }
        for c in 0..m.len() {
            if used[c] {
                continue;
            }
            // Inversions added by placing column c after the columns already used.
            let inv = used[c + 1..].iter().filter(|&&u| u).count() % 2 == 1;
            used[c] = true;
            rec(m, row + 1, used, sign ^ inv, &acc * &m[row][c], out);
            used[c] = false;
        }
    }
    let mut out = MultiPoly::zero();
    rec(m, 0, &mut vec![false; m.len()], false, MultiPoly::one(), &mut out);
    out
}

pub fn bareiss_equals_cofactor() -> Result<(), String> {
    finish(runner(100).run(&matrix_strategy(), |m| {
        let b = det_bareiss(&m).unwrap();
        prop_assert_eq!(&b, &det_minor_expansion(&m));
        prop_assert_eq!(&b, &determinant(&m, DetMethod::Bareiss).unwrap());
        if m.len() <= 6 {
            prop_assert_eq!(&b, &leibniz(&m));
        }
        Ok(())
    }))
}

// ---- polytopes ----

fn simplex(dim: usize, scale: i64) -> Vec<Point> {
    let mut pts = vec![vec![0; dim]];
    for i in 0..dim {
        let mut p = vec![0; dim];
        p[i] = scale;
        pts.push(p);
    }
    pts
}

pub fn bernstein_scaling() -> Result<(), String> {
    let strat = (1i64..=4, 1i64..=4, 1i64..=3, prop::collection::vec(-3i64..=3, 3));
    finish(runner(40).run(&strat, |(d, e, f, shift)| {
        let big = |x: i64| BigRational::from_integer(x.into());
        prop_assert_eq!(mixed_volume(&[simplex(2, d), simplex(2, e)]), big(d * e));
        let moved: Vec<Point> = simplex(3, f).into_iter().map(|p| p.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect();
        let polys = [simplex(3, d), simplex(3, e), moved];
        prop_assert_eq!(mixed_volume(&polys), big(d * e * f));
        prop_assert_eq!(mixed_volume(&[polys[2].clone(), polys[0].clone(), polys[1].clone()]), big(d * e * f));
        // Mixed volume of identical polytopes is the normalized volume.
        prop_assert_eq!(mixed_volume(&[simplex(2, d), simplex(2, d)]), volume(&simplex(2, d)) * big(2));
        Ok(())
    }))
}

fn points(dim: usize, max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, dim), 1..=max)
}

/// Twice the area of a convex polygon given by its vertices in any order.
fn shoelace2(v: &[Point]) -> i64 {
    if v.len() < 3 {
        return 0;
    }
    let (cx, cy) = (v.iter().map(|p| p[0]).sum::<i64>() as f64 / v.len() as f64, v.iter().map(|p| p[1]).sum::<i64>() as f64 / v.len() as f64);
    let mut s = v.to_vec();
    s.sort_by(|a, b| {
        let ta = (a[1] as f64 - cy).atan2(a[0] as f64 - cx);
        let tb = (b[1] as f64 - cy).atan2(b[0] as f64 - cx);
        ta.partial_cmp(&tb).unwrap()
    });
    (0..s.len()).map(|i| s[i][0] * s[(i + 1) % s.len()][1] - s[(i + 1) % s.len()][0] * s[i][1]).sum::<i64>().abs()
}

pub fn hull_and_volume() -> Result<(), String> {
    let strat = (2usize..=4).prop_flat_map(|d| points(d, 10));
    finish(runner(80).run(&strat, |pts| {
        let distinct: BTreeSet<Point> = pts.iter().cloned().collect();
        let distinct: Vec<Point> = distinct.into_iter().collect();
        let oracle: BTreeSet<Point> = distinct
            .iter()
            .filter(|p| {
                let others: Vec<Point> = distinct.iter().filter(|q| q != p).cloned().collect();
                others.is_empty() || !in_hull(&others, p)
            })
            .cloned()
            .collect();
        let hull: BTreeSet<Point> = convex_hull(&pts).into_iter().collect();
        prop_assert_eq!(&hull, &oracle);
        if pts[0].len() == 2 {
            let v: Vec<Point> = hull.iter().cloned().collect();
            prop_assert_eq!(volume(&pts) * BigRational::from_integer(2.into()), BigRational::from_integer(shoelace2(&v).into()));
        }
        Ok(())
    }))?;
    // Volumes of Minkowski sums grow with the set of summands.
    let strat = prop::collection::vec(points(2, 5), 3);
    finish(runner(40).run(&strat, |ps| {
        let ab = minkowski_sum(&ps[0], &ps[1]);
        let abc = minkowski_sum(&ab, &ps[2]);
        prop_assert!(volume(&ps[0]) <= volume(&ab));
        prop_assert!(volume(&ab) <= volume(&abc));
        Ok(())
    }))
}

pub fn translation_invariance() -> Result<(), String> {
    let strat = (2usize..=3).prop_flat_map(|d| (prop::collection::vec(points(d, 5), d), prop::collection::vec(prop::collection::vec(-5i64..=5, d), d)));
    finish(runner(40).run(&strat, |(supports, shifts)| {
        let moved: Vec<Vec<Point>> = supports
            .iter()
            .zip(&shifts)
            .map(|(s, t)| s.iter().map(|p| p.iter().zip(t).map(|(a, b)| a + b).collect()).collect())
            .collect();
        prop_assert_eq!(mixed_volume(&supports), mixed_volume(&moved));
        for (a, b) in supports.iter().zip(&moved) {
            prop_assert_eq!(volume(a), volume(b));
        }
        let refs: Vec<&[Point]> = supports.iter().map(Vec::as_slice).collect();
        let mrefs: Vec<&[Point]> = moved.iter().map(Vec::as_slice).collect();
        prop_assert_eq!(lattice_rank(&refs), lattice_rank(&mrefs));
        Ok(())
    }))
}

// ---- the elimination pipeline ----

/// Small generic systems: n <= 3, orders <= 1, at most six polynomials in ps(P).
fn small_generic_systems() -> impl Strategy<Value = DiffSystem> {
    order_matrix_strategy(3, 0.75, 1)
        .prop_filter("super-essential with every variable present", |o| {
            is_super_essential(o) && (0..o[0].len()).all(|j| o.iter().any(|r| r[j].is_some()))
        })
        .prop_flat_map(|o| system_strategy(o, false))
        .prop_map(|s| s.to_generic())
        .prop_filter("small prolongation", |s| build_ps(s).map_or(false, |ps| ps.entries.len() <= 6))
}

/// Desk-scale limits on the random matrices: rows, and terms of the determinant.
const MAX_MATRIX: usize = 12;
const MAX_TERMS: usize = 2000;

pub fn nonzero_specialization() -> Result<(), String> {
    let mut runner = runner(25);
    finish(runner.run(&(small_generic_systems(), 0usize..3, any::<u8>()), |(sys, l, seed)| {
        let ps = build_ps(&sys).unwrap();
        let ags = build_ags(&ps);
        let l = l % ags.len();
        for (k, _) in ags.polys.iter().enumerate() {
            prop_assert!(ags.eval_at_generic_zero(&ags.generic_poly(k)).unwrap().is_zero());
        }
        for e in &ps.entries {
            prop_assert!(diff_generic_zero_eval(&e.poly, &sys).unwrap().is_zero());
        }
        let Ok((m, _)) = build_sylvester(&ags, l, seed as u64) else {
            return Err(TestCaseError::reject("no tight subdivision"));
        };
        if m.size() > MAX_MATRIX {
            return Err(TestCaseError::reject("matrix too large"));
        }
        let d = m.determinant().unwrap();
        if d.is_zero() {
            return Err(TestCaseError::reject("determinant vanishes"));
        }
        if d.len() > MAX_TERMS {
            return Err(TestCaseError::reject("determinant too large"));
        }
        prop_assert!(m.is_square());
        m.check_rows(&ags).unwrap();
        // Rows are counted in the standard lattice, the mixed volume in the lattice of the supports.
        let supports = ags.supports();
        let refs: Vec<&[Point]> = supports.iter().map(Vec::as_slice).collect();
        let index = lattice_index(&refs, ags.dim()).unwrap();
        let mv = mixed_volumes_minus(&supports)[l].clone().unwrap();
        prop_assert_eq!(mv * BigRational::from_integer(index), BigRational::from_integer(m.rows_of(l).into()));
        prop_assert!(ags.vanishes_at_generic_zero(&d).unwrap());
        let (h, _) = algorithm_specialize(&d, &ags).unwrap();
        prop_assert!(!h.is_zero());
        prop_assert!(diff_generic_zero_eval(&h, &sys).unwrap().is_zero());
        let tau = tau_of(&d, &ags, sys.n());
        for i in 0..sys.n() {
            let bound = ps.shape.jacobi[i] - ps.shape.gamma;
            if let Some(o) = coefficient_order(&h, i) {
                prop_assert!(tau[i].is_some_and(|t| o <= t && t as i64 <= bound));
            }
        }
        let again = build_sylvester(&ags, l, seed as u64).unwrap().0;
        prop_assert_eq!(again.to_json(), m.to_json());
        Ok(())
    }))
}

