mod common;

use std::sync::Arc;

use common::Lcg;
use nlhodge::cochains::*;
use nlhodge::neighborhoods::{enumerate_all, enumerate_tuples, NeighborhoodSystem, TupleSet};
use nlhodge::space::{gen_circle, gen_interval};

fn levels(sys: NeighborhoodSystem, n: usize, top: usize) -> Vec<Arc<TupleSet>> {
    let s = gen_circle(n, 1.0).unwrap();
    enumerate_all(&s, &sys, top).unwrap().into_iter().map(Arc::new).collect()
}

#[test]
fn alternation_of_antisymmetric_and_symmetric_functions() {
    let t = levels(NeighborhoodSystem::rips(1.2), 9, 2);
    let f: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
    let g: Vec<f64> = (0..9).map(|i| (i as f64 * 0.3).cos()).collect();
    let anti = |x: &[usize]| f[x[1]] * g[x[0]] - f[x[0]] * g[x[1]];
    let a = alt_project(&anti, t[1].clone());
    for (k, x) in t[1].iter().enumerate() {
        assert!((a.values[k] - anti(x)).abs() < 1e-15);
    }
    let sym = |x: &[usize]| f[x[0]] * f[x[1]];
    assert!(alt_project(&sym, t[1].clone()).max_abs() < 1e-15);
}

#[test]
fn elementary_examples() {
    let t = levels(NeighborhoodSystem::Full, 5, 2);
    let one = vec![1.0; 5];
    let f: Vec<f64> = (0..5).map(|i| (i * i) as f64 + 0.5).collect();
    let e = elementary_form(&one, &[&f], t[1].clone()).unwrap();
    for (k, x) in t[1].iter().enumerate() {
        assert_eq!(e.values[k], f[x[1]] - f[x[0]]);
    }
    let id: Vec<f64> = (0..5).map(|i| i as f64).collect();
    let sq: Vec<f64> = id.iter().map(|v| v * v).collect();
    assert!((elementary_value(&one, &[&id, &sq], &[0, 1, 2]) - 1.0).abs() < 1e-15);
    let e = elementary_form(&one, &[&id, &id], t[2].clone()).unwrap();
    assert_eq!(e.max_abs(), 0.0);
    assert!(elementary_form(&one, &[&id], t[2].clone()).is_err());
}

#[test]
fn elementary_forms_are_antisymmetric() {
    let mut rng = Lcg(7);
    let (g, f1, f2) = (rng.vec(6), rng.vec(6), rng.vec(6));
    let base = elementary_value(&g, &[&f1, &f2], &[0, 2, 5]);
    for (perm, sign) in permutations(3) {
        let x: Vec<usize> = perm.iter().map(|&i| [0, 2, 5][i]).collect();
        assert!((elementary_value(&g, &[&f1, &f2], &x) - sign * base).abs() < 1e-14);
    }
}

#[test]
fn coboundary_of_constants_and_square_zero() {
    let t = levels(NeighborhoodSystem::rips(1.3), 12, 3);
    let ops: Vec<CoboundaryOperator> = (0..3).map(|p| CoboundaryOperator::build(t[p].clone(), t[p + 1].clone()).unwrap()).collect();
    let c = Cochain::new(t[0].clone(), vec![2.5; t[0].len()]).unwrap();
    assert_eq!(coboundary_apply(&ops[0], &c).unwrap().max_abs(), 0.0);
    let mut rng = Lcg(11);
    for p in 0..2 {
        let ints: Vec<f64> = (0..t[p].len()).map(|_| (rng.below(21) as f64) - 10.0).collect();
        let f = Cochain::new(t[p].clone(), ints).unwrap();
        let dd = coboundary_apply(&ops[p + 1], &coboundary_apply(&ops[p], &f).unwrap()).unwrap();
        assert_eq!(dd.max_abs(), 0.0);
        assert!(ops[p].composes_to_zero(&ops[p + 1]));
    }
    assert!(coboundary_apply(&ops[1], &c).is_err());
}

#[test]
fn coboundary_matches_raw_formula() {
    let t = levels(NeighborhoodSystem::rips(1.3), 10, 2);
    let op = CoboundaryOperator::build(t[1].clone(), t[2].clone()).unwrap();
    let mut rng = Lcg(3);
    let f = Cochain::new(t[1].clone(), rng.vec(t[1].len())).unwrap();
    let d = coboundary_apply(&op, &f).unwrap();
    for (k, x) in t[2].iter().enumerate() {
        let raw = f.eval(&[x[1], x[2]]).unwrap() - f.eval(&[x[0], x[2]]).unwrap() + f.eval(&[x[0], x[1]]).unwrap();
        assert!((d.values[k] - raw).abs() < 1e-14);
    }
}

#[test]
fn multiplication_trivial_cases() {
    let t = levels(NeighborhoodSystem::rips(1.0), 8, 1);
    let mut rng = Lcg(5);
    let f = Cochain::new(t[1].clone(), rng.vec(t[1].len())).unwrap();
    assert_eq!(multiply_power(&[1.0; 8], &f).values, f.values);
    assert_eq!(multiply_power(&[0.0; 8], &f).max_abs(), 0.0);
    let c = cup_average(&[3.0; 8], &f);
    for (a, b) in c.values.iter().zip(&f.values) {
        assert!((a - 3.0 * b).abs() < 1e-15);
    }
    let z = Cochain::zeros(t[1].clone());
    assert_eq!(cup_average(&rng.vec(8), &z).max_abs(), 0.0);
}

#[test]
fn cone_contraction_inverts_coboundary_on_closed_forms() {
    let s = gen_interval(6).unwrap();
    let t: Vec<Arc<TupleSet>> = enumerate_all(&s, &NeighborhoodSystem::Full, 3).unwrap().into_iter().map(Arc::new).collect();
    let ops: Vec<CoboundaryOperator> = (0..3).map(|p| CoboundaryOperator::build(t[p].clone(), t[p + 1].clone()).unwrap()).collect();
    let mut rng = Lcg(19);
    for p in 0..2 {
        let h = Cochain::new(t[p].clone(), rng.vec(t[p].len())).unwrap();
        let f = coboundary_apply(&ops[p], &h).unwrap();
        for apex in [0, 3] {
            let g = cone_contraction(&f, apex, t[p].clone(), &NeighborhoodSystem::Full).unwrap();
            let back = coboundary_apply(&ops[p], &g).unwrap();
            let err = back.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "degree {p} apex {apex}: {err}");
        }
    }
    let z = Cochain::zeros(t[1].clone());
    assert!(cone_contraction(&z, 0, t[0].clone(), &NeighborhoodSystem::rips(0.5)).is_err());
    let z0 = Cochain::zeros(Arc::new(enumerate_tuples(&s, &NeighborhoodSystem::Full, 0).unwrap()));
    assert!(cone_contraction(&z0, 0, t[0].clone(), &NeighborhoodSystem::Full).is_err());
}

#[test]
fn ordered_identities() {
    let mut rng = Lcg(23);
    let (f0, f1, f2) = (rng.vec(5), rng.vec(5), rng.vec(5));
    let x = [4, 1, 3];
    let tf = || ordered::tensor(vec![&f0, &f1]);
    // alternation commutes with the raw coboundary
    let lhs = ordered::alt(ordered::coboundary(ordered::alt(tf())));
    let rhs = ordered::coboundary(ordered::alt(tf()));
    assert!((lhs(&x) - rhs(&x)).abs() < 1e-14);
    // delta delta = 0 on ordered functions
    let dd = ordered::coboundary(ordered::coboundary(ordered::tensor(vec![&f2])));
    assert!(dd(&x).abs() < 1e-15);
    let aa = ordered::alt(ordered::alt(ordered::tensor(vec![&f0, &f1, &f2])));
    let a = ordered::alt(ordered::tensor(vec![&f0, &f1, &f2]));
    assert!((aa(&x) - a(&x)).abs() < 1e-15);
}
