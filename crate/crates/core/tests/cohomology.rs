mod common;

use std::sync::Arc;

use common::{brute_rips, dense_betti, dense_rank, Lcg};
use nalgebra::DMatrix;
use nlhodge::cohomology::*;
use nlhodge::hodge::{analyze, harmonic_dimension, TolPolicy, WeightedComplex};
use nlhodge::kernels::KernelModel;
use nlhodge::neighborhoods::NeighborhoodSystem;
use nlhodge::space::{gen_circle, gen_interval, gen_two_components};

#[test]
fn integer_ranks_match_svd() {
    let mut rng = Lcg(99);
    for trial in 0..40 {
        let (r, c) = (1 + rng.below(9), 1 + rng.below(9));
        // low-rank products make rank deficiency common
        let k = 1 + rng.below(r.min(c));
        let a: Vec<i64> = (0..r * k).map(|_| rng.below(7) as i64 - 3).collect();
        let b: Vec<i64> = (0..k * c).map(|_| rng.below(7) as i64 - 3).collect();
        let mut m = IntMatrix::new(c);
        let mut d = DMatrix::zeros(r, c);
        for i in 0..r {
            let row: Vec<(usize, i64)> = (0..c).map(|j| (j, (0..k).map(|l| a[i * k + l] * b[l * c + j]).sum())).collect();
            for &(j, v) in &row {
                d[(i, j)] = v as f64;
            }
            m.push_row(row);
        }
        let expect = dense_rank(&d);
        for f in [Field::Prime(PRIME_A), Field::Prime(PRIME_B), Field::Rational] {
            assert_eq!(rank(&m, f), expect, "trial {trial} field {f:?}");
        }
    }
}

fn build(space: nlhodge::space::MetricMeasureSpace, eps: f64, top: usize) -> WeightedComplex {
    WeightedComplex::build(Arc::new(space), NeighborhoodSystem::rips(eps), KernelModel::fractional(1.0, 0.5, 1.0).unwrap(), top).unwrap()
}

#[test]
fn betti_numbers_match_dense_oracle() {
    let cases = [
        (gen_circle(20, 1.0).unwrap(), 0.7, vec![1, 1]),
        (gen_interval(25).unwrap(), 0.15, vec![1, 0]),
        (gen_two_components(8, 0.5).unwrap(), 0.3, vec![2, 0]),
    ];
    for (s, eps, expect) in cases {
        let levels: Vec<Vec<Vec<usize>>> = (0..=2).map(|p| brute_rips(&s, eps, p)).collect();
        assert_eq!(dense_betti(&levels, 1), expect);
        let c = build(s, eps, 2);
        let r = exact_betti(&c.dims(), c.coboundaries(), 1, Field::Prime(PRIME_A));
        assert_eq!(r.betti, expect);
        assert_eq!(exact_betti(&c.dims(), c.coboundaries(), 1, Field::Rational).betti, expect);
    }
}

#[test]
fn betti_numbers_ignore_weights() {
    let s = gen_circle(24, 1.0).unwrap();
    let a = build(s.clone(), 0.6, 2);
    let b = WeightedComplex::build(Arc::new(s.scaled_weights(7.0).unwrap()), NeighborhoodSystem::rips(0.6), KernelModel::constant(2.0).unwrap(), 2).unwrap();
    let f = Field::Prime(PRIME_A);
    assert_eq!(exact_betti(&a.dims(), a.coboundaries(), 1, f), exact_betti(&b.dims(), b.coboundaries(), 1, f));
}

#[test]
fn numeric_and_exact_agree() {
    let c = build(gen_circle(32, 1.0).unwrap(), 0.5, 2);
    let a = analyze(&c, 1, TolPolicy::Default).unwrap();
    assert!(a.agreement.all_agree);
    assert_eq!(a.betti.betti, vec![1, 1]);
    assert_eq!(a.fields_tried, vec![Field::Prime(PRIME_A)]);
}

#[test]
fn bad_tolerance_is_reported() {
    let c = build(gen_circle(32, 1.0).unwrap(), 0.5, 2);
    // a threshold between eigenvalues of comparable size must be flagged
    let h = harmonic_dimension(&c, 1, TolPolicy::Default).unwrap();
    let mid = h.eigenvalues[h.harmonic_dim + 2];
    let bad = harmonic_dimension(&c, 1, TolPolicy::Absolute(mid * 1.0000001)).unwrap();
    assert!(bad.uncertain);
    let exact = exact_betti(&c.dims(), c.coboundaries(), 1, Field::Prime(PRIME_A));
    let nd: Vec<NumericDegree> = vec![harmonic_dimension(&c, 0, TolPolicy::Default).unwrap().as_numeric(), bad.as_numeric()];
    let rep = compare_numeric_exact(&nd, &exact);
    assert!(!rep.all_agree);
    assert!(rep.degrees[1].uncertain);
    let (_, tried) = exact_betti_escalating(&c.dims(), c.coboundaries(), 1, &[1, bad.harmonic_dim]);
    assert_eq!(tried.len(), 3);
}
