use std::sync::Arc;

use nlhodge::cochains::{sort_with_sign, CoboundaryOperator};
use nlhodge::cohomology::{exact_betti, Field, PRIME_A};
use nlhodge::hodge::WeightedComplex;
use nlhodge::kernels::KernelModel;
use nlhodge::neighborhoods::{enumerate_all, NeighborhoodSystem};
use nlhodge::space::{MetricMeasureSpace, SpaceMeta};
use proptest::prelude::*;

fn plane(points: &[(f64, f64)], weights: &[f64]) -> Option<MetricMeasureSpace> {
    let n = points.len();
    let dist = (0..n * n)
        .map(|k| {
            let (a, b) = (points[k / n], points[k % n]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        })
        .collect();
    let meta = SpaceMeta { generator: "plane".into(), params: Default::default(), dimension: Some(2.0) };
    MetricMeasureSpace::new(dist, weights.to_vec(), meta).ok()
}

fn cloud() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<f64>)> {
    (4usize..12).prop_flat_map(|n| {
        (prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), n), prop::collection::vec(0.1..3.0f64, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundary_squares_to_zero((pts, w) in cloud(), eps in 0.2..1.2f64) {
        let Some(s) = plane(&pts, &w) else { return Ok(()) };
        let sets: Vec<_> = enumerate_all(&s, &NeighborhoodSystem::rips(eps), 3).unwrap().into_iter().map(Arc::new).collect();
        for p in 0..2 {
            let a = CoboundaryOperator::build(sets[p].clone(), sets[p + 1].clone()).unwrap();
            let b = CoboundaryOperator::build(sets[p + 1].clone(), sets[p + 2].clone()).unwrap();
            prop_assert!(a.composes_to_zero(&b));
        }
    }

    #[test]
    fn adjoint_identity_holds((pts, w) in cloud(), eps in 0.2..1.2f64, alpha in 0.1..1.9f64) {
        let Some(s) = plane(&pts, &w) else { return Ok(()) };
        let k = KernelModel::fractional(2.0, alpha, 1.0).unwrap();
        let c = WeightedComplex::build(Arc::new(s), NeighborhoodSystem::rips(eps), k, 2).unwrap();
        for p in 0..2 {
            let x: Vec<f64> = (0..c.dim(p)).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let y: Vec<f64> = (0..c.dim(p + 1)).map(|i| ((i * 5 + 1) % 13) as f64 - 6.0).collect();
            let lhs = c.inner(p + 1, &c.delta(p, &x).unwrap(), &y);
            let rhs = c.inner(p, &x, &c.delta_adjoint(p, &y).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())));
        }
    }

    #[test]
    fn betti_numbers_survive_relabeling((pts, w) in cloud(), eps in 0.2..1.2f64, seed in any::<u64>()) {
        let Some(s) = plane(&pts, &w) else { return Ok(()) };
        let n = s.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let t = s.permuted(&perm).unwrap();
        let k = KernelModel::constant(1.0).unwrap();
        let betti = |sp: MetricMeasureSpace| {
            let c = WeightedComplex::build(Arc::new(sp), NeighborhoodSystem::rips(eps), k.clone(), 2).unwrap();
            exact_betti(&c.dims(), c.coboundaries(), 1, Field::Prime(PRIME_A)).betti
        };
        prop_assert_eq!(betti(s), betti(t));
    }

    #[test]
    fn sorting_sign_is_a_homomorphism(v in prop::collection::hash_set(0usize..50, 1..7)) {
        let v: Vec<usize> = v.into_iter().collect();
        let (sorted, sign) = sort_with_sign(&v).unwrap();
        let mut reversed = v.clone();
        reversed.reverse();
        let (sorted_r, sign_r) = sort_with_sign(&reversed).unwrap();
        prop_assert_eq!(&sorted, &sorted_r);
        // reversing k entries takes floor(k/2) transpositions
        let flip = if (v.len() / 2) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(sign * flip, sign_r);
    }
}
