mod common;

use std::sync::Arc;

use common::{line, Lcg};
use nalgebra::{DMatrix, DVector};
use nlhodge::capacity::*;
use nlhodge::hodge::WeightedComplex;
use nlhodge::kernels::KernelModel;
use nlhodge::neighborhoods::NeighborhoodSystem;
use nlhodge::space::{gen_interval, MetricMeasureSpace};

fn complex(space: MetricMeasureSpace, eps: f64, kernel: KernelModel) -> Arc<WeightedComplex> {
    Arc::new(WeightedComplex::build(Arc::new(space), NeighborhoodSystem::rips(eps), kernel, 1).unwrap())
}

fn frac(alpha: f64) -> KernelModel {
    KernelModel::fractional(1.0, alpha, 1.0).unwrap()
}

/// `sum w u^2 + sum_{x<y, rho<eps} 2 j(x,y) w_x w_y (u_y - u_x)^2`.
fn energy(s: &MetricMeasureSpace, k: &KernelModel, eps: f64, u: &[f64]) -> f64 {
    let n = s.n();
    let mut e: f64 = (0..n).map(|x| s.weight(x) * u[x] * u[x]).sum();
    for x in 0..n {
        for y in x + 1..n {
            if s.dist(x, y) < eps {
                e += 2.0 * k.value(s, x, y) * s.weight(x) * s.weight(y) * (u[y] - u[x]).powi(2);
            }
        }
    }
    e
}

/// Dense minimization by solving the free block with LU.
fn dense_capacity(s: &MetricMeasureSpace, k: &KernelModel, eps: f64, clamp: &[usize]) -> f64 {
    let n = s.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        a[(x, x)] += s.weight(x);
        for y in 0..n {
            if x != y && s.dist(x, y) < eps {
                let m = 2.0 * k.value(s, x, y) * s.weight(x) * s.weight(y);
                a[(x, x)] += m;
                a[(x, y)] -= m;
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|x| !clamp.contains(x)).collect();
    let af = DMatrix::from_fn(free.len(), free.len(), |i, j| a[(free[i], free[j])]);
    let rhs = DVector::from_fn(free.len(), |i, _| -clamp.iter().map(|&c| a[(free[i], c)]).sum::<f64>());
    let sol = af.lu().solve(&rhs).unwrap();
    let mut u = vec![1.0; n];
    for (i, &x) in free.iter().enumerate() {
        u[x] = sol[i];
    }
    energy(s, k, eps, &u)
}

#[test]
fn matches_dense_minimization() {
    let s = line(&[0.0, 0.1, 0.25, 0.3, 0.55, 0.6, 0.8, 1.0], &[0.3, 0.1, 0.2, 0.5, 0.1, 0.4, 0.2, 0.3]);
    for (alpha, eps) in [(0.5, 0.4), (1.5, 0.3), (1.0, 2.0)] {
        let c = complex(s.clone(), eps, frac(alpha));
        let prob = CapacityProblem::with_clamp(c, vec![3], vec![2, 3]).unwrap();
        let r = capacity(&prob).unwrap();
        let d = dense_capacity(&s, &frac(alpha), eps, &[2, 3]);
        assert!((r.capacity - d).abs() < 1e-10 * d, "alpha {alpha}: {} vs {d}", r.capacity);
        assert!((energy(&s, &frac(alpha), eps, &r.minimizer) - r.capacity).abs() < 1e-10 * d);
        assert!(r.bounded);
        // any admissible perturbation raises the energy
        let mut rng = Lcg(alpha.to_bits());
        for _ in 0..20 {
            let mut v = r.minimizer.clone();
            for x in [0, 1, 4, 5, 6, 7] {
                v[x] += 0.05 * rng.signed();
            }
            assert!(energy(&s, &frac(alpha), eps, &v) >= r.capacity);
        }
    }
}

#[test]
fn full_clamp_returns_total_mass() {
    let s = gen_interval(20).unwrap();
    let c = complex(s.clone(), 0.2, frac(0.5));
    let r = capacity(&CapacityProblem::with_clamp(c, vec![0], (0..20).collect()).unwrap()).unwrap();
    assert!((r.capacity - s.total_mass()).abs() < 1e-12);
}

#[test]
fn invalid_problems_are_rejected() {
    let c = complex(gen_interval(10).unwrap(), 0.3, frac(0.5));
    assert!(CapacityProblem::with_clamp(c.clone(), vec![0], vec![]).is_err());
    assert!(CapacityProblem::with_clamp(c, vec![0], vec![10]).is_err());
    let c0 = Arc::new(
        WeightedComplex::build(Arc::new(gen_interval(10).unwrap()), NeighborhoodSystem::rips(0.3), frac(0.5), 0).unwrap(),
    );
    assert!(CapacityProblem::new(c0, vec![3]).is_err());
}

#[test]
fn monotone_in_clamp_and_pairs() {
    let s = gen_interval(60).unwrap();
    let small = capacity(&CapacityProblem::with_clamp(complex(s.clone(), 0.2, frac(0.5)), vec![30], vec![30]).unwrap()).unwrap();
    let large = capacity(&CapacityProblem::with_clamp(complex(s.clone(), 0.2, frac(0.5)), vec![30], vec![29, 30, 31]).unwrap()).unwrap();
    assert!(large.capacity > small.capacity);
    let wider = capacity(&CapacityProblem::with_clamp(complex(s, 0.4, frac(0.5)), vec![30], vec![30]).unwrap()).unwrap();
    assert!(wider.capacity > small.capacity);
}

#[test]
fn homogeneity_under_weight_scaling() {
    let s = gen_interval(40).unwrap();
    let base = capacity(&CapacityProblem::with_clamp(complex(s.clone(), 0.3, frac(0.5)), vec![20], vec![20]).unwrap()).unwrap();
    let c = 2.5;
    // pair masses scale by c^2 with the weights, so the kernel is divided by c
    let k = KernelModel::fractional(1.0, 0.5, 1.0 / c).unwrap();
    let scaled = capacity(&CapacityProblem::with_clamp(complex(s.scaled_weights(c).unwrap(), 0.3, k), vec![20], vec![20]).unwrap()).unwrap();
    assert!((scaled.capacity - c * base.capacity).abs() < 1e-10 * scaled.capacity);
}

#[test]
fn point_hole_trends() {
    let res = [50, 100, 200, 400];
    let caps = |alpha: f64| -> Vec<f64> { res.iter().map(|&n| point_hole_capacity(n, 0.5, alpha, 0.25, 1.0).unwrap()).collect() };
    let low = caps(0.5);
    assert!(low.windows(2).all(|w| w[1] < w[0]));
    let (slope, _, _, v) = classify(&res, &low);
    assert!(slope < -0.2);
    assert_eq!(v, Verdict::Removable);
    let high = caps(1.5);
    let (_, ratio, _, v) = classify(&res, &high);
    assert!(ratio < 1.2);
    assert_eq!(v, Verdict::NonRemovable);
}

#[test]
fn classification_rules() {
    let res = [50, 100, 200, 400, 800];
    let decay: Vec<f64> = res.iter().map(|&n| (n as f64).powf(-0.5)).collect();
    assert_eq!(classify(&res, &decay).3, Verdict::Removable);
    assert_eq!(classify(&res, &[1.0; 5]).3, Verdict::NonRemovable);
    let slow: Vec<f64> = res.iter().map(|&n| (n as f64).powf(-0.05)).collect();
    assert_eq!(classify(&res, &slow).3, Verdict::Inconclusive);
}

#[test]
fn sweep_report_csv() {
    let cfg = SweepConfig { resolutions: vec![40, 80], alphas: vec![0.5], ..SweepConfig::default() };
    let r = removability_sweep(&cfg).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("resolution,alpha,epsilon,capacity,slope,verdict"));
    assert_eq!(lines.count(), 2);
    let bad = SweepConfig { resolutions: vec![40], ..SweepConfig::default() };
    assert!(removability_sweep(&bad).is_err());
}
