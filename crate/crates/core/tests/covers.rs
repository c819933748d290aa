mod common;

use std::sync::Arc;

use common::Lcg;
use nlhodge::cochains::Cochain;
use nlhodge::covers::*;
use nlhodge::hodge::WeightedComplex;
use nlhodge::kernels::KernelModel;
use nlhodge::neighborhoods::NeighborhoodSystem;
use nlhodge::space::{gen_circle, gen_interval, MetricMeasureSpace};
use nlhodge::verify::default_covers;
use nlhodge::Error;

fn complex(space: nlhodge::space::MetricMeasureSpace, sys: NeighborhoodSystem, top: usize) -> WeightedComplex {
    WeightedComplex::build(Arc::new(space), sys, KernelModel::fractional(1.0, 0.5, 1.0).unwrap(), top).unwrap()
}

#[test]
fn circle_cover_with_every_eighth_center() {
    let c = complex(gen_circle(32, 1.0).unwrap(), NeighborhoodSystem::rips(0.3), 2);
    let step = 2.0 * std::f64::consts::PI / 32.0;
    let centers: Vec<usize> = (0..32).step_by(8).collect();
    let cover = build_ball_cover(&c, 0.3, 5.0 * step, &centers, None).unwrap();
    assert_eq!(cover.balls.len(), 4);
    let s = c.space();
    for x in 0..32 {
        assert!(centers.iter().any(|&k| s.dist(x, k) < cover.eta));
    }
    for inter in &cover.intersections {
        for &x in &inter.points {
            assert!(inter.balls.iter().all(|&b| s.dist(x, cover.balls[b].center) < cover.balls[b].radius));
        }
    }
}

#[test]
fn cover_errors() {
    let c = complex(gen_circle(32, 1.0).unwrap(), NeighborhoodSystem::rips(0.3), 1);
    assert!(matches!(build_ball_cover(&c, 0.3, 0.2, &[], None), Err(Error::InvalidArgument(_))));
    match build_ball_cover(&c, 0.3, 0.2, &[0], None) {
        Err(Error::Coverage { uncovered }) => assert!(uncovered.contains(&16) && !uncovered.contains(&0)),
        other => panic!("expected coverage error, got {other:?}"),
    }
}

#[test]
fn single_ball_cover() {
    let c = complex(gen_interval(8).unwrap(), NeighborhoodSystem::rips(2.0), 3);
    let cover = build_ball_cover(&c, 2.0, 1.5, &[3], None).unwrap();
    assert_eq!(cover.intersections.len(), 1);
    assert_eq!(cover.intersections[0].points, (0..8).collect::<Vec<_>>());
    for p in 0..=3 {
        let pou = build_partition(&cover, p).unwrap();
        assert!(pou.chi[0].iter().all(|&v| v == 1.0));
    }
    // every augmented tuple stays admissible, so the slice is the whole intersection
    let hom = build_slice_and_psi(&cover, 0, 2).unwrap();
    assert_eq!(hom.w, (0..8).collect::<Vec<_>>());
}

#[test]
fn partition_support_and_sum() {
    for (_, _, cover) in default_covers().unwrap() {
        for p in 0..=2 {
            let pou = build_partition(&cover, p).unwrap();
            assert!(pou.sum_defect() < 1e-12);
            let tuples = cover.global_tuples(p);
            for (a, row) in pou.chi.iter().enumerate() {
                for (k, t) in tuples.iter().enumerate() {
                    assert!((-1e-15..=1.0 + 1e-15).contains(&row[k]));
                    if row[k] != 0.0 {
                        assert!(cover.containing(p, k).contains(&a), "ball {a} tuple {t:?}");
                    }
                    assert!((pou.eval(a, t) - row[k]).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn mayer_vietoris_rows_are_exact() {
    for (_, _, cover) in default_covers().unwrap() {
        let q_max = cover.max_level.min(3) - 1;
        for p in 0..=2 {
            let pou = build_partition(&cover, p).unwrap();
            let cert = mayer_vietoris_check(&cover, &pou, q_max, 5).unwrap();
            assert!(cert.exact && cert.square_zero, "degree {p}");
            assert!(cert.rows.iter().all(|r| r.exact));
            assert!(cert.reconstruction_residual < 1e-10);
            assert!(cert.control_residual > 1e-3);
        }
    }
}

#[test]
fn nerve_of_default_covers() {
    let covers = default_covers().unwrap();
    assert_eq!(cech_nerve_betti(&covers[0].2, 1).unwrap().betti, vec![1, 1]);
    assert_eq!(cech_nerve_betti(&covers[1].2, 1).unwrap().betti, vec![1, 0]);
}

#[test]
fn nerve_of_two_overlapping_intervals() {
    let s = gen_interval(40).unwrap();
    let c = complex(s.clone(), NeighborhoodSystem::rips(0.1), 2);
    let centers = [s.nearest_position(0.25).unwrap(), s.nearest_position(0.75).unwrap()];
    let cover = build_ball_cover(&c, 0.1, 0.3, &centers, Some(2)).unwrap();
    assert_eq!(cover.level(1).count(), 1);
    assert_eq!(cech_nerve_betti(&cover, 1).unwrap().betti, vec![1, 0]);
    let capped = build_ball_cover(&c, 0.1, 0.3, &centers, None).unwrap();
    assert!(cech_nerve_betti(&capped, 1).is_err());
}

/// Slice by definition: adding `t` to any admissible tuple of the intersection keeps it
/// admissible and inside the intersection.
fn brute_slice(cover: &CoverSystem, space: &MetricMeasureSpace, sys: &NeighborhoodSystem, id: usize, max_degree: usize) -> Vec<usize> {
    let inter = &cover.intersections[id];
    let inside = |x: usize| inter.balls.iter().all(|&b| space.dist(x, cover.balls[b].center) < cover.balls[b].radius);
    inter
        .points
        .iter()
        .copied()
        .filter(|&t| {
            (0..max_degree).all(|p| {
                inter.tuples[p].iter().all(|x| {
                    let mut y = x.to_vec();
                    if !y.contains(&t) {
                        y.push(t);
                    }
                    sys.is_admissible(space, &y) && y.iter().all(|&v| inside(v))
                })
            })
        })
        .collect()
}

#[test]
fn slices_match_brute_force() {
    let sys = NeighborhoodSystem::hausdorff(0.5);
    let c = complex(gen_circle(32, 1.0).unwrap(), sys.clone(), 3);
    let cover = default_cover(&c, 0.5, None).unwrap();
    let space = c.space().clone();
    let mut checked = 0;
    for id in (0..cover.intersections.len()).step_by(97) {
        let brute = brute_slice(&cover, &space, &sys, id, 2);
        match build_slice_and_psi(&cover, id, 2) {
            Ok(h) => {
                assert_eq!(h.w, brute, "intersection {id}");
                let mass: f64 = brute.iter().map(|&t| space.weight(t)).sum();
                assert!((h.mass - mass).abs() < 1e-14);
                checked += 1;
            }
            Err(Error::AssumptionViolation { .. }) => assert!(brute.is_empty()),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(checked > 10);
}

#[test]
fn psi_matches_averaging_formula() {
    let sys = NeighborhoodSystem::hausdorff(0.1);
    let c = complex(gen_interval(40).unwrap(), sys, 3);
    let cover = default_cover(&c, 0.1, None).unwrap();
    let space = c.space().clone();
    let mut rng = Lcg(17);
    for id in (0..cover.intersections.len()).step_by(11) {
        let hom = build_slice_and_psi(&cover, id, 2).unwrap();
        let inter = &cover.intersections[id];
        for p in 1..=2 {
            let f = Cochain::new(inter.tuples[p].clone(), rng.vec(inter.tuples[p].len())).unwrap();
            let g = psi_apply(&cover, &hom, &f).unwrap();
            for (k, x) in inter.tuples[p - 1].iter().enumerate() {
                let mut sum = 0.0;
                for &t in &hom.w {
                    let mut y = vec![t];
                    y.extend_from_slice(x);
                    sum += space.weight(t) * f.eval(&y).unwrap_or(0.0);
                }
                assert!((g.values[k] - sum / hom.mass).abs() < 1e-13, "intersection {id} degree {p}");
            }
            let z = Cochain::zeros(inter.tuples[p].clone());
            assert_eq!(psi_apply(&cover, &hom, &z).unwrap().max_abs(), 0.0);
        }
    }
}

#[test]
fn homotopy_identity_on_every_intersection() {
    for (_, _, cover) in default_covers().unwrap() {
        for id in 0..cover.intersections.len() {
            let h = check_homotopy(&cover, id, 1, 3).unwrap();
            assert!(h.identity_residual.iter().chain(&h.poincare_residual).all(|&r| r < 1e-10), "intersection {id}");
        }
    }
}

#[test]
fn rips_slices_can_be_empty() {
    let c = complex(gen_circle(32, 1.0).unwrap(), NeighborhoodSystem::rips(0.5), 3);
    let cover = default_cover(&c, 0.5, Some(1)).unwrap();
    let failures = (0..cover.intersections.len())
        .filter(|&id| matches!(build_slice_and_psi(&cover, id, 2), Err(Error::AssumptionViolation { .. })))
        .count();
    assert!(failures > 0);
}

#[test]
fn recovery_three_ways() {
    let expect = [vec![1, 1], vec![1, 0]];
    for ((_, c, cover), e) in default_covers().unwrap().iter().zip(expect) {
        let r = derham_recovery_report(c, 1, Some(cover)).unwrap();
        assert!(r.all_agree, "{r:?}");
        assert_eq!(r.reference, e);
    }
}
