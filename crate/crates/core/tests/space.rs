mod common;

use std::f64::consts::PI;
use std::io::Write;

use nlhodge::space::*;
use nlhodge::Error;

#[test]
fn circle_of_four_points() {
    let s = gen_circle(4, 1.0).unwrap();
    assert!((s.dist(0, 1) - PI / 2.0).abs() < 1e-15);
    assert!((s.dist(0, 2) - PI).abs() < 1e-15);
    assert!((s.dist(1, 3) - PI).abs() < 1e-15);
}

#[test]
fn circle_mass_and_degenerate_input() {
    assert!((gen_circle(64, 1.0).unwrap().total_mass() - 2.0 * PI).abs() < 1e-12);
    assert!(gen_circle(2, 1.0).is_err());
    assert!(gen_circle(8, 0.0).is_err());
}

#[test]
fn interval_grid() {
    let s = gen_interval(2).unwrap();
    assert_eq!(s.n(), 2);
    assert_eq!(s.dist(0, 1), 1.0);
    let s = gen_interval(101).unwrap();
    assert!((s.dist(0, 1) - 0.01).abs() < 1e-15);
    assert!((s.mesh_width() - 0.01).abs() < 1e-15);
    assert!((s.total_mass() - 1.0).abs() < 1e-12);
    assert_eq!(s.nearest_position(0.5), Some(50));
}

#[test]
fn two_components_separation() {
    let s = gen_two_components(10, 5.0).unwrap();
    assert!((s.total_mass() - 2.0).abs() < 1e-12);
    let cross = (0..10).flat_map(|i| (10..20).map(move |j| (i, j)));
    let min = cross.map(|(i, j)| s.dist(i, j)).fold(f64::MAX, f64::min);
    assert!((min - 5.0).abs() < 1e-12);
    let t = nlhodge::neighborhoods::enumerate_tuples(&s, &nlhodge::neighborhoods::NeighborhoodSystem::rips(1.0), 1).unwrap();
    assert!(t.iter().all(|p| (p[0] < 10) == (p[1] < 10)));
}

#[test]
fn punctured_interval_counts() {
    // one grid point at 0.5 falls strictly inside the band of half-width 0.005
    let s = gen_punctured_interval(101, 0.5, 0.005).unwrap();
    assert_eq!(s.n(), 100);
    let positions = s.positions().unwrap();
    assert!(positions.iter().all(|x| (x - 0.5).abs() >= 0.005));
    // a grid with no point in the band keeps every point
    assert_eq!(gen_punctured_interval(100, 0.5, 0.005).unwrap().n(), 100);
    let plain = gen_interval(30).unwrap();
    let same = gen_punctured_interval(30, 0.4, 0.0).unwrap();
    assert_eq!(same.n(), 30);
    for i in 0..30 {
        for j in 0..30 {
            assert_eq!(plain.dist(i, j), same.dist(i, j));
        }
    }
    assert!(gen_punctured_interval(20, 0.5, 2.0).is_err());
}

#[test]
fn sphere_sample_is_metric() {
    let s = gen_sphere(60).unwrap();
    assert!((s.total_mass() - 4.0 * PI).abs() < 1e-12);
    for i in 0..60 {
        for j in 0..60 {
            assert!(s.dist(i, j) <= PI + 1e-12);
            assert_eq!(s.dist(i, j), s.dist(j, i));
        }
    }
}

fn write_tmp(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

#[test]
fn load_valid_matrix() {
    let f = write_tmp("0,1,2\n1,0,1\n2,1,0\n");
    let s = load_distance_matrix(f.path(), None).unwrap();
    assert_eq!(s.n(), 3);
    assert!((s.total_mass() - 1.0).abs() < 1e-15);
    let w = write_tmp("1\n2\n3\n");
    let s = load_with_weights_file(f.path(), w.path()).unwrap();
    assert_eq!(s.weights(), &[1.0, 2.0, 3.0]);
}

#[test]
fn load_rejects_asymmetry_and_triangle_violation() {
    let f = write_tmp("0,1,2\n1.5,0,1\n2,1,0\n");
    match load_distance_matrix(f.path(), None) {
        Err(e @ Error::Load(_)) | Err(e @ Error::InvalidArgument(_)) => assert!(e.to_string().contains("(0,1)"), "{e}"),
        other => panic!("expected load error, got {other:?}"),
    }
    let f = write_tmp("0,1,5\n1,0,1\n5,1,0\n");
    let e = load_distance_matrix(f.path(), None).unwrap_err();
    assert!(e.to_string().contains("triple"), "{e}");
}

#[test]
fn permutation_relabels_distances() {
    let s = gen_circle(7, 1.0).unwrap();
    let perm = [3, 1, 4, 0, 6, 5, 2];
    let t = s.permuted(&perm).unwrap();
    for a in 0..7 {
        for b in 0..7 {
            assert_eq!(t.dist(a, b), s.dist(perm[a], perm[b]));
        }
    }
}
