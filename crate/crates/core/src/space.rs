//! Finite metric measure spaces: generators, loaders and the shared validator.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const TRIANGLE_TOL: f64 = 1e-12;
const MIN_SEPARATION: f64 = 1e-9;

/// Generator name, numeric parameters and regularity dimension of a space.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SpaceMeta {
    pub generator: String,
    pub params: BTreeMap<String, f64>,
    /// Regularity dimension of the sampled object, when known.
    pub dimension: Option<f64>,
}

impl SpaceMeta {
    fn new(generator: &str, params: &[(&str, f64)], dimension: Option<f64>) -> Self {
        SpaceMeta {
            generator: generator.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            dimension,
        }
    }
}

/// A finite point set with a metric and strictly positive point masses.
#[derive(Debug, Clone)]
pub struct MetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
    /// Coordinates on the real line for one-dimensional generators.
    positions: Option<Vec<f64>>,
    meta: SpaceMeta,
    warnings: Vec<String>,
}

impl MetricMeasureSpace {
    /// Builds and validates a space from a row-major distance matrix.
    pub fn new(dist: Vec<f64>, weights: Vec<f64>, meta: SpaceMeta) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidArgument("space must contain at least one point".into()));
        }
        if dist.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        let mut space = MetricMeasureSpace {
            n,
            dist,
            weights,
            labels: None,
            positions: None,
            meta,
            warnings: Vec::new(),
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.n;
        for (i, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Load(format!("weight {i} is not a positive finite number: {w}")));
            }
        }
        let mut min_sep = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let d = self.dist[i * n + j];
                if !d.is_finite() {
                    return Err(Error::Load(format!("non-finite distance at ({i},{j})")));
                }
                if d < 0.0 {
                    return Err(Error::Load(format!("negative distance at ({i},{j})")));
                }
                if i == j {
                    if d != 0.0 {
                        return Err(Error::Load(format!("nonzero diagonal entry at ({i},{i})")));
                    }
                    continue;
                }
                if d == 0.0 {
                    return Err(Error::Load(format!("distinct points ({i},{j}) at distance zero")));
                }
                let dt = self.dist[j * n + i];
                if (d - dt).abs() > SYMMETRY_TOL * d.abs().max(1.0) {
                    return Err(Error::Load(format!("asymmetric distance at ({i},{j}): {d} vs {dt}")));
                }
                min_sep = min_sep.min(d);
            }
        }
        let dist = &self.dist;
        let violation = (0..n).into_par_iter().find_map_first(|i| {
            for j in 0..n {
                let dij = dist[i * n + j];
                for k in 0..n {
                    let bound = dist[i * n + k] + dist[k * n + j];
                    if dij > bound + TRIANGLE_TOL * bound.max(1.0) {
                        return Some((i, j, k));
                    }
                }
            }
            None
        });
        if let Some((i, j, k)) = violation {
            return Err(Error::Load(format!(
                "triangle inequality violated for triple ({i},{k},{j}): dist[{i}][{j}] > dist[{i}][{k}] + dist[{k}][{j}]"
            )));
        }
        if min_sep < MIN_SEPARATION {
            self.warnings.push(format!(
                "minimum pairwise separation {min_sep:e} is below {MIN_SEPARATION:e}; singular kernels will be badly conditioned"
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row `i` of the distance matrix.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn positions(&self) -> Option<&[f64]> {
        self.positions.as_deref()
    }

    pub fn meta(&self) -> &SpaceMeta {
        &self.meta
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest nearest-neighbour distance; the spacing of a uniform grid.
    pub fn mesh_width(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| j != i)
                    .map(|j| self.dist(i, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidArgument("label count does not match point count".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The same space with weights multiplied by `c`.
    pub fn scaled_weights(&self, c: f64) -> Result<Self> {
        let weights = self.weights.iter().map(|w| w * c).collect();
        let mut out = MetricMeasureSpace::new(self.dist.clone(), weights, self.meta.clone())?;
        out.positions = self.positions.clone();
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Relabels points: new point `k` is old point `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the point indices".into()));
        }
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                dist[a * n + b] = self.dist(perm[a], perm[b]);
            }
        }
        let weights = perm.iter().map(|&p| self.weights[p]).collect();
        let mut out = MetricMeasureSpace::new(dist, weights, self.meta.clone())?;
        out.positions = self.positions.as_ref().map(|x| perm.iter().map(|&p| x[p]).collect());
        out.labels = self.labels.as_ref().map(|l| perm.iter().map(|&p| l[p].clone()).collect());
        Ok(out)
    }

    /// Index of the point closest to position `x` (one-dimensional spaces only).
    pub fn nearest_position(&self, x: f64) -> Option<usize> {
        let pos = self.positions.as_ref()?;
        let mut best = 0;
        for (i, p) in pos.iter().enumerate() {
            if (p - x).abs() < (pos[best] - x).abs() {
                best = i;
            }
        }
        Some(best)
    }
}

fn line_space(positions: Vec<f64>, weights: Vec<f64>, meta: SpaceMeta) -> Result<MetricMeasureSpace> {
    let n = positions.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (positions[i] - positions[j]).abs();
        }
    }
    let mut space = MetricMeasureSpace::new(dist, weights, meta)?;
    space.positions = Some(positions);
    Ok(space)
}

/// `n` equally spaced points on a circle of the given radius with the arc-length metric.
pub fn gen_circle(n: usize, radius: f64) -> Result<MetricMeasureSpace> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("circle needs n >= 3, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument("circle radius must be positive".into()));
    }
    let step = radius * 2.0 * PI / n as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = i.abs_diff(j);
            dist[i * n + j] = step * k.min(n - k) as f64;
        }
    }
    let weights = vec![2.0 * PI * radius / n as f64; n];
    let meta = SpaceMeta::new("circle", &[("n", n as f64), ("radius", radius)], Some(1.0));
    MetricMeasureSpace::new(dist, weights, meta)
}

/// `n` equally spaced points on [0, 1] including both endpoints, weights `1/n`.
pub fn gen_interval(n: usize) -> Result<MetricMeasureSpace> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("interval needs n >= 2, got {n}")));
    }
    let positions: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let meta = SpaceMeta::new("interval", &[("n", n as f64)], Some(1.0));
    line_space(positions, vec![1.0 / n as f64; n], meta)
}

/// Two unit intervals on the line, the second starting `gap` after the first ends.
pub fn gen_two_components(n_each: usize, gap: f64) -> Result<MetricMeasureSpace> {
    if n_each < 2 {
        return Err(Error::InvalidArgument("each component needs at least 2 points".into()));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidArgument("gap must be positive".into()));
    }
    let unit: Vec<f64> = (0..n_each).map(|i| i as f64 / (n_each - 1) as f64).collect();
    let positions: Vec<f64> = unit.iter().copied().chain(unit.iter().map(|x| x + 1.0 + gap)).collect();
    let meta = SpaceMeta::new("two_components", &[("n_each", n_each as f64), ("gap", gap)], Some(1.0));
    line_space(positions, vec![1.0 / n_each as f64; 2 * n_each], meta)
}

/// Interval grid of `n` points with those strictly inside `(c - r, c + r)` removed.
pub fn gen_punctured_interval(n: usize, hole_center: f64, hole_radius: f64) -> Result<MetricMeasureSpace> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("interval needs n >= 2, got {n}")));
    }
    if !(hole_center > 0.0 && hole_center < 1.0) {
        return Err(Error::InvalidArgument("hole center must lie in (0, 1)".into()));
    }
    if !(hole_radius >= 0.0 && hole_radius.is_finite()) {
        return Err(Error::InvalidArgument("hole radius must be nonnegative".into()));
    }
    let positions: Vec<f64> = (0..n)
        .map(|i| i as f64 / (n - 1) as f64)
        .filter(|x| (x - hole_center).abs() >= hole_radius)
        .collect();
    if positions.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "hole removes too many points ({} remain)",
            positions.len()
        )));
    }
    let k = positions.len();
    let meta = SpaceMeta::new(
        "punctured_interval",
        &[("n", n as f64), ("hole_center", hole_center), ("hole_radius", hole_radius)],
        Some(1.0),
    );
    line_space(positions, vec![1.0 / n as f64; k], meta)
}

/// Fibonacci sample of the unit sphere with geodesic distances and weights `4π/n`.
pub fn gen_sphere(n: usize) -> Result<MetricMeasureSpace> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("sphere needs n >= 4, got {n}")));
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dot: f64 = (0..3).map(|k| pts[i][k] * pts[j][k]).sum();
            // atan2 form is accurate for nearby points
            let cx = pts[i][1] * pts[j][2] - pts[i][2] * pts[j][1];
            let cy = pts[i][2] * pts[j][0] - pts[i][0] * pts[j][2];
            let cz = pts[i][0] * pts[j][1] - pts[i][1] * pts[j][0];
            let d = (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let meta = SpaceMeta::new("sphere", &[("n", n as f64)], Some(2.0));
    MetricMeasureSpace::new(dist, vec![4.0 * PI / n as f64; n], meta)
}

fn parse_float(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Load(format!("{what}: cannot parse {:?} as a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Load(format!("{what}: non-finite value {v}")));
    }
    Ok(v)
}

/// Parses a comma-separated square distance matrix.
pub fn parse_distance_matrix(text: &str) -> Result<(usize, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(ln, l)| {
            l.split(',')
                .enumerate()
                .map(|(c, s)| parse_float(s, &format!("line {} column {}", ln + 1, c + 1)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Load("empty distance matrix".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Load(format!("row {i} has {} entries, expected {n}", r.len())));
    }
    Ok((n, rows.into_iter().flatten().collect()))
}

/// Parses a weights sidecar: one number per line.
pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(ln, l)| parse_float(l, &format!("weights line {}", ln + 1)))
        .collect()
}

/// Loads a distance-matrix file; weights default to `1/n`.
pub fn load_distance_matrix(path: &Path, weights: Option<Vec<f64>>) -> Result<MetricMeasureSpace> {
    let text = std::fs::read_to_string(path)?;
    let (n, dist) = parse_distance_matrix(&text)?;
    let weights = match weights {
        Some(w) if w.len() != n => {
            return Err(Error::Load(format!("{} weights given for {n} points", w.len())))
        }
        Some(w) => w,
        None => vec![1.0 / n as f64; n],
    };
    let meta = SpaceMeta::new("file", &[("n", n as f64)], None);
    MetricMeasureSpace::new(dist, weights, meta)
}

/// Loads a distance matrix together with a weights sidecar file.
pub fn load_with_weights_file(path: &Path, weights_path: &Path) -> Result<MetricMeasureSpace> {
    let w = parse_weights(&std::fs::read_to_string(weights_path)?)?;
    load_distance_matrix(path, Some(w))
}
