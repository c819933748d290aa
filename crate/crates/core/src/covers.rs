//! Ball covers, tuple partitions of unity, Mayer-Vietoris and Čech checks, slices and
//! the averaging homotopy operator.

use std::collections::BTreeMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cochains::{sort_with_sign, Cochain, CoboundaryOperator};
use crate::cohomology::{rank, BettiReport, Field, IntMatrix, PRIME_A};
use crate::error::{Error, Result};
use crate::hodge::WeightedComplex;
use crate::linalg::Csr;
use crate::neighborhoods::TupleSet;
use crate::space::MetricMeasureSpace;

/// A ball given by center index and radius (open: `dist < radius`).
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

/// A nonempty intersection of big balls.
#[derive(Debug, Clone)]
pub struct Intersection {
    /// Increasing ball indices.
    pub balls: Vec<usize>,
    /// Increasing point indices.
    pub points: Vec<usize>,
    /// Admissible tuples inside the intersection, degrees `0..=top`.
    pub tuples: Vec<Arc<TupleSet>>,
}

impl Intersection {
    pub fn level(&self) -> usize {
        self.balls.len() - 1
    }
}

/// Big balls of radius `eps + 2 eta`, their shrinkings of radius `eps + eta`, and all
/// nonempty intersections up to `max_level + 1` balls.
#[derive(Debug, Clone)]
pub struct CoverSystem {
    pub eps: f64,
    pub eta: f64,
    pub balls: Vec<Ball>,
    pub shrunken: Vec<Ball>,
    pub max_level: usize,
    pub intersections: Vec<Intersection>,
    index: BTreeMap<Vec<usize>, usize>,
    /// For each degree and global tuple, the balls containing it.
    containing: Vec<Vec<Vec<usize>>>,
    space: Arc<MetricMeasureSpace>,
    global: Vec<Arc<TupleSet>>,
}

fn subsets_up_to(set: &[usize], max_size: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(set: &[usize], start: usize, max_size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max_size {
            return;
        }
        for i in start..set.len() {
            cur.push(set[i]);
            rec(set, i + 1, max_size, cur, out);
            cur.pop();
        }
    }
    rec(set, 0, max_size, &mut Vec::new(), out);
}

const MAX_BALLS_PER_POINT: usize = 24;

/// Greedy set cover by open `eta`-balls around sample points, scanning points in index order.
pub fn greedy_centers(space: &MetricMeasureSpace, eta: f64) -> Vec<usize> {
    let n = space.n();
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    for i in 0..n {
        if covered[i] {
            continue;
        }
        let best = (0..n)
            .filter(|&c| space.dist(i, c) < eta)
            .max_by_key(|&c| {
                let gain = (0..n).filter(|&y| !covered[y] && space.dist(c, y) < eta).count();
                (gain, std::cmp::Reverse(c))
            })
            .unwrap_or(i);
        for y in 0..n {
            if space.dist(best, y) < eta {
                covered[y] = true;
            }
        }
        centers.push(best);
    }
    centers.sort_unstable();
    centers.dedup();
    centers
}

/// Builds the cover and materializes intersections with their tuple sets.
///
/// `max_level = None` enumerates every nonempty intersection.
pub fn build_ball_cover(
    complex: &WeightedComplex,
    eps: f64,
    eta: f64,
    centers: &[usize],
    max_level: Option<usize>,
) -> Result<CoverSystem> {
    let space = complex.space().clone();
    let n = space.n();
    if !(eps > 0.0 && eta > 0.0) {
        return Err(Error::InvalidArgument("cover scales must be positive".into()));
    }
    if centers.is_empty() {
        return Err(Error::InvalidArgument("cover needs at least one center".into()));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= n) {
        return Err(Error::InvalidArgument(format!("center {c} out of range")));
    }
    let uncovered: Vec<usize> = (0..n).filter(|&x| centers.iter().all(|&c| space.dist(x, c) >= eta)).collect();
    if !uncovered.is_empty() {
        return Err(Error::Coverage { uncovered });
    }
    let balls: Vec<Ball> = centers.iter().map(|&c| Ball { center: c, radius: eps + 2.0 * eta }).collect();
    let shrunken: Vec<Ball> = centers.iter().map(|&c| Ball { center: c, radius: eps + eta }).collect();

    let top = complex.top();
    let global: Vec<Arc<TupleSet>> = (0..=top).map(|p| complex.tuples(p).clone()).collect();
    let inside = |b: &Ball, t: &[usize]| t.iter().all(|&x| space.dist(x, b.center) < b.radius);

    // every admissible tuple must sit in some shrunken ball
    for set in &global {
        if let Some(t) = set.iter().find(|t| !shrunken.iter().any(|b| inside(b, t))) {
            return Err(Error::AssumptionViolation {
                balls: Vec::new(),
                reason: format!("tuple {t:?} lies in no shrunken ball; the working system is not dominated by the cover"),
            });
        }
    }

    let containing: Vec<Vec<Vec<usize>>> = global
        .iter()
        .map(|set| {
            (0..set.len())
                .into_par_iter()
                .map(|k| (0..balls.len()).filter(|&a| inside(&balls[a], set.get(k))).collect())
                .collect()
        })
        .collect();

    let widest = containing[0].iter().map(|c| c.len()).max().unwrap_or(0);
    let max_level = match max_level {
        Some(l) => l,
        None => {
            if widest > MAX_BALLS_PER_POINT {
                return Err(Error::InvalidArgument(format!(
                    "a point lies in {widest} balls; enumerate intersections with an explicit level cap"
                )));
            }
            widest.saturating_sub(1)
        }
    };

    let mut keys: Vec<Vec<usize>> = Vec::new();
    for c in &containing[0] {
        subsets_up_to(c, max_level + 1, &mut keys);
    }
    keys.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    keys.dedup();
    let index: BTreeMap<Vec<usize>, usize> = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();

    // distribute tuples to the intersections that contain them, preserving basis order
    let mut flat: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); top + 1]; keys.len()];
    let mut subs = Vec::new();
    for (p, set) in global.iter().enumerate() {
        for (k, t) in set.iter().enumerate() {
            subs.clear();
            subsets_up_to(&containing[p][k], max_level + 1, &mut subs);
            for s in &subs {
                if let Some(&id) = index.get(s) {
                    flat[id][p].extend_from_slice(t);
                }
            }
        }
    }
    let intersections = keys
        .into_iter()
        .zip(flat)
        .map(|(balls, per_degree)| {
            let points = per_degree[0].clone();
            let tuples = per_degree
                .into_iter()
                .enumerate()
                .map(|(p, data)| Arc::new(TupleSet::from_flat_sorted(p, data)))
                .collect();
            Intersection { balls, points, tuples }
        })
        .collect();

    Ok(CoverSystem {
        eps,
        eta,
        balls,
        shrunken,
        max_level,
        intersections,
        index,
        containing,
        space,
        global,
    })
}

/// Cover with `eta = eps / 3` and greedily chosen centers.
pub fn default_cover(complex: &WeightedComplex, eps: f64, max_level: Option<usize>) -> Result<CoverSystem> {
    let eta = eps / 3.0;
    let centers = greedy_centers(complex.space(), eta);
    build_ball_cover(complex, eps, eta, &centers, max_level)
}

impl CoverSystem {
    pub fn intersection_id(&self, balls: &[usize]) -> Option<usize> {
        self.index.get(balls).copied()
    }

    /// Intersections made of exactly `level + 1` balls, in order.
    pub fn level(&self, level: usize) -> impl Iterator<Item = (usize, &Intersection)> {
        self.intersections.iter().enumerate().filter(move |(_, i)| i.level() == level)
    }

    /// Balls containing the `k`-th global tuple of degree `p`.
    pub fn containing(&self, p: usize, k: usize) -> &[usize] {
        &self.containing[p][k]
    }

    pub fn global_tuples(&self, p: usize) -> &Arc<TupleSet> {
        &self.global[p]
    }

    /// Distance-based hat: 1 on the shrunken ball, 0 outside the big ball.
    pub fn bump(&self, alpha: usize) -> Vec<f64> {
        let b = self.balls[alpha];
        (0..self.space.n())
            .map(|x| ((b.radius - self.space.dist(x, b.center)) / self.eta).clamp(0.0, 1.0))
            .collect()
    }
}

/// Symmetric tuple functions summing to one, each supported in one big ball.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub degree: usize,
    /// Bump function per ball.
    pub phi: Vec<Vec<f64>>,
    /// `chi[alpha][k]`: value at the `k`-th global tuple of the degree.
    pub chi: Vec<Vec<f64>>,
}

impl PartitionOfUnity {
    /// Telescoped value at any ordered tuple.
    pub fn eval(&self, alpha: usize, tuple: &[usize]) -> f64 {
        let power = |b: usize| tuple.iter().map(|&x| self.phi[b][x]).product::<f64>();
        power(alpha) * (0..alpha).map(|b| 1.0 - power(b)).product::<f64>()
    }

    /// Largest deviation of the partition sum from one over all tuples of the degree.
    pub fn sum_defect(&self) -> f64 {
        let m = self.chi.first().map_or(0, |c| c.len());
        (0..m)
            .map(|k| (self.chi.iter().map(|c| c[k]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn build_partition(cover: &CoverSystem, p: usize) -> Result<PartitionOfUnity> {
    if p >= cover.global.len() {
        return Err(Error::InvalidArgument(format!("degree {p} not materialized in the cover")));
    }
    let phi: Vec<Vec<f64>> = (0..cover.balls.len()).map(|a| cover.bump(a)).collect();
    let set = &cover.global[p];
    let mut pou = PartitionOfUnity { degree: p, phi, chi: Vec::new() };
    let chi_by_tuple: Vec<Vec<f64>> = (0..set.len())
        .into_par_iter()
        .map(|k| {
            let t = set.get(k);
            let mut rest = 1.0;
            (0..cover.balls.len())
                .map(|a| {
                    let power: f64 = t.iter().map(|&x| pou_phi(&pou.phi, a, x)).product();
                    let v = power * rest;
                    rest *= 1.0 - power;
                    v
                })
                .collect()
        })
        .collect();
    pou.chi = (0..cover.balls.len())
        .map(|a| chi_by_tuple.iter().map(|row| row[a]).collect())
        .collect();
    Ok(pou)
}

fn pou_phi(phi: &[Vec<f64>], a: usize, x: usize) -> f64 {
    phi[a][x]
}

/// One row of the Mayer-Vietoris certificate; `q = -1` is the global space.
#[derive(Debug, Clone, Serialize)]
pub struct MvRow {
    pub q: i64,
    pub dim_domain: usize,
    pub rank_in: usize,
    pub dim_kernel: usize,
    pub exact: bool,
}

/// Rank identities and partition-based preimage reconstruction for one degree.
#[derive(Debug, Clone, Serialize)]
pub struct MvCertificate {
    pub schema: u32,
    pub degree: usize,
    pub rows: Vec<MvRow>,
    /// Čech differential squares to zero and kills restrictions, in integers.
    pub square_zero: bool,
    /// `max |delta G - F| / max |F|` over the tested levels.
    pub reconstruction_residual: f64,
    /// Same with the partition functions replaced by ones.
    pub control_residual: f64,
    pub exact: bool,
}

struct Level {
    ids: Vec<usize>,
    offsets: BTreeMap<usize, usize>,
    dim: usize,
}

fn level_layout(cover: &CoverSystem, q: usize, p: usize) -> Level {
    let mut offsets = BTreeMap::new();
    let mut ids = Vec::new();
    let mut dim = 0;
    for (id, inter) in cover.level(q) {
        offsets.insert(id, dim);
        ids.push(id);
        dim += inter.tuples[p].len();
    }
    Level { ids, offsets, dim }
}

fn restriction_matrix(cover: &CoverSystem, p: usize, l0: &Level) -> IntMatrix {
    let global = &cover.global[p];
    let mut m = IntMatrix::new(global.len());
    for &id in &l0.ids {
        for t in cover.intersections[id].tuples[p].iter() {
            m.push_row(vec![(global.index_of(t).expect("restricted tuple is global"), 1)]);
        }
    }
    m
}

fn cech_matrix(cover: &CoverSystem, p: usize, lower: &Level, upper: &Level) -> IntMatrix {
    let mut m = IntMatrix::new(lower.dim);
    let mut face = Vec::new();
    for &id in &upper.ids {
        let inter = &cover.intersections[id];
        for t in inter.tuples[p].iter() {
            let mut row = Vec::with_capacity(inter.balls.len());
            for i in 0..inter.balls.len() {
                face.clear();
                face.extend(inter.balls.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &b)| b));
                let fid = cover.index[&face];
                let pos = cover.intersections[fid].tuples[p].index_of(t).expect("tuple lies in the larger set");
                row.push((lower.offsets[&fid] + pos, if i % 2 == 0 { 1 } else { -1 }));
            }
            m.push_row(row);
        }
    }
    m
}

fn int_apply(m: &IntMatrix, x: &[f64]) -> Vec<f64> {
    m.entries.iter().map(|r| r.iter().map(|&(c, v)| v as f64 * x[c]).sum()).collect()
}

/// Value of `F_{alpha, rest}` at a tuple, with the index-swap sign; zero if `alpha` repeats.
fn swapped_value(cover: &CoverSystem, level: &Level, f: &[f64], p: usize, alpha: usize, rest: &[usize], t: &[usize]) -> Option<f64> {
    let mut key = Vec::with_capacity(rest.len() + 1);
    key.push(alpha);
    key.extend_from_slice(rest);
    let (sorted, sign) = sort_with_sign(&key)?;
    let id = cover.intersection_id(&sorted)?;
    let pos = cover.intersections[id].tuples[p].index_of(t)?;
    Some(sign * f[level.offsets[&id] + pos])
}

/// Exactness of the Mayer-Vietoris row in degree `p` for Čech degrees up to `q_max`.
pub fn mayer_vietoris_check(
    cover: &CoverSystem,
    pou: &PartitionOfUnity,
    q_max: usize,
    seed: u64,
) -> Result<MvCertificate> {
    let p = pou.degree;
    if q_max + 1 > cover.max_level {
        return Err(Error::InvalidArgument(format!(
            "q_max = {q_max} needs intersections of {} balls; cover built with {}",
            q_max + 2,
            cover.max_level + 1
        )));
    }
    let levels: Vec<Level> = (0..=q_max + 1).map(|q| level_layout(cover, q, p)).collect();
    let r = restriction_matrix(cover, p, &levels[0]);
    let cech: Vec<IntMatrix> = (0..=q_max).map(|q| cech_matrix(cover, p, &levels[q], &levels[q + 1])).collect();
    let field = Field::Prime(PRIME_A);
    let rank_r = rank(&r, field);
    let ranks: Vec<usize> = cech.par_iter().map(|m| rank(m, field)).collect();
    let d_global = cover.global[p].len();

    let mut rows = vec![MvRow {
        q: -1,
        dim_domain: d_global,
        rank_in: 0,
        dim_kernel: d_global - rank_r,
        exact: rank_r == d_global,
    }];
    for q in 0..=q_max {
        let rank_in = if q == 0 { rank_r } else { ranks[q - 1] };
        let dim_kernel = levels[q].dim - ranks[q];
        rows.push(MvRow { q: q as i64, dim_domain: levels[q].dim, rank_in, dim_kernel, exact: dim_kernel == rank_in });
    }
    let mut square_zero = cech[0].mul(&r).is_zero();
    for q in 1..=q_max {
        square_zero &= cech[q].mul(&cech[q - 1]).is_zero();
    }

    // preimages through the partition: G = sum_alpha chi_alpha F_{alpha ...}
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let global = &cover.global[p];
    let (mut resid, mut control): (f64, f64) = (0.0, 0.0);
    for q in -1i64..(q_max as i64) {
        let (f, target_level) = if q < 0 {
            let k: Vec<f64> = (0..d_global).map(|_| rng.gen::<f64>() - 0.5).collect();
            (int_apply(&r, &k), 0usize)
        } else {
            let h: Vec<f64> = (0..levels[q as usize].dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            (int_apply(&cech[q as usize], &h), q as usize + 1)
        };
        let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let upper = &levels[target_level];
        for use_chi in [true, false] {
            let g: Vec<f64> = if q < 0 {
                global
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        cover.containing[p][k]
                            .iter()
                            .map(|&a| {
                                let w = if use_chi { pou.chi[a][k] } else { 1.0 };
                                w * swapped_value(cover, upper, &f, p, a, &[], t).unwrap_or(0.0)
                            })
                            .sum()
                    })
                    .collect()
            } else {
                let lower = &levels[q as usize];
                let mut g = vec![0.0; lower.dim];
                for &id in &lower.ids {
                    let inter = &cover.intersections[id];
                    for (pos, t) in inter.tuples[p].iter().enumerate() {
                        let k = global.index_of(t).expect("global tuple");
                        g[lower.offsets[&id] + pos] = cover.containing[p][k]
                            .iter()
                            .map(|&a| {
                                let w = if use_chi { pou.chi[a][k] } else { 1.0 };
                                w * swapped_value(cover, upper, &f, p, a, &inter.balls, t).unwrap_or(0.0)
                            })
                            .sum();
                    }
                }
                g
            };
            let dg = if q < 0 { int_apply(&r, &g) } else { int_apply(&cech[q as usize], &g) };
            let err = dg.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / fmax;
            if use_chi {
                resid = resid.max(err);
            } else {
                control = control.max(err);
            }
        }
    }
    let exact = square_zero && rows.iter().all(|r| r.exact);
    Ok(MvCertificate { schema: 1, degree: p, rows, square_zero, reconstruction_residual: resid, control_residual: control, exact })
}

/// Connected components of each intersection under admissible pairs.
fn components(inter: &Intersection) -> (Vec<usize>, usize) {
    let pts = &inter.points;
    let mut uf = UnionFind::<usize>::new(pts.len());
    if inter.tuples.len() > 1 {
        for t in inter.tuples[1].iter() {
            let a = pts.binary_search(&t[0]).expect("point in intersection");
            let b = pts.binary_search(&t[1]).expect("point in intersection");
            uf.union(a, b);
        }
    }
    let labels = uf.into_labeling();
    let mut relabel = BTreeMap::new();
    let comp: Vec<usize> = labels
        .iter()
        .map(|&l| {
            let next = relabel.len();
            *relabel.entry(l).or_insert(next)
        })
        .collect();
    (comp, relabel.len())
}

/// Čech cohomology of the cover with locally constant coefficients, degrees `0..=q_max`.
pub fn cech_nerve_betti(cover: &CoverSystem, q_max: usize) -> Result<BettiReport> {
    if q_max + 1 > cover.max_level {
        return Err(Error::InvalidArgument(format!(
            "nerve degree {q_max} needs intersections of {} balls",
            q_max + 2
        )));
    }
    let comps: Vec<(Vec<usize>, usize)> = cover.intersections.par_iter().map(components).collect();
    let mut offsets = vec![0usize; cover.intersections.len()];
    let mut dims = vec![0usize; q_max + 2];
    for (id, inter) in cover.intersections.iter().enumerate() {
        let l = inter.level();
        if l <= q_max + 1 {
            offsets[id] = dims[l];
            dims[l] += comps[id].1;
        }
    }
    let mats: Vec<IntMatrix> = (0..=q_max)
        .map(|q| {
            let mut m = IntMatrix::new(dims[q]);
            let mut face = Vec::new();
            for (id, inter) in cover.level(q + 1) {
                let (labels, count) = &comps[id];
                for c in 0..*count {
                    let rep = inter.points[labels.iter().position(|&l| l == c).expect("component has a point")];
                    let mut row = Vec::new();
                    for i in 0..inter.balls.len() {
                        face.clear();
                        face.extend(inter.balls.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &b)| b));
                        let fid = cover.index[&face];
                        let fpos = cover.intersections[fid].points.binary_search(&rep).expect("point in face");
                        row.push((offsets[fid] + comps[fid].0[fpos], if i % 2 == 0 { 1 } else { -1 }));
                    }
                    m.push_row(row);
                }
            }
            m
        })
        .collect();
    let ranks: Vec<usize> = mats.par_iter().map(|m| rank(m, Field::Prime(PRIME_A))).collect();
    let betti = (0..=q_max)
        .map(|q| dims[q] - ranks[q] - if q == 0 { 0 } else { ranks[q - 1] })
        .collect();
    let mut parameters = BTreeMap::new();
    parameters.insert("eps".to_string(), serde_json::json!(cover.eps));
    parameters.insert("eta".to_string(), serde_json::json!(cover.eta));
    parameters.insert("balls".to_string(), serde_json::json!(cover.balls.len()));
    Ok(BettiReport {
        schema: 1,
        degrees: (0..=q_max).collect(),
        betti,
        method: "cech-nerve".into(),
        field: Some(Field::Prime(PRIME_A).label()),
        parameters,
    })
}

/// Averaging set of an intersection with its mass.
#[derive(Debug, Clone, Serialize)]
pub struct HomotopyOperator {
    pub intersection: usize,
    pub balls: Vec<usize>,
    pub w: Vec<usize>,
    pub mass: f64,
    /// Highest degree for which the slice condition was verified.
    pub max_degree: usize,
}

/// Points `t` of the intersection such that prepending `t` to any admissible tuple of
/// degree `< max_degree` inside the intersection stays admissible.
pub fn build_slice_and_psi(cover: &CoverSystem, intersection: usize, max_degree: usize) -> Result<HomotopyOperator> {
    let inter = cover
        .intersections
        .get(intersection)
        .ok_or_else(|| Error::InvalidArgument(format!("no intersection {intersection}")))?;
    if max_degree == 0 || max_degree >= inter.tuples.len() {
        return Err(Error::InvalidArgument(format!(
            "slice degree must lie in 1..={}",
            inter.tuples.len() - 1
        )));
    }
    let mut buf = Vec::new();
    let w: Vec<usize> = inter
        .points
        .iter()
        .copied()
        .filter(|&t| {
            (1..=max_degree).all(|p| {
                inter.tuples[p - 1].iter().all(|x| {
                    if x.contains(&t) {
                        return true;
                    }
                    buf.clear();
                    buf.extend_from_slice(x);
                    let at = buf.partition_point(|&v| v < t);
                    buf.insert(at, t);
                    inter.tuples[p].contains(&buf)
                })
            })
        })
        .collect();
    if w.is_empty() {
        return Err(Error::AssumptionViolation {
            balls: inter.balls.clone(),
            reason: "no point satisfies the slice condition at this scale".into(),
        });
    }
    let mass = w.iter().map(|&t| cover.space.weight(t)).sum();
    Ok(HomotopyOperator { intersection, balls: inter.balls.clone(), w, mass, max_degree })
}

/// Matrix of `Psi` from degree `p` to degree `p - 1` on the intersection.
pub fn psi_matrix(cover: &CoverSystem, hom: &HomotopyOperator, p: usize) -> Result<Csr> {
    if p == 0 || p > hom.max_degree {
        return Err(Error::InvalidArgument(format!("Psi is defined for degrees 1..={}", hom.max_degree)));
    }
    let inter = &cover.intersections[hom.intersection];
    let (lower, upper) = (&inter.tuples[p - 1], &inter.tuples[p]);
    let mut trip = Vec::new();
    let mut buf = Vec::new();
    for (r, x) in lower.iter().enumerate() {
        for &t in &hom.w {
            if x.contains(&t) {
                continue;
            }
            let before = x.partition_point(|&v| v < t);
            buf.clear();
            buf.extend_from_slice(x);
            buf.insert(before, t);
            let c = upper.index_of(&buf).expect("slice condition guarantees admissibility");
            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
            trip.push((r, c, sign * cover.space.weight(t) / hom.mass));
        }
    }
    Ok(Csr::from_triplets(lower.len(), upper.len(), trip))
}

/// `(Psi F)(x) = (1/mu(W)) sum_{t in W} w_t F(t, x)`.
pub fn psi_apply(cover: &CoverSystem, hom: &HomotopyOperator, f: &Cochain) -> Result<Cochain> {
    let p = f.degree();
    let inter = &cover.intersections[hom.intersection];
    if **f.tuples() != *inter.tuples[p] {
        return Err(Error::InvalidArgument("cochain does not live on the intersection".into()));
    }
    let m = psi_matrix(cover, hom, p)?;
    Cochain::new(inter.tuples[p - 1].clone(), m.matvec(&f.values))
}

/// Residuals of the homotopy identity and the Poincaré lemma on one intersection.
#[derive(Debug, Clone, Serialize)]
pub struct HomotopyCheck {
    pub intersection: usize,
    pub balls: Vec<usize>,
    pub w_size: usize,
    /// `max |(Psi delta + delta Psi) - I|` per degree `1..=max_degree - 1`.
    pub identity_residual: Vec<f64>,
    /// `max |delta Psi F - F|` for closed random `F`, per degree.
    pub poincare_residual: Vec<f64>,
}

/// Checks the homotopy identity in degrees `1..=p_max` on an intersection.
pub fn check_homotopy(cover: &CoverSystem, intersection: usize, p_max: usize, seed: u64) -> Result<HomotopyCheck> {
    let hom = build_slice_and_psi(cover, intersection, p_max + 1)?;
    let inter = &cover.intersections[intersection];
    let ops: Vec<CoboundaryOperator> = (0..=p_max)
        .map(|p| CoboundaryOperator::build(inter.tuples[p].clone(), inter.tuples[p + 1].clone()))
        .collect::<Result<_>>()?;
    let psis: Vec<Csr> = (1..=p_max + 1).map(|p| psi_matrix(cover, &hom, p)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ intersection as u64);
    let mut identity_residual = Vec::new();
    let mut poincare_residual = Vec::new();
    for p in 1..=p_max {
        let n = inter.tuples[p].len();
        let mut worst: f64 = 0.0;
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let up = psis[p].matvec(&ops[p].apply_values(&e));
            let down = ops[p - 1].apply_values(&psis[p - 1].matvec(&e));
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((up[i] + down[i] - target).abs());
            }
            e[j] = 0.0;
        }
        identity_residual.push(worst);
        let g: Vec<f64> = (0..inter.tuples[p - 1].len()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let f = ops[p - 1].apply_values(&g);
        let back = ops[p - 1].apply_values(&psis[p - 1].matvec(&f));
        poincare_residual.push(back.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    Ok(HomotopyCheck { intersection, balls: inter.balls.clone(), w_size: hom.w.len(), identity_residual, poincare_residual })
}

/// Harmonic, exact and nerve Betti numbers against a reference.
#[derive(Debug, Clone, Serialize)]
pub struct DeRhamReport {
    pub schema: u32,
    pub reference: Vec<usize>,
    pub harmonic: Vec<usize>,
    pub exact: Vec<usize>,
    pub nerve: Option<Vec<usize>>,
    pub uncertain: bool,
    pub all_agree: bool,
}

/// Betti numbers of the manifold sampled by a generator, degrees `0..=p_max`.
pub fn reference_betti(space: &MetricMeasureSpace, p_max: usize) -> Option<Vec<usize>> {
    let base: Vec<usize> = match space.meta().generator.as_str() {
        "circle" => vec![1, 1],
        "interval" => vec![1],
        "sphere" => vec![1, 0, 1],
        "two_components" => vec![2],
        _ => return None,
    };
    Some((0..=p_max).map(|p| base.get(p).copied().unwrap_or(0)).collect())
}

/// Compares the three computations with the generator's reference Betti numbers.
pub fn derham_recovery_report(
    complex: &WeightedComplex,
    p_max: usize,
    cover: Option<&CoverSystem>,
) -> Result<DeRhamReport> {
    let reference = reference_betti(complex.space(), p_max)
        .ok_or_else(|| Error::Unsupported("space is not a sampled manifold generator".into()))?;
    let analysis = crate::hodge::analyze(complex, p_max, crate::hodge::TolPolicy::Default)?;
    let nerve = match cover {
        Some(c) => Some(cech_nerve_betti(c, p_max)?.betti),
        None => None,
    };
    let harmonic = analysis.harmonic_dims();
    let exact = analysis.betti.betti.clone();
    let uncertain = analysis.harmonic.iter().any(|h| h.uncertain);
    let all_agree = harmonic == reference && exact == reference && nerve.as_ref().map_or(true, |n| *n == reference);
    Ok(DeRhamReport { schema: 1, reference, harmonic, exact, nerve, uncertain, all_agree })
}
