#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use nlhodge::space::{MetricMeasureSpace, SpaceMeta};

pub fn meta(name: &str) -> SpaceMeta {
    SpaceMeta { generator: name.into(), params: BTreeMap::new(), dimension: None }
}

/// Points on the real line with the given weights.
pub fn line(points: &[f64], weights: &[f64]) -> MetricMeasureSpace {
    let n = points.len();
    let dist = (0..n * n).map(|k| (points[k / n] - points[k % n]).abs()).collect();
    MetricMeasureSpace::new(dist, weights.to_vec(), meta("line")).unwrap()
}

/// All strictly increasing `k`-subsets of `0..n`, lexicographic.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn brute_rips(s: &MetricMeasureSpace, eps: f64, p: usize) -> Vec<Vec<usize>> {
    subsets(s.n(), p + 1)
        .into_iter()
        .filter(|t| t.iter().all(|&a| t.iter().all(|&b| a == b || s.dist(a, b) < eps)))
        .collect()
}

pub fn brute_hausdorff(s: &MetricMeasureSpace, eps: f64, p: usize) -> Vec<Vec<usize>> {
    subsets(s.n(), p + 1)
        .into_iter()
        .filter(|t| (0..s.n()).any(|y| t.iter().all(|&x| s.dist(x, y) <= eps)))
        .collect()
}

/// Dense signed coboundary between two lists of sorted tuples.
pub fn dense_coboundary(lower: &[Vec<usize>], upper: &[Vec<usize>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(upper.len(), lower.len());
    for (r, t) in upper.iter().enumerate() {
        for i in 0..t.len() {
            let face: Vec<usize> = t.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &v)| v).collect();
            let c = lower.iter().position(|l| *l == face).expect("face present");
            m[(r, c)] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    m
}

/// Numerical rank from singular values.
pub fn dense_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    sv.iter().filter(|&&s| s > top * 1e-10 * m.nrows().max(m.ncols()) as f64).count()
}

/// Betti numbers `0..=p_max` from dense ranks of tuple lists for degrees `0..=p_max+1`.
pub fn dense_betti(levels: &[Vec<Vec<usize>>], p_max: usize) -> Vec<usize> {
    let ranks: Vec<usize> = (0..=p_max).map(|p| dense_rank(&dense_coboundary(&levels[p], &levels[p + 1]))).collect();
    (0..=p_max).map(|p| levels[p].len() - ranks[p] - if p == 0 { 0 } else { ranks[p - 1] }).collect()
}

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    pub fn signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    pub fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.signed()).collect()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_f64() * n as f64) as usize % n
    }
}
