//! Systems of diagonal neighbourhoods and enumeration of admissible sorted tuples.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// Admissibility rule for tuples of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeighborhoodSystem {
    /// Every tuple is admissible.
    Full,
    /// Maximum pairwise distance below `eps` (or at most `eps` when `closed`).
    Rips { eps: f64, closed: bool },
    /// Some sample point lies within `eps` of every entry.
    Hausdorff { eps: f64 },
    /// The tuple lies inside one of the given point sets.
    Cover { sets: Vec<Vec<usize>> },
}

impl NeighborhoodSystem {
    pub fn rips(eps: f64) -> Self {
        NeighborhoodSystem::Rips { eps, closed: false }
    }

    pub fn hausdorff(eps: f64) -> Self {
        NeighborhoodSystem::Hausdorff { eps }
    }

    pub fn scale(&self) -> Option<f64> {
        match self {
            NeighborhoodSystem::Rips { eps, .. } | NeighborhoodSystem::Hausdorff { eps } => Some(*eps),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NeighborhoodSystem::Full => "full",
            NeighborhoodSystem::Rips { .. } => "rips",
            NeighborhoodSystem::Hausdorff { .. } => "hausdorff",
            NeighborhoodSystem::Cover { .. } => "cover",
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, NeighborhoodSystem::Full)
    }

    fn validate(&self, space: &MetricMeasureSpace) -> Result<()> {
        match self {
            NeighborhoodSystem::Rips { eps, .. } | NeighborhoodSystem::Hausdorff { eps } => {
                if !(*eps > 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidArgument(format!("scale must be positive, got {eps}")));
                }
            }
            NeighborhoodSystem::Cover { sets } => {
                if let Some(&i) = sets.iter().flatten().find(|&&i| i >= space.n()) {
                    return Err(Error::InvalidArgument(format!("cover set mentions point {i} out of range")));
                }
            }
            NeighborhoodSystem::Full => {}
        }
        Ok(())
    }

    /// Whether the point set (entries may repeat) is admissible.
    pub fn is_admissible(&self, space: &MetricMeasureSpace, points: &[usize]) -> bool {
        match self {
            NeighborhoodSystem::Full => true,
            NeighborhoodSystem::Rips { eps, closed } => points.iter().enumerate().all(|(a, &x)| {
                points[a + 1..].iter().all(|&y| {
                    let d = space.dist(x, y);
                    x == y || d < *eps || (*closed && d <= *eps)
                })
            }),
            NeighborhoodSystem::Hausdorff { eps } => {
                (0..space.n()).any(|y| points.iter().all(|&x| space.dist(x, y) <= *eps))
            }
            NeighborhoodSystem::Cover { sets } => {
                sets.iter().any(|s| points.iter().all(|x| s.contains(x)))
            }
        }
    }
}

/// Strictly increasing tuples of one degree in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    degree: usize,
    data: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TupleSetJson {
    degree: usize,
    tuples: Vec<Vec<usize>>,
}

impl TupleSet {
    pub fn empty(degree: usize) -> Self {
        TupleSet { degree, data: Vec::new() }
    }

    /// Builds a tuple set from arbitrary tuples; each must be strictly increasing.
    pub fn from_tuples(degree: usize, tuples: Vec<Vec<usize>>) -> Result<Self> {
        let mut tuples = tuples;
        for t in &tuples {
            if t.len() != degree + 1 {
                return Err(Error::InvalidArgument(format!("tuple {t:?} has wrong length for degree {degree}")));
            }
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("tuple {t:?} is not strictly increasing")));
            }
        }
        tuples.sort();
        tuples.dedup();
        Ok(TupleSet { degree, data: tuples.into_iter().flatten().collect() })
    }

    pub(crate) fn from_flat_sorted(degree: usize, data: Vec<usize>) -> Self {
        debug_assert_eq!(data.len() % (degree + 1), 0);
        TupleSet { degree, data }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn width(&self) -> usize {
        self.degree + 1
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> &[usize] {
        let w = self.width();
        &self.data[k * w..(k + 1) * w]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.data.chunks_exact(self.width())
    }

    /// Basis position of a sorted tuple.
    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.len() != self.width() {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(tuple) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.index_of(tuple).is_some()
    }

    /// Tuples whose entries all satisfy `keep`.
    pub fn restrict(&self, keep: &[bool]) -> TupleSet {
        let data = self
            .iter()
            .filter(|t| t.iter().all(|&i| keep[i]))
            .flatten()
            .copied()
            .collect();
        TupleSet { degree: self.degree, data }
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.iter().map(|t| t.to_vec()).collect()
    }

    /// Stable content hash used to tie cochain exports to their basis.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.degree as u64).to_le_bytes());
        for &i in &self.data {
            h.update((i as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TupleSetJson { degree: self.degree, tuples: self.to_vecs() })
            .expect("tuple set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: TupleSetJson =
            serde_json::from_str(text).map_err(|e| Error::Load(format!("tuple set JSON: {e}")))?;
        TupleSet::from_tuples(j.degree, j.tuples)
    }
}

/// Bitset over sample points (or cover sets) used as admissibility witnesses.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn any(&self) -> bool {
        self.0.iter().any(|&w| w != 0)
    }
}

enum Rule {
    Full,
    Pairwise(Vec<Vec<bool>>),
    Witness(Vec<Bits>),
}

fn build_rule(space: &MetricMeasureSpace, system: &NeighborhoodSystem) -> Rule {
    let n = space.n();
    match system {
        NeighborhoodSystem::Full => Rule::Full,
        NeighborhoodSystem::Rips { eps, closed } => Rule::Pairwise(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let d = space.dist(i, j);
                            i != j && (d < *eps || (*closed && d <= *eps))
                        })
                        .collect()
                })
                .collect(),
        ),
        NeighborhoodSystem::Hausdorff { eps } => Rule::Witness(
            (0..n)
                .map(|i| {
                    let mut b = Bits::new(n);
                    for y in 0..n {
                        if space.dist(i, y) <= *eps {
                            b.set(y);
                        }
                    }
                    b
                })
                .collect(),
        ),
        NeighborhoodSystem::Cover { sets } => Rule::Witness(
            (0..n)
                .map(|i| {
                    let mut b = Bits::new(sets.len());
                    for (s, set) in sets.iter().enumerate() {
                        if set.contains(&i) {
                            b.set(s);
                        }
                    }
                    b
                })
                .collect(),
        ),
    }
}

fn dfs(rule: &Rule, n: usize, p_max: usize, tuple: &mut Vec<usize>, wit: Option<&Bits>, out: &mut [Vec<usize>]) {
    let p = tuple.len() - 1;
    out[p].extend_from_slice(tuple);
    if p == p_max {
        return;
    }
    let last = *tuple.last().expect("nonempty");
    for j in (last + 1)..n {
        match rule {
            Rule::Full => {
                tuple.push(j);
                dfs(rule, n, p_max, tuple, None, out);
                tuple.pop();
            }
            Rule::Pairwise(adj) => {
                if tuple.iter().all(|&x| adj[x][j]) {
                    tuple.push(j);
                    dfs(rule, n, p_max, tuple, None, out);
                    tuple.pop();
                }
            }
            Rule::Witness(w) => {
                let next = wit.expect("witness state").and(&w[j]);
                if next.any() {
                    tuple.push(j);
                    dfs(rule, n, p_max, tuple, Some(&next), out);
                    tuple.pop();
                }
            }
        }
    }
}

/// Admissible sorted tuples for every degree `0..=p_max`.
pub fn enumerate_all(space: &MetricMeasureSpace, system: &NeighborhoodSystem, p_max: usize) -> Result<Vec<TupleSet>> {
    system.validate(space)?;
    let n = space.n();
    let rule = build_rule(space, system);
    let chunks: Vec<Vec<Vec<usize>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![Vec::new(); p_max + 1];
            let start = match &rule {
                Rule::Witness(w) => {
                    if !w[i].any() {
                        return out;
                    }
                    Some(w[i].clone())
                }
                _ => None,
            };
            let mut tuple = vec![i];
            dfs(&rule, n, p_max, &mut tuple, start.as_ref(), &mut out);
            out
        })
        .collect();
    Ok((0..=p_max)
        .map(|p| TupleSet::from_flat_sorted(p, chunks.iter().flat_map(|c| c[p].iter().copied()).collect()))
        .collect())
}

/// Admissible sorted tuples of degree `p`.
pub fn enumerate_tuples(space: &MetricMeasureSpace, system: &NeighborhoodSystem, p: usize) -> Result<TupleSet> {
    Ok(enumerate_all(space, system, p)?.pop().expect("degree p present"))
}

/// Checks that every face of every tuple appears one degree lower.
pub fn check_face_closure(sets: &[TupleSet]) -> Result<()> {
    for (p, set) in sets.iter().enumerate() {
        if set.degree() != p {
            return Err(Error::InvalidArgument(format!("tuple sets must have contiguous degrees from 0; slot {p} has degree {}", set.degree())));
        }
        if p == 0 {
            continue;
        }
        let lower = &sets[p - 1];
        for t in set.iter() {
            for k in 0..t.len() {
                let face: Vec<usize> = t.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
                if !lower.contains(&face) {
                    return Err(Error::FaceClosure { tuple: t.to_vec(), face });
                }
            }
        }
    }
    Ok(())
}

/// Outcome of a domination test, with the first tuple admissible under `a` but not `b`.
#[derive(Debug, Clone, Serialize)]
pub struct Dominance {
    pub passed: bool,
    pub witness: Option<Vec<usize>>,
}

/// Whether every tuple admissible under `a` is admissible under `b`, degrees `0..=p_max`.
pub fn system_dominates(
    a: &NeighborhoodSystem,
    b: &NeighborhoodSystem,
    space: &MetricMeasureSpace,
    p_max: usize,
) -> Result<Dominance> {
    for set in enumerate_all(space, a, p_max)? {
        if let Some(t) = set.iter().find(|t| !b.is_admissible(space, t)) {
            return Ok(Dominance { passed: false, witness: Some(t.to_vec()) });
        }
    }
    Ok(Dominance { passed: true, witness: None })
}
