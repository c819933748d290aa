//! Exact Betti numbers from integer coboundary matrices, and numeric/exact comparison.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cochains::CoboundaryOperator;

/// Primary prime field, `2^31 - 1`.
pub const PRIME_A: u64 = 2_147_483_647;
/// Fallback prime field.
pub const PRIME_B: u64 = 2_147_483_629;

/// Coefficient field for exact rank computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Field {
    Prime(u64),
    Rational,
}

impl Field {
    pub fn label(&self) -> String {
        match self {
            Field::Prime(p) => format!("F_{p}"),
            Field::Rational => "Q".to_string(),
        }
    }
}

/// Sparse integer matrix stored by rows of `(column, value)`.
#[derive(Debug, Clone, Default)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<(usize, i64)>>,
}

impl IntMatrix {
    pub fn new(cols: usize) -> Self {
        IntMatrix { rows: 0, cols, entries: Vec::new() }
    }

    pub fn push_row(&mut self, mut row: Vec<(usize, i64)>) {
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != 0);
        self.entries.push(merged);
        self.rows += 1;
    }

    pub fn from_coboundary(op: &CoboundaryOperator) -> Self {
        let mut m = IntMatrix::new(op.cols());
        for r in 0..op.rows() {
            m.push_row(op.row(r).collect());
        }
        m
    }

    /// `self * other` in integer arithmetic.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = IntMatrix::new(other.cols);
        for row in &self.entries {
            let mut acc: Vec<(usize, i64)> = Vec::new();
            for &(k, a) in row {
                for &(c, b) in &other.entries[k] {
                    acc.push((c, a * b));
                }
            }
            out.push_row(acc);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.is_empty())
    }
}

fn modp(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn rank_mod_p(m: &IntMatrix, p: u64) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    for row in &m.entries {
        let mut cur: Vec<(usize, u64)> = row.iter().map(|&(c, v)| (c, modp(v, p))).filter(|e| e.1 != 0).collect();
        while let Some(&(lead, lv)) = cur.first() {
            match pivots.get(&lead) {
                Some(piv) => {
                    // cur -= lv * piv (piv has leading coefficient 1)
                    let mut out = Vec::with_capacity(cur.len() + piv.len());
                    let (mut i, mut j) = (0, 0);
                    while i < cur.len() || j < piv.len() {
                        let take_cur = j >= piv.len() || (i < cur.len() && cur[i].0 < piv[j].0);
                        let take_piv = i >= cur.len() || (j < piv.len() && piv[j].0 < cur[i].0);
                        if take_cur {
                            out.push(cur[i]);
                            i += 1;
                        } else if take_piv {
                            out.push((piv[j].0, (p - lv * piv[j].1 % p) % p));
                            j += 1;
                        } else {
                            let v = (cur[i].1 + p - lv * piv[j].1 % p) % p;
                            if v != 0 {
                                out.push((cur[i].0, v));
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                    out.retain(|e| e.1 != 0);
                    cur = out;
                }
                None => {
                    let inv = inv_mod(lv, p);
                    let normalized = cur.iter().map(|&(c, v)| (c, v * inv % p)).collect();
                    pivots.insert(lead, normalized);
                    break;
                }
            }
        }
    }
    pivots.len()
}

fn rank_rational(m: &IntMatrix) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, BigInt)>> = HashMap::new();
    for row in &m.entries {
        let mut cur: Vec<(usize, BigInt)> = row.iter().map(|&(c, v)| (c, BigInt::from(v))).collect();
        while let Some((lead, lv)) = cur.first().cloned() {
            match pivots.get(&lead) {
                Some(piv) => {
                    // cur <- a*cur - lv*piv, with a the pivot's leading coefficient
                    let a = &piv[0].1;
                    let mut merged: BTreeMap<usize, BigInt> = BTreeMap::new();
                    for (c, v) in &cur {
                        *merged.entry(*c).or_insert_with(BigInt::zero) += a * v;
                    }
                    for (c, v) in piv {
                        *merged.entry(*c).or_insert_with(BigInt::zero) -= &lv * v;
                    }
                    cur = merged.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                    let g = cur.iter().fold(BigInt::zero(), |g, (_, v)| g.gcd(v));
                    if !g.is_zero() && g.abs() != BigInt::from(1) {
                        for e in cur.iter_mut() {
                            e.1 = &e.1 / &g;
                        }
                    }
                }
                None => {
                    pivots.insert(lead, cur);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Rank of an integer matrix over the given field.
pub fn rank(m: &IntMatrix, field: Field) -> usize {
    match field {
        Field::Prime(p) => rank_mod_p(m, p),
        Field::Rational => rank_rational(m),
    }
}

/// Betti numbers per degree with provenance of the computation.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BettiReport {
    pub schema: u32,
    pub degrees: Vec<usize>,
    pub betti: Vec<usize>,
    /// `exact-field` or `numeric`.
    pub method: String,
    pub field: Option<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
}

/// Exact Betti numbers for degrees `0..=p_max`.
///
/// `dims[p]` is the size of the degree-`p` basis and `ops[p]` the coboundary out of
/// degree `p`; both must reach degree `p_max + 1`.
pub fn exact_betti(dims: &[usize], ops: &[CoboundaryOperator], p_max: usize, field: Field) -> BettiReport {
    assert!(ops.len() > p_max && dims.len() > p_max, "coboundaries up to degree p_max are required");
    let ranks: Vec<usize> = (0..=p_max)
        .into_par_iter()
        .map(|p| rank(&IntMatrix::from_coboundary(&ops[p]), field))
        .collect();
    let betti = (0..=p_max)
        .map(|p| {
            let below = if p == 0 { 0 } else { ranks[p - 1] };
            dims[p] - ranks[p] - below
        })
        .collect();
    BettiReport {
        schema: 1,
        degrees: (0..=p_max).collect(),
        betti,
        method: "exact-field".into(),
        field: Some(field.label()),
        parameters: BTreeMap::new(),
    }
}

/// Per-degree numeric input to the comparison.
#[derive(Debug, Clone, Serialize)]
pub struct NumericDegree {
    pub degree: usize,
    pub harmonic_dim: usize,
    pub tolerance: f64,
    pub uncertain: bool,
    /// Eigenvalues closest to the threshold, ascending.
    pub spectral_neighborhood: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeAgreement {
    pub degree: usize,
    pub numeric: usize,
    pub exact: usize,
    pub agree: bool,
    pub uncertain: bool,
    pub tolerance: f64,
    pub spectral_neighborhood: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub schema: u32,
    pub all_agree: bool,
    pub degrees: Vec<DegreeAgreement>,
}

/// Degree-by-degree equality of numeric harmonic dimensions and exact Betti numbers.
pub fn compare_numeric_exact(numeric: &[NumericDegree], exact: &BettiReport) -> AgreementReport {
    let degrees: Vec<DegreeAgreement> = numeric
        .iter()
        .map(|nd| {
            let ex = exact
                .degrees
                .iter()
                .position(|&d| d == nd.degree)
                .map(|k| exact.betti[k]);
            DegreeAgreement {
                degree: nd.degree,
                numeric: nd.harmonic_dim,
                exact: ex.unwrap_or(usize::MAX),
                agree: ex == Some(nd.harmonic_dim),
                uncertain: nd.uncertain,
                tolerance: nd.tolerance,
                spectral_neighborhood: nd.spectral_neighborhood.clone(),
            }
        })
        .collect();
    AgreementReport { schema: 1, all_agree: degrees.iter().all(|d| d.agree), degrees }
}

/// Exact Betti numbers, retrying with the fallback prime and then rationals when they
/// disagree with `numeric`. Returns the final report and the fields tried.
pub fn exact_betti_escalating(
    dims: &[usize],
    ops: &[CoboundaryOperator],
    p_max: usize,
    numeric: &[usize],
) -> (BettiReport, Vec<Field>) {
    let mut tried = Vec::new();
    let mut report = None;
    for field in [Field::Prime(PRIME_A), Field::Prime(PRIME_B), Field::Rational] {
        tried.push(field);
        let r = exact_betti(dims, ops, p_max, field);
        let agrees = r.betti.as_slice() == numeric;
        report = Some(r);
        if agrees {
            break;
        }
    }
    (report.expect("at least one field tried"), tried)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u64) -> bool {
        n > 1 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn primes_are_prime() {
        assert!(is_prime(PRIME_A));
        assert!(is_prime(PRIME_B));
    }

    #[test]
    fn small_ranks_agree_across_fields() {
        let mut m = IntMatrix::new(3);
        m.push_row(vec![(0, 1), (1, -1)]);
        m.push_row(vec![(1, 1), (2, -1)]);
        m.push_row(vec![(0, 1), (2, -1)]);
        for f in [Field::Prime(PRIME_A), Field::Prime(PRIME_B), Field::Rational] {
            assert_eq!(rank(&m, f), 2);
        }
        let mut t = IntMatrix::new(2);
        t.push_row(vec![(0, 2), (1, 4)]);
        t.push_row(vec![(0, 3), (1, 6)]);
        assert_eq!(rank(&t, Field::Rational), 1);
        assert_eq!(rank(&t, Field::Prime(PRIME_A)), 1);
    }
}
