//! Antisymmetric cochains on sorted tuples, coboundary matrices and module actions.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::neighborhoods::{NeighborhoodSystem, TupleSet};

/// Sorts a tuple, returning the sign of the sorting permutation; `None` on repeated entries.
pub fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = tuple.to_vec();
    let mut sign = 1.0;
    // insertion sort counts transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// All permutations of `0..k` with their signs, in lexicographic order.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out.into_iter()
        .map(|p| {
            let s = sort_with_sign(&p).expect("permutation has distinct entries").1;
            (p, s)
        })
        .collect()
}

/// Values of an antisymmetric function on the sorted tuples of a basis.
#[derive(Debug, Clone)]
pub struct Cochain {
    tuples: Arc<TupleSet>,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct CochainJson<'a> {
    degree: usize,
    tuple_set_hash: String,
    values: &'a [f64],
}

impl Cochain {
    pub fn new(tuples: Arc<TupleSet>, values: Vec<f64>) -> Result<Self> {
        if values.len() != tuples.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a basis of size {}",
                values.len(),
                tuples.len()
            )));
        }
        Ok(Cochain { tuples, values })
    }

    pub fn zeros(tuples: Arc<TupleSet>) -> Self {
        let values = vec![0.0; tuples.len()];
        Cochain { tuples, values }
    }

    /// Cochain with sorted-tuple values given by `f`.
    pub fn from_fn(tuples: Arc<TupleSet>, f: impl Fn(&[usize]) -> f64 + Sync) -> Self {
        let values = (0..tuples.len()).into_par_iter().map(|k| f(tuples.get(k))).collect();
        Cochain { tuples, values }
    }

    pub fn degree(&self) -> usize {
        self.tuples.degree()
    }

    pub fn tuples(&self) -> &Arc<TupleSet> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at an ordered tuple; `Some(0)` on repeats, `None` outside the basis.
    pub fn eval(&self, ordered: &[usize]) -> Option<f64> {
        match sort_with_sign(ordered) {
            None => Some(0.0),
            Some((sorted, sign)) => self.tuples.index_of(&sorted).map(|k| sign * self.values[k]),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CochainJson {
            degree: self.degree(),
            tuple_set_hash: self.tuples.content_hash(),
            values: &self.values,
        })
        .expect("cochain serializes")
    }

    fn same_basis(&self, other: &Cochain) -> bool {
        Arc::ptr_eq(&self.tuples, &other.tuples) || self.tuples == other.tuples
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        if !self.same_basis(other) {
            return Err(Error::InvalidArgument("cochains live on different bases".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Cochain { tuples: self.tuples.clone(), values })
    }

    pub fn scale(&self, c: f64) -> Cochain {
        Cochain { tuples: self.tuples.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Sorted-tuple values of the antisymmetrization of an ordered-tuple function.
pub fn alt_project(f: &(dyn Fn(&[usize]) -> f64 + Sync), tuples: Arc<TupleSet>) -> Cochain {
    let perms = permutations(tuples.width());
    let norm = perms.len() as f64;
    Cochain::from_fn(tuples, |t| {
        let mut buf = vec![0; t.len()];
        perms
            .iter()
            .map(|(p, s)| {
                for (b, &i) in buf.iter_mut().zip(p) {
                    *b = t[i];
                }
                s * f(&buf)
            })
            .sum::<f64>()
            / norm
    })
}

fn determinant(mut m: Vec<f64>, k: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&a, &b| m[a * k + c].abs().total_cmp(&m[b * k + c].abs()))
            .expect("nonempty column");
        if m[piv * k + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..k {
                m.swap(c * k + j, piv * k + j);
            }
            det = -det;
        }
        let d = m[c * k + c];
        det *= d;
        for r in (c + 1)..k {
            let f = m[r * k + c] / d;
            for j in c..k {
                m[r * k + j] -= f * m[c * k + j];
            }
        }
    }
    det
}

/// `g_bar * (1/p!) * det[(f_i(x_j) - f_i(x_0))]` evaluated at an ordered tuple.
pub fn elementary_value(g: &[f64], fs: &[&[f64]], x: &[usize]) -> f64 {
    let p = fs.len();
    debug_assert_eq!(x.len(), p + 1);
    let gbar = x.iter().map(|&i| g[i]).sum::<f64>() / (p + 1) as f64;
    let mut m = vec![0.0; p * p];
    for (i, f) in fs.iter().enumerate() {
        for j in 1..=p {
            m[i * p + (j - 1)] = f[x[j]] - f[x[0]];
        }
    }
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    gbar * determinant(m, p) / fact
}

/// The elementary form built from a coefficient `g` and point functions `f_1..f_p`.
pub fn elementary_form(g: &[f64], fs: &[&[f64]], tuples: Arc<TupleSet>) -> Result<Cochain> {
    if fs.is_empty() || tuples.degree() != fs.len() {
        return Err(Error::InvalidArgument(format!(
            "degree {} basis needs {} point functions (p >= 1), got {}",
            tuples.degree(),
            tuples.degree(),
            fs.len()
        )));
    }
    Ok(Cochain::from_fn(tuples, |t| elementary_value(g, fs, t)))
}

/// Signed-integer coboundary matrix from degree `p` to degree `p+1`.
#[derive(Debug, Clone)]
pub struct CoboundaryOperator {
    lower: Arc<TupleSet>,
    upper: Arc<TupleSet>,
    /// For each upper tuple, the basis index of its k-th face (entry sign `(-1)^k`).
    faces: Vec<usize>,
}

impl CoboundaryOperator {
    pub fn build(lower: Arc<TupleSet>, upper: Arc<TupleSet>) -> Result<Self> {
        if upper.degree() != lower.degree() + 1 {
            return Err(Error::InvalidArgument("coboundary needs consecutive degrees".into()));
        }
        let w = upper.width();
        let rows: Vec<Result<Vec<usize>>> = (0..upper.len())
            .into_par_iter()
            .map(|r| {
                let t = upper.get(r);
                let mut face = Vec::with_capacity(w - 1);
                (0..w)
                    .map(|k| {
                        face.clear();
                        face.extend(t.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x));
                        lower
                            .index_of(&face)
                            .ok_or_else(|| Error::FaceClosure { tuple: t.to_vec(), face: face.clone() })
                    })
                    .collect()
            })
            .collect();
        let mut faces = Vec::with_capacity(upper.len() * w);
        for r in rows {
            faces.extend(r?);
        }
        Ok(CoboundaryOperator { lower, upper, faces })
    }

    pub fn degree(&self) -> usize {
        self.lower.degree()
    }

    pub fn lower(&self) -> &Arc<TupleSet> {
        &self.lower
    }

    pub fn upper(&self) -> &Arc<TupleSet> {
        &self.upper
    }

    pub fn rows(&self) -> usize {
        self.upper.len()
    }

    pub fn cols(&self) -> usize {
        self.lower.len()
    }

    /// Nonzeros of one row as `(column, sign)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let w = self.upper.width();
        self.faces[r * w..(r + 1) * w]
            .iter()
            .enumerate()
            .map(|(k, &c)| (c, if k % 2 == 0 { 1 } else { -1 }))
    }

    pub fn apply_values(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|r| self.row(r).map(|(c, s)| s as f64 * x[c]).sum()).collect()
    }

    pub fn apply_transpose_values(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for (r, &yr) in y.iter().enumerate() {
            for (c, s) in self.row(r) {
                out[c] += s as f64 * yr;
            }
        }
        out
    }

    /// Integer check that `next * self` vanishes identically.
    pub fn composes_to_zero(&self, next: &CoboundaryOperator) -> bool {
        let mut acc = std::collections::HashMap::new();
        for r in 0..next.rows() {
            acc.clear();
            for (m, s1) in next.row(r) {
                for (c, s2) in self.row(m) {
                    *acc.entry(c).or_insert(0i64) += s1 * s2;
                }
            }
            if acc.values().any(|&v| v != 0) {
                return false;
            }
        }
        true
    }
}

/// `delta_p F` on the upper basis of the operator.
pub fn coboundary_apply(op: &CoboundaryOperator, f: &Cochain) -> Result<Cochain> {
    if !(Arc::ptr_eq(op.lower(), f.tuples()) || **op.lower() == **f.tuples()) {
        return Err(Error::InvalidArgument("cochain does not live on the operator's domain".into()));
    }
    Ok(Cochain { tuples: op.upper().clone(), values: op.apply_values(&f.values) })
}

/// Multiplies the value at each tuple by the product of `chi` over its entries.
pub fn multiply_power(chi: &[f64], f: &Cochain) -> Cochain {
    let values = f
        .tuples()
        .iter()
        .zip(&f.values)
        .map(|(t, v)| v * t.iter().map(|&i| chi[i]).product::<f64>())
        .collect();
    Cochain { tuples: f.tuples.clone(), values }
}

/// Multiplies by the average of `g` over each tuple.
pub fn cup_average(g: &[f64], f: &Cochain) -> Cochain {
    let values = f
        .tuples()
        .iter()
        .zip(&f.values)
        .map(|(t, v)| v * t.iter().map(|&i| g[i]).sum::<f64>() / t.len() as f64)
        .collect();
    Cochain { tuples: f.tuples.clone(), values }
}

/// Cone over `apex` on a full system: `G(x_0..x_{p-1}) = F(apex, x_0..x_{p-1})`.
pub fn cone_contraction(
    f: &Cochain,
    apex: usize,
    lower: Arc<TupleSet>,
    system: &NeighborhoodSystem,
) -> Result<Cochain> {
    if !system.is_full() {
        return Err(Error::Unsupported("cone contraction needs the full system".into()));
    }
    if f.degree() == 0 {
        return Err(Error::Unsupported("cone contraction is undefined in degree 0".into()));
    }
    if lower.degree() + 1 != f.degree() {
        return Err(Error::InvalidArgument("target basis must sit one degree below".into()));
    }
    let mut buf = Vec::with_capacity(f.degree() + 1);
    let values = lower
        .iter()
        .map(|x| {
            buf.clear();
            buf.push(apex);
            buf.extend_from_slice(x);
            f.eval(&buf).ok_or_else(|| Error::Unsupported(format!("tuple {buf:?} is not admissible")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Cochain::new(lower, values)
}

/// Functions on ordered tuples of arbitrary length, for checking algebraic identities.
pub mod ordered {
    use super::permutations;

    pub type TupleFn<'a> = Box<dyn Fn(&[usize]) -> f64 + Sync + 'a>;

    /// `f_0(x_0) * ... * f_p(x_p)`.
    pub fn tensor<'a>(fs: Vec<&'a [f64]>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| fs.iter().zip(x).map(|(f, &i)| f[i]).product())
    }

    /// Raw coboundary: `sum_i (-1)^i F(x without x_i)`.
    pub fn coboundary<'a>(f: TupleFn<'a>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| {
            let mut buf = Vec::with_capacity(x.len());
            (0..x.len())
                .map(|i| {
                    buf.clear();
                    buf.extend(x.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &v)| v));
                    let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                    s * f(&buf)
                })
                .sum()
        })
    }

    fn average_over_perms<'a>(f: TupleFn<'a>, signed: bool) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| {
            let perms = permutations(x.len());
            let n = perms.len() as f64;
            let mut buf = vec![0; x.len()];
            perms
                .iter()
                .map(|(p, s)| {
                    for (b, &i) in buf.iter_mut().zip(p) {
                        *b = x[i];
                    }
                    (if signed { *s } else { 1.0 }) * f(&buf)
                })
                .sum::<f64>()
                / n
        })
    }

    pub fn alt<'a>(f: TupleFn<'a>) -> TupleFn<'a> {
        average_over_perms(f, true)
    }

    pub fn sym<'a>(f: TupleFn<'a>) -> TupleFn<'a> {
        average_over_perms(f, false)
    }

    /// Pointwise product.
    pub fn mul<'a>(f: TupleFn<'a>, g: TupleFn<'a>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| f(x) * g(x))
    }

    pub fn scale<'a>(c: f64, f: TupleFn<'a>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| c * f(x))
    }

    /// Sum of functions of the same arity.
    pub fn sum<'a>(fs: Vec<TupleFn<'a>>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| fs.iter().map(|f| f(x)).sum())
    }

    /// `g(x_0) * F(x_1..x_p)`, the tensor of a point function with a tuple function.
    pub fn prepend<'a>(g: &'a [f64], f: TupleFn<'a>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| g[x[0]] * f(&x[1..]))
    }

    /// `g(x_0) * F(x_0..x_p)`.
    pub fn cup<'a>(g: &'a [f64], f: TupleFn<'a>) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| g[x[0]] * f(x))
    }

    /// Average of `g` over the entries.
    pub fn average<'a>(g: &'a [f64]) -> TupleFn<'a> {
        Box::new(move |x: &[usize]| x.iter().map(|&i| g[i]).sum::<f64>() / x.len() as f64)
    }
}
