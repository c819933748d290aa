//! Small numerical kernels: CSR matrices, conjugate gradients and symmetric eigensolvers.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Sums duplicate entries; summation order is deterministic.
    pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *data.last_mut().expect("entry exists") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Csr { rows, cols, indptr, indices, data }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.data[k] * x[self.indices[k]])
                    .sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.data[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Largest absolute entry of `self - self^T`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.transpose()).amax()
    }
}

/// Result of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients for a symmetric positive semidefinite operator.
pub fn conjugate_gradient(op: impl Fn(&[f64]) -> Vec<f64>, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= rel_tol * bnorm {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rr.sqrt() / bnorm });
        }
        let ap = op(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let a = rr / pap;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    // recompute the true residual before judging
    let ax = op(&x);
    let res = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / bnorm;
    if res <= rel_tol.max(1e-10) {
        Ok(CgOutcome { x, iterations: max_iter, relative_residual: res })
    } else {
        Err(Error::Numerical { message: "conjugate gradients did not converge".into(), residual: res })
    }
}

/// Eigenvalues in ascending order, with eigenvectors as columns when requested.
pub fn symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let e = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    norm(v)
}

/// Ritz values of a block Krylov space with full reorthogonalization.
///
/// Returns all Ritz values in ascending order; the lowest ones approximate the
/// bottom of the spectrum. Multiplicities up to the block size are resolved.
pub fn block_lanczos(a: &Csr, block: usize, max_dim: usize, seed: u64) -> Vec<f64> {
    let n = a.rows;
    let max_dim = max_dim.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut frontier: Vec<Vec<f64>> = (0..block).map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
    while basis.len() < max_dim && !frontier.is_empty() {
        let mut next = Vec::new();
        for mut v in frontier {
            if basis.len() >= max_dim {
                break;
            }
            let nv = orthonormalize_against(&mut v, &basis);
            if nv < 1e-10 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let av = a.matvec(&v);
            next.push(av.clone());
            basis.push(v);
            images.push(av);
        }
        frontier = next;
    }
    let m = basis.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = dot(&basis[i], &images[j]);
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
    }
    symmetric_eigen(t).0
}
