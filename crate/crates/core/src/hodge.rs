//! Weighted complexes, adjoints, Hodge Laplacians, spectra and Hodge decomposition.
//!
//! In finite dimension every coboundary is bounded and closed, so maximal and
//! minimal domains coincide and the weak decomposition is an orthogonal direct sum.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cochains::{Cochain, CoboundaryOperator};
use crate::cohomology::{self, AgreementReport, BettiReport, Field, NumericDegree};
use crate::error::{Error, Result};
use crate::kernels::{assemble_weights, KernelModel, WeightAssignment};
use crate::linalg::{self, Csr};
use crate::neighborhoods::{check_face_closure, enumerate_all, NeighborhoodSystem, TupleSet};
use crate::space::MetricMeasureSpace;

/// Basis dimension above which the Krylov eigensolver replaces the dense one.
pub const DENSE_LIMIT: usize = 5000;

/// Tuple sets, Gram weights and coboundaries for degrees `0..=top`.
#[derive(Debug, Clone)]
pub struct WeightedComplex {
    space: Arc<MetricMeasureSpace>,
    system: NeighborhoodSystem,
    kernel: KernelModel,
    tuples: Vec<Arc<TupleSet>>,
    weights: Vec<WeightAssignment>,
    ops: Vec<CoboundaryOperator>,
}

impl WeightedComplex {
    /// Enumerates tuples up to degree `top` and assembles weights and coboundaries.
    pub fn build(space: Arc<MetricMeasureSpace>, system: NeighborhoodSystem, kernel: KernelModel, top: usize) -> Result<Self> {
        let sets = enumerate_all(&space, &system, top)?;
        Self::from_tuple_sets(space, system, kernel, sets)
    }

    /// Assembles a complex over given tuple sets (contiguous degrees from 0).
    pub fn from_tuple_sets(
        space: Arc<MetricMeasureSpace>,
        system: NeighborhoodSystem,
        kernel: KernelModel,
        sets: Vec<TupleSet>,
    ) -> Result<Self> {
        check_face_closure(&sets)?;
        let tuples: Vec<Arc<TupleSet>> = sets.into_iter().map(Arc::new).collect();
        let weights = tuples
            .iter()
            .map(|t| assemble_weights(&kernel, &space, t))
            .collect::<Result<Vec<_>>>()?;
        let ops = tuples
            .windows(2)
            .map(|w| CoboundaryOperator::build(w[0].clone(), w[1].clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedComplex { space, system, kernel, tuples, weights, ops })
    }

    /// Same tuples and coboundaries with weights recomputed for another kernel.
    pub fn reweighted(&self, kernel: KernelModel) -> Result<Self> {
        let weights = self
            .tuples
            .iter()
            .map(|t| assemble_weights(&kernel, &self.space, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedComplex { kernel, weights, ..self.clone() })
    }

    pub fn space(&self) -> &Arc<MetricMeasureSpace> {
        &self.space
    }

    pub fn system(&self) -> &NeighborhoodSystem {
        &self.system
    }

    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    /// Highest degree with materialized tuples.
    pub fn top(&self) -> usize {
        self.tuples.len() - 1
    }

    pub fn dim(&self, p: usize) -> usize {
        self.tuples.get(p).map_or(0, |t| t.len())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.tuples.iter().map(|t| t.len()).collect()
    }

    pub fn tuples(&self, p: usize) -> &Arc<TupleSet> {
        &self.tuples[p]
    }

    pub fn weights(&self, p: usize) -> &[f64] {
        &self.weights[p].masses
    }

    pub fn coboundary(&self, p: usize) -> &CoboundaryOperator {
        &self.ops[p]
    }

    pub fn coboundaries(&self) -> &[CoboundaryOperator] {
        &self.ops
    }

    fn need_up(&self, p: usize) -> Result<()> {
        if p >= self.top() {
            return Err(Error::InvalidArgument(format!(
                "degree {p} needs tuples of degree {} (complex built to {})",
                p + 1,
                self.top()
            )));
        }
        Ok(())
    }

    pub fn zero_cochain(&self, p: usize) -> Cochain {
        Cochain::zeros(self.tuples[p].clone())
    }

    pub fn cochain(&self, p: usize, values: Vec<f64>) -> Result<Cochain> {
        Cochain::new(self.tuples[p].clone(), values)
    }

    /// Weighted inner product in degree `p`.
    pub fn inner(&self, p: usize, a: &[f64], b: &[f64]) -> f64 {
        self.weights[p].masses.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    pub fn norm_sq(&self, p: usize, a: &[f64]) -> f64 {
        self.inner(p, a, a)
    }

    /// `B_p x`.
    pub fn delta(&self, p: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.need_up(p)?;
        Ok(self.ops[p].apply_values(x))
    }

    /// `W_p^{-1} B_p^T W_{p+1} y`.
    pub fn delta_adjoint(&self, p: usize, y: &[f64]) -> Result<Vec<f64>> {
        self.need_up(p)?;
        let wy: Vec<f64> = y.iter().zip(&self.weights[p + 1].masses).map(|(v, w)| v * w).collect();
        Ok(self.ops[p]
            .apply_transpose_values(&wy)
            .iter()
            .zip(&self.weights[p].masses)
            .map(|(v, w)| v / w)
            .collect())
    }

    /// `L_p x` with the down part omitted in degree 0.
    pub fn laplacian_apply(&self, p: usize, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.delta_adjoint(p, &self.delta(p, x)?)?;
        if p > 0 {
            let down = self.delta(p - 1, &self.delta_adjoint(p - 1, x)?)?;
            out.iter_mut().zip(down).for_each(|(o, d)| *o += d);
        }
        Ok(out)
    }
}

/// The adjoint coboundary `W_p^{-1} B_p^T W_{p+1}` as a sparse matrix.
pub fn adjoint(complex: &WeightedComplex, p: usize) -> Result<Csr> {
    complex.need_up(p)?;
    let op = &complex.ops[p];
    let (wl, wu) = (complex.weights(p), complex.weights(p + 1));
    let mut t = Vec::with_capacity(op.rows() * (p + 2));
    for r in 0..op.rows() {
        for (c, s) in op.row(r) {
            t.push((c, r, s as f64 * wu[r] / wl[c]));
        }
    }
    Ok(Csr::from_triplets(op.cols(), op.rows(), t))
}

/// Gram-type triplets `sum_groups v v^T` for groups of `(index, value)`.
fn gram_triplets(groups: Vec<Vec<(usize, f64)>>) -> Vec<(usize, usize, f64)> {
    groups
        .into_par_iter()
        .flat_map_iter(|g| {
            let mut out = Vec::with_capacity(g.len() * g.len());
            for &(a, va) in &g {
                for &(b, vb) in &g {
                    out.push((a, b, va * vb));
                }
            }
            out
        })
        .collect()
}

/// Symmetrized Hodge Laplacian `S_p = W_p^{1/2} L_p W_p^{-1/2}`.
pub fn hodge_laplacian(complex: &WeightedComplex, p: usize) -> Result<Csr> {
    complex.need_up(p)?;
    let n = complex.dim(p);
    let wp = complex.weights(p);
    // up part: N^T N with N = W_{p+1}^{1/2} B_p W_p^{-1/2}
    let up = &complex.ops[p];
    let wu = complex.weights(p + 1);
    let mut groups: Vec<Vec<(usize, f64)>> = (0..up.rows())
        .map(|r| up.row(r).map(|(c, s)| (c, s as f64 * (wu[r] / wp[c]).sqrt())).collect())
        .collect();
    // down part: M M^T with M = W_p^{1/2} B_{p-1} W_{p-1}^{-1/2}, grouped by column of B_{p-1}
    if p > 0 {
        let down = &complex.ops[p - 1];
        let wl = complex.weights(p - 1);
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); down.cols()];
        for r in 0..down.rows() {
            for (c, s) in down.row(r) {
                cols[c].push((r, s as f64 * (wp[r] / wl[c]).sqrt()));
            }
        }
        groups.extend(cols);
    }
    Ok(Csr::from_triplets(n, n, gram_triplets(groups)))
}

/// Threshold rule separating zero from nonzero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TolPolicy {
    /// `dim * lambda_max * 2^-45`.
    Default,
    Absolute(f64),
    RelativeToMax(f64),
}

impl TolPolicy {
    pub fn threshold(&self, dim: usize, lambda_max: f64) -> f64 {
        let t = match self {
            TolPolicy::Default => dim as f64 * lambda_max * 2f64.powi(-45),
            TolPolicy::Absolute(t) => *t,
            TolPolicy::RelativeToMax(r) => r * lambda_max,
        };
        t.max(f64::MIN_POSITIVE)
    }
}

/// Spectrum and harmonic count of one degree.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicResult {
    pub degree: usize,
    pub harmonic_dim: usize,
    /// Full spectrum (dense path) or Ritz values (Krylov path), ascending.
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
    /// No gap of factor 10^3 separates the eigenvalues on either side of the threshold.
    pub uncertain: bool,
    pub method: String,
}

impl HarmonicResult {
    /// Smallest eigenvalue at or above the threshold.
    pub fn smallest_nonzero(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&l| l >= self.tolerance)
    }

    /// Up to three eigenvalues on either side of the threshold.
    pub fn neighborhood(&self) -> Vec<f64> {
        let k = self.harmonic_dim;
        let lo = k.saturating_sub(3);
        let hi = (k + 3).min(self.eigenvalues.len());
        self.eigenvalues[lo..hi].to_vec()
    }

    pub fn as_numeric(&self) -> NumericDegree {
        NumericDegree {
            degree: self.degree,
            harmonic_dim: self.harmonic_dim,
            tolerance: self.tolerance,
            uncertain: self.uncertain,
            spectral_neighborhood: self.neighborhood(),
        }
    }
}

fn classify(degree: usize, eigenvalues: Vec<f64>, dim: usize, policy: TolPolicy, method: &str) -> HarmonicResult {
    let lambda_max = eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    if lambda_max == 0.0 {
        return HarmonicResult {
            degree,
            harmonic_dim: eigenvalues.len(),
            eigenvalues,
            tolerance: 0.0,
            uncertain: false,
            method: method.into(),
        };
    }
    let tol = policy.threshold(dim, lambda_max);
    let harmonic_dim = eigenvalues.iter().filter(|&&l| l < tol).count();
    let below = eigenvalues[..harmonic_dim].iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let above = eigenvalues.get(harmonic_dim).copied();
    let floor = lambda_max * f64::EPSILON;
    let uncertain = match above {
        Some(a) => a < 1e3 * below.max(floor),
        None => false,
    };
    HarmonicResult { degree, harmonic_dim, eigenvalues, tolerance: tol, uncertain, method: method.into() }
}

/// Eigenvalues of `S_p` and the number below the policy threshold.
pub fn harmonic_dimension(complex: &WeightedComplex, p: usize, policy: TolPolicy) -> Result<HarmonicResult> {
    let s = hodge_laplacian(complex, p)?;
    let n = s.rows;
    if n <= DENSE_LIMIT {
        let (vals, _) = linalg::symmetric_eigen(s.to_dense());
        Ok(classify(p, vals, n, policy, "dense"))
    } else {
        let ritz = linalg::block_lanczos(&s, 16, 600, 0x5eed);
        Ok(classify(p, ritz, n, policy, "lanczos"))
    }
}

/// Eigenvalues and orthonormal eigenvectors of `S_p` (dense).
pub fn hodge_eigen(complex: &WeightedComplex, p: usize) -> Result<(Vec<f64>, nalgebra::DMatrix<f64>)> {
    Ok(linalg::symmetric_eigen(hodge_laplacian(complex, p)?.to_dense()))
}

/// Harmonic, exact and coexact parts with residual diagnostics.
#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    pub harmonic: Cochain,
    pub exact: Cochain,
    pub coexact: Cochain,
    pub residuals: DecompositionResiduals,
}

/// Residuals relative to the weighted norm of the input.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionResiduals {
    pub reconstruction: f64,
    pub harmonic_exact: f64,
    pub harmonic_coexact: f64,
    pub exact_coexact: f64,
    /// `|delta H|` and `|delta^* H|` relative to `|F|`.
    pub harmonic_closedness: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        [self.reconstruction, self.harmonic_exact, self.harmonic_coexact, self.exact_coexact, self.harmonic_closedness]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

const CG_TOL: f64 = 1e-12;

/// Splits `F` into harmonic, exact and coexact parts by weighted least squares.
pub fn hodge_decompose(complex: &WeightedComplex, p: usize, f: &Cochain) -> Result<HodgeDecomposition> {
    complex.need_up(p)?;
    let n = complex.dim(p);
    if f.len() != n {
        return Err(Error::InvalidArgument("cochain size does not match degree".into()));
    }
    let wp = complex.weights(p);
    let exact: Vec<f64> = if p == 0 || complex.dim(p - 1) == 0 {
        vec![0.0; n]
    } else {
        let b = &complex.ops[p - 1];
        let rhs = b.apply_transpose_values(&f.values.iter().zip(wp).map(|(v, w)| v * w).collect::<Vec<_>>());
        let op = |g: &[f64]| {
            let bg = b.apply_values(g);
            b.apply_transpose_values(&bg.iter().zip(wp).map(|(v, w)| v * w).collect::<Vec<_>>())
        };
        let sol = linalg::conjugate_gradient(op, &rhs, CG_TOL, 10 * complex.dim(p - 1).max(1))?;
        b.apply_values(&sol.x)
    };
    let coexact: Vec<f64> = if complex.dim(p + 1) == 0 {
        vec![0.0; n]
    } else {
        let b = &complex.ops[p];
        let rhs = b.apply_values(&f.values);
        let op = |y: &[f64]| {
            let bt = b.apply_transpose_values(y);
            b.apply_values(&bt.iter().zip(wp).map(|(v, w)| v / w).collect::<Vec<_>>())
        };
        let sol = linalg::conjugate_gradient(op, &rhs, CG_TOL, 10 * complex.dim(p + 1).max(1))?;
        b.apply_transpose_values(&sol.x).iter().zip(wp).map(|(v, w)| v / w).collect()
    };
    let harmonic: Vec<f64> = (0..n).map(|i| f.values[i] - exact[i] - coexact[i]).collect();
    let fnorm = complex.norm_sq(p, &f.values).sqrt().max(f64::MIN_POSITIVE);
    let recon: Vec<f64> = (0..n).map(|i| f.values[i] - harmonic[i] - exact[i] - coexact[i]).collect();
    let dh = complex.delta(p, &harmonic)?;
    let mut closed = complex.norm_sq(p + 1, &dh).sqrt();
    if p > 0 {
        let dsh = complex.delta_adjoint(p - 1, &harmonic)?;
        closed = closed.max(complex.norm_sq(p - 1, &dsh).sqrt());
    }
    let residuals = DecompositionResiduals {
        reconstruction: complex.norm_sq(p, &recon).sqrt() / fnorm,
        harmonic_exact: complex.inner(p, &harmonic, &exact).abs() / (fnorm * fnorm),
        harmonic_coexact: complex.inner(p, &harmonic, &coexact).abs() / (fnorm * fnorm),
        exact_coexact: complex.inner(p, &exact, &coexact).abs() / (fnorm * fnorm),
        harmonic_closedness: closed / fnorm,
    };
    let t = complex.tuples[p].clone();
    Ok(HodgeDecomposition {
        harmonic: Cochain::new(t.clone(), harmonic)?,
        exact: Cochain::new(t.clone(), exact)?,
        coexact: Cochain::new(t, coexact)?,
        residuals,
    })
}

/// Squared `L^2` norm, Dirichlet energy `|delta F|^2`, and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyNorms {
    pub l2: f64,
    pub dirichlet: f64,
    pub graph: f64,
}

pub fn energy_norms(complex: &WeightedComplex, p: usize, f: &[f64]) -> Result<EnergyNorms> {
    let l2 = complex.norm_sq(p, f);
    let dirichlet = complex.norm_sq(p + 1, &complex.delta(p, f)?);
    Ok(EnergyNorms { l2, dirichlet, graph: l2 + dirichlet })
}

/// `<delta^* delta F, F>`, the up part of the Laplacian quadratic form.
pub fn dirichlet_via_laplacian(complex: &WeightedComplex, p: usize, f: &[f64]) -> Result<f64> {
    let u = complex.delta_adjoint(p, &complex.delta(p, f)?)?;
    Ok(complex.inner(p, &u, f))
}

/// `sup_x sum_{y: (x,y) admissible} (f(y) - f(x))^2 j(x,y) w_y`.
pub fn gradient_sup(complex: &WeightedComplex, f: &[f64]) -> f64 {
    gradient_rows(complex, f).into_iter().fold(0.0, f64::max)
}

/// `sum_x w_x sum_{y: (x,y) admissible} (f(y) - f(x))^2 j(x,y) w_y`.
pub fn gradient_energy(complex: &WeightedComplex, f: &[f64]) -> f64 {
    let s = complex.space();
    gradient_rows(complex, f).iter().enumerate().map(|(x, r)| s.weight(x) * r).sum()
}

fn gradient_rows(complex: &WeightedComplex, f: &[f64]) -> Vec<f64> {
    let s = complex.space();
    let mut rows = vec![0.0; s.n()];
    if complex.top() == 0 {
        return rows;
    }
    for t in complex.tuples(1).iter() {
        let (x, y) = (t[0], t[1]);
        let d2 = (f[y] - f[x]).powi(2);
        rows[x] += d2 * complex.kernel().value(s, x, y) * s.weight(y);
        rows[y] += d2 * complex.kernel().value(s, y, x) * s.weight(x);
    }
    rows
}

/// Both sides of the multiplier estimate in the graph norm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiplierCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub passed: bool,
}

/// Checks `|chi^(p+1) F|_graph <= c_{chi,p} |F|_graph`.
pub fn multiplier_bound_check(complex: &WeightedComplex, p: usize, chi: &[f64], f: &Cochain) -> Result<MultiplierCheck> {
    complex.need_up(p)?;
    let sup_chi = chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let grad = gradient_sup(complex, chi).sqrt();
    let constant = sup_chi.powi(p as i32) * (1.0 + sup_chi + (p + 1) as f64 * grad);
    let g = crate::cochains::multiply_power(chi, f);
    let lhs = energy_norms(complex, p, &g.values)?.graph.sqrt();
    let rhs = constant * energy_norms(complex, p, &f.values)?.graph.sqrt();
    let slack = 1e-12 * rhs.max(lhs);
    Ok(MultiplierCheck { lhs, rhs, constant, passed: lhs <= rhs + slack })
}

/// Per-degree record written by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct HodgeReport {
    pub schema: u32,
    pub degree: usize,
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    pub harmonic_dim: usize,
    pub tolerance: f64,
    pub uncertain: bool,
    pub method: String,
    pub oracle_betti: Option<usize>,
    pub agree: Option<bool>,
}

/// Spectral and exact results for degrees `0..=p_max` of one complex.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub harmonic: Vec<HarmonicResult>,
    pub betti: BettiReport,
    pub fields_tried: Vec<Field>,
    pub agreement: AgreementReport,
}

impl Analysis {
    pub fn harmonic_dims(&self) -> Vec<usize> {
        self.harmonic.iter().map(|h| h.harmonic_dim).collect()
    }

    pub fn hodge_reports(&self) -> Vec<HodgeReport> {
        self.harmonic
            .iter()
            .zip(&self.agreement.degrees)
            .map(|(h, a)| HodgeReport {
                schema: 1,
                degree: h.degree,
                dimension: h.eigenvalues.len(),
                eigenvalues: h.eigenvalues.clone(),
                harmonic_dim: h.harmonic_dim,
                tolerance: h.tolerance,
                uncertain: h.uncertain,
                method: h.method.clone(),
                oracle_betti: Some(a.exact),
                agree: Some(a.agree),
            })
            .collect()
    }
}

/// Harmonic dimensions and exact Betti numbers for degrees `0..=p_max`, cross-checked.
pub fn analyze(complex: &WeightedComplex, p_max: usize, policy: TolPolicy) -> Result<Analysis> {
    complex.need_up(p_max)?;
    let harmonic = (0..=p_max)
        .map(|p| harmonic_dimension(complex, p, policy))
        .collect::<Result<Vec<_>>>()?;
    let numeric: Vec<usize> = harmonic.iter().map(|h| h.harmonic_dim).collect();
    let (betti, fields_tried) = cohomology::exact_betti_escalating(&complex.dims(), complex.coboundaries(), p_max, &numeric);
    let nd: Vec<NumericDegree> = harmonic.iter().map(|h| h.as_numeric()).collect();
    let agreement = cohomology::compare_numeric_exact(&nd, &betti);
    Ok(Analysis { harmonic, betti, fields_tried, agreement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::gen_interval;

    #[test]
    fn two_point_laplacian() {
        let s = Arc::new(gen_interval(2).unwrap().scaled_weights(2.0).unwrap());
        let c = WeightedComplex::build(s, NeighborhoodSystem::Full, KernelModel::constant(1.0).unwrap(), 1).unwrap();
        let (vals, vecs) = hodge_eigen(&c, 0).unwrap();
        assert!(vals[0].abs() < 1e-14);
        assert!((vals[1] - 4.0).abs() < 1e-12);
        assert!((vecs[(0, 0)].abs() - vecs[(1, 0)].abs()).abs() < 1e-12);
    }
}
