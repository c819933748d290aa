//! Jump kernels, per-tuple masses and kernel-condition diagnostics.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::neighborhoods::TupleSet;
use crate::space::MetricMeasureSpace;

/// Functional form of a jump kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `c_pre * rho^(-d - alpha)`.
    Fractional { d: f64, alpha: f64, c_pre: f64 },
    /// Fractional below `eps_trunc`, the constant `floor` at or above it.
    TruncatedFractional { d: f64, alpha: f64, c_pre: f64, eps_trunc: f64, floor: f64 },
    Constant { c: f64 },
    /// Dense row-major table of kernel values.
    Custom { n: usize, table: Vec<f64> },
}

/// A kernel together with its symmetry flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelModel {
    pub kind: KernelKind,
    pub symmetric: bool,
}

fn check_fractional(d: f64, alpha: f64, c_pre: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("kernel dimension must be positive, got {d}")));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if !(c_pre > 0.0 && c_pre.is_finite()) {
        return Err(Error::InvalidArgument(format!("prefactor must be positive, got {c_pre}")));
    }
    Ok(())
}

impl KernelModel {
    pub fn fractional(d: f64, alpha: f64, c_pre: f64) -> Result<Self> {
        check_fractional(d, alpha, c_pre)?;
        Ok(KernelModel { kind: KernelKind::Fractional { d, alpha, c_pre }, symmetric: true })
    }

    pub fn truncated_fractional(d: f64, alpha: f64, c_pre: f64, eps_trunc: f64, floor: f64) -> Result<Self> {
        check_fractional(d, alpha, c_pre)?;
        if !(eps_trunc > 0.0) || !(floor >= 0.0 && floor.is_finite()) {
            return Err(Error::InvalidArgument("truncation scale must be positive and floor nonnegative".into()));
        }
        Ok(KernelModel {
            kind: KernelKind::TruncatedFractional { d, alpha, c_pre, eps_trunc, floor },
            symmetric: true,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("constant kernel must be positive, got {c}")));
        }
        Ok(KernelModel { kind: KernelKind::Constant { c }, symmetric: true })
    }

    /// Kernel from a dense table; off-diagonal entries must be positive and finite.
    pub fn custom(n: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != n * n {
            return Err(Error::InvalidArgument("custom kernel table has wrong size".into()));
        }
        let mut symmetric = true;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = table[i * n + j];
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidArgument(format!("kernel value at ({i},{j}) must be positive, got {v}")));
                }
                if v != table[j * n + i] {
                    symmetric = false;
                }
            }
        }
        Ok(KernelModel { kind: KernelKind::Custom { n, table }, symmetric })
    }

    /// Reads a table of `i, j, value` lines; one orientation per pair fills both.
    pub fn load_custom(path: &Path, n: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut table = vec![f64::NAN; n * n];
        for (ln, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Load(format!("kernel table line {}: expected `i, j, value`", ln + 1));
            if parts.len() != 3 {
                return Err(bad());
            }
            let i: usize = parts[0].parse().map_err(|_| bad())?;
            let j: usize = parts[1].parse().map_err(|_| bad())?;
            let v: f64 = parts[2].parse().map_err(|_| bad())?;
            if i >= n || j >= n || i == j || !v.is_finite() {
                return Err(bad());
            }
            table[i * n + j] = v;
            if table[j * n + i].is_nan() {
                table[j * n + i] = v;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if table[i * n + j].is_nan() {
                    return Err(Error::Load(format!("kernel table is missing pair ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            table[i * n + i] = 0.0;
        }
        KernelModel::custom(n, table)
    }

    /// The kernel multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let kind = match &self.kind {
            KernelKind::Fractional { d, alpha, c_pre } => KernelKind::Fractional { d: *d, alpha: *alpha, c_pre: c_pre * c },
            KernelKind::TruncatedFractional { d, alpha, c_pre, eps_trunc, floor } => KernelKind::TruncatedFractional {
                d: *d,
                alpha: *alpha,
                c_pre: c_pre * c,
                eps_trunc: *eps_trunc,
                floor: floor * c,
            },
            KernelKind::Constant { c: k } => KernelKind::Constant { c: k * c },
            KernelKind::Custom { n, table } => KernelKind::Custom { n: *n, table: table.iter().map(|v| v * c).collect() },
        };
        Ok(KernelModel { kind, symmetric: self.symmetric })
    }

    /// Kernel value for distinct points; no argument checks.
    #[inline]
    pub fn value(&self, space: &MetricMeasureSpace, i: usize, j: usize) -> f64 {
        match &self.kind {
            KernelKind::Fractional { d, alpha, c_pre } => c_pre * space.dist(i, j).powf(-d - alpha),
            KernelKind::TruncatedFractional { d, alpha, c_pre, eps_trunc, floor } => {
                let r = space.dist(i, j);
                if r < *eps_trunc {
                    c_pre * r.powf(-d - alpha)
                } else {
                    *floor
                }
            }
            KernelKind::Constant { c } => *c,
            KernelKind::Custom { n, table } => table[i * n + j],
        }
    }
}

/// Kernel value `j(x_i, x_j)`; the diagonal is excluded.
pub fn eval_kernel(model: &KernelModel, space: &MetricMeasureSpace, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidArgument(format!("kernel is not defined on the diagonal ({i},{i})")));
    }
    if i >= space.n() || j >= space.n() {
        return Err(Error::InvalidArgument("point index out of range".into()));
    }
    if let KernelKind::Custom { n, .. } = &model.kind {
        if *n != space.n() {
            return Err(Error::InvalidArgument("custom kernel size does not match the space".into()));
        }
    }
    Ok(model.value(space, i, j))
}

/// Per-tuple masses of one degree.
#[derive(Debug, Clone, Serialize)]
pub struct WeightAssignment {
    pub degree: usize,
    pub masses: Vec<f64>,
    /// Number of ordered representatives folded into each mass, `(p+1)!`.
    pub multiplicity: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Mass of an ordered tuple: `p! * sum_k prod_{l != k} j(x_k, x_l) * prod_m w_m`.
pub fn tuple_mass(model: &KernelModel, space: &MetricMeasureSpace, tuple: &[usize]) -> f64 {
    let p = tuple.len() - 1;
    let wprod: f64 = tuple.iter().map(|&i| space.weight(i)).product();
    if p == 0 {
        return wprod;
    }
    let s: f64 = tuple
        .iter()
        .map(|&xk| tuple.iter().filter(|&&xl| xl != xk).map(|&xl| model.value(space, xk, xl)).product::<f64>())
        .sum();
    factorial(p) * s * wprod
}

/// Masses for every tuple of the set, in basis order.
pub fn assemble_weights(model: &KernelModel, space: &MetricMeasureSpace, tuples: &TupleSet) -> Result<WeightAssignment> {
    if let KernelKind::Custom { n, .. } = &model.kind {
        if *n != space.n() {
            return Err(Error::InvalidArgument("custom kernel size does not match the space".into()));
        }
    }
    let masses: Vec<f64> = (0..tuples.len())
        .into_par_iter()
        .map(|k| tuple_mass(model, space, tuples.get(k)))
        .collect();
    if let Some(k) = masses.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::Assembly {
            tuple: tuples.get(k).to_vec(),
            reason: format!("mass {} is not positive and finite", masses[k]),
        });
    }
    Ok(WeightAssignment { degree: tuples.degree(), masses, multiplicity: factorial(tuples.degree() + 1) })
}

/// Discrete moment and tail suprema of a kernel at scale `eps`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelConditionReport {
    pub eps: f64,
    /// `sup_x sum_{y: 0 < rho < eps} rho^2 j w_y`.
    pub near_moment_sup: f64,
    /// `sup_x sum_{y: rho >= eps} j w_y`.
    pub far_tail_sup: f64,
    /// Infimum of `j` over pairs closer than `eps`.
    pub inf_admissible: Option<f64>,
    /// Set when no pair is closer than `eps`.
    pub vacuous: bool,
}

pub fn check_kernel_conditions(model: &KernelModel, space: &MetricMeasureSpace, eps: f64) -> KernelConditionReport {
    let n = space.n();
    let mut near_sup: f64 = 0.0;
    let mut far_sup: f64 = 0.0;
    let mut inf = f64::INFINITY;
    for x in 0..n {
        let (mut near, mut far) = (0.0, 0.0);
        for y in (0..n).filter(|&y| y != x) {
            let r = space.dist(x, y);
            let j = model.value(space, x, y);
            if r < eps {
                near += r * r * j * space.weight(y);
                inf = inf.min(j);
            } else {
                far += j * space.weight(y);
            }
        }
        near_sup = near_sup.max(near);
        far_sup = far_sup.max(far);
    }
    let vacuous = !inf.is_finite();
    KernelConditionReport {
        eps,
        near_moment_sup: near_sup,
        far_tail_sup: far_sup,
        inf_admissible: if vacuous { None } else { Some(inf) },
        vacuous,
    }
}
