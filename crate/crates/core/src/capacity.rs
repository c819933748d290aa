//! Discrete variational capacities and removability sweeps over resolution ladders.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hodge::WeightedComplex;
use crate::kernels::KernelModel;
use crate::linalg::{conjugate_gradient, Csr};
use crate::neighborhoods::NeighborhoodSystem;
use crate::space::{gen_interval, MetricMeasureSpace};

/// Free-unknown count at and above which conjugate gradients replace Cholesky.
pub const DIRECT_LIMIT: usize = 4000;
const CG_TOL: f64 = 1e-10;

/// Minimize `u^T (W_0 + B_0^T W_1 B_0) u` with `u = 1` on `clamp`.
#[derive(Debug, Clone)]
pub struct CapacityProblem {
    pub complex: Arc<WeightedComplex>,
    pub target: Vec<usize>,
    pub clamp: Vec<usize>,
}

impl CapacityProblem {
    /// Clamps the target plus every point within one mesh width of it.
    pub fn new(complex: Arc<WeightedComplex>, target: Vec<usize>) -> Result<Self> {
        let space = complex.space();
        let h = space.mesh_width();
        let clamp = (0..space.n())
            .filter(|&x| target.iter().any(|&k| space.dist(x, k) <= h * (1.0 + 1e-9)))
            .collect();
        Self::with_clamp(complex, target, clamp)
    }

    pub fn with_clamp(complex: Arc<WeightedComplex>, target: Vec<usize>, mut clamp: Vec<usize>) -> Result<Self> {
        if complex.top() < 1 {
            return Err(Error::InvalidArgument("capacity needs tuples of degree 1".into()));
        }
        let n = complex.space().n();
        clamp.sort_unstable();
        clamp.dedup();
        if clamp.is_empty() {
            return Err(Error::InvalidArgument("clamp set is empty".into()));
        }
        if let Some(&x) = clamp.iter().chain(&target).find(|&&x| x >= n) {
            return Err(Error::InvalidArgument(format!("point {x} out of range")));
        }
        Ok(CapacityProblem { complex, target, clamp })
    }

    /// Energy matrix `W_0 + B_0^T W_1 B_0`.
    pub fn energy_matrix(&self) -> Csr {
        let c = &self.complex;
        let n = c.space().n();
        let w0 = c.weights(0);
        let w1 = c.weights(1);
        let mut trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, w0[i])).collect();
        for (k, t) in c.tuples(1).iter().enumerate() {
            let (a, b, w) = (t[0], t[1], w1[k]);
            trip.extend([(a, a, w), (b, b, w), (a, b, -w), (b, a, -w)]);
        }
        Csr::from_triplets(n, n, trip)
    }

    /// `Q_0(u) = |B_0 u|^2` in the degree-1 weights.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        let c = &self.complex;
        c.tuples(1).iter().zip(c.weights(1)).map(|(t, w)| w * (u[t[1]] - u[t[0]]).powi(2)).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub minimizer: Vec<f64>,
    pub solver: String,
    /// Discrete maximum principle `0 <= u <= 1`, up to 1e-10.
    pub bounded: bool,
}

pub fn capacity(problem: &CapacityProblem) -> Result<CapacityResult> {
    let n = problem.complex.space().n();
    let mut clamped = vec![false; n];
    for &x in &problem.clamp {
        clamped[x] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&x| !clamped[x]).collect();
    let a = problem.energy_matrix();
    let mut u = vec![0.0; n];
    for &x in &problem.clamp {
        u[x] = 1.0;
    }
    let solver;
    if free.is_empty() {
        solver = "none".to_string();
    } else {
        let mut pos = vec![usize::MAX; n];
        for (k, &x) in free.iter().enumerate() {
            pos[x] = k;
        }
        let rhs: Vec<f64> = free
            .iter()
            .map(|&x| {
                -(a.indptr[x]..a.indptr[x + 1])
                    .filter(|&k| clamped[a.indices[k]])
                    .map(|k| a.data[k])
                    .sum::<f64>()
            })
            .collect();
        let sol = if free.len() < DIRECT_LIMIT {
            solver = "cholesky".to_string();
            let mut m = DMatrix::zeros(free.len(), free.len());
            for (r, &x) in free.iter().enumerate() {
                for k in a.indptr[x]..a.indptr[x + 1] {
                    let c = pos[a.indices[k]];
                    if c != usize::MAX {
                        m[(r, c)] += a.data[k];
                    }
                }
            }
            let chol = m
                .cholesky()
                .ok_or_else(|| Error::Internal("capacity system is not positive definite".into()))?;
            chol.solve(&DVector::from_vec(rhs)).as_slice().to_vec()
        } else {
            solver = "cg".to_string();
            let op = |v: &[f64]| {
                let mut full = vec![0.0; n];
                for (k, &x) in free.iter().enumerate() {
                    full[x] = v[k];
                }
                let av = a.matvec(&full);
                free.iter().map(|&x| av[x]).collect::<Vec<_>>()
            };
            conjugate_gradient(op, &rhs, CG_TOL, 20 * free.len())?.x
        };
        for (k, &x) in free.iter().enumerate() {
            u[x] = sol[k];
        }
    }
    let au = a.matvec(&u);
    let value: f64 = u.iter().zip(&au).map(|(x, y)| x * y).sum();
    let bounded = u.iter().all(|&v| (-1e-10..=1.0 + 1e-10).contains(&v));
    Ok(CapacityResult { capacity: value.max(0.0), minimizer: u, solver, bounded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Removable,
    NonRemovable,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Removable => "removable",
            Verdict::NonRemovable => "non-removable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Slope below which a monotone decreasing ladder counts as removable.
pub const REMOVABLE_SLOPE: f64 = -0.2;
/// Max/min ratio below which a ladder counts as stabilized.
pub const STABLE_RATIO: f64 = 1.25;
/// A stabilized ladder must also be flat: slope above this value.
pub const FLAT_SLOPE: f64 = -0.02;

/// Point hole in the unit interval grid, swept over resolutions and exponents.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub resolutions: Vec<usize>,
    pub hole: f64,
    pub alphas: Vec<f64>,
    pub eps: f64,
    pub c_pre: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { resolutions: vec![50, 100, 200, 400, 800], hole: 0.5, alphas: vec![0.5, 1.5], eps: 0.25, c_pre: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaTrend {
    pub alpha: f64,
    pub capacities: Vec<f64>,
    /// Least-squares slope of `ln cap` against `ln n`.
    pub slope: f64,
    pub ratio: f64,
    pub monotone_decreasing: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema: u32,
    pub config: SweepConfig,
    pub trends: Vec<AlphaTrend>,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn classify(resolutions: &[usize], caps: &[f64]) -> (f64, f64, bool, Verdict) {
    let lx: Vec<f64> = resolutions.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = caps.iter().map(|c| c.max(f64::MIN_POSITIVE).ln()).collect();
    let slope = fit_slope(&lx, &ly);
    let max = caps.iter().cloned().fold(f64::MIN, f64::max);
    let min = caps.iter().cloned().fold(f64::MAX, f64::min);
    let ratio = max / min;
    let monotone = caps.windows(2).all(|w| w[1] < w[0]);
    let verdict = if monotone && slope < REMOVABLE_SLOPE {
        Verdict::Removable
    } else if ratio < STABLE_RATIO && slope > FLAT_SLOPE {
        Verdict::NonRemovable
    } else {
        Verdict::Inconclusive
    };
    (slope, ratio, monotone, verdict)
}

/// Capacity of the point nearest to `hole` on `gen_interval(n)` with a fractional kernel.
pub fn point_hole_capacity(n: usize, hole: f64, alpha: f64, eps: f64, c_pre: f64) -> Result<f64> {
    let space: MetricMeasureSpace = gen_interval(n)?;
    let k = space
        .nearest_position(hole)
        .ok_or_else(|| Error::InvalidArgument("interval has no positions".into()))?;
    let kernel = KernelModel::fractional(1.0, alpha, c_pre)?;
    let complex = WeightedComplex::build(Arc::new(space), NeighborhoodSystem::rips(eps), kernel, 1)?;
    Ok(capacity(&CapacityProblem::new(Arc::new(complex), vec![k])?)?.capacity)
}

pub fn removability_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.resolutions.len() < 2 || config.alphas.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least two resolutions and one exponent".into()));
    }
    if !(config.hole > 0.0 && config.hole < 1.0) {
        return Err(Error::InvalidArgument("hole must lie inside the interval".into()));
    }
    let jobs: Vec<(f64, usize)> = config
        .alphas
        .iter()
        .flat_map(|&a| config.resolutions.iter().map(move |&n| (a, n)))
        .collect();
    let caps: Vec<f64> = jobs
        .par_iter()
        .map(|&(a, n)| point_hole_capacity(n, config.hole, a, config.eps, config.c_pre))
        .collect::<Result<_>>()?;
    let trends = config
        .alphas
        .iter()
        .zip(caps.chunks(config.resolutions.len()))
        .map(|(&alpha, c)| {
            let (slope, ratio, monotone_decreasing, verdict) = classify(&config.resolutions, c);
            AlphaTrend { alpha, capacities: c.to_vec(), slope, ratio, monotone_decreasing, verdict }
        })
        .collect();
    Ok(SweepReport { schema: 1, config: config.clone(), trends })
}

impl SweepReport {
    /// Columns `resolution,alpha,epsilon,capacity,slope,verdict`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("resolution,alpha,epsilon,capacity,slope,verdict\n");
        for t in &self.trends {
            for (n, c) in self.config.resolutions.iter().zip(&t.capacities) {
                let _ = writeln!(s, "{n},{},{},{c:.12e},{:.6},{}", t.alpha, self.config.eps, t.slope, t.verdict.label());
            }
        }
        s
    }
}
