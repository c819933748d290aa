//! Property suites over bundled generator spaces, with machine-readable summaries.

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{capacity, removability_sweep, CapacityProblem, SweepConfig, Verdict, STABLE_RATIO};
use crate::cochains::{elementary_value, ordered};
use crate::covers::{build_partition, cech_nerve_betti, check_homotopy, default_cover, mayer_vietoris_check};
use crate::error::{Error, Result};
use crate::hodge::{
    adjoint, analyze, dirichlet_via_laplacian, energy_norms, hodge_decompose, harmonic_dimension,
    multiplier_bound_check, TolPolicy, WeightedComplex,
};
use crate::kernels::KernelModel;
use crate::linalg::Csr;
use crate::neighborhoods::NeighborhoodSystem;
use crate::space::{gen_circle, gen_interval, gen_sphere, gen_two_components, parse_weights, MetricMeasureSpace};

/// One named assertion with its measured value and bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: value <= threshold, value, threshold, detail: detail.into() }
    }

    fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: value >= threshold, value, threshold, detail: detail.into() }
    }

    fn flag(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: ok, value: ok as u8 as f64, threshold: 1.0, detail: detail.into() }
    }

    fn error(name: &str, e: &Error) -> Self {
        Check::flag(name, false, e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identity,
    Hodge,
    Betti,
    Kernel,
    Multiplier,
    Mv,
    Poincare,
    Capacity,
    Sphere,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Identity,
        Suite::Hodge,
        Suite::Betti,
        Suite::Kernel,
        Suite::Multiplier,
        Suite::Mv,
        Suite::Poincare,
        Suite::Capacity,
        Suite::Sphere,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Hodge => "hodge",
            Suite::Betti => "betti",
            Suite::Kernel => "kernel",
            Suite::Multiplier => "multiplier",
            Suite::Mv => "mv",
            Suite::Poincare => "poincare",
            Suite::Capacity => "capacity",
            Suite::Sphere => "sphere",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .iter()
            .find(|s| s.name() == name)
            .map(|s| vec![*s])
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replacement weights for the bundled circle.
    pub weights: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 20240917, weights: None }
    }
}

pub const SPHERE_EPS: f64 = 0.45;

fn base_kernel() -> KernelModel {
    KernelModel::fractional(1.0, 0.5, 1.0).expect("valid exponent")
}

fn complex(space: MetricMeasureSpace, system: NeighborhoodSystem, top: usize) -> Result<WeightedComplex> {
    WeightedComplex::build(Arc::new(space), system, base_kernel(), top)
}

fn circle() -> Result<MetricMeasureSpace> {
    gen_circle(32, 1.0)
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
}

/// Circle with the weights from a file replacing the uniform ones.
pub fn circle_with_weights(path: &std::path::Path) -> Result<MetricMeasureSpace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    let w = parse_weights(&text)?;
    let base = circle()?;
    if w.len() != base.n() {
        return Err(Error::Load(format!("expected {} weights, found {}", base.n(), w.len())));
    }
    let dist: Vec<f64> = (0..base.n()).flat_map(|i| base.row(i).to_vec()).collect();
    MetricMeasureSpace::new(dist, w, base.meta().clone())
}

fn finish(suite: Suite, checks: Vec<Check>) -> SuiteReport {
    SuiteReport { schema: 1, suite: suite.name().into(), passed: checks.iter().all(|c| c.passed), checks }
}

/// Runs one suite; construction failures become failed checks.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let mut checks = Vec::new();
    let res = match suite {
        Suite::Identity => identity_suite(opts, &mut checks),
        Suite::Hodge => hodge_suite(opts, &mut checks),
        Suite::Betti => betti_suite(opts, &mut checks),
        Suite::Kernel => kernel_suite(&mut checks),
        Suite::Multiplier => multiplier_suite(opts, &mut checks),
        Suite::Mv => mv_suite(opts, &mut checks),
        Suite::Poincare => poincare_suite(opts, &mut checks),
        Suite::Capacity => capacity_suite(&mut checks),
        Suite::Sphere => sphere_suite(&mut checks),
    };
    if let Err(e) = res {
        checks.push(Check::error("setup", &e));
    }
    finish(suite, checks)
}

pub fn run_suites(suites: &[Suite], opts: &VerifyOptions) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, opts)).collect()
}

/// `|A| |x|`, used as the rounding scale of `A x`.
fn abs_matvec(a: &Csr, x: &[f64]) -> Vec<f64> {
    (0..a.rows)
        .map(|r| (a.indptr[r]..a.indptr[r + 1]).map(|k| (a.data[k] * x[a.indices[k]]).abs()).sum())
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Worst relative error of `<dF, G> = <F, d*G>` over random pairs, degrees `0..top`.
pub fn adjointness_error(c: &WeightedComplex, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..pairs {
        let p = k % c.top();
        let f = rand_vec(&mut rng, c.dim(p));
        let g = rand_vec(&mut rng, c.dim(p + 1));
        let df = c.delta(p, &f)?;
        let lhs = c.inner(p + 1, &df, &g);
        let rhs = c.inner(p, &f, &c.delta_adjoint(p, &g)?);
        let scale = (c.norm_sq(p + 1, &df) * c.norm_sq(p + 1, &g)).sqrt().max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}

fn random_tuple(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Vec<usize> {
    (0..len).map(|_| rng.gen_range(0..n)).collect()
}

/// Worst absolute deviation of each pointwise algebraic identity over random instances.
pub fn algebraic_identities(instances: usize, seed: u64) -> Vec<(String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 9;
    let mut worst = [0.0f64; 5];
    for k in 0..instances {
        let p = 1 + k % 3;
        let fs: Vec<Vec<f64>> = (0..=p).map(|_| rand_vec(&mut rng, n)).collect();
        let g = rand_vec(&mut rng, n);
        let x = random_tuple(&mut rng, p + 1, n);
        let y = random_tuple(&mut rng, p + 2, n);
        let refs = |r: std::ops::Range<usize>| fs[r].iter().map(|f| f.as_slice()).collect::<Vec<&[f64]>>();

        // Alt is idempotent
        let a1 = ordered::alt(ordered::tensor(refs(0..p + 1)))(&x);
        let a2 = ordered::alt(ordered::alt(ordered::tensor(refs(0..p + 1))))(&x);
        worst[0] = worst[0].max((a1 - a2).abs());

        // coboundary commutes with Alt
        let l = ordered::coboundary(ordered::alt(ordered::tensor(refs(0..p + 1))))(&y);
        let r = ordered::alt(ordered::coboundary(ordered::tensor(refs(0..p + 1))))(&y);
        worst[1] = worst[1].max((l - r).abs());

        // determinant evaluation of elementary functions, p <= 2
        let q = 1 + k % 2;
        let xq: Vec<usize> = if x.len() > q { x[..q + 1].to_vec() } else { random_tuple(&mut rng, q + 1, n) };
        let det = elementary_value(&g, &refs(0..q), &xq);
        let direct = ordered::average(&g)(&xq) * ordered::coboundary(ordered::alt(ordered::tensor(refs(0..q))))(&xq);
        worst[2] = worst[2].max((det - direct).abs());

        // expansion of Alt along the first slot
        let lhs = ordered::alt(ordered::tensor(refs(0..p + 1)))(&x);
        let rhs: f64 = (0..=p)
            .map(|i| {
                let rest: Vec<&[f64]> = (0..=p).filter(|&j| j != i).map(|j| fs[j].as_slice()).collect();
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * ordered::prepend(&fs[i], ordered::alt(ordered::tensor(rest)))(&x)
            })
            .sum::<f64>()
            / (p + 1) as f64;
        worst[3] = worst[3].max((lhs - rhs).abs());

        // Alt of a cup with an antisymmetric function is the average times the function
        let cup = ordered::alt(ordered::cup(&g, ordered::alt(ordered::tensor(refs(0..p + 1)))))(&x);
        let avg = ordered::average(&g)(&x) * ordered::alt(ordered::tensor(refs(0..p + 1)))(&x);
        worst[4] = worst[4].max((cup - avg).abs());
    }
    ["alt_idempotent", "coboundary_commutes_with_alt", "determinant_formula", "alt_expansion", "average_of_cup"]
        .iter()
        .zip(worst)
        .map(|(n, w)| (n.to_string(), w))
        .collect()
}

fn identity_suite(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let mut spaces = vec![
        ("circle", circle()?, NeighborhoodSystem::rips(0.5)),
        ("interval", gen_interval(64)?, NeighborhoodSystem::rips(0.1)),
        ("interval-hausdorff", gen_interval(40)?, NeighborhoodSystem::hausdorff(0.1)),
    ];
    if let Some(path) = &opts.weights {
        match circle_with_weights(path) {
            Ok(s) => spaces.push(("circle-weighted", s, NeighborhoodSystem::rips(0.5))),
            Err(e) => checks.push(Check::error("weights_file", &e)),
        }
    }
    for (name, space, system) in spaces {
        let c = complex(space, system, 3)?;
        let ops = c.coboundaries();
        let zero = ops.windows(2).all(|w| w[0].composes_to_zero(&w[1]));
        checks.push(Check::flag("coboundary_squares_to_zero", zero, format!("{name}, integer arithmetic, dims {:?}", c.dims())));
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst: f64 = 0.0;
        for p in 0..c.top() - 1 {
            let (a_lo, a_hi) = (adjoint(&c, p)?, adjoint(&c, p + 1)?);
            let y = rand_vec(&mut rng, c.dim(p + 2));
            let u = a_hi.matvec(&y);
            let z = a_lo.matvec(&u);
            worst = worst.max(max_abs(&z) / max_abs(&abs_matvec(&a_lo, &u)).max(f64::MIN_POSITIVE));
        }
        checks.push(Check::at_most("adjoint_squares_to_zero", worst, 1e-12, name));
        checks.push(Check::at_most("adjointness", adjointness_error(&c, 100, opts.seed)?, 1e-10, name));
    }
    for (name, w) in algebraic_identities(100, opts.seed) {
        checks.push(Check::at_most(&name, w, 1e-12, "100 random instances"));
    }
    Ok(())
}

fn hodge_suite(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let c = complex(gen_interval(64)?, NeighborhoodSystem::rips(0.1), 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    checks.push(Check::at_most("adjointness", adjointness_error(&c, 100, opts.seed)?, 1e-10, "interval n=64, 100 pairs"));
    let spectra: Vec<_> = (0..=2usize)
        .into_par_iter()
        .map(|p| harmonic_dimension(&c, p, TolPolicy::Default))
        .collect::<Result<_>>()?;
    for h in &spectra {
        let lmax = h.eigenvalues.last().copied().unwrap_or(0.0);
        let lmin = h.eigenvalues.first().copied().unwrap_or(0.0);
        checks.push(Check::at_least(
            "laplacian_psd",
            lmin / lmax.max(f64::MIN_POSITIVE),
            -1e-10,
            format!("degree {}", h.degree),
        ));
    }
    for p in 0..=2 {
        let f = c.cochain(p, rand_vec(&mut rng, c.dim(p)))?;
        let d = hodge_decompose(&c, p, &f)?;
        checks.push(Check::at_most("decomposition_residual", d.residuals.max(), 1e-8, format!("degree {p}")));
        let mut worst: f64 = 0.0;
        for _ in 0..33 {
            let f = rand_vec(&mut rng, c.dim(p));
            let direct = energy_norms(&c, p, &f)?.dirichlet;
            let via = dirichlet_via_laplacian(&c, p, &f)?;
            worst = worst.max((direct - via).abs() / direct.abs().max(f64::MIN_POSITIVE));
        }
        checks.push(Check::at_most("quadratic_form", worst, 1e-10, format!("degree {p}")));
    }
    Ok(())
}

/// Harmonic dims, exact Betti numbers and (when given) the nerve must equal `expected`.
fn three_way(
    checks: &mut Vec<Check>,
    name: &str,
    c: &WeightedComplex,
    p_max: usize,
    expected: &[usize],
    cover_eps: Option<f64>,
) -> Result<()> {
    let a = analyze(c, p_max, TolPolicy::Default)?;
    let harmonic = a.harmonic_dims();
    let uncertain = a.harmonic.iter().any(|h| h.uncertain);
    checks.push(Check::flag(
        "harmonic_dims",
        harmonic == expected && !uncertain,
        format!("{name}: {harmonic:?}, expected {expected:?}"),
    ));
    checks.push(Check::flag(
        "exact_betti",
        a.betti.betti == expected,
        format!("{name}: {:?} over {}", a.betti.betti, a.betti.field.clone().unwrap_or_default()),
    ));
    if let Some(eps) = cover_eps {
        let cover = default_cover(c, eps, Some(p_max + 1))?;
        let nerve = cech_nerve_betti(&cover, p_max)?.betti;
        checks.push(Check::flag("nerve_betti", nerve == expected, format!("{name}: {nerve:?} from {} balls", cover.balls.len())));
    }
    Ok(())
}

fn betti_suite(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    three_way(checks, "circle", &complex(circle()?, NeighborhoodSystem::rips(0.5), 2)?, 1, &[1, 1], Some(0.5))?;
    three_way(checks, "interval", &complex(gen_interval(64)?, NeighborhoodSystem::rips(0.1), 2)?, 1, &[1, 0], Some(0.1))?;
    three_way(
        checks,
        "two-components",
        &complex(gen_two_components(10, 0.5)?, NeighborhoodSystem::rips(0.3), 2)?,
        1,
        &[2, 0],
        Some(0.3),
    )?;
    three_way(checks, "full", &complex(gen_interval(10)?, NeighborhoodSystem::rips(2.0), 3)?, 2, &[1, 0, 0], Some(2.0))?;
    if let Some(path) = &opts.weights {
        match circle_with_weights(path) {
            Ok(s) => three_way(checks, "circle-weighted", &complex(s, NeighborhoodSystem::rips(0.5), 2)?, 1, &[1, 1], None)?,
            Err(e) => checks.push(Check::error("weights_file", &e)),
        }
    }
    Ok(())
}

fn kernel_suite(checks: &mut Vec<Check>) -> Result<()> {
    let cases = [
        ("circle", circle()?, NeighborhoodSystem::rips(0.5), 1usize),
        ("interval", gen_interval(40)?, NeighborhoodSystem::rips(0.1), 2),
    ];
    for (name, space, system, p_max) in cases {
        let base = complex(space, system, p_max + 1)?;
        let a0 = analyze(&base, p_max, TolPolicy::Default)?;
        let variants = [
            ("scaled-by-3", base_kernel().scaled(3.0)?),
            ("alpha-1.5", KernelModel::fractional(1.0, 1.5, 1.0)?),
        ];
        for (vname, kernel) in variants {
            let other = base.reweighted(kernel)?;
            let a1 = analyze(&other, p_max, TolPolicy::Default)?;
            let same = a1.betti.betti == a0.betti.betti && a1.harmonic_dims() == a0.harmonic_dims();
            checks.push(Check::flag(
                "betti_invariant",
                same,
                format!("{name} {vname}: {:?} vs {:?}", a1.harmonic_dims(), a0.harmonic_dims()),
            ));
            let change = a0
                .harmonic
                .iter()
                .zip(&a1.harmonic)
                .flat_map(|(x, y)| x.eigenvalues.iter().zip(&y.eigenvalues))
                .map(|(u, v)| (u - v).abs() / u.abs().max(v.abs()).max(1e-300))
                .fold(0.0, f64::max);
            checks.push(Check::at_least("spectrum_changes", change, 1e-6, format!("{name} {vname}")));
        }
    }
    Ok(())
}

fn multiplier_suite(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    let cases = [
        ("circle", circle()?, NeighborhoodSystem::rips(0.5), 2usize),
        ("interval", gen_interval(64)?, NeighborhoodSystem::rips(0.1), 3),
    ];
    for (name, space, system, top) in cases {
        let c = complex(space, system, top)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut failures = 0;
        let mut worst_ratio: f64 = 0.0;
        for k in 0..100 {
            let p = k % top;
            let chi: Vec<f64> = match k % 3 {
                0 => (0..c.space().n()).map(|_| rng.gen::<f64>()).collect(),
                1 => rand_vec(&mut rng, c.space().n()).iter().map(|v| 3.0 * v).collect(),
                _ => {
                    let x0 = rng.gen_range(0..c.space().n());
                    let r = rng.gen::<f64>() * 0.5 + 0.05;
                    (0..c.space().n()).map(|x| (1.0 - c.space().dist(x, x0) / r).max(0.0)).collect()
                }
            };
            let f = c.cochain(p, rand_vec(&mut rng, c.dim(p)))?;
            let m = multiplier_bound_check(&c, p, &chi, &f)?;
            if !m.passed {
                failures += 1;
            }
            worst_ratio = worst_ratio.max(m.lhs / m.rhs.max(f64::MIN_POSITIVE));
        }
        checks.push(Check::at_most("multiplier_failures", failures as f64, 0.0, format!("{name}, 100 pairs")));
        checks.push(Check::at_most("multiplier_worst_ratio", worst_ratio, 1.0, name));
    }
    Ok(())
}

/// Default circle and interval covers on Hausdorff systems, built to degree 3.
pub fn default_covers() -> Result<Vec<(&'static str, WeightedComplex, crate::covers::CoverSystem)>> {
    let circle_c = complex(circle()?, NeighborhoodSystem::hausdorff(0.5), 3)?;
    let interval_c = complex(gen_interval(40)?, NeighborhoodSystem::hausdorff(0.1), 3)?;
    let circle_cov = default_cover(&circle_c, 0.5, None)?;
    let interval_cov = default_cover(&interval_c, 0.1, None)?;
    Ok(vec![("circle", circle_c, circle_cov), ("interval", interval_c, interval_cov)])
}

fn mv_suite(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    for (name, _c, cover) in default_covers()? {
        for p in 0..=2 {
            let pou = build_partition(&cover, p)?;
            checks.push(Check::at_most("partition_sum", pou.sum_defect(), 1e-14, format!("{name} degree {p}")));
            let q_max = cover.max_level.min(3) - 1;
            let mv = mayer_vietoris_check(&cover, &pou, q_max, opts.seed)?;
            let rows: Vec<String> = mv.rows.iter().map(|r| format!("q={}:{}={}", r.q, r.dim_kernel, r.rank_in)).collect();
            checks.push(Check::flag("mv_rank_identities", mv.exact, format!("{name} degree {p}: {}", rows.join(" "))));
            checks.push(Check::flag("cech_squares_to_zero", mv.square_zero, format!("{name} degree {p}")));
            checks.push(Check::at_most("mv_reconstruction", mv.reconstruction_residual, 1e-12, format!("{name} degree {p}")));
            checks.push(Check::at_least("mv_control_fails", mv.control_residual, 1e-3, format!("{name} degree {p}, partition dropped")));
        }
    }
    Ok(())
}

fn poincare_suite(opts: &VerifyOptions, checks: &mut Vec<Check>) -> Result<()> {
    for (name, _c, cover) in default_covers()? {
        let results: Vec<_> = (0..cover.intersections.len())
            .into_par_iter()
            .map(|i| check_homotopy(&cover, i, 2, opts.seed))
            .collect();
        let mut failed = 0usize;
        let (mut id, mut pl): (f64, f64) = (0.0, 0.0);
        for r in &results {
            match r {
                Ok(h) => {
                    id = h.identity_residual.iter().fold(id, |m, v| m.max(*v));
                    pl = h.poincare_residual.iter().fold(pl, |m, v| m.max(*v));
                }
                Err(_) => failed += 1,
            }
        }
        let detail = format!("{name}: {} intersections", results.len());
        checks.push(Check::at_most("slice_failures", failed as f64, 0.0, detail.clone()));
        checks.push(Check::at_most("homotopy_identity", id, 1e-12, detail.clone()));
        checks.push(Check::at_most("poincare_lemma", pl, 1e-12, detail));
    }
    // on a Rips system the slice condition cannot hold on the circle cover
    let rips = complex(circle()?, NeighborhoodSystem::rips(0.5), 3)?;
    let cover = default_cover(&rips, 0.5, Some(0))?;
    let rejected = matches!(check_homotopy(&cover, 0, 2, opts.seed), Err(Error::AssumptionViolation { .. }));
    checks.push(Check::flag("rips_slice_rejected", rejected, "circle rips(0.5): empty slice is reported"));
    Ok(())
}

fn capacity_suite(checks: &mut Vec<Check>) -> Result<()> {
    let space = gen_interval(60)?;
    let total = space.total_mass();
    let build = |space: MetricMeasureSpace, eps: f64, kernel: KernelModel| -> Result<Arc<WeightedComplex>> {
        Ok(Arc::new(WeightedComplex::build(Arc::new(space), NeighborhoodSystem::rips(eps), kernel, 1)?))
    };
    let c = build(space.clone(), 0.25, base_kernel())?;
    let all = capacity(&CapacityProblem::with_clamp(c.clone(), vec![], (0..60).collect())?)?;
    checks.push(Check::at_most("full_clamp_total_mass", (all.capacity - total).abs() / total, 1e-12, "interval n=60"));

    let small = capacity(&CapacityProblem::with_clamp(c.clone(), vec![30], vec![29, 30, 31])?)?;
    let large = capacity(&CapacityProblem::with_clamp(c.clone(), vec![30], vec![27, 28, 29, 30, 31, 32, 33])?)?;
    checks.push(Check::flag(
        "monotone_in_clamp",
        small.capacity <= large.capacity * (1.0 + 1e-12),
        format!("{} <= {}", small.capacity, large.capacity),
    ));
    checks.push(Check::flag("maximum_principle", small.bounded && large.bounded, "0 <= u <= 1"));

    let narrow = build(space.clone(), 0.1, base_kernel())?;
    let cn = capacity(&CapacityProblem::with_clamp(narrow, vec![30], vec![29, 30, 31])?)?;
    checks.push(Check::flag(
        "monotone_in_pairs",
        cn.capacity <= small.capacity * (1.0 + 1e-12),
        format!("rips(0.1) {} <= rips(0.25) {}", cn.capacity, small.capacity),
    ));

    let factor = 2.5;
    let scaled = build(space.scaled_weights(factor)?, 0.25, base_kernel().scaled(1.0 / factor)?)?;
    let cs = capacity(&CapacityProblem::with_clamp(scaled, vec![30], vec![29, 30, 31])?)?;
    checks.push(Check::at_most(
        "homogeneity",
        (cs.capacity - factor * small.capacity).abs() / (factor * small.capacity),
        1e-10,
        format!("weights x{factor}, pair masses x{factor}"),
    ));

    let report = removability_sweep(&SweepConfig::default())?;
    for t in &report.trends {
        let caps = format!("{:?}", t.capacities);
        if t.alpha < 1.0 {
            checks.push(Check::flag("removable_trend_monotone", t.monotone_decreasing, format!("alpha {}: {caps}", t.alpha)));
            checks.push(Check::at_most("removable_trend_slope", t.slope, -0.2, format!("alpha {}", t.alpha)));
            checks.push(Check::flag("removable_verdict", t.verdict == Verdict::Removable, format!("alpha {}", t.alpha)));
        } else {
            checks.push(Check::at_most("stable_trend_ratio", t.ratio, STABLE_RATIO, format!("alpha {}: {caps}", t.alpha)));
            checks.push(Check::flag("stable_verdict", t.verdict == Verdict::NonRemovable, format!("alpha {}", t.alpha)));
        }
    }
    Ok(())
}

fn sphere_suite(checks: &mut Vec<Check>) -> Result<()> {
    let c = complex(gen_sphere(200)?, NeighborhoodSystem::rips(SPHERE_EPS), 3)?;
    let a = analyze(&c, 2, TolPolicy::Default)?;
    let uncertain = a.harmonic.iter().any(|h| h.uncertain);
    let target = [1, 0, 1];
    checks.push(Check::flag(
        "exact_betti",
        a.betti.betti == target,
        format!("{:?} over {}, dims {:?}", a.betti.betti, a.betti.field.clone().unwrap_or_default(), c.dims()),
    ));
    checks.push(Check::flag(
        "harmonic_agrees",
        a.harmonic_dims() == a.betti.betti && !uncertain,
        format!("{:?}, uncertain = {uncertain}", a.harmonic_dims()),
    ));
    Ok(())
}
