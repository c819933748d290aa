//! `nlh`: Betti numbers, parameter sweeps, verification suites and removability sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use nlhodge::capacity::{removability_sweep, SweepConfig};
use nlhodge::covers::{cech_nerve_betti, default_cover};
use nlhodge::hodge::{analyze, TolPolicy, WeightedComplex};
use nlhodge::kernels::KernelModel;
use nlhodge::neighborhoods::NeighborhoodSystem;
use nlhodge::space::{self, MetricMeasureSpace};
use nlhodge::verify::{run_suites, Suite, VerifyOptions};
use nlhodge::Error;

#[derive(Parser)]
#[command(name = "nlh", version, about = "Non-local Hodge Laplacians and cohomology of metric measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Harmonic dimensions, exact Betti numbers and spectra of one complex.
    Betti(BettiArgs),
    /// Betti numbers and spectral gaps over a grid of scales and exponents.
    Sweep(SweepArgs),
    /// Run property suites on bundled spaces.
    Verify(VerifyArgs),
    /// Point-hole capacities over a resolution ladder of the unit interval.
    Removability(RemovabilityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceKind {
    Circle,
    Interval,
    TwoComponents,
    PuncturedInterval,
    Sphere,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemKind {
    Rips,
    Hausdorff,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Fractional,
    Truncated,
    Constant,
    Custom,
}

#[derive(Args, Clone)]
struct SpaceArgs {
    #[arg(long, value_enum)]
    space: SpaceKind,
    /// Number of points (per component for two-components).
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.5)]
    gap: f64,
    #[arg(long, default_value_t = 0.5)]
    hole_center: f64,
    #[arg(long, default_value_t = 0.05)]
    hole_radius: f64,
    /// Distance matrix for `--space file`.
    #[arg(long)]
    dist: Option<PathBuf>,
    /// Point weights, one per line.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "fractional")]
    kernel: KernelArg,
    /// Kernel dimension; defaults to the dimension of the generator, else 1.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c_pre: f64,
    #[arg(long)]
    eps_trunc: Option<f64>,
    /// Truncated-kernel value at distances beyond `--eps-trunc`.
    #[arg(long, default_value_t = 0.0)]
    floor: f64,
    #[arg(long)]
    kernel_file: Option<PathBuf>,
}

#[derive(Args)]
struct BettiArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, value_enum, default_value = "rips")]
    system: SystemKind,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 1)]
    pmax: usize,
    /// `default`, `abs:<t>` or `rel:<r>`.
    #[arg(long, default_value = "default")]
    tol: String,
    /// Also compute Čech nerve Betti numbers of the default ball cover.
    #[arg(long)]
    nerve: bool,
    /// Directory for `betti.json` and `hodge.json`; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, value_enum, default_value = "rips")]
    system: SystemKind,
    /// Comma-separated scales.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    alpha: Vec<f64>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 1)]
    pmax: usize,
    #[arg(long, default_value = "default")]
    tol: String,
    /// Directory for `sweep.csv`; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// identity, hodge, betti, kernel, multiplier, mv, poincare, capacity, sphere or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Weight file replacing the bundled circle weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    /// Directory for `verify.json`; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RemovabilityArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
    resolutions: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.5")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    hole: f64,
    #[arg(long, default_value_t = 1.0)]
    c_pre: f64,
    /// Directory for `removability.csv` and `removability.json`; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status with a message for stderr.
enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Load(_) | Error::Unsupported(_) | Error::Io(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Verification(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn build_space(a: &SpaceArgs) -> Result<MetricMeasureSpace, Failure> {
    let s = match a.space {
        SpaceKind::Circle => space::gen_circle(a.n, a.radius)?,
        SpaceKind::Interval => space::gen_interval(a.n)?,
        SpaceKind::TwoComponents => space::gen_two_components(a.n, a.gap)?,
        SpaceKind::PuncturedInterval => space::gen_punctured_interval(a.n, a.hole_center, a.hole_radius)?,
        SpaceKind::Sphere => space::gen_sphere(a.n)?,
        SpaceKind::File => {
            let dist = a.dist.as_ref().ok_or_else(|| usage("--space file needs --dist"))?;
            return Ok(match &a.weights {
                Some(w) => space::load_with_weights_file(dist, w)?,
                None => space::load_distance_matrix(dist, None)?,
            });
        }
    };
    match &a.weights {
        None => Ok(s),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let w = space::parse_weights(&text)?;
            if w.len() != s.n() {
                return Err(usage(format!("expected {} weights, found {}", s.n(), w.len())));
            }
            let dist: Vec<f64> = (0..s.n()).flat_map(|i| s.row(i).to_vec()).collect();
            Ok(MetricMeasureSpace::new(dist, w, s.meta().clone())?)
        }
    }
}

fn build_system(kind: SystemKind, eps: Option<f64>) -> Result<NeighborhoodSystem, Failure> {
    let need = |e: Option<f64>| -> Result<f64, Failure> {
        let e = e.ok_or_else(|| usage("--eps is required for rips and hausdorff systems"))?;
        if !(e > 0.0 && e.is_finite()) {
            return Err(usage(format!("--eps must be positive and finite, got {e}")));
        }
        Ok(e)
    };
    Ok(match kind {
        SystemKind::Rips => NeighborhoodSystem::rips(need(eps)?),
        SystemKind::Hausdorff => NeighborhoodSystem::hausdorff(need(eps)?),
        SystemKind::Full => NeighborhoodSystem::Full,
    })
}

fn build_kernel(k: &KernelArgs, alpha: f64, space: &MetricMeasureSpace) -> Result<KernelModel, Failure> {
    let d = k.d.or(space.meta().dimension).unwrap_or(1.0);
    Ok(match k.kernel {
        KernelArg::Fractional => KernelModel::fractional(d, alpha, k.c_pre)?,
        KernelArg::Truncated => {
            let t = k.eps_trunc.ok_or_else(|| usage("--kernel truncated needs --eps-trunc"))?;
            KernelModel::truncated_fractional(d, alpha, k.c_pre, t, k.floor)?
        }
        KernelArg::Constant => KernelModel::constant(k.c_pre)?,
        KernelArg::Custom => {
            let path = k.kernel_file.as_ref().ok_or_else(|| usage("--kernel custom needs --kernel-file"))?;
            KernelModel::load_custom(path, space.n())?
        }
    })
}

fn parse_tol(s: &str) -> Result<TolPolicy, Failure> {
    let num = |v: &str| v.parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite());
    match s.split_once(':') {
        None if s == "default" => Ok(TolPolicy::Default),
        Some(("abs", v)) => num(v).map(TolPolicy::Absolute).ok_or_else(|| usage(format!("bad tolerance {s:?}"))),
        Some(("rel", v)) => num(v).map(TolPolicy::RelativeToMax).ok_or_else(|| usage(format!("bad tolerance {s:?}"))),
        _ => Err(usage(format!("bad tolerance {s:?}; use default, abs:<t> or rel:<r>"))),
    }
}

fn emit(out: Option<&Path>, name: &str, content: &str) -> CmdResult {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn space_params(a: &SpaceArgs, s: &MetricMeasureSpace) -> BTreeMap<String, Value> {
    let mut p = BTreeMap::new();
    p.insert("space".into(), json!(s.meta().generator));
    p.insert("n".into(), json!(s.n()));
    for (k, v) in &s.meta().params {
        p.insert(format!("space.{k}"), json!(v));
    }
    if let Some(d) = &a.dist {
        p.insert("dist_file".into(), json!(d.display().to_string()));
    }
    if let Some(w) = &a.weights {
        p.insert("weights_file".into(), json!(w.display().to_string()));
    }
    p
}

fn cmd_betti(a: BettiArgs) -> CmdResult {
    let space = build_space(&a.space)?;
    let system = build_system(a.system, a.eps)?;
    let kernel = build_kernel(&a.kernel, a.alpha, &space)?;
    let policy = parse_tol(&a.tol)?;
    let mut params = space_params(&a.space, &space);
    params.insert("system".into(), json!(system.kind_name()));
    if let Some(e) = system.scale() {
        params.insert("eps".into(), json!(e));
    }
    params.insert("kernel".into(), serde_json::to_value(&kernel.kind).expect("kernel serializes"));
    params.insert("pmax".into(), json!(a.pmax));
    params.insert("tol".into(), json!(a.tol));

    let complex = WeightedComplex::build(Arc::new(space), system.clone(), kernel, a.pmax + 1)?;
    params.insert("dims".into(), json!(complex.dims()));
    let analysis = analyze(&complex, a.pmax, policy)?;
    let mut betti = analysis.betti.clone();
    params.insert(
        "fields_tried".into(),
        json!(analysis.fields_tried.iter().map(|f| f.label()).collect::<Vec<_>>()),
    );
    let mut agree = analysis.agreement.all_agree;
    let mut nerve_json = Value::Null;
    if a.nerve {
        let eps = system.scale().unwrap_or_else(|| complex.space().diameter().max(f64::MIN_POSITIVE));
        let cover = default_cover(&complex, eps, Some(a.pmax + 1))?;
        let nerve = cech_nerve_betti(&cover, a.pmax)?;
        agree &= nerve.betti == betti.betti;
        nerve_json = serde_json::to_value(&nerve).expect("report serializes");
    }
    betti.parameters = params;
    let hodge = analysis.hodge_reports();
    let betti_doc = json!({
        "schema": 1,
        "betti": betti,
        "harmonic_dims": analysis.harmonic_dims(),
        "agreement": analysis.agreement,
        "nerve": nerve_json,
        "all_agree": agree,
    });
    let hodge_doc = json!({ "schema": 1, "degrees": hodge });
    match a.out.as_deref() {
        Some(dir) => {
            emit(Some(dir), "betti.json", &to_json(&betti_doc))?;
            emit(Some(dir), "hodge.json", &to_json(&hodge_doc))?;
            println!(
                "harmonic {:?} exact {:?} agree {agree}",
                analysis.harmonic_dims(),
                analysis.betti.betti
            );
        }
        None => emit(None, "", &to_json(&json!({ "betti": betti_doc, "hodge": hodge_doc })))?,
    }
    if agree {
        Ok(())
    } else {
        Err(Failure::Verification("numeric and exact Betti numbers disagree".into()))
    }
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    if a.eps.is_empty() || a.alpha.is_empty() {
        return Err(usage("sweep grids must be nonempty"));
    }
    let space = Arc::new(build_space(&a.space)?);
    let policy = parse_tol(&a.tol)?;
    let systems = a
        .eps
        .iter()
        .map(|&e| build_system(a.system, Some(e)))
        .collect::<Result<Vec<_>, _>>()?;
    let kernels = a
        .alpha
        .iter()
        .map(|&al| build_kernel(&a.kernel, al, &space))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Result<Vec<(String, bool)>, Error>> = systems
        .par_iter()
        .zip(&a.eps)
        .map(|(system, eps)| {
            let base = WeightedComplex::build(space.clone(), system.clone(), kernels[0].clone(), a.pmax + 1)?;
            kernels
                .iter()
                .zip(&a.alpha)
                .map(|(k, alpha)| {
                    let c = base.reweighted(k.clone())?;
                    let an = analyze(&c, a.pmax, policy)?;
                    let mut line = format!("{eps},{alpha}");
                    for h in &an.harmonic {
                        let _ = write!(line, ",{}", h.harmonic_dim);
                    }
                    for b in &an.betti.betti {
                        let _ = write!(line, ",{b}");
                    }
                    for h in &an.harmonic {
                        match h.smallest_nonzero() {
                            Some(g) => {
                                let _ = write!(line, ",{g:.12e}");
                            }
                            None => line.push(','),
                        }
                    }
                    let uncertain = an.harmonic.iter().any(|h| h.uncertain);
                    let _ = write!(line, ",{},{}", an.agreement.all_agree, uncertain);
                    Ok((line, an.agreement.all_agree))
                })
                .collect()
        })
        .collect();
    let mut csv = String::from("epsilon,alpha");
    for prefix in ["harmonic", "betti", "gap"] {
        for p in 0..=a.pmax {
            let _ = write!(csv, ",{prefix}_{p}");
        }
    }
    csv.push_str(",agree,uncertain\n");
    let mut all_agree = true;
    for r in rows {
        for (line, agree) in r? {
            all_agree &= agree;
            csv.push_str(&line);
            csv.push('\n');
        }
    }
    emit(a.out.as_deref(), "sweep.csv", &csv)?;
    if all_agree {
        Ok(())
    } else {
        Err(Failure::Verification("numeric and exact Betti numbers disagree at some grid point".into()))
    }
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let suites = Suite::parse_list(&a.suite)?;
    let opts = VerifyOptions { seed: a.seed, weights: a.weights.clone() };
    let reports = run_suites(&suites, &opts);
    let passed = reports.iter().all(|r| r.passed);
    let doc = json!({ "schema": 1, "passed": passed, "suites": reports });
    emit(a.out.as_deref(), "verify.json", &to_json(&doc))?;
    for r in &reports {
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        eprintln!("{:<11} {}{}", r.suite, if r.passed { "pass" } else { "FAIL" }, if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) });
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification("verification failed".into()))
    }
}

fn cmd_removability(a: RemovabilityArgs) -> CmdResult {
    let config = SweepConfig { resolutions: a.resolutions, hole: a.hole, alphas: a.alpha, eps: a.eps, c_pre: a.c_pre };
    let report = removability_sweep(&config)?;
    match a.out.as_deref() {
        Some(dir) => {
            emit(Some(dir), "removability.csv", &report.to_csv())?;
            emit(Some(dir), "removability.json", &to_json(&json!(report)))?;
            for t in &report.trends {
                println!("alpha {} slope {:.4} ratio {:.4} {}", t.alpha, t.slope, t.ratio, t.verdict.label());
            }
        }
        None => emit(None, "", &report.to_csv())?,
    }
    Ok(())
}

fn configure_threads() -> CmdResult {
    if let Ok(v) = std::env::var("NLH_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| usage(format!("NLH_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Betti(a) => cmd_betti(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Removability(a) => cmd_removability(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
