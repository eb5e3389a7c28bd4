//! `excyl` — dispersion sweeps, critical-radius location, boundary-operator
//! evaluation, and bifurcation branch tracing for equilibrium cylinder
//! surfaces.
//!
//! Exit codes: 0 success, 1 numeric failure (non-convergence, bracket
//! failure), 2 usage or I/O error.

mod config;
mod manifest;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use excyl_core::dispersion::{self, CriticalRadius};
use excyl_core::operator::{self, equilibrium_residual, QuadratureSpec};
use excyl_core::solver::{branch_to_csv, trace_branch, SolverConfig};
use excyl_core::{Error as CoreError, PeriodicProfile};
use rayon::prelude::*;

use config::FileConfig;
use manifest::{csv_with_manifest_ref, RunManifest, MANIFEST_FILE};

#[derive(Parser)]
#[command(name = "excyl", version, about = "Equilibrium cylinder surfaces: dispersion relation, boundary operator, bifurcation branches")]
struct Cli {
    /// Worker threads (flag > EXCYL_THREADS > config file > all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat key=value config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the critical radius (the unique zero of the dispersion
    /// relation V).
    LambdaStar {
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory for the run manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the dispersion relation to CSV.
    Dispersion {
        #[arg(long)]
        rho_min: Option<f64>,
        #[arg(long)]
        rho_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Add a V_quadrature column from the kernel-integral oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the boundary operator H on a profile from JSON
    /// ({"N": int, "a": [float, ...]}).
    EvalH {
        #[arg(long)]
        profile: PathBuf,
        /// Sample count on [0, π].
        #[arg(long)]
        points: Option<usize>,
        /// Evaluation strategy: direct, regularized, or both.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the bifurcating branch of mode k.
    Branch {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s_max: Option<f64>,
        #[arg(long)]
        s_step: Option<f64>,
        /// Galerkin truncation N.
        #[arg(long)]
        modes: Option<usize>,
        /// Dense verification grid size.
        #[arg(long)]
        verify_grid: Option<usize>,
        /// Output directory (branch.json, branch.csv, verification.json,
        /// manifest.json).
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Numeric(CoreError),
    Usage(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("EXCYL_THREADS").ok().and_then(|v| v.parse().ok())
    });
    let threads = file_cfg.resolve(threads, "threads", 0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::LambdaStar { tol, out } => cmd_lambda_star(&file_cfg, tol, out),
        Command::Dispersion { rho_min, rho_max, samples, oracle, out } => {
            cmd_dispersion(&file_cfg, rho_min, rho_max, samples, oracle, out)
        }
        Command::EvalH { profile, points, method, out } => {
            cmd_eval_h(&file_cfg, profile, points, method, out)
        }
        Command::Branch { k, s_max, s_step, modes, verify_grid, out } => {
            cmd_branch(&file_cfg, k, s_max, s_step, modes, verify_grid, out)
        }
    }
}

fn cmd_lambda_star(
    file_cfg: &FileConfig,
    tol: Option<f64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let tol = file_cfg.resolve(tol, "tol", 1e-12);
    let t0 = Instant::now();
    let critical = dispersion::find_lambda_star(tol)?;
    let elapsed = t0.elapsed();

    println!("lambda_star      = {:.16}", critical.lambda_star);
    println!("|V(lambda_star)| = {:.3e}", critical.residual);
    println!("V'(lambda_star)  = {:.12}  (> 0)", critical.v_prime_at_root);
    println!(
        "bracket          = ({}, {:.6})",
        dispersion::BRACKET_LO,
        dispersion::bracket_hi()
    );

    if let Some(dir) = out {
        let mut man = RunManifest::new(serde_json::json!({ "tol": tol }));
        man.lambda_star = Some(critical);
        man.record("find_lambda_star", elapsed);
        man.write(&dir)?;
        println!("manifest written to {}", dir.join(MANIFEST_FILE).display());
    }
    Ok(())
}

const DISPERSION_COLUMNS: &str = "rho,V,V_prime,V1,V2,V3";
const DISPERSION_COLUMNS_ORACLE: &str = "rho,V,V_prime,V1,V2,V3,V_quadrature";

fn cmd_dispersion(
    file_cfg: &FileConfig,
    rho_min: Option<f64>,
    rho_max: Option<f64>,
    samples: Option<usize>,
    oracle: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let rho_min = file_cfg.resolve(rho_min, "rho_min", 0.01);
    let rho_max = file_cfg.resolve(rho_max, "rho_max", 5.0);
    let samples = file_cfg.resolve(samples, "samples", 500);
    if !(rho_min > 0.0 && rho_max > rho_min) || samples < 2 {
        return Err(CliError::Usage(format!(
            "need 0 < rho_min < rho_max and samples >= 2 (got {rho_min}, {rho_max}, {samples})"
        )));
    }

    let kernel_cfg = excyl_core::kernels::KernelEvalConfig::default();
    let t0 = Instant::now();
    let rows: Vec<(dispersion::DispersionPoint, Option<f64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let rho = rho_min + (rho_max - rho_min) * i as f64 / (samples - 1) as f64;
            let point = dispersion::point(rho)?;
            let quad = if oracle {
                Some(dispersion::v_quadrature(rho, &kernel_cfg)?)
            } else {
                None
            };
            Ok((point, quad))
        })
        .collect::<Result<_, CoreError>>()?;
    let elapsed = t0.elapsed();

    let columns = if oracle { DISPERSION_COLUMNS_ORACLE } else { DISPERSION_COLUMNS };
    let mut csv = csv_with_manifest_ref(columns);
    for (p, q) in &rows {
        csv.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            p.rho, p.v, p.v_prime, p.v1, p.v2, p.v3
        ));
        if let Some(q) = q {
            csv.push_str(&format!(",{q:.11e}"));
        }
        csv.push('\n');
    }

    let sign_changes = rows
        .windows(2)
        .filter(|w| w[0].0.v.signum() != w[1].0.v.signum())
        .count();
    let last = rows.last().unwrap().0;
    eprintln!(
        "samples = {samples}, sign changes of V = {sign_changes}, last-row V/rho = {:.6}",
        last.v / last.rho
    );
    if oracle {
        let max_dev = rows
            .iter()
            .map(|(p, q)| (p.v - q.unwrap()).abs())
            .fold(0.0f64, f64::max);
        eprintln!("max |V - V_quadrature| = {max_dev:.3e}");
    }

    match out {
        Some(dir) => {
            let mut man = RunManifest::new(serde_json::json!({
                "rho_min": rho_min, "rho_max": rho_max, "samples": samples, "oracle": oracle,
            }));
            man.record("sweep", elapsed);
            man.write(&dir)?;
            std::fs::write(dir.join("dispersion.csv"), csv)?;
            eprintln!("wrote {}", dir.join("dispersion.csv").display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

const EVAL_H_COLUMNS: &str = "s,h,residual";
const EVAL_H_COLUMNS_BOTH: &str = "s,h_regularized,h_direct,discrepancy";

fn cmd_eval_h(
    file_cfg: &FileConfig,
    profile_path: PathBuf,
    points: Option<usize>,
    method: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let points = file_cfg.resolve(points, "points", 65);
    let method = method
        .or_else(|| file_cfg.get("method").map(str::to_string))
        .unwrap_or_else(|| "regularized".to_string());
    if points < 2 {
        return Err(CliError::Usage("need points >= 2".into()));
    }

    let text = std::fs::read_to_string(&profile_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", profile_path.display())))?;
    let profile: PeriodicProfile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", profile_path.display())))?;

    let spec = QuadratureSpec::default();
    let t0 = Instant::now();
    let (csv, summary) = match method.as_str() {
        "both" => {
            let reg = operator::evaluator("regularized").unwrap();
            let dir = operator::evaluator("direct").unwrap();
            let reg_vals = equilibrium_residual(reg, &profile, points, &spec)?;
            let dir_vals = equilibrium_residual(dir, &profile, points, &spec)?;
            let mut csv = csv_with_manifest_ref(EVAL_H_COLUMNS_BOTH);
            let mut max_dev = 0.0f64;
            for (j, (r, d)) in reg_vals.iter().zip(&dir_vals).enumerate() {
                let s = j as f64 * std::f64::consts::PI / (points - 1) as f64;
                let hr = r - 2.0 * std::f64::consts::PI;
                let hd = d - 2.0 * std::f64::consts::PI;
                max_dev = max_dev.max((hr - hd).abs());
                csv.push_str(&format!(
                    "{s:.11e},{hr:.11e},{hd:.11e},{:.11e}\n",
                    hr - hd
                ));
            }
            (csv, format!("max |h_regularized - h_direct| = {max_dev:.3e}"))
        }
        name => {
            let ev = operator::evaluator(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown method '{name}' (available: {}, both)",
                    operator::evaluator_names().join(", ")
                ))
            })?;
            let vals = equilibrium_residual(ev, &profile, points, &spec)?;
            let mut csv = csv_with_manifest_ref(EVAL_H_COLUMNS);
            let mut max_res = 0.0f64;
            for (j, r) in vals.iter().enumerate() {
                let s = j as f64 * std::f64::consts::PI / (points - 1) as f64;
                let h = r - 2.0 * std::f64::consts::PI;
                max_res = max_res.max(r.abs());
                csv.push_str(&format!("{s:.11e},{h:.11e},{r:.11e}\n"));
            }
            (csv, format!("max |H + 2pi| = {max_res:.3e}"))
        }
    };
    let elapsed = t0.elapsed();
    eprintln!("{summary}");

    match out {
        Some(dir) => {
            let mut man = RunManifest::new(serde_json::json!({
                "profile": profile_path.display().to_string(),
                "points": points,
                "method": method,
            }));
            man.record("eval_h", elapsed);
            man.write(&dir)?;
            std::fs::write(dir.join("eval_h.csv"), csv)?;
            eprintln!("wrote {}", dir.join("eval_h.csv").display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_branch(
    file_cfg: &FileConfig,
    k: u32,
    s_max: Option<f64>,
    s_step: Option<f64>,
    modes: Option<usize>,
    verify_grid: Option<usize>,
    out: PathBuf,
) -> Result<(), CliError> {
    let cfg = SolverConfig {
        modes: file_cfg.resolve(modes, "modes", 32),
        s_max: file_cfg.resolve(s_max, "s_max", 0.05),
        s_step: file_cfg.resolve(s_step, "s_step", 5e-3),
        verify_grid: file_cfg.resolve(verify_grid, "verify_grid", 256),
        ..SolverConfig::default()
    };

    let mut man = RunManifest::new(serde_json::json!({
        "k": k, "s_max": cfg.s_max, "s_step": cfg.s_step,
        "modes": cfg.modes, "verify_grid": cfg.verify_grid,
        "newton_tol": cfg.newton_tol, "fd_eps": cfg.fd_eps,
    }));

    let t0 = Instant::now();
    let critical = dispersion::find_lambda_star(1e-12)?;
    man.lambda_star = Some(critical);
    man.record("find_lambda_star", t0.elapsed());
    report_critical(&critical);

    let ev = operator::default_evaluator();
    let t0 = Instant::now();
    let branch = trace_branch(ev, k, &critical, &cfg)?;
    man.record("trace_branch", t0.elapsed());

    for p in &branch.points {
        println!(
            "s = {:+.5}  lambda = {:.12}  residual_sup = {:.3e}  mode0 = {:+.3e}  verified = {}",
            p.s, p.lambda, p.residual_grid_sup, p.mode0_residual, p.verified
        );
    }
    let verified = branch.points.iter().filter(|p| p.verified).count();
    println!("verified {verified}/{} points", branch.points.len());
    if let Some(reason) = &branch.stopped_early {
        println!("stopped early: {reason}");
    }
    for w in &branch.warnings {
        println!("warning: {w}");
    }

    man.write(&out)?;
    let branch_json = serde_json::json!({
        "manifest": MANIFEST_FILE,
        "points": branch.points,
    });
    std::fs::write(out.join("branch.json"), serde_json::to_string_pretty(&branch_json).unwrap())?;
    let mut csv = csv_with_manifest_ref("");
    csv.truncate(csv.len() - 1); // branch_to_csv supplies its own header line
    csv.push_str(&branch_to_csv(&branch.points));
    std::fs::write(out.join("branch.csv"), csv)?;
    let verification = serde_json::json!({
        "manifest": MANIFEST_FILE,
        "reports": branch.reports,
        "stopped_early": branch.stopped_early,
        "warnings": branch.warnings,
    });
    std::fs::write(
        out.join("verification.json"),
        serde_json::to_string_pretty(&verification).unwrap(),
    )?;
    println!("wrote branch.json, branch.csv, verification.json, {MANIFEST_FILE} to {}", out.display());
    Ok(())
}

fn report_critical(critical: &CriticalRadius) {
    println!(
        "lambda_star = {:.15} (|V| = {:.2e}, V' = {:.6})",
        critical.lambda_star, critical.residual, critical.v_prime_at_root
    );
}
