//! Command-line driver for the data-driven model reduction pipeline.
//!
//! Each stage of the pipeline is exposed as a subcommand; `pipeline`
//! runs everything and emits a machine-readable report plus figure-data
//! CSVs. Stdout always carries a one-line JSON summary; files carry the
//! full artifacts.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 precondition
//! failure (for example a failed Slater check), 3 solver infeasibility
//! (a valid negative result, still reported as JSON), 4 internal error.

use clap::{Parser, Subcommand};
use gbt_core::balancing::{
    balance_from_gramians, build_reduction_setup, classical_bound, BalancingResult,
};
use gbt_core::bounds::{
    aposteriori_bound, apriori_bound, assemble_error_system, hinf_norm, BoundDims,
};
use gbt_core::data::{
    build_n, draw_noise, full_row_rank_check, load_system, noise_model_for, benchmark_input,
    read_matrix_csv, simulate, write_matrix_csv, ExperimentConfig, TrajectoryData,
};
use gbt_core::informativity::{check_informativity, mat_rows, InformativityCertificate};
use gbt_core::oracle::{builtin_true_system, ordinary_balanced_truncation, ordinary_gramians};
use gbt_core::qmi::QmiSet;
use gbt_core::{Dims, Error, StateSpaceModel};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Tolerance used for every H-infinity norm evaluation in the CLI.
const HINF_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "gbt",
    version,
    about = "Data-driven generalized balanced truncation pipeline"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the configured PRNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured noise level sigma.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Override the configured reduced order r.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Sweep specification for `pipeline`, e.g. `sigma=0.002,0.01,0.05`.
    #[arg(long, global = true)]
    sweep: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the configured experiment and write trajectory CSVs.
    Simulate,
    /// Assemble the data QMI matrix N and write it with a Slater report.
    BuildQmi,
    /// Solve the informativity LMIs and write the certificate.
    CheckInformativity,
    /// Compute the balancing transformation, singular values, and the
    /// reduced QMI set.
    Balance,
    /// Write the center reduced-order model.
    Reduce,
    /// Compute the a priori uniform error bound.
    BoundApriori,
    /// Compute the a posteriori error bound for the center model.
    BoundAposteriori,
    /// Model-based baselines of the true system.
    Oracle,
    /// Run every stage and write the full report plus figure CSVs.
    Pipeline,
}

/// CLI-level error carrying the intended exit code.
struct CliError {
    code: i32,
    message: String,
}

type CliResult<T> = std::result::Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidConfig(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            Error::NotRegular
            | Error::RankDeficientProjector
            | Error::MultiplicitySplit { .. }
            | Error::NotPd(_)
            | Error::NotPsd(_)
            | Error::NotSymmetric
            | Error::NotAMember(_)
            | Error::Unstable(_)
            | Error::DimensionMismatch(_) => 2,
            Error::Infeasible(_) => 3,
            _ => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn precondition(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}

fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(err) => {
            println!(
                "{}",
                json!({ "error": err.message, "exit_code": err.code })
            );
            err.code
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<Value> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| CliError {
        code: 1,
        message: format!("cannot create output directory: {e}"),
    })?;
    match cli.cmd {
        Cmd::Oracle => cmd_oracle(cli, &out),
        Cmd::Pipeline => {
            if let Some(spec) = &cli.sweep {
                cmd_sweep(cli, &out, spec)
            } else {
                let cfg = load_config(cli)?;
                let (report, hsv_rows, bounds_row) = run_pipeline(&cfg, base_dir(cli))?;
                write_hsv_csv(&out.join("hsv.csv"), &hsv_rows)?;
                write_bounds_csv(&out.join("bounds.csv"), &[bounds_row])?;
                write_json(&out.join("report.json"), &report)?;
                Ok(report)
            }
        }
        _ => {
            let cfg = load_config(cli)?;
            let prep = prepare(&cfg, base_dir(cli))?;
            match cli.cmd {
                Cmd::Simulate => cmd_simulate(&prep, &out),
                Cmd::BuildQmi => cmd_build_qmi(&prep, &out),
                Cmd::CheckInformativity => cmd_check_informativity(&prep, &out),
                Cmd::Balance => cmd_balance(&prep, &out),
                Cmd::Reduce => cmd_reduce(&prep, &out),
                Cmd::BoundApriori => cmd_bound_apriori(&prep, &out),
                Cmd::BoundAposteriori => cmd_bound_aposteriori(&prep, &out),
                Cmd::Oracle | Cmd::Pipeline => unreachable!(),
            }
        }
    }
}

fn base_dir(cli: &Cli) -> PathBuf {
    cli.config
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let path = cli.config.as_deref().ok_or_else(|| CliError {
        code: 1,
        message: "--config is required for this subcommand".into(),
    })?;
    let mut cfg = ExperimentConfig::load(path).map_err(CliError::from)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(sigma) = cli.sigma {
        cfg.noise.sigma = sigma;
    }
    if let Some(order) = cli.order {
        cfg.order_r = order;
    }
    cfg.validate().map_err(CliError::from)?;
    Ok(cfg)
}

/// Everything shared by the per-stage subcommands: the simulated
/// experiment and the assembled data QMI set.
struct Prep {
    cfg: ExperimentConfig,
    sys: StateSpaceModel,
    dims: Dims,
    traj: TrajectoryData,
    rescaled: bool,
    rejections: usize,
    n_set: QmiSet,
}

fn prepare(cfg: &ExperimentConfig, base: PathBuf) -> CliResult<Prep> {
    let sys = load_system(&cfg.system, &base)?;
    let dims = Dims::new(sys.n(), sys.m(), sys.p());
    let u = match cfg.input.kind.as_str() {
        "benchmark" => benchmark_input(cfg.l),
        _ => {
            let path = base.join(cfg.input.path.as_deref().unwrap_or_default());
            let u = read_matrix_csv(&path)?;
            if u.nrows() != dims.m || u.ncols() != cfg.l {
                return Err(CliError {
                    code: 1,
                    message: format!(
                        "input file must be {} x {}, got {} x {}",
                        dims.m,
                        cfg.l,
                        u.nrows(),
                        u.ncols()
                    ),
                });
            }
            u
        }
    };
    let draw = draw_noise(
        dims.n,
        dims.p,
        cfg.l,
        cfg.noise.sigma,
        cfg.noise.phi_scale,
        cfg.seed,
    )?;
    let traj = simulate(&sys, &u, &draw.x0, &draw.w, &draw.z)?;
    let (noise, rescaled) = noise_model_for(
        dims.n,
        dims.p,
        cfg.l,
        cfg.noise.sigma,
        cfg.noise.phi_scale,
        &draw.w,
        &draw.z,
    )?;
    let n_set = build_n(&traj, &noise)?;
    Ok(Prep {
        cfg: cfg.clone(),
        sys,
        dims,
        traj,
        rescaled,
        rejections: draw.rejections,
        n_set,
    })
}

/// Precondition gate shared by the stages that consume the QMI set.
fn check_preconditions(prep: &Prep) -> CliResult<()> {
    if !full_row_rank_check(&prep.traj) {
        return Err(precondition("[X-; U-] is not of full row rank"));
    }
    if !prep.n_set.check_slater_by_inertia() {
        return Err(precondition("Slater condition fails (inertia of N)"));
    }
    if !prep.n_set.check_regularity() {
        return Err(precondition("data QMI set is not regular"));
    }
    Ok(())
}

fn certificate(prep: &Prep) -> CliResult<InformativityCertificate> {
    check_preconditions(prep)?;
    Ok(check_informativity(&prep.n_set, &prep.dims, true)?)
}

fn balanced(cert: &InformativityCertificate) -> CliResult<BalancingResult> {
    Ok(balance_from_gramians(&cert.p, &cert.q)?)
}

fn center_rom(nred: &QmiSet, r: usize) -> CliResult<StateSpaceModel> {
    let z = nred.center()?;
    Ok(StateSpaceModel::from_stack(&z, r)?)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_simulate(prep: &Prep, out: &Path) -> CliResult<Value> {
    write_matrix_csv(&out.join("U_minus.csv"), &prep.traj.u_minus)?;
    write_matrix_csv(&out.join("X.csv"), &prep.traj.x_full)?;
    write_matrix_csv(&out.join("Y_minus.csv"), &prep.traj.y_minus)?;
    Ok(json!({
        "command": "simulate",
        "L": prep.cfg.l,
        "sigma": prep.cfg.noise.sigma,
        "seed": prep.cfg.seed,
        "noise_rejections": prep.rejections,
        "phi11_rescaled": prep.rescaled,
        "files": ["U_minus.csv", "X.csv", "Y_minus.csv"],
    }))
}

fn cmd_build_qmi(prep: &Prep, out: &Path) -> CliResult<Value> {
    write_matrix_csv(&out.join("N.csv"), prep.n_set.psi().as_mat())?;
    let inertia = gbt_core::linalg::inertia(
        prep.n_set.psi(),
        Some(1e-12 * prep.n_set.psi().norm2().max(1.0)),
    );
    let slater = prep.n_set.check_slater_by_inertia();
    let report = json!({
        "command": "build-qmi",
        "slater": slater,
        "regular": prep.n_set.check_regularity(),
        "inertia": { "neg": inertia.n_neg, "zero": inertia.n_zero, "pos": inertia.n_pos },
        "full_row_rank": full_row_rank_check(&prep.traj),
        "phi11_rescaled": prep.rescaled,
    });
    write_json(&out.join("slater.json"), &report)?;
    Ok(report)
}

fn cmd_check_informativity(prep: &Prep, out: &Path) -> CliResult<Value> {
    let cert = certificate(prep)?;
    let value = cert.to_json();
    write_json(&out.join("certificate.json"), &value)?;
    Ok(json!({
        "command": "check-informativity",
        "informative": true,
        "alpha": cert.alpha,
        "beta": cert.beta,
        "margins": { "P": cert.margin_p, "Q": cert.margin_q },
    }))
}

fn cmd_balance(prep: &Prep, out: &Path) -> CliResult<Value> {
    let cert = certificate(prep)?;
    let bal = balanced(&cert)?;
    let setup = build_reduction_setup(&prep.n_set, &bal, prep.cfg.order_r, &prep.dims)?;
    write_matrix_csv(&out.join("T.csv"), &bal.t)?;
    write_matrix_csv(&out.join("N_VW.csv"), setup.nred.psi().as_mat())?;
    let rows: Vec<(usize, f64, f64)> = bal
        .hsv
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1, prep.cfg.noise.sigma, v))
        .collect();
    write_hsv_csv(&out.join("hsv.csv"), &rows)?;
    let report = json!({
        "command": "balance",
        "T": mat_rows(&bal.t),
        "hsv": bal.hsv,
        "multiplicities": bal.multiplicities,
    });
    write_json(&out.join("balance.json"), &report)?;
    Ok(json!({
        "command": "balance",
        "hsv": bal.hsv,
        "multiplicities": bal.multiplicities,
        "kappa": bal.kappa,
    }))
}

fn cmd_reduce(prep: &Prep, out: &Path) -> CliResult<Value> {
    let cert = certificate(prep)?;
    let bal = balanced(&cert)?;
    let r = prep.cfg.order_r;
    let setup = build_reduction_setup(&prep.n_set, &bal, r, &prep.dims)?;
    let rom = center_rom(&setup.nred, r)?;
    write_matrix_csv(&out.join("A_hat.csv"), &rom.a)?;
    write_matrix_csv(&out.join("B_hat.csv"), &rom.b)?;
    write_matrix_csv(&out.join("C_hat.csv"), &rom.c)?;
    write_matrix_csv(&out.join("D_hat.csv"), &rom.d)?;
    let ell = bal
        .boundaries()
        .iter()
        .position(|&b| b == r)
        .unwrap_or(0);
    let meta = json!({
        "command": "reduce",
        "r": r,
        "ell": ell,
        "classical_bound": classical_bound(&bal, r)?,
        "spectral_radius": gbt_core::linalg::spectral_radius(&rom.a),
    });
    write_json(&out.join("rom.json"), &meta)?;
    Ok(meta)
}

fn cmd_bound_apriori(prep: &Prep, out: &Path) -> CliResult<Value> {
    let cert = certificate(prep)?;
    let bal = balanced(&cert)?;
    let r = prep.cfg.order_r;
    let setup = build_reduction_setup(&prep.n_set, &bal, r, &prep.dims)?;
    let bdims = BoundDims {
        n: prep.dims.n,
        r,
        m: prep.dims.m,
        p: prep.dims.p,
    };
    let bound = apriori_bound(&prep.n_set, &setup.nred, &bdims)?;
    let report = json!({
        "command": "bound-apriori",
        "gamma": bound.gamma,
        "K": mat_rows(bound.k.as_mat()),
        "delta": bound.delta,
        "eta": bound.eta,
        "mu": bound.mu,
        "solver_status": bound.status,
        "margins": { "lmi": bound.margin },
    });
    write_json(&out.join("bound_apriori.json"), &report)?;
    Ok(json!({ "command": "bound-apriori", "gamma": bound.gamma }))
}

fn cmd_bound_aposteriori(prep: &Prep, out: &Path) -> CliResult<Value> {
    let cert = certificate(prep)?;
    let bal = balanced(&cert)?;
    let r = prep.cfg.order_r;
    let setup = build_reduction_setup(&prep.n_set, &bal, r, &prep.dims)?;
    let rom = center_rom(&setup.nred, r)?;
    let bdims = BoundDims {
        n: prep.dims.n,
        r,
        m: prep.dims.m,
        p: prep.dims.p,
    };
    let bound = aposteriori_bound(&prep.n_set, &rom, &bdims)?;
    let report = json!({
        "command": "bound-aposteriori",
        "gamma0": bound.gamma0,
        "K": mat_rows(bound.k.as_mat()),
        "delta": bound.delta,
        "solver_status": bound.status,
        "margins": { "lmi": bound.margin },
    });
    write_json(&out.join("bound_aposteriori.json"), &report)?;
    Ok(json!({ "command": "bound-aposteriori", "gamma0": bound.gamma0 }))
}

fn cmd_oracle(cli: &Cli, out: &Path) -> CliResult<Value> {
    let (sys, r) = match &cli.config {
        Some(_) => {
            let cfg = load_config(cli)?;
            let sys = load_system(&cfg.system, &base_dir(cli))?;
            (sys, cfg.order_r)
        }
        None => (builtin_true_system(), cli.order.unwrap_or(3)),
    };
    let gram = ordinary_gramians(&sys)?;
    let bal = balance_from_gramians(&gram.p0, &gram.q0)?;
    let (rom, hsv) = ordinary_balanced_truncation(&sys, r)?;
    let err = assemble_error_system(&sys, &rom)?;
    let bt_err = hinf_norm(&err, HINF_TOL)?;
    let rows: Vec<(usize, f64, f64)> = hsv
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1, 0.0, v))
        .collect();
    write_hsv_csv(&out.join("hsv_true.csv"), &rows)?;
    let report = json!({
        "command": "oracle",
        "hsv_true": hsv,
        "r": r,
        "ordinary_bt_error": bt_err.norm,
        "hinf_certified": bt_err.certified,
        "classical_bound": classical_bound(&bal, r)?,
    });
    write_json(&out.join("oracle.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

type BoundsRow = (f64, f64, f64, f64, f64);

fn run_pipeline(
    cfg: &ExperimentConfig,
    base: PathBuf,
) -> CliResult<(Value, Vec<(usize, f64, f64)>, BoundsRow)> {
    let t_total = Instant::now();
    let t0 = Instant::now();
    let prep = prepare(cfg, base)?;
    let t_sim = t0.elapsed().as_secs_f64() * 1e3;

    check_preconditions(&prep)?;
    let slater = true;

    let t0 = Instant::now();
    let cert = check_informativity(&prep.n_set, &prep.dims, true)?;
    let t_inf = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let bal = balance_from_gramians(&cert.p, &cert.q)?;
    let r = prep.cfg.order_r;
    let setup = build_reduction_setup(&prep.n_set, &bal, r, &prep.dims)?;
    let rom = center_rom(&setup.nred, r)?;
    let cb = classical_bound(&bal, r)?;
    let t_bal = t0.elapsed().as_secs_f64() * 1e3;

    let bdims = BoundDims {
        n: prep.dims.n,
        r,
        m: prep.dims.m,
        p: prep.dims.p,
    };
    let t0 = Instant::now();
    let apriori = apriori_bound(&prep.n_set, &setup.nred, &bdims)?;
    let apost = aposteriori_bound(&prep.n_set, &rom, &bdims)?;
    let t_bounds = t0.elapsed().as_secs_f64() * 1e3;

    // Oracle comparisons against the data-generating system.
    let t0 = Instant::now();
    let gram = ordinary_gramians(&prep.sys)?;
    let obal = balance_from_gramians(&gram.p0, &gram.q0)?;
    let hsv_true = obal.hsv.clone();
    let bt_error = match ordinary_balanced_truncation(&prep.sys, r) {
        Ok((bt_rom, _)) => Some(hinf_norm(&assemble_error_system(&prep.sys, &bt_rom)?, HINF_TOL)?.norm),
        Err(_) => None,
    };
    let actual =
        hinf_norm(&assemble_error_system(&prep.sys, &rom)?, HINF_TOL)?.norm;
    let t_oracle = t0.elapsed().as_secs_f64() * 1e3;

    let dominates = bal
        .hsv
        .iter()
        .zip(hsv_true.iter())
        .all(|(g, t)| g >= t);

    let sigma = prep.cfg.noise.sigma;
    let report = json!({
        "config": serde_json::to_value(&prep.cfg).map_err(|e| CliError { code: 4, message: e.to_string() })?,
        "seed": prep.cfg.seed,
        "sigma": sigma,
        "slater": slater,
        "regular": true,
        "informative": true,
        "phi11_rescaled": prep.rescaled,
        "noise_rejections": prep.rejections,
        "hsv": bal.hsv,
        "hsv_dominates_true": dominates,
        "r": r,
        "classical_bound": cb,
        "gamma": apriori.gamma,
        "gamma0": apost.gamma0,
        "rom_spectral_radius": gbt_core::linalg::spectral_radius(&rom.a),
        "oracle": {
            "hsv_true": hsv_true,
            "ordinary_bt_error": bt_error,
            "actual_error_center_rom": actual,
        },
        "timings_ms": {
            "simulate": t_sim,
            "informativity": t_inf,
            "balance": t_bal,
            "bounds": t_bounds,
            "oracle": t_oracle,
            "total": t_total.elapsed().as_secs_f64() * 1e3,
        },
    });
    let hsv_rows: Vec<(usize, f64, f64)> = bal
        .hsv
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1, sigma, v))
        .collect();
    let bounds_row = (
        sigma,
        apriori.gamma,
        apost.gamma0,
        actual,
        bt_error.unwrap_or(f64::NAN),
    );
    Ok((report, hsv_rows, bounds_row))
}

fn cmd_sweep(cli: &Cli, out: &Path, spec: &str) -> CliResult<Value> {
    let sigmas = parse_sweep(spec)?;
    let cfg = load_config(cli)?;
    let base = base_dir(cli);
    let mut outcomes: Vec<CliResult<(Value, Vec<(usize, f64, f64)>, BoundsRow)>> =
        Vec::with_capacity(sigmas.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, &sigma) in sigmas.iter().enumerate() {
            let mut run_cfg = cfg.clone();
            run_cfg.noise.sigma = sigma;
            // Derived, deterministic per-level seed.
            run_cfg.seed = cfg.seed.wrapping_add(i as u64);
            let base = base.clone();
            handles.push(scope.spawn(move || run_pipeline(&run_cfg, base)));
        }
        for handle in handles {
            outcomes.push(handle.join().unwrap_or_else(|_| {
                Err(CliError {
                    code: 4,
                    message: "pipeline worker panicked".into(),
                })
            }));
        }
    });
    let mut merged: Vec<(f64, Value, Vec<(usize, f64, f64)>, BoundsRow)> = Vec::new();
    for (sigma, outcome) in sigmas.iter().zip(outcomes) {
        let (report, hsv_rows, bounds_row) = outcome?;
        merged.push((*sigma, report, hsv_rows, bounds_row));
    }
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut hsv_rows = Vec::new();
    let mut bounds_rows = Vec::new();
    let mut reports = Vec::new();
    for (_, report, rows, brow) in merged {
        hsv_rows.extend(rows);
        bounds_rows.push(brow);
        reports.push(report);
    }
    write_hsv_csv(&out.join("hsv.csv"), &hsv_rows)?;
    write_bounds_csv(&out.join("bounds.csv"), &bounds_rows)?;
    let report = Value::Array(reports);
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

fn parse_sweep(spec: &str) -> CliResult<Vec<f64>> {
    let rest = spec.strip_prefix("sigma=").ok_or_else(|| CliError {
        code: 1,
        message: "sweep must have the form sigma=a,b,c".into(),
    })?;
    let mut out = Vec::new();
    for part in rest.split(',') {
        let v: f64 = part.trim().parse().map_err(|_| CliError {
            code: 1,
            message: format!("invalid sweep value '{part}'"),
        })?;
        if v < 0.0 || !v.is_finite() {
            return Err(CliError {
                code: 1,
                message: format!("sweep value out of range '{part}'"),
            });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError {
            code: 1,
            message: "empty sweep".into(),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError {
        code: 4,
        message: e.to_string(),
    })?;
    std::fs::write(path, text + "\n").map_err(|e| CliError {
        code: 4,
        message: format!("{}: {e}", path.display()),
    })
}

fn write_hsv_csv(path: &Path, rows: &[(usize, f64, f64)]) -> CliResult<()> {
    let mut text = String::from("index,sigma,value\n");
    for (index, sigma, value) in rows {
        text.push_str(&format!("{index},{sigma},{value}\n"));
    }
    std::fs::write(path, text).map_err(|e| CliError {
        code: 4,
        message: format!("{}: {e}", path.display()),
    })
}

fn write_bounds_csv(path: &Path, rows: &[BoundsRow]) -> CliResult<()> {
    let mut text = String::from("sigma,gamma,gamma0,actual_error,ordinary_bt_error\n");
    for (sigma, gamma, gamma0, actual, bt) in rows {
        text.push_str(&format!("{sigma},{gamma},{gamma0},{actual},{bt}\n"));
    }
    std::fs::write(path, text).map_err(|e| CliError {
        code: 4,
        message: format!("{}: {e}", path.display()),
    })
}
