//! Command-line front end for dyadic cube systems.
//!
//! Every command reads a metric space file, runs one check or construction,
//! and emits a single canonical JSON document on stdout (or to `--out`).
//! Exit codes: 0 for a positive answer (valid, certified, accepted, no
//! violations), 2 for a negative answer backed by a report, 1 for I/O,
//! schema, or parameter errors. Reports carry everything needed to recheck
//! the answer independently; nothing depends on invocation order or wall
//! clock, so equal inputs give byte-identical output.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use dyadic_cubes::characterization::AutoParamsError;
use dyadic_cubes::io::{self, IoError};
use dyadic_cubes::json::{
    certificate_to_json, cube_system_from_json, finalize_document, parent_order_from_json,
    point_system_from_json, system_document, verify_document_digest,
};
use dyadic_cubes::plumpness::{DPlumpParams, PlumpParams};
use dyadic_cubes::{
    auto_params, build_cube_system, build_order, build_plain_points, certify_cube_candidate,
    check_dplump, check_plump, verify_cube_system, verify_order, verify_point_system,
    FiniteMetricSpace, NetParams,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dyadic-cubes", version, about = "Dyadic cube systems on finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a space file against the metric axioms.
    Validate {
        space: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the doubling constant of a space.
    Doubling {
        space: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify plumpness of a subset, down the scale ladder or at all radii.
    PlumpCheck {
        space: PathBuf,
        /// Subset file: a JSON array of point indices.
        #[arg(long)]
        subset: PathBuf,
        /// Scale factor of the ladder.
        #[arg(long)]
        delta: Option<f64>,
        /// Coarsest ladder level (default 0).
        #[arg(long)]
        m: Option<i32>,
        /// Inner radius factor of the ladder.
        #[arg(long = "b0")]
        b0: Option<f64>,
        /// Outer radius factor of the ladder.
        #[arg(long = "B0")]
        b0_cap: Option<f64>,
        /// All-radii mode: largest radius to check (needs --b, excludes ladder flags).
        #[arg(long = "R")]
        r_max: Option<f64>,
        /// All-radii mode: inner ball fraction in (0, 1).
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a cube system over the whole space and verify its axioms.
    BuildSystem {
        space: PathBuf,
        /// Scale factor between levels.
        #[arg(long)]
        delta: f64,
        /// Separation factor of the nets.
        #[arg(long = "c0", default_value_t = 1.0)]
        c0: f64,
        /// Covering factor of the nets.
        #[arg(long = "C0", default_value_t = 1.0)]
        c0_cap: f64,
        /// Coarsest level (default: one cube covers the space).
        #[arg(long = "kmin")]
        k_min: Option<i32>,
        /// Finest level (default: all cubes are singletons).
        #[arg(long = "kmax")]
        k_max: Option<i32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a subset can arise as a cube, with a certificate.
    CertifyCube {
        space: PathBuf,
        /// Subset file: a JSON array of point indices.
        #[arg(long)]
        subset: PathBuf,
        /// Scale factor (default 1/16 under --auto).
        #[arg(long)]
        delta: Option<f64>,
        /// Coarsest ladder level (default 0).
        #[arg(long)]
        m: Option<i32>,
        /// Inner radius factor.
        #[arg(long = "b0")]
        b0: Option<f64>,
        /// Outer radius factor.
        #[arg(long = "B0")]
        b0_cap: Option<f64>,
        /// Cap the construction at this level instead of full resolution.
        #[arg(long = "kmax")]
        k_max: Option<i32>,
        /// Search for certifying parameters instead of taking them as flags.
        #[arg(long)]
        auto: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a system document against its space.
    VerifySystem {
        space: PathBuf,
        system: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Ok(raw) = std::env::var("DYADIC_THREADS") {
        let threads: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .context("DYADIC_THREADS must be a positive integer")?;
        dyadic_cubes::set_verification_threads(Some(threads));
    }
    match cli.command {
        Command::Validate { space, out } => cmd_validate(&space, out.as_deref()),
        Command::Doubling { space, out } => cmd_doubling(&space, out.as_deref()),
        Command::PlumpCheck { space, subset, delta, m, b0, b0_cap, r_max, b, out } => {
            cmd_plump_check(&space, &subset, delta, m, b0, b0_cap, r_max, b, out.as_deref())
        }
        Command::BuildSystem { space, delta, c0, c0_cap, k_min, k_max, out } => {
            cmd_build_system(&space, delta, c0, c0_cap, k_min, k_max, out.as_deref())
        }
        Command::CertifyCube { space, subset, delta, m, b0, b0_cap, k_max, auto, out } => {
            cmd_certify_cube(&space, &subset, delta, m, b0, b0_cap, k_max, auto, out.as_deref())
        }
        Command::VerifySystem { space, system, out } => {
            cmd_verify_system(&space, &system, out.as_deref())
        }
    }
}

/// Writes a finalized document to `--out` or stdout.
fn emit(doc: Value, out: Option<&Path>) -> anyhow::Result<()> {
    let text = finalize_document(doc);
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Loads a space; a file that parses but fails the metric axioms comes back
/// as `Err(report)` so commands can emit it and exit 2.
fn load_space(path: &Path) -> anyhow::Result<Result<FiniteMetricSpace, Value>> {
    match io::read_space(path) {
        Ok(space) => Ok(Ok(space)),
        Err(IoError::Invalid { error, .. }) => Ok(Err(json!({
            "kind": "metric-validation",
            "valid": false,
            "error": serde_json::to_value(&error).unwrap(),
        }))),
        Err(e) => Err(e.into()),
    }
}

fn cmd_validate(space: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    match load_space(space)? {
        Ok(s) => {
            emit(json!({"kind": "metric-validation", "valid": true, "n": s.n()}), out)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(report) => {
            emit(report, out)?;
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_doubling(space: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let s = match load_space(space)? {
        Ok(s) => s,
        Err(report) => {
            emit(report, out)?;
            return Ok(ExitCode::from(2));
        }
    };
    let bound = s.doubling_constant();
    emit(
        json!({
            "kind": "doubling-report",
            "n": s.n(),
            "doubling": serde_json::to_value(bound).unwrap(),
        }),
        out,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_plump_check(
    space: &Path,
    subset: &Path,
    delta: Option<f64>,
    m: Option<i32>,
    b0: Option<f64>,
    b0_cap: Option<f64>,
    r_max: Option<f64>,
    b: Option<f64>,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let s = match load_space(space)? {
        Ok(s) => s,
        Err(report) => {
            emit(report, out)?;
            return Ok(ExitCode::from(2));
        }
    };
    let e = io::read_subset(subset, s.n())?;
    let radius_mode = r_max.is_some() || b.is_some();
    let (mode, params_json, certified, verdict_json) = if radius_mode {
        if delta.is_some() || m.is_some() || b0.is_some() || b0_cap.is_some() {
            bail!("--R/--b select the all-radii mode and exclude --delta, --m, --b0, --B0");
        }
        let params = PlumpParams {
            r_max: r_max.context("all-radii mode needs --R")?,
            b: b.context("all-radii mode needs --b")?,
        };
        let verdict = check_plump(&s, &e, &params)?;
        (
            "radii",
            serde_json::to_value(params).unwrap(),
            verdict.certified,
            serde_json::to_value(&verdict).unwrap(),
        )
    } else {
        let params = DPlumpParams {
            delta: delta.context("ladder mode needs --delta")?,
            m: m.unwrap_or(0),
            inner: b0.context("ladder mode needs --b0")?,
            outer: b0_cap.context("ladder mode needs --B0")?,
        };
        let verdict = check_dplump(&s, &e, &params)?;
        (
            "ladder",
            serde_json::to_value(params).unwrap(),
            verdict.certified,
            serde_json::to_value(&verdict).unwrap(),
        )
    };
    emit(
        json!({
            "kind": "plumpness-report",
            "mode": mode,
            "n": s.n(),
            "subset": serde_json::to_value(&e).unwrap(),
            "params": params_json,
            "verdict": verdict_json,
        }),
        out,
    )?;
    Ok(if certified { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_build_system(
    space: &Path,
    delta: f64,
    c0: f64,
    c0_cap: f64,
    k_min: Option<i32>,
    k_max: Option<i32>,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let s = match load_space(space)? {
        Ok(s) => s,
        Err(report) => {
            emit(report, out)?;
            return Ok(ExitCode::from(2));
        }
    };
    let mut params = NetParams::with_default_range(&s, delta, c0, c0_cap)?;
    if let Some(k) = k_min {
        params.k_min = k;
    }
    if let Some(k) = k_max {
        params.k_max = k;
    }
    let points = build_plain_points(&s, &params)?;
    let order = build_order(&s, &points)?;
    let cubes = build_cube_system(&s, &points, &order)?;
    let point_report = verify_point_system(&s, &points);
    let order_report = verify_order(&s, &points, &order);
    let cube_report = verify_cube_system(&s, &cubes);
    let clean =
        point_report.is_empty() && order_report.is_empty() && cube_report.violations.is_empty();
    let mut doc = system_document(s.n(), &points, &order, &cubes);
    doc.as_object_mut().unwrap().insert(
        "verification".to_owned(),
        json!({
            "points": serde_json::to_value(&point_report).unwrap(),
            "order": serde_json::to_value(&order_report).unwrap(),
            "cubes": serde_json::to_value(&cube_report).unwrap(),
        }),
    );
    emit(doc, out)?;
    Ok(if clean { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify_cube(
    space: &Path,
    subset: &Path,
    delta: Option<f64>,
    m: Option<i32>,
    b0: Option<f64>,
    b0_cap: Option<f64>,
    k_max: Option<i32>,
    auto: bool,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let s = match load_space(space)? {
        Ok(s) => s,
        Err(report) => {
            emit(report, out)?;
            return Ok(ExitCode::from(2));
        }
    };
    let e = io::read_subset(subset, s.n())?;
    let params = if auto {
        if m.is_some() || b0.is_some() || b0_cap.is_some() {
            bail!("--auto chooses m, b0, and B0 itself; only --delta may be given");
        }
        match auto_params(&s, &e, delta.unwrap_or(1.0 / 16.0)) {
            Ok(p) => p,
            Err(AutoParamsError::NoFeasibleB0 { lo, hi, detail }) => {
                emit(
                    json!({
                        "kind": "auto-params-failure",
                        "n": s.n(),
                        "subset": serde_json::to_value(&e).unwrap(),
                        "delta": delta.unwrap_or(1.0 / 16.0),
                        "b0_band": [lo, hi],
                        "detail": detail,
                    }),
                    out,
                )?;
                return Ok(ExitCode::from(2));
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        DPlumpParams {
            delta: delta.context("explicit mode needs --delta (or pass --auto)")?,
            m: m.unwrap_or(0),
            inner: b0.context("explicit mode needs --b0 (or pass --auto)")?,
            outer: b0_cap.context("explicit mode needs --B0 (or pass --auto)")?,
        }
    };
    let cert = certify_cube_candidate(&s, &e, &params, k_max)?;
    let accepted = cert.accepted;
    emit(certificate_to_json(&cert), out)?;
    Ok(if accepted { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_verify_system(space: &Path, system: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let s = match load_space(space)? {
        Ok(s) => s,
        Err(report) => {
            emit(report, out)?;
            return Ok(ExitCode::from(2));
        }
    };
    let doc = io::read_json(system)?;
    if doc["kind"] != json!("dyadic-cube-system") {
        bail!("{}: not a dyadic-cube-system document", system.display());
    }
    let n = doc["n"]
        .as_u64()
        .with_context(|| format!("{}: missing point count", system.display()))? as usize;
    if n != s.n() {
        bail!(
            "{}: the document addresses {n} points but the space has {}",
            system.display(),
            s.n()
        );
    }
    let digest_ok = verify_document_digest(&doc);
    let points = point_system_from_json(&doc["points"], n)
        .with_context(|| format!("{}: bad point system", system.display()))?;
    let sizes: Vec<usize> = points.levels.iter().map(|l| l.centers.len()).collect();
    let order = parent_order_from_json(&doc["order"], &sizes)
        .with_context(|| format!("{}: bad parent order", system.display()))?;
    let cubes = cube_system_from_json(&doc["cubes"], n)
        .with_context(|| format!("{}: bad cube system", system.display()))?;
    let point_report = verify_point_system(&s, &points);
    let order_report = verify_order(&s, &points, &order);
    let cube_report = verify_cube_system(&s, &cubes);
    let clean = point_report.is_empty()
        && order_report.is_empty()
        && cube_report.violations.is_empty()
        && digest_ok != Some(false);
    emit(
        json!({
            "kind": "system-verification",
            "n": n,
            "digest_ok": digest_ok,
            "points": serde_json::to_value(&point_report).unwrap(),
            "order": serde_json::to_value(&order_report).unwrap(),
            "cubes": serde_json::to_value(&cube_report).unwrap(),
        }),
        out,
    )?;
    Ok(if clean { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
