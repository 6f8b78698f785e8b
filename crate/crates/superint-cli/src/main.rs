//! Command-line driver for the verification engine.
//!
//! Exit codes: 0 = everything verified (or reports identical for `diff`),
//! 1 = a verification failed (or reports differ), 2 = configuration or
//! engine error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use superint::exactalg::Rat;
use superint::numerics::{numeric_report, NumCfg};
use superint::reps::{build_rep, check_rep, rep_report, spectrum_csv, RepRun};
use superint::structure::{
    stackel_transfer, structure_report, verify_structure, SCHEMA_VERSION,
};
use superint::systems::SystemId;

use superint_cli::config::{
    apply_overrides, check_pair, parse_config_file, JobConfig, Overrides,
};
use superint_cli::diff::{diff_reports, DiffError};
use superint_cli::runner::{resolve_params, run};

#[derive(Parser)]
#[command(
    name = "superint",
    version,
    about = "Exact verification engine for ladder algebras of superintegrable systems",
    long_about = "Builds ladder and symmetry operators for five families of \
                  second-order superintegrable systems at rational ladder order \
                  k = p/q, verifies their structure equations as exact operator \
                  identities, constructs finite-window representations, and \
                  cross-checks the special-function recurrences numerically."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify structure equations and emit the full JSON report.
    Verify(VerifyArgs),
    /// Build one finite-window representation with explicit parameters.
    Rep(RepArgs),
    /// Run the numeric cross-check suite for one ladder order.
    Numeric(NumericArgs),
    /// Verify the coupling-exchange transfer between the deformed families.
    Stackel(StackelArgs),
    /// Structurally compare two report files.
    Diff(DiffArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Configuration file (`key = value` lines); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Systems to verify (repeatable or comma separated); default: all.
    #[arg(long = "system", value_delimiter = ',')]
    systems: Vec<String>,
    /// Ladder order numerator.
    #[arg(short)]
    p: Option<i64>,
    /// Ladder order denominator.
    #[arg(short)]
    q: Option<i64>,
    /// Residual tolerance for the numeric cross-checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Sample points per numeric identity.
    #[arg(long)]
    points: Option<usize>,
    /// Master seed for every randomized section.
    #[arg(long)]
    seed: Option<u64>,
    /// Report file (default: $SUPERINT_OUT_DIR/superint-report.json, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Random parameter draws per representation sweep (0 disables sweeps).
    #[arg(long)]
    rep_draws: Option<usize>,
    /// Skip the numeric cross-check sections.
    #[arg(long)]
    skip_numerics: bool,
}

#[derive(Args)]
struct RepArgs {
    /// System to represent (caged, ttw, or kepler).
    #[arg(long)]
    system: String,
    /// Ladder order numerator.
    #[arg(short, default_value_t = 1)]
    p: i64,
    /// Ladder order denominator.
    #[arg(short, default_value_t = 1)]
    q: i64,
    /// Ladder applications per direction in the finite window.
    #[arg(short = 'M', long = "levels", default_value_t = 2)]
    levels: usize,
    /// Congruence offset of the primary ladder index.
    #[arg(long, default_value_t = 0)]
    p0: i64,
    /// Congruence offset of the secondary label.
    #[arg(long, default_value_t = 0)]
    q0: i64,
    /// First angular parameter (deformed families), as a rational.
    #[arg(long)]
    a: Option<String>,
    /// Second angular parameter (deformed families), as a rational.
    #[arg(long)]
    b: Option<String>,
    /// Frequency parameter (deformed families), as a rational.
    #[arg(long)]
    omega: Option<String>,
    /// Frequency parameter (caged family), as a rational.
    #[arg(long)]
    mu: Option<String>,
    /// First axis parameter (caged family), as a rational.
    #[arg(long)]
    a1: Option<String>,
    /// Second axis parameter (caged family), as a rational.
    #[arg(long)]
    a2: Option<String>,
    /// Output file (default: $SUPERINT_OUT_DIR/<name>, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the spectrum table as CSV instead of the JSON report.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct NumericArgs {
    /// Ladder order numerator.
    #[arg(short, default_value_t = 1)]
    p: i64,
    /// Ladder order denominator.
    #[arg(short, default_value_t = 1)]
    q: i64,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Sample points per identity.
    #[arg(long)]
    points: Option<usize>,
    /// Seed for the sample draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: $SUPERINT_OUT_DIR/superint-numeric.json, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StackelArgs {
    /// Ladder order numerator.
    #[arg(short, default_value_t = 1)]
    p: i64,
    /// Ladder order denominator.
    #[arg(short, default_value_t = 1)]
    q: i64,
    /// Output file (default: $SUPERINT_OUT_DIR/superint-stackel.json, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiffArgs {
    /// Baseline report.
    old: PathBuf,
    /// Report to compare against the baseline.
    new: PathBuf,
}

/// Writes `content` to the explicit target, to the directory named by
/// SUPERINT_OUT_DIR, or to stdout.  Returns the file path when one was used.
fn emit(content: &str, out: Option<&Path>, default_name: &str) -> anyhow::Result<Option<PathBuf>> {
    let target: Option<PathBuf> = match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os("SUPERINT_OUT_DIR")
            .map(|dir| Path::new(&dir).join(default_name)),
    };
    if let Some(path) = &target {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
        }
        std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    } else {
        print!("{content}");
    }
    Ok(target)
}

fn pretty(value: &impl serde::Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn parse_systems(names: &[String]) -> anyhow::Result<Vec<SystemId>> {
    let mut systems = Vec::new();
    for name in names {
        let id = SystemId::from_str(name).map_err(anyhow::Error::msg)?;
        if !systems.contains(&id) {
            systems.push(id);
        }
    }
    Ok(systems)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let mut cfg = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => JobConfig::default(),
    };
    let systems = if args.systems.is_empty() {
        None
    } else {
        Some(parse_systems(&args.systems)?)
    };
    let overrides = Overrides {
        systems,
        p: args.p,
        q: args.q,
        tol: args.tol,
        points: args.points,
        seed: args.seed,
        out: args.out,
        jobs: args.jobs,
        rep_draws: args.rep_draws,
        skip_numerics: args.skip_numerics,
    };
    apply_overrides(&mut cfg, &overrides)?;
    let report = run(&cfg)?;
    let target = emit(&pretty(&report)?, cfg.out.as_deref(), "superint-report.json")?;
    if let Some(path) = &target {
        eprintln!("report written to {}", path.display());
    }
    eprintln!(
        "verify: {} job(s), {} numeric section(s): {}",
        report.jobs.len(),
        report.numerics.len(),
        if report.all_verified {
            "all verified"
        } else {
            "FAILURES PRESENT"
        }
    );
    Ok(if report.all_verified { 0 } else { 1 })
}

fn cmd_rep(args: RepArgs) -> anyhow::Result<u8> {
    let system = SystemId::from_str(&args.system).map_err(anyhow::Error::msg)?;
    check_pair(args.p, args.q).map_err(anyhow::Error::msg)?;
    let v = verify_structure(system, args.p, args.q)?;

    let mut assignments: Vec<(String, Rat)> = Vec::new();
    // Flag spellings map onto model symbols; the frequency flag is spelled
    // out even though the symbol is short.
    let flags: [(&str, &Option<String>); 6] = [
        ("a", &args.a),
        ("b", &args.b),
        ("om", &args.omega),
        ("mu", &args.mu),
        ("a1", &args.a1),
        ("a2", &args.a2),
    ];
    for (symbol, value) in flags {
        if let Some(text) = value {
            let rat = Rat::from_str(text).map_err(|_| {
                anyhow::anyhow!(
                    "parameter `{symbol}`: `{text}` is not a rational (write integers or `n/d`)"
                )
            })?;
            assignments.push((symbol.to_string(), rat));
        }
    }
    let params = resolve_params(&v.model, &assignments).map_err(anyhow::Error::msg)?;
    let rep = build_rep(&v.model, &params, args.p0, args.q0, args.levels)?;
    let check = check_rep(&rep, &v)?;
    let run = RepRun { rep, check };
    let verified = run.check.all_verified;

    if args.csv {
        let target = emit(&spectrum_csv(&run.rep), args.out.as_deref(), "superint-spectrum.csv")?;
        if let Some(path) = &target {
            eprintln!("spectrum written to {}", path.display());
        }
    } else {
        let report = rep_report(&run);
        let target = emit(&pretty(&report)?, args.out.as_deref(), "superint-rep.json")?;
        if let Some(path) = &target {
            eprintln!("representation report written to {}", path.display());
        }
    }
    eprintln!(
        "rep: {} at (p, q) = ({}, {}), window dimension {}: {}",
        system.as_str(),
        args.p,
        args.q,
        run.rep.dim(),
        if verified { "all verified" } else { "FAILURES PRESENT" }
    );
    Ok(if verified { 0 } else { 1 })
}

fn cmd_numeric(args: NumericArgs) -> anyhow::Result<u8> {
    check_pair(args.p, args.q).map_err(anyhow::Error::msg)?;
    let defaults = NumCfg::default();
    let cfg = NumCfg {
        points: args.points.unwrap_or(defaults.points),
        seed: args.seed.unwrap_or(defaults.seed),
        tol: args.tol.unwrap_or(defaults.tol),
    };
    let report = numeric_report(args.p, args.q, &cfg)?;
    let target = emit(&pretty(&report)?, args.out.as_deref(), "superint-numeric.json")?;
    if let Some(path) = &target {
        eprintln!("numeric report written to {}", path.display());
    }
    eprintln!(
        "numeric: {} check(s) at (p, q) = ({}, {}): {}",
        report.checks.len(),
        args.p,
        args.q,
        if report.all_pass {
            "all within tolerance"
        } else {
            "FAILURES PRESENT"
        }
    );
    Ok(if report.all_pass { 0 } else { 1 })
}

fn cmd_stackel(args: StackelArgs) -> anyhow::Result<u8> {
    check_pair(args.p, args.q).map_err(anyhow::Error::msg)?;
    let ttw = verify_structure(SystemId::Ttw, args.p, args.q)?;
    let kepler = verify_structure(SystemId::KeplerDeformed, args.p, args.q)?;
    let data = stackel_transfer(&ttw, &kepler)?;
    let verified = data.p_plus_matches && data.p_minus_matches && data.energy_identity_verified;

    let full = serde_json::to_value(structure_report(&ttw, Some(&data)))?;
    let section = full.get("stackel").cloned().unwrap_or(Value::Null);
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "p": args.p,
        "q": args.q,
        "stackel": section,
    });
    let target = emit(&pretty(&doc)?, args.out.as_deref(), "superint-stackel.json")?;
    if let Some(path) = &target {
        eprintln!("exchange-map report written to {}", path.display());
    }
    eprintln!(
        "stackel: (p, q) = ({}, {}): {}",
        args.p,
        args.q,
        if verified { "all verified" } else { "FAILURES PRESENT" }
    );
    Ok(if verified { 0 } else { 1 })
}

fn cmd_diff(args: DiffArgs) -> anyhow::Result<u8> {
    let read = |path: &Path| -> anyhow::Result<Value> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    };
    let old = read(&args.old)?;
    let new = read(&args.new)?;
    match diff_reports(&old, &new) {
        Ok(lines) if lines.is_empty() => {
            eprintln!("reports are identical");
            Ok(0)
        }
        Ok(lines) => {
            for line in &lines {
                println!("{line}");
            }
            eprintln!("{} difference(s)", lines.len());
            Ok(1)
        }
        Err(err @ DiffError::SchemaMismatch { .. }) => Err(err.into()),
        Err(err) => Err(err.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Rep(args) => cmd_rep(args),
        Command::Numeric(args) => cmd_numeric(args),
        Command::Stackel(args) => cmd_stackel(args),
        Command::Diff(args) => cmd_diff(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
