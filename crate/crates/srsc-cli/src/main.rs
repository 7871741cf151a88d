//! Command-line interface for the singular-curve toolkit.
//!
//! Subcommands:
//!
//! * `analyze` — hypothesis battery plus inertia pair at one horizon;
//! * `conjugate` — conjugate-point location over an `s` range by one or
//!   all detection methods, with a cross-method agreement table;
//! * `profile` — CSV profile of the indicator functions and index pairs,
//!   optionally with a gnuplot script;
//! * `verify-example` — the numbered acceptance criteria of the builtin
//!   example, with per-criterion pass/fail lines;
//! * `rho-check` — the reparametrization-invariance battery on random
//!   admissible controls.
//!
//! Every flag can also be supplied through a JSON config file
//! (`--config`), whose keys mirror the long flag names with underscores;
//! explicit command-line flags win over config values.
//!
//! Exit codes: `0` success, `1` operational error (I/O, bad input),
//! `2` hypothesis or method-applicability failure, `3` verification
//! failure.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use srsc::abnormal::abnormal_covector;
use srsc::flow::ReferenceCurve;
use srsc::hessian::{index_profile, inertia_pair};
use srsc::jacobi::{conjugate_points, indicator_profile, DetectionMethod, Zero};
use srsc::vfcore::Frame;
use srsc::{acceptance, tol, Variant};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "srsc", version, about = "Numerical toolkit for singular curves of rank-two structures")]
struct Cli {
    /// JSON config file whose keys mirror the long flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the hypothesis battery and inertia pair at one horizon.
    Analyze(AnalyzeArgs),
    /// Locate conjugate points over an s-range.
    Conjugate(ConjugateArgs),
    /// Write a CSV profile of indicators and index pairs.
    Profile(ProfileArgs),
    /// Run the acceptance criteria of the builtin example.
    VerifyExample(VerifyArgs),
    /// Run the reparametrization-invariance battery.
    RhoCheck(RhoArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Frame source: `builtin:<name>` or a JSON definition file.
    #[arg(long)]
    frame: Option<String>,
    /// Horizon s.
    #[arg(long)]
    s: Option<f64>,
    /// Discretization cells.
    #[arg(long)]
    grid: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Hessian,
    Jacobi,
    Engel,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    F,
    Ext,
    Both,
}

#[derive(Args, Debug)]
struct ConjugateArgs {
    #[arg(long)]
    frame: Option<String>,
    /// Lower end of the s-range (defaults to the scan step).
    #[arg(long)]
    s_min: Option<f64>,
    /// Upper end of the s-range.
    #[arg(long)]
    s_max: Option<f64>,
    /// Scan step for sign-change detection.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Detection method; `all` also emits a pairwise agreement table.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Which variant(s) to analyze.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Zero-location refinement tolerance.
    #[arg(long)]
    tol_zero: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long)]
    frame: Option<String>,
    /// Upper end of the sampled range (samples run from `step` to here).
    #[arg(long)]
    s_max: Option<f64>,
    /// Sample spacing.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (requires --out).
    #[arg(long)]
    emit_gnuplot: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Subset of criteria ids to run, e.g. `--criteria 1,5,9` (default all).
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<usize>>,
    /// Agreement tolerance between located zeros and oracle roots.
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Pairwise cross-method agreement tolerance.
    #[arg(long)]
    tol_cross: Option<f64>,
    /// Write the machine-readable JSON summary here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RhoArgs {
    #[arg(long)]
    frame: Option<String>,
    /// Number of random controls to draw.
    #[arg(long)]
    trials: Option<usize>,
    /// RNG seed for reproducible batteries.
    #[arg(long)]
    seed: Option<u64>,
}

/// Config-file mirror of the flags; unknown keys are rejected so typos
/// surface as errors instead of silently applying defaults.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    frame: Option<String>,
    s: Option<f64>,
    s_min: Option<f64>,
    s_max: Option<f64>,
    step: Option<f64>,
    grid: Option<usize>,
    method: Option<String>,
    variant: Option<String>,
    tol_zero: Option<f64>,
    tol_cross: Option<f64>,
    out: Option<PathBuf>,
    emit_gnuplot: Option<bool>,
    criteria: Option<Vec<usize>>,
    trials: Option<usize>,
    seed: Option<u64>,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file '{}'", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config file '{}'", p.display()))
        }
    }
}

fn load_frame(src: &str) -> anyhow::Result<Arc<Frame>> {
    Frame::from_source(src).with_context(|| format!("loading frame '{src}'"))
}

fn write_or_print(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("writing output file '{}'", p.display())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.root_cause().downcast_ref::<srsc::Error>() {
                Some(e) if e.is_hypothesis() => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args, file),
        Command::Conjugate(args) => cmd_conjugate(args, file),
        Command::Profile(args) => cmd_profile(args, file),
        Command::VerifyExample(args) => cmd_verify(args, file),
        Command::RhoCheck(args) => cmd_rho(args, file),
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs, file: FileConfig) -> anyhow::Result<u8> {
    let src = args
        .frame
        .or(file.frame)
        .unwrap_or_else(|| "builtin:engel-so3r".to_string());
    let s = args.s.or(file.s).ok_or_else(|| anyhow!("analyze needs --s"))?;
    let grid = args.grid.or(file.grid).unwrap_or(tol::DEFAULT_GRID);
    let out = args.out.or(file.out);

    let frame = load_frame(&src)?;
    let rc = ReferenceCurve::new(&frame, s, grid)?;
    let ab = abnormal_covector(&rc)?;
    let d = &ab.diagnostics;
    let (f, ext) = inertia_pair(&frame, s, grid, tol::EIG_ZERO_REL_TOL)?;

    let checks: [(&str, bool); 5] = [
        ("corank", ab.corank == 1),
        ("goh", d.goh_residual < tol::GOH_TOL),
        ("legendre", d.legendre_min > 0.0),
        ("strictness", d.strictness_residual < tol::STRICT_TOL),
        ("energy-projection", d.j_projection_norm > tol::J_PROJECTION_MIN),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();

    let report = serde_json::json!({
        "frame": frame.label,
        "s": s,
        "grid": grid,
        "corank": ab.corank,
        "goh_residual": d.goh_residual,
        "legendre_min": d.legendre_min,
        "strictness_residual": d.strictness_residual,
        "j_projection_norm": d.j_projection_norm,
        "indF": f.negative,
        "nullF": f.null,
        "indExt": ext.negative,
        "nullExt": ext.null,
        "hypotheses_pass": failed.is_empty(),
        "failed_checks": failed,
    });
    write_or_print(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;

    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("hypothesis check failed: {}", failed.join(", "));
        Ok(2)
    }
}

// ---------------------------------------------------------------------------
// conjugate
// ---------------------------------------------------------------------------

fn parse_method(s: &str) -> anyhow::Result<MethodArg> {
    match s {
        "hessian" => Ok(MethodArg::Hessian),
        "jacobi" => Ok(MethodArg::Jacobi),
        "engel" => Ok(MethodArg::Engel),
        "all" => Ok(MethodArg::All),
        other => Err(anyhow!("unknown method '{other}' (hessian|jacobi|engel|all)")),
    }
}

fn parse_variant(s: &str) -> anyhow::Result<VariantArg> {
    match s {
        "f" => Ok(VariantArg::F),
        "ext" => Ok(VariantArg::Ext),
        "both" => Ok(VariantArg::Both),
        other => Err(anyhow!("unknown variant '{other}' (f|ext|both)")),
    }
}

fn zero_json(z: &Zero) -> serde_json::Value {
    serde_json::json!({
        "s": z.s,
        "multiplicity": z.multiplicity,
        "tangential": z.tangential,
    })
}

/// Maximum positionwise distance between two sorted zero sets, or `None`
/// when their cardinalities differ.
fn set_distance(a: &[Zero], b: &[Zero]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    Some(
        a.iter()
            .zip(b)
            .map(|(x, y)| (x.s - y.s).abs())
            .fold(0.0_f64, f64::max),
    )
}

fn cmd_conjugate(args: ConjugateArgs, file: FileConfig) -> anyhow::Result<u8> {
    let src = args
        .frame
        .or(file.frame)
        .unwrap_or_else(|| "builtin:engel-so3r".to_string());
    let s_max = args.s_max.or(file.s_max).ok_or_else(|| anyhow!("conjugate needs --s-max"))?;
    let step = args.step.or(file.step).unwrap_or(0.05);
    let s_min = args.s_min.or(file.s_min).unwrap_or(step);
    let grid = args.grid.or(file.grid).unwrap_or(tol::DEFAULT_GRID);
    let tol_zero = args.tol_zero.or(file.tol_zero).unwrap_or(tol::ZERO_LOCATION_TOL);
    let method = match args.method {
        Some(m) => m,
        None => match file.method.as_deref() {
            Some(m) => parse_method(m)?,
            None => MethodArg::All,
        },
    };
    let variant = match args.variant {
        Some(v) => v,
        None => match file.variant.as_deref() {
            Some(v) => parse_variant(v)?,
            None => VariantArg::Both,
        },
    };
    let out = args.out.or(file.out);

    let frame = load_frame(&src)?;
    let variants: &[Variant] = match variant {
        VariantArg::F => &[Variant::F],
        VariantArg::Ext => &[Variant::Extended],
        VariantArg::Both => &[Variant::F, Variant::Extended],
    };
    let methods: &[DetectionMethod] = match method {
        MethodArg::Hessian => &[DetectionMethod::Hessian],
        MethodArg::Jacobi => &[DetectionMethod::Jacobi],
        MethodArg::Engel => &[DetectionMethod::Engel],
        MethodArg::All => {
            &[DetectionMethod::Hessian, DetectionMethod::Jacobi, DetectionMethod::Engel]
        }
    };

    let mut variants_json = serde_json::Map::new();
    for &v in variants {
        let mut per_method: Vec<(DetectionMethod, Vec<Zero>)> = Vec::new();
        let mut skipped = serde_json::Map::new();
        for &m in methods {
            if s_max <= s_min {
                per_method.push((m, Vec::new()));
                continue;
            }
            match conjugate_points(&frame, v, m, s_min, s_max, step, grid, tol_zero) {
                Ok(zs) => per_method.push((m, zs)),
                Err(e) if matches!(e, srsc::Error::MethodInapplicable(_)) && method == MethodArg::All => {
                    skipped.insert(m.label().to_string(), serde_json::json!(format!("{e}")));
                }
                Err(e) => return Err(e.into()),
            }
        }

        let mut zeros_json = serde_json::Map::new();
        for (m, zs) in &per_method {
            zeros_json.insert(
                m.label().to_string(),
                serde_json::Value::Array(zs.iter().map(zero_json).collect()),
            );
        }

        let mut agreement = serde_json::Map::new();
        if method == MethodArg::All {
            for i in 0..per_method.len() {
                for j in (i + 1)..per_method.len() {
                    let (ma, za) = &per_method[i];
                    let (mb, zb) = &per_method[j];
                    let key = format!("{}|{}", ma.label(), mb.label());
                    agreement.insert(
                        key,
                        match set_distance(za, zb) {
                            Some(d) => serde_json::json!(d),
                            None => serde_json::json!({
                                "count_mismatch": [za.len(), zb.len()],
                            }),
                        },
                    );
                }
            }
        }

        let mut entry = serde_json::Map::new();
        entry.insert("zeros".into(), serde_json::Value::Object(zeros_json));
        if !agreement.is_empty() {
            entry.insert("agreement".into(), serde_json::Value::Object(agreement));
        }
        if !skipped.is_empty() {
            entry.insert("skipped".into(), serde_json::Value::Object(skipped));
        }
        variants_json.insert(v.label().to_string(), serde_json::Value::Object(entry));
    }

    let report = serde_json::json!({
        "frame": frame.label,
        "s_range": [s_min, s_max],
        "step": step,
        "grid": grid,
        "variants": variants_json,
    });
    write_or_print(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

fn cmd_profile(args: ProfileArgs, file: FileConfig) -> anyhow::Result<u8> {
    let src = args
        .frame
        .or(file.frame)
        .unwrap_or_else(|| "builtin:engel-so3r".to_string());
    let s_max = args.s_max.or(file.s_max).ok_or_else(|| anyhow!("profile needs --s-max"))?;
    let step = args.step.or(file.step).unwrap_or(0.05);
    let grid = args.grid.or(file.grid).unwrap_or(tol::DEFAULT_GRID);
    let out = args.out.or(file.out);
    let emit_gnuplot = args.emit_gnuplot || file.emit_gnuplot.unwrap_or(false);
    if emit_gnuplot && out.is_none() {
        return Err(anyhow!("--emit-gnuplot needs --out to anchor the script and data"));
    }

    let frame = load_frame(&src)?;
    let lo = step.min(s_max);
    let prof = indicator_profile(&frame, lo, s_max, step, grid)?;
    let counts = index_profile(&frame, &prof.s, grid, tol::EIG_ZERO_REL_TOL);

    let mut csv = String::from("s,aF,aExt,indF,nullF,indExt,nullExt\n");
    for (i, &s) in prof.s.iter().enumerate() {
        let (_, row) = &counts[i];
        let pair = row.as_ref().map_err(|e| anyhow!("index computation failed at s = {s:.4}: {e}"))?;
        csv.push_str(&format!(
            "{:.6},{:.9e},{:.9e},{},{},{},{}\n",
            s, prof.a_f[i], prof.a_ext[i], pair.ind_f, pair.null_f, pair.ind_ext, pair.null_ext
        ));
    }
    write_or_print(out.as_deref(), csv.trim_end())?;

    if emit_gnuplot {
        let csv_path = out.as_deref().expect("checked above");
        let script_path = csv_path.with_extension("gp");
        let data = csv_path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| csv_path.display().to_string());
        let script = format!(
            "# Conjugate-point profile: indicators and index staircases.\n\
             set datafile separator comma\n\
             set key outside\n\
             set xlabel 's'\n\
             set multiplot layout 2,1\n\
             set ylabel 'indicator'\n\
             plot '{data}' skip 1 using 1:2 with lines lw 2 title 'aF', \\\n\
             \x20    '{data}' skip 1 using 1:3 with lines lw 2 title 'aExt'\n\
             set ylabel 'index'\n\
             plot '{data}' skip 1 using 1:4 with steps lw 2 title 'indF', \\\n\
             \x20    '{data}' skip 1 using 1:6 with steps lw 2 title 'indExt'\n\
             unset multiplot\n"
        );
        std::fs::write(&script_path, script)
            .with_context(|| format!("writing gnuplot script '{}'", script_path.display()))?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify-example
// ---------------------------------------------------------------------------

fn cmd_verify(args: VerifyArgs, file: FileConfig) -> anyhow::Result<u8> {
    let ids = args
        .criteria
        .or(file.criteria)
        .unwrap_or_else(acceptance::all_ids);
    let defaults = acceptance::AcceptanceConfig::default();
    let cfg = acceptance::AcceptanceConfig {
        zero_tol: args.tol_zero.or(file.tol_zero).unwrap_or(defaults.zero_tol),
        cross_tol: args.tol_cross.or(file.tol_cross).unwrap_or(defaults.cross_tol),
    };
    if ids.iter().any(|id| !(1..=9).contains(id)) {
        return Err(anyhow!("criteria ids must be between 1 and 9"));
    }

    let results = acceptance::run(&ids, &cfg);
    let mut lock = std::io::stdout().lock();
    for r in &results {
        writeln!(
            lock,
            "criterion {} ({:<19}) {} [{:6.1} s] {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        )?;
    }
    drop(lock);

    if let Some(out) = args.out.or(file.out) {
        let rows: Vec<serde_json::Value> = results
            .iter()
            .map(|r| {
                serde_json::json!({
                    "id": r.id,
                    "name": r.name,
                    "passed": r.passed,
                    "seconds": r.seconds,
                    "detail": r.detail,
                })
            })
            .collect();
        std::fs::write(&out, serde_json::to_string_pretty(&rows)?)
            .with_context(|| format!("writing summary '{}'", out.display()))?;
    }

    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("verification failed for criteria: {failed:?}");
        Ok(3)
    }
}

// ---------------------------------------------------------------------------
// rho-check
// ---------------------------------------------------------------------------

fn cmd_rho(args: RhoArgs, file: FileConfig) -> anyhow::Result<u8> {
    let src = args
        .frame
        .or(file.frame)
        .unwrap_or_else(|| "builtin:engel-so3r".to_string());
    let trials = args.trials.or(file.trials).unwrap_or(100);
    let seed = args.seed.or(file.seed).unwrap_or(0x5eed_0007);

    let frame = load_frame(&src)?;
    let battery = acceptance::rho_battery(&frame, trials, seed)?;
    println!(
        "rho-check: {} trials, max endpoint deviation {:.3e}, max round trip {:.3e}",
        battery.trials, battery.max_endpoint_dev, battery.max_round_trip
    );
    if battery.max_endpoint_dev < 1e-7 && battery.max_round_trip < 1e-10 {
        Ok(0)
    } else {
        eprintln!("rho-check failed: deviations exceed the invariance bounds (1e-7 / 1e-10)");
        Ok(3)
    }
}
