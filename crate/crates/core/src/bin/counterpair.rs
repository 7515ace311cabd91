//! Command-line entry point: construction, verification, scans, and the
//! positive-approximation explorer, with JSON state persistence and CSV
//! emission.
//!
//! Exit codes: 0 = success with all certificates passing; 1 = a failed
//! certificate or a violation record (the machine-readable report is
//! still written); 2 = usage or I/O error.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use counterpair::approx::{exponent_summary, positive_records, APPROX_CSV_HEADER};
use counterpair::constants::{constants_report, g_of_gamma, AlgebraicConstants};
use counterpair::construction::{run, ConstructionState, ParameterProfile};
use counterpair::numerics::{Dyadic, RealEnclosure};
use counterpair::verify::{
    check_conditions, derived_constants, theorem_scan, verify_bits, SCAN_CSV_HEADER,
};

#[derive(Parser)]
#[command(
    name = "counterpair",
    about = "Construct and verify real pairs whose positive-quadrant linear form stays above a power-law floor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the algebraic-constant report with its sign-change and
    /// identity certificates.
    Constants {
        /// Working precision in bits.
        #[arg(long, default_value_t = 256)]
        bits: u32,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Run the inductive construction and write the state JSON.
    Construct {
        /// Parameter profile: "scaled" or "paper".
        #[arg(long, default_value = "scaled")]
        profile: String,
        /// Number of inductive steps (>= 1).
        #[arg(long)]
        steps: usize,
        /// Seed for deterministic tie-breaking.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the state JSON here instead of standard output.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Re-verify every per-step condition of a serialized state.
    Verify {
        /// State JSON produced by `construct`.
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Brute-force the positive quadrant against the profile-derived floor.
    Scan {
        /// State JSON produced by `construct`.
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// Scan all 0 <= m1, m2 <= height-max.
        #[arg(long = "height-max")]
        height_max: u64,
        /// Cap on worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Positive-quadrant best-approximation records and exponent trends.
    Approx {
        /// State JSON produced by `construct`.
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// Consider vectors with max(x1, x2) <= height-max.
        #[arg(long = "height-max")]
        height_max: u64,
        /// Cap on worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Also emit a gnuplot script for the exponent-vs-log-height curve.
        #[arg(long)]
        plot: Option<std::path::PathBuf>,
    },
}

/// Outcome of a subcommand: `Ok(true)` = all certificates pass, `Ok(false)`
/// = a certificate failed (report written), `Err` = usage/I-O trouble.
type CmdResult = Result<bool, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Constants { bits, out } => cmd_constants(bits, out.as_deref()),
        Command::Construct {
            profile,
            steps,
            seed,
            out,
        } => cmd_construct(&profile, steps, seed, out.as_deref()),
        Command::Verify { input, out } => cmd_verify(&input, out.as_deref()),
        Command::Scan {
            input,
            height_max,
            threads,
            out,
        } => cmd_scan(&input, height_max, threads, out.as_deref()),
        Command::Approx {
            input,
            height_max,
            threads,
            out,
            plot,
        } => cmd_approx(&input, height_max, threads, out.as_deref(), plot.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&std::path::Path>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_state(path: &std::path::Path) -> Result<ConstructionState, String> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ConstructionState::from_json(&raw).map_err(|e| format!("{}: {e}", path.display()))
}

/// The alpha enclosure at the precision the verifier would use, never
/// below 320 bits.
fn state_alpha(state: &ConstructionState) -> Result<(RealEnclosure, RealEnclosure), String> {
    let bits = verify_bits(state).max(320);
    state
        .alpha_enclosure(bits)
        .map_err(|e| format!("alpha enclosure: {e}"))
}

fn cmd_constants(bits: u32, out: Option<&std::path::Path>) -> CmdResult {
    if bits < 64 {
        return Err("--bits must be at least 64".into());
    }
    let report = constants_report(bits).map_err(|e| format!("constants: {e}"))?;
    let pass = report.sigma_sign_change_certificate
        && report.no_root_above_sigma
        && report.st_minus_1_exceeds_tau
        && report.root_identity_within_width;
    let mut json = serde_json::to_string_pretty(&report).expect("report serialization");
    json.push('\n');
    emit(out, &json)?;
    Ok(pass)
}

fn cmd_construct(
    profile: &str,
    steps: usize,
    seed: u64,
    out: Option<&std::path::Path>,
) -> CmdResult {
    if steps < 1 {
        return Err("--steps must be at least 1".into());
    }
    let profile = ParameterProfile::by_name(profile)
        .ok_or_else(|| format!("unknown profile {profile:?} (expected \"scaled\" or \"paper\")"))?;
    let state = run(profile, steps, seed).map_err(|e| format!("construction: {e}"))?;
    state.validate().map_err(|e| format!("validation: {e}"))?;
    emit(out, &state.to_json())?;
    Ok(true)
}

fn cmd_verify(input: &std::path::Path, out: Option<&std::path::Path>) -> CmdResult {
    let state = load_state(input)?;
    let report = check_conditions(&state).map_err(|e| format!("verification: {e}"))?;
    emit(out, &report.to_json())?;
    if let Some((nu, name, witness)) = report.first_failure() {
        eprintln!("verification failed at step {nu}: {name} ({witness})");
    }
    Ok(report.overall)
}

/// `# key: value` comment lines embedding the profile-derived constant
/// chain, so the CSV is self-describing.
fn derived_header(state: &ConstructionState) -> Result<String, String> {
    let derived =
        derived_constants(&state.profile).map_err(|e| format!("derived constants: {e}"))?;
    let mut s = String::new();
    s.push_str(&format!("# profile: {}\n", derived.profile));
    s.push_str(&format!("# floor_log2: {}\n", derived.scan_floor_log2));
    s.push_str(&format!("# coverage_chains: {}\n", derived.coverage_chains));
    for line in &derived.chain {
        s.push_str(&format!("# chain: {line}\n"));
    }
    Ok(s)
}

fn cmd_scan(
    input: &std::path::Path,
    height_max: u64,
    threads: Option<usize>,
    out: Option<&std::path::Path>,
) -> CmdResult {
    if height_max < 1 {
        return Err("--height-max must be at least 1".into());
    }
    let state = load_state(input)?;
    let (a1, a2) = state_alpha(&state)?;
    let derived =
        derived_constants(&state.profile).map_err(|e| format!("derived constants: {e}"))?;
    let consts =
        AlgebraicConstants::derive(a1.bits()).map_err(|e| format!("constants: {e}"))?;
    let floor = RealEnclosure::exact(Dyadic::pow2(derived.scan_floor_log2), a1.bits());
    let outcome = theorem_scan((&a1, &a2), height_max, &consts.sigma, Some(&floor), threads)
        .map_err(|e| format!("scan: {e}"))?;
    let mut csv = derived_header(&state)?;
    csv.push_str(&format!("# height_max: {height_max}\n"));
    csv.push_str(&format!(
        "# below_floor_count: {}\n",
        outcome.below_floor.len()
    ));
    csv.push_str(SCAN_CSV_HEADER);
    csv.push('\n');
    for rec in &outcome.below_floor {
        csv.push_str(&rec.csv_row());
        csv.push('\n');
    }
    csv.push_str(&outcome.min_normalized.csv_row());
    csv.push('\n');
    emit(out, &csv)?;
    if !outcome.below_floor.is_empty() {
        eprintln!(
            "scan found {} records below the floor 2^{}",
            outcome.below_floor.len(),
            derived.scan_floor_log2
        );
        return Ok(false);
    }
    Ok(true)
}

fn cmd_approx(
    input: &std::path::Path,
    height_max: u64,
    threads: Option<usize>,
    out: Option<&std::path::Path>,
    plot: Option<&std::path::Path>,
) -> CmdResult {
    if height_max < 1 {
        return Err("--height-max must be at least 1".into());
    }
    let state = load_state(input)?;
    let (a1, a2) = state_alpha(&state)?;
    let records =
        positive_records((&a1, &a2), height_max, threads).map_err(|e| format!("approx: {e}"))?;
    let summary = exponent_summary(&records).map_err(|e| format!("approx summary: {e}"))?;
    let consts =
        AlgebraicConstants::derive(a1.bits()).map_err(|e| format!("constants: {e}"))?;
    let g_sigma = g_of_gamma(&consts.sigma).map_err(|e| format!("g(sigma): {e}"))?;
    let mut csv = derived_header(&state)?;
    csv.push_str(&format!("# height_max: {height_max}\n"));
    csv.push_str(&format!(
        "# best_exponent: [{}, {}]\n",
        summary.best_exponent.lo().to_decimal_string(),
        summary.best_exponent.hi().to_decimal_string()
    ));
    csv.push_str(&format!(
        "# g_of_sigma: [{}, {}]\n",
        g_sigma.lo().to_decimal_string(),
        g_sigma.hi().to_decimal_string()
    ));
    csv.push_str(APPROX_CSV_HEADER);
    csv.push('\n');
    for rec in &records {
        csv.push_str(&rec.csv_row());
        csv.push('\n');
    }
    emit(out, &csv)?;
    if let Some(script_path) = plot {
        let data = out
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "approx.csv".into());
        let script = format!(
            "set datafile separator ','\n\
             set datafile commentschars '#'\n\
             set logscale x\n\
             set xlabel 'height'\n\
             set ylabel 'exponent'\n\
             set key left bottom\n\
             plot '{data}' skip 1 using 3:(($6+$7)/2) with linespoints title 'record exponent'\n"
        );
        std::fs::write(script_path, script)
            .map_err(|e| format!("cannot write {}: {e}", script_path.display()))?;
    }
    Ok(true)
}
