use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dyneq::angle::{parse_angle_literal, Angle};
use dyneq::bench::{check_report, run_bench, to_csv, to_json, BenchOptions};
use dyneq::benchgen::{default_theta, random_secret, BenchSpec, Family, Variant};
use dyneq::circuit::Circuit;
use dyneq::distribution::{parse_bitstring, OutcomeDistribution};
use dyneq::equivalence::{align_by_measurements, check_distribution, check_full, CheckConfig, Verdict, DEFAULT_DENSE_CAP};
use dyneq::extract::{extract, ExtractConfig};
use dyneq::qasm;
use dyneq::reconstruct::reconstruct_unitary;
use dyneq::sim::{outcome_distribution_static, SimConfig};
use dyneq::workers::{Workers, WORKERS_ENV};

const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "dyneq", version, about = "Equivalence checking and outcome extraction for dynamic quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Clone)]
struct Common {
    /// Equivalence tolerance (max-norm for full checks, TVD for --sim).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Branches with cumulative probability at or below this are dropped.
    #[arg(long, default_value_t = 1e-12)]
    prune: f64,
    /// Worker threads, a positive integer or `auto`.
    #[arg(long, env = WORKERS_ENV, default_value = "auto")]
    workers: Workers,
    /// Largest qubit count for dense unitary construction.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Seed for randomized choices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a dynamic circuit into an equivalent unitary one.
    Transform {
        input: PathBuf,
        /// Output QASM file (stdout if omitted).
        output: Option<PathBuf>,
        /// Where to write the wire map JSON (default: next to the output, or stderr).
        #[arg(long)]
        wiremap: Option<PathBuf>,
    },
    /// Check two circuits for equivalence. Exit code 0: equivalent, 1: not, 2: error.
    Check {
        first: PathBuf,
        second: PathBuf,
        /// Compare outcome distributions for one basis input instead of unitaries.
        #[arg(long)]
        sim: bool,
        /// Basis input as a bitstring, qubit 0 rightmost.
        #[arg(long)]
        input: Option<String>,
        /// Qubit correspondence: `identity`, `measurements`, or a list like `2,0,1`.
        #[arg(long, default_value = "identity")]
        align: String,
        /// Output correspondence as a list; defaults per mode.
        #[arg(long)]
        output_perm: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact outcome distribution of a (dynamic) circuit by branching simulation.
    Extract {
        input_file: PathBuf,
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 1u64 << 26)]
        max_branches: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Outcome distribution of a static circuit by one state-vector run.
    Simulate {
        input_file: PathBuf,
        #[arg(long)]
        input: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a benchmark circuit as QASM.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        size: usize,
        /// Phase angle for qpe, e.g. `3pi/8`.
        #[arg(long)]
        theta: Option<String>,
        /// Secret bitstring for bv (random from --seed when omitted).
        #[arg(long)]
        secret: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time transformation, verification, extraction and simulation per instance.
    Bench {
        /// Comma-separated families.
        #[arg(long, default_value = "bv,qft,qpe")]
        families: String,
        /// Sizes as a list `2,4,6` or range `2..10` (inclusive); may be empty.
        #[arg(long, default_value = "")]
        sizes: String,
        #[arg(long)]
        theta: Option<String>,
        /// CSV report path; a `.json` twin is written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Validate a bench CSV report.
    ReportCheck { report: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load(path: &Path) -> Result<Circuit> {
    let text = read(path)?;
    qasm::parse(&text).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
        anyhow!(lines.join("\n"))
    })
}

fn basis_input(text: Option<&str>, circuits: &[&Circuit]) -> Result<u64> {
    let Some(text) = text else { return Ok(0) };
    let value = parse_bitstring(text).ok_or_else(|| anyhow!("--input must be a nonempty bitstring, got `{text}`"))?;
    for g in circuits {
        if g.num_qubits < 64 && value >> g.num_qubits != 0 {
            bail!("input {text} does not fit {} qubit(s)", g.num_qubits);
        }
    }
    Ok(value)
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("`{s}` is not a nonnegative integer")))
        .collect()
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    match text.split_once("..") {
        Some((lo, hi)) => {
            let lo: usize = lo.trim().parse().context("bad range start")?;
            let hi: usize = hi.trim().trim_start_matches('=').parse().context("bad range end")?;
            Ok((lo..=hi).collect())
        }
        None => parse_list(text),
    }
}

fn parse_theta(text: Option<&str>) -> Result<Angle> {
    text.map_or(Ok(default_theta()), |t| parse_angle_literal(t).map_err(|e| anyhow!(e)))
}

fn distribution_text(d: &OutcomeDistribution) -> String {
    let mut out = String::new();
    for (key, p) in d.ranked() {
        out.push_str(&format!("{:>width$} {p:.10}\n", if key.is_empty() { "(none)" } else { key }, width = d.width.max(6)));
    }
    if d.pruned_mass > 0.0 {
        out.push_str(&format!("pruned mass {:.3e}\n", d.pruned_mass));
    }
    out
}

fn distribution_csv(d: &OutcomeDistribution) -> String {
    let mut out = String::from("bitstring,probability\n");
    for (key, p) in &d.entries {
        out.push_str(&format!("{key},{p:.17e}\n"));
    }
    out
}

fn cmd_transform(input: &Path, output: Option<&Path>, wiremap: Option<&Path>) -> Result<u8> {
    let g = load(input)?;
    let (rec, wires) = reconstruct_unitary(&g).map_err(|e| anyhow!("{}: {e}", input.display()))?;
    let text = qasm::serialize(&rec);
    let map = wires.to_json();
    match output {
        Some(out) => {
            write(out, &text)?;
            let map_path = wiremap.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("wiremap.json"));
            write(&map_path, &map)?;
        }
        None => {
            print!("{text}");
            match wiremap {
                Some(p) => write(p, &map)?,
                None => eprintln!("{map}"),
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    first: &Path,
    second: &Path,
    sim: bool,
    input: Option<&str>,
    align: &str,
    output_perm: Option<&str>,
    common: &Common,
) -> Result<u8> {
    let (g, g2) = (load(first)?, load(second)?);
    let input_permutation = match align {
        "identity" => None,
        "measurements" => Some(align_by_measurements(&g, &g2)?),
        list => Some(parse_list(list)?),
    };
    let defaults = CheckConfig::default();
    let cfg = CheckConfig {
        tolerance: common.tolerance.unwrap_or(defaults.tolerance),
        tvd_tolerance: common.tolerance.unwrap_or(defaults.tvd_tolerance),
        input_permutation,
        output_permutation: output_perm.map(parse_list).transpose()?,
        input_state: basis_input(input, &[&g, &g2])?,
        dense_cap: common.dense_cap,
        workers: common.workers,
        extract: ExtractConfig { prune_threshold: common.prune, workers: common.workers, ..Default::default() },
    };
    let result = if sim { check_distribution(&g, &g2, &cfg) } else { check_full(&g, &g2, &cfg) };
    let result = match result {
        Ok(r) => r,
        Err(e @ dyneq::equivalence::CheckError::TooManyQubits { .. }) => bail!("{e}; try `check --sim`"),
        Err(e) => return Err(e.into()),
    };
    match common.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&result)?),
        Format::Csv => println!(
            "verdict,max_deviation\n{},{:e}",
            serde_json::to_value(result.verdict)?.as_str().unwrap_or_default(),
            result.max_deviation
        ),
        Format::Text => {
            let word = match result.verdict {
                Verdict::Equivalent => "equivalent",
                Verdict::NotEquivalent => "not equivalent",
                Verdict::Error => "error",
            };
            let measure = if sim { "total variation distance" } else { "max deviation" };
            println!("{word} ({measure} {:.3e})", result.max_deviation);
        }
    }
    Ok(match result.verdict {
        Verdict::Equivalent => 0,
        Verdict::NotEquivalent => EXIT_NOT_EQUIVALENT,
        Verdict::Error => EXIT_ERROR,
    })
}

fn cmd_extract(path: &Path, input: Option<&str>, max_branches: u64, common: &Common) -> Result<u8> {
    let g = load(path)?;
    let basis = basis_input(input, &[&g])?;
    let cfg = ExtractConfig {
        prune_threshold: common.prune,
        max_branches,
        workers: common.workers,
        sim: SimConfig::default(),
    };
    let start = Instant::now();
    let ex = extract(&g, basis, &cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    match common.format {
        Format::Json => {
            let mut value = serde_json::to_value(&ex.distribution)?;
            value["input"] = json!(dyneq::distribution::bitstring_of(basis, g.num_qubits));
            value["stats"] = serde_json::to_value(&ex.stats)?;
            value["extractSeconds"] = json!(seconds);
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        Format::Csv => print!("{}", distribution_csv(&ex.distribution)),
        Format::Text => print!("{}", distribution_text(&ex.distribution)),
    }
    Ok(0)
}

fn cmd_simulate(path: &Path, input: Option<&str>, common: &Common) -> Result<u8> {
    let g = load(path)?;
    let basis = basis_input(input, &[&g])?;
    let start = Instant::now();
    let d = outcome_distribution_static(&g, basis, &SimConfig::default())?;
    let seconds = start.elapsed().as_secs_f64();
    match common.format {
        Format::Json => {
            let mut value = serde_json::to_value(&d)?;
            value["input"] = json!(dyneq::distribution::bitstring_of(basis, g.num_qubits));
            value["simulateSeconds"] = json!(seconds);
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        Format::Csv => print!("{}", distribution_csv(&d)),
        Format::Text => print!("{}", distribution_text(&d)),
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    family: Family,
    variant: Variant,
    size: usize,
    theta: Option<&str>,
    secret: Option<String>,
    seed: u64,
    output: Option<&Path>,
) -> Result<u8> {
    use rand::SeedableRng;
    let secret = match (family, secret) {
        (Family::Bv, None) => Some(random_secret(size, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))),
        (_, s) => s,
    };
    let spec = BenchSpec { family, variant, size, theta: Some(parse_theta(theta)?), secret };
    let text = qasm::serialize(&spec.build()?);
    match output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_bench(families: &str, sizes: &str, theta: Option<&str>, out: Option<&Path>, common: &Common) -> Result<u8> {
    let families = families
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<Family>().map_err(|e| anyhow!(e)))
        .collect::<Result<Vec<_>>>()?;
    let opts = BenchOptions {
        families,
        sizes: parse_sizes(sizes)?,
        theta: parse_theta(theta)?,
        seed: common.seed,
        dense_cap: common.dense_cap,
        workers: common.workers,
        tolerance: common.tolerance.unwrap_or(1e-9),
        prune_threshold: common.prune,
    };
    let rows = run_bench(&opts);
    let csv = to_csv(&rows);
    let json = to_json(&rows);
    if let Some(path) = out {
        write(path, &csv)?;
        write(&path.with_extension("json"), &json)?;
    }
    match common.format {
        Format::Json if out.is_none() => println!("{json}"),
        Format::Text => {
            for r in &rows {
                let t = |v: Option<f64>| v.map_or_else(|| "---".to_string(), |s| format!("{s:.4}"));
                println!(
                    "{:<4} {:>3}  n {}/{}  |G| {}/{}  t_trans {}  t_ver {}  t_extract {}  t_sim {}  {}",
                    r.family.to_string(),
                    r.size,
                    r.n_static,
                    r.n_dynamic,
                    r.g_static,
                    r.g_dynamic,
                    t(r.t_trans),
                    t(r.t_ver),
                    t(r.t_extract),
                    t(r.t_sim),
                    r.verdict
                );
            }
        }
        _ if out.is_none() => print!("{csv}"),
        _ => {}
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Transform { input, output, wiremap } => cmd_transform(&input, output.as_deref(), wiremap.as_deref()),
        Command::Check { first, second, sim, input, align, output_perm, common } => {
            cmd_check(&first, &second, sim, input.as_deref(), &align, output_perm.as_deref(), &common)
        }
        Command::Extract { input_file, input, max_branches, common } => {
            cmd_extract(&input_file, input.as_deref(), max_branches, &common)
        }
        Command::Simulate { input_file, input, common } => cmd_simulate(&input_file, input.as_deref(), &common),
        Command::Gen { family, variant, size, theta, secret, seed, output } => {
            cmd_gen(family, variant, size, theta.as_deref(), secret, seed, output.as_deref())
        }
        Command::Bench { families, sizes, theta, out, common } => {
            cmd_bench(&families, &sizes, theta.as_deref(), out.as_deref(), &common)
        }
        Command::ReportCheck { report } => {
            let rows = check_report(&read(&report)?).map_err(|e| anyhow!("{}: {e}", report.display()))?;
            println!("{}: {rows} row(s) ok", report.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
