use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gridroots::monodromy::{generate_group, MonodromyConfig, ParamFamily, Slice};
use gridroots::survey::{run_survey, SurveyConfig};
use gridroots::{classify, eliminant, solve_all};
use gridroots::{bezout_bound, complex_bound, Error, HomotopyConfig, PowerSystem, Result};

#[derive(Parser)]
#[command(name = "gridroots", version, about = "All-solutions power-flow toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, ValueEnum)]
enum SliceArg {
    /// Vary the six susceptances, injections pinned at zero.
    ZeroInjection,
    /// Vary susceptances and the non-slack injections together.
    Full,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find every complex solution of a system and print the table.
    Solve {
        /// Path to a JSON system description.
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Collapse a zero-injection PV system to one univariate polynomial
    /// and count real solutions from its positive roots.
    Eliminant {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample parameter loops and report the permutation group they
    /// generate on the solution set.
    Monodromy {
        #[arg(long)]
        system: PathBuf,
        /// Consecutive non-growing loops before the group is accepted.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SliceArg::ZeroInjection)]
        slice: SliceArg,
    },
    /// Solve many four-bus instances with random susceptances and
    /// histogram the real-solution counts.
    Survey {
        /// Number of instances.
        #[arg(long)]
        n: usize,
        /// Standard deviation of the susceptance distribution.
        #[arg(long, default_value_t = 8.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        mean: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the per-instance CSV here; the JSON summary always goes
        /// to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides GRIDROOTS_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the generic solution-count bound and the total-degree path
    /// count for an n-bus lossless PV network.
    Bound {
        #[arg(long)]
        n: usize,
    },
}

fn load_system(path: &PathBuf) -> Result<PowerSystem> {
    let text = fs::read_to_string(path)?;
    PowerSystem::from_json(&text)
}

fn cmd_solve(system: &PathBuf, seed: u64, format: Format) -> Result<()> {
    let ps = load_system(system)?;
    let sys = ps.build_system()?;
    let ss = solve_all(&sys, &HomotopyConfig::from_seed(seed))?;
    let records = classify::build_records(&ps, &ss, classify::REAL_TOL)?;
    let n_real = records.iter().filter(|r| r.is_real).count();
    let n_trivial = records.iter().filter(|r| r.is_trivial).count();
    match format {
        Format::Json => println!("{}", classify::solutions_to_json(&ss, &records)),
        Format::Csv => print!("{}", classify::records_to_csv(&ps, &records)),
    }
    eprintln!(
        "{} solutions ({} real, {} trivial), {} diverged, {} failed",
        ss.solutions.len(),
        n_real,
        n_trivial,
        ss.diverged_count,
        ss.failed_count
    );
    Ok(())
}

fn cmd_eliminant(system: &PathBuf, seed: u64) -> Result<()> {
    let ps = load_system(system)?;
    let sys = ps.build_system()?;
    let ss = solve_all(&sys, &HomotopyConfig::from_seed(seed))?;
    let report = eliminant::count_real_via_eliminant(&ps, &ss)?;
    println!("{}", report.poly.format_descending(4));
    println!("sign-change bound: {}", report.counts.descartes_max);
    println!("positive roots: {}", report.counts.sturm_positive);
    println!("sign-pattern solutions: {}", report.trivial_count);
    println!(
        "real solutions: {} + 2*{} = {}",
        report.trivial_count, report.counts.sturm_positive, report.real_count
    );
    Ok(())
}

fn cmd_monodromy(system: &PathBuf, budget: Option<usize>, seed: u64, slice: SliceArg) -> Result<()> {
    let ps = load_system(system)?;
    let slice = match slice {
        SliceArg::ZeroInjection => Slice::ZeroInjection,
        SliceArg::Full => Slice::Full,
    };
    let fam = ParamFamily::new(ps, slice)?;
    let mut cfg = MonodromyConfig::from_seed(seed);
    if let Some(b) = budget {
        cfg.budget = b;
    }
    let group = generate_group(&fam, &cfg)?;
    println!("{}", group.to_json());
    Ok(())
}

fn cmd_survey(
    n: usize,
    sigma: f64,
    mean: f64,
    seed: u64,
    out: Option<&PathBuf>,
    workers: Option<usize>,
) -> Result<()> {
    let mut cfg = SurveyConfig::new(n, seed);
    cfg.sigma = sigma;
    cfg.mean = mean;
    cfg.workers = workers;
    let result = run_survey(&cfg)?;
    if let Some(path) = out {
        fs::write(path, result.to_csv())?;
    }
    println!("{}", result.to_json_summary());
    Ok(())
}

fn cmd_bound(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Config("bound needs at least two buses".into()));
    }
    println!("complex solution bound: {}", complex_bound(n));
    println!("total-degree paths: {}", bezout_bound(n));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Solve { system, seed, format } => cmd_solve(&system, seed, format),
        Cmd::Eliminant { system, seed } => cmd_eliminant(&system, seed),
        Cmd::Monodromy { system, budget, seed, slice } => {
            cmd_monodromy(&system, budget, seed, slice)
        }
        Cmd::Survey { n, sigma, mean, seed, out, workers } => {
            cmd_survey(n, sigma, mean, seed, out.as_ref(), workers)
        }
        Cmd::Bound { n } => cmd_bound(n),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // malformed input files share the usage exit code; everything
            // downstream of a well-formed input is a structural failure
            match e {
                Error::Json(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
