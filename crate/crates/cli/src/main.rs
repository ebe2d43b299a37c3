use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ergolab::appendix_lab::{appendix_report, AppendixConstruction};
use ergolab::groups_cocycles::Mat2;
use num_complex::Complex64;

mod checks;
mod config;
mod generate;
mod report;

use config::{ConfigError, ExperimentConfig};
use generate::{FixtureKind, FixtureParams};
use report::{Record, Report};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Run exact checks on finite dynamical systems")]
struct Cli {
    /// List every registered check and exit.
    #[arg(long)]
    list_checks: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a JSON config and write reports.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "ergolab-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Print a random instance document.
    Generate {
        kind: FixtureKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base length.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Group order (extensions) or fiber size (bundles).
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Size of the space the group acts on.
        #[arg(long, default_value_t = 2)]
        points: usize,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The U(2) construction lab.
    Appendix {
        #[command(subcommand)]
        command: AppendixCommand,
    },
}

#[derive(Subcommand)]
enum AppendixCommand {
    /// Run every check and print the JSON report.
    Run {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Row-major entries of w: "[[re,im],[re,im],[re,im],[re,im]]".
        #[arg(long)]
        w: Option<String>,
        /// Length of the finite base cycle.
        #[arg(long, default_value_t = 3)]
        cycle: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_checks {
        let mut out = std::io::stdout().lock();
        for c in checks::CHECKS {
            // A closed pipe (e.g. `| head`) is not an error.
            if writeln!(out, "{:<28} {:<10} {}", c.name, c.kind.as_str(), c.description).is_err() {
                break;
            }
        }
        return ExitCode::SUCCESS;
    }
    let code = match cli.command {
        None => {
            eprintln!("nothing to do; see --help");
            EXIT_CONFIG
        }
        Some(Command::Run { config, out, seed, tol, cap }) => run(&config, &out, seed, tol, cap),
        Some(Command::Generate { kind, seed, n, m, rank, points, out }) => {
            generate_cmd(kind, &FixtureParams { seed, n, m, rank, points }, out.as_deref())
        }
        Some(Command::Appendix { command: AppendixCommand::Run { seed, samples, w, cycle } }) => {
            appendix_cmd(seed, samples, w.as_deref(), cycle)
        }
    };
    ExitCode::from(code)
}

fn run(path: &Path, out: &Path, seed: Option<u64>, tol: Option<f64>, cap: Option<usize>) -> u8 {
    let mut cfg: ExperimentConfig = match config::load_config(path) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    if let Some(s) = seed {
        cfg.settings.seed = s;
    }
    if let Some(t) = tol {
        cfg.settings.tol = t;
    }
    if let Some(c) = cap {
        cfg.settings.cap = c;
    }
    let instances = match config::validate(&cfg) {
        Ok(i) => i,
        Err(e) => return config_error(&e),
    };
    let (records, timings) = execute(&cfg, &instances);
    let report = Report::new(cfg.settings.clone(), records);
    if let Err(e) = report::write(&report, &timings, out) {
        eprintln!("error: writing reports to {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    for r in &report.records {
        println!("{} {} [{}]", if r.passed { "PASS" } else { "FAIL" }, r.check, r.instance);
    }
    println!("{} passed, {} failed; reports in {}", report.summary.passed, report.summary.failed, out.display());
    if report.all_passed() {
        0
    } else {
        EXIT_FAIL
    }
}

type Timings = Vec<(String, String, std::time::Duration)>;

fn execute(cfg: &ExperimentConfig, instances: &BTreeMap<String, config::Instance>) -> (Vec<Record>, Timings) {
    let mut records = Vec::with_capacity(cfg.checks.len());
    let mut timings = Vec::with_capacity(cfg.checks.len());
    for spec in &cfg.checks {
        let start = Instant::now();
        let o = checks::run(&spec.check, &instances[&spec.instance], &spec.params, &cfg.settings);
        timings.push((spec.check.clone(), spec.instance.clone(), start.elapsed()));
        records.push(Record {
            check: spec.check.clone(),
            instance: spec.instance.clone(),
            passed: o.passed,
            details: o.details,
        });
    }
    (records, timings)
}

fn config_error(e: &ConfigError) -> u8 {
    eprintln!("config error: {e}");
    EXIT_CONFIG
}

fn generate_cmd(kind: FixtureKind, params: &FixtureParams, out: Option<&Path>) -> u8 {
    let doc = match generate::generate(kind, params) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let text = serde_json::to_string_pretty(&doc).expect("instance documents serialize") + "\n";
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("error: {}: {e}", p.display());
                return EXIT_CONFIG;
            }
        }
        None => print!("{text}"),
    }
    0
}

fn parse_w(text: &str) -> Result<Mat2, String> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text).map_err(|e| format!("--w: {e}"))?;
    if pairs.len() != 4 {
        return Err(format!("--w needs 4 complex entries, got {}", pairs.len()));
    }
    let z = |i: usize| Complex64::new(pairs[i][0], pairs[i][1]);
    Ok(Mat2::new(z(0), z(1), z(2), z(3)))
}

fn appendix_cmd(seed: u64, samples: usize, w: Option<&str>, cycle: usize) -> u8 {
    let w = match w.map(parse_w).transpose() {
        Ok(w) => w.unwrap_or_else(ergolab::fixtures::default_appendix_w),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let constr = match AppendixConstruction::new(w) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match appendix_report(&constr, seed, samples, cycle) {
        Ok(rep) => {
            println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
            if rep.checks.all() {
                0
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
