//! `mav-tec` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 simulation
//! fault, 4 a `--check` condition failed. Every failure ends stderr with one
//! JSON object `{"error": {"kind", "key", "message", "time"}}`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mav_tec::airframe::{trim_level_flight, Airframe};
use mav_tec::config::{ControllerKind, RunConfig};
use mav_tec::sim::{bound_violations, run_comparison, run_scenario, run_sweep, RunRecord, Series};
use mav_tec::tec::{allocation_matrix, AllocationMatrix};
use mav_tec::Error;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "mav-tec",
    version,
    about = "Energy-control scenarios for a fixed-wing MAV"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the trim point and allocation matrix as JSON.
    Trim(Common),
    /// Run one scenario and write its series and metrics.
    Run(Common),
    /// Run the classical and LADRC controllers on the same seeds.
    Compare(Common),
    /// Run one controller over `scenario.seeds` consecutive seeds.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Directory for output files, created if missing.
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    /// Override `scenario.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `scenario.controller` (tec_classic or ladrc_tec).
    #[arg(long)]
    controller: Option<String>,
    /// Exit with status 4 when the outcome check fails.
    #[arg(long)]
    check: bool,
}

enum Failure {
    Usage(String),
    Core(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_simulation_fault() => 3,
            Failure::Core(_) => 2,
            Failure::Check(_) => 4,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, key, message, time) = match self {
            Failure::Usage(m) => ("usage", None, m.clone(), None),
            Failure::Check(m) => ("check", None, m.clone(), None),
            Failure::Core(e) => {
                let key = match e {
                    Error::Config { key, .. } => key.clone(),
                    Error::InvalidParameter { name, .. } => Some(name.to_string()),
                    _ => None,
                };
                (e.kind(), key, e.to_string(), e.time())
            }
        };
        json!({ "error": { "kind": kind, "key": key, "message": message, "time": time } })
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(Failure::Usage(e.kind().to_string()));
        }
    };
    let result = match cli.command {
        Command::Trim(c) => trim(&c),
        Command::Run(c) => run(&c),
        Command::Compare(c) => compare(&c),
        Command::Sweep(c) => sweep(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.exit_code())
}

fn load(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.scenario.seed = seed;
    }
    if let Some(name) = &c.controller {
        cfg.scenario.controller = name.parse::<ControllerKind>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn log_allocation(a: &AllocationMatrix) {
    let row = |m: [[f64; 2]; 2], i: usize| format!("[{:>10.6} {:>10.6}]", m[i][0], m[i][1]);
    eprintln!("allocation A     = {}  A^-1 = {}", row(a.a, 0), row(a.inverse, 0));
    eprintln!("                   {}         {}", row(a.a, 1), row(a.inverse, 1));
    eprintln!("det = {:.6}, condition = {:.3}", a.det, a.condition);
}

fn trim(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let airframe = Airframe::new(cfg.airframe.clone())?;
    let trim = trim_level_flight(cfg.scenario.va, cfg.scenario.h, &airframe).map_err(Failure::Core)?;
    let alloc = allocation_matrix(&trim, airframe.params())?;
    log_allocation(&alloc);
    let out = json!({ "trim": trim, "allocation": alloc });
    // A closed pipe on stdout is not an error worth reporting.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&out).expect("serializable")
    );
    if c.check && (trim.residual.is_nan() || trim.residual >= 1e-8) {
        return Err(Failure::Check(format!(
            "trim residual {:.3e} is not below 1e-8",
            trim.residual
        )));
    }
    Ok(())
}

fn run(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let result = run_scenario(&cfg, cfg.scenario.controller, cfg.scenario.seed)?;
    log_allocation(&result.allocation);
    let name = &cfg.scenario.name;
    write_series(&c.out_dir, &format!("{name}_series.csv"), &result.series)?;
    write_json(
        &c.out_dir,
        &format!("{name}_metrics.json"),
        &RunRecord::new(&cfg, &result),
    )?;
    if c.check {
        let mut problems = bound_violations(&result.series, &cfg);
        problems.truncate(1);
        if cfg.scenario.kind.is_step() && !result.metrics.settled {
            problems.push("response did not settle".into());
        }
        if !problems.is_empty() {
            return Err(Failure::Check(problems.join("; ")));
        }
    }
    Ok(())
}

fn compare(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let cmp = run_comparison(&cfg)?;
    log_allocation(&cmp.report.allocation);
    let name = &cfg.scenario.name;
    let mut violations = Vec::new();
    for result in [&cmp.baseline, &cmp.candidate].into_iter().flatten() {
        let stem = format!("{name}_{}", result.controller);
        write_series(&c.out_dir, &format!("{stem}_series.csv"), &result.series)?;
        write_json(
            &c.out_dir,
            &format!("{stem}_metrics.json"),
            &RunRecord::new(&cfg, result),
        )?;
        if let Some(v) = bound_violations(&result.series, &cfg).into_iter().next() {
            violations.push(format!("{}: {v}", result.controller));
        }
    }
    write_json(&c.out_dir, &format!("compare_{name}.json"), &cmp.report)?;
    for (metric, better) in &cmp.report.candidate_better {
        eprintln!(
            "{metric}: {}",
            if *better {
                "ladrc_tec better"
            } else {
                "ladrc_tec not better"
            }
        );
    }
    if c.check {
        if !cmp.report.candidate_wins() {
            violations.push("candidate does not win every compared metric".into());
        }
        if !violations.is_empty() {
            return Err(Failure::Check(violations.join("; ")));
        }
    }
    Ok(())
}

fn sweep(c: &Common) -> Outcome {
    let cfg = load(c)?;
    let report = run_sweep(&cfg, cfg.scenario.controller)?;
    write_json(&c.out_dir, &format!("sweep_{}.json", cfg.scenario.name), &report)?;
    if c.check && report.results.failures > 0 {
        return Err(Failure::Check(format!(
            "{} of {} runs faulted",
            report.results.failures,
            report.seeds.len()
        )));
    }
    Ok(())
}

fn create(dir: &Path, file: &str) -> Result<BufWriter<File>, Failure> {
    std::fs::create_dir_all(dir).map_err(Error::Io)?;
    let path = dir.join(file);
    eprintln!("writing {}", path.display());
    Ok(BufWriter::new(File::create(path).map_err(Error::Io)?))
}

fn write_series(dir: &Path, file: &str, series: &Series) -> Outcome {
    series.write_csv(create(dir, file)?)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(dir: &Path, file: &str, value: &T) -> Outcome {
    let mut w = create(dir, file)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(w).map_err(Error::Io)?;
    w.flush().map_err(Error::Io)?;
    Ok(())
}
