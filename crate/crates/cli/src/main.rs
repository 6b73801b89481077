//! `ftqem` command-line front end.
//!
//! Exit status: 0 on success, 2 for bad input (arguments, files, configs,
//! circuits), 3 when a simulation or scoring step fails.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

macro_rules! outln {
    ($($arg:tt)*) => {
        write_stdout(&format!("{}\n", format_args!($($arg)*)))?
    };
}

use clap::{Parser, Subcommand, ValueEnum};
use ftqem::analysis::{min_d_for_epsilon, ratio_report, AnalysisError, BoundInputs};
use ftqem::circuit::serialize_circuit;
use ftqem::codes::compile_with;
use ftqem::harness::{
    self, emit, to_csv_string, ExperimentConfig, Format, HarnessError, RunRecord,
};
use ftqem::mitigation::Strategy;
use ftqem::{gate_census, parse_circuit, CodeSpec, HadamardMode, LayoutKind};

#[derive(Parser)]
#[command(
    name = "ftqem",
    version,
    about = "Fault-tolerant quantum error mitigation laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a circuit file and print its size and gate census.
    Parse { file: PathBuf },
    /// Compile a logical circuit and print the physical circuit.
    Encode {
        file: PathBuf,
        /// `rep:<d>` or `steane`.
        #[arg(long)]
        code: CodeSpec,
        #[arg(long, default_value = "nonft")]
        hmode: HadamardMode,
        /// Measurement tail to compile for (DM, DSM or SS).
        #[arg(long, default_value = "DM")]
        strategy: Strategy,
        /// Logical basis state to prepare, qubit 0 leftmost.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        blocked: bool,
        /// Write the layout map as JSON to this file.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Run an experiment config.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        /// Write records here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in scenario: fig4, fig5, fig7a, fig7b, hdw11 or hdw35.
    Repro {
        scenario: String,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the threshold bounds.
    Bounds {
        #[arg(long)]
        d: usize,
        /// Transversal gate count.
        #[arg(long)]
        t: usize,
        /// Hadamard count.
        #[arg(long)]
        h: usize,
        #[arg(long)]
        p: f64,
        /// Also report the smallest odd distance with ratio below this.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
    },
}

enum Failure {
    Config(String),
    Simulation(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_simulation() {
            Failure::Simulation(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::SearchCapExceeded { .. } => Failure::Simulation(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_records(
    records: &[RunRecord],
    format: OutFormat,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    match out {
        Some(path) => emit(records, format.into(), &path)?,
        None => match format {
            OutFormat::Csv => write_stdout(&to_csv_string(records)?)?,
            OutFormat::Json => {
                outln!("{}", serde_json::to_string_pretty(records).map_err(config)?)
            }
        },
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Parse { file } => {
            let c = parse_circuit(&read(&file)?).map_err(config)?;
            let census = gate_census(&c).map_err(|k| config(format!("{k} cannot be counted")))?;
            let summary = serde_json::json!({
                "qubits": c.num_qubits(),
                "clbits": c.num_clbits(),
                "gates": c.len(),
                "t": census.t,
                "h": census.h,
                "c": census.c(),
            });
            outln!("{summary}");
        }
        Command::Encode {
            file,
            code,
            hmode,
            strategy,
            initial,
            blocked,
            sidecar,
        } => {
            let logical = parse_circuit(&read(&file)?).map_err(config)?;
            let options = ftqem::codes::CompileOptions {
                layout: if blocked {
                    LayoutKind::Blocked
                } else {
                    LayoutKind::Interleaved
                },
                readout: strategy.readout(false),
                initial,
            };
            let enc = compile_with(&code, &logical, hmode, &options).map_err(config)?;
            outln!("{}", serialize_circuit(&enc.physical));
            if let Some(path) = sidecar {
                let json = serde_json::to_string_pretty(&enc.sidecar()).map_err(config)?;
                std::fs::write(&path, json)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Run {
            config: path,
            format,
            out,
        } => {
            let cfg = ExperimentConfig::from_path(&path)?;
            let records = harness::run_experiment(&cfg)?;
            write_records(&records, format, out)?;
        }
        Command::Repro {
            scenario,
            shots,
            seed,
            format,
            out,
        } => {
            let mut s = harness::scenario(&scenario)?;
            if let Some(n) = shots {
                s = s.with_shots(n);
            }
            if let Some(seed) = seed {
                s = s.with_seed(seed);
            }
            let records = s.run()?;
            write_records(&records, format, out)?;
        }
        Command::Bounds {
            d,
            t,
            h,
            p,
            epsilon,
            format,
        } => {
            let inputs = BoundInputs::new(d, t, h, p)?;
            let report = ratio_report(&inputs);
            let min_d = epsilon
                .map(|eps| min_d_for_epsilon(inputs.c(), h, p, eps))
                .transpose()?;
            match format {
                OutFormat::Json => {
                    let mut v = serde_json::to_value(report).map_err(config)?;
                    if let Some(m) = min_d {
                        v["min_d"] = m.into();
                    }
                    outln!("{}", serde_json::to_string_pretty(&v).map_err(config)?);
                }
                OutFormat::Csv => {
                    outln!("d,c,h,p,pl_upper,ps_lower,ratio,threshold,below_threshold,min_d");
                    outln!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        report.d,
                        report.c,
                        report.h,
                        report.p,
                        report.pl_upper,
                        report.ps_lower,
                        report.ratio,
                        report.threshold,
                        report.below_threshold,
                        min_d.map(|m| m.to_string()).unwrap_or_default()
                    );
                }
            }
        }
    }
    Ok(())
}

/// A closed pipe (e.g. `| head`) ends output quietly.
fn write_stdout(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::Simulation(format!("writing output: {e}")))
        }
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Simulation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
