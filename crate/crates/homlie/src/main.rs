//! Command-line interface: validate scenario files, act with gauge
//! elements, decide orbit equivalence and irreducibility, inspect the slice,
//! and emit full JSON reports.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 on
//! input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use homlie::gauge::{end_kernel_dims, find_gauge_transform, gauge_act, is_irreducible};
use homlie::scenario::{emit_scenario, parse_scenario, run_checks, Config, Model};
use homlie::slice::{local_slice_check, slice_dimension, Subspace};

#[derive(Parser)]
#[command(name = "homlie", version, about = "Exact verification of twisted algebroid connection and gauge structure over truncated jet rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the order budget of every check.
    #[arg(long, global = true)]
    loss_override: Option<i64>,

    /// Coefficient subspace for kernel and slice computations.
    #[arg(long, global = true, value_parser = parse_subspace, default_value = "full")]
    subspace: Subspace,
}

fn parse_subspace(s: &str) -> Result<Subspace, String> {
    match s {
        "full" => Ok(Subspace::Full),
        "phiE" | "phie" => Ok(Subspace::PhiE),
        other => Err(format!("unknown subspace '{other}' (use full|phiE)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full check battery on a scenario file.
    Validate {
        file: PathBuf,
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Apply a named gauge element to a named connection.
    Act {
        file: PathBuf,
        #[arg(long)]
        conn: String,
        #[arg(long)]
        gauge: String,
    },
    /// Decide whether two named connections are gauge equivalent.
    OrbitEq {
        file: PathBuf,
        /// Exactly two connection names.
        #[arg(long = "conn", num_args = 1)]
        conns: Vec<String>,
    },
    /// Kernel dimensions and the irreducibility verdict for a connection.
    Irreducible {
        file: PathBuf,
        #[arg(long)]
        conn: String,
    },
    /// Slice dimension and the local chart differential report.
    Slice {
        file: PathBuf,
        #[arg(long)]
        conn: String,
    },
    /// Emit the full check report as JSON.
    Report {
        file: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Parse and re-emit a scenario in canonical form.
    Canonicalize { file: PathBuf },
}

fn load_model(path: &PathBuf) -> Result<Model, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let scenario = parse_scenario(&text).map_err(|e| e.to_string())?;
    scenario.build().map_err(|e| e.to_string())
}

fn resolve_connection(model: &Model, name: &str) -> Result<homlie::connection::Connection, String> {
    if name == "triv" && !model.connections.contains_key("triv") {
        return Ok(model.trivial_connection());
    }
    model.connection(name).cloned().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = Config {
        loss_override: cli.loss_override,
        subspace: cli.subspace,
        ..Config::default()
    };
    match run(cli.command, config) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, config: Config) -> Result<bool, String> {
    match command {
        Command::Validate { file, filter } => {
            let model = load_model(&file)?;
            let cfg = Config { filter, ..config };
            let report = run_checks(&model, &cfg);
            for c in &report.checks {
                if c.status == "pass" {
                    println!("pass  {}", c.name);
                } else {
                    println!(
                        "FAIL  {}  (order {}): {}",
                        c.name, c.order, c.residual
                    );
                }
            }
            println!(
                "{}: {}/{} checks passed (anchor transitive: {})",
                report.scenario,
                report.checks.iter().filter(|c| c.status == "pass").count(),
                report.checks.len(),
                report.transitive_anchor
            );
            Ok(report.all_pass())
        }
        Command::Act { file, conn, gauge } => {
            let model = load_model(&file)?;
            let connection = resolve_connection(&model, &conn)?;
            let element = model.gauge(&gauge).map_err(|e| e.to_string())?;
            let acted = gauge_act(&element, &connection).map_err(|e| e.to_string())?;
            let rendered: Vec<Vec<Vec<String>>> = acted
                .alpha
                .iter()
                .map(|m| {
                    (0..m.rows)
                        .map(|i| (0..m.cols).map(|j| m.get(i, j).to_string()).collect())
                        .collect()
                })
                .collect();
            let out = serde_json::json!({
                "connection": conn,
                "gauge": gauge,
                "alpha": rendered,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(acted.validate().all_pass())
        }
        Command::OrbitEq { file, conns } => {
            if conns.len() != 2 {
                return Err("orbit-eq needs exactly two --conn names".into());
            }
            let model = load_model(&file)?;
            let a = resolve_connection(&model, &conns[0])?;
            let b = resolve_connection(&model, &conns[1])?;
            match find_gauge_transform(&a, &b) {
                Some(psi) => {
                    let rendered: Vec<Vec<String>> = (0..psi.matrix().rows)
                        .map(|i| {
                            (0..psi.matrix().cols)
                                .map(|j| psi.matrix().get(i, j).to_string())
                                .collect()
                        })
                        .collect();
                    let out = serde_json::json!({
                        "equivalent": true,
                        "gauge": rendered,
                    });
                    println!("{}", serde_json::to_string_pretty(&out).unwrap());
                }
                None => {
                    let out = serde_json::json!({ "equivalent": false });
                    println!("{}", serde_json::to_string_pretty(&out).unwrap());
                }
            }
            Ok(true)
        }
        Command::Irreducible { file, conn } => {
            let model = load_model(&file)?;
            let connection = resolve_connection(&model, &conn)?;
            let (full, sub) = end_kernel_dims(&connection);
            let verdict = is_irreducible(&connection);
            let out = serde_json::json!({
                "connection": conn,
                "kernel_dim": full,
                "kernel_dim_in_compatible_subalgebra": sub,
                "irreducible": verdict,
                "certified_at_order": model.bundle.shape().order,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(true)
        }
        Command::Slice { file, conn } => {
            let model = load_model(&file)?;
            let connection = resolve_connection(&model, &conn)?;
            let rep = local_slice_check(&connection);
            let out = serde_json::json!({
                "connection": conn,
                "slice_dimension": slice_dimension(&connection),
                "chart": rep.entries.iter().map(|e| {
                    serde_json::json!({ "name": e.name, "pass": e.pass })
                }).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(rep.all_pass())
        }
        Command::Report { file, json } => {
            let model = load_model(&file)?;
            let report = run_checks(&model, &config);
            let text = report.to_json();
            match json {
                Some(path) => std::fs::write(&path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(report.all_pass())
        }
        Command::Canonicalize { file } => {
            let model = load_model(&file)?;
            print!("{}", emit_scenario(&model.to_scenario()));
            Ok(true)
        }
    }
}
