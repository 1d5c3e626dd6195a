//! Command-line front end. The binary only parses arguments and calls [`run`].

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::audit::write_audit_csv_file;
use crate::env::{Purpose, RngStream, StreamId};
use crate::error::{Error, Result};
use crate::harness::{emit_csv, run_many_with, run_network, seed_override, write_network_csv, AuditFlags, ExperimentConfig};
use crate::oracle::{run_check, OracleCheck};

#[derive(Debug, Parser)]
#[command(name = "queue-regret", version, about = "Queue-length regret experiments for channel scheduling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every policy in the config and write averaged regret curves.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Divide the horizon and the run count by this factor.
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Interval-regret, domination, and bound checks for every run.
    Audit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Multihop runs on the config's topology against all joint assignments.
    Network {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare a fast routine with its brute-force reference on random inputs.
    Oracle {
        #[arg(long, value_parser = parse_check)]
        check: OracleCheck,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_check(s: &str) -> std::result::Result<OracleCheck, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(path: &Path, scale: Option<f64>) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?.with_env_seed()?;
    match scale {
        Some(k) => cfg.scaled(k),
        None => Ok(cfg),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// What a successful command prints, and whether it found a failed check.
pub struct Outcome {
    pub summary: serde_json::Value,
    pub passed: bool,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Simulate {
            config,
            scale,
            out,
            threads,
        } => {
            let cfg = load(&config, scale)?;
            prepare_out(&out)?;
            let agg = run_many_with(&cfg, threads, |_| {})?;
            let path = out.join("queue_regret.csv");
            emit_csv(&agg, &path)?;
            let finals: serde_json::Map<_, _> = agg
                .policies
                .iter()
                .map(|p| (p.policy.to_string(), json!(p.mean_final())))
                .collect();
            Ok(Outcome {
                summary: json!({
                    "csv": path,
                    "horizon": agg.horizon,
                    "n_runs": agg.n_runs,
                    "master_seed": cfg.master_seed,
                    "mean_final_queue_regret": finals,
                }),
                passed: true,
            })
        }
        Command::Audit { config, scale, out } => {
            let mut cfg = load(&config, scale)?;
            cfg.audit = AuditFlags {
                delta: cfg.audit.delta,
                ..AuditFlags::all()
            };
            prepare_out(&out)?;
            let mut rows = Vec::new();
            let mut domination_violations = vec![0usize; cfg.policies.len()];
            let mut bound_violations = vec![0usize; cfg.policies.len()];
            run_many_with(&cfg, None, |r| {
                rows.extend(r.audit_rows());
                for (k, o) in r.policies.iter().enumerate() {
                    domination_violations[k] += usize::from(o.dominated == Some(false));
                    bound_violations[k] += usize::from(o.within_bound == Some(false));
                }
            })?;
            let path = out.join("audit.csv");
            write_audit_csv_file(&path, &rows)?;
            let per_policy: Vec<_> = cfg
                .policies
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    json!({
                        "policy": p.to_string(),
                        "domination_violations": domination_violations[k],
                        "bound_violations": bound_violations[k],
                    })
                })
                .collect();
            Ok(Outcome {
                summary: json!({ "csv": path, "n_runs": cfg.num_runs, "policies": per_policy }),
                passed: domination_violations.iter().all(|&v| v == 0),
            })
        }
        Command::Network { config, out } => {
            let cfg = load(&config, None)?;
            prepare_out(&out)?;
            let rows = run_network(&cfg)?;
            let path = out.join("network.csv");
            let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_network_csv(&rows, std::io::BufWriter::new(f))?;
            let worst = rows.iter().map(|r| r.network_regret).fold(f64::NEG_INFINITY, f64::max);
            Ok(Outcome {
                summary: json!({ "csv": path, "rows": rows.len(), "max_network_regret": worst }),
                passed: true,
            })
        }
        Command::Oracle { check, seed } => {
            let seed = seed_override()?.unwrap_or(seed);
            let report = run_check(check, &RngStream::new(seed, StreamId::new(Purpose::Audit, 0)));
            Ok(Outcome {
                passed: report.passed(),
                summary: serde_json::to_value(&report).expect("report serializes"),
            })
        }
    }
}

/// The single-line JSON written to stderr when a command fails.
pub fn error_line(err: &Error) -> String {
    json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}
