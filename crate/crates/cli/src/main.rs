//! `qpoincare`: build detailed-balanced Lindblad models from config, run
//! inequality checks into a certificate stream, and aggregate reports.
//!
//! Exit codes: 0 all certificates pass, 2 at least one certificate fails,
//! 1 on operational errors (bad config, IO, model construction).

mod config;
mod modeljson;
mod report;
mod runner;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(
    name = "qpoincare",
    version,
    about = "numerical certificates for quantum Markov semigroup inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a config file and write the certificate stream.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Stream destination; falls back to the config's output.path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump the first suite's realized model in the fixed JSON schema.
        #[arg(long)]
        dump_model: Option<PathBuf>,
    },
    /// Run a named preset (or print its config with --emit-config).
    Preset {
        name: String,
        #[arg(long)]
        emit_config: bool,
        /// Stream output path (default: preset-NAME.jsonl).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a certificate stream into a report table.
    Report {
        stream: PathBuf,
        #[arg(long)]
        csv: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            dump_model,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("cannot read config {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if let Some(path) = dump_model {
                let model = cfg.suites[0].model.build()?;
                fs::write(&path, modeljson::model_to_json(&model))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            let out = out
                .or_else(|| cfg.out_path.as_ref().map(PathBuf::from))
                .ok_or_else(|| anyhow::anyhow!("no output path: pass --out or set output.path"))?;
            execute(&cfg, &out)
        }
        Command::Preset {
            name,
            emit_config,
            out,
        } => {
            let body = config::preset(&name)?;
            if emit_config {
                println!("{body}");
                return Ok(ExitCode::SUCCESS);
            }
            let cfg = ExperimentConfig::from_json(body)?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("preset-{name}.jsonl")));
            execute(&cfg, &out)
        }
        Command::Report { stream, csv } => {
            let text = fs::read_to_string(&stream)
                .with_context(|| format!("cannot read stream {}", stream.display()))?;
            let report = report::aggregate(&text);
            if report.malformed > 0 {
                eprintln!(
                    "warning: {} of {} lines malformed (counted, not dropped)",
                    report.malformed, report.total
                );
            }
            if csv {
                print!("{}", report.to_csv());
            } else {
                print!("{}", report.to_table());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn execute(cfg: &ExperimentConfig, out: &PathBuf) -> Result<ExitCode> {
    let lines = runner::run(cfg)?;
    let mut body = String::new();
    match cfg.output {
        OutputFormat::Json => {
            for line in &lines {
                body.push_str(&line.to_json());
                body.push('\n');
            }
        }
        OutputFormat::Csv => {
            body.push_str("name,model,p,q,lhs,rhs,constant,ratio,pass,tol,seed,sample,method\n");
            for line in &lines {
                body.push_str(&line.to_csv());
                body.push('\n');
            }
        }
    }
    fs::write(out, body).with_context(|| format!("cannot write {}", out.display()))?;
    let failed = lines.iter().filter(|l| !l.pass).count();
    eprintln!(
        "{} certificates written to {} ({} failed)",
        lines.len(),
        out.display(),
        failed
    );
    if failed > 0 {
        for line in lines.iter().filter(|l| !l.pass).take(5) {
            eprintln!("failing certificate: {} on {}", line.name, line.model);
        }
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
