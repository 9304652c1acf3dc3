use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use wk_cli::{check, parse_stages, run_with_artifacts, write_outputs, PipelineError, RunConfig, RunReport, ALL_STAGES};

#[derive(Parser)]
#[command(name = "wk", version, about = "Well/saddle topology, Eyring–Kramers predictions and their numerical validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline and write report.json, spectrum.csv and rates.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of topology,predict,solve,validate.
        #[arg(long)]
        stages: Option<String>,
    },
    /// Topology and hypotheses only; prints JSON to stdout.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn summary(report: &RunReport) -> String {
    let mut s = format!("status: {:?}", report.status);
    if let Some(f) = &report.failure {
        s += &format!(" ({} stage: {})", f.stage, f.message);
    }
    for v in &report.verdicts {
        s += &format!("\n{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    s
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Run { config, out, stages } => {
            let cfg = RunConfig::load(&config)?;
            let stages = match stages {
                Some(s) => parse_stages(&s)?,
                None => ALL_STAGES.to_vec(),
            };
            let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("wk-out"));
            let (report, artifacts) = run_with_artifacts(&cfg, &stages)?;
            let written = write_outputs(&dir, &report, &artifacts).with_context(|| format!("writing {}", dir.display()))?;
            eprintln!("{}", summary(&report));
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            Ok(report.exit_code())
        }
        Command::Check { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = check(&cfg)?;
            let view = serde_json::json!({
                "status": report.status,
                "failure": report.failure,
                "topology": report.topology,
                "hypotheses": report.hypotheses,
            });
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{}", serde_json::to_string_pretty(&view)?) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(3, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
