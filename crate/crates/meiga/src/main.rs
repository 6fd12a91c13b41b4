use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meiga::config_file::resolve_config;
use meiga::eventlog::{read_log, write_log, Entry};
use meiga::scenario::{to_raw, Scenario};
use meiga::summary::Summary;
use meiga::{replay, selftest, trace, Error, Result};

/// Head-mouse signal chain: replay sensor traces into HID reports.
#[derive(Debug, Parser)]
#[command(name = "meiga", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a trace through the pipeline and write the event log.
    Replay {
        trace: PathBuf,
        /// Config file (defaults to $MEIGA_CONFIG, then built-in defaults).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// The trace holds raw sensor counts.
        #[arg(long)]
        raw: bool,
    },
    /// Render a scenario file into a trace.
    Gen {
        spec: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the expected button events as an event log.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Write raw sensor counts instead of physical units.
        #[arg(long)]
        raw: bool,
    },
    /// Summarize an event log: event counts, drift, click latency.
    Report { log: PathBuf },
    /// Run the built-in oracle suites.
    Selftest,
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Replay {
            trace,
            config,
            out,
            raw,
        } => {
            let cfg = resolve_config(config.as_deref())?;
            let (events, reports) = replay::replay_file(&trace, &cfg, &out, raw)?;
            println!("{events} events, {reports} reports -> {}", out.display());
        }
        Command::Gen {
            spec,
            seed,
            out,
            config,
            labels,
            raw,
        } => {
            let cfg = resolve_config(config.as_deref())?;
            let mut sc = Scenario::load(&spec)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let r = sc.render(&cfg)?;
            if raw {
                trace::write_raw_trace(&out, &to_raw(&r.samples, &cfg))?;
            } else {
                trace::write_trace(&out, &r.samples)?;
            }
            if let Some(path) = labels {
                let entries: Vec<Entry> = r.expected.iter().map(|e| Entry::Event(*e)).collect();
                write_log(&path, &entries)?;
            }
            println!(
                "{} samples, {} expected events -> {}",
                r.samples.len(),
                r.expected.len(),
                out.display()
            );
        }
        Command::Report { log } => {
            print!("{}", Summary::of(&read_log(&log)?));
        }
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!(
                    "{:<22} {}/{} {}",
                    r.name,
                    r.passed,
                    r.total,
                    if r.ok() { "ok" } else { "FAILED" }
                );
            }
            return Ok(results.iter().all(|r| r.ok()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("meiga: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
