use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lsim_core::config::ScenarioConfig;
use lsim_core::scenario::{run_scenario, SCENARIOS};

/// Λ-system slow light and read-out simulator.
#[derive(Parser, Debug)]
#[command(name = "lsim", version, after_help = scenario_help())]
struct Cli {
    /// Scenario to run.
    scenario: String,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (same as --set out_dir=DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Print every config key with its default and exit.
    #[arg(long, exclusive = true)]
    print_config: bool,
}

fn scenario_help() -> String {
    format!("Scenarios: {}\nEnvironment: LSIM_THREADS caps worker threads (0 or unset: all cores).", SCENARIOS.join(", "))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--print-config") {
        print!("{}", ScenarioConfig::reference());
        return ExitCode::SUCCESS;
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Ok(v) = std::env::var("LSIM_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Ok(_) => {}
            Err(_) => {
                eprintln!("error: LSIM_THREADS=`{v}` is not a non-negative integer");
                return ExitCode::from(2);
            }
        }
    }

    let mut overrides = cli.set.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("out_dir={}", out.display()));
    }
    if cli.svg {
        overrides.push("svg=true".into());
    }
    let result = ScenarioConfig::load(cli.config.as_deref(), &overrides)
        .and_then(|cfg| run_scenario(&cli.scenario, &cfg));
    match result {
        Ok(report) => {
            print!("{}", report.text());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
