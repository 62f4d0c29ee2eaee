use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vicinal_flow::commands::{self, sweep_exit_code, sweep_threads, THREADS_ENV};
use vicinal_flow::error::{EXIT_CERTIFICATION, EXIT_OK};
use vicinal_flow::{output, parse_config, selftest, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "vicinal-flow", version, about = "Spectral minimizing-movement solver for vicinal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Paths {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution and write snapshots plus the energy log.
    Run(Paths),
    /// Certify the snapshots of a previous run.
    Verify(Paths),
    /// Run every point of the configured sweep concurrently.
    Sweep(Paths),
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(paths: &Paths) -> Result<(RunConfig, PathBuf), CliError> {
    let text = output::read(&paths.config)?;
    let cfg = parse_config(&text)?;
    let out = paths.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn run(paths: &Paths) -> Result<u8, CliError> {
    let (cfg, out) = load(paths)?;
    let summary = commands::cmd_run(&cfg, &out)?;
    if let Some(t) = summary.initial_truncation {
        println!("initial state lifted to slope floor {:e} on {} nodes", t.delta, t.active_nodes);
    }
    println!(
        "{} steps, {} snapshots in {}; final energy {:.12e}, min(u_xx + a) {:.6e}",
        summary.steps,
        summary.snapshots,
        out.display(),
        summary.final_energy,
        summary.final_min_slope
    );
    Ok(EXIT_OK)
}

fn verify(paths: &Paths) -> Result<u8, CliError> {
    let (cfg, out) = load(paths)?;
    let outcome = commands::cmd_verify(&cfg, &out)?;
    print!("{}", outcome.summary());
    Ok(if outcome.passed() { EXIT_OK } else { EXIT_CERTIFICATION })
}

fn sweep(paths: &Paths) -> Result<u8, CliError> {
    let (cfg, out) = load(paths)?;
    let threads = sweep_threads(std::env::var(THREADS_ENV).ok().as_deref())?;
    let runs = commands::cmd_sweep(&cfg, &out, threads)?;
    for r in &runs {
        match &r.result {
            Ok(s) => println!("{} [{}]: {} steps", r.dir.display(), r.label, s.steps),
            Err(e) => eprintln!("{} [{}]: {e}", r.dir.display(), r.label),
        }
    }
    Ok(sweep_exit_code(&runs))
}

fn selftest(out: Option<&Path>) -> Result<u8, CliError> {
    let checks = selftest::run_selftest();
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    print!("{text}");
    if let Some(dir) = out {
        output::create_dir(dir)?;
        output::write(&dir.join("selftest.txt"), &text)?;
    }
    Ok(if checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_CERTIFICATION })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(p) => run(p),
        Command::Verify(p) => verify(p),
        Command::Sweep(p) => sweep(p),
        Command::Selftest { config, out } => {
            // The configuration is optional here; when given it must still parse.
            match config.as_ref().map(|c| output::read(c).and_then(|t| Ok(parse_config(&t)?))) {
                Some(Err(e)) => Err(e),
                _ => selftest(out.as_deref()),
            }
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("vicinal-flow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
