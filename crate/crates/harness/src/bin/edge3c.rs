use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edge3c::{derive, optimal_policy, zipf, Execution};
use edge3c_harness::{
    load_spec, parse_spec, resolve_seed, run_with, write_csv, Evaluator, ExperimentSpec, HarnessError, PolicyKind,
};

#[derive(Parser)]
#[command(
    name = "edge3c",
    version,
    about = "Outage and latency experiments for cache-enabled edge computing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every applicable evaluator at the base point.
    Analyze(Common),
    /// Print the optimal caching probabilities at the base point.
    Optimize(Common),
    /// Monte Carlo estimates over the sweep.
    Simulate(Common),
    /// The full experiment described by the config.
    Sweep(Common),
    /// Exact outage of each policy side by side over the sweep.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed, overriding the config and EDGE3C_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 means one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(c: &Common) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = match &c.config {
        Some(path) => load_spec(path)?,
        None => parse_spec("")?,
    };
    let env = std::env::var("EDGE3C_SEED").ok();
    spec.mc.seed = resolve_seed(c.seed, spec.seed, env.as_deref())?;
    Ok(spec)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Validation(format!("--threads: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) -> Result<(), HarnessError> {
    eprintln!("edge3c: built without the parallel feature, --threads ignored");
    Ok(())
}

fn sink(c: &Common) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match &c.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn execute(cmd: Command) -> Result<(), HarnessError> {
    let (Command::Analyze(c) | Command::Optimize(c) | Command::Simulate(c) | Command::Sweep(c) | Command::Compare(c)) =
        &cmd;
    if let Some(n) = c.threads {
        set_threads(n)?;
    }
    let mut spec = load(c)?;
    let exec = Execution::default();
    match &cmd {
        Command::Analyze(_) => {
            let g = spec.base.zipf_exponent;
            spec.sweep_values = vec![spec.base_value()];
            spec.policies = PolicyKind::ALL.to_vec();
            spec.evaluators = Evaluator::ALL
                .iter()
                .copied()
                .filter(|e| match e {
                    Evaluator::Asymptotic => g < 1.0,
                    Evaluator::Bounds => g > 1.0,
                    _ => true,
                })
                .collect();
            spec.validate()?;
            write_csv(&run_with(&spec, exec), sink(c)?)
        }
        Command::Optimize(_) => {
            let p = &spec.base;
            let d = derive(p)?;
            let pop = zipf(p.library_size, p.zipf_exponent);
            let policy = optimal_policy(&pop, d.kappa_prime, p.cache_size)?;
            let mut w = csv::Writer::from_writer(sink(c)?);
            w.write_record(["item", "popularity", "cache_prob"])?;
            for (f, (q, x)) in pop.pmf().iter().zip(policy.probs()).enumerate() {
                w.write_record([(f + 1).to_string(), format!("{q:.11e}"), format!("{x:.11e}")])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Simulate(_) => {
            spec.evaluators = vec![Evaluator::MonteCarlo];
            spec.variant = None;
            spec.validate()?;
            write_csv(&run_with(&spec, exec), sink(c)?)
        }
        Command::Sweep(_) => write_csv(&run_with(&spec, exec), sink(c)?),
        Command::Compare(_) => {
            spec.policies = PolicyKind::ALL.to_vec();
            spec.evaluators = vec![Evaluator::ClosedForm];
            spec.variant = None;
            spec.validate()?;
            let rows = run_with(&spec, exec);
            let mut w = csv::Writer::from_writer(sink(c)?);
            let mut header = vec!["sweep_value"];
            header.extend(PolicyKind::ALL.iter().map(|p| p.name()));
            w.write_record(&header)?;
            for &v in &spec.sweep_values {
                let mut line = vec![format!("{v:.11e}")];
                for p in PolicyKind::ALL {
                    let row = rows.iter().find(|r| r.sweep_value == v && r.policy == p.name());
                    line.push(
                        row.and_then(|r| r.outage)
                            .map_or_else(String::new, |x| format!("{x:.11e}")),
                    );
                }
                w.write_record(&line)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edge3c: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
