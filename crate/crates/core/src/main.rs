use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nrds::bench::{mua_nonexistence_probe, registry, run_experiment, ExperimentConfig};
use nrds::driver::OuEvaluator;
use nrds::Error;

#[derive(Parser)]
#[command(name = "nrds", about = "Attractor experiments for nonautonomous random dynamical systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace the driver seeds by this single seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the benchmark problems.
    List,
    /// Windowed suprema of the OU process over S = 10, 100, 1000.
    ProbeOu {
        #[arg(long, default_value_t = 200)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::UnknownProblem(_) => 2,
        e if e.is_divergence() => 3,
        Error::Tolerance { .. } => 4,
        _ => 1,
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::List => {
            for p in registry() {
                let drivers: Vec<String> = p.drivers.iter().map(|d| d.to_string()).collect();
                println!("{:<18} dim {}  drivers {:<14} {}", p.id.as_str(), p.dim, drivers.join(","), p.summary);
            }
        }
        Cmd::Run { config, seed, out } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(s) = seed {
                cfg.driver.seeds = vec![s];
                cfg.validate()?;
            }
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            let record = run_experiment(&cfg)?;
            record.write(&cfg.output.dir)?;
            for b in &record.bases {
                match &b.outcome {
                    Ok(e) => println!(
                        "base {} (tau {}): {} cells, distance {}",
                        b.index,
                        b.tau,
                        e.estimate.set.count(),
                        e.distance.map(|d| d.to_string()).unwrap_or_else(|| "n/a".into())
                    ),
                    Err(err) => println!("base {} (tau {}): {err}", b.index, b.tau),
                }
            }
            if let Some(c) = &record.conjugacy {
                println!("conjugacy order {:?}", c.order);
            }
            println!("wrote {} in {} ms", cfg.output.dir.display(), record.runtime_ms);
            record.status(cfg.tolerance)?;
        }
        Cmd::ProbeOu { seeds, out } => {
            let seeds: Vec<u64> = (0..seeds).collect();
            let probe = mua_nonexistence_probe(&seeds, &[10.0, 100.0, 1000.0], 0.01, &OuEvaluator::default())?;
            println!("strictly increasing suprema: {:.3}", probe.fraction_increasing);
            println!("variance of z: {:.4}", probe.variance);
            println!("KS against N(0, 1/2): D = {:.4}, p = {:.3}", probe.ks.statistic, probe.ks.p_value);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                probe.write_csv(std::fs::File::create(dir.join("ou_probe.csv"))?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
