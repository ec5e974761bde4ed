use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sapgm_bench::{
    run_benchmark, run_rate_experiment, run_verify, BenchConfig, BenchError, SolverChoice,
};

#[derive(Parser)]
#[command(
    name = "bench",
    about = "Benchmarks for the smoothing accelerated proximal gradient solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.9)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    #[arg(long = "L0", default_value_t = 1.0)]
    l0: f64,
    #[arg(long, default_value_t = 2.0)]
    eta: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-start benchmark with summary tables and front plots.
    Run {
        /// Comma-separated names or 1-based indices, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        problems: Vec<String>,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SolverChoice::Both)]
        solver: SolverChoice,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Merit decay along long runs for several σ.
    Rate {
        #[arg(long)]
        problem: String,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5")]
        sigmas: Vec<f64>,
        /// Starts pooled into the reference front.
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Smoothing, subproblem and momentum self-checks.
    Verify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn config(
    problems: Vec<String>,
    runs: usize,
    seed: u64,
    solver: SolverChoice,
    out: PathBuf,
    a: SolverArgs,
) -> BenchConfig {
    BenchConfig {
        problems,
        runs,
        base_seed: seed,
        solver,
        sigma: a.sigma,
        mu0: a.mu0,
        l0: a.l0,
        eta: a.eta,
        eps: a.eps,
        max_iter: a.max_iter,
        out_dir: out,
        parallel: a.parallel,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result: Result<(), BenchError> = match cli.command {
        Command::Run {
            problems,
            runs,
            seed,
            solver,
            out,
            solver_args,
        } => {
            let cfg = config(problems, runs, seed, solver, out, solver_args);
            run_benchmark(&cfg).map(|outcome| {
                println!("problem,solver,avg_time_s,avg_iter,avg_feval,converged_fraction");
                for r in &outcome.summary {
                    println!(
                        "{},{},{:.6},{:.2},{:.2},{:.3}",
                        r.problem,
                        r.solver,
                        r.avg_time_s,
                        r.avg_iter,
                        r.avg_feval,
                        r.converged_fraction
                    );
                }
                println!("artifacts in {}", outcome.out_dir.display());
            })
        }
        Command::Rate {
            problem,
            sigmas,
            runs,
            seed,
            out,
            solver_args,
        } => {
            let cfg = config(
                vec![problem.clone()],
                runs,
                seed,
                SolverChoice::Both,
                out,
                solver_args,
            );
            run_rate_experiment(&problem, &sigmas, &cfg).map(|outcome| {
                println!(
                    "{}: reference front of {} points",
                    outcome.problem, outcome.reference_size
                );
                for row in &outcome.rows {
                    match row.slope {
                        Some(s) => {
                            println!("  sigma {}: slope {s:.4} ({})", row.sigma, row.series_file)
                        }
                        None => println!(
                            "  sigma {}: no fit, {} positive merit values in range ({})",
                            row.sigma, row.positive_points, row.series_file
                        ),
                    }
                }
            })
        }
        Command::Verify { samples, seed } => {
            let outcome = run_verify(samples, seed);
            println!("{outcome}");
            if outcome.passes() {
                Ok(())
            } else {
                return ExitCode::from(1);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
