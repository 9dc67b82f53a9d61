use std::path::PathBuf;
use std::process::ExitCode;

use ccilc::SolverKind;
use ccilc_cli::commands::{self, BenchProblem, BenchSolvers, RunOptions, VERIFY_TOL};
use ccilc_cli::output::fmt_f64;
use ccilc_cli::{CliError, CliResult};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ccilc",
    version,
    about = "Norm-optimal cross-coupled ILC for contour tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Lqt,
    Lifted,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchSolverArg {
    Both,
    Lqt,
    Lifted,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write history, trajectories and a report.
    Run {
        config: PathBuf,
        #[arg(long)]
        solver: Option<SolverArg>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Output directory (default: the scenario's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Abort when the convergence conditions fail.
        #[arg(long)]
        strict_convergence: bool,
        /// Also write J, Q and L of the first update as CSV.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Run with the dense lifted oracle alongside and report the deviation.
    Verify { config: PathBuf },
    /// Time both solvers over a list of horizons.
    Bench {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        horizons: Vec<usize>,
        #[arg(long, value_enum, default_value = "both")]
        solver: BenchSolverArg,
        /// Scenario to resample (default: the bundled demo).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            config,
            solver,
            iterations,
            out,
            seed,
            strict_convergence,
            dump_matrices,
        } => {
            let opts = RunOptions {
                solver: solver.map(|s| match s {
                    SolverArg::Lqt => SolverKind::Lqt,
                    SolverArg::Lifted => SolverKind::Lifted,
                }),
                iterations,
                out,
                seed,
                strict_convergence,
                dump_matrices,
            };
            let res = commands::cmd_run(&config, &opts)?;
            let h = &res.history;
            let last = h.records.last().expect("baseline row");
            println!("verdict: {}", h.report.verdict.describe());
            println!("iterations: {}", h.iterations());
            println!("final error norm: {}", fmt_f64(last.error_norm));
            if let Some(c) = last.contour_norm {
                println!("final contour error norm: {}", fmt_f64(c));
            }
            println!("output: {}", res.output_dir.display());
            Ok(())
        }
        Command::Verify { config } => {
            let v = commands::cmd_verify(&config)?;
            for (j, d) in &v.deviations {
                println!("j={j} deviation={}", fmt_f64(*d));
            }
            println!(
                "max deviation {} (tolerance {})",
                fmt_f64(v.max),
                fmt_f64(VERIFY_TOL)
            );
            if v.max <= VERIFY_TOL {
                Ok(())
            } else {
                Err(CliError::Deviation {
                    max: v.max,
                    tol: VERIFY_TOL,
                })
            }
        }
        Command::Bench {
            horizons,
            solver,
            config,
            out,
            repeats,
        } => {
            let problem = match &config {
                Some(p) => BenchProblem::from_file(p)?,
                None => BenchProblem::demo(),
            };
            let solvers = match solver {
                BenchSolverArg::Both => BenchSolvers::Both,
                BenchSolverArg::Lqt => BenchSolvers::Lqt,
                BenchSolverArg::Lifted => BenchSolvers::Lifted,
            };
            let cells = commands::cmd_bench(&problem, &horizons, solvers, repeats, &out)?;
            for c in &cells {
                println!("N={} {} {:.3} ms", c.horizon, c.solver.name(), c.wall_ms);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
