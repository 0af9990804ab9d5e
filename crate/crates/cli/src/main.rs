//! `povm-ascent` command-line front end.
//!
//! Exit codes: 0 converged, 1 bad input or usage, 2 round budget exhausted
//! without convergence, 3 no accepted ascent step.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use povm_ascent::io::{ensemble_from_json, ensemble_to_json, result_to_json, trace_csv};
use povm_ascent::scenarios::{
    adhoc_ensemble, critical_epsilon, helstrom_projectors, i_alice_bob, i_alice_eve,
    tomographic_sextet, SEPARABLE_NOTE, SEPARABLE_THRESHOLD,
};
use povm_ascent::{
    joint_probabilities, mutual_information, optimize, success_rate, Ensemble, Error,
    GradientFunctional, IterationConfig, KStrategy, LogBase, OptimizationResult,
};

#[derive(Parser, Debug)]
#[command(
    name = "povm-ascent",
    version,
    about = "Accessible information by steepest ascent over POVMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a POVM for an ensemble read from a JSON file.
    Optimize {
        input: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Minimum-error discrimination: analytic projectors (J = 2) and the
    /// iterative optimum.
    Helstrom {
        input: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Run a built-in scenario.
    Scenario {
        name: ScenarioName,
        /// Noise level, required for the tomographic scenario.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Write the scenario ensemble as JSON.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Plot data: an epsilon sweep (tomographic) or a convergence trace
    /// (adhoc, or any ensemble via --input).
    Sweep {
        name: ScenarioName,
        /// Comma-separated noise levels.
        #[arg(long, value_delimiter = ',')]
        epsilons: Vec<f64>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Ensemble file used instead of the adhoc ensemble for a
        /// convergence trace.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    Adhoc,
    Tomographic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FunctionalFlag {
    Ai,
    Helstrom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyFlag {
    Fixed,
    Davies,
    Grow,
    Prune,
}

#[derive(Args, Debug, Clone)]
struct RunFlags {
    #[arg(long, value_enum)]
    functional: Option<FunctionalFlag>,
    /// Number of POVM members.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    k_strategy: Option<StrategyFlag>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    tol_info: Option<f64>,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent random starts, run concurrently; the best is reported.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Result JSON (or CSV for sweeps).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report information in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

impl RunFlags {
    fn base(&self) -> LogBase {
        if self.bits {
            LogBase::Bit
        } else {
            LogBase::Nat
        }
    }

    fn functional(&self) -> GradientFunctional {
        match self.functional.unwrap_or(FunctionalFlag::Ai) {
            FunctionalFlag::Ai => GradientFunctional::AccessibleInformation,
            FunctionalFlag::Helstrom => GradientFunctional::Helstrom,
        }
    }

    /// `--k` alone means a fixed K; no K flags means grow (or K = J for
    /// Helstrom).
    fn config(&self, f: &GradientFunctional, j: usize) -> Result<IterationConfig, String> {
        let helstrom = matches!(f, GradientFunctional::Helstrom);
        let strategy = match (self.k_strategy, self.k) {
            (None, None) if helstrom => KStrategy::Fixed(j),
            (None, None) => KStrategy::Grow,
            (None, Some(k)) | (Some(StrategyFlag::Fixed), Some(k)) => KStrategy::Fixed(k),
            (Some(StrategyFlag::Fixed), None) => KStrategy::Fixed(j),
            (Some(StrategyFlag::Prune), k) => KStrategy::Prune(k.unwrap_or(j)),
            (Some(StrategyFlag::Davies), _) => KStrategy::Davies,
            (Some(StrategyFlag::Grow), _) => KStrategy::Grow,
        };
        let defaults = IterationConfig::default();
        let cfg = IterationConfig {
            alpha0: self.alpha0,
            tol_info: self.tol_info.unwrap_or(defaults.tol_info),
            tol_residual: self.tol_residual.unwrap_or(defaults.tol_residual),
            max_rounds: self.max_rounds.unwrap_or(defaults.max_rounds),
            k_strategy: strategy,
            seed: self.seed,
            restarts: self.restarts,
            ..defaults
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Failure mapped to an exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoProgress { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn read_ensemble(path: &Path) -> Result<Ensemble, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    ensemble_from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn status(result: &OptimizationResult) -> ExitCode {
    if result.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn summary(f: &GradientFunctional, r: &OptimizationResult, base: LogBase) -> String {
    let value = match f {
        GradientFunctional::Helstrom => format!("success rate = {:.10}", r.info_value),
        _ => format!("I = {:.10} {}", base.from_nats(r.info_value), base.unit()),
    };
    format!(
        "{}: {value} (K = {}, rounds = {}, residual = {:.2e}, {})",
        f.name(),
        r.povm.len(),
        r.rounds_used,
        r.residual,
        if r.converged {
            "converged"
        } else {
            "not converged"
        }
    )
}

/// Runs the optimizer and writes the requested artifacts.
fn run_and_report(
    e: &Ensemble,
    f: &GradientFunctional,
    run: &RunFlags,
) -> Result<OptimizationResult, Failure> {
    let cfg = run.config(f, e.len()).map_err(Failure::input)?;
    let result = optimize(e, f, &cfg, None)?;
    if let Some(path) = &run.trace {
        write_file(path, &trace_csv(&result.trace))?;
    }
    if let Some(path) = &run.out {
        write_file(path, &result_to_json(&result, f.name(), run.base()))?;
    }
    println!("{}", summary(f, &result, run.base()));
    Ok(result)
}

fn cmd_optimize(input: &Path, run: &RunFlags) -> CmdResult {
    let e = read_ensemble(input)?;
    let result = run_and_report(&e, &run.functional(), run)?;
    Ok(status(&result))
}

fn cmd_helstrom(input: &Path, run: &RunFlags) -> CmdResult {
    let e = read_ensemble(input)?;
    if e.len() == 2 {
        let projectors = helstrom_projectors(&e)?;
        let d = joint_probabilities(&e, &projectors)?;
        println!(
            "analytic projectors: success rate = {:.10}, I = {:.10} {}",
            success_rate(&d)?,
            mutual_information(&d, run.base()),
            run.base().unit()
        );
    }
    let result = run_and_report(&e, &GradientFunctional::Helstrom, run)?;
    Ok(status(&result))
}

fn check_epsilon(eps: f64) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&eps) {
        Ok(eps)
    } else {
        Err(Failure::input(format!("epsilon {eps} outside [0, 1]")))
    }
}

fn cmd_scenario(
    name: ScenarioName,
    epsilon: Option<f64>,
    emit: Option<&Path>,
    run: &RunFlags,
) -> CmdResult {
    match name {
        ScenarioName::Adhoc => {
            if epsilon.is_some() {
                return Err(Failure::input(
                    "--epsilon only applies to the tomographic scenario",
                ));
            }
            let e = adhoc_ensemble();
            if let Some(path) = emit {
                write_file(path, &ensemble_to_json(&e))?;
            }
            let projectors = helstrom_projectors(&e)?;
            let d = joint_probabilities(&e, &projectors)?;
            println!(
                "helstrom projectors: success rate = {:.10}, I = {:.10} bits ({:.10} nats)",
                success_rate(&d)?,
                mutual_information(&d, LogBase::Bit),
                mutual_information(&d, LogBase::Nat)
            );
            let helstrom_run = RunFlags {
                k: Some(2),
                k_strategy: None,
                trace: None,
                out: None,
                ..run.clone()
            };
            let h = run_and_report(&e, &GradientFunctional::Helstrom, &helstrom_run)?;
            let result = run_and_report(&e, &run.functional(), run)?;
            if h.converged && result.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        ScenarioName::Tomographic => {
            let eps = check_epsilon(
                epsilon
                    .ok_or_else(|| Failure::input("the tomographic scenario needs --epsilon"))?,
            )?;
            let e = tomographic_sextet(eps)?;
            if let Some(path) = emit {
                write_file(path, &ensemble_to_json(&e))?;
            }
            let result = run_and_report(&e, &GradientFunctional::AccessibleInformation, run)?;
            let eve = i_alice_eve(eps)?;
            println!(
                "epsilon = {eps}: I_numeric = {:.10} bits, I_A&E = {:.10} bits, I_A&B = {:.10} bits",
                LogBase::Bit.from_nats(result.info_value),
                eve.bits,
                i_alice_bob(eps)?
            );
            if eps >= SEPARABLE_THRESHOLD {
                println!("note: {SEPARABLE_NOTE}");
            } else if eps < critical_epsilon() {
                println!(
                    "I_A&B > I_A&E: below the critical noise level {:.6}",
                    critical_epsilon()
                );
            } else {
                println!(
                    "I_A&B <= I_A&E: at or above the critical noise level {:.6}",
                    critical_epsilon()
                );
            }
            Ok(status(&result))
        }
    }
}

fn epsilon_grid(
    list: &[f64],
    from: Option<f64>,
    to: Option<f64>,
    step: Option<f64>,
) -> Result<Vec<f64>, Failure> {
    let mut grid = list.to_vec();
    match (from, to, step) {
        (None, None, None) => {}
        (Some(a), Some(b), Some(h)) if h > 0.0 && b >= a => {
            let n = ((b - a) / h + 1e-9).floor() as usize;
            grid.extend((0..=n).map(|i| a + i as f64 * h));
        }
        _ => {
            return Err(Failure::input(
                "--from, --to and --step must be given together with step > 0 and to >= from",
            ))
        }
    }
    if grid.is_empty() {
        return Err(Failure::input("empty epsilon grid"));
    }
    grid.iter()
        .try_for_each(|&e| check_epsilon(e).map(|_| ()))?;
    Ok(grid)
}

fn cmd_sweep(
    name: ScenarioName,
    grid: Result<Vec<f64>, Failure>,
    input: Option<&Path>,
    run: &RunFlags,
) -> CmdResult {
    match name {
        ScenarioName::Tomographic => {
            let grid = grid?;
            let cfg = run
                .config(&GradientFunctional::AccessibleInformation, 6)
                .map_err(Failure::input)?;
            let mut csv = String::from("epsilon,i_ab_bits,i_ae_bits,i_numeric_bits\n");
            let mut all_converged = true;
            for eps in grid {
                let e = tomographic_sextet(eps)?;
                let r = optimize(&e, &GradientFunctional::AccessibleInformation, &cfg, None)?;
                all_converged &= r.converged;
                let row = format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    eps,
                    i_alice_bob(eps)?,
                    i_alice_eve(eps)?.bits,
                    LogBase::Bit.from_nats(r.info_value)
                );
                println!("{row}");
                csv.push_str(&row);
                csv.push('\n');
            }
            if let Some(path) = &run.out {
                write_file(path, &csv)?;
            }
            Ok(if all_converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        ScenarioName::Adhoc => {
            let e = match input {
                Some(path) => read_ensemble(path)?,
                None => adhoc_ensemble(),
            };
            let f = run.functional();
            let cfg = run.config(&f, e.len()).map_err(Failure::input)?;
            let result = optimize(&e, &f, &cfg, None)?;
            let csv = trace_csv(&result.trace);
            match run.out.as_ref().or(run.trace.as_ref()) {
                Some(path) => write_file(path, &csv)?,
                None => print!("{csv}"),
            }
            eprintln!("{}", summary(&f, &result, run.base()));
            Ok(status(&result))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Optimize { input, run } => cmd_optimize(input, run),
        Command::Helstrom { input, run } => cmd_helstrom(input, run),
        Command::Scenario {
            name,
            epsilon,
            emit,
            run,
        } => cmd_scenario(*name, *epsilon, emit.as_deref(), run),
        Command::Sweep {
            name,
            epsilons,
            from,
            to,
            step,
            input,
            run,
        } => cmd_sweep(
            *name,
            epsilon_grid(epsilons, *from, *to, *step),
            input.as_deref(),
            run,
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
