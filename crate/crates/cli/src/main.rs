use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqsteer::config::{load_problem, load_scenario, parse_scenario};
use seqsteer::density::joint_distribution;
use seqsteer::experiments::{find, registry, run_experiment, ExperimentKind, ExperimentOutcome, Payload};
use seqsteer::optimizer::{conjecture_probe, maximize, sweep_lambda, Budget, DirectionSet};
use seqsteer::report::{
    conjecture_csv, optimize_csv, run_csv, run_report, sweep_csv, to_json, OptimizeReport,
};
use seqsteer::verify::{verify, VerifyOptions, VerifyReport};
use seqsteer::{Error, Scenario};

#[derive(Parser)]
#[command(name = "seqsteer", version, about = "Sequential unsharp-measurement steering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::JsonText)]
    format: Format,
    /// Overrides the seed of a problem file or experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optimizer budget as RESTARTS,ITERATIONS.
    #[arg(long, global = true)]
    budget: Option<BudgetArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    JsonText,
}

#[derive(Clone, Copy)]
struct BudgetArg(Budget);

impl FromStr for BudgetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (r, i) = s.split_once(',').ok_or("expected RESTARTS,ITERATIONS")?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        let (restarts, iterations) = (parse(r)?, parse(i)?);
        if restarts == 0 || iterations == 0 {
            return Err("restarts and iterations must be positive".into());
        }
        Ok(Self(Budget { restarts, iterations }))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario file or a bundled scenario.
    Run {
        /// Name of a bundled run experiment.
        name: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Maximize a steering value as described by a problem file.
    Optimize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scan one sharpness parameter; the problem file needs a [sweep] table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the cross-engine property suite.
    Verify {
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Largest CJWR value of the last Bob with earlier Bobs on the bound.
    Conjecture {
        #[arg(long)]
        settings: usize,
        #[arg(long)]
        chain: usize,
        #[arg(long, value_enum, default_value_t = Family::Free)]
        family: Family,
    },
    /// Run every bundled experiment and compare with its pinned values.
    ReproduceAll,
    /// List the bundled experiments.
    List,
    /// Dump the exact joint outcome distribution of a scenario as CSV.
    Distribution {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        alice: usize,
        /// One setting index per Bob, comma separated.
        #[arg(long, value_delimiter = ',')]
        bobs: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Free,
    Platonic,
}

/// Reproduction or verification missed its target.
struct Missed;

enum Failure {
    Missed,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<Missed> for Failure {
    fn from(_: Missed) -> Self {
        Failure::Missed
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Missed) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn budget_or(common: &Common, fallback: Option<Budget>) -> Budget {
    common.budget.map(|b| b.0).or(fallback).unwrap_or_default()
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match &cli.command {
        Command::Run { name, config } => {
            let scenario = match (name, config) {
                (Some(n), None) => bundled_run(n)?,
                (None, Some(path)) => load_scenario(path)?,
                _ => return Err(usage("run takes either a bundled scenario name or --config")),
            };
            let r = run_report(&scenario)?;
            let text = match common.format {
                Format::Csv => run_csv(&r),
                Format::JsonText => to_json(&r),
            };
            emit(common, &text)?;
        }
        Command::Optimize { config } => {
            let p = load_problem(config)?;
            let budget = budget_or(common, p.budget);
            let r = maximize(&p.problem, budget, common.seed.or(p.seed).unwrap_or(0))?;
            let report = OptimizeReport::from(&r);
            let text = match common.format {
                Format::Csv => optimize_csv(&report),
                Format::JsonText => to_json(&report),
            };
            emit(common, &text)?;
        }
        Command::Sweep { config } => {
            let p = load_problem(config)?;
            let spec = p.sweep.clone().ok_or_else(|| usage("problem file has no [sweep] table"))?;
            let budget = budget_or(common, p.budget);
            let r = sweep_lambda(&p.problem, &spec, budget, common.seed.or(p.seed).unwrap_or(0))?;
            let text = match common.format {
                Format::Csv => sweep_csv(&r),
                Format::JsonText => to_json(&r),
            };
            emit(common, &text)?;
        }
        Command::Verify { tolerance, trials } => {
            if *trials == 0 {
                return Err(usage("--trials must be at least 1"));
            }
            let opts = VerifyOptions { tolerance: *tolerance, trials: *trials, seed: common.seed.unwrap_or(0) };
            let r = verify(&opts)?;
            let text = match common.format {
                Format::Csv => verify_csv(&r),
                Format::JsonText => to_json(&r),
            };
            emit(common, &text)?;
            if !r.passed {
                return Err(Missed.into());
            }
        }
        Command::Conjecture { settings, chain, family } => {
            let family = match family {
                Family::Free => DirectionSet::Free,
                Family::Platonic => DirectionSet::Platonic,
            };
            let r = conjecture_probe(*settings, *chain, family, budget_or(common, None), common.seed.unwrap_or(0))?;
            let text = match common.format {
                Format::Csv => conjecture_csv(&r),
                Format::JsonText => to_json(&r),
            };
            emit(common, &text)?;
        }
        Command::ReproduceAll => {
            let budget = budget_or(common, None);
            let mut outcomes = Vec::new();
            for mut spec in registry()? {
                if let Some(seed) = common.seed {
                    spec.seed = seed;
                }
                let o = run_experiment(&spec, budget)?;
                eprintln!("{}", summary_line(&o));
                outcomes.push(o);
            }
            let text = match common.format {
                Format::Csv => reproduce_csv(&outcomes),
                Format::JsonText => to_json(&outcomes),
            };
            emit(common, &text)?;
            if outcomes.iter().any(|o| !o.passed) {
                return Err(Missed.into());
            }
        }
        Command::List => {
            let mut text = String::new();
            for e in registry()? {
                text.push_str(&format!("{}\t{}\n", e.name, kind_name(e.kind())));
            }
            emit(common, &text)?;
        }
        Command::Distribution { config, alice, bobs } => {
            let s = load_scenario(config)?;
            let d = joint_distribution(&s, *alice, bobs)?;
            emit(common, &d.to_csv())?;
        }
    }
    Ok(())
}

fn usage(msg: &str) -> Failure {
    Failure::Error(Error::Domain(msg.to_string()))
}

fn bundled_run(name: &str) -> Result<Scenario, Error> {
    // a path given without --config is still accepted
    if Path::new(name).is_file() {
        let src = std::fs::read_to_string(name)?;
        return parse_scenario(&src, name);
    }
    match find(name)?.payload {
        Payload::Run(s) => Ok(s),
        _ => Err(Error::Domain(format!("{name:?} is not a run experiment; use reproduce-all"))),
    }
}

fn kind_name(k: ExperimentKind) -> &'static str {
    match k {
        ExperimentKind::Run => "run",
        ExperimentKind::Optimize => "optimize",
        ExperimentKind::Sweep => "sweep",
        ExperimentKind::Verify => "verify",
        ExperimentKind::Conjecture => "conjecture",
    }
}

fn summary_line(o: &ExperimentOutcome) -> String {
    let observed: Vec<String> = o.measurements.iter().map(|m| format!("{:.6}", m.observed)).collect();
    format!(
        "{} {} ({}): observed {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.name,
        kind_name(o.kind),
        observed.join(", ")
    )
}

fn reproduce_csv(outcomes: &[ExperimentOutcome]) -> String {
    let mut out = String::from("experiment,kind,check,observed,passed\n");
    for o in outcomes {
        for (i, m) in o.measurements.iter().enumerate() {
            out.push_str(&format!("{},{},{i},{:.16e},{}\n", o.name, kind_name(o.kind), m.observed, m.passed));
        }
    }
    out
}

fn verify_csv(r: &VerifyReport) -> String {
    let mut out = String::from("property,observed,threshold,passed\n");
    for p in &r.properties {
        out.push_str(&format!("{},{:.6e},{:e},{}\n", p.name, p.observed, p.threshold, p.passed));
    }
    out
}
