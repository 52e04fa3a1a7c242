use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use falsur::experiment::{self, ExperimentConfig, Mode, RunDetail, SweepConfig};
use falsur::model::benchmarks;
use falsur::Error;

/// Falsification testing for black-box dynamical models.
///
/// Exit codes: 0 completed, 1 usage or configuration error, 2 runtime model
/// failure.
#[derive(Parser)]
#[command(name = "falsur", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One baseline falsification run.
    Falsify(RunArgs),
    /// One surrogate-assisted run.
    Aristeo(RunArgs),
    /// Repeated runs over consecutive seeds.
    Campaign(RunArgs),
    /// One surrogate campaign per model structure / order vector.
    Sweep(RunArgs),
    /// Re-runs one seed of a stored campaign and compares the row.
    Replay {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Summarizes a campaign directory.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
        dir: Option<PathBuf>,
    },
    /// Lists the benchmark ids.
    Benchmarks,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML experiment (or, for `sweep`, sweep) configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Requirement; defaults to the benchmark's.
    #[arg(long)]
    stl: Option<String>,
    /// baseline or surrogate (`campaign` only).
    #[arg(long)]
    mode: Option<String>,
    /// arx, armax, bj or ss.
    #[arg(long)]
    structure: Option<String>,
    /// Comma-separated orders, e.g. `2,2,1`.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// random, hill-climb or annealing.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    max: Option<usize>,
    #[arg(long = "max-ref")]
    max_ref: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cost multiplier for the model under test.
    #[arg(long)]
    cost: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run repetitions concurrently.
    #[arg(long)]
    parallel: bool,
}

impl RunArgs {
    fn apply(&self, c: &mut ExperimentConfig) -> Result<(), Error> {
        if let Some(v) = &self.model {
            c.model = v.clone();
        }
        if let Some(v) = &self.stl {
            c.stl = Some(v.clone());
        }
        if let Some(v) = &self.mode {
            c.mode = v.parse()?;
        }
        if let Some(v) = &self.structure {
            c.structure = v.clone();
            if self.orders.is_none() {
                c.orders.clear();
            }
        }
        if let Some(v) = &self.orders {
            c.orders = v.clone();
        }
        if let Some(v) = &self.strategy {
            c.strategy = Some(v.clone());
        }
        if let Some(v) = self.max {
            c.max = v;
        }
        if let Some(v) = self.max_ref {
            c.max_ref = v;
        }
        if let Some(v) = self.reps {
            c.reps = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.cost {
            c.cost_factor = v;
        }
        Ok(())
    }

    fn experiment(&self, mode: Mode) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let model = self
                    .model
                    .as_deref()
                    .ok_or_else(|| Error::Config("--model or --config is required".into()))?;
                ExperimentConfig::new(model, mode)
            }
        };
        c.mode = mode;
        self.apply(&mut c)?;
        Ok(c)
    }
}

fn single(args: &RunArgs, mode: Mode) -> Result<ExitCode, Error> {
    let mut config = args.experiment(mode)?;
    config.reps = 1;
    let exp = config.resolve()?;
    let run = exp.run_seed(config.seed);
    if let Some(out) = &args.out {
        if let Some(path) = run.write_artifacts(out)? {
            println!("failing input: {}", path.display());
        }
        std::fs::write(out.join("config.toml"), config.to_toml()?)?;
    }
    let detail = match &run.result {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    match detail {
        RunDetail::Baseline(r) => println!(
            "{}: {} after {} executions, best objective {}",
            config.model,
            if r.falsified {
                "violation found"
            } else {
                "no violation"
            },
            r.executions_used,
            r.best_objective
        ),
        RunDetail::Surrogate(r) => {
            for it in &r.iterations {
                println!(
                    "iter {:>2}: surrogate {:+.6} ({}), mut {:+.6}, train mse {:.3e}",
                    it.iteration,
                    it.surrogate_objective,
                    if it.surrogate_falsified {
                        "falsified"
                    } else {
                        "best candidate"
                    },
                    it.mut_objective,
                    it.train_mse
                );
            }
            println!(
                "{}: {} with {} MUT executions, {} refinements, best objective {}",
                config.model,
                r.outcome,
                r.mut_executions,
                r.refinements_performed,
                r.best_objective
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn campaign(args: &RunArgs) -> Result<(), Error> {
    let mode = match (&args.mode, &args.config) {
        (Some(m), _) => m.parse()?,
        (None, Some(path)) => ExperimentConfig::load(path)?.mode,
        (None, None) => Mode::Baseline,
    };
    let config = args.experiment(mode)?;
    let exp = config.resolve()?;
    let report = experiment::run_campaign(&exp, args.out.as_deref(), args.parallel)?;
    for row in &report.rows {
        println!("{}", row.to_line());
    }
    println!("{}", report.summary());
    Ok(())
}

fn sweep(args: &RunArgs) -> Result<(), Error> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig {
            base: args.experiment(Mode::Surrogate)?,
            variants: Vec::new(),
        },
    };
    args.apply(&mut config.base)?;
    let rows = experiment::sweep(&config, args.out.as_deref(), args.parallel)?;
    println!("structure,orders,effectiveness,mean_iterations,pareto");
    for r in &rows {
        println!(
            "{},\"{}\",{},{},{}",
            r.structure, r.orders, r.effectiveness, r.mean_iterations, r.pareto
        );
    }
    Ok(())
}

fn replay(out: &Path, seed: u64) -> Result<bool, Error> {
    let check = experiment::replay(out, seed)?;
    println!("replayed: {}", check.replayed.to_line());
    match &check.recorded {
        Some(r) => println!("recorded: {}", r.to_line()),
        None => println!("recorded: (no row for seed {seed})"),
    }
    if let Some(p) = &check.failing_input {
        println!("failing input: {}", p.display());
    }
    Ok(check.recorded.is_none() || check.matches())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Falsify(args) => return single(&args, Mode::Baseline),
        Command::Aristeo(args) => return single(&args, Mode::Surrogate),
        Command::Campaign(args) => campaign(&args)?,
        Command::Sweep(args) => sweep(&args)?,
        Command::Replay { out, seed } => {
            if !replay(&out, seed)? {
                eprintln!("replayed row differs from the recorded one");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Report { out, dir } => {
            let dir = out
                .or(dir)
                .ok_or_else(|| Error::Config("report needs a directory".into()))?;
            println!("{}", experiment::report(&dir)?);
        }
        Command::Benchmarks => {
            for id in benchmarks::IDS {
                let b = benchmarks::get(id)?;
                println!(
                    "{id:<12} inputs [{}]  {}",
                    b.profile.names().join(", "),
                    b.requirement
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_runtime() { 2 } else { 1 })
        }
    }
}
