use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pipeplan::bench::{
    evaluate_config, read_rows, render_rows, render_summary, run_matrix, summarize, write_text,
    Cell, ExperimentSpec, Format, ResultRow,
};
use pipeplan::exec::Execution;
use pipeplan::pddl::{emit_pddl, parse_plan, serialize_plan, write_artifacts};
use pipeplan::planning::build_grouping_task;
use pipeplan::simulator::SimParams;
use pipeplan::strategies::{run_strategy, StrategyKind};
use pipeplan::workload::{generate_pipeline, CatalogMode, Topology, Workload, WorkloadParams};
use pipeplan::{ImageCatalog, Instance, Pipeline};

#[derive(Parser)]
#[command(
    name = "pipeplan",
    version,
    about = "Plan, simulate and benchmark operator groupings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic workload as pipeline and image catalog JSON.
    Generate {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Directory for pipeline.json and images.json; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a grouping with one strategy and print it as JSON.
    Optimize {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value = "connection")]
        strategy: StrategyKind,
        #[arg(long)]
        allow_universal_image: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group with one strategy and simulate it.
    Simulate {
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long, default_value = "connection")]
        strategy: StrategyKind,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        allow_universal_image: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the experiment matrix.
    Bench(BenchArgs),
    #[command(subcommand)]
    Pddl(PddlCommand),
    /// Mean and sample standard deviation per cell and cache state.
    Summarize {
        /// Result rows as CSV or JSON.
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum PddlCommand {
    /// Write domain.pddl and problem.pddl, plus the internal solver's plan.
    Export {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Weight profile baked into the domain.
        #[arg(long, default_value = "connection")]
        strategy: StrategyKind,
        #[arg(long)]
        out: PathBuf,
        /// Skip solving; only write the domain and problem.
        #[arg(long)]
        no_plan: bool,
    },
    /// Validate an external plan and continue with simulation.
    Import {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value = "connection")]
        strategy: StrategyKind,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Clone)]
struct WorkloadArgs {
    #[arg(long, default_value = "line")]
    topology: Topology,
    #[arg(long, default_value_t = 2)]
    special_ops: usize,
    #[arg(long, default_value_t = 1)]
    fib_step: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = CatalogArg::Exclusive)]
    catalog: CatalogArg,
}

impl WorkloadArgs {
    fn params(&self) -> WorkloadParams {
        let mut p = WorkloadParams::new(self.topology, self.special_ops, self.fib_step, self.seed);
        p.catalog = self.catalog.into();
        p
    }

    fn cell(&self, strategy: StrategyKind) -> Cell {
        Cell {
            topology: self.topology,
            special_ops: self.special_ops,
            fib_step: self.fib_step,
            seed: self.seed,
            strategy,
        }
    }
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Custom pipeline JSON, used instead of a generated workload.
    #[arg(long, requires = "images")]
    pipeline: Option<PathBuf>,
    /// Image catalog JSON for --pipeline.
    #[arg(long, requires = "pipeline")]
    images: Option<PathBuf>,
}

enum Loaded {
    Generated(Box<Workload>),
    Custom(Instance),
}

impl Loaded {
    fn instance(&self) -> &Instance {
        match self {
            Loaded::Generated(w) => &w.instance,
            Loaded::Custom(i) => i,
        }
    }
}

impl InstanceArgs {
    fn load(&self) -> Result<Loaded> {
        match (&self.pipeline, &self.images) {
            (Some(p), Some(i)) => {
                let pipeline =
                    Pipeline::from_json(&read(p)?).with_context(|| format!("{}", p.display()))?;
                let catalog = ImageCatalog::from_json(&read(i)?)
                    .with_context(|| format!("{}", i.display()))?;
                Ok(Loaded::Custom(Instance::new(pipeline, catalog)))
            }
            _ => Ok(Loaded::Generated(Box::new(generate_pipeline(
                &self.workload.params(),
            )?))),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogArg {
    Exclusive,
    Literal,
}

impl From<CatalogArg> for CatalogMode {
    fn from(c: CatalogArg) -> Self {
        match c {
            CatalogArg::Exclusive => CatalogMode::Exclusive,
            CatalogArg::Literal => CatalogMode::Literal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Clone)]
struct SimArgs {
    /// SimParams JSON; the flags below override its fields.
    #[arg(long)]
    sim_params: Option<PathBuf>,
    #[arg(long)]
    t_pod: Option<f64>,
    #[arg(long)]
    t_pull: Option<f64>,
    #[arg(long)]
    l_intra: Option<f64>,
    #[arg(long)]
    l_inter: Option<f64>,
    #[arg(long)]
    t_unit: Option<f64>,
}

impl SimArgs {
    fn resolve(&self) -> Result<SimParams> {
        let mut p = match &self.sim_params {
            Some(path) => {
                serde_json::from_str(&read(path)?).with_context(|| format!("{}", path.display()))?
            }
            None => SimParams::default(),
        };
        let overrides = [
            (&mut p.t_pod, self.t_pod),
            (&mut p.t_pull, self.t_pull),
            (&mut p.l_intra, self.l_intra),
            (&mut p.l_inter, self.l_inter),
            (&mut p.t_unit, self.t_unit),
        ];
        for (field, value) in overrides {
            if let Some(v) = value {
                *field = v;
            }
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => Ok(write_text(path, text)?),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Repeatable or comma separated; every topology when absent.
    #[arg(long, value_delimiter = ',')]
    topology: Vec<Topology>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4])]
    special_ops: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    fib_step: Vec<u32>,
    /// Every strategy when absent.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    seed: Vec<u64>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long)]
    allow_universal_image: bool,
    #[arg(long, value_enum, default_value_t = CatalogArg::Exclusive)]
    catalog: CatalogArg,
    #[command(flatten)]
    sim: SimArgs,
    /// Run cells one at a time.
    #[arg(long)]
    sequential: bool,
    /// Also write the summary table here, in the same format.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Exit nonzero when any row records an error.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn to_json(value: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn emit_to(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(write_text(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { workload, out } => {
            let w = generate_pipeline(&workload.params())?;
            match out {
                Some(dir) => {
                    write_text(
                        &dir.join("pipeline.json"),
                        &(w.pipeline().to_json()? + "\n"),
                    )?;
                    write_text(&dir.join("images.json"), &(w.catalog().to_json()? + "\n"))?;
                }
                None => {
                    let doc =
                        serde_json::json!({ "pipeline": w.pipeline(), "images": w.catalog() });
                    print!("{}", to_json(&doc)?);
                }
            }
        }
        Command::Optimize {
            instance,
            strategy,
            allow_universal_image,
            out,
        } => {
            let loaded = instance.load()?;
            let inst = loaded.instance();
            let outcome = run_strategy(
                strategy,
                inst,
                instance.workload.seed,
                allow_universal_image,
            )?;
            let counts = inst.edge_counts(&outcome.config)?;
            let doc = serde_json::json!({
                "strategy": strategy,
                "config": outcome.config,
                "group_count": outcome.config.group_count(),
                "inter_edges": counts.inter,
                "intra_edges": counts.intra,
                "plan_cost": outcome.plan.as_ref().map(|p| p.total_cost),
                "plan": outcome.plan.as_ref().map(|p| &p.steps),
            });
            emit_to(out.as_deref(), &to_json(&doc)?)?;
        }
        Command::Simulate {
            workload,
            strategy,
            reps,
            allow_universal_image,
            sim,
            output,
        } => {
            let sim = sim.resolve()?;
            let w = generate_pipeline(&workload.params())?;
            let outcome =
                run_strategy(strategy, &w.instance, workload.seed, allow_universal_image)?;
            let plan_cost = outcome.plan.as_ref().map(|p| p.total_cost);
            let rows = evaluate_config(
                &workload.cell(strategy),
                &w,
                &outcome.config,
                plan_cost,
                &sim,
                reps,
            )?;
            output.emit(&render_rows(&rows, output.format.into())?)?;
        }
        Command::Bench(args) => return bench_command(args),
        Command::Pddl(PddlCommand::Export {
            instance,
            strategy,
            out,
            no_plan,
        }) => {
            let Some(weights) = strategy.weights() else {
                bail!("strategy {strategy} has no planning weights; use connection or node");
            };
            let loaded = instance.load()?;
            let task = build_grouping_task(loaded.instance(), weights, None)?;
            let artifacts = emit_pddl(&task)?;
            let (domain, problem) = write_artifacts(&artifacts, &out)?;
            eprintln!("wrote {} and {}", domain.display(), problem.display());
            if !no_plan {
                let plan = pipeplan::planning::solve_optimal(&task)?;
                let path = out.join("plan.txt");
                write_text(&path, &serialize_plan(&plan, &task)?)?;
                eprintln!("wrote {} (cost {})", path.display(), plan.total_cost);
            }
        }
        Command::Pddl(PddlCommand::Import {
            instance,
            strategy,
            plan,
            reps,
            sim,
            output,
        }) => {
            let Some(weights) = strategy.weights() else {
                bail!("strategy {strategy} has no planning weights; use connection or node");
            };
            let sim = sim.resolve()?;
            let loaded = instance.load()?;
            let task = build_grouping_task(loaded.instance(), weights, None)?;
            let text = read(&plan)?;
            let parsed = parse_plan(&text, &task).with_context(|| format!("{}", plan.display()))?;
            let config = task.plan_to_config(&parsed)?;
            match &loaded {
                Loaded::Generated(w) => {
                    let cell = instance.workload.cell(strategy);
                    let rows =
                        evaluate_config(&cell, w, &config, Some(parsed.total_cost), &sim, reps)?;
                    output.emit(&render_rows(&rows, output.format.into())?)?;
                }
                // no roles or message parameters to simulate with: report the grouping
                Loaded::Custom(inst) => {
                    let counts = inst.edge_counts(&config)?;
                    let doc = serde_json::json!({
                        "config": config,
                        "group_count": config.group_count(),
                        "inter_edges": counts.inter,
                        "plan_cost": parsed.total_cost,
                    });
                    output.emit(&to_json(&doc)?)?;
                }
            }
        }
        Command::Summarize { input, output } => {
            let rows = read_rows(&input)?;
            let summary = summarize(&rows)?;
            output.emit(&render_summary(&summary, output.format.into())?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_command(args: BenchArgs) -> Result<ExitCode> {
    let defaults = ExperimentSpec::default();
    let spec = ExperimentSpec {
        topologies: if args.topology.is_empty() {
            defaults.topologies
        } else {
            args.topology
        },
        special_ops: args.special_ops,
        fib_steps: args.fib_step,
        strategies: if args.strategy.is_empty() {
            defaults.strategies
        } else {
            args.strategy
        },
        seeds: args.seed,
        reps: args.reps,
        sim: args.sim.resolve()?,
        allow_universal: args.allow_universal_image,
        catalog: args.catalog.into(),
    };
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let rows = run_matrix(&spec, execution)?;
    let format: Format = args.output.format.into();
    args.output.emit(&render_rows(&rows, format)?)?;
    if let Some(path) = &args.summary {
        write_text(path, &render_summary(&summarize(&rows)?, format)?)?;
    }
    let errors: Vec<&ResultRow> = rows.iter().filter(|r| r.is_error()).collect();
    if !errors.is_empty() {
        let cells = errors.len() / spec.reps;
        eprintln!(
            "{cells} cell(s) failed; first: {}",
            errors[0].error.as_deref().unwrap_or("")
        );
        if args.strict {
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
