use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use multirank::baselines::{preset_configuration, preset_rankings, solve_with_matrices, BaselinePreset, PresetKind, DEFAULT_DAMPING};
use multirank::configurations::{config_count, config_count_with_length, enumerate_configs, enumerate_configs_with_length, ShiftedConfiguration};
use multirank::engine::{solve, EvalMode, SolveReport, SolverSettings};
use multirank::experiment::{run_experiment, Batch, ExperimentPlan, GeneratorFamily, PSweep};
use multirank::generators::{generate_multiplex, GeneratorSpec, MultiplexSpec};
use multirank::measures::{confidence_interval, cost_table_csv, multijaccard, weighted_kendall_tau, WeightScheme, DEFAULT_COST_TABLE_SIZES};
use multirank::multiplex::{MultiplexNetwork, ScoreVector};
use multirank::Error;

#[derive(Parser)]
#[command(name = "multirank", version, about = "Configurable centrality rankings on multiplex networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the vertices of a multiplex edge list.
    Solve(SolveArgs),
    /// Write a seeded synthetic multiplex as an edge list.
    Generate(GenerateArgs),
    /// List configurations over a number of layers.
    Enumerate(EnumerateArgs),
    /// Compute similarity measures and diagnostics.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Run an experiment batch and emit CSV plus a JSON summary.
    Experiment(ExperimentArgs),
    /// Print the operation-count table.
    CostTable(CostTableArgs),
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long)]
    outer_tol: Option<f64>,
    #[arg(long)]
    max_halvings: Option<usize>,
    #[arg(long)]
    max_inner_iters: Option<usize>,
    #[arg(long, value_enum)]
    eval_mode: Option<EvalModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalModeArg {
    MatvecChain,
    ExplicitProduct,
}

impl SolverFlags {
    fn apply(&self, mut s: SolverSettings) -> SolverSettings {
        if let Some(v) = self.tau0 {
            s.tau0 = v;
        }
        if let Some(v) = self.inner_tol {
            s.inner_tol = v;
        }
        if let Some(v) = self.outer_tol {
            s.outer_tol = v;
        }
        if let Some(v) = self.max_halvings {
            s.max_outer_halvings = v;
        }
        if let Some(v) = self.max_inner_iters {
            s.max_inner_iters = v;
        }
        if let Some(m) = self.eval_mode {
            s.eval_mode = match m {
                EvalModeArg::MatvecChain => EvalMode::MatvecChain,
                EvalModeArg::ExplicitProduct => EvalMode::ExplicitProduct,
            };
        }
        s
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    network: PathBuf,
    /// Written-order sequence such as "A0T A0 A1T A1".
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DAMPING)]
    damping: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include the per-stage solver trace.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Er,
    Sbm,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = GeneratorArg::Er)]
    generator: GeneratorArg,
    /// Vertex count for the Erdős–Rényi base.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Edge probability for the Erdős–Rényi base.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Comma-separated SBM block sizes.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    p_in: f64,
    #[arg(long, default_value_t = 0.2)]
    p_out: f64,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Per-layer inclusion probability of each base arc.
    #[arg(long, default_value_t = 0.5)]
    layer_p: f64,
    /// Assign every base arc to exactly one layer.
    #[arg(long)]
    exclusive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    layers: usize,
    /// Only configurations of this length.
    #[arg(long)]
    k: Option<usize>,
    /// Print only the number of configurations.
    #[arg(long)]
    count: bool,
}

#[derive(Subcommand)]
enum MeasureCommand {
    /// Mean pairwise edge-set Jaccard similarity of the layers.
    Multijaccard { network: PathBuf },
    /// Weighted Kendall tau between two score files (one value per line).
    Tau {
        reference: PathBuf,
        other: PathBuf,
        #[arg(long, default_value = "hyperbolic")]
        scheme: String,
    },
    /// Mean and 95% confidence interval of a sample file.
    Ci { samples: PathBuf },
    /// Irreducibility and period of the union graph.
    Check { network: PathBuf },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    batch: Option<String>,
    /// JSON plan; command-line flags override its fields.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    generator: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Layer counts for the convergence batch.
    #[arg(long, value_delimiter = ',')]
    layer_counts: Vec<usize>,
    #[arg(long)]
    p_start: Option<f64>,
    #[arg(long)]
    p_stop: Option<f64>,
    #[arg(long)]
    p_step: Option<f64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    paper_scale: bool,
    /// CSV destination; the summary goes next to it with a `.json` extension.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct CostTableArgs {
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long, default_value_t = 2)]
    layers: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

type CliResult = Result<(), Error>;

fn emit(output: Option<&Path>, text: &str) -> CliResult {
    match output {
        Some(p) => fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rankings_json(m: &MultiplexNetwork, rankings: &[ScoreVector]) -> serde_json::Value {
    let ids = m.vertex_ids();
    rankings
        .iter()
        .enumerate()
        .map(|(s, r)| {
            let scores: Vec<_> = ids
                .iter()
                .zip(r.as_slice())
                .map(|(id, x)| json!({ "vertex": id, "score": x }))
                .collect();
            json!({ "index": s, "scores": scores })
        })
        .collect()
}

fn rankings_csv(m: &MultiplexNetwork, rankings: &[ScoreVector]) -> String {
    let mut out = String::from("vertex");
    for s in 0..rankings.len() {
        out.push_str(&format!(",r{s}"));
    }
    out.push('\n');
    for (i, id) in m.vertex_ids().iter().enumerate() {
        out.push_str(&id.to_string());
        for r in rankings {
            out.push_str(&format!(",{}", r.as_slice()[i]));
        }
        out.push('\n');
    }
    out
}

fn cmd_solve(args: SolveArgs) -> CliResult {
    let m = MultiplexNetwork::load(&args.network)?;
    let settings = args.solver.apply(SolverSettings::default());
    settings.validate()?;
    let (rankings, report): (Vec<ScoreVector>, Option<SolveReport>) = match (&args.config, &args.preset) {
        (Some(text), _) => {
            let sc = ShiftedConfiguration::parse(text, m.layer_count())?;
            let r = solve(&m, &sc, &settings)?;
            (r.rankings.clone(), Some(r))
        }
        (None, Some(name)) => {
            let preset = BaselinePreset {
                kind: name.parse::<PresetKind>()?,
                damping: args.damping,
            };
            if preset.kind.is_native() {
                (preset_rankings(&m, preset, &settings)?, None)
            } else {
                let (matrices, sc) = preset_configuration(preset, m.layer_count())?;
                let r = solve_with_matrices(&m, matrices, &sc, &settings)?;
                (r.rankings.clone(), Some(r))
            }
        }
        (None, None) => return Err(Error::InvalidInput("either --config or --preset is required".into())),
    };
    let text = match args.format {
        Format::Csv => rankings_csv(&m, &rankings),
        Format::Json => {
            let mut doc = json!({ "rankings": rankings_json(&m, &rankings) });
            if let Some(r) = &report {
                doc["sequence"] = r.sequence.clone().into();
                doc["final_tau"] = r.final_tau.into();
                doc["principal_eigenvalue_estimate"] = r.principal_eigenvalue_estimate.into();
                if args.trace {
                    doc["per_tau_trace"] = serde_json::to_value(&r.per_tau_trace)?;
                }
            }
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    if args.trace && matches!(args.format, Format::Csv) {
        if let Some(r) = &report {
            eprintln!("{}", serde_json::to_string(&r.per_tau_trace)?);
        }
    }
    emit(args.output.as_deref(), &text)
}

fn cmd_generate(args: GenerateArgs) -> CliResult {
    let base_seed = args.seed;
    let base = match args.generator {
        GeneratorArg::Er => GeneratorSpec::erdos_renyi(args.n, args.p, base_seed),
        GeneratorArg::Sbm => {
            let blocks = if args.blocks.is_empty() {
                vec![args.n / 2, args.n - args.n / 2]
            } else {
                args.blocks.clone()
            };
            GeneratorSpec::planted_partition(blocks, args.p_in, args.p_out, base_seed)
        }
    };
    let mut spec = MultiplexSpec::uniform(base, args.layers, args.layer_p, args.seed.wrapping_add(1));
    if args.exclusive {
        spec.independent = false;
        spec.layer_probs = vec![1.0 / args.layers.max(1) as f64; args.layers];
    }
    let m = generate_multiplex(&spec, args.layers)?;
    emit(args.output.as_deref(), &m.to_edge_list())
}

fn cmd_enumerate(args: EnumerateArgs) -> CliResult {
    if args.layers == 0 {
        return Err(Error::InvalidInput("layers must be at least 1".into()));
    }
    if args.count {
        let total = match args.k {
            Some(k) => config_count_with_length(args.layers, k),
            None => config_count(args.layers),
        };
        println!("{total}");
        return Ok(());
    }
    let configs = match args.k {
        Some(k) => enumerate_configs_with_length(args.layers, k)?,
        None => enumerate_configs(args.layers)?,
    };
    let mut out = String::new();
    for c in configs {
        out.push_str(&format!("{c}\t{}\n", c.members().len()));
    }
    emit(None, &out)
}

fn read_values(path: &Path) -> Result<Vec<f64>, Error> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("`{l}`: {e}"),
            })
        })
        .collect()
}

fn cmd_measure(cmd: MeasureCommand) -> CliResult {
    let doc = match cmd {
        MeasureCommand::Multijaccard { network } => {
            let m = MultiplexNetwork::load(&network)?;
            json!({ "multijaccard": multijaccard(&m)? })
        }
        MeasureCommand::Tau { reference, other, scheme } => {
            let r = read_values(&reference)?;
            let s = read_values(&other)?;
            let result = weighted_kendall_tau(&r, &s, scheme.parse::<WeightScheme>()?)?;
            serde_json::to_value(result)?
        }
        MeasureCommand::Ci { samples } => serde_json::to_value(confidence_interval(&read_values(&samples)?)?)?,
        MeasureCommand::Check { network } => serde_json::to_value(MultiplexNetwork::load(&network)?.superposition_check())?,
    };
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn family(name: &str) -> Result<GeneratorFamily, Error> {
    match name {
        "er" | "erdos_renyi" | "erdos-renyi" => Ok(GeneratorFamily::ErdosRenyi),
        "sbm" => Ok(GeneratorFamily::Sbm),
        other => Err(Error::InvalidInput(format!("unknown generator `{other}`"))),
    }
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let batch: Option<Batch> = args.batch.as_deref().map(str::parse).transpose()?;
    let mut plan = match (&args.plan, batch) {
        (Some(path), _) => serde_json::from_str::<ExperimentPlan>(&fs::read_to_string(path)?)?,
        (None, Some(b)) if args.paper_scale => ExperimentPlan::paper_scale(b),
        (None, Some(b)) => ExperimentPlan::desk(b),
        (None, None) => return Err(Error::InvalidInput("either --batch or --plan is required".into())),
    };
    if let Some(b) = batch {
        plan.batch = b;
    }
    if !args.generator.is_empty() {
        plan.generators = args.generator.iter().map(|g| family(g)).collect::<Result<_, _>>()?;
    }
    if !args.n.is_empty() {
        plan.node_sizes = args.n.clone();
    }
    if let Some(l) = args.layers {
        plan.layers = l;
    }
    if !args.layer_counts.is_empty() {
        plan.layer_counts = args.layer_counts.clone();
    }
    plan.p_sweep = PSweep {
        start: args.p_start.unwrap_or(plan.p_sweep.start),
        stop: args.p_stop.unwrap_or(plan.p_sweep.stop),
        step: args.p_step.unwrap_or(plan.p_sweep.step),
    };
    if let Some(r) = args.repetitions {
        plan.repetitions = r;
    }
    if let Some(s) = args.seed {
        plan.seed = s;
    }
    if let Some(o) = &args.output {
        plan.output = Some(o.display().to_string());
    }
    plan.settings = args.solver.apply(plan.settings.clone());

    let threads = std::env::var("MULTIRANK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let output = pool.install(|| run_experiment(&plan))?;
    let csv = output.to_csv(args.deterministic);
    let summary = serde_json::to_string_pretty(&output.summary(args.deterministic))? + "\n";
    match &args.output {
        Some(path) => {
            fs::write(path, csv)?;
            fs::write(path.with_extension("json"), summary)?;
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_cost_table(args: CostTableArgs) -> CliResult {
    let ns = if args.n.is_empty() {
        DEFAULT_COST_TABLE_SIZES.to_vec()
    } else {
        args.n
    };
    emit(args.output.as_deref(), &cost_table_csv(&ns, args.layers)?)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Json(_) => 2,
        Error::Dimension { .. } | Error::LayerOutOfRange { .. } => 3,
        Error::NonConvergence { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Measure(c) => cmd_measure(c),
        Command::Experiment(a) => cmd_experiment(a),
        Command::CostTable(a) => cmd_cost_table(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
