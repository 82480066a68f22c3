//! Experiment batches: method comparison, configuration and shift sweeps,
//! convergence traces and the cost table.
//!
//! Every task derives its seeds from the plan seed and its coordinates, runs
//! independently on the rayon pool, and is collected in a fixed order, so a
//! plan always produces the same rows.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{classic_eigenvector, preset_rankings, BaselinePreset, PresetKind, DEFAULT_DAMPING};
use crate::configurations::{enumerate_configs_with_length, ShiftedConfiguration};
use crate::engine::{convergence_probe, solve, SolverSettings};
use crate::error::{Error, Result};
use crate::generators::{generate_multiplex, GeneratorSpec, MultiplexSpec};
use crate::measures::{confidence_interval, cost_table_csv, merge_near_ties, multijaccard, weighted_kendall_tau, WeightScheme};
use crate::multiplex::{MultiplexNetwork, ScoreVector};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Batch {
    CompareMethods,
    ConfigImpact,
    ShiftImpact,
    Convergence,
    CostTable,
}

impl Batch {
    pub fn name(self) -> &'static str {
        match self {
            Batch::CompareMethods => "compare-methods",
            Batch::ConfigImpact => "config-impact",
            Batch::ShiftImpact => "shift-impact",
            Batch::Convergence => "convergence",
            Batch::CostTable => "cost-table",
        }
    }
}

impl std::str::FromStr for Batch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Batch::CompareMethods,
            Batch::ConfigImpact,
            Batch::ShiftImpact,
            Batch::Convergence,
            Batch::CostTable,
        ]
        .into_iter()
        .find(|b| b.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown batch `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorFamily {
    ErdosRenyi,
    Sbm,
}

impl GeneratorFamily {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorFamily::ErdosRenyi => "erdos_renyi",
            GeneratorFamily::Sbm => "sbm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl PSweep {
    /// Grid points `start + i * step` up to `stop`, rounded to 12 decimals so
    /// repeated addition error never drops or duplicates an endpoint.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    pub batch: Batch,
    pub generators: Vec<GeneratorFamily>,
    pub node_sizes: Vec<usize>,
    pub layers: usize,
    pub p_sweep: PSweep,
    pub repetitions: usize,
    pub seed: u64,
    /// Edge probability of the Erdős–Rényi base graph.
    pub er_p: f64,
    /// Number of equal communities in the SBM base graph.
    pub sbm_blocks: usize,
    pub sbm_p_in: f64,
    pub sbm_p_out: f64,
    pub damping: f64,
    pub weight_scheme: WeightScheme,
    /// Scores closer than this are treated as ties before comparison.
    pub tie_tolerance: f64,
    /// Per-layer inclusion probability used by the convergence batch.
    pub convergence_layer_p: f64,
    /// Layer counts swept by the convergence batch; empty means `[layers]`.
    pub layer_counts: Vec<usize>,
    /// Stages run past outer convergence to sharpen the `v(0)` reference.
    pub extra_halvings: usize,
    pub settings: SolverSettings,
    pub output: Option<String>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan::desk(Batch::CompareMethods)
    }
}

impl ExperimentPlan {
    /// Reduced sizes suitable for a workstation.
    pub fn desk(batch: Batch) -> Self {
        let node_sizes = match batch {
            Batch::ConfigImpact | Batch::ShiftImpact => vec![256],
            Batch::CostTable => vec![64, 128, 256, 512, 1024, 2048, 4096],
            _ => vec![64, 128, 256],
        };
        ExperimentPlan {
            batch,
            generators: vec![GeneratorFamily::ErdosRenyi, GeneratorFamily::Sbm],
            node_sizes,
            layers: 2,
            p_sweep: PSweep {
                start: 0.0,
                stop: 1.0,
                step: 0.05,
            },
            repetitions: 8,
            seed: 0,
            er_p: 0.5,
            sbm_blocks: 2,
            sbm_p_in: 0.5,
            sbm_p_out: 0.2,
            damping: DEFAULT_DAMPING,
            weight_scheme: WeightScheme::Hyperbolic,
            tie_tolerance: 1e-9,
            convergence_layer_p: 0.5,
            layer_counts: Vec::new(),
            extra_halvings: 10,
            settings: SolverSettings::default(),
            output: None,
        }
    }

    /// Full sizes: `|V| = 2^6 ... 2^10` (256 for the configuration batches)
    /// and 32 repetitions.
    pub fn paper_scale(batch: Batch) -> Self {
        let mut plan = Self::desk(batch);
        plan.repetitions = 32;
        plan.node_sizes = match batch {
            Batch::ConfigImpact | Batch::ShiftImpact => vec![256],
            Batch::CostTable => plan.node_sizes,
            _ => vec![64, 128, 256, 512, 1024],
        };
        plan
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_sweep.step > 0.0) {
            return Err(Error::invalid("p-sweep step must be positive"));
        }
        if self.p_sweep.start < 0.0 || self.p_sweep.stop > 1.0 || self.p_sweep.start > self.p_sweep.stop {
            return Err(Error::invalid("p-sweep must stay within [0, 1] with start <= stop"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.layers == 0 || self.layer_counts.contains(&0) {
            return Err(Error::invalid("layer counts must be at least 1"));
        }
        if self.node_sizes.is_empty() || self.node_sizes.contains(&0) {
            return Err(Error::invalid("node sizes must be non-empty and positive"));
        }
        if self.generators.is_empty() && self.batch != Batch::CostTable {
            return Err(Error::invalid("at least one generator is required"));
        }
        if self.sbm_blocks == 0 {
            return Err(Error::invalid("SBM needs at least one block"));
        }
        if matches!(self.batch, Batch::CompareMethods | Batch::ConfigImpact | Batch::ShiftImpact)
            && self.layers < 2
        {
            return Err(Error::invalid("ranking batches need at least two layers"));
        }
        self.settings.validate()
    }

    fn base_spec(&self, family: GeneratorFamily, n: usize, seed: u64) -> GeneratorSpec {
        match family {
            GeneratorFamily::ErdosRenyi => GeneratorSpec::erdos_renyi(n, self.er_p, seed),
            GeneratorFamily::Sbm => {
                let b = self.sbm_blocks.min(n);
                let blocks = (0..b).map(|i| n / b + usize::from(i < n % b)).collect();
                GeneratorSpec::planted_partition(blocks, self.sbm_p_in, self.sbm_p_out, seed)
            }
        }
    }

    /// The multiplex used by task `(family, n, repetition)` at layer
    /// probability `p`. Seeds do not depend on `p`, so raising `p` only adds
    /// arcs to each layer.
    pub fn multiplex_for(&self, family: GeneratorFamily, n: usize, layers: usize, repetition: usize, p: f64) -> Result<MultiplexNetwork> {
        let tag = family as u64;
        let base_seed = derive_seed(&[self.seed, 1, tag, n as u64, repetition as u64]);
        let layer_seed = derive_seed(&[self.seed, 2, tag, n as u64, repetition as u64]);
        let spec = MultiplexSpec::uniform(self.base_spec(family, n, base_seed), layers, p, layer_seed);
        generate_multiplex(&spec, layers)
    }
}

/// Mixes seed components with the SplitMix64 finalizer.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub generator: String,
    pub n: usize,
    pub layers: usize,
    pub p: f64,
    pub repetition: usize,
    pub multijaccard: f64,
    /// `reference~candidate` method names.
    pub comparison: String,
    /// Written-order sequence of the candidate.
    pub config: String,
    pub shift: usize,
    pub tau_w: Option<f64>,
    pub status: String,
}

pub const RANKING_COLUMNS: &str = "generator,n,layers,p,repetition,multijaccard,comparison,config,shift,tau_w,status";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub generator: String,
    pub n: usize,
    pub layers: usize,
    pub repetition: usize,
    pub halving: usize,
    pub tau: f64,
    pub l1_error: f64,
    pub error_over_tau: f64,
    pub inner_iterations: usize,
    pub status: String,
}

pub const CONVERGENCE_COLUMNS: &str =
    "generator,n,layers,repetition,halving,tau,l1_error,error_over_tau,inner_iterations,status";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExperimentRows {
    Ranking(Vec<RankingRow>),
    Convergence(Vec<ConvergenceRow>),
    CostTable(String),
}

/// Mean and 95% interval of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub generator: String,
    pub n: usize,
    pub comparison: String,
    pub config: String,
    pub p: f64,
    pub samples: usize,
    pub failures: usize,
    pub mean_multijaccard: f64,
    pub mean_tau_w: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub plan: ExperimentPlan,
    pub rows: ExperimentRows,
}

impl ExperimentOutput {
    /// CSV with a fixed column order. Without `deterministic` a leading
    /// comment line records the generation time.
    pub fn to_csv(&self, deterministic: bool) -> String {
        let mut out = String::new();
        if !deterministic {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(out, "# multirank {VERSION} generated_at={secs}");
        }
        match &self.rows {
            ExperimentRows::Ranking(rows) => {
                out.push_str(RANKING_COLUMNS);
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.generator,
                        r.n,
                        r.layers,
                        r.p,
                        r.repetition,
                        r.multijaccard,
                        r.comparison,
                        r.config,
                        r.shift,
                        r.tau_w.map(|t| t.to_string()).unwrap_or_default(),
                        csv_safe(&r.status)
                    );
                }
            }
            ExperimentRows::Convergence(rows) => {
                out.push_str(CONVERGENCE_COLUMNS);
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.generator,
                        r.n,
                        r.layers,
                        r.repetition,
                        r.halving,
                        r.tau,
                        r.l1_error,
                        r.error_over_tau,
                        r.inner_iterations,
                        csv_safe(&r.status)
                    );
                }
            }
            ExperimentRows::CostTable(csv) => out.push_str(csv),
        }
        out
    }

    /// Plan echo, version, row counts and per-point aggregates.
    pub fn summary(&self, deterministic: bool) -> serde_json::Value {
        let mut summary = serde_json::json!({
            "version": VERSION,
            "plan": self.plan,
        });
        match &self.rows {
            ExperimentRows::Ranking(rows) => {
                summary["rows"] = rows.len().into();
                summary["failures"] = rows.iter().filter(|r| r.tau_w.is_none()).count().into();
                summary["points"] = serde_json::to_value(summarize_ranking_rows(rows)).unwrap_or_default();
            }
            ExperimentRows::Convergence(rows) => {
                summary["rows"] = rows.len().into();
                summary["failures"] = rows.iter().filter(|r| r.status != "ok").count().into();
                summary["iterations"] = serde_json::to_value(summarize_iterations(rows)).unwrap_or_default();
            }
            ExperimentRows::CostTable(_) => {
                summary["rows"] = self.plan.node_sizes.len().into();
            }
        }
        if !deterministic {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            summary["generated_at"] = secs.into();
        }
        summary
    }
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n', '"'], ";")
}

/// Groups rows by (generator, n, comparison, config, p) in first-seen order.
pub fn summarize_ranking_rows(rows: &[RankingRow]) -> Vec<SweepPoint> {
    let mut keys: Vec<(String, usize, String, String, u64)> = Vec::new();
    let mut groups: Vec<Vec<&RankingRow>> = Vec::new();
    for r in rows {
        let key = (r.generator.clone(), r.n, r.comparison.clone(), r.config.clone(), r.p.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let first = g[0];
            let taus: Vec<f64> = g.iter().filter_map(|r| r.tau_w).collect();
            let mean_mj = g.iter().map(|r| r.multijaccard).sum::<f64>() / g.len() as f64;
            let mean_tau = (!taus.is_empty()).then(|| taus.iter().sum::<f64>() / taus.len() as f64);
            let ci = confidence_interval(&taus).ok();
            SweepPoint {
                generator: first.generator.clone(),
                n: first.n,
                comparison: first.comparison.clone(),
                config: first.config.clone(),
                p: first.p,
                samples: g.len(),
                failures: g.len() - taus.len(),
                mean_multijaccard: mean_mj,
                mean_tau_w: mean_tau,
                ci_lo: ci.map(|c| c.lo),
                ci_hi: ci.map(|c| c.hi),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub generator: String,
    pub n: usize,
    pub layers: usize,
    pub mean_total_iterations: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

fn summarize_iterations(rows: &[ConvergenceRow]) -> Vec<IterationSummary> {
    let mut keys: Vec<(String, usize, usize)> = Vec::new();
    let mut totals: Vec<Vec<(usize, usize)>> = Vec::new();
    for r in rows {
        let key = (r.generator.clone(), r.n, r.layers);
        let i = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                totals.push(Vec::new());
                keys.len() - 1
            }
        };
        match totals[i].iter_mut().find(|(rep, _)| *rep == r.repetition) {
            Some((_, t)) => *t += r.inner_iterations,
            None => totals[i].push((r.repetition, r.inner_iterations)),
        }
    }
    keys.into_iter()
        .zip(totals)
        .map(|((generator, n, layers), reps)| {
            let xs: Vec<f64> = reps.iter().map(|&(_, t)| t as f64).collect();
            let ci = confidence_interval(&xs).ok();
            IterationSummary {
                generator,
                n,
                layers,
                mean_total_iterations: xs.iter().sum::<f64>() / xs.len().max(1) as f64,
                ci_lo: ci.map(|c| c.lo),
                ci_hi: ci.map(|c| c.hi),
            }
        })
        .collect()
}

fn concat(vs: &[ScoreVector]) -> Vec<f64> {
    vs.iter().flat_map(|v| v.as_slice().iter().copied()).collect()
}

/// Weighted tau of two concatenated ranking lists after merging near ties.
pub fn compare_rankings(reference: &[ScoreVector], candidate: &[ScoreVector], plan: &ExperimentPlan) -> Result<f64> {
    let a = merge_near_ties(&concat(reference), plan.tie_tolerance);
    let b = merge_near_ties(&concat(candidate), plan.tie_tolerance);
    Ok(weighted_kendall_tau(&a, &b, plan.weight_scheme)?.tau_w)
}

struct Task {
    family: GeneratorFamily,
    n: usize,
    p: f64,
    repetition: usize,
}

fn ranking_tasks(plan: &ExperimentPlan) -> Vec<Task> {
    let mut tasks = Vec::new();
    for &family in &plan.generators {
        for &n in &plan.node_sizes {
            for p in plan.p_sweep.values() {
                for repetition in 0..plan.repetitions {
                    tasks.push(Task {
                        family,
                        n,
                        p,
                        repetition,
                    });
                }
            }
        }
    }
    tasks
}

fn error_status(e: &Error) -> String {
    match e {
        Error::NonConvergence { .. } => format!("nonconvergence: {e}"),
        _ => format!("error: {e}"),
    }
}

/// Reference and candidate methods of the compare-methods batch.
pub const METHOD_PAIRS: [(&str, PresetKind); 3] = [
    ("pagerank", PresetKind::PageRankLike),
    ("hits", PresetKind::HitsLike),
    ("eigenvector", PresetKind::VersatileLike),
];

fn native_reference(m: &MultiplexNetwork, name: &str, plan: &ExperimentPlan) -> Result<Vec<ScoreVector>> {
    let preset = |kind| BaselinePreset {
        kind,
        damping: plan.damping,
    };
    match name {
        "pagerank" => preset_rankings(m, preset(PresetKind::PageRank), &plan.settings),
        "hits" => preset_rankings(m, preset(PresetKind::Hits), &plan.settings),
        "eigenvector" => m
            .layers()
            .iter()
            .map(|a| classic_eigenvector(a, plan.settings.inner_tol.max(1e-14)))
            .collect(),
        other => Err(Error::invalid(format!("unknown reference method `{other}`"))),
    }
}

fn compare_methods_task(plan: &ExperimentPlan, task: &Task) -> Vec<RankingRow> {
    let row = |mj: f64, comparison: String, config: String, tau: Result<f64>| {
        let (tau_w, status) = match tau {
            Ok(t) => (Some(t), "ok".to_string()),
            Err(e) => (None, error_status(&e)),
        };
        RankingRow {
            generator: task.family.name().into(),
            n: task.n,
            layers: plan.layers,
            p: task.p,
            repetition: task.repetition,
            multijaccard: mj,
            comparison,
            config,
            shift: 0,
            tau_w,
            status,
        }
    };
    let m = match plan.multiplex_for(task.family, task.n, plan.layers, task.repetition, task.p) {
        Ok(m) => m,
        Err(e) => return vec![row(f64::NAN, "generate".into(), String::new(), Err(e))],
    };
    let mj = multijaccard(&m).unwrap_or(f64::NAN);
    METHOD_PAIRS
        .iter()
        .map(|&(reference, kind)| {
            let preset = BaselinePreset {
                kind,
                damping: plan.damping,
            };
            let config = crate::baselines::preset_configuration(preset, plan.layers)
                .map(|(_, sc)| sc.to_string())
                .unwrap_or_default();
            let tau = native_reference(&m, reference, plan).and_then(|r| {
                let c = preset_rankings(&m, preset, &plan.settings)?;
                compare_rankings(&r, &c, plan)
            });
            row(mj, format!("{reference}~{kind}"), config, tau)
        })
        .collect()
}

fn impact_task(plan: &ExperimentPlan, task: &Task, members: &[ShiftedConfiguration]) -> Vec<RankingRow> {
    let make = |mj: f64, sc: Option<&ShiftedConfiguration>, tau: Result<f64>| {
        let (tau_w, status) = match tau {
            Ok(t) => (Some(t), "ok".to_string()),
            Err(e) => (None, error_status(&e)),
        };
        RankingRow {
            generator: task.family.name().into(),
            n: task.n,
            layers: plan.layers,
            p: task.p,
            repetition: task.repetition,
            multijaccard: mj,
            comparison: sc.map(|s| format!("hits~{}", s.config())).unwrap_or_else(|| "generate".into()),
            config: sc.map(|s| s.to_string()).unwrap_or_default(),
            shift: sc.map(|s| s.shift()).unwrap_or(0),
            tau_w,
            status,
        }
    };
    let m = match plan.multiplex_for(task.family, task.n, plan.layers, task.repetition, task.p) {
        Ok(m) => m,
        Err(e) => return vec![make(f64::NAN, None, Err(e))],
    };
    let mj = multijaccard(&m).unwrap_or(f64::NAN);
    let reference = native_reference(&m, "hits", plan);
    members
        .iter()
        .map(|sc| {
            let tau = match &reference {
                Ok(r) => solve(&m, sc, &plan.settings).and_then(|rep| compare_rankings(r, &rep.rankings, plan)),
                Err(e) => Err(Error::UndefinedMeasure(format!("HITS reference failed: {e}"))),
            };
            make(mj, Some(sc), tau)
        })
        .collect()
}

/// Every member of every full-length repetition-free configuration, grouped
/// by configuration (`config-impact`) or by shift (`shift-impact`).
pub fn impact_members(layers: usize, by_shift: bool) -> Result<Vec<ShiftedConfiguration>> {
    let configs = enumerate_configs_with_length(layers, 2 * layers)?;
    let k = 2 * layers;
    let mut out = Vec::with_capacity(configs.len() * k);
    if by_shift {
        for h in 0..k {
            for c in &configs {
                out.push(c.shifted(h)?);
            }
        }
    } else {
        for c in &configs {
            for h in 0..k {
                out.push(c.shifted(h)?);
            }
        }
    }
    Ok(out)
}

fn convergence_task(plan: &ExperimentPlan, family: GeneratorFamily, n: usize, layers: usize, repetition: usize) -> Vec<ConvergenceRow> {
    let failure = |status: String| ConvergenceRow {
        generator: family.name().into(),
        n,
        layers,
        repetition,
        halving: 0,
        tau: f64::NAN,
        l1_error: f64::NAN,
        error_over_tau: f64::NAN,
        inner_iterations: 0,
        status,
    };
    let result = plan
        .multiplex_for(family, n, layers, repetition, plan.convergence_layer_p)
        .and_then(|m| {
            let (_, sc) = crate::baselines::preset_configuration(BaselinePreset::new(PresetKind::HitsLike), layers)?;
            convergence_probe(&m, &sc, &plan.settings, plan.extra_halvings)
        });
    match result {
        Ok(trace) => {
            let last = trace.points.len().saturating_sub(1);
            trace.points[..last]
                .iter()
                .map(|p| ConvergenceRow {
                    generator: family.name().into(),
                    n,
                    layers,
                    repetition,
                    halving: p.halving,
                    tau: p.tau,
                    l1_error: p.error,
                    error_over_tau: p.error_over_tau(),
                    inner_iterations: p.inner_iterations,
                    status: "ok".into(),
                })
                .collect()
        }
        Err(e) => vec![failure(error_status(&e))],
    }
}

/// Runs a plan on the current rayon pool.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    plan.validate()?;
    let rows = match plan.batch {
        Batch::CostTable => {
            let ns: Vec<u64> = plan.node_sizes.iter().map(|&n| n as u64).collect();
            ExperimentRows::CostTable(cost_table_csv(&ns, plan.layers as u64)?)
        }
        Batch::CompareMethods => {
            let tasks = ranking_tasks(plan);
            let rows: Vec<Vec<RankingRow>> = tasks.par_iter().map(|t| compare_methods_task(plan, t)).collect();
            ExperimentRows::Ranking(rows.into_iter().flatten().collect())
        }
        Batch::ConfigImpact | Batch::ShiftImpact => {
            let members = impact_members(plan.layers, plan.batch == Batch::ShiftImpact)?;
            let tasks = ranking_tasks(plan);
            let rows: Vec<Vec<RankingRow>> = tasks.par_iter().map(|t| impact_task(plan, t, &members)).collect();
            ExperimentRows::Ranking(rows.into_iter().flatten().collect())
        }
        Batch::Convergence => {
            let layer_counts = if plan.layer_counts.is_empty() {
                vec![plan.layers]
            } else {
                plan.layer_counts.clone()
            };
            let mut tasks = Vec::new();
            for &family in &plan.generators {
                for &n in &plan.node_sizes {
                    for &l in &layer_counts {
                        for rep in 0..plan.repetitions {
                            tasks.push((family, n, l, rep));
                        }
                    }
                }
            }
            let rows: Vec<Vec<ConvergenceRow>> = tasks
                .par_iter()
                .map(|&(f, n, l, rep)| convergence_task(plan, f, n, l, rep))
                .collect();
            ExperimentRows::Convergence(rows.into_iter().flatten().collect())
        }
    };
    Ok(ExperimentOutput {
        plan: plan.clone(),
        rows,
    })
}
