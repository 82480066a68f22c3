//! Perturbed power iteration over a configuration.
//!
//! For the written-order sequence `M_0 M_1 ... M_{k-1}` the solver looks for
//! the nonnegative normalized fixed point of
//! `M(tau) = (M_0 + tau I)(M_1 + tau I) ... (M_{k-1} + tau I)`.
//! For `tau > 0` the perturbed product is irreducible and aperiodic even when
//! the layers are sparse or `M(0)` vanishes, so plain power iteration
//! converges. The outer loop halves `tau`, warm-starting each stage from the
//! previous fixed point, until two consecutive stages agree; the last vector
//! approximates `v(0) = lim_{tau -> 0+} v(tau)`. The remaining rankings of
//! the ring are then recovered by stepping `r_{s-1} ∝ M_{s-1}(tau) r_s`.

use serde::{Deserialize, Serialize};

use crate::configurations::ShiftedConfiguration;
use crate::error::{Error, Result};
use crate::multiplex::{l1_distance, l1_normalize, DenseMatrix, LayerOperator, MultiplexNetwork, ScoreVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Apply each factor in turn: `k (nnz + n)` work per iteration.
    #[default]
    MatvecChain,
    /// Form the dense product once per `tau` stage, then multiply by it.
    ExplicitProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tau0: f64,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_inner_iters: usize,
    pub max_outer_halvings: usize,
    pub eval_mode: EvalMode,
    /// Factor applied to `tau` between stages. Any value in (0, 1) works.
    pub halving_factor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tau0: 0.5,
            inner_tol: 1e-13,
            outer_tol: 1e-10,
            max_inner_iters: 100_000,
            max_outer_halvings: 60,
            eval_mode: EvalMode::MatvecChain,
            halving_factor: 0.5,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0 < 1.0) {
            return Err(Error::invalid(format!("tau0 must lie in (0, 1), got {}", self.tau0)));
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_inner_iters == 0 || self.max_outer_halvings == 0 {
            return Err(Error::invalid("iteration caps must be at least 1"));
        }
        if !(self.halving_factor > 0.0 && self.halving_factor < 1.0) {
            return Err(Error::invalid(format!(
                "halving factor must lie in (0, 1), got {}",
                self.halving_factor
            )));
        }
        Ok(())
    }
}

/// One `tau` stage of the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Number of halvings applied to `tau0` before this stage.
    pub halving: usize,
    pub tau: f64,
    pub inner_iterations: usize,
    /// L1 distance to the previous stage's fixed point; absent for stage 0.
    pub l1_delta_vs_previous: Option<f64>,
    /// `||M(tau) r||_1` at the fixed point, i.e. the principal eigenvalue.
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Written-order sequence that was solved.
    pub sequence: String,
    /// `r_0 ... r_{k-1}`.
    pub rankings: Vec<ScoreVector>,
    pub final_tau: f64,
    pub per_tau_trace: Vec<StageRecord>,
    pub principal_eigenvalue_estimate: f64,
}

impl SolveReport {
    pub fn total_inner_iterations(&self) -> usize {
        self.per_tau_trace.iter().map(|s| s.inner_iterations).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A factor of the chain: an operator and whether it acts transposed.
pub type Factor<'a> = (&'a dyn LayerOperator, bool);

fn check_chain(seq: &[Factor<'_>]) -> Result<usize> {
    let (first, _) = seq
        .first()
        .ok_or_else(|| Error::invalid("a chain needs at least one factor"))?;
    let n = first.dim();
    if let Some((bad, _)) = seq.iter().find(|(op, _)| op.dim() != n) {
        return Err(Error::Dimension {
            expected: n,
            actual: bad.dim(),
        });
    }
    Ok(n)
}

/// `M(tau) v` evaluated right to left, `v <- M_s v + tau v` for
/// `s = k-1, ..., 0`.
pub fn apply_perturbed_chain(seq: &[Factor<'_>], tau: f64, v: &[f64]) -> Result<Vec<f64>> {
    let n = check_chain(seq)?;
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: v.len(),
        });
    }
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be nonnegative, got {tau}")));
    }
    let mut x = v.to_vec();
    let mut scratch = vec![0.0; n];
    chain_into(seq, tau, &mut x, &mut scratch);
    Ok(x)
}

fn chain_into(seq: &[Factor<'_>], tau: f64, x: &mut Vec<f64>, scratch: &mut Vec<f64>) {
    for &(op, transposed) in seq.iter().rev() {
        op.apply_into(transposed, x, scratch);
        for (s, xi) in scratch.iter_mut().zip(x.iter()) {
            *s += tau * xi;
        }
        std::mem::swap(x, scratch);
    }
}

/// Dense `M(tau)`.
pub fn explicit_product(seq: &[Factor<'_>], tau: f64) -> Result<DenseMatrix> {
    let n = check_chain(seq)?;
    let mut product = DenseMatrix::identity(n);
    for &(op, transposed) in seq {
        let mut factor = op.to_dense(transposed);
        factor.add_to_diagonal(tau);
        product = product.matmul(&factor);
    }
    Ok(product)
}

/// `M(tau) v` in the requested mode.
pub fn apply_perturbed_chain_with_mode(seq: &[Factor<'_>], tau: f64, v: &[f64], mode: EvalMode) -> Result<Vec<f64>> {
    match mode {
        EvalMode::MatvecChain => apply_perturbed_chain(seq, tau, v),
        EvalMode::ExplicitProduct => {
            let p = explicit_product(seq, tau)?;
            if v.len() != p.dim() {
                return Err(Error::Dimension {
                    expected: p.dim(),
                    actual: v.len(),
                });
            }
            Ok(p.matvec(v))
        }
    }
}

/// Resolves the written-order sequence of `sc` to operators from `layers`.
pub fn resolve_chain<'a, L: LayerOperator>(layers: &'a [L], sc: &ShiftedConfiguration) -> Result<Vec<Factor<'a>>> {
    sc.sequence()
        .into_iter()
        .map(|atom| {
            layers
                .get(atom.layer)
                .map(|op| (op as &dyn LayerOperator, atom.transposed))
                .ok_or(Error::LayerOutOfRange {
                    layer: atom.layer,
                    layers: layers.len(),
                })
        })
        .collect()
}

struct StageOutcome {
    iterations: usize,
    eigenvalue: f64,
}

struct PowerIteration<'a> {
    chain: Vec<Factor<'a>>,
    n: usize,
    settings: SolverSettings,
    inner_tol: f64,
}

impl<'a> PowerIteration<'a> {
    fn new(chain: Vec<Factor<'a>>, settings: &SolverSettings) -> Result<Self> {
        settings.validate()?;
        let n = check_chain(&chain)?;
        // The L1 change of a normalized n-vector cannot be resolved much below
        // n ulps, so the inner tolerance is floored there.
        let inner_tol = settings.inner_tol.max(4.0 * n as f64 * f64::EPSILON);
        Ok(PowerIteration {
            chain,
            n,
            settings: settings.clone(),
            inner_tol,
        })
    }

    /// Iterates `r <- M(tau) r / ||M(tau) r||_1` from the given start until the
    /// L1 change drops to the inner tolerance.
    fn stage(&self, tau: f64, r: &mut Vec<f64>) -> std::result::Result<StageOutcome, String> {
        let dense = match self.settings.eval_mode {
            EvalMode::ExplicitProduct => Some(explicit_product(&self.chain, tau).map_err(|e| e.to_string())?),
            EvalMode::MatvecChain => None,
        };
        let mut next = vec![0.0; self.n];
        let mut scratch = vec![0.0; self.n];
        let mut last_delta = f64::INFINITY;
        for it in 1..=self.settings.max_inner_iters {
            match &dense {
                Some(p) => next = p.matvec(r),
                None => {
                    next.copy_from_slice(r);
                    chain_into(&self.chain, tau, &mut next, &mut scratch);
                }
            }
            let eigenvalue = l1_normalize(&mut next);
            if !(eigenvalue > 0.0 && eigenvalue.is_finite()) {
                return Err(format!("iterate collapsed to norm {eigenvalue} at tau = {tau}"));
            }
            last_delta = l1_distance(&next, r);
            std::mem::swap(r, &mut next);
            if last_delta <= self.inner_tol {
                return Ok(StageOutcome {
                    iterations: it,
                    eigenvalue,
                });
            }
        }
        Err(format!(
            "inner loop hit {} iterations at tau = {tau} (last change {last_delta:e})",
            self.settings.max_inner_iters
        ))
    }

    /// Runs stages with `tau` decreasing until two consecutive fixed points are
    /// within the outer tolerance, then `extra` further stages. Every stage's
    /// fixed point is passed to `keep`.
    fn run(
        &self,
        extra: usize,
        mut keep: impl FnMut(&StageRecord, &[f64]),
    ) -> Result<(Vec<f64>, f64, Vec<StageRecord>)> {
        let mut r = vec![1.0 / self.n as f64; self.n];
        let mut previous: Option<Vec<f64>> = None;
        let mut tau = self.settings.tau0;
        let mut trace = Vec::new();
        let mut converged_at: Option<usize> = None;

        for halving in 0..=self.settings.max_outer_halvings + extra {
            if converged_at.is_none() && halving > self.settings.max_outer_halvings {
                break;
            }
            let outcome = self.stage(tau, &mut r).map_err(|reason| {
                let internal = reason.starts_with("iterate collapsed");
                if internal {
                    Error::Internal(reason.clone())
                } else {
                    Error::NonConvergence {
                        halvings: halving,
                        reason: reason.clone(),
                        trace: trace.clone(),
                    }
                }
            })?;
            let delta = previous.as_ref().map(|p| l1_distance(p, &r));
            let record = StageRecord {
                halving,
                tau,
                inner_iterations: outcome.iterations,
                l1_delta_vs_previous: delta,
                eigenvalue: outcome.eigenvalue,
            };
            keep(&record, &r);
            trace.push(record);
            if converged_at.is_none() && delta.is_some_and(|d| d <= self.settings.outer_tol) {
                converged_at = Some(halving);
            }
            if let Some(at) = converged_at {
                if halving >= at + extra {
                    return Ok((r, tau, trace));
                }
            }
            previous = Some(r.clone());
            tau *= self.settings.halving_factor;
        }
        Err(Error::NonConvergence {
            halvings: self.settings.max_outer_halvings,
            reason: format!(
                "consecutive tau stages never came within {:e}",
                self.settings.outer_tol
            ),
            trace,
        })
    }
}

/// Solves a configuration over arbitrary layer operators.
pub fn solve_operators<L: LayerOperator>(
    layers: &[L],
    sc: &ShiftedConfiguration,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    let chain = resolve_chain(layers, sc)?;
    let solver = PowerIteration::new(chain, settings)?;
    let (r0, final_tau, trace) = solver.run(0, |_, _| {})?;
    let principal_eigenvalue_estimate = trace.last().map(|s| s.eigenvalue).unwrap_or(0.0);
    let r0 = ScoreVector::new(r0)?;
    let rankings = propagate_chain(&solver.chain, r0, final_tau)?;
    Ok(SolveReport {
        sequence: sc.to_string(),
        rankings,
        final_tau,
        per_tau_trace: trace,
        principal_eigenvalue_estimate,
    })
}

/// Solves a configuration over the raw layer matrices of `m`.
pub fn solve(m: &MultiplexNetwork, sc: &ShiftedConfiguration, settings: &SolverSettings) -> Result<SolveReport> {
    solve_operators(m.layers(), sc, settings)
}

fn propagate_chain(chain: &[Factor<'_>], r0: ScoreVector, tau: f64) -> Result<Vec<ScoreVector>> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("propagation needs tau > 0, got {tau}")));
    }
    let n = check_chain(chain)?;
    if r0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: r0.len(),
        });
    }
    let k = chain.len();
    let mut out: Vec<Option<ScoreVector>> = vec![None; k];
    let mut current = r0.as_slice().to_vec();
    out[0] = Some(r0);
    let mut scratch = vec![0.0; n];
    for s in (1..k).rev() {
        let (op, transposed) = chain[s];
        op.apply_into(transposed, &current, &mut scratch);
        for (o, c) in scratch.iter_mut().zip(&current) {
            *o += tau * c;
        }
        let norm = l1_normalize(&mut scratch);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Internal(format!("propagation collapsed at step {s}")));
        }
        current.copy_from_slice(&scratch);
        out[s] = Some(ScoreVector::new(current.clone())?);
    }
    Ok(out.into_iter().map(|v| v.expect("filled")).collect())
}

/// Recovers `r_{k-1}, ..., r_1` from `r_0` by one walk around the ring using
/// the perturbed factors at `tau_final`. Returns `[r_0, r_1, ..., r_{k-1}]`.
pub fn propagate_scores(
    m: &MultiplexNetwork,
    sc: &ShiftedConfiguration,
    r0: ScoreVector,
    tau_final: f64,
) -> Result<Vec<ScoreVector>> {
    let chain = resolve_chain(m.layers(), sc)?;
    propagate_chain(&chain, r0, tau_final)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub halving: usize,
    pub tau: f64,
    pub inner_iterations: usize,
    /// `||v(tau) - v(tau_min)||_1`.
    pub error: f64,
    pub vector: Vec<f64>,
}

impl ProbePoint {
    pub fn error_over_tau(&self) -> f64 {
        self.error / self.tau
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub points: Vec<ProbePoint>,
    /// Halving index at which the outer tolerance was first met.
    pub converged_at: usize,
}

impl ConvergenceTrace {
    pub fn tau_min(&self) -> f64 {
        self.points.last().map(|p| p.tau).unwrap_or(0.0)
    }
}

/// Runs the solver keeping every stage's fixed point, continuing
/// `extra_halvings` stages past outer convergence so the final vector is a
/// sharper stand-in for `v(0)`, and reports each stage's distance to it.
pub fn convergence_probe_operators<L: LayerOperator>(
    layers: &[L],
    sc: &ShiftedConfiguration,
    settings: &SolverSettings,
    extra_halvings: usize,
) -> Result<ConvergenceTrace> {
    let chain = resolve_chain(layers, sc)?;
    let solver = PowerIteration::new(chain, settings)?;
    let mut kept: Vec<(usize, f64, usize, Vec<f64>)> = Vec::new();
    let (last, _, trace) = solver.run(extra_halvings, |rec, v| {
        kept.push((rec.halving, rec.tau, rec.inner_iterations, v.to_vec()));
    })?;
    let converged_at = trace.len().saturating_sub(1 + extra_halvings);
    let points = kept
        .into_iter()
        .map(|(halving, tau, inner_iterations, vector)| ProbePoint {
            halving,
            tau,
            inner_iterations,
            error: l1_distance(&vector, &last),
            vector,
        })
        .collect();
    Ok(ConvergenceTrace { points, converged_at })
}

pub fn convergence_probe(
    m: &MultiplexNetwork,
    sc: &ShiftedConfiguration,
    settings: &SolverSettings,
    extra_halvings: usize,
) -> Result<ConvergenceTrace> {
    convergence_probe_operators(m.layers(), sc, settings, extra_halvings)
}
