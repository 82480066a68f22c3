//! Single-layer PageRank and HITS, their expression as configurations, and
//! the multiplex presets built from them.
//!
//! HITS is normalized in L1 at each half-step rather than L2; only the scale
//! of the vectors changes, not the rankings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::configurations::{Atom, ShiftedConfiguration};
use crate::engine::{solve_operators, SolveReport, SolverSettings};
use crate::error::{Error, Result};
use crate::multiplex::{l1_distance, l1_normalize, DenseMatrix, LayerOperator, MultiplexNetwork, ScoreVector, SparseMatrix};

pub const DEFAULT_DAMPING: f64 = 0.85;
const MAX_BASELINE_ITERS: usize = 1_000_000;

/// PageRank transition operator
/// `G = d P + d (1/n) 1 δ^T + (1 - d)(1/n) 1 1^T`, where `P[j][i] =
/// w(i -> j) / out(i)` and `δ` marks dangling vertices. Stored as the sparse
/// `P` plus the dangling set so products cost `O(nnz + n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoogleMatrix {
    transition: SparseMatrix,
    dangling: Vec<bool>,
    damping: f64,
}

impl GoogleMatrix {
    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn dangling(&self) -> &[bool] {
        &self.dangling
    }

    pub fn transition(&self) -> &SparseMatrix {
        &self.transition
    }
}

pub fn google_matrix(a: &SparseMatrix, damping: f64) -> Result<GoogleMatrix> {
    if a.n() == 0 {
        return Err(Error::invalid("PageRank transformation of an empty graph"));
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::invalid(format!("damping must lie in (0, 1), got {damping}")));
    }
    let out = a.row_sums();
    let transition = SparseMatrix::from_triplets(a.n(), a.entries().map(|(i, j, w)| (j, i, w / out[i])))?;
    let dangling = out.iter().map(|&s| s == 0.0).collect();
    Ok(GoogleMatrix {
        transition,
        dangling,
        damping,
    })
}

impl LayerOperator for GoogleMatrix {
    fn dim(&self) -> usize {
        self.transition.n()
    }

    fn apply_into(&self, transposed: bool, x: &[f64], out: &mut [f64]) {
        let n = self.dim() as f64;
        let d = self.damping;
        let total: f64 = x.iter().sum();
        self.transition.apply_into(transposed, x, out);
        if transposed {
            let teleport = (1.0 - d) * total / n;
            let dangling_share = d * total / n;
            for ((o, &is_dangling), _) in out.iter_mut().zip(&self.dangling).zip(x) {
                *o = d * *o + teleport + if is_dangling { dangling_share } else { 0.0 };
            }
        } else {
            let dangling_mass: f64 = x.iter().zip(&self.dangling).filter(|(_, &dg)| dg).map(|(v, _)| v).sum();
            let shift = d * dangling_mass / n + (1.0 - d) * total / n;
            for o in out.iter_mut() {
                *o = d * *o + shift;
            }
        }
    }

    fn to_dense(&self, transposed: bool) -> DenseMatrix {
        let n = self.dim();
        let nf = n as f64;
        let d = self.damping;
        let p = self.transition.to_dense(false);
        let mut g = DenseMatrix::zeros(n);
        for row in 0..n {
            for col in 0..n {
                let dangling = if self.dangling[col] { d / nf } else { 0.0 };
                let v = d * p.get(row, col) + dangling + (1.0 - d) / nf;
                if transposed {
                    g.set(col, row, v);
                } else {
                    g.set(row, col, v);
                }
            }
        }
        g
    }

    fn nnz(&self) -> usize {
        self.transition.nnz() + self.dim()
    }
}

/// Power iteration `p <- G p` from the uniform vector.
pub fn classic_pagerank(a: &SparseMatrix, damping: f64, tol: f64) -> Result<ScoreVector> {
    let g = google_matrix(a, damping)?;
    let n = a.n();
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_BASELINE_ITERS {
        g.apply_into(false, &p, &mut next);
        l1_normalize(&mut next);
        let delta = l1_distance(&p, &next);
        std::mem::swap(&mut p, &mut next);
        if delta <= tol {
            return ScoreVector::new(p);
        }
    }
    Err(cap_error("PageRank"))
}

/// Alternating `a <- A^T h`, `h <- A a` from a uniform hub vector. Returns
/// `(authority, hub)`.
pub fn classic_hits(a: &SparseMatrix, tol: f64) -> Result<(ScoreVector, ScoreVector)> {
    let n = a.n();
    if n == 0 {
        return Err(Error::invalid("HITS on an empty graph"));
    }
    let mut hub = vec![1.0 / n as f64; n];
    let mut auth = vec![0.0; n];
    let mut next_auth = vec![0.0; n];
    let mut next_hub = vec![0.0; n];
    for _ in 0..MAX_BASELINE_ITERS {
        a.apply_into(true, &hub, &mut next_auth);
        if l1_normalize(&mut next_auth) == 0.0 {
            return Err(Error::UndefinedMeasure("HITS authority vector vanished".into()));
        }
        a.apply_into(false, &next_auth, &mut next_hub);
        if l1_normalize(&mut next_hub) == 0.0 {
            return Err(Error::UndefinedMeasure("HITS hub vector vanished".into()));
        }
        let delta = l1_distance(&auth, &next_auth) + l1_distance(&hub, &next_hub);
        std::mem::swap(&mut auth, &mut next_auth);
        std::mem::swap(&mut hub, &mut next_hub);
        if delta <= tol {
            return Ok((ScoreVector::new(auth)?, ScoreVector::new(hub)?));
        }
    }
    Err(cap_error("HITS"))
}

/// Eigenvector centrality `r ∝ A r`, iterated on `A + I` so periodic graphs
/// still converge. Used as the per-layer reference for the Versatile-like
/// preset, which shares its orientation.
pub fn classic_eigenvector(a: &SparseMatrix, tol: f64) -> Result<ScoreVector> {
    let n = a.n();
    if n == 0 {
        return Err(Error::invalid("eigenvector centrality on an empty graph"));
    }
    let mut r = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_BASELINE_ITERS {
        a.apply_into(false, &r, &mut next);
        for (x, y) in next.iter_mut().zip(&r) {
            *x += y;
        }
        l1_normalize(&mut next);
        let delta = l1_distance(&r, &next);
        std::mem::swap(&mut r, &mut next);
        if delta <= tol {
            return ScoreVector::new(r);
        }
    }
    Err(cap_error("eigenvector centrality"))
}

fn cap_error(method: &str) -> Error {
    Error::NonConvergence {
        halvings: 0,
        reason: format!("{method} did not converge within {MAX_BASELINE_ITERS} iterations"),
        trace: Vec::new(),
    }
}

/// PageRank as the one-node self-loop ring `[G]`.
pub fn framework_pagerank(a: &SparseMatrix, damping: f64, settings: &SolverSettings) -> Result<ScoreVector> {
    let g = google_matrix(a, damping)?;
    let sc = ShiftedConfiguration::from_sequence(&[Atom::plain(0)])?;
    let mut report = solve_operators(std::slice::from_ref(&g), &sc, settings)?;
    Ok(report.rankings.swap_remove(0))
}

/// HITS as the two-node ring `a ∝ A^T h`, `h ∝ A a`, i.e. the sequence
/// `A0T A0`. Returns `(authority, hub)`.
pub fn framework_hits(a: &SparseMatrix, settings: &SolverSettings) -> Result<(ScoreVector, ScoreVector)> {
    let sc = ShiftedConfiguration::from_sequence(&[Atom::transpose(0), Atom::plain(0)])?;
    let report = solve_operators(std::slice::from_ref(a), &sc, settings)?;
    let mut it = report.rankings.into_iter();
    let auth = it.next().expect("two rankings");
    let hub = it.next().expect("two rankings");
    Ok((auth, hub))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    #[serde(rename = "pagerank")]
    PageRank,
    Hits,
    #[serde(rename = "pagerank-like")]
    PageRankLike,
    HitsLike,
    VersatileLike,
}

impl PresetKind {
    pub const ALL: [PresetKind; 5] = [
        PresetKind::PageRank,
        PresetKind::Hits,
        PresetKind::PageRankLike,
        PresetKind::HitsLike,
        PresetKind::VersatileLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::PageRank => "pagerank",
            PresetKind::Hits => "hits",
            PresetKind::PageRankLike => "pagerank-like",
            PresetKind::HitsLike => "hits-like",
            PresetKind::VersatileLike => "versatile-like",
        }
    }

    pub fn is_native(self) -> bool {
        matches!(self, PresetKind::PageRank | PresetKind::Hits)
    }

    pub fn uses_damping(self) -> bool {
        matches!(self, PresetKind::PageRank | PresetKind::PageRankLike)
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePreset {
    pub kind: PresetKind,
    pub damping: f64,
}

impl BaselinePreset {
    pub fn new(kind: PresetKind) -> Self {
        BaselinePreset {
            kind,
            damping: DEFAULT_DAMPING,
        }
    }
}

/// Which matrices a preset's configuration is evaluated over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PresetMatrices {
    Raw,
    Google { damping: f64 },
}

/// The configuration and matrix transformation behind each preset.
///
/// The native kinds return their single-layer ring over layer 0; the
/// multiplex kinds span all `layers`:
/// * `pagerank-like`: Google-transformed layers, `A0 A1 ... A{L-1}`
/// * `hits-like`: raw layers, `A0T A0 A1T A1 ... A{L-1}T A{L-1}`
/// * `versatile-like`: raw layers, `A0 A1 ... A{L-1}`
pub fn preset_configuration(preset: BaselinePreset, layers: usize) -> Result<(PresetMatrices, ShiftedConfiguration)> {
    if layers == 0 {
        return Err(Error::invalid("presets need at least one layer"));
    }
    let google = PresetMatrices::Google {
        damping: preset.damping,
    };
    let (matrices, seq): (PresetMatrices, Vec<Atom>) = match preset.kind {
        PresetKind::PageRank => (google, vec![Atom::plain(0)]),
        PresetKind::Hits => (PresetMatrices::Raw, vec![Atom::transpose(0), Atom::plain(0)]),
        PresetKind::PageRankLike => (google, (0..layers).map(Atom::plain).collect()),
        PresetKind::HitsLike => (
            PresetMatrices::Raw,
            (0..layers).flat_map(|l| [Atom::transpose(l), Atom::plain(l)]).collect(),
        ),
        PresetKind::VersatileLike => (PresetMatrices::Raw, (0..layers).map(Atom::plain).collect()),
    };
    Ok((matrices, ShiftedConfiguration::from_sequence(&seq)?))
}

/// Solves a configuration over the layers of `m` after applying the given
/// matrix transformation.
pub fn solve_with_matrices(
    m: &MultiplexNetwork,
    matrices: PresetMatrices,
    sc: &ShiftedConfiguration,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    match matrices {
        PresetMatrices::Raw => solve_operators(m.layers(), sc, settings),
        PresetMatrices::Google { damping } => {
            let google = m
                .layers()
                .iter()
                .map(|a| google_matrix(a, damping))
                .collect::<Result<Vec<_>>>()?;
            solve_operators(&google, sc, settings)
        }
    }
}

/// Rankings a preset produces on `m`, in comparison order.
///
/// Native kinds run on every layer: PageRank yields one vector per layer and
/// HITS yields authority then hub for each layer. Multiplex kinds yield the
/// ring `r_0 ... r_{k-1}` of their configuration.
pub fn preset_rankings(m: &MultiplexNetwork, preset: BaselinePreset, settings: &SolverSettings) -> Result<Vec<ScoreVector>> {
    let tol = settings.inner_tol.max(1e-14);
    match preset.kind {
        PresetKind::PageRank => m
            .layers()
            .iter()
            .map(|a| classic_pagerank(a, preset.damping, tol))
            .collect(),
        PresetKind::Hits => {
            let mut out = Vec::with_capacity(2 * m.layer_count());
            for a in m.layers() {
                let (auth, hub) = classic_hits(a, tol)?;
                out.push(auth);
                out.push(hub);
            }
            Ok(out)
        }
        _ => {
            let (matrices, sc) = preset_configuration(preset, m.layer_count())?;
            Ok(solve_with_matrices(m, matrices, &sc, settings)?.rankings)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_sums(g: &DenseMatrix) -> Vec<f64> {
        (0..g.dim()).map(|c| (0..g.dim()).map(|r| g.get(r, c)).sum()).collect()
    }

    #[test]
    fn two_cycle_google_is_stochastic() {
        let a = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let g = google_matrix(&a, 0.85).unwrap();
        for s in column_sums(&g.to_dense(false)) {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dangling_column_becomes_uniform() {
        let a = SparseMatrix::from_triplets(3, [(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        let g = google_matrix(&a, 0.85).unwrap();
        let dense = g.to_dense(false);
        for r in 0..3 {
            assert!((dense.get(r, 2) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(g.dangling(), &[false, false, true]);
    }

    #[test]
    fn sparse_and_dense_google_agree() {
        let a = SparseMatrix::from_triplets(4, [(0, 1, 1.0), (0, 2, 3.0), (2, 3, 1.0), (3, 0, 0.5)]).unwrap();
        let g = google_matrix(&a, 0.7).unwrap();
        let x = [0.1, 0.4, 0.2, 0.3];
        for transposed in [false, true] {
            let mut out = vec![0.0; 4];
            g.apply_into(transposed, &x, &mut out);
            let dense = g.to_dense(transposed).matvec(&x);
            for (a, b) in out.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn google_rejects_bad_input() {
        assert!(google_matrix(&SparseMatrix::empty(0), 0.85).is_err());
        assert!(google_matrix(&SparseMatrix::empty(2), 1.0).is_err());
    }

    #[test]
    fn pagerank_on_cycle_is_uniform() {
        let k = 5;
        let a = SparseMatrix::from_triplets(k, (0..k).map(|i| (i, (i + 1) % k, 1.0))).unwrap();
        let pr = classic_pagerank(&a, 0.85, 1e-14).unwrap();
        for &x in pr.as_slice() {
            assert!((x - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn star_authority_and_hub() {
        // Leaves 1..=4 all point to the center 0.
        let a = SparseMatrix::from_triplets(5, (1..5).map(|i| (i, 0, 1.0))).unwrap();
        let (auth, hub) = classic_hits(&a, 1e-14).unwrap();
        assert!((auth.as_slice()[0] - 1.0).abs() < 1e-12);
        assert_eq!(hub.as_slice()[0], 0.0);
        for &h in &hub.as_slice()[1..] {
            assert!((h - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn hits_on_empty_graph_is_undefined() {
        assert!(matches!(classic_hits(&SparseMatrix::empty(3), 1e-12), Err(Error::UndefinedMeasure(_))));
    }

    #[test]
    fn preset_sequences() {
        let hits_like = preset_configuration(BaselinePreset::new(PresetKind::HitsLike), 2).unwrap();
        assert_eq!(hits_like.0, PresetMatrices::Raw);
        assert_eq!(hits_like.1.to_string(), "A0T A0 A1T A1");
        let pr_like = preset_configuration(BaselinePreset::new(PresetKind::PageRankLike), 2).unwrap();
        assert_eq!(pr_like.0, PresetMatrices::Google { damping: 0.85 });
        assert_eq!(pr_like.1.to_string(), "A0 A1");
        let v_like = preset_configuration(BaselinePreset::new(PresetKind::VersatileLike), 1).unwrap();
        assert_eq!(v_like.0, PresetMatrices::Raw);
        assert_eq!(v_like.1.to_string(), "A0");
    }

    #[test]
    fn preset_names_round_trip() {
        for kind in PresetKind::ALL {
            assert_eq!(kind.name().parse::<PresetKind>().unwrap(), kind);
        }
        assert!("versatile".parse::<PresetKind>().is_err());
    }
}
