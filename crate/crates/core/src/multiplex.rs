//! Layered directed weighted graphs: sparse layer matrices, the multiplex
//! container, score vectors, and the layered edge-list text format.
//!
//! A layer's out-link matrix `A` has `A[i][j] = w(i -> j) > 0` for every edge
//! and zero elsewhere. The in-link matrix `A^T` is never materialized; every
//! product takes a `transposed` flag instead.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` accepted for a [`ScoreVector`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Row-major dense square matrix. Only used for small-`n` explicit products
/// and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn add_to_diagonal(&mut self, value: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += value;
        }
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }
}

/// A square linear operator that can act on a vector either directly or
/// through its transpose. Layer matrices and transformed layers (such as the
/// PageRank transition matrix) both implement it, so configurations can be
/// evaluated over either.
pub trait LayerOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `op * x` (or `op^T * x`) into `out`. Both slices have length
    /// `dim()`.
    fn apply_into(&self, transposed: bool, x: &[f64], out: &mut [f64]);

    fn to_dense(&self, transposed: bool) -> DenseMatrix;

    /// Number of stored nonzeros plus any structured terms, used for cost
    /// accounting.
    fn nnz(&self) -> usize;
}

/// Nonnegative weighted adjacency matrix of one layer, compressed by rows and
/// by columns so both `A x` and `A^T x` are row-gather loops with a fixed
/// reduction order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, weight)` triplets in any order.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut sorted: Vec<(usize, usize, f64)> = entries.into_iter().collect();
        for &(r, c, w) in &sorted {
            if r >= n || c >= n {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside a {n}x{n} matrix"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) has non-positive or non-finite weight {w}"
                )));
            }
        }
        sorted.sort_by_key(|e| (e.0, e.1));
        if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::invalid(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &sorted {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let row_cols = sorted.iter().map(|e| e.1).collect();
        let row_vals = sorted.iter().map(|e| e.2).collect();

        let mut by_col = sorted;
        by_col.sort_by_key(|e| (e.1, e.0));
        let mut col_ptr = vec![0usize; n + 1];
        for &(_, c, _) in &by_col {
            col_ptr[c + 1] += 1;
        }
        for i in 0..n {
            col_ptr[i + 1] += col_ptr[i];
        }
        let col_rows = by_col.iter().map(|e| e.0).collect();
        let col_vals = by_col.iter().map(|e| e.2).collect();

        Ok(SparseMatrix {
            n,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self::from_triplets(n, std::iter::empty()).expect("empty matrix is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_cols.len()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.row_cols[k], self.row_vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.row_cols[range.clone()].binary_search(&col) {
            Ok(k) => self.row_vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// `(src, dst)` pairs of the stored edges, ignoring weights.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.entries().map(|(r, c, _)| (r, c)).collect()
    }

    /// Sum of weights on each row (weighted out-degree).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row_vals[self.row_ptr[r]..self.row_ptr[r + 1]].iter().sum())
            .collect()
    }

    /// A copy with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_triplets(self.n, self.entries().map(|(r, c, w)| (r, c, w * factor)))
    }

    /// The transpose as a new stored matrix.
    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.n, self.entries().map(|(r, c, w)| (c, r, w)))
            .expect("transpose of a valid matrix is valid")
    }

    /// `A v` or `A^T v`, without normalization.
    pub fn matvec(&self, transposed: bool, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.apply_into(transposed, v, &mut out);
        Ok(out)
    }
}

impl LayerOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, transposed: bool, x: &[f64], out: &mut [f64]) {
        let (ptr, idx, vals) = if transposed {
            (&self.col_ptr, &self.col_rows, &self.col_vals)
        } else {
            (&self.row_ptr, &self.row_cols, &self.row_vals)
        };
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in ptr[i]..ptr[i + 1] {
                acc += vals[k] * x[idx[k]];
            }
            *o = acc;
        }
    }

    fn to_dense(&self, transposed: bool) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n);
        for (r, c, w) in self.entries() {
            if transposed {
                d.set(c, r, w);
            } else {
                d.set(r, c, w);
            }
        }
        d
    }

    fn nnz(&self) -> usize {
        self.row_cols.len()
    }
}

/// Nonnegative vector of length `n` whose entries sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    /// Validates an already normalized vector.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("score vector must be non-empty"));
        }
        if let Some(x) = values.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::invalid(format!("score vector entry {x} is not a finite nonnegative value")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!("score vector sums to {sum}, not 1")));
        }
        Ok(ScoreVector(values))
    }

    /// Divides by the L1 norm. Fails on a zero or invalid vector.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        let norm = l1_normalize(&mut values);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(format!("cannot normalize a vector with L1 norm {norm}")));
        }
        Self::new(values)
    }

    pub fn uniform(n: usize) -> Self {
        ScoreVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_distance(&self, other: &ScoreVector) -> f64 {
        l1_distance(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for ScoreVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ScoreVector::new(values)
    }
}

impl From<ScoreVector> for Vec<f64> {
    fn from(v: ScoreVector) -> Self {
        v.0
    }
}

/// Scales `v` to unit L1 norm in place and returns the norm before scaling.
/// All entries are assumed nonnegative. The sum is then renormalized once more
/// so the result sums to one within a few ulps.
pub(crate) fn l1_normalize(v: &mut [f64]) -> f64 {
    let norm: f64 = v.iter().map(|x| x.abs()).sum();
    if norm > 0.0 && norm.is_finite() {
        let inv = 1.0 / norm;
        v.iter_mut().for_each(|x| *x *= inv);
        let s: f64 = v.iter().sum();
        if s != 1.0 {
            v.iter_mut().for_each(|x| *x /= s);
        }
    }
    norm
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Advisory connectivity report for the union of all layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperpositionDiagnostic {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of the union graph; only defined when it is strongly connected.
    pub period: Option<usize>,
}

/// A set of shared vertices and an ordered list of directed layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexNetwork {
    n: usize,
    layers: Vec<SparseMatrix>,
    /// External vertex id of each internal index, strictly increasing.
    ids: Vec<u64>,
}

impl MultiplexNetwork {
    /// Multiplex over vertices `0..n` with identity id map.
    pub fn new(n: usize, layers: Vec<SparseMatrix>) -> Result<Self> {
        Self::with_ids((0..n as u64).collect(), layers)
    }

    fn with_ids(ids: Vec<u64>, layers: Vec<SparseMatrix>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::invalid("a multiplex needs at least one vertex"));
        }
        if layers.is_empty() {
            return Err(Error::invalid("a multiplex needs at least one layer"));
        }
        if let Some(bad) = layers.iter().find(|l| l.n() != n) {
            return Err(Error::Dimension {
                expected: n,
                actual: bad.n(),
            });
        }
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Ok(MultiplexNetwork { n, layers, ids })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SparseMatrix] {
        &self.layers
    }

    pub fn layer(&self, index: usize) -> Result<&SparseMatrix> {
        self.layers.get(index).ok_or(Error::LayerOutOfRange {
            layer: index,
            layers: self.layers.len(),
        })
    }

    /// External vertex ids, indexed by internal vertex index.
    pub fn vertex_ids(&self) -> &[u64] {
        &self.ids
    }

    /// The same vertex set with a different list of layers.
    pub fn with_layers(&self, layers: Vec<SparseMatrix>) -> Result<Self> {
        Self::with_ids(self.ids.clone(), layers)
    }

    /// Parses the layered edge-list format.
    ///
    /// One edge per line as `<layer> <src> <dst> <weight>`. `#` starts a
    /// comment. Two optional headers may precede the edges: `nodes <n>`
    /// declares vertex ids `0..n` (isolates included) and `layers <L>`
    /// declares the layer count, which allows layers with no edges. Without a
    /// `layers` header every layer id below the largest one must carry at
    /// least one edge.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared_nodes: Option<u64> = None;
        let mut declared_layers: Option<usize> = None;
        let mut edges: Vec<(usize, usize, u64, u64, f64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "nodes" | "layers" => {
                    if !edges.is_empty() {
                        return Err(Error::parse(line_no, "headers must precede edge lines"));
                    }
                    if fields.len() != 2 {
                        return Err(Error::parse(line_no, format!("expected `{} <count>`", fields[0])));
                    }
                    let count: u64 = fields[1]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid count `{}`", fields[1])))?;
                    let slot = if fields[0] == "nodes" {
                        declared_nodes.replace(count).is_some()
                    } else {
                        declared_layers.replace(count as usize).is_some()
                    };
                    if slot {
                        return Err(Error::parse(line_no, format!("duplicate `{}` header", fields[0])));
                    }
                }
                _ => {
                    if fields.len() != 4 {
                        return Err(Error::parse(
                            line_no,
                            format!("expected `<layer> <src> <dst> <weight>`, found {} field(s)", fields.len()),
                        ));
                    }
                    let layer: usize = fields[0]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid layer id `{}`", fields[0])))?;
                    let src: u64 = fields[1]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid vertex id `{}`", fields[1])))?;
                    let dst: u64 = fields[2]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid vertex id `{}`", fields[2])))?;
                    let weight: f64 = fields[3]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid weight `{}`", fields[3])))?;
                    if !(weight > 0.0 && weight.is_finite()) {
                        return Err(Error::parse(line_no, format!("weight must be positive, found {weight}")));
                    }
                    edges.push((line_no, layer, src, dst, weight));
                }
            }
        }

        let max_layer = edges.iter().map(|e| e.1).max();
        let layer_count = match (declared_layers, max_layer) {
            (Some(l), Some(m)) if m >= l => {
                let line = edges.iter().find(|e| e.1 == m).map(|e| e.0).unwrap_or(0);
                return Err(Error::parse(line, format!("layer {m} exceeds declared layer count {l}")));
            }
            (Some(l), _) => l,
            (None, Some(m)) => {
                let present: BTreeSet<usize> = edges.iter().map(|e| e.1).collect();
                if let Some(gap) = (0..=m).find(|l| !present.contains(l)) {
                    return Err(Error::parse(
                        0,
                        format!("layer id gap: layer {gap} has no edges and no `layers` header declares it"),
                    ));
                }
                m + 1
            }
            (None, None) => 0,
        };
        if layer_count == 0 {
            return Err(Error::parse(0, "no layers: add edges or a `layers <L>` header"));
        }

        let mut id_set: BTreeSet<u64> = (0..declared_nodes.unwrap_or(0)).collect();
        for e in &edges {
            id_set.insert(e.2);
            id_set.insert(e.3);
        }
        let ids: Vec<u64> = id_set.into_iter().collect();
        let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let n = ids.len();

        let mut per_layer: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); layer_count];
        let mut seen: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        for &(line_no, layer, src, dst, w) in &edges {
            let (s, d) = (index[&src], index[&dst]);
            if let Some(first) = seen.insert((layer, s, d), line_no) {
                return Err(Error::parse(
                    line_no,
                    format!("duplicate edge {src} -> {dst} in layer {layer} (first on line {first})"),
                ));
            }
            per_layer[layer].push((s, d, w));
        }
        let layers = per_layer
            .into_iter()
            .map(|entries| SparseMatrix::from_triplets(n, entries))
            .collect::<Result<Vec<_>>>()?;
        Self::with_ids(ids, layers)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text form: `nodes` header (longest prefix `0..k` of the id
    /// set), `layers` header, then edges sorted by layer, source and target.
    /// Parsing the output yields an equal multiplex, and re-serializing it
    /// yields the same bytes.
    pub fn to_edge_list(&self) -> String {
        let prefix = self
            .ids
            .iter()
            .enumerate()
            .take_while(|(i, &id)| id == *i as u64)
            .count();
        let mut out = String::new();
        let _ = writeln!(out, "nodes {prefix}");
        let _ = writeln!(out, "layers {}", self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            for (r, c, w) in layer.entries() {
                let _ = writeln!(out, "{l} {} {} {w}", self.ids[r], self.ids[c]);
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    /// Strong connectivity and period of `G = (V, union of all E_l)`.
    pub fn superposition_check(&self) -> SuperpositionDiagnostic {
        let n = self.n;
        let mut union: BTreeSet<(usize, usize)> = BTreeSet::new();
        for layer in &self.layers {
            union.extend(layer.entries().map(|(r, c, _)| (r, c)));
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &union {
            out_adj[u].push(v);
            in_adj[v].push(u);
        }

        let forward = bfs_levels(&out_adj, 0);
        let backward = bfs_levels(&in_adj, 0);
        let irreducible = forward.iter().all(Option::is_some) && backward.iter().all(Option::is_some);
        if !irreducible {
            return SuperpositionDiagnostic {
                irreducible: false,
                aperiodic: false,
                period: None,
            };
        }
        // For a strongly connected graph the period is the gcd of
        // level(u) + 1 - level(v) over all edges u -> v.
        let mut period = 0usize;
        for &(u, v) in &union {
            let lu = forward[u].unwrap() as i64;
            let lv = forward[v].unwrap() as i64;
            period = gcd(period, (lu + 1 - lv).unsigned_abs() as usize);
        }
        SuperpositionDiagnostic {
            irreducible: true,
            aperiodic: period == 1,
            period: Some(period),
        }
    }
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
