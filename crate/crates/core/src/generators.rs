//! Seeded random graphs and the synthetic multiplex builder.
//!
//! Every random decision is read from a ChaCha8 stream at a fixed word
//! position, so a decision depends only on the seed, its stream tag and its
//! index. Adding layers or changing layer probabilities never reshuffles the
//! base graph.
//!
//! Base graphs draw each unordered pair `{i, j}`, `i < j`, once and emit both
//! arcs `i -> j` and `j -> i`; there are no self-loops. Layers then sample
//! base arcs individually, so layers are directed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplex::{MultiplexNetwork, SparseMatrix};

const BASE_STREAM: u64 = 0;
const EXCLUSIVE_STREAM: u64 = 1;
const LAYER_STREAM_OFFSET: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorKind {
    ErdosRenyi {
        n: usize,
        p: f64,
    },
    /// `blocks` partitions `0..n` into consecutive communities;
    /// `probabilities[a][b]` is the edge probability between blocks `a`, `b`.
    Sbm {
        blocks: Vec<usize>,
        probabilities: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::ErdosRenyi { n, p },
            seed,
        }
    }

    /// Two-level SBM with equal `p_in` on the diagonal and `p_out` elsewhere.
    pub fn planted_partition(blocks: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> Self {
        let r = blocks.len();
        let probabilities = (0..r)
            .map(|a| (0..r).map(|b| if a == b { p_in } else { p_out }).collect())
            .collect();
        GeneratorSpec {
            kind: GeneratorKind::Sbm { blocks, probabilities },
            seed,
        }
    }

    pub fn n(&self) -> usize {
        match &self.kind {
            GeneratorKind::ErdosRenyi { n, .. } => *n,
            GeneratorKind::Sbm { blocks, .. } => blocks.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        match &self.kind {
            GeneratorKind::ErdosRenyi { n, p } => {
                if *n == 0 {
                    return Err(Error::invalid("generator needs at least one vertex"));
                }
                if !prob_ok(*p) {
                    return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
                }
            }
            GeneratorKind::Sbm { blocks, probabilities } => {
                if blocks.is_empty() || blocks.iter().sum::<usize>() == 0 {
                    return Err(Error::invalid("SBM needs a non-empty partition"));
                }
                let r = blocks.len();
                if probabilities.len() != r || probabilities.iter().any(|row| row.len() != r) {
                    return Err(Error::invalid(format!("SBM probability matrix must be {r}x{r}")));
                }
                for (a, row) in probabilities.iter().enumerate() {
                    for (b, &p) in row.iter().enumerate() {
                        if !prob_ok(p) {
                            return Err(Error::invalid(format!("SBM probability {p} outside [0, 1]")));
                        }
                        if p != probabilities[b][a] {
                            return Err(Error::invalid("SBM probability matrix must be symmetric"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Uniform draws in `[0, 1)`; decision `i` of a stream reads word `2i`.
struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream(rng)
    }

    fn at(&mut self, index: u64) -> f64 {
        self.0.set_word_pos(2 * index as u128);
        let bits = self.0.next_u64();
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn generate_base(spec: &GeneratorSpec) -> Result<SparseMatrix> {
    spec.validate()?;
    let n = spec.n();
    let block_of: Vec<usize> = match &spec.kind {
        GeneratorKind::ErdosRenyi { .. } => vec![0; n],
        GeneratorKind::Sbm { blocks, .. } => blocks
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect(),
    };
    let prob = |i: usize, j: usize| match &spec.kind {
        GeneratorKind::ErdosRenyi { p, .. } => *p,
        GeneratorKind::Sbm { probabilities, .. } => probabilities[block_of[i]][block_of[j]],
    };

    let mut stream = Stream::new(spec.seed, BASE_STREAM);
    let mut entries = Vec::new();
    let mut pair = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if stream.at(pair) < prob(i, j) {
                entries.push((i, j, 1.0));
                entries.push((j, i, 1.0));
            }
            pair += 1;
        }
    }
    SparseMatrix::from_triplets(n, entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplexSpec {
    pub base: GeneratorSpec,
    pub layer_probs: Vec<f64>,
    /// Independent per-layer inclusion when true; otherwise each arc goes to
    /// exactly one layer drawn from `layer_probs`, which must sum to one.
    pub independent: bool,
    pub seed: u64,
}

impl MultiplexSpec {
    /// Independent inclusion with the same probability on every layer.
    pub fn uniform(base: GeneratorSpec, layers: usize, p: f64, seed: u64) -> Self {
        MultiplexSpec {
            base,
            layer_probs: vec![p; layers],
            independent: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.layer_probs.is_empty() {
            return Err(Error::invalid("multiplex spec needs at least one layer probability"));
        }
        if let Some(p) = self.layer_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("layer probability {p} outside [0, 1]")));
        }
        if !self.independent {
            let sum: f64 = self.layer_probs.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("exclusive layer probabilities sum to {sum}, not 1")));
            }
        }
        Ok(())
    }
}

/// Distributes the base graph's arcs over `layers` layers.
pub fn generate_multiplex(spec: &MultiplexSpec, layers: usize) -> Result<MultiplexNetwork> {
    if spec.layer_probs.len() != layers {
        return Err(Error::Dimension {
            expected: layers,
            actual: spec.layer_probs.len(),
        });
    }
    spec.validate()?;
    let base = generate_base(&spec.base)?;
    let n = base.n();
    let mut per_layer: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); layers];

    if spec.independent {
        for (l, &p) in spec.layer_probs.iter().enumerate() {
            let mut stream = Stream::new(spec.seed, LAYER_STREAM_OFFSET + l as u64);
            for (e, (i, j, w)) in base.entries().enumerate() {
                if stream.at(e as u64) < p {
                    per_layer[l].push((i, j, w));
                }
            }
        }
    } else {
        let mut cumulative = Vec::with_capacity(layers);
        let mut acc = 0.0;
        for &p in &spec.layer_probs {
            acc += p;
            cumulative.push(acc);
        }
        let mut stream = Stream::new(spec.seed, EXCLUSIVE_STREAM);
        for (e, (i, j, w)) in base.entries().enumerate() {
            let u = stream.at(e as u64) * acc;
            let l = cumulative.iter().position(|&c| u < c).unwrap_or(layers - 1);
            per_layer[l].push((i, j, w));
        }
    }

    let layers = per_layer
        .into_iter()
        .map(|entries| SparseMatrix::from_triplets(n, entries))
        .collect::<Result<Vec<_>>>()?;
    MultiplexNetwork::new(n, layers)
}
