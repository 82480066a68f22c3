#![allow(dead_code)]

use multirank::measures::{item_weights, WeightScheme};
use multirank::multiplex::{MultiplexNetwork, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Six vertices; layer 0 joins 0→1, 2→3, 4→5 and layer 1 joins 1→2, 3→4, 5→0.
pub const RING: &str = "nodes 6\nlayers 2\n0 0 1 1\n0 2 3 1\n0 4 5 1\n1 1 2 1\n1 3 4 1\n1 5 0 1\n";

pub fn ring() -> MultiplexNetwork {
    MultiplexNetwork::parse(RING).unwrap()
}

/// Closed-form `r_0(tau)` of `A0T A0 A1T A1` on the ring: `a` on even
/// vertices, `b` on odd ones.
pub fn ring_r0(tau: f64) -> Vec<f64> {
    let a = tau / (tau + (1.0 + tau * tau).sqrt()) / 3.0;
    let b = 1.0 / 3.0 - a;
    (0..6).map(|i| if i % 2 == 0 { a } else { b }).collect()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Pairwise definition of the weighted tau, `O(n^2)`.
pub fn brute_force_tau(r: &[f64], s: &[f64], scheme: WeightScheme) -> f64 {
    let f = item_weights(r, scheme);
    let (mut inner, mut nr, mut ns) = (0.0, 0.0, 0.0);
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let w = f[i] + f[j];
            let a = sgn(r[i] - r[j]);
            let b = sgn(s[i] - s[j]);
            inner += w * a * b;
            nr += w * a * a;
            ns += w * b * b;
        }
    }
    inner / (nr.sqrt() * ns.sqrt())
}

/// Kendall tau-b from concordant/discordant counts.
pub fn kendall_tau_b(r: &[f64], s: &[f64]) -> f64 {
    let n = r.len();
    let (mut c, mut d, mut tr, mut ts) = (0.0, 0.0, 0.0, 0.0);
    let n0 = (n * (n - 1) / 2) as f64;
    for i in 0..n {
        for j in i + 1..n {
            let p = sgn(r[i] - r[j]) * sgn(s[i] - s[j]);
            if p > 0.0 {
                c += 1.0;
            } else if p < 0.0 {
                d += 1.0;
            }
            if r[i] == r[j] {
                tr += 1.0;
            }
            if s[i] == s[j] {
                ts += 1.0;
            }
        }
    }
    (c - d) / ((n0 - tr) * (n0 - ts)).sqrt()
}

/// Spearman correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let rx = multirank::measures::average_ranks_descending(x);
    let ry = multirank::measures::average_ranks_descending(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Dense row-major copy of `a`.
pub fn dense(a: &SparseMatrix) -> Vec<Vec<f64>> {
    let n = a.n();
    let mut d = vec![vec![0.0; n]; n];
    for (i, j, w) in a.entries() {
        d[i][j] = w;
    }
    d
}

pub fn mat_t_vec(d: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            out[j] += d[i][j] * v[i];
        }
    }
    out
}

pub fn mat_vec(d: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    d.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().map(|x| x.abs()).sum();
    for x in v {
        *x /= s;
    }
}

/// Power iteration `v <- op(v)` until the L1 change is below `tol`.
pub fn dense_power(n: usize, tol: f64, op: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut next = op(&v);
        normalize(&mut next);
        let delta = l1(&next, &v);
        v = next;
        if delta < tol {
            break;
        }
    }
    v
}

/// PageRank from the dense Google matrix, built independently of the library.
pub fn dense_pagerank(a: &SparseMatrix, d: f64) -> Vec<f64> {
    let n = a.n();
    let m = dense(a);
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        let out: f64 = m[i].iter().sum();
        for j in 0..n {
            let p = if out > 0.0 { m[i][j] / out } else { 1.0 / n as f64 };
            g[j][i] = d * p + (1.0 - d) / n as f64;
        }
    }
    dense_power(n, 1e-15, |v| mat_vec(&g, v))
}

/// Random digraph that contains a Hamiltonian cycle, hence strongly connected.
pub fn strongly_connected(n: usize, p: f64, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut edges = std::collections::BTreeMap::new();
    for k in 0..n {
        edges.insert((perm[k], perm[(k + 1) % n]), 1.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.entry((i, j)).or_insert(rng.random_range(0.5..2.0));
            }
        }
    }
    SparseMatrix::from_triplets(n, edges.into_iter().map(|((i, j), w)| (i, j, w))).unwrap()
}

/// Random directed multiplex with weights in `[0.5, 2)`.
pub fn random_multiplex(n: usize, layers: usize, p: f64, seed: u64) -> MultiplexNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = (0..layers)
        .map(|_| {
            let mut t = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if rng.random::<f64>() < p {
                        t.push((i, j, rng.random_range(0.5..2.0)));
                    }
                }
            }
            SparseMatrix::from_triplets(n, t).unwrap()
        })
        .collect();
    MultiplexNetwork::new(n, layers).unwrap()
}
