//! Configurations: cyclic classes of atom sequences, their canonical
//! representatives, shifts, and enumeration.
//!
//! An atom names one layer matrix `A_l` or its transpose `A_l^T`. A sequence
//! `M_0 M_1 ... M_{k-1}` of atoms defines the ring of dependencies
//! `r_s ∝ M_s r_{s+1}` (indices mod `k`); every rotation of the sequence
//! describes the same ring, so a configuration is the class of all rotations.
//! Atoms are ordered by layer and then with the plain matrix before its
//! transpose; the canonical representative is the lexicographically smallest
//! rotation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub layer: usize,
    pub transposed: bool,
}

impl Atom {
    pub fn plain(layer: usize) -> Self {
        Atom {
            layer,
            transposed: false,
        }
    }

    pub fn transpose(layer: usize) -> Self {
        Atom {
            layer,
            transposed: true,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}{}", self.layer, if self.transposed { "T" } else { "" })
    }
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix('A')
            .ok_or_else(|| Error::parse(0, format!("atom `{s}` must start with `A`")))?;
        let (digits, transposed) = match body.strip_suffix('T') {
            Some(d) => (d, true),
            None => (body, false),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(0, format!("atom `{s}` must look like `A<digits>` or `A<digits>T`")));
        }
        let layer = digits
            .parse()
            .map_err(|_| Error::parse(0, format!("layer index in `{s}` is too large")))?;
        Ok(Atom { layer, transposed })
    }
}

fn rotate(seq: &[Atom], h: usize) -> Vec<Atom> {
    let mut out = Vec::with_capacity(seq.len());
    out.extend_from_slice(&seq[h..]);
    out.extend_from_slice(&seq[..h]);
    out
}

fn fmt_sequence(seq: &[Atom], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, a) in seq.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// A cyclic class of atom sequences, stored as its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct Configuration {
    atoms: Vec<Atom>,
}

impl Configuration {
    /// The class of `seq`, represented by its minimal rotation.
    pub fn canonicalize(seq: &[Atom]) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::invalid("a configuration needs at least one atom"));
        }
        let best = (0..seq.len())
            .map(|h| rotate(seq, h))
            .min()
            .expect("non-empty");
        Ok(Configuration { atoms: best })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Sequence length `k`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Largest layer index referenced, plus one.
    pub fn layers_required(&self) -> usize {
        self.atoms.iter().map(|a| a.layer + 1).max().unwrap_or(0)
    }

    /// All `k` rotations; entry `h` is the representative shifted by `h`.
    /// Rotations of a periodic sequence repeat and are kept.
    pub fn members(&self) -> Vec<Vec<Atom>> {
        (0..self.atoms.len()).map(|h| rotate(&self.atoms, h)).collect()
    }

    pub fn shifted(&self, shift: usize) -> Result<ShiftedConfiguration> {
        ShiftedConfiguration::new(self.clone(), shift)
    }
}

impl TryFrom<Vec<Atom>> for Configuration {
    type Error = Error;

    fn try_from(atoms: Vec<Atom>) -> Result<Self> {
        let c = Configuration::canonicalize(&atoms)?;
        if c.atoms != atoms {
            return Err(Error::invalid("atom list is not a canonical representative"));
        }
        Ok(c)
    }
}

impl From<Configuration> for Vec<Atom> {
    fn from(c: Configuration) -> Self {
        c.atoms
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_sequence(&self.atoms, f)
    }
}

/// One member of a configuration's class, selected by rotating the
/// representative `shift` positions to the left.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftedConfiguration {
    config: Configuration,
    shift: usize,
}

impl ShiftedConfiguration {
    pub fn new(config: Configuration, shift: usize) -> Result<Self> {
        if shift >= config.len() {
            return Err(Error::invalid(format!(
                "shift {shift} out of range for a configuration of length {}",
                config.len()
            )));
        }
        Ok(ShiftedConfiguration { config, shift })
    }

    /// Parses atoms in written order, e.g. `"A0T A0 A1T A1"`, checking every
    /// layer index against `layers`. The shift is the smallest `h` whose
    /// rotation reproduces the written order.
    pub fn parse(text: &str, layers: usize) -> Result<Self> {
        let atoms = text
            .split_whitespace()
            .map(Atom::from_str)
            .collect::<Result<Vec<_>>>()?;
        if atoms.is_empty() {
            return Err(Error::parse(0, "empty configuration"));
        }
        if let Some(a) = atoms.iter().find(|a| a.layer >= layers) {
            return Err(Error::LayerOutOfRange {
                layer: a.layer,
                layers,
            });
        }
        Self::from_sequence(&atoms)
    }

    pub fn from_sequence(seq: &[Atom]) -> Result<Self> {
        let config = Configuration::canonicalize(seq)?;
        let shift = (0..config.len())
            .find(|&h| rotate(&config.atoms, h) == seq)
            .expect("a sequence is a rotation of its own canonical form");
        Ok(ShiftedConfiguration { config, shift })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn len(&self) -> usize {
        self.config.len()
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_empty()
    }

    /// The written-order sequence `M_0 ... M_{k-1}`.
    pub fn sequence(&self) -> Vec<Atom> {
        rotate(&self.config.atoms, self.shift)
    }
}

impl fmt::Display for ShiftedConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_sequence(&self.sequence(), f)
    }
}

/// Every atom available in a multiplex with `layers` layers, in atom order.
pub fn all_atoms(layers: usize) -> Vec<Atom> {
    (0..layers)
        .flat_map(|l| [Atom::plain(l), Atom::transpose(l)])
        .collect()
}

/// All configurations over distinct atoms, one representative per class,
/// ordered by length and then lexicographically.
pub fn enumerate_configs(layers: usize) -> Result<Vec<Configuration>> {
    if layers == 0 {
        return Err(Error::invalid("enumeration needs at least one layer"));
    }
    let atoms = all_atoms(layers);
    let mut out = Vec::new();
    for k in 1..=atoms.len() {
        out.extend(enumerate_configs_of_length(&atoms, k));
    }
    Ok(out)
}

/// Configurations of exactly `k` distinct atoms.
pub fn enumerate_configs_with_length(layers: usize, k: usize) -> Result<Vec<Configuration>> {
    if layers == 0 {
        return Err(Error::invalid("enumeration needs at least one layer"));
    }
    Ok(enumerate_configs_of_length(&all_atoms(layers), k))
}

fn enumerate_configs_of_length(atoms: &[Atom], k: usize) -> Vec<Configuration> {
    let mut out = Vec::new();
    if k == 0 || k > atoms.len() {
        return out;
    }
    // With distinct atoms the minimal rotation starts at the smallest atom, so
    // each class is the smallest chosen atom followed by one ordering of the
    // remaining k - 1.
    for subset in combinations(atoms.len(), k) {
        let chosen: Vec<Atom> = subset.iter().map(|&i| atoms[i]).collect();
        let (head, rest) = chosen.split_first().expect("k >= 1");
        for perm in permutations(rest) {
            let mut seq = Vec::with_capacity(k);
            seq.push(*head);
            seq.extend(perm);
            out.push(Configuration { atoms: seq });
        }
    }
    out.sort();
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            go(i + 1, n, k, current, out);
            current.pop();
        }
    }
    go(0, n, k, &mut current, &mut out);
    out
}

fn permutations(items: &[Atom]) -> Vec<Vec<Atom>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Closed-form count of repetition-free configurations:
/// `sum_{k=1}^{2L} C(2L, k) (k-1)!`.
pub fn config_count(layers: usize) -> u128 {
    let m = 2 * layers as u128;
    (1..=m).map(|k| binomial(m, k) * factorial(k - 1)).sum()
}

/// Closed-form count restricted to length `k`: `C(2L, k) (k-1)!`.
pub fn config_count_with_length(layers: usize, k: usize) -> u128 {
    let m = 2 * layers as u128;
    let k = k as u128;
    if k == 0 || k > m {
        0
    } else {
        binomial(m, k) * factorial(k - 1)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}
