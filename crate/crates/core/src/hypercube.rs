//! Vertex and edge arithmetic on `Q_n`, spin configurations as vertex subsets,
//! sub-cubes and the automorphism group.
//!
//! Vertex `v` is the integer `Σ v_i 2^{i-1}`: coordinate `i` (1-based) lives in
//! bit `i - 1`. A [`Config`] is a bit-vector of length `2^n` whose bit `v` is
//! set when vertex `v` carries spin `+1`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cube dimension supported by formula-level operations.
pub const MAX_DIM: u32 = 30;

/// Largest dimension for which the automorphism group (`n!·2^n` elements) is
/// enumerated.
pub const MAX_GROUP_DIM: u32 = 6;

pub fn check_dim(n: u32) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::param(format!(
            "cube dimension must lie in [1, {MAX_DIM}], got {n}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    /// Value of the 0-based coordinate `i`.
    pub fn coord(self, i: u32) -> bool {
        (self.0 >> i) & 1 == 1
    }

    pub fn flip(self, i: u32) -> VertexId {
        VertexId(self.0 ^ (1 << i))
    }

    pub fn is_adjacent(self, other: VertexId) -> bool {
        (self.0 ^ other.0).count_ones() == 1
    }
}

/// The `n` neighbours of `v`, ordered by flipped coordinate.
pub fn neighbors(v: VertexId, n: u32) -> Result<Vec<VertexId>> {
    check_dim(n)?;
    if u64::from(v.0) >= 1u64 << n {
        return Err(Error::param(format!("vertex {} outside Q_{n}", v.0)));
    }
    Ok((0..n).map(|i| v.flip(i)).collect())
}

/// Spin configuration on `Q_n`, identified with the set of `+1` vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Config {
    n: u32,
    words: Vec<u64>,
}

fn word_count(n: u32) -> usize {
    if n >= 6 {
        1 << (n - 6)
    } else {
        1
    }
}

/// Mask of the valid bits in the (single) word of a cube with `n < 6`.
fn tail_mask(n: u32) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n)) - 1
    }
}

/// Bit pattern over 64 consecutive vertices selecting those with coordinate
/// `d` equal to zero, for `d < 6`.
const fn low_half_pattern(d: u32) -> u64 {
    let mut pattern = 0u64;
    let mut v = 0;
    while v < 64 {
        if v & (1 << d) == 0 {
            pattern |= 1 << v;
        }
        v += 1;
    }
    pattern
}

const LOW_HALF: [u64; 6] = [
    low_half_pattern(0),
    low_half_pattern(1),
    low_half_pattern(2),
    low_half_pattern(3),
    low_half_pattern(4),
    low_half_pattern(5),
];

/// `|E(S,S)|` for a configuration packed into one word (`n <= 6`).
pub(crate) fn mask_within_edges(n: u32, mask: u64) -> u32 {
    (0..n.min(6))
        .map(|d| (mask & (mask >> (1u32 << d)) & LOW_HALF[d as usize]).count_ones())
        .sum()
}

impl Config {
    /// The all-minus configuration `⊟`.
    pub fn empty(n: u32) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            words: vec![0; word_count(n)],
        })
    }

    /// The all-plus configuration `⊞`.
    pub fn full(n: u32) -> Result<Self> {
        let mut c = Self::empty(n)?;
        c.words.fill(u64::MAX);
        c.words[0] &= tail_mask(n);
        Ok(c)
    }

    pub fn from_vertices<I: IntoIterator<Item = u32>>(n: u32, vertices: I) -> Result<Self> {
        let mut c = Self::empty(n)?;
        for v in vertices {
            if u64::from(v) >= c.num_vertices() as u64 {
                return Err(Error::param(format!("vertex {v} outside Q_{n}")));
            }
            c.insert(v);
        }
        Ok(c)
    }

    /// Configuration from a packed bit mask; requires `n <= 6`.
    pub fn from_mask(n: u32, mask: u64) -> Result<Self> {
        check_dim(n)?;
        if n > 6 {
            return Err(Error::capability(format!(
                "packed masks need n <= 6, got {n}"
            )));
        }
        if mask & !tail_mask(n) != 0 {
            return Err(Error::param(format!("mask {mask:#x} has bits outside Q_{n}")));
        }
        Ok(Self {
            n,
            words: vec![mask],
        })
    }

    pub fn to_mask(&self) -> Option<u64> {
        (self.n <= 6).then(|| self.words[0])
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        1usize << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.num_vertices()
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        (self.words[(v >> 6) as usize] >> (v & 63)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: u32) {
        self.words[(v >> 6) as usize] |= 1 << (v & 63);
    }

    #[inline]
    pub fn remove(&mut self, v: u32) {
        self.words[(v >> 6) as usize] &= !(1 << (v & 63));
    }

    #[inline]
    pub fn toggle(&mut self, v: u32) {
        self.words[(v >> 6) as usize] ^= 1 << (v & 63);
    }

    pub fn with_toggled(&self, v: u32) -> Self {
        let mut c = self.clone();
        c.toggle(v);
        c
    }

    /// Members in increasing order.
    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = (i as u32) << 6;
            BitIter(w).map(move |b| base + b)
        })
    }

    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        for w in &mut c.words {
            *w = !*w;
        }
        c.words[0] &= tail_mask(self.n);
        c
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn symmetric_difference_len(&self, other: &Self) -> Result<usize> {
        self.same_dim(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Configurations at Glauber distance one.
    pub fn is_adjacent(&self, other: &Self) -> bool {
        matches!(self.symmetric_difference_len(other), Ok(1))
    }

    /// Number of neighbours of `v` that belong to the configuration.
    pub fn degree_in(&self, v: u32) -> u32 {
        (0..self.n).filter(|&i| self.contains(v ^ (1 << i))).count() as u32
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::param(format!(
                "dimension mismatch: Q_{} vs Q_{}",
                self.n, other.n
            )))
        }
    }
}

/// Ordered as `2^n`-bit unsigned integers with vertex `v` weighing `2^v`.
impl Ord for Config {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Config {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.n)?;
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.members().join(","))
    }
}

/// Serialized as the ascending list of `+1` vertices.
impl Serialize for Config {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.members())
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeCounts {
    /// `|E(S,S)|`
    pub within: u64,
    /// `|E(S,S̄)|`
    pub boundary: u64,
}

pub fn edge_counts(s: &Config) -> EdgeCounts {
    let n = s.n;
    let mut within = 0u64;
    for w in &s.words {
        within += u64::from(mask_within_edges(n, *w));
    }
    for d in 6..n {
        let off = 1usize << (d - 6);
        for i in 0..s.words.len() {
            if i & off == 0 {
                within += u64::from((s.words[i] & s.words[i + off]).count_ones());
            }
        }
    }
    let size = s.len() as u64;
    EdgeCounts {
        within,
        boundary: u64::from(n) * size - 2 * within,
    }
}

/// Automorphism `v ↦ P(v) ⊕ mask` of `Q_n`: coordinates are permuted first,
/// then the flip mask is applied.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automorphism {
    n: u32,
    perm: Vec<u8>,
    mask: u32,
}

impl Automorphism {
    pub fn identity(n: u32) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            perm: (0..n as u8).collect(),
            mask: 0,
        })
    }

    /// `perm[i]` is the image of 0-based coordinate `i`.
    pub fn new(perm: Vec<u8>, mask: u32) -> Result<Self> {
        let n = perm.len() as u32;
        check_dim(n)?;
        let mut seen = vec![false; n as usize];
        for &p in &perm {
            if p as u32 >= n || seen[p as usize] {
                return Err(Error::param(format!("{perm:?} is not a permutation")));
            }
            seen[p as usize] = true;
        }
        if u64::from(mask) >= 1u64 << n {
            return Err(Error::param(format!("flip mask {mask:#b} wider than n = {n}")));
        }
        Ok(Self { n, perm, mask })
    }

    /// Pure coordinate flip.
    pub fn translation(n: u32, mask: u32) -> Result<Self> {
        let mut a = Self::identity(n)?;
        if u64::from(mask) >= 1u64 << n {
            return Err(Error::param(format!("flip mask {mask:#b} wider than n = {n}")));
        }
        a.mask = mask;
        Ok(a)
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn perm(&self) -> &[u8] {
        &self.perm
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    fn permute(&self, v: u32) -> u32 {
        let mut out = 0;
        for (i, &p) in self.perm.iter().enumerate() {
            out |= ((v >> i) & 1) << p;
        }
        out
    }

    pub fn apply_vertex(&self, v: VertexId) -> VertexId {
        VertexId(self.permute(v.0) ^ self.mask)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if self.n != other.n {
            return Err(Error::param("automorphism dimension mismatch"));
        }
        let perm = other.perm.iter().map(|&p| self.perm[p as usize]).collect();
        let mask = self.permute(other.mask) ^ self.mask;
        Ok(Automorphism {
            n: self.n,
            perm,
            mask,
        })
    }

    pub fn inverse(&self) -> Automorphism {
        let mut perm = vec![0u8; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            perm[p as usize] = i as u8;
        }
        let inv = Automorphism {
            n: self.n,
            perm,
            mask: 0,
        };
        let mask = inv.permute(self.mask);
        Automorphism { mask, ..inv }
    }

    /// Vertex image table, `table[v] = φ(v)`.
    pub fn vertex_table(&self) -> Vec<u32> {
        (0..1u32 << self.n)
            .map(|v| self.apply_vertex(VertexId(v)).0)
            .collect()
    }

    /// Every automorphism of `Q_n`, permutations in lexicographic order, masks
    /// ascending within each permutation.
    pub fn group(n: u32) -> Result<Vec<Automorphism>> {
        check_dim(n)?;
        if n > MAX_GROUP_DIM {
            return Err(Error::capability(format!(
                "automorphism group enumeration needs n <= {MAX_GROUP_DIM}, got {n}"
            )));
        }
        Ok((0..n as u8)
            .permutations(n as usize)
            .flat_map(|perm| (0..1u32 << n).map(move |mask| (perm.clone(), mask)))
            .map(|(perm, mask)| Automorphism { n, perm, mask })
            .collect())
    }
}

pub fn apply_automorphism(phi: &Automorphism, s: &Config) -> Result<Config> {
    if phi.n != s.n {
        return Err(Error::param(format!(
            "automorphism of Q_{} applied to a configuration on Q_{}",
            phi.n, s.n
        )));
    }
    let mut out = Config::empty(s.n)?;
    for v in s.members() {
        out.insert(phi.apply_vertex(VertexId(v)).0);
    }
    Ok(out)
}

type VertexTables = Vec<Box<[u8]>>;

static GROUP_TABLES: [OnceLock<VertexTables>; 7] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

/// Cached vertex tables of the full group for `n <= 6`.
pub(crate) fn group_tables(n: u32) -> Result<&'static [Box<[u8]>]> {
    check_dim(n)?;
    if n > MAX_GROUP_DIM {
        return Err(Error::capability(format!(
            "automorphism group enumeration needs n <= {MAX_GROUP_DIM}, got {n}"
        )));
    }
    Ok(GROUP_TABLES[n as usize].get_or_init(|| {
        Automorphism::group(n)
            .expect("dimension checked")
            .iter()
            .map(|a| a.vertex_table().into_iter().map(|v| v as u8).collect())
            .collect()
    }))
}

#[inline]
pub(crate) fn apply_table(table: &[u8], mut mask: u64) -> u64 {
    let mut out = 0u64;
    while mask != 0 {
        let v = mask.trailing_zeros();
        mask &= mask - 1;
        out |= 1 << table[v as usize];
    }
    out
}

/// Least element of the orbit of `s`, in the integer order of [`Config`].
pub fn canonical_form(s: &Config) -> Result<Config> {
    let tables = group_tables(s.n)?;
    let mask = s.to_mask().expect("n <= 6 checked by group_tables");
    let best = tables
        .iter()
        .map(|t| apply_table(t, mask))
        .min()
        .expect("group is nonempty");
    Config::from_mask(s.n, best)
}

/// Full orbit of `s` under the automorphism group, sorted.
pub fn orbit(s: &Config) -> Result<BTreeSet<Config>> {
    let tables = group_tables(s.n)?;
    let mask = s.to_mask().expect("n <= 6 checked by group_tables");
    let masks: BTreeSet<u64> = tables.iter().map(|t| apply_table(t, mask)).collect();
    masks
        .into_iter()
        .map(|m| Config::from_mask(s.n, m))
        .collect()
}

/// Sub-cube with the coordinates in `fixed_mask` pinned to `fixed_values`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SubCube {
    n: u32,
    fixed_mask: u32,
    fixed_values: u32,
}

impl SubCube {
    pub fn new(n: u32, fixed_mask: u32, fixed_values: u32) -> Result<Self> {
        check_dim(n)?;
        let all = ((1u64 << n) - 1) as u32;
        if fixed_mask & !all != 0 || fixed_values & !fixed_mask != 0 {
            return Err(Error::param(format!(
                "fixed values {fixed_values:#b} not within fixed coordinates {fixed_mask:#b}"
            )));
        }
        Ok(Self {
            n,
            fixed_mask,
            fixed_values,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.n - self.fixed_mask.count_ones()
    }

    pub fn fixed_mask(&self) -> u32 {
        self.fixed_mask
    }

    pub fn fixed_values(&self) -> u32 {
        self.fixed_values
    }

    pub fn free_mask(&self) -> u32 {
        (((1u64 << self.n) - 1) as u32) & !self.fixed_mask
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 & self.fixed_mask == self.fixed_values
    }

    /// Member vertices in increasing order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        // enumerate submasks of the free coordinates
        let free = self.free_mask();
        let count = 1u64 << free.count_ones();
        (0..count).map(move |i| {
            let mut v = self.fixed_values;
            let mut bits = free;
            let mut k = 0;
            while bits != 0 {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                if (i >> k) & 1 == 1 {
                    v |= 1 << b;
                }
                k += 1;
            }
            VertexId(v)
        })
    }

    pub fn to_config(&self) -> Config {
        let mut c = Config::empty(self.n).expect("dimension checked");
        for v in self.vertices() {
            c.insert(v.0);
        }
        c
    }

    /// Image under flipping the external coordinate `s`.
    pub fn reflect(&self, s: u32) -> Result<SubCube> {
        if self.fixed_mask & (1 << s) == 0 {
            return Err(Error::param(format!("coordinate {s} is not external")));
        }
        Ok(SubCube {
            fixed_values: self.fixed_values ^ (1 << s),
            ..*self
        })
    }

    /// Smallest sub-cube containing the nonempty set `s`.
    pub fn span(s: &Config) -> Option<SubCube> {
        let mut members = s.members();
        let first = members.next()?;
        let (mut and, mut or) = (first, first);
        for v in members {
            and &= v;
            or |= v;
        }
        let all = ((1u64 << s.n) - 1) as u32;
        let varying = and ^ or;
        let fixed_mask = all & !varying;
        Some(SubCube {
            n: s.n,
            fixed_mask,
            fixed_values: first & fixed_mask,
        })
    }
}

/// Dimension `r` when `s` is exactly the vertex set of an `r`-sub-cube.
pub fn is_subcube(s: &Config) -> Option<u32> {
    let span = SubCube::span(s)?;
    let r = span.dimension();
    (s.len() == 1usize << r).then_some(r)
}
