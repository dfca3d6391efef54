//! Binary digit sums, the boundary minimizers `Υ_k = {v : v < k}`, good sets,
//! well-containment, exhaustive minimizer catalogs and the reference path
//! `γ_k = Υ_k` from `⊟` to `⊞`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{
    check_dim, group_tables, apply_table, mask_within_edges, Automorphism, Config, SubCube,
    VertexId,
};

/// Largest `r` for which `r·2^{r-1}` is computed.
pub const MAX_QSUM_EXP: u32 = 57;

/// Exhaustive minimizer enumeration cap.
pub const MAX_BRUTE_DIM: u32 = 4;

/// Cap for materialized paths.
pub const MAX_PATH_DIM: u32 = 4;

/// Binary digit sum.
#[inline]
pub fn q(i: u64) -> u32 {
    i.count_ones()
}

/// `Σ_{i=1}^{m} q(i)`, counted per bit position.
pub fn qsum(m: u64) -> Result<u64> {
    if m >= 1u64 << (MAX_QSUM_EXP + 1) {
        return Err(Error::capability(format!("qsum({m}) would overflow")));
    }
    let count = u128::from(m) + 1;
    let mut total = 0u128;
    for b in 0..64u32 {
        let period = 1u128 << (b + 1);
        let half = 1u128 << b;
        if half > count {
            break;
        }
        total += (count / period) * half + (count % period).saturating_sub(half);
    }
    Ok(total as u64)
}

/// `r·2^{r-1}`, which equals `qsum(2^r - 1)`.
pub fn qsum_closed(r: u32) -> Result<u64> {
    if r > MAX_QSUM_EXP {
        return Err(Error::capability(format!(
            "qsum_closed({r}) exceeds r <= {MAX_QSUM_EXP}"
        )));
    }
    Ok(if r == 0 { 0 } else { u64::from(r) << (r - 1) })
}

/// Checks `Σ_{a <= i < b} q(i) = (j+1+2Σ_{i>=j+2} a_i)·2^{j-2}` with
/// `b = a + 2^{j-1}` by direct summation. Digit `a_i` is bit `i-1` of `a`;
/// the precondition is `a_j = 1`, `a_{j+1} = 0`.
pub fn abdiff_check(a: u64, j: u32, n: u32) -> Result<bool> {
    if n > 62 || j < 1 || j + 1 >= n {
        return Err(Error::param(format!("need 1 <= j < n-1 and n <= 62, got j={j}, n={n}")));
    }
    if a >= 1u64 << n {
        return Err(Error::param(format!("a = {a} is not below 2^{n}")));
    }
    if (a >> (j - 1)) & 1 != 1 || (a >> j) & 1 != 0 {
        return Err(Error::param(format!(
            "a = {a:#b} needs digit {j} set and digit {} clear",
            j + 1
        )));
    }
    let b = a + (1u64 << (j - 1));
    let lhs: u64 = (a..b).map(|i| u64::from(q(i))).sum();
    let high = u64::from(q(a >> (j + 1)));
    // both sides doubled so that j = 1 stays integral
    Ok(2 * lhs == (u64::from(j) + 1 + 2 * high) << (j - 1))
}

/// Prefix sums of `q` up to a bound.
#[derive(Clone, Debug)]
pub struct QTable {
    digits: Vec<u32>,
    prefix: Vec<u64>,
}

impl QTable {
    pub fn new(bound: u64) -> Result<Self> {
        if bound > 1 << 32 {
            return Err(Error::capability(format!("QTable bound {bound} too large")));
        }
        let len = bound as usize + 1;
        let mut digits = vec![0u32; len];
        let mut prefix = vec![0u64; len];
        for i in 1..len {
            digits[i] = digits[i >> 1] + (i as u32 & 1);
            prefix[i] = prefix[i - 1] + u64::from(digits[i]);
        }
        Ok(Self { digits, prefix })
    }

    pub fn bound(&self) -> u64 {
        (self.digits.len() - 1) as u64
    }

    pub fn q(&self, i: u64) -> u32 {
        self.digits[i as usize]
    }

    pub fn qsum(&self, m: u64) -> u64 {
        self.prefix[m as usize]
    }
}

fn check_size(n: u32, k: u64) -> Result<()> {
    check_dim(n)?;
    if k > 1u64 << n {
        return Err(Error::param(format!("size {k} exceeds 2^{n}")));
    }
    Ok(())
}

/// `Υ_k`, the first `k` vertices in counting order.
pub fn upsilon(n: u32, k: u64) -> Result<Config> {
    check_size(n, k)?;
    let mut c = Config::empty(n)?;
    for v in 0..k as u32 {
        c.insert(v);
    }
    Ok(c)
}

/// `nk - 2·qsum(k-1)`.
pub fn minimal_boundary(n: u32, k: u64) -> Result<u64> {
    check_size(n, k)?;
    if k == 0 {
        return Ok(0);
    }
    Ok(u64::from(n) * k - 2 * qsum(k - 1)?)
}

/// `⌈log2 k⌉` for `k >= 1`.
fn ceil_log2(k: usize) -> u32 {
    usize::BITS - (k - 1).leading_zeros()
}

/// Recursive good-set test: a singleton, or a full `r`-sub-cube plus a good
/// remainder in its twin, both inside an `(r+1)`-sub-cube.
pub fn is_good(s: &Config) -> Result<bool> {
    let k = s.len();
    if k == 0 {
        return Err(Error::param("good-set test on the empty set"));
    }
    Ok(good_rec(s, k))
}

fn good_rec(s: &Config, k: usize) -> bool {
    if k == 1 {
        return true;
    }
    let r1 = ceil_log2(k);
    // 2^r < k forces dim span >= r+1, so the containing cube is the span
    let span = SubCube::span(s).expect("nonempty");
    if span.dimension() != r1 {
        return false;
    }
    let half = 1usize << (r1 - 1);
    let mut free = span.free_mask();
    while free != 0 {
        let d = free.trailing_zeros();
        free &= free - 1;
        for side in [0, 1 << d] {
            let face = SubCube::new(
                s.dim(),
                span.fixed_mask() | (1 << d),
                span.fixed_values() | side,
            )
            .expect("valid face");
            if face.vertices().all(|v| s.contains(v.0)) {
                let mut rest = s.clone();
                for v in face.vertices() {
                    rest.remove(v.0);
                }
                if good_rec(&rest, k - half) {
                    return true;
                }
            }
        }
    }
    false
}

/// Some `(r+1)`-sub-cube contains `s`, where `2^r < |s| <= 2^{r+1}`.
pub fn is_well_contained(s: &Config) -> bool {
    match SubCube::span(s) {
        Some(span) => span.dimension() <= ceil_log2(s.len()),
        None => false,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizerCatalog {
    pub n: u32,
    pub k: u64,
    pub minimum: u64,
    /// Every minimizer, in increasing order.
    pub minimizers: Vec<Config>,
    /// Canonical orbit representatives with orbit sizes; the orbits partition
    /// `minimizers`.
    pub orbits: Vec<(Config, usize)>,
}

/// Exhaustive enumeration of the `k`-subsets of `Q_n` with least boundary.
pub fn brute_min_boundary(n: u32, k: u64) -> Result<MinimizerCatalog> {
    check_size(n, k)?;
    if n > MAX_BRUTE_DIM {
        return Err(Error::capability(format!(
            "exhaustive minimizer search needs n <= {MAX_BRUTE_DIM}, got {n}"
        )));
    }
    let nv = 1u32 << n;
    let full_within = u64::from(n) << (n - 1);
    let mut best = u64::MAX;
    let mut masks = Vec::new();
    for mask in KSubsets::new(nv, k as u32) {
        let within = u64::from(mask_within_edges(n, mask));
        let boundary = u64::from(n) * k - 2 * within;
        debug_assert!(within <= full_within);
        match boundary.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = boundary;
                masks.clear();
                masks.push(mask);
            }
            std::cmp::Ordering::Equal => masks.push(mask),
            std::cmp::Ordering::Greater => {}
        }
    }
    let tables = group_tables(n)?;
    let mut orbit_sizes: BTreeMap<u64, usize> = BTreeMap::new();
    for &m in &masks {
        let canon = tables.iter().map(|t| apply_table(t, m)).min().expect("nonempty group");
        *orbit_sizes.entry(canon).or_default() += 1;
    }
    masks.sort_unstable();
    Ok(MinimizerCatalog {
        n,
        k,
        minimum: best,
        minimizers: masks
            .into_iter()
            .map(|m| Config::from_mask(n, m))
            .collect::<Result<_>>()?,
        orbits: orbit_sizes
            .into_iter()
            .map(|(m, c)| Config::from_mask(n, m).map(|cfg| (cfg, c)))
            .collect::<Result<_>>()?,
    })
}

/// Gosper's hack over `k`-subsets of `{0..width}`, in increasing order.
pub(crate) struct KSubsets {
    next: Option<u64>,
    limit: u64,
}

impl KSubsets {
    pub(crate) fn new(width: u32, k: u32) -> Self {
        debug_assert!(width <= 63 && k <= width);
        Self {
            next: Some(if k == 0 { 0 } else { (1u64 << k) - 1 }),
            limit: 1u64 << width,
        }
    }
}

impl Iterator for KSubsets {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            (nxt < self.limit).then_some(nxt)
        };
        Some(cur)
    }
}

/// Lazily generated reference path `γ_0 = ⊟, …, γ_{2^n} = ⊞`, `γ_k = Υ_k`.
#[derive(Clone, Debug)]
pub struct ReferencePath {
    current: Config,
    k: u64,
    phi: Option<Automorphism>,
}

impl ReferencePath {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self {
            current: Config::empty(n)?,
            k: 0,
            phi: None,
        })
    }

    /// Path `φ(Υ_k)` for an automorphism `φ`.
    pub fn translated(phi: Automorphism) -> Result<Self> {
        Ok(Self {
            current: Config::empty(phi.dim())?,
            k: 0,
            phi: Some(phi),
        })
    }

    /// Vertex added at step `k` (`γ_{k-1} → γ_k`), for `1 <= k <= 2^n`.
    pub fn added_vertex(&self, k: u64) -> u32 {
        let v = (k - 1) as u32;
        match &self.phi {
            Some(phi) => phi.apply_vertex(VertexId(v)).0,
            None => v,
        }
    }
}

impl Iterator for ReferencePath {
    type Item = Config;
    fn next(&mut self) -> Option<Config> {
        if self.k > self.current.num_vertices() as u64 {
            return None;
        }
        if self.k > 0 {
            let v = self.added_vertex(self.k);
            self.current.insert(v);
        }
        self.k += 1;
        Some(self.current.clone())
    }
}

/// Materialized reference path, `n <= 4`.
pub fn reference_path(n: u32) -> Result<Vec<Config>> {
    check_dim(n)?;
    if n > MAX_PATH_DIM {
        return Err(Error::capability(format!(
            "materialized paths need n <= {MAX_PATH_DIM}; use ReferencePath for larger n"
        )));
    }
    Ok(ReferencePath::new(n)?.collect())
}

/// Automorphism `φ` with `φ(0) = y` and `φ(1) = w`: swap coordinate 0 with the
/// coordinate `d` separating `w` and `y`, then flip by `y`.
pub fn translation_to_edge(n: u32, w: VertexId, y: VertexId) -> Result<Automorphism> {
    check_dim(n)?;
    if u64::from(w.0.max(y.0)) >= 1u64 << n {
        return Err(Error::param(format!("vertices {w:?}, {y:?} outside Q_{n}")));
    }
    if !w.is_adjacent(y) {
        return Err(Error::param(format!(
            "vertices {} and {} are not adjacent",
            w.0, y.0
        )));
    }
    let d = (w.0 ^ y.0).trailing_zeros() as usize;
    let mut perm: Vec<u8> = (0..n as u8).collect();
    perm.swap(0, d);
    Automorphism::new(perm, y.0)
}

/// Image of the reference path with `γ_1 = {y}`, `γ_2 = {w, y}`; `n <= 4`.
pub fn translated_reference_path(n: u32, w: VertexId, y: VertexId) -> Result<Vec<Config>> {
    let phi = translation_to_edge(n, w, y)?;
    if n > MAX_PATH_DIM {
        return Err(Error::capability(format!(
            "materialized paths need n <= {MAX_PATH_DIM}"
        )));
    }
    Ok(ReferencePath::translated(phi)?.collect())
}
