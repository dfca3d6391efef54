//! Energy landscape: communication heights from a sub-level-set merge tree,
//! the barrier `Γ*` by three independent routes, stability levels, the
//! metastable set, constructive stability certificates and the wells scan.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::energy::{energy_gap, flip_delta, g_values, EnergyValue};
use crate::error::{Error, Result};
use crate::hypercube::{check_dim, mask_within_edges, Config, VertexId};
use crate::isoperimetry::{qsum, ReferencePath, translation_to_edge};
use crate::scalar::Field;

/// Largest dimension whose full configuration space is indexed.
pub const MAX_FILTRATION_DIM: u32 = 4;

/// Largest dimension for constructive certificates.
pub const MAX_CERTIFICATE_DIM: u32 = 20;

/// Merge tree of the sub-level-set filtration of the energy over all
/// `2^(2^n)` configurations.
///
/// Nodes `0..N` are the states (leaves). Each union performed while sweeping
/// states in increasing energy creates an internal node whose height is the
/// energy of the state being added. `Φ(ξ, ζ)` is the height of the lowest
/// common ancestor of the two leaves.
#[derive(Clone, Debug)]
pub struct FiltrationIndex<T> {
    n: u32,
    h: T,
    energy: Vec<EnergyValue>,
    /// Dense energy rank; states with equal realized energy share a level.
    level: Vec<u32>,
    /// Sweep order: by level, then by state.
    order: Vec<u32>,
    parent: Vec<u32>,
    /// State whose energy is the height of the node.
    node_state: Vec<u32>,
    min_level: Vec<u32>,
    depth: Vec<u32>,
    up: Vec<Vec<u32>>,
}

fn dense_levels<T: Field>(energy: &[EnergyValue], h: T) -> Vec<u32> {
    let mut classes: Vec<EnergyValue> = energy.to_vec();
    classes.sort_unstable_by_key(|c| (c.s, c.e));
    classes.dedup();
    classes.sort_by(|a, b| a.cmp_at(*b, h).then((a.s, a.e).cmp(&(b.s, b.e))));
    let mut ranks = Vec::with_capacity(classes.len());
    let mut lvl = 0u32;
    for (i, c) in classes.iter().enumerate() {
        if i > 0 && classes[i - 1].cmp_at(*c, h) == Ordering::Less {
            lvl += 1;
        }
        ranks.push(((c.s, c.e), lvl));
    }
    ranks.sort_unstable();
    energy
        .iter()
        .map(|c| {
            let i = ranks
                .binary_search_by_key(&(c.s, c.e), |r| r.0)
                .expect("class present");
            ranks[i].1
        })
        .collect()
}

struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    fn new(len: usize) -> Self {
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Returns the surviving root.
    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        big
    }
}

/// Builds the merge tree for `Q_n` at field `h`, `n <= 4`.
pub fn build_filtration<T: Field>(n: u32, h: T) -> Result<FiltrationIndex<T>> {
    check_dim(n)?;
    if n > MAX_FILTRATION_DIM {
        return Err(Error::capability(format!(
            "the configuration space of Q_{n} has 2^{} states; the filtration needs n <= {MAX_FILTRATION_DIM}",
            1u64 << n
        )));
    }
    let nv = 1u32 << n;
    let count = 1usize << nv;
    let energy: Vec<EnergyValue> = (0..count as u64)
        .map(|m| {
            let within = i64::from(mask_within_edges(n, m));
            let s = i64::from(m.count_ones());
            EnergyValue::new(i64::from(n) * s - 2 * within, s)
        })
        .collect();
    let level = dense_levels(&energy, h);
    let mut order: Vec<u32> = (0..count as u32).collect();
    order.sort_unstable_by_key(|&x| (level[x as usize], x));

    let mut parent: Vec<u32> = (0..count as u32).collect();
    let mut node_state: Vec<u32> = (0..count as u32).collect();
    parent.reserve(count - 1);
    node_state.reserve(count - 1);
    let mut dsu = Dsu::new(count);
    let mut comp_node: Vec<u32> = (0..count as u32).collect();
    let mut present = vec![false; count];
    for &x in &order {
        present[x as usize] = true;
        for v in 0..nv {
            let y = x ^ (1 << v);
            if !present[y as usize] {
                continue;
            }
            let (rx, ry) = (dsu.find(x), dsu.find(y));
            if rx == ry {
                continue;
            }
            let z = parent.len() as u32;
            parent.push(z);
            node_state.push(x);
            parent[comp_node[rx as usize] as usize] = z;
            parent[comp_node[ry as usize] as usize] = z;
            let root = dsu.union(rx, ry);
            comp_node[root as usize] = z;
        }
    }
    let nodes = parent.len();
    debug_assert_eq!(nodes, 2 * count - 1, "the cube graph is connected");

    // children always precede parents, so one forward pass fills subtree minima
    let mut min_level: Vec<u32> = node_state.iter().map(|&s| level[s as usize]).collect();
    for z in 0..nodes {
        let p = parent[z] as usize;
        if p != z && min_level[z] < min_level[p] {
            min_level[p] = min_level[z];
        }
    }
    let mut depth = vec![0u32; nodes];
    for z in (0..nodes).rev() {
        let p = parent[z] as usize;
        if p != z {
            depth[z] = depth[p] + 1;
        }
    }
    let log = (usize::BITS - nodes.leading_zeros()) as usize;
    let mut up = vec![parent.clone()];
    for j in 1..log {
        let prev = &up[j - 1];
        let next: Vec<u32> = (0..nodes).map(|z| prev[prev[z] as usize]).collect();
        up.push(next);
    }
    Ok(FiltrationIndex {
        n,
        h,
        energy,
        level,
        order,
        parent,
        node_state,
        min_level,
        depth,
        up,
    })
}

impl<T: Field> FiltrationIndex<T> {
    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn field(&self) -> T {
        self.h
    }

    pub fn num_states(&self) -> usize {
        self.energy.len()
    }

    /// State index of `⊞`.
    pub fn top(&self) -> u32 {
        (self.energy.len() - 1) as u32
    }

    /// States in sweep order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn energy(&self, state: u32) -> EnergyValue {
        self.energy[state as usize]
    }

    pub fn level(&self, state: u32) -> u32 {
        self.level[state as usize]
    }

    pub fn config(&self, state: u32) -> Config {
        Config::from_mask(self.n, u64::from(state)).expect("indexed state")
    }

    pub fn state_of(&self, s: &Config) -> Result<u32> {
        if s.dim() != self.n {
            return Err(Error::param(format!(
                "configuration on Q_{} queried against an index of Q_{}",
                s.dim(),
                self.n
            )));
        }
        Ok(s.to_mask().expect("n <= 4") as u32)
    }

    fn node_level(&self, z: u32) -> u32 {
        self.level[self.node_state[z as usize] as usize]
    }

    fn lca(&self, mut a: u32, mut b: u32) -> u32 {
        if self.depth[a as usize] < self.depth[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        let diff = self.depth[a as usize] - self.depth[b as usize];
        for (j, row) in self.up.iter().enumerate() {
            if (diff >> j) & 1 == 1 {
                a = row[a as usize];
            }
        }
        if a == b {
            return a;
        }
        for row in self.up.iter().rev() {
            if row[a as usize] != row[b as usize] {
                a = row[a as usize];
                b = row[b as usize];
            }
        }
        self.parent[a as usize]
    }

    /// `Φ(a, b) - H(⊟)` for state indices.
    pub fn comm_height_states(&self, a: u32, b: u32) -> EnergyValue {
        let z = self.lca(a, b);
        self.energy[self.node_state[z as usize] as usize]
    }

    /// Level of `Φ(a, b)`.
    pub fn comm_level_states(&self, a: u32, b: u32) -> u32 {
        self.node_level(self.lca(a, b))
    }

    /// `𝒱_ξ` for a state index; `None` when no state lies strictly below.
    pub fn stability_level_state(&self, x: u32) -> Option<EnergyValue> {
        let lx = self.level[x as usize];
        let root = *self.up.last().expect("nonempty")
            .get(x as usize)
            .expect("state in range");
        if self.min_level[root as usize] >= lx {
            return None;
        }
        let mut cur = x;
        for row in self.up.iter().rev() {
            let next = row[cur as usize];
            if self.min_level[next as usize] >= lx {
                cur = next;
            }
        }
        let a = self.parent[cur as usize];
        Some(self.energy[self.node_state[a as usize] as usize] - self.energy[x as usize])
    }
}

/// `Φ(ξ, ζ) - H(⊟)`.
pub fn comm_height<T: Field>(index: &FiltrationIndex<T>, xi: &Config, zeta: &Config) -> Result<EnergyValue> {
    Ok(index.comm_height_states(index.state_of(xi)?, index.state_of(zeta)?))
}

/// `min_γ max_{σ∈γ} H(σ)` from `source` to every state, by a Dijkstra-type
/// search over energy levels. Independent of the merge tree.
pub fn bottleneck_search<T: Field>(index: &FiltrationIndex<T>, source: u32) -> Vec<EnergyValue> {
    let count = index.num_states();
    let nv = 1u32 << index.n;
    let mut best = vec![u32::MAX; count];
    let mut witness = vec![u32::MAX; count];
    let mut heap = BinaryHeap::new();
    best[source as usize] = index.level(source);
    witness[source as usize] = source;
    heap.push(Reverse((best[source as usize], source)));
    while let Some(Reverse((lvl, x))) = heap.pop() {
        if lvl > best[x as usize] {
            continue;
        }
        for v in 0..nv {
            let y = x ^ (1 << v);
            let ly = index.level(y);
            let (cand, wit) = if ly > lvl { (ly, y) } else { (lvl, witness[x as usize]) };
            if cand < best[y as usize] {
                best[y as usize] = cand;
                witness[y as usize] = wit;
                heap.push(Reverse((cand, y)));
            }
        }
    }
    witness.iter().map(|&w| index.energy(w)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BruteBarrier<T> {
    /// Every maximizer of `g`; a single entry for admissible `h`.
    pub argmax: Vec<u64>,
    pub gamma: EnergyValue,
    pub value: T,
}

/// `max_k g(k)` by exhaustive evaluation.
pub fn gamma_star_brute<T: Field>(n: u32, h: T) -> Result<BruteBarrier<T>> {
    let g = g_values(n)?;
    let mut best = g[0];
    let mut argmax = vec![0u64];
    for (k, &gk) in g.iter().enumerate().skip(1) {
        match gk.cmp_at(best, h) {
            Ordering::Greater => {
                best = gk;
                argmax = vec![k as u64];
            }
            Ordering::Equal => argmax.push(k as u64),
            Ordering::Less => {}
        }
    }
    Ok(BruteBarrier {
        argmax,
        gamma: best,
        value: best.realize(h),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierProfile<T> {
    pub n: u32,
    pub h: T,
    /// `⌈(n-h)/2⌉`
    pub delta: i64,
    /// `1 - (⌊n-h⌋ mod 2)`
    pub epsilon: i64,
    pub k_star: u64,
    /// Closed-form barrier.
    pub gamma_star: T,
    /// `g(k*)` as an exact pair.
    pub gamma_star_exact: EnergyValue,
    /// The fully collapsed constant `(2-h+⌊h⌋)(2^⌈n-h⌉-4+2ε)/3 - ε`.
    pub gamma_printed: T,
    /// `δ = 1`: the sub-cube construction degenerates to single vertices.
    pub delta_one: bool,
}

fn check_field_range<T: Field>(n: u32, h: T) -> Result<()> {
    check_dim(n)?;
    if !(h > T::zero() && h < T::from_int(i64::from(n))) {
        return Err(Error::param(format!("field h = {h} must lie in (0, {n})")));
    }
    Ok(())
}

/// `⌈n - h - 2m⌉`, the dimension of the `m`-th sub-cube of `Υ_{k*}`.
pub fn subcube_dim<T: Field>(n: u32, h: T, m: i64) -> i64 {
    (T::from_int(i64::from(n) - 2 * m) - h).ceil_int()
}

/// `δ`, `ε`, `k*` and `Γ*` in closed form.
pub fn gamma_star_closed<T: Field>(n: u32, h: T) -> Result<BarrierProfile<T>> {
    check_field_range(n, h)?;
    let two = T::from_int(2);
    let three = T::from_int(3);
    let nh = T::from_int(i64::from(n)) - h;
    let delta = (nh / two).ceil_int();
    let epsilon = 1 - nh.floor_int().rem_euclid(2);
    let k_star: u64 = (1..delta).map(|m| 1u64 << subcube_dim(n, h, m)).sum::<u64>() + 1;
    let frac = two - h + h.floor();
    let last = subcube_dim(n, h, delta - 1);
    let gamma_star = (nh - T::from_int(2 * delta - 2))
        + T::pow2(last) * frac * (T::pow2(2 * (delta - 1)) - T::one()) / three;
    let gamma_printed = frac * (T::pow2(nh.ceil_int()) - T::from_int(4) + T::from_int(2 * epsilon))
        / three
        - T::from_int(epsilon);
    let gamma_star_exact = EnergyValue::new(
        (u64::from(n) * k_star - 2 * qsum(k_star - 1)?) as i64,
        k_star as i64,
    );
    Ok(BarrierProfile {
        n,
        h,
        delta,
        epsilon,
        k_star,
        gamma_star,
        gamma_star_exact,
        gamma_printed,
        delta_one: delta == 1,
    })
}

/// All `k` with `2q(k) > n-h` and `2q(k-1) < n-h`.
pub fn local_maxima_of_g<T: Field>(n: u32, h: T) -> Result<Vec<u64>> {
    check_field_range(n, h)?;
    let g = g_values(n)?; // enforces the size cap
    let nh = T::from_int(i64::from(n)) - h;
    Ok((1..g.len() as u64)
        .filter(|&k| {
            T::from_int(2 * i64::from(k.count_ones())) > nh
                && T::from_int(2 * i64::from((k - 1).count_ones())) < nh
        })
        .collect())
}

/// `𝒱_ξ = min_{H(ζ)<H(ξ)} Φ(ξ,ζ) - H(ξ)`; `None` for `⊞`.
pub fn stability_level<T: Field>(index: &FiltrationIndex<T>, xi: &Config) -> Result<Option<EnergyValue>> {
    Ok(index.stability_level_state(index.state_of(xi)?))
}

/// States other than `⊞` with the largest stability level.
pub fn metastable_set<T: Field>(index: &FiltrationIndex<T>) -> Vec<Config> {
    let h = index.field();
    let mut best: Option<EnergyValue> = None;
    let mut argmax = Vec::new();
    for x in 0..index.top() {
        let Some(v) = index.stability_level_state(x) else {
            continue;
        };
        match best.map(|b| v.cmp_at(b, h)) {
            None | Some(Ordering::Greater) => {
                best = Some(v);
                argmax = vec![x];
            }
            Some(Ordering::Equal) => argmax.push(x),
            Some(Ordering::Less) => {}
        }
    }
    argmax.into_iter().map(|x| index.config(x)).collect()
}

/// Path `σ ∪ γ_i`, `i <= k⁻`, along a reference path translated so that it
/// starts at a boundary edge `(w, y)` of `σ`.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityCertificate {
    pub w: u32,
    pub y: u32,
    /// `min{i : H(γ_i) <= H(⊟)}`
    pub k_minus: u64,
    /// Vertices added to `σ`, in order; path steps that add an existing
    /// vertex are dropped.
    pub steps: Vec<u32>,
    /// `max_i H(σ ∪ γ_i) - H(σ)`, an upper bound for `𝒱_σ`.
    pub peak: EnergyValue,
    /// `H(σ ∪ γ_{k⁻}) - H(σ)`, negative.
    pub end: EnergyValue,
    pub gamma_star: EnergyValue,
}

impl StabilityCertificate {
    /// Replays the path from `σ` and checks every stored claim.
    pub fn verify<T: Field>(&self, sigma: &Config, h: T) -> bool {
        let mut cur = sigma.clone();
        let start = energy_gap(sigma);
        let mut peak = EnergyValue::ZERO;
        for &v in &self.steps {
            if cur.contains(v) {
                return false;
            }
            cur.insert(v);
            peak = peak.max_at(energy_gap(&cur) - start, h);
        }
        let end = energy_gap(&cur) - start;
        peak == self.peak
            && end == self.end
            && end.cmp_at(EnergyValue::ZERO, h) == Ordering::Less
            && peak.cmp_at(self.gamma_star, h) == Ordering::Less
    }
}

/// Constructive bound `𝒱_σ < Γ*` for `σ ∉ {⊟, ⊞}`, `n <= 20`.
pub fn stability_certificate<T: Field>(sigma: &Config, h: T) -> Result<StabilityCertificate> {
    let n = sigma.dim();
    check_field_range(n, h)?;
    if n > MAX_CERTIFICATE_DIM {
        return Err(Error::capability(format!(
            "certificates need n <= {MAX_CERTIFICATE_DIM}, got {n}"
        )));
    }
    let (w, y) = sigma
        .members()
        .find_map(|w| (0..n).map(|i| w ^ (1 << i)).find(|&y| !sigma.contains(y)).map(|y| (w, y)))
        .ok_or_else(|| Error::param("configuration has no boundary edge (it is ⊟ or ⊞)"))?;
    let g = g_values(n)?;
    let k_minus = g
        .iter()
        .position(|gk| gk.cmp_at(EnergyValue::ZERO, h) != Ordering::Greater && gk.s > 0)
        .expect("g(2^n) < 0") as u64;
    let gamma_star = gamma_star_brute(n, h)?.gamma;
    let path = ReferencePath::translated(translation_to_edge(n, VertexId(w), VertexId(y))?)?;
    let mut cur = sigma.clone();
    let mut gap = EnergyValue::ZERO;
    let mut peak = EnergyValue::ZERO;
    let mut steps = Vec::new();
    for i in 1..=k_minus {
        let v = path.added_vertex(i);
        if cur.contains(v) {
            continue;
        }
        gap = gap + flip_delta(&cur, v);
        cur.insert(v);
        steps.push(v);
        peak = peak.max_at(gap, h);
    }
    let cert = StabilityCertificate {
        w,
        y,
        k_minus,
        steps,
        peak,
        end: gap,
        gamma_star,
    };
    if cert.end.cmp_at(EnergyValue::ZERO, h) != Ordering::Less
        || cert.peak.cmp_at(gamma_star, h) != Ordering::Less
    {
        return Err(Error::InvariantViolation(format!(
            "certificate from ({w}, {y}) does not certify a strict bound: peak {:?}, end {:?}",
            cert.peak, cert.end
        )));
    }
    Ok(cert)
}

/// States below `H(γ_{k*})` whose communication heights to both `⊟` and `⊞`
/// equal `H(γ_{k*})`.
pub fn wells_scan<T: Field>(index: &FiltrationIndex<T>, profile: &BarrierProfile<T>) -> Vec<Config> {
    let h = index.field();
    let crit = profile.gamma_star_exact;
    let top = index.top();
    (0..index.num_states() as u32)
        .filter(|&x| {
            index.energy(x).cmp_at(crit, h) == Ordering::Less
                && index.comm_height_states(x, 0).cmp_at(crit, h) == Ordering::Equal
                && index.comm_height_states(x, top).cmp_at(crit, h) == Ordering::Equal
        })
        .map(|x| index.config(x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoperimetry::upsilon;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn cfg(n: u32, vs: &[u32]) -> Config {
        Config::from_vertices(n, vs.iter().copied()).unwrap()
    }

    const HP: f64 = 0.5 + 1e-4;

    #[test]
    fn filtration_examples() {
        let idx = build_filtration(1, 0.5).unwrap();
        let (lo, hi) = (Config::empty(1).unwrap(), Config::full(1).unwrap());
        assert_eq!(comm_height(&idx, &lo, &hi).unwrap().realize(0.5), 0.5);
        let idx = build_filtration(3, 0.5).unwrap();
        let (lo, hi) = (Config::empty(3).unwrap(), Config::full(3).unwrap());
        assert_eq!(comm_height(&idx, &lo, &hi).unwrap().realize(0.5), 3.5);
        let (u2, u4) = (upsilon(3, 2).unwrap(), upsilon(3, 4).unwrap());
        assert_eq!(comm_height(&idx, &u2, &u4).unwrap().realize(0.5), 3.5);
        let s = cfg(3, &[1, 6]);
        assert_eq!(comm_height(&idx, &s, &s).unwrap(), energy_gap(&s));
        assert!(matches!(build_filtration(5, 0.5), Err(Error::Capability(_))));
        assert!(comm_height(&idx, &Config::empty(2).unwrap(), &lo).is_err());
    }

    #[test]
    fn adjacent_heights_are_endpoint_max() {
        let idx = build_filtration(3, HP).unwrap();
        for x in 0..256u32 {
            for v in 0..8 {
                let y = x ^ (1 << v);
                let direct = idx.energy(x).max_at(idx.energy(y), HP);
                let phi = idx.comm_height_states(x, y);
                assert_ne!(phi.cmp_at(direct, HP), Ordering::Greater);
                assert_ne!(phi.cmp_at(idx.energy(x), HP), Ordering::Less);
            }
        }
    }

    #[test]
    fn merge_tree_matches_bottleneck_search() {
        for (n, h) in [(2, 0.7), (3, HP), (3, 0.5), (3, 2.5 + 1e-4)] {
            let idx = build_filtration(n, h).unwrap();
            for src in (0..idx.num_states() as u32).step_by(7) {
                let direct = bottleneck_search(&idx, src);
                for (dst, d) in direct.iter().enumerate() {
                    let phi = idx.comm_height_states(src, dst as u32);
                    assert_eq!(phi.cmp_at(*d, h), Ordering::Equal, "n={n} h={h} {src}->{dst}");
                }
            }
        }
    }

    #[test]
    fn brute_barrier_examples() {
        let b = gamma_star_brute(3, 0.5).unwrap();
        assert_eq!((b.argmax.clone(), b.value), (vec![3], 3.5));
        let b = gamma_star_brute(4, 0.5).unwrap();
        assert_eq!((b.argmax.clone(), b.value), (vec![5], 7.5));
        let b = gamma_star_brute(3, 2.5).unwrap();
        assert_eq!((b.argmax.clone(), b.value), (vec![1], 0.5));
        // degenerate field: g(1) = g(2) = g(3) = 2 at n = 3, h = 1
        let b = gamma_star_brute(3, 1.0).unwrap();
        assert_eq!(b.argmax, vec![1, 2, 3]);
    }

    #[test]
    fn closed_form_examples() {
        let p = gamma_star_closed(3, 0.5).unwrap();
        assert_eq!((p.delta, p.epsilon, p.k_star), (2, 1, 3));
        assert_eq!((p.gamma_star, p.gamma_printed), (3.5, 2.0));
        let p = gamma_star_closed(4, 0.5).unwrap();
        assert_eq!((p.delta, p.epsilon, p.k_star), (2, 0, 5));
        assert_eq!((p.gamma_star, p.gamma_printed), (7.5, 6.0));
        let p = gamma_star_closed(1, 0.5).unwrap();
        assert_eq!((p.k_star, p.gamma_star), (1, 0.5));
        assert!(p.delta_one);
        let p = gamma_star_closed(3, Rational::new(1, 2)).unwrap();
        assert_eq!(p.gamma_star, Rational::new(7, 2));
        assert_eq!(p.gamma_star_exact.realize(Rational::new(1, 2)), Rational::new(7, 2));
        assert!(gamma_star_closed(3, 3.0).is_err());
    }

    #[test]
    fn closed_form_matches_brute_force_exactly() {
        for n in 1..=12u32 {
            for i in 1..60 {
                let h = Rational::new(i64::from(n) * i, 60) + Rational::new(1, 7919);
                if h >= Rational::from_int(i64::from(n)) {
                    continue;
                }
                let p = gamma_star_closed(n, h).unwrap();
                let b = gamma_star_brute(n, h).unwrap();
                assert_eq!(p.gamma_star, b.value, "n={n} h={h}");
                assert_eq!(b.argmax, vec![p.k_star], "n={n} h={h}");
                assert_eq!(p.gamma_star_exact, b.gamma);
            }
        }
    }

    #[test]
    fn local_maxima_examples() {
        let lm = local_maxima_of_g(3, 0.5).unwrap();
        assert!(lm.contains(&3) && lm.contains(&5));
        let g = crate::energy::g_profile(3, 0.5).unwrap();
        for &k in &lm {
            assert!(g[k as usize] > g[k as usize - 1]);
            if (k as usize) + 1 < g.len() {
                assert!(g[k as usize] > g[k as usize + 1]);
            }
        }
        assert!(local_maxima_of_g(3, 2.5).unwrap().contains(&1));
        for n in 1..=10 {
            for h in [0.3, 0.5 + 1e-4, 1.7, 2.2] {
                if h >= f64::from(n) {
                    continue;
                }
                let delta = gamma_star_closed(n, h).unwrap().delta as u32;
                for k in local_maxima_of_g(n, h).unwrap() {
                    assert_eq!(k % 2, 1);
                    assert_eq!(k.count_ones(), delta, "n={n} h={h} k={k}");
                }
            }
        }
    }

    #[test]
    fn stability_levels() {
        let idx = build_filtration(3, HP).unwrap();
        let lo = Config::empty(3).unwrap();
        let v = stability_level(&idx, &lo).unwrap().unwrap();
        assert_eq!(v, gamma_star_brute(3, HP).unwrap().gamma);
        assert_eq!(stability_level(&idx, &Config::full(3).unwrap()).unwrap(), None);
        // {0,1,2} has the strictly lower neighbour {0,1,2,3}
        assert_eq!(
            stability_level(&idx, &cfg(3, &[0, 1, 2])).unwrap(),
            Some(EnergyValue::ZERO)
        );
        let meta = metastable_set(&idx);
        assert_eq!(meta, vec![lo]);
    }

    #[test]
    fn metastable_set_examples() {
        for (n, h) in [(2, HP), (3, HP), (3, 2.5 + 1e-4)] {
            let idx = build_filtration(n, h).unwrap();
            assert_eq!(metastable_set(&idx), vec![Config::empty(n).unwrap()]);
        }
    }

    #[test]
    fn certificate_examples() {
        let s = cfg(3, &[5]);
        let c = stability_certificate(&s, HP).unwrap();
        assert!(c.verify(&s, HP));
        let mut s = Config::full(3).unwrap();
        s.remove(2);
        let c = stability_certificate(&s, HP).unwrap();
        assert!(c.verify(&s, HP));
        assert_eq!(c.steps, vec![2]);
        assert!(stability_certificate(&Config::empty(3).unwrap(), HP).is_err());
        assert!(stability_certificate(&Config::full(3).unwrap(), HP).is_err());
        let big = Config::from_vertices(14, [3, 77, 4000]).unwrap();
        let c = stability_certificate(&big, 1.3 + 1e-5).unwrap();
        assert!(c.verify(&big, 1.3 + 1e-5));
    }

    #[test]
    fn wells_scan_examples() {
        for (n, h) in [(3, HP), (2, 0.7)] {
            let idx = build_filtration(n, h).unwrap();
            let prof = gamma_star_closed(n, h).unwrap();
            assert!(wells_scan(&idx, &prof).is_empty());
        }
    }

    #[test]
    fn unique_maximum_along_reference_path() {
        for n in 1..=8 {
            for h in [0.3 + 1e-5, HP, 1.7 + 1e-5] {
                if h >= f64::from(n) {
                    continue;
                }
                let prof = gamma_star_closed(n, h).unwrap();
                for (k, gk) in g_values(n).unwrap().into_iter().enumerate() {
                    if k as u64 != prof.k_star {
                        assert_eq!(gk.cmp_at(prof.gamma_star_exact, h), Ordering::Less);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bottleneck_ultrametric(a in 0u32..256, b in 0u32..256, c in 0u32..256) {
            let idx = build_filtration(3, HP).unwrap();
            let ab = idx.comm_height_states(a, b);
            prop_assert_eq!(ab, idx.comm_height_states(b, a));
            let bound = idx.comm_height_states(a, c).max_at(idx.comm_height_states(c, b), HP);
            prop_assert_ne!(ab.cmp_at(bound, HP), Ordering::Greater);
        }

        #[test]
        fn certificates_bound_filtration_levels(mask in 1u64..255) {
            let idx = build_filtration(3, HP).unwrap();
            let s = Config::from_mask(3, mask).unwrap();
            let cert = stability_certificate(&s, HP).unwrap();
            prop_assert!(cert.verify(&s, HP));
            let v = stability_level(&idx, &s).unwrap().unwrap();
            prop_assert_ne!(v.cmp_at(cert.peak, HP), Ordering::Greater);
            prop_assert_eq!(v.cmp_at(cert.gamma_star, HP), Ordering::Less);
        }
    }
}
