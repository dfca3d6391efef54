//! Critical configurations `C*`, their downhill neighbours `P*` (towards `⊟`)
//! and `B*` (towards `⊞`), the neighbour counts `N±`, the variational
//! prefactor `K`, and evaluations of the printed counting formulas.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::energy::{flip_delta, EnergyValue};
use crate::error::{Error, Result};
use crate::hypercube::{check_dim, orbit, Config};
use crate::isoperimetry::{brute_min_boundary, upsilon, MAX_BRUTE_DIM};
use crate::landscape::{gamma_star_closed, subcube_dim, BarrierProfile, FiltrationIndex};
use crate::scalar::Field;

/// Largest dimension for which `C*` is enumerated.
pub const MAX_CRITICAL_DIM: u32 = 5;

/// Orbit of `Υ_{k*}` under the automorphism group, sorted. For `n <= 4` the
/// orbit is checked against the exhaustive list of boundary minimizers.
pub fn c_star_enumerate<T: Field>(n: u32, h: T) -> Result<Vec<Config>> {
    check_dim(n)?;
    if n > MAX_CRITICAL_DIM {
        return Err(Error::capability(format!(
            "critical-set enumeration needs n <= {MAX_CRITICAL_DIM}, got {n}"
        )));
    }
    let profile = gamma_star_closed(n, h)?;
    let c_star: Vec<Config> = orbit(&upsilon(n, profile.k_star)?)?.into_iter().collect();
    if n <= MAX_BRUTE_DIM {
        let catalog = brute_min_boundary(n, profile.k_star)?;
        if catalog.minimizers != c_star {
            return Err(Error::InvariantViolation(format!(
                "orbit of Υ_{} has {} elements but {} minimizers exist",
                profile.k_star,
                c_star.len(),
                catalog.minimizers.len()
            )));
        }
    }
    Ok(c_star)
}

fn neighbourhood(set: &[Config]) -> BTreeSet<Config> {
    let mut out = BTreeSet::new();
    for s in set {
        for v in 0..s.num_vertices() as u32 {
            out.insert(s.with_toggled(v));
        }
    }
    out
}

/// `P*`: neighbours `ξ` of `C*` with `Φ(ξ,⊟) < Φ(ξ,⊞)`.
/// `B*`: neighbours `σ` of `C*` with `Φ(σ,⊞) < H(γ_{k*})`.
pub fn p_star_b_star<T: Field>(
    index: &FiltrationIndex<T>,
    profile: &BarrierProfile<T>,
    c_star: &[Config],
) -> Result<(Vec<Config>, Vec<Config>)> {
    let h = index.field();
    let top = index.top();
    let crit = profile.gamma_star_exact;
    let mut p_star = Vec::new();
    let mut b_star = Vec::new();
    for xi in neighbourhood(c_star) {
        let x = index.state_of(&xi)?;
        let to_minus = index.comm_height_states(x, 0);
        let to_plus = index.comm_height_states(x, top);
        if to_minus.cmp_at(to_plus, h) == Ordering::Less {
            p_star.push(xi.clone());
        }
        if to_plus.cmp_at(crit, h) == Ordering::Less {
            b_star.push(xi);
        }
    }
    Ok((p_star, b_star))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborCounts {
    /// Neighbours in `P*`.
    pub n_minus: u32,
    /// Neighbours in `B*`.
    pub n_plus: u32,
}

/// `N±(σ)` by adjacency into `P*`/`B*`, recomputed from the signs of the
/// single-flip energy differences; the two routes must agree.
pub fn neighbor_counts<T: Field>(
    sigma: &Config,
    c_star: &[Config],
    p_star: &[Config],
    b_star: &[Config],
    h: T,
) -> Result<NeighborCounts> {
    if c_star.binary_search(sigma).is_err() {
        return Err(Error::param(format!("{sigma} is not a critical configuration")));
    }
    let mut by_sets = NeighborCounts {
        n_minus: 0,
        n_plus: 0,
    };
    let mut by_signs = by_sets;
    for v in 0..sigma.num_vertices() as u32 {
        let nb = sigma.with_toggled(v);
        if p_star.binary_search(&nb).is_ok() {
            by_sets.n_minus += 1;
        }
        if b_star.binary_search(&nb).is_ok() {
            by_sets.n_plus += 1;
        }
        if flip_delta(sigma, v).cmp_at(EnergyValue::ZERO, h) == Ordering::Less {
            if sigma.contains(v) {
                by_signs.n_minus += 1;
            } else {
                by_signs.n_plus += 1;
            }
        }
    }
    if by_sets != by_signs {
        return Err(Error::InvariantViolation(format!(
            "neighbour counts of {sigma} disagree: sets give {by_sets:?}, flip signs give {by_signs:?}"
        )));
    }
    Ok(by_sets)
}

/// Evaluations of the printed counting formulas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrintedCounts<T> {
    /// Stepwise construction count of `C*` (sub-cube choices times external
    /// coordinates times the final vertex).
    pub c_star_stepwise: Option<u64>,
    /// `n!·2^{n-4} / ((n-⌈n-h-2⌉-1)!·⌈n-h-2δ+2⌉)`
    pub c_star_printed: Option<T>,
    /// `⌈h⌉! / (n!·2^{n-4}·(3-ε))`
    pub k_printed: T,
    /// Claimed `N⁻`.
    pub n_minus_printed: u32,
    /// Claimed `N⁺ = ⌈n-h-2δ+2⌉`.
    pub n_plus_printed: i64,
}

fn binomial(n: i64, k: i64) -> Option<u128> {
    if k < 0 || n < 0 || k > n {
        return None;
    }
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

fn factorial<T: Field>(m: i64) -> Option<T> {
    (m >= 0).then(|| (1..=m).fold(T::one(), |acc, i| acc * T::from_int(i)))
}

pub fn counts_printed<T: Field>(n: u32, h: T) -> Result<PrintedCounts<T>> {
    let profile = gamma_star_closed(n, h)?;
    let (delta, epsilon) = (profile.delta, profile.epsilon);
    let ni = i64::from(n);
    let a = |i: i64| subcube_dim(n, h, i);
    let c_star_stepwise = if delta == 1 {
        Some(1u64 << n)
    } else {
        let mut acc = Some(
            binomial(ni, a(1))
                .and_then(|b| b.checked_mul(1u128 << (ni - a(1))))
                .and_then(|b| b.checked_mul((ni - a(1)) as u128)),
        )
        .flatten();
        for i in 2..delta {
            acc = acc
                .and_then(|x| x.checked_mul(binomial(a(i - 1), a(i))?))
                .and_then(|x| x.checked_mul(1u128 << (a(i - 1) - a(i))))
                .and_then(|x| x.checked_mul(2));
        }
        acc.and_then(|x| x.checked_mul(1u128 << a(delta - 1)))
            .and_then(|x| u64::try_from(x).ok())
    };
    let base = factorial::<T>(ni).expect("n >= 1") * T::pow2(ni - 4);
    let last = a(delta - 1);
    let c_star_printed = factorial::<T>(ni - a(1) - 1)
        .filter(|_| last != 0)
        .map(|f| base / (f * T::from_int(last)));
    let k_printed = factorial::<T>(h.ceil_int()).expect("h > 0") / (base * T::from_int(3 - epsilon));
    Ok(PrintedCounts {
        c_star_stepwise,
        c_star_printed,
        k_printed,
        n_minus_printed: 1,
        n_plus_printed: last,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalReport<T> {
    pub n: u32,
    pub h: T,
    pub k_star: u64,
    pub c_star: Vec<Config>,
    /// Number of automorphism orbits in `c_star` (1 by construction).
    pub c_star_orbits: usize,
    pub p_star: Vec<Config>,
    pub b_star: Vec<Config>,
    /// Per element of `c_star`.
    pub counts: Vec<NeighborCounts>,
    pub h2_holds: bool,
    pub c_star_non_adjacent: bool,
    /// States in the wells scan; empty for admissible `h`.
    pub wells: Vec<Config>,
    pub k_variational: Option<T>,
    pub printed: PrintedCounts<T>,
}

impl<T: Field> CriticalReport<T> {
    /// Common `(N⁻, N⁺)` when H2 holds.
    pub fn constant_counts(&self) -> Option<NeighborCounts> {
        self.h2_holds.then(|| self.counts[0])
    }
}

/// `N⁻` and `N⁺` constant on `C*`.
pub fn h2_check<T>(report: &CriticalReport<T>) -> bool {
    report.counts.windows(2).all(|w| w[0] == w[1])
}

pub fn pairwise_non_adjacent(c_star: &[Config]) -> bool {
    let set: BTreeSet<&Config> = c_star.iter().collect();
    c_star.iter().all(|s| {
        (0..s.num_vertices() as u32).all(|v| !set.contains(&s.with_toggled(v)))
    })
}

/// `1/K = Σ_{σ∈C*} N⁻N⁺/(N⁻+N⁺)`.
pub fn prefactor_variational<T: Field>(report: &CriticalReport<T>) -> Result<T> {
    if !report.wells.is_empty() {
        return Err(Error::InvariantViolation(format!(
            "{} wells found; the simplified variational formula does not apply",
            report.wells.len()
        )));
    }
    if !report.c_star_non_adjacent {
        return Err(Error::InvariantViolation(
            "critical configurations are adjacent; the simplified variational formula does not apply".into(),
        ));
    }
    let inv = report.counts.iter().fold(T::zero(), |acc, c| {
        let (m, p) = (i64::from(c.n_minus), i64::from(c.n_plus));
        if m + p == 0 {
            acc
        } else {
            acc + T::from_int(m * p) / T::from_int(m + p)
        }
    });
    if !(inv > T::zero()) {
        return Err(Error::InvariantViolation(
            "capacity sum over C* vanishes".into(),
        ));
    }
    Ok(T::one() / inv)
}

/// Full critical-structure report from the filtration, `n <= 4`.
pub fn critical_report<T: Field>(
    index: &FiltrationIndex<T>,
    profile: &BarrierProfile<T>,
) -> Result<CriticalReport<T>> {
    let (n, h) = (index.dim(), index.field());
    let c_star = c_star_enumerate(n, h)?;
    let (p_star, b_star) = p_star_b_star(index, profile, &c_star)?;
    let counts = c_star
        .iter()
        .map(|s| neighbor_counts(s, &c_star, &p_star, &b_star, h))
        .collect::<Result<Vec<_>>>()?;
    let c_star_orbits = c_star
        .iter()
        .map(crate::hypercube::canonical_form)
        .collect::<Result<BTreeSet<_>>>()?
        .len();
    let mut report = CriticalReport {
        n,
        h,
        k_star: profile.k_star,
        c_star_non_adjacent: pairwise_non_adjacent(&c_star),
        c_star,
        c_star_orbits,
        p_star,
        b_star,
        counts,
        h2_holds: false,
        wells: crate::landscape::wells_scan(index, profile),
        k_variational: None,
        printed: counts_printed(n, h)?,
    };
    report.h2_holds = h2_check(&report);
    report.k_variational = prefactor_variational(&report).ok();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StateClass {
    /// `Φ(σ,⊟) < H(γ_{k*})`
    MinusBasin,
    /// `Φ(σ,⊞) < H(γ_{k*})`
    PlusBasin,
    Critical,
    /// In `S*` but in none of the above.
    Other,
    /// `Φ(σ,⊟) > H(γ_{k*})`, outside `S*`.
    AboveBarrier,
}

pub fn classify_state<T: Field>(
    index: &FiltrationIndex<T>,
    profile: &BarrierProfile<T>,
    c_star: &[Config],
    xi: &Config,
) -> Result<StateClass> {
    let h = index.field();
    let x = index.state_of(xi)?;
    let crit = profile.gamma_star_exact;
    if c_star.binary_search(xi).is_ok() {
        return Ok(StateClass::Critical);
    }
    let to_minus = index.comm_height_states(x, 0).cmp_at(crit, h);
    Ok(if to_minus == Ordering::Less {
        StateClass::MinusBasin
    } else if index.comm_height_states(x, index.top()).cmp_at(crit, h) == Ordering::Less {
        StateClass::PlusBasin
    } else if to_minus == Ordering::Equal {
        StateClass::Other
    } else {
        StateClass::AboveBarrier
    })
}

/// Checks the three defining conditions of the critical/protocritical pair:
/// every `P*` element touches `C*`, lies on the `⊟` side, and every `C*`
/// element reaches `⊞` within the barrier while avoiding the `⊟` side.
pub fn verify_critical_conditions<T: Field>(
    index: &FiltrationIndex<T>,
    profile: &BarrierProfile<T>,
    report: &CriticalReport<T>,
) -> Result<bool> {
    let h = index.field();
    let top = index.top();
    let crit = profile.gamma_star_exact;
    let minus_side = |x: u32| {
        index
            .comm_height_states(x, 0)
            .cmp_at(index.comm_height_states(x, top), h)
            == Ordering::Less
    };
    for p in &report.p_star {
        let x = index.state_of(p)?;
        let touches = (0..p.num_vertices() as u32)
            .any(|v| report.c_star.binary_search(&p.with_toggled(v)).is_ok());
        if !touches || !minus_side(x) {
            return Ok(false);
        }
    }
    let nv = 1u32 << index.dim();
    for c in &report.c_star {
        let start = index.state_of(c)?;
        let allowed = |x: u32| {
            index.energy(x).cmp_at(crit, h) != Ordering::Greater && !minus_side(x)
        };
        if !allowed(start) {
            return Ok(false);
        }
        let mut seen = vec![false; index.num_states()];
        let mut queue = VecDeque::from([start]);
        seen[start as usize] = true;
        let mut reached = false;
        while let Some(x) = queue.pop_front() {
            if x == top {
                reached = true;
                break;
            }
            for v in 0..nv {
                let y = x ^ (1 << v);
                if !seen[y as usize] && allowed(y) {
                    seen[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
        if !reached {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{apply_automorphism, edge_counts, Automorphism};
    use crate::landscape::build_filtration;
    use crate::scalar::Rational;

    const HP: f64 = 0.5 + 1e-4;

    fn report(n: u32, h: f64) -> (FiltrationIndex<f64>, BarrierProfile<f64>, CriticalReport<f64>) {
        let idx = build_filtration(n, h).unwrap();
        let prof = gamma_star_closed(n, h).unwrap();
        let rep = critical_report(&idx, &prof).unwrap();
        (idx, prof, rep)
    }

    #[test]
    fn critical_set_sizes() {
        assert_eq!(c_star_enumerate(3, 0.5).unwrap().len(), 24);
        assert_eq!(c_star_enumerate(4, 0.5).unwrap().len(), 192);
        assert_eq!(c_star_enumerate(1, 0.5).unwrap().len(), 2);
        let c5 = c_star_enumerate(5, 0.5 + 1e-4).unwrap();
        let k = gamma_star_closed(5, 0.5 + 1e-4).unwrap().k_star;
        assert!(c5.iter().all(|s| s.len() as u64 == k));
        assert!(matches!(c_star_enumerate(6, 0.5), Err(Error::Capability(_))));
    }

    #[test]
    fn square_plus_pendant_structure() {
        let (_, _, rep) = report(4, HP);
        assert_eq!(rep.c_star.len(), 192);
        let squares: Vec<Config> = orbit(&upsilon(4, 4).unwrap()).unwrap().into_iter().collect();
        let six: Vec<Config> = orbit(&upsilon(4, 6).unwrap()).unwrap().into_iter().collect();
        assert_eq!(rep.p_star, squares);
        assert_eq!(rep.b_star, six);
        assert!(rep.h2_holds);
        assert_eq!(rep.constant_counts(), Some(NeighborCounts { n_minus: 1, n_plus: 2 }));
        assert!(rep.wells.is_empty());
        assert!((rep.k_variational.unwrap() - 1.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn three_path_structure() {
        let (idx, prof, rep) = report(3, HP);
        assert!(rep.h2_holds);
        assert_eq!(rep.constant_counts(), Some(NeighborCounts { n_minus: 2, n_plus: 1 }));
        assert!((rep.k_variational.unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert!(verify_critical_conditions(&idx, &prof, &rep).unwrap());
        for s in &rep.c_star {
            assert_eq!(edge_counts(s).boundary, 5);
        }
    }

    #[test]
    fn one_dimensional_structure() {
        let (idx, prof, rep) = report(1, 0.5);
        assert_eq!(rep.p_star, vec![Config::empty(1).unwrap()]);
        assert_eq!(rep.b_star, vec![Config::full(1).unwrap()]);
        assert_eq!(rep.constant_counts(), Some(NeighborCounts { n_minus: 1, n_plus: 1 }));
        assert_eq!(rep.k_variational, Some(1.0));
        assert!(verify_critical_conditions(&idx, &prof, &rep).unwrap());
        let exact = build_filtration(1, Rational::new(1, 2)).unwrap();
        let prof = gamma_star_closed(1, Rational::new(1, 2)).unwrap();
        let rep = critical_report(&exact, &prof).unwrap();
        assert_eq!(rep.k_variational, Some(Rational::from_int(1)));
    }

    #[test]
    fn printed_counts() {
        let p = counts_printed(4, 0.5).unwrap();
        assert_eq!(p.c_star_stepwise, Some(192));
        assert_eq!(p.c_star_printed, Some(12.0));
        assert_eq!(p.n_plus_printed, 2);
        let p = counts_printed(3, 0.5).unwrap();
        assert_eq!(p.c_star_stepwise, Some(48));
        let p = counts_printed(1, 0.5).unwrap();
        assert_eq!(p.k_printed, 4.0);
        assert_eq!(p.c_star_stepwise, Some(2));
        let p = counts_printed(4, Rational::new(1, 2)).unwrap();
        assert_eq!(p.k_printed, Rational::new(1, 72));
    }

    #[test]
    fn neighbor_count_errors() {
        let (_, _, rep) = report(3, HP);
        let outsider = Config::from_vertices(3, [0, 7]).unwrap();
        assert!(neighbor_counts(&outsider, &rep.c_star, &rep.p_star, &rep.b_star, HP).is_err());
    }

    #[test]
    fn classification() {
        let (idx, prof, rep) = report(3, HP);
        let cls = |s: &Config| classify_state(&idx, &prof, &rep.c_star, s).unwrap();
        assert_eq!(cls(&Config::empty(3).unwrap()), StateClass::MinusBasin);
        assert_eq!(cls(&Config::full(3).unwrap()), StateClass::PlusBasin);
        assert_eq!(cls(&upsilon(3, 3).unwrap()), StateClass::Critical);
        for m in 0..256u64 {
            assert_ne!(cls(&Config::from_mask(3, m).unwrap()), StateClass::Other);
        }
    }

    #[test]
    fn prefactor_is_relabeling_invariant() {
        let (idx, prof, rep) = report(3, HP);
        let phi = Automorphism::new(vec![2, 0, 1], 0b101).unwrap();
        let mut relabeled = rep.clone();
        relabeled.c_star = rep
            .c_star
            .iter()
            .map(|s| apply_automorphism(&phi, s).unwrap())
            .collect();
        relabeled.c_star.sort();
        let (p, b) = p_star_b_star(&idx, &prof, &relabeled.c_star).unwrap();
        relabeled.counts = relabeled
            .c_star
            .iter()
            .map(|s| neighbor_counts(s, &relabeled.c_star, &p, &b, HP).unwrap())
            .collect();
        assert_eq!(relabeled.c_star, rep.c_star);
        assert_eq!(
            prefactor_variational(&relabeled).unwrap(),
            prefactor_variational(&rep).unwrap()
        );
    }

    #[test]
    fn wells_block_the_prefactor() {
        let (_, _, mut rep) = report(3, HP);
        rep.wells.push(Config::empty(3).unwrap());
        assert!(matches!(prefactor_variational(&rep), Err(Error::InvariantViolation(_))));
    }
}
