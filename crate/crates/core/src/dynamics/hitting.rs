//! Exact expected hitting times, committors, gate probabilities and first-hit
//! distributions for `n <= 4`.
//!
//! Hitting times of a set `A` follow the vacate-first convention: from a start
//! inside `A` the chain has to leave before it can hit. From `⊟` this only
//! matters for return probabilities, which are evaluated through the first
//! jump.

use serde::Serialize;

use crate::critical::c_star_enumerate;
use crate::energy::ModelParams;
use crate::error::{Error, Result};
use crate::hypercube::Config;
use crate::landscape::gamma_star_brute;
use crate::scalar::{DoubleDouble, Real};

use super::rates::RateModel;
use super::solver::{
    solve_certified, AbsorbingSystem, Precision, PrecisionMode, DEFAULT_RESIDUAL_BOUND,
};
use super::space::{Lumping, StateSpace, MAX_FULL_SPACE_DIM, MAX_SOLVER_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub precision: PrecisionMode,
    pub residual_bound: f64,
    pub lumping: Lumping,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            precision: PrecisionMode::Auto,
            residual_bound: DEFAULT_RESIDUAL_BOUND,
            lumping: Lumping::Orbits,
        }
    }
}

/// A class of the state space with its solved value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateValue<T> {
    pub representative: Config,
    pub class_size: u64,
    pub value: T,
}

struct Chain {
    space: StateSpace,
    gen: Vec<Vec<(usize, DoubleDouble)>>,
    barrier: f64,
}

fn chain(params: &ModelParams<f64>, lumping: Lumping) -> Result<Chain> {
    if params.n > MAX_SOLVER_DIM {
        return Err(Error::capability(format!(
            "exact solvers need n <= {MAX_SOLVER_DIM}, got {}",
            params.n
        )));
    }
    let space = StateSpace::new(params.n, lumping)?;
    let gen = space.generator(&RateModel::new(params.cast::<DoubleDouble>()));
    let gamma = gamma_star_brute(params.n, params.h)?.value;
    Ok(Chain {
        space,
        gen,
        barrier: (params.beta * gamma).exp(),
    })
}

impl Chain {
    /// System on the classes marked `false` in `known`; known classes enter the
    /// right-hand side through `rhs(c, col)` and otherwise only as exit rate.
    fn system(
        &self,
        known: &[bool],
        columns: usize,
        mut rhs: impl FnMut(usize, usize) -> DoubleDouble,
    ) -> (AbsorbingSystem, Vec<usize>) {
        let unknowns: Vec<usize> = (0..known.len()).filter(|&c| !known[c]).collect();
        let mut index = vec![usize::MAX; known.len()];
        for (i, &c) in unknowns.iter().enumerate() {
            index[c] = i;
        }
        let mut rows = Vec::with_capacity(unknowns.len());
        let mut exit = Vec::with_capacity(unknowns.len());
        for &c in &unknowns {
            let mut row = Vec::new();
            let mut out = DoubleDouble::ZERO;
            for &(j, r) in &self.gen[c] {
                if known[j] {
                    out += r;
                } else {
                    row.push((index[j], r));
                }
            }
            rows.push(row);
            exit.push(out);
        }
        let rhs = (0..columns)
            .map(|col| unknowns.iter().map(|&c| rhs(c, col)).collect())
            .collect();
        (AbsorbingSystem { rows, exit, rhs }, unknowns)
    }

    fn rate_into(&self, c: usize, targets: &[bool]) -> DoubleDouble {
        self.gen[c]
            .iter()
            .filter(|&&(j, _)| targets[j])
            .fold(DoubleDouble::ZERO, |acc, &(_, r)| acc + r)
    }

    /// `Σ_y c(x,y) f(y) / Σ_y c(x,y)`: one jump from class `x`.
    fn jump_average(&self, x: usize, f: &[DoubleDouble]) -> DoubleDouble {
        let (num, den) = self.gen[x]
            .iter()
            .fold((DoubleDouble::ZERO, DoubleDouble::ZERO), |(a, b), &(j, r)| {
                (a + r * f[j], b + r)
            });
        num / den
    }

    fn values(&self, v: &[DoubleDouble]) -> Vec<StateValue<DoubleDouble>> {
        v.iter()
            .enumerate()
            .map(|(c, &value)| StateValue {
                representative: self.space.representative(c),
                class_size: self.space.class_size(c),
                value,
            })
            .collect()
    }

    fn critical_mask(&self, c_star: &[Config]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.space.num_classes()];
        for s in c_star {
            mask[self.space.class_of(s)?] = true;
        }
        Ok(mask)
    }
}

/// Expected hitting times of `⊞`, one value per class.
#[derive(Clone, Debug, Serialize)]
pub struct HittingSolution<T> {
    pub n: u32,
    pub h: f64,
    pub beta: f64,
    pub lumping: Lumping,
    pub precision: Precision,
    pub residual: f64,
    pub residual_bound: f64,
    /// `E_⊟[τ_⊞]`
    pub from_minus: T,
    pub states: Vec<StateValue<T>>,
    #[serde(skip)]
    space: StateSpace,
}

impl<T: Real> HittingSolution<T> {
    pub fn time_at(&self, s: &Config) -> Result<T> {
        Ok(self.states[self.space.class_of(s)?].value)
    }

    /// `true` when the expected time never increases along `path`.
    pub fn is_monotone_along(&self, path: &[Config]) -> Result<bool> {
        let times = path
            .iter()
            .map(|s| self.time_at(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(times.windows(2).all(|w| w[1] <= w[0]))
    }

    /// The same solution rounded into another scalar type.
    pub fn cast<U: Real>(&self) -> HittingSolution<U> {
        let conv = |x: T| U::from_double_double(x.to_double_double());
        HittingSolution {
            n: self.n,
            h: self.h,
            beta: self.beta,
            lumping: self.lumping,
            precision: self.precision,
            residual: self.residual,
            residual_bound: self.residual_bound,
            from_minus: conv(self.from_minus),
            states: self
                .states
                .iter()
                .map(|s| StateValue {
                    representative: s.representative.clone(),
                    class_size: s.class_size,
                    value: conv(s.value),
                })
                .collect(),
            space: self.space.clone(),
        }
    }
}

/// Solves `Σ_ξ' c(ξ,ξ')(t(ξ') - t(ξ)) = -1` for `ξ ≠ ⊞`, `t(⊞) = 0`.
pub fn exact_expected_hitting(
    params: &ModelParams<f64>,
    opts: &SolveOptions,
) -> Result<HittingSolution<DoubleDouble>> {
    let ch = chain(params, opts.lumping)?;
    let plus = ch.space.plus();
    let mut known = vec![false; ch.space.num_classes()];
    known[plus] = true;
    let (sys, unknowns) = ch.system(&known, 1, |_, _| DoubleDouble::ONE);
    let (sol, precision) =
        solve_certified(&sys, opts.precision, ch.barrier, opts.residual_bound)?;
    let mut t = vec![DoubleDouble::ZERO; ch.space.num_classes()];
    for (i, &c) in unknowns.iter().enumerate() {
        t[c] = sol.columns[0][i];
    }
    Ok(HittingSolution {
        n: params.n,
        h: params.h,
        beta: params.beta,
        lumping: opts.lumping,
        precision,
        residual: sol.residual,
        residual_bound: opts.residual_bound,
        from_minus: t[ch.space.minus()],
        states: ch.values(&t),
        space: ch.space,
    })
}

/// `q(ξ) = P_ξ(τ_⊞ < τ_⊟)` with `q(⊟) = 0`, `q(⊞) = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct CommittorSolution {
    pub n: u32,
    pub h: f64,
    pub beta: f64,
    pub precision: Precision,
    pub residual: f64,
    /// `P_⊟(τ_⊞ < τ_⊟)` with `τ_⊟` counted after `⊟` is vacated.
    pub escape: DoubleDouble,
    pub states: Vec<StateValue<DoubleDouble>>,
    #[serde(skip)]
    space: StateSpace,
}

impl CommittorSolution {
    pub fn at(&self, s: &Config) -> Result<DoubleDouble> {
        Ok(self.states[self.space.class_of(s)?].value)
    }
}

fn committor_on(ch: &Chain, opts: &SolveOptions) -> Result<(Vec<DoubleDouble>, f64, Precision)> {
    let (minus, plus) = (ch.space.minus(), ch.space.plus());
    let mut known = vec![false; ch.space.num_classes()];
    known[minus] = true;
    known[plus] = true;
    let mut target = vec![false; ch.space.num_classes()];
    target[plus] = true;
    let (sys, unknowns) = ch.system(&known, 1, |c, _| ch.rate_into(c, &target));
    let (sol, precision) =
        solve_certified(&sys, opts.precision, ch.barrier, opts.residual_bound)?;
    let mut q = vec![DoubleDouble::ZERO; ch.space.num_classes()];
    q[plus] = DoubleDouble::ONE;
    for (i, &c) in unknowns.iter().enumerate() {
        q[c] = sol.columns[0][i];
    }
    Ok((q, sol.residual, precision))
}

pub fn committor(params: &ModelParams<f64>, opts: &SolveOptions) -> Result<CommittorSolution> {
    let ch = chain(params, opts.lumping)?;
    let (q, residual, precision) = committor_on(&ch, opts)?;
    Ok(CommittorSolution {
        n: params.n,
        h: params.h,
        beta: params.beta,
        precision,
        residual,
        escape: ch.jump_average(ch.space.minus(), &q),
        states: ch.values(&q),
        space: ch.space,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GateReport {
    /// `P_⊟(τ_C* < τ_⊞ | τ_⊞ < τ_⊟)`
    pub gate: DoubleDouble,
    /// `P_⊟(τ_⊞ < τ_⊟)`
    pub escape: DoubleDouble,
    pub precision: Precision,
    pub residual: f64,
}

/// Probability that an excursion from `⊟` that reaches `⊞` before returning
/// passes through `C*` first.
///
/// With `u` harmonic off `{⊟, ⊞} ∪ C*`, `u = 0` on `⊟, ⊞` and `u = q` on
/// `C*`, the numerator is the one-jump average of `u` from `⊟`.
pub fn gate_probability(params: &ModelParams<f64>, opts: &SolveOptions) -> Result<GateReport> {
    let ch = chain(params, opts.lumping)?;
    let c_star = c_star_enumerate(params.n, params.h)?;
    let crit = ch.critical_mask(&c_star)?;
    let (q, r1, p1) = committor_on(&ch, opts)?;
    let (minus, plus) = (ch.space.minus(), ch.space.plus());
    let mut known = crit.clone();
    known[minus] = true;
    known[plus] = true;
    let (sys, unknowns) = ch.system(&known, 1, |c, _| {
        ch.gen[c]
            .iter()
            .filter(|&&(j, _)| crit[j])
            .fold(DoubleDouble::ZERO, |acc, &(j, r)| acc + r * q[j])
    });
    let (sol, p2) = solve_certified(&sys, opts.precision, ch.barrier, opts.residual_bound)?;
    let mut u = vec![DoubleDouble::ZERO; ch.space.num_classes()];
    for c in 0..u.len() {
        if crit[c] && c != minus && c != plus {
            u[c] = q[c];
        }
    }
    for (i, &c) in unknowns.iter().enumerate() {
        u[c] = sol.columns[0][i];
    }
    let escape = ch.jump_average(minus, &q);
    Ok(GateReport {
        gate: ch.jump_average(minus, &u) / escape,
        escape,
        precision: if p1 == Precision::Extended { p1 } else { p2 },
        residual: r1.max(sol.residual),
    })
}

/// Law of the first entrance point into `C*` from `⊟`, on the event that
/// `C*` is reached before `⊞`.
#[derive(Clone, Debug, Serialize)]
pub struct FirstHitDistribution {
    pub elements: Vec<Config>,
    pub probabilities: Vec<DoubleDouble>,
    /// `P_⊟(τ_C* < τ_⊞)`
    pub reach: DoubleDouble,
    /// `Orbits`: the split over `C*` is uniform by symmetry, not solved.
    pub lumping: Lumping,
    pub precision: Precision,
    pub residual: f64,
}

impl FirstHitDistribution {
    /// `max_x |p(x) - 1/|C*||`
    pub fn max_deviation_from_uniform(&self) -> DoubleDouble {
        let u = DoubleDouble::ONE / DoubleDouble::from_i64_exact(self.elements.len() as i64);
        self.probabilities
            .iter()
            .map(|&p| (p - u).abs())
            .fold(DoubleDouble::ZERO, |a, b| if b > a { b } else { a })
    }
}

/// Exact first-hit law. `n <= 3` solves on every configuration with one
/// right-hand side per element of `C*`; `n = 4` solves the lumped chain.
pub fn first_hit_distribution(
    params: &ModelParams<f64>,
    opts: &SolveOptions,
) -> Result<FirstHitDistribution> {
    let lumping = if params.n <= MAX_FULL_SPACE_DIM {
        Lumping::Full
    } else {
        Lumping::Orbits
    };
    let ch = chain(params, lumping)?;
    let c_star = c_star_enumerate(params.n, params.h)?;
    let crit = ch.critical_mask(&c_star)?;
    let plus = ch.space.plus();
    let mut known = crit.clone();
    known[plus] = true;
    let targets: Vec<usize> = match lumping {
        Lumping::Full => c_star
            .iter()
            .map(|s| ch.space.class_of(s))
            .collect::<Result<_>>()?,
        Lumping::Orbits => vec![ch.space.class_of(&c_star[0])?],
    };
    if known[ch.space.minus()] {
        return Err(Error::param("⊟ is itself critical"));
    }
    let (sys, unknowns) = ch.system(&known, targets.len(), |c, col| {
        ch.gen[c]
            .iter()
            .filter(|&&(j, _)| j == targets[col])
            .fold(DoubleDouble::ZERO, |acc, &(_, r)| acc + r)
    });
    let (sol, precision) =
        solve_certified(&sys, opts.precision, ch.barrier, opts.residual_bound)?;
    let at_minus = unknowns
        .iter()
        .position(|&c| c == ch.space.minus())
        .expect("⊟ is unknown");
    let hits: Vec<DoubleDouble> = sol.columns.iter().map(|c| c[at_minus]).collect();
    let reach: DoubleDouble = hits.iter().copied().sum();
    let probabilities = match lumping {
        Lumping::Full => hits.iter().map(|&p| p / reach).collect(),
        Lumping::Orbits => {
            let u = DoubleDouble::ONE / DoubleDouble::from_i64_exact(c_star.len() as i64);
            vec![u; c_star.len()]
        }
    };
    Ok(FirstHitDistribution {
        elements: c_star,
        probabilities,
        reach,
        lumping,
        precision,
        residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoperimetry::upsilon;

    fn params(n: u32, h: f64, beta: f64) -> ModelParams<f64> {
        ModelParams::new_degenerate(n, h).unwrap().with_beta(beta).unwrap()
    }

    fn full() -> SolveOptions {
        SolveOptions {
            lumping: Lumping::Full,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn one_dimensional_closed_form() {
        for beta in [0.0, 1.0, 5.0, 20.0] {
            let p = params(1, 0.5, beta);
            let sol = exact_expected_hitting(&p, &SolveOptions::default()).unwrap();
            let expected = (DoubleDouble::from(beta) * DoubleDouble::from(0.5)).exp() + DoubleDouble::ONE;
            let rel = ((sol.from_minus - expected) / expected).abs().hi();
            assert!(rel < 1e-12, "beta {beta}: {rel:e}");
            // one step from a singleton: ⊟ or ⊞, each at rate 1
            let one = Config::from_vertices(1, [0]).unwrap();
            let t1 = sol.time_at(&one).unwrap();
            let half = DoubleDouble::from(0.5);
            assert!((t1 - (half + half * sol.from_minus)).abs().hi() < 1e-12 * t1.hi());
        }
    }

    #[test]
    fn lumped_and_full_agree() {
        for (n, h, beta) in [(2, 0.7, 1.0), (3, 0.5001, 2.0), (3, 1.3, 0.5)] {
            let p = params(n, h, beta);
            let a = exact_expected_hitting(&p, &SolveOptions::default()).unwrap();
            let b = exact_expected_hitting(&p, &full()).unwrap();
            assert!(((a.from_minus - b.from_minus) / b.from_minus).abs().hi() < 1e-13);
            for m in 0..(1u64 << (1 << n)) {
                let s = Config::from_mask(n, m).unwrap();
                let (x, y) = (a.time_at(&s).unwrap(), b.time_at(&s).unwrap());
                assert!((x - y).abs().hi() <= 1e-12 * y.hi().max(1.0));
            }
        }
    }

    /// At `β = 0` the number of occupied vertices is a birth-death chain on
    /// `0..=2^n` with up-rate `N - w` and down-rate `w`.
    fn unit_rate_walk(n: u32) -> f64 {
        let nv = (1u64 << n) as f64;
        let (mut total, mut prev) = (0.0, 0.0);
        for w in 0..(1u64 << n) {
            let w = w as f64;
            let step = (1.0 + w * prev) / (nv - w);
            total += step;
            prev = step;
        }
        total
    }

    #[test]
    fn infinite_temperature_random_walk() {
        for n in 1..=4 {
            let sol = exact_expected_hitting(&params(n, 0.3, 0.0), &SolveOptions::default()).unwrap();
            assert!((sol.from_minus.hi() / unit_rate_walk(n) - 1.0).abs() < 1e-13, "n = {n}");
        }
        assert!((unit_rate_walk(3) - 39.009_523_809_523_8).abs() < 1e-9);
    }

    #[test]
    fn one_step_consistency_next_to_plus() {
        let p = params(3, 0.5001, 3.0);
        let sol = exact_expected_hitting(&p, &SolveOptions::default()).unwrap();
        let rates = RateModel::new(p);
        let x = Config::full(3).unwrap().with_toggled(0);
        let mut num = 1.0;
        let mut den = 0.0;
        for v in 0..8 {
            let r = rates.rate_at(&x, v);
            num += r * sol.time_at(&x.with_toggled(v)).unwrap().hi();
            den += r;
        }
        let t = sol.time_at(&x).unwrap().hi();
        assert!((t - num / den).abs() < 1e-12 * t);
        assert!(sol.residual < 1e-8);
        assert!(sol.states.iter().all(|s| s.value >= DoubleDouble::ZERO));
    }

    #[test]
    fn reference_tail_is_monotone() {
        for beta in [1.0, 4.0] {
            let p = params(3, 0.5001, beta);
            let sol = exact_expected_hitting(&p, &SolveOptions::default()).unwrap();
            let tail: Vec<Config> = (3..=8).map(|k| upsilon(3, k).unwrap()).collect();
            assert!(sol.is_monotone_along(&tail).unwrap());
        }
    }

    #[test]
    fn committor_examples() {
        let c = committor(&params(1, 0.5, 2.0), &SolveOptions::default()).unwrap();
        let one = Config::from_vertices(1, [1]).unwrap();
        assert!((c.at(&one).unwrap() - DoubleDouble::from(0.5)).abs().hi() < 1e-15);
        assert_eq!(c.at(&Config::empty(1).unwrap()).unwrap(), DoubleDouble::ZERO);
        assert_eq!(c.at(&Config::full(1).unwrap()).unwrap(), DoubleDouble::ONE);
        assert!((c.escape - DoubleDouble::from(0.5)).abs().hi() < 1e-15);

        let p = params(3, 0.5001, 2.0);
        let a = committor(&p, &SolveOptions::default()).unwrap();
        let b = committor(&p, &full()).unwrap();
        assert!((a.escape - b.escape).abs().hi() < 1e-15 * b.escape.hi().max(1e-300) + 1e-300);
        for s in &b.states {
            let v = s.value.hi();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn gate_probability_examples() {
        let g = gate_probability(&params(1, 0.5, 2.0), &SolveOptions::default()).unwrap();
        assert!((g.gate - DoubleDouble::ONE).abs().hi() < 1e-15);
        let gates: Vec<f64> = [2.0, 4.0, 6.0]
            .iter()
            .map(|&b| {
                gate_probability(&params(3, 0.5001, b), &SolveOptions::default())
                    .unwrap()
                    .gate
                    .hi()
            })
            .collect();
        assert!(gates[0] < gates[1] && gates[1] < gates[2], "{gates:?}");
        assert!(gates[2] > 0.95);
        let full = gate_probability(&params(3, 0.5001, 4.0), &full()).unwrap();
        assert!((full.gate.hi() - gates[1]).abs() < 1e-13);
    }

    #[test]
    fn first_hit_examples() {
        let d = first_hit_distribution(&params(1, 0.5, 2.0), &SolveOptions::default()).unwrap();
        assert_eq!(d.elements.len(), 2);
        for p in &d.probabilities {
            assert!((p.hi() - 0.5).abs() < 1e-15);
        }
        let d = first_hit_distribution(&params(3, 0.5001, 2.0), &SolveOptions::default()).unwrap();
        assert_eq!(d.elements.len(), 24);
        let total: DoubleDouble = d.probabilities.iter().copied().sum();
        assert!((total - DoubleDouble::ONE).abs().hi() < 1e-25);
        assert!(d.max_deviation_from_uniform().hi() < 1e-12);
        assert!(d.reach.hi() > 0.9 && d.reach.hi() < 1.0);
    }

    #[test]
    fn caps() {
        assert!(matches!(
            exact_expected_hitting(&params(5, 0.5001, 1.0), &SolveOptions::default()),
            Err(Error::Capability(_))
        ));
    }
}
