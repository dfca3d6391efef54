//! Continuous-time Glauber dynamics.
//!
//! * [`rates`]: flip rates
//! * [`space`]: explicit (optionally orbit-lumped) state spaces
//! * [`solver`]: elimination solver with double and double-double modes
//! * [`hitting`]: expected hitting times, committors, gate and first-hit laws
//! * [`kmc`]: kinetic Monte Carlo

pub mod hitting;
pub mod kmc;
pub mod rates;
pub mod solver;
pub mod space;

pub use hitting::{
    committor, exact_expected_hitting, first_hit_distribution, gate_probability,
    CommittorSolution, FirstHitDistribution, GateReport, HittingSolution, SolveOptions,
    StateValue,
};
pub use kmc::{
    chi_square, estimated_events, kmc_run, replica_seed, simulate, KmcSample, SimulationOptions,
    SimulationStats,
};
pub use rates::{flip_rate, RateModel};
pub use solver::{Precision, PrecisionMode, DEFAULT_RESIDUAL_BOUND, EXTENDED_THRESHOLD};
pub use space::{Lumping, StateSpace};

use serde::Serialize;

use crate::critical::{c_star_enumerate, critical_report};
use crate::energy::ModelParams;
use crate::error::Result;
use crate::hypercube::Config;
use crate::landscape::{build_filtration, gamma_star_brute, gamma_star_closed};
use crate::scalar::{DoubleDouble, Real};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AsymptoticRow {
    pub beta: f64,
    pub expected_hitting: DoubleDouble,
    /// `exp(-βΓ*)·E_⊟[τ_⊞]`
    pub scaled: DoubleDouble,
    /// `scaled / K`, when `K` is available.
    pub ratio: Option<DoubleDouble>,
    pub residual: f64,
    pub precision: Precision,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub n: u32,
    pub h: f64,
    pub gamma_star: f64,
    /// Prefactor from the variational formula over the enumerated `C*`.
    pub k_variational: Option<f64>,
    pub rows: Vec<AsymptoticRow>,
}

/// `E_⊟[τ_⊞]` against `K·exp(βΓ*)` over a list of inverse temperatures,
/// `n <= 4`.
pub fn asymptotic_report(
    n: u32,
    h: f64,
    betas: &[f64],
    opts: &SolveOptions,
) -> Result<AsymptoticReport> {
    let base = ModelParams::new_degenerate(n, h)?;
    let gamma = gamma_star_brute(n, h)?.value;
    let index = build_filtration(n, h)?;
    let profile = gamma_star_closed(n, h)?;
    let k = critical_report(&index, &profile)?.k_variational;
    let rows = betas
        .iter()
        .map(|&beta| {
            let sol = exact_expected_hitting(&base.with_beta(beta)?, opts)?;
            let scale = (-(DoubleDouble::from(beta) * DoubleDouble::from(gamma))).exp();
            let scaled = sol.from_minus * scale;
            Ok(AsymptoticRow {
                beta,
                expected_hitting: sol.from_minus,
                scaled,
                ratio: k.map(|k| scaled / DoubleDouble::from(k)),
                residual: sol.residual,
                precision: sol.precision,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AsymptoticReport {
        n,
        h,
        gamma_star: gamma,
        k_variational: k,
        rows,
    })
}

/// Monte Carlo first entrance into `C*` from `⊟`, racing against `⊞`.
#[derive(Clone, Debug, Serialize)]
pub struct FirstHitTallies {
    pub elements: Vec<Config>,
    /// Entrances per element of `C*`.
    pub tallies: Vec<u64>,
    /// Replicas that reached `⊞` first.
    pub plus_first: u64,
    pub stats: SimulationStats,
}

pub fn first_hit_tallies(
    params: &ModelParams<f64>,
    opts: &SimulationOptions,
) -> Result<FirstHitTallies> {
    let n = params.n;
    let c_star = c_star_enumerate(n, params.h)?;
    let mut targets = c_star.clone();
    targets.push(Config::full(n)?);
    let stats = simulate(&Config::empty(n)?, &targets, params, opts)?;
    Ok(FirstHitTallies {
        tallies: stats.tallies[..c_star.len()].to_vec(),
        plus_first: stats.tallies[c_star.len()],
        elements: c_star,
        stats,
    })
}

/// `exp(-βΓ*)·t` for a solved hitting time, in the solution's scalar.
pub fn scaled_time<T: Real>(t: T, beta: T, gamma: T) -> T {
    t * (-(beta * gamma)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_report() {
        let r = asymptotic_report(1, 0.5, &[1.0, 5.0, 20.0], &SolveOptions::default()).unwrap();
        assert_eq!(r.gamma_star, 0.5);
        assert_eq!(r.k_variational, Some(1.0));
        let mut prev = f64::INFINITY;
        for row in &r.rows {
            let expected = DoubleDouble::ONE + (-(DoubleDouble::from(row.beta) * DoubleDouble::from(0.5))).exp();
            let ratio = row.ratio.unwrap();
            assert!(((ratio - expected) / expected).abs().hi() < 1e-12);
            assert!(ratio.hi() < prev);
            prev = ratio.hi();
        }
    }

    #[test]
    fn unit_rate_row() {
        let r = asymptotic_report(3, 0.5001, &[0.0], &SolveOptions::default()).unwrap();
        assert!((r.rows[0].expected_hitting.hi() - 39.009_523_809_523_8).abs() < 1e-9);
        assert_eq!(r.rows[0].scaled, r.rows[0].expected_hitting);
    }

    #[test]
    fn nontrivial_instance_approaches_k() {
        let r = asymptotic_report(3, 0.5001, &[4.0, 6.0, 8.0], &SolveOptions::default()).unwrap();
        assert!((r.k_variational.unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let last = r.rows[2];
        assert_eq!(last.precision, Precision::Extended);
        assert!(last.residual < 1e-8);
        assert!((last.ratio.unwrap().hi() - 1.0).abs() < 0.1);
        let scale = scaled_time(last.expected_hitting.hi(), 8.0, r.gamma_star);
        assert!((scale / last.scaled.hi() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mc_first_hit_counts() {
        let p = ModelParams::new(3, 0.5001).unwrap().with_beta(1.0).unwrap();
        let opts = SimulationOptions {
            replicas: 2000,
            seed: 3,
            ..SimulationOptions::default()
        };
        let t = first_hit_tallies(&p, &opts).unwrap();
        assert_eq!(t.tallies.len(), 24);
        assert_eq!(t.tallies.iter().sum::<u64>() + t.plus_first + t.stats.truncated, 2000);
    }
}
