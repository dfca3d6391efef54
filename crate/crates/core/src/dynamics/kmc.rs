//! Event-driven kinetic Monte Carlo.
//!
//! Flip rates of all `2^n` vertices sit in the leaves of a complete binary
//! sum tree. A flip of `v` changes the rate class of `v` and its `n`
//! neighbours only, so an event costs `O(n²)`: `n + 1` leaf updates of `O(n)`
//! each, plus an `O(n)` descent to sample the next channel. Membership in the
//! target set is tracked through an incremental Zobrist hash and confirmed
//! by comparison.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::ModelParams;
use crate::error::{Error, Result};
use crate::hypercube::{check_dim, Config};
use crate::landscape::gamma_star_brute;

use super::rates::RateModel;

/// Largest dimension for simulation (`2^20` flip channels).
pub const MAX_KMC_DIM: u32 = 20;

/// Refusal threshold for the estimated total number of events.
pub const DEFAULT_EVENT_LIMIT: f64 = 1e10;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `i`: `splitmix64(master + i·φ)`, with `φ` the 64-bit
/// golden-ratio constant.
pub fn replica_seed(master: u64, i: u64) -> u64 {
    splitmix64(master.wrapping_add(i.wrapping_mul(GOLDEN)))
}

struct SumTree {
    leaves: usize,
    node: Vec<f64>,
}

impl SumTree {
    fn new(rates: &[f64]) -> Self {
        let leaves = rates.len();
        let mut node = vec![0.0; 2 * leaves];
        node[leaves..].copy_from_slice(rates);
        for i in (1..leaves).rev() {
            node[i] = node[2 * i] + node[2 * i + 1];
        }
        Self { leaves, node }
    }

    fn total(&self) -> f64 {
        self.node[1]
    }

    fn set(&mut self, leaf: usize, rate: f64) {
        let mut i = leaf + self.leaves;
        self.node[i] = rate;
        while i > 1 {
            i /= 2;
            self.node[i] = self.node[2 * i] + self.node[2 * i + 1];
        }
    }

    /// Leaf whose cumulative interval contains `u ∈ [0, total)`.
    fn find(&self, mut u: f64) -> usize {
        let mut i = 1;
        while i < self.leaves {
            let left = self.node[2 * i];
            if u < left || self.node[2 * i + 1] == 0.0 {
                i *= 2;
            } else {
                u -= left;
                i = 2 * i + 1;
            }
        }
        i - self.leaves
    }
}

/// Outcome of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KmcSample {
    pub time: f64,
    pub events: u64,
    /// Index into `targets` of the first target entered.
    pub hit: Option<usize>,
    pub truncated: bool,
}

fn zobrist_key(v: u32) -> u64 {
    splitmix64(u64::from(v) ^ 0xD1B5_4A32_D192_ED03)
}

fn zobrist(s: &Config) -> u64 {
    s.members().fold(0, |h, v| h ^ zobrist_key(v))
}

/// Runs from `start` until a target is entered (after leaving `start`, if it
/// is itself a target) or `max_events` jumps have been made.
pub fn kmc_run(
    start: &Config,
    targets: &[Config],
    params: &ModelParams<f64>,
    seed: u64,
    max_events: u64,
) -> Result<KmcSample> {
    let rates = RateModel::new(*params);
    let lookup = target_lookup(start.dim(), targets, params)?;
    Ok(run_with(start, targets, &lookup, &rates, seed, max_events))
}

fn target_lookup(
    n: u32,
    targets: &[Config],
    params: &ModelParams<f64>,
) -> Result<HashMap<u64, Vec<usize>>> {
    check_dim(n)?;
    if n > MAX_KMC_DIM {
        return Err(Error::capability(format!(
            "simulation needs n <= {MAX_KMC_DIM}, got {n}"
        )));
    }
    if params.n != n {
        return Err(Error::param("start configuration and parameters differ in n"));
    }
    if targets.is_empty() {
        return Err(Error::param("target set is empty"));
    }
    let mut lookup: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, t) in targets.iter().enumerate() {
        if t.dim() != n {
            return Err(Error::param("target of the wrong dimension"));
        }
        lookup.entry(zobrist(t)).or_default().push(i);
    }
    Ok(lookup)
}

fn run_with(
    start: &Config,
    targets: &[Config],
    lookup: &HashMap<u64, Vec<usize>>,
    rates: &RateModel<f64>,
    seed: u64,
    max_events: u64,
) -> KmcSample {
    let n = start.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = start.clone();
    let nv = s.num_vertices() as u32;
    let init: Vec<f64> = (0..nv).map(|v| rates.rate_at(&s, v)).collect();
    let mut tree = SumTree::new(&init);
    let mut hash = zobrist(&s);
    let mut time = 0.0;
    let mut events = 0;
    while events < max_events {
        let total = tree.total();
        let hold: f64 = rng.sample(Exp1);
        time += hold / total;
        let v = tree.find(rng.random::<f64>() * total) as u32;
        s.toggle(v);
        hash ^= zobrist_key(v);
        events += 1;
        tree.set(v as usize, rates.rate_at(&s, v));
        for i in 0..n {
            let w = v ^ (1 << i);
            tree.set(w as usize, rates.rate_at(&s, w));
        }
        if let Some(candidates) = lookup.get(&hash) {
            if let Some(&i) = candidates.iter().find(|&&i| targets[i] == s) {
                return KmcSample {
                    time,
                    events,
                    hit: Some(i),
                    truncated: false,
                };
            }
        }
    }
    KmcSample {
        time,
        events,
        hit: None,
        truncated: true,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimulationOptions {
    pub replicas: u64,
    pub seed: u64,
    /// Per-replica cap; `None` derives one from the event estimate.
    pub max_events: Option<u64>,
    /// Refuse when the estimated total event count exceeds this.
    pub event_limit: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            replicas: 10_000,
            seed: 0,
            max_events: None,
            event_limit: DEFAULT_EVENT_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationStats {
    pub replicas: u64,
    pub seed: u64,
    /// Replicas that reached a target.
    pub completed: u64,
    /// Mean hitting time over completed replicas.
    pub mean: f64,
    /// Sample standard deviation over `√completed`.
    pub std_error: f64,
    pub events_total: u64,
    pub events_mean: f64,
    pub truncated: u64,
    /// Hits per target; together with `truncated` they sum to `replicas`.
    pub tallies: Vec<u64>,
}

/// Events per replica, `4^n·exp(β(Γ* - (n - h)))`: the chain mostly waits in
/// `⊟`, whose exit rate is `2^n·exp(-β(n - h))`, so about
/// `2^n·exp(β(Γ* - (n - h)))` excursions are needed, each of at most about
/// `2^n` events.
pub fn estimated_events(params: &ModelParams<f64>) -> Result<f64> {
    let gamma = gamma_star_brute(params.n, params.h)?.value;
    let climb = (gamma - (f64::from(params.n) - params.h)).max(0.0);
    Ok((params.beta * climb).exp() * 4f64.powi(params.n as i32))
}

/// Independent replicas in parallel; results are gathered in replica order and
/// folded sequentially, so the statistics do not depend on scheduling.
pub fn simulate(
    start: &Config,
    targets: &[Config],
    params: &ModelParams<f64>,
    opts: &SimulationOptions,
) -> Result<SimulationStats> {
    if opts.replicas == 0 {
        return Err(Error::param("replicas must be positive"));
    }
    let lookup = target_lookup(start.dim(), targets, params)?;
    let per_replica = estimated_events(params)?;
    let estimated = per_replica * opts.replicas as f64;
    if !(estimated <= opts.event_limit) {
        return Err(Error::Budget {
            estimated,
            limit: opts.event_limit,
        });
    }
    let max_events = opts
        .max_events
        .unwrap_or_else(|| (1000.0 * per_replica).max(1e6).min(opts.event_limit) as u64);
    let rates = RateModel::new(*params);
    let samples: Vec<KmcSample> = (0..opts.replicas)
        .into_par_iter()
        .map(|i| {
            run_with(
                start,
                targets,
                &lookup,
                &rates,
                replica_seed(opts.seed, i),
                max_events,
            )
        })
        .collect();
    Ok(summarize(&samples, targets.len(), opts.seed))
}

fn summarize(samples: &[KmcSample], num_targets: usize, seed: u64) -> SimulationStats {
    let mut tallies = vec![0u64; num_targets];
    let (mut sum, mut events_total, mut truncated) = (0.0, 0u64, 0u64);
    for x in samples {
        events_total += x.events;
        match x.hit {
            Some(i) => {
                tallies[i] += 1;
                sum += x.time;
            }
            None => truncated += 1,
        }
    }
    let completed = samples.len() as u64 - truncated;
    let mean = if completed > 0 {
        sum / completed as f64
    } else {
        f64::NAN
    };
    let var = if completed > 1 {
        samples
            .iter()
            .filter(|x| x.hit.is_some())
            .map(|x| (x.time - mean).powi(2))
            .sum::<f64>()
            / (completed - 1) as f64
    } else {
        f64::NAN
    };
    SimulationStats {
        replicas: samples.len() as u64,
        seed,
        completed,
        mean,
        std_error: (var / completed as f64).sqrt(),
        events_total,
        events_mean: events_total as f64 / samples.len() as f64,
        truncated,
        tallies,
    }
}

/// Pearson statistic `Σ (O - E)²/E` and its degrees of freedom, over cells with
/// positive expected probability.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> (f64, usize) {
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probabilities) {
        if p > 0.0 {
            let e = p * total as f64;
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    (stat, cells.saturating_sub(1))
}
