use std::cmp::Ordering;

use hypercube_ising::critical::{
    c_star_enumerate, counts_printed, critical_report, verify_critical_conditions,
    CriticalReport, NeighborCounts,
};
use hypercube_ising::dynamics::{
    asymptotic_report, chi_square, exact_expected_hitting, first_hit_distribution,
    first_hit_tallies, gate_probability, simulate, SimulationOptions, SimulationStats,
    SolveOptions,
};
use hypercube_ising::energy::{validate_field, EnergyValue, FieldReport, ModelParams};
use hypercube_ising::hypercube::Config;
use hypercube_ising::isoperimetry::{brute_min_boundary, is_good, minimal_boundary, MAX_BRUTE_DIM};
use hypercube_ising::landscape::{
    build_filtration, gamma_star_brute, gamma_star_closed, metastable_set, stability_certificate,
    wells_scan, FiltrationIndex, MAX_FILTRATION_DIM,
};
use hypercube_ising::{DoubleDouble, Error, Profile, Rational, Result};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::RunConfig;

const AGREE_TOL: f64 = 1e-9;

pub fn model(cfg: &RunConfig) -> Result<ModelParams<f64>> {
    let report = validate_field(cfg.n, cfg.h, cfg.field_tol)?;
    if !cfg.allow_degenerate_h {
        report.check()?;
    }
    Ok(ModelParams {
        n: cfg.n,
        h: cfg.h,
        beta: 0.0,
        admissible: report.admissible,
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `K` as a reduced fraction from the neighbour counts.
fn k_fraction(report: &CriticalReport<f64>) -> Option<String> {
    report.k_variational?;
    let inv = report.counts.iter().fold(Rational::from_integer(0), |acc, c| {
        let (m, p) = (i64::from(c.n_minus), i64::from(c.n_plus));
        if m + p == 0 {
            acc
        } else {
            acc + Rational::new(m * p, m + p)
        }
    });
    let k = inv.recip();
    Some(format!("{}/{}", k.numer(), k.denom()))
}

#[derive(Serialize)]
pub struct BarrierSection {
    pub delta: i64,
    pub epsilon: i64,
    pub k_star: u64,
    pub argmax: Option<Vec<u64>>,
    pub gamma_star_brute: Option<f64>,
    pub gamma_star_closed: f64,
    pub gamma_star_filtration: Option<f64>,
    pub gamma_star_exact: EnergyValue,
    pub gamma_printed: f64,
    pub closed_matches_brute: Option<bool>,
    pub filtration_matches_brute: Option<bool>,
    pub printed_matches_brute: Option<bool>,
}

#[derive(Serialize)]
pub struct CriticalSection {
    pub c_star_enumerated: usize,
    pub c_star_orbits: Option<usize>,
    pub c_star_stepwise: Option<u64>,
    pub c_star_printed: Option<f64>,
    pub stepwise_matches: Option<bool>,
    pub printed_matches: Option<bool>,
    pub p_star: Option<usize>,
    pub b_star: Option<usize>,
    /// `(N⁻, N⁺)`, when the same on every element of `C*`.
    pub neighbor_counts: Option<NeighborCounts>,
    pub h2_holds: Option<bool>,
    pub non_adjacent: Option<bool>,
    pub wells: Option<usize>,
    pub n_minus_printed: u32,
    pub n_plus_printed: i64,
    pub n_minus_printed_matches: Option<bool>,
    pub n_plus_printed_matches: Option<bool>,
    pub k_variational: Option<f64>,
    pub k_variational_fraction: Option<String>,
    pub k_printed: f64,
    pub k_printed_matches: Option<bool>,
}

#[derive(Serialize)]
pub struct AnalyzeResult {
    pub field: FieldReport<f64>,
    pub barrier: BarrierSection,
    pub critical: Option<CriticalSection>,
}

fn barrier_section(
    profile: &Profile,
    index: Option<&FiltrationIndex<f64>>,
) -> Result<BarrierSection> {
    let (n, h) = (profile.n, profile.h);
    let brute = gamma_star_brute(n, h).ok();
    let filt = index.map(|idx| idx.comm_height_states(0, idx.top()).realize(h));
    let bv = brute.as_ref().map(|b| b.value);
    Ok(BarrierSection {
        delta: profile.delta,
        epsilon: profile.epsilon,
        k_star: profile.k_star,
        argmax: brute.as_ref().map(|b| b.argmax.clone()),
        gamma_star_brute: bv,
        gamma_star_closed: profile.gamma_star,
        gamma_star_filtration: filt,
        gamma_star_exact: profile.gamma_star_exact,
        gamma_printed: profile.gamma_printed,
        closed_matches_brute: bv.map(|b| close(b, profile.gamma_star)),
        filtration_matches_brute: bv.zip(filt).map(|(b, f)| close(b, f)),
        printed_matches_brute: bv.map(|b| close(b, profile.gamma_printed)),
    })
}

fn critical_section(
    profile: &Profile,
    report: Option<&CriticalReport<f64>>,
) -> Result<CriticalSection> {
    let (n, h) = (profile.n, profile.h);
    let printed = match report {
        Some(r) => r.printed.clone(),
        None => counts_printed(n, h)?,
    };
    let enumerated = match report {
        Some(r) => r.c_star.len(),
        None => c_star_enumerate(n, h)?.len(),
    };
    let counts = report.and_then(|r| r.constant_counts());
    Ok(CriticalSection {
        c_star_enumerated: enumerated,
        c_star_orbits: report.map(|r| r.c_star_orbits),
        c_star_stepwise: printed.c_star_stepwise,
        c_star_printed: printed.c_star_printed,
        stepwise_matches: printed.c_star_stepwise.map(|s| s == enumerated as u64),
        printed_matches: printed.c_star_printed.map(|p| close(p, enumerated as f64)),
        p_star: report.map(|r| r.p_star.len()),
        b_star: report.map(|r| r.b_star.len()),
        neighbor_counts: counts,
        h2_holds: report.map(|r| r.h2_holds),
        non_adjacent: report.map(|r| r.c_star_non_adjacent),
        wells: report.map(|r| r.wells.len()),
        n_minus_printed: printed.n_minus_printed,
        n_plus_printed: printed.n_plus_printed,
        n_minus_printed_matches: counts.map(|c| c.n_minus == printed.n_minus_printed),
        n_plus_printed_matches: counts.map(|c| i64::from(c.n_plus) == printed.n_plus_printed),
        k_variational: report.and_then(|r| r.k_variational),
        k_variational_fraction: report.and_then(k_fraction),
        k_printed: printed.k_printed,
        k_printed_matches: report
            .and_then(|r| r.k_variational)
            .map(|k| close(k, printed.k_printed)),
    })
}

pub fn analyze(cfg: &RunConfig) -> Result<AnalyzeResult> {
    let p = model(cfg)?;
    let field = validate_field(p.n, p.h, cfg.field_tol)?;
    let profile = gamma_star_closed(p.n, p.h)?;
    let index = if p.n <= MAX_FILTRATION_DIM {
        Some(build_filtration(p.n, p.h)?)
    } else {
        None
    };
    let report = match &index {
        Some(idx) => Some(critical_report(idx, &profile)?),
        None => None,
    };
    let critical = if c_star_enumerate(p.n, p.h).is_ok() {
        Some(critical_section(&profile, report.as_ref())?)
    } else {
        None
    };
    Ok(AnalyzeResult {
        field,
        barrier: barrier_section(&profile, index.as_ref())?,
        critical,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    GroundTruth,
    Informational,
}

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct VerifyResult {
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn ground(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        kind: CheckKind::GroundTruth,
        passed,
        detail,
    }
}

fn info(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        kind: CheckKind::Informational,
        passed,
        detail,
    }
}

/// Minimizers of `|∂S|` among `k`-sets are exactly the good sets, and the
/// minimum is `nk - 2·qsum(k-1)`, for every `k`.
fn isoperimetry_check(n: u32) -> Result<(bool, String)> {
    let nv = 1u32 << n;
    let mut good: Vec<Vec<Config>> = vec![Vec::new(); nv as usize + 1];
    for m in 1..(1u64 << nv) - 1 {
        let s = Config::from_mask(n, m)?;
        if is_good(&s)? {
            good[s.len()].push(s);
        }
    }
    let mut bad = Vec::new();
    for k in 1..u64::from(nv) {
        let cat = brute_min_boundary(n, k)?;
        let mut family = std::mem::take(&mut good[k as usize]);
        family.sort();
        if family != cat.minimizers || cat.minimum != minimal_boundary(n, k)? {
            bad.push(k);
        }
    }
    let detail = if bad.is_empty() {
        format!("k = 1..{}: minimizers = good sets, minimum = nk - 2·qsum(k-1)", nv - 1)
    } else {
        format!("mismatch at k = {bad:?}")
    };
    Ok((bad.is_empty(), detail))
}

/// Deterministic sample of configurations other than `⊟`, `⊞`.
fn certificate_sample(n: u32) -> Vec<Config> {
    let count = 1u64 << (1u32 << n);
    let all = count <= 256;
    let masks: Vec<u64> = if all {
        (1..count - 1).collect()
    } else {
        (1..=100u64).map(|i| (i * 40_503) % (count - 2) + 1).collect()
    };
    masks
        .into_iter()
        .map(|m| Config::from_mask(n, m).expect("n <= 4"))
        .collect()
}

pub fn verify(cfg: &RunConfig) -> Result<VerifyResult> {
    let p = model(cfg)?;
    let (n, h) = (p.n, p.h);
    if n > MAX_BRUTE_DIM {
        return Err(Error::Capability(format!(
            "verification needs n <= {MAX_BRUTE_DIM}, got {n}"
        )));
    }
    let mut checks = Vec::new();

    let (ok, detail) = isoperimetry_check(n)?;
    checks.push(ground("isoperimetry_equivalence", ok, detail));

    let index = build_filtration(n, h)?;
    let profile = gamma_star_closed(n, h)?;
    let brute = gamma_star_brute(n, h)?;
    let filt = index.comm_height_states(0, index.top()).realize(h);
    checks.push(ground(
        "gamma_star_agreement",
        close(brute.value, profile.gamma_star) && close(brute.value, filt),
        format!(
            "brute {} closed {} filtration {}",
            brute.value, profile.gamma_star, filt
        ),
    ));

    let meta = metastable_set(&index);
    let minus = Config::empty(n)?;
    checks.push(ground(
        "metastable_set",
        meta == [minus.clone()],
        format!("{} state(s), first {}", meta.len(), meta.first().map_or(String::new(), |c| c.to_string())),
    ));

    let mut cert_ok = true;
    let mut certified = 0;
    for s in certificate_sample(n) {
        let cert = stability_certificate(&s, h)?;
        let level = index.stability_level_state(index.state_of(&s)?);
        let consistent = level.is_none_or(|v| v.cmp_at(cert.peak, h) != Ordering::Greater);
        cert_ok &= cert.verify(&s, h) && consistent;
        certified += 1;
    }
    checks.push(ground(
        "stability_certificates",
        cert_ok,
        format!("{certified} configurations, peak < Γ* and above the filtration level"),
    ));

    let wells = wells_scan(&index, &profile);
    checks.push(ground("wells_empty", wells.is_empty(), format!("{} well(s)", wells.len())));

    let report = critical_report(&index, &profile)?;
    checks.push(ground(
        "h2_constant_counts",
        report.h2_holds,
        format!("{:?}", report.constant_counts()),
    ));
    checks.push(ground(
        "critical_non_adjacent",
        report.c_star_non_adjacent,
        format!("|C*| = {}", report.c_star.len()),
    ));
    if n <= 3 {
        let ok = verify_critical_conditions(&index, &profile, &report)?;
        checks.push(ground("critical_conditions", ok, "paths checked by search".into()));
    }

    let printed = &report.printed;
    checks.push(info(
        "gamma_printed",
        close(profile.gamma_printed, brute.value),
        format!("printed {} vs {}", profile.gamma_printed, brute.value),
    ));
    if let Some(c) = printed.c_star_printed {
        checks.push(info(
            "c_star_printed",
            close(c, report.c_star.len() as f64),
            format!("printed {c} vs enumerated {}", report.c_star.len()),
        ));
    }
    if let Some(k) = report.k_variational {
        checks.push(info(
            "k_printed",
            close(printed.k_printed, k),
            format!("printed {} vs variational {k}", printed.k_printed),
        ));
    }
    if let Some(c) = report.constant_counts() {
        checks.push(info(
            "n_minus_printed",
            c.n_minus == printed.n_minus_printed,
            format!("printed {} vs measured {}", printed.n_minus_printed, c.n_minus),
        ));
    }
    let passed = checks
        .iter()
        .all(|c| c.kind == CheckKind::Informational || c.passed);
    Ok(VerifyResult { passed, checks })
}

#[derive(Serialize)]
pub struct SolveRow {
    pub beta: f64,
    pub expected_hitting: f64,
    /// 32 significant digits.
    pub expected_hitting_digits: String,
    /// `exp(-βΓ*)·E_⊟[τ_⊞]`
    pub scaled: f64,
    /// `scaled / K`
    pub scaled_ratio: Option<f64>,
    pub residual: f64,
    pub precision: hypercube_ising::dynamics::Precision,
    pub gate_probability: f64,
    pub escape_probability: f64,
    pub first_hit_reach: f64,
    pub first_hit_max_deviation: f64,
}

#[derive(Serialize)]
pub struct SolveResult {
    pub gamma_star: f64,
    pub k_variational: Option<f64>,
    pub rows: Vec<SolveRow>,
}

pub fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        precision: cfg.precision.into(),
        residual_bound: cfg.residual_bound,
        ..SolveOptions::default()
    }
}

pub fn solve(cfg: &RunConfig) -> Result<SolveResult> {
    let p = model(cfg)?;
    let opts = solve_options(cfg);
    let report = asymptotic_report(p.n, p.h, &cfg.betas(), &opts)?;
    let rows = report
        .rows
        .iter()
        .map(|row| {
            let pb = p.with_beta(row.beta)?;
            let gate = gate_probability(&pb, &opts)?;
            let first = first_hit_distribution(&pb, &opts)?;
            Ok(SolveRow {
                beta: row.beta,
                expected_hitting: row.expected_hitting.hi(),
                expected_hitting_digits: row.expected_hitting.to_decimal_string(32),
                scaled: row.scaled.hi(),
                scaled_ratio: row.ratio.map(DoubleDouble::hi),
                residual: row.residual,
                precision: row.precision,
                gate_probability: gate.gate.hi(),
                escape_probability: gate.escape.hi(),
                first_hit_reach: first.reach.hi(),
                first_hit_max_deviation: first.max_deviation_from_uniform().hi(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveResult {
        gamma_star: report.gamma_star,
        k_variational: report.k_variational,
        rows,
    })
}

#[derive(Serialize)]
pub struct FirstHitSection {
    pub elements: Vec<Config>,
    pub tallies: Vec<u64>,
    pub plus_first: u64,
    /// Exact law of the entrance point, when `n <= 4`.
    pub exact: Option<Vec<f64>>,
    pub chi_square: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
    pub p_value: Option<f64>,
}

#[derive(Serialize)]
pub struct SimulateRow {
    pub beta: f64,
    pub stats: SimulationStats,
    /// Exact `E_⊟[τ_⊞]`, when `n <= 4`.
    pub exact: Option<f64>,
    /// `|mean - exact| / SE`
    pub deviation_in_se: Option<f64>,
    pub scaled_ratio: Option<f64>,
    pub first_hit: Option<FirstHitSection>,
}

#[derive(Serialize)]
pub struct SimulateResult {
    pub gamma_star: f64,
    pub k_variational: Option<f64>,
    pub rows: Vec<SimulateRow>,
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<SimulateResult> {
    let p = model(cfg)?;
    let gamma = gamma_star_brute(p.n, p.h)?.value;
    let small = p.n <= MAX_FILTRATION_DIM;
    let k = if small {
        let index = build_filtration(p.n, p.h)?;
        critical_report(&index, &gamma_star_closed(p.n, p.h)?)?.k_variational
    } else {
        None
    };
    let sim = SimulationOptions {
        replicas: cfg.replicas,
        seed: cfg.seed,
        max_events: cfg.max_events,
        event_limit: cfg.event_limit,
    };
    let opts = solve_options(cfg);
    let rows = cfg
        .betas()
        .into_iter()
        .map(|beta| {
            let pb = p.with_beta(beta)?;
            if cfg.first_hit {
                let t = first_hit_tallies(&pb, &sim)?;
                let exact = if small {
                    Some(
                        first_hit_distribution(&pb, &opts)?
                            .probabilities
                            .iter()
                            .map(|x| x.hi())
                            .collect::<Vec<_>>(),
                    )
                } else {
                    None
                };
                let test = exact.as_ref().map(|e| chi_square(&t.tallies, e));
                let p_value = test.and_then(|(stat, df)| {
                    let dist = ChiSquared::new(df as f64).ok()?;
                    Some(1.0 - dist.cdf(stat))
                });
                return Ok(SimulateRow {
                    beta,
                    stats: t.stats.clone(),
                    exact: None,
                    deviation_in_se: None,
                    scaled_ratio: None,
                    first_hit: Some(FirstHitSection {
                        elements: t.elements,
                        tallies: t.tallies,
                        plus_first: t.plus_first,
                        exact,
                        chi_square: test.map(|x| x.0),
                        degrees_of_freedom: test.map(|x| x.1),
                        p_value,
                    }),
                });
            }
            let stats = simulate(&Config::empty(p.n)?, &[Config::full(p.n)?], &pb, &sim)?;
            let exact = if small {
                Some(exact_expected_hitting(&pb, &opts)?.from_minus.hi())
            } else {
                None
            };
            Ok(SimulateRow {
                beta,
                deviation_in_se: exact.map(|e| (stats.mean - e).abs() / stats.std_error),
                scaled_ratio: k.map(|k| stats.mean * (-beta * gamma).exp() / k),
                exact,
                stats,
                first_hit: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulateResult {
        gamma_star: gamma,
        k_variational: k,
        rows,
    })
}
