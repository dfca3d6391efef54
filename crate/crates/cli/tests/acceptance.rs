//! End-to-end acceptance run. Every criterion prints one `PASS`/`FAIL` line;
//! the process exits non-zero if any criterion fails.

use std::cmp::Ordering;
use std::process::Command;
use std::time::Instant;

use hypercube_ising::critical::{c_star_enumerate, critical_report};
use hypercube_ising::dynamics::kmc::splitmix64;
use hypercube_ising::dynamics::{
    asymptotic_report, exact_expected_hitting, first_hit_distribution, first_hit_tallies,
    gate_probability, simulate, chi_square, Precision, PrecisionMode, SimulationOptions,
    SolveOptions,
};
use hypercube_ising::energy::ModelParams;
use hypercube_ising::hypercube::Config;
use hypercube_ising::isoperimetry::{abdiff_check, brute_min_boundary, is_good, qsum};
use hypercube_ising::landscape::{
    build_filtration, gamma_star_brute, gamma_star_closed, metastable_set, stability_certificate,
    wells_scan,
};
use hypercube_ising::{DoubleDouble, Rational};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const HP: f64 = 0.5 + 1e-4;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn show(x: Option<Rational>) -> String {
    x.map_or_else(|| "undefined".into(), |r| r.to_string())
}

fn params(n: u32, h: f64, beta: f64) -> ModelParams<f64> {
    ModelParams::new_degenerate(n, h).unwrap().with_beta(beta).unwrap()
}

/// Deterministic stream of pseudo-random words.
struct Stream(u64);

impl Stream {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(1);
        splitmix64(self.0)
    }

    fn below(&mut self, m: u64) -> u64 {
        self.next() % m
    }
}

fn isoperimetry_equivalence() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 2..=4u32 {
        let nv = 1u32 << n;
        let mut good: Vec<Vec<Config>> = vec![Vec::new(); nv as usize + 1];
        for m in 1..(1u64 << nv) - 1 {
            let s = Config::from_mask(n, m).unwrap();
            if is_good(&s).unwrap() {
                good[s.len()].push(s);
            }
        }
        for k in 1..u64::from(nv) {
            let cat = brute_min_boundary(n, k).unwrap();
            let digit_sum: u64 = (0..k).map(|i| u64::from(i.count_ones())).sum();
            let formula = u64::from(n) * k - 2 * digit_sum;
            let mut family = std::mem::take(&mut good[k as usize]);
            family.sort();
            if family != cat.minimizers || cat.minimum != formula {
                failures.push((n, k));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs <= 120.0,
        format!("n = 2..4, all k; mismatches {failures:?}; {secs:.1}s"),
    )
}

fn qsum_identities() -> Outcome {
    let closed = (0..=20u32).all(|r| {
        let expected = if r == 0 { 0 } else { u64::from(r) << (r - 1) };
        qsum((1u64 << r) - 1).unwrap() == expected
    });
    let mut rng = Stream(2);
    let mut ok = 0;
    for _ in 0..1000 {
        let n = 3 + rng.below(22) as u32;
        let j = 1 + rng.below(u64::from(n) - 2) as u32;
        let a = (rng.below(1u64 << n) | 1 << (j - 1)) & !(1u64 << j);
        let b = a + (1u64 << (j - 1));
        let lhs: u64 = (a..b).map(|i| u64::from(i.count_ones())).sum();
        let high = u64::from((a >> (j + 1)).count_ones());
        let direct = 2 * lhs == (u64::from(j) + 1 + 2 * high) << (j - 1);
        if direct && abdiff_check(a, j, n).unwrap() {
            ok += 1;
        }
    }
    outcome(
        closed && ok == 1000,
        format!("qsum(2^r-1) = r·2^(r-1) for r <= 20: {closed}; q-difference identity {ok}/1000"),
    )
}

fn gamma_triple() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 1..=4u32 {
        for i in 0..20 {
            let h = f64::from(n) * (f64::from(i) + 0.5) / 20.0 + 1.234e-5;
            let brute = gamma_star_brute(n, h).unwrap().value;
            let closed = gamma_star_closed(n, h).unwrap().gamma_star;
            let idx = build_filtration(n, h).unwrap();
            let filt = idx.comm_height_states(0, idx.top()).realize(h);
            worst = worst.max((brute - closed).abs()).max((brute - filt).abs());
            count += 1;
        }
    }
    let exact = |n: u32| {
        let h = Rational::new(1, 2);
        let p = gamma_star_closed(n, h).unwrap();
        (gamma_star_brute(n, h).unwrap().value, p.gamma_printed)
    };
    let (b3, p3) = exact(3);
    let (b4, p4) = exact(4);
    let desk = b3 == Rational::new(7, 2)
        && p3 == Rational::from_integer(2)
        && b4 == Rational::new(15, 2)
        && p4 == Rational::from_integer(6);
    outcome(
        worst <= 1e-9 && desk,
        format!(
            "{count} (n, h) pairs, max disagreement {worst:e}; printed constant (3, 1/2): brute {b3} vs printed {p3}; (4, 1/2): brute {b4} vs printed {p4}"
        ),
    )
}

fn metastable_set_check() -> Outcome {
    let start = Instant::now();
    let cases: [(u32, &[f64]); 3] = [
        (2, &[0.3, 0.7, 1.1, 1.3, 1.7]),
        (3, &[HP, 0.9, 1.3, 1.7001, 2.3]),
        (4, &[HP, 1.3001]),
    ];
    let mut bad = Vec::new();
    let mut n4_secs = 0.0;
    for (n, hs) in cases {
        for &h in hs {
            let t = Instant::now();
            assert!(ModelParams::new(n, h).is_ok(), "h = {h} admissible at n = {n}");
            let idx = build_filtration(n, h).unwrap();
            if metastable_set(&idx) != [Config::empty(n).unwrap()] {
                bad.push((n, h));
            }
            if n == 4 {
                n4_secs += t.elapsed().as_secs_f64();
            }
        }
    }
    let idx = build_filtration(3, HP).unwrap();
    let gamma = gamma_star_brute(3, HP).unwrap().gamma;
    let mut rng = Stream(4);
    let mut certified = 0;
    for _ in 0..100 {
        let m = 1 + rng.below(254);
        let s = Config::from_mask(3, m).unwrap();
        let cert = stability_certificate(&s, HP).unwrap();
        let level = idx.stability_level_state(idx.state_of(&s).unwrap());
        let agrees = level.is_some_and(|v| {
            v.cmp_at(cert.peak, HP) != Ordering::Greater && v.cmp_at(gamma, HP) == Ordering::Less
        });
        if cert.verify(&s, HP) && agrees {
            certified += 1;
        }
    }
    outcome(
        bad.is_empty() && certified == 100 && n4_secs <= 300.0,
        format!(
            "Ω_m = {{⊟}} failures {bad:?} (n = 4 in {n4_secs:.1}s); certificates {certified}/100 below Γ* and above the filtration level; {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn wells_check() -> Outcome {
    let mut found = Vec::new();
    let mut cases = 0;
    for (n, hs) in [(2u32, vec![0.3, 0.7, 1.3, 1.7]), (3, vec![HP, 1.3, 2.3]), (4, vec![HP, 1.3001, 2.7001])] {
        for h in hs {
            let idx = build_filtration(n, h).unwrap();
            let w = wells_scan(&idx, &gamma_star_closed(n, h).unwrap());
            if !w.is_empty() {
                found.push((n, h, w.len()));
            }
            cases += 1;
        }
    }
    outcome(found.is_empty(), format!("{cases} admissible instances, wells {found:?}"))
}

fn critical_structure() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, size, counts, k) in [(3u32, 24usize, (2u32, 1u32), Rational::new(1, 16)), (4, 192, (1, 2), Rational::new(1, 128))] {
        let h = Rational::new(1, 2);
        let idx = build_filtration(n, h).unwrap();
        let prof = gamma_star_closed(n, h).unwrap();
        let rep = critical_report(&idx, &prof).unwrap();
        let brute = brute_min_boundary(n, prof.k_star).unwrap().minimizers;
        let enumerated = c_star_enumerate(n, h).unwrap();
        let c = rep.constant_counts();
        let this = rep.c_star.len() == size
            && enumerated == brute
            && rep.h2_holds
            && c.map(|c| (c.n_minus, c.n_plus)) == Some(counts)
            && rep.k_variational == Some(k);
        ok &= this;
        parts.push(format!(
            "(n={n}, h=1/2): |C*| {} (brute {}), (N⁻,N⁺) {:?}, K {}, H2 {}; printed |C*| {}, printed K {}",
            rep.c_star.len(),
            brute.len(),
            c.map(|c| (c.n_minus, c.n_plus)).unwrap_or_default(),
            show(rep.k_variational),
            rep.h2_holds,
            show(rep.printed.c_star_printed),
            rep.printed.k_printed,
        ));
    }
    outcome(ok, parts.join("; "))
}

fn closed_form_instance() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_excess = 0.0f64;
    for beta in [1.0, 5.0, 20.0] {
        let sol = exact_expected_hitting(&params(1, 0.5, beta), &SolveOptions::default()).unwrap();
        let fine = SolveOptions {
            precision: PrecisionMode::Extended,
            ..SolveOptions::default()
        };
        let ext = exact_expected_hitting(&params(1, 0.5, beta), &fine).unwrap();
        let b = DoubleDouble::from(beta);
        let half = DoubleDouble::from(0.5);
        let grow = (b * half).exp();
        let expected = grow + DoubleDouble::ONE;
        worst = worst.max(((sol.from_minus - expected) / expected).abs().hi());
        // Γ* = 1 - h at n = 1
        let excess = ext.from_minus / grow - DoubleDouble::ONE;
        let target = (-(b * half)).exp();
        worst_excess = worst_excess.max(((excess - target) / target).abs().hi());
    }
    let h = Rational::new(1, 2);
    let rep = critical_report(&build_filtration(1, h).unwrap(), &gamma_star_closed(1, h).unwrap()).unwrap();
    let k_ok = rep.k_variational == Some(Rational::from_integer(1));
    outcome(
        worst < 1e-12 && worst_excess < 1e-12 && k_ok,
        format!(
            "n=1, h=1/2, β = 1, 5, 20: max relative error {worst:e}; e^(-βΓ*)E - 1 vs e^(-β/2) (extended) {worst_excess:e}; K {} (printed {})",
            show(rep.k_variational), rep.printed.k_printed
        ),
    )
}

fn nontrivial_instance() -> Outcome {
    let start = Instant::now();
    let r = asymptotic_report(3, HP, &[4.0, 6.0, 8.0], &SolveOptions::default()).unwrap();
    let scaled: Vec<f64> = r.rows.iter().map(|row| row.scaled.hi()).collect();
    let decreasing = scaled.windows(2).all(|w| w[1] < w[0]);
    let k = r.k_variational.unwrap();
    let last = r.rows[2];
    let near = (last.scaled.hi() / k - 1.0).abs() < 0.1;
    let certified = r.rows.iter().all(|row| row.residual < 1e-8);
    let extended = last.precision == Precision::Extended;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        decreasing && near && certified && extended && secs <= 60.0,
        format!(
            "e^(-βΓ*)E at β = 4, 6, 8: {scaled:?} (strictly decreasing: {decreasing}); K = {k}; ratio to K at β = 8: {:.6} (within 10%: {near}); residuals {:?}; extended at β = 8: {extended}; {secs:.2}s",
            last.scaled.hi() / k,
            r.rows.iter().map(|row| row.residual).collect::<Vec<_>>(),
        ),
    )
}

fn monte_carlo_vs_exact() -> Outcome {
    let opts = SimulationOptions {
        replicas: 10_000,
        seed: 20_240_601,
        ..SimulationOptions::default()
    };
    let p3 = params(3, HP, 2.0);
    let exact3 = exact_expected_hitting(&p3, &SolveOptions::default()).unwrap().from_minus.hi();
    let s3 = simulate(&Config::empty(3).unwrap(), &[Config::full(3).unwrap()], &p3, &opts).unwrap();
    let p1 = params(1, 0.5, 2.0);
    let exact1 = 1f64.exp() + 1.0;
    let s1 = simulate(&Config::empty(1).unwrap(), &[Config::full(1).unwrap()], &p1, &opts).unwrap();
    let z3 = (s3.mean - exact3).abs() / s3.std_error;
    let z1 = (s1.mean - exact1).abs() / s1.std_error;
    outcome(
        z3 < 3.0 && z1 < 3.0 && s3.truncated == 0 && s1.truncated == 0,
        format!(
            "n=3: mean {:.4} ± {:.4} vs exact {exact3:.4} ({z3:.2} SE); n=1: mean {:.4} ± {:.4} vs e+1 ({z1:.2} SE)",
            s3.mean, s3.std_error, s1.mean, s1.std_error
        ),
    )
}

fn gate_and_first_hit() -> Outcome {
    let opts = SolveOptions::default();
    let gates: Vec<f64> = [2.0, 4.0, 6.0]
        .iter()
        .map(|&b| gate_probability(&params(3, HP, b), &opts).unwrap().gate.hi())
        .collect();
    let increasing = gates.windows(2).all(|w| w[1] > w[0]);

    let d2 = first_hit_distribution(&params(3, HP, 2.0), &opts).unwrap();
    let d4 = first_hit_distribution(&params(3, HP, 4.0), &opts).unwrap();
    let (dev2, dev4) = (d2.max_deviation_from_uniform(), d4.max_deviation_from_uniform());
    let converging = dev4 < dev2;

    let sim = SimulationOptions {
        replicas: 100_000,
        seed: 77,
        ..SimulationOptions::default()
    };
    let tallies = first_hit_tallies(&params(3, HP, 2.0), &sim).unwrap();
    let probs: Vec<f64> = d2.probabilities.iter().map(|p| p.hi()).collect();
    let (stat, df) = chi_square(&tallies.tallies, &probs);
    let critical = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.999);
    let accepted = stat < critical;
    outcome(
        increasing && converging && accepted,
        format!(
            "(a) gate at β = 2, 4, 6: {gates:?} (increasing: {increasing}); (b) max |p - 1/24| at β = 2: {:e}, β = 4: {:e} (smaller at β = 4: {converging}); χ² = {stat:.2} on {df} df vs critical {critical:.2} at 0.001 (not rejected: {accepted}), {} of 100000 reached ⊞ first",
            dev2.hi(),
            dev4.hi(),
            tallies.plus_first
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_qising");
    let runs: [&[&str]; 8] = [
        &["analyze", "--n", "4", "--h", "0.5001"],
        &["analyze", "--n", "1", "--h", "0.5", "--allow-degenerate-h"],
        &["verify", "--n", "3", "--h", "0.5001"],
        &["solve", "--n", "3", "--h", "0.5001", "--beta-list", "4,6,8"],
        &["solve", "--n", "3", "--h", "0.5001", "--beta-list", "4,6,8", "--format", "csv"],
        &["simulate", "--n", "3", "--h", "0.5001", "--beta", "2", "--replicas", "2000", "--seed", "42"],
        &["simulate", "--n", "3", "--h", "0.5001", "--beta", "2", "--replicas", "2000", "--seed", "42", "--format", "csv"],
        &["simulate", "--n", "3", "--h", "0.5001", "--beta", "1", "--replicas", "2000", "--seed", "9", "--first-hit"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let a = Command::new(exe).args(args).output().unwrap();
        let b = Command::new(exe).args(args).output().unwrap();
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            differing.push(args.join(" "));
        }
    }
    let dir = std::env::temp_dir().join(format!("qising-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("solve.json");
    let status = Command::new(exe)
        .args(["solve", "--n", "2", "--h", "0.7", "--beta", "3", "--out"])
        .arg(&report)
        .status()
        .unwrap();
    let replay = Command::new(exe).arg("replay").arg(&report).arg("--check").output().unwrap().status;
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        differing.is_empty() && status.success() && replay.success(),
        format!(
            "{} commands run twice, differing {differing:?}; replay of an embedded config identical: {}",
            runs.len(),
            replay.success()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("isoperimetry equivalence", isoperimetry_equivalence),
        ("q-sum identities", qsum_identities),
        ("barrier triple agreement", gamma_triple),
        ("metastable set", metastable_set_check),
        ("wells scan", wells_check),
        ("critical structure", critical_structure),
        ("exact asymptotics, closed-form instance", closed_form_instance),
        ("exact asymptotics, nontrivial instance", nontrivial_instance),
        ("Monte Carlo vs exact", monte_carlo_vs_exact),
        ("gate and first-hit law", gate_and_first_hit),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", i + 1, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
