//! Hamiltonian with `J = 1`, exact energy gaps relative to `⊟`, single-flip
//! differences, the profile `g(k)` along the reference path, Gibbs weights and
//! the admissibility scan for `h`.

use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{check_dim, edge_counts, Config};
use crate::isoperimetry::QTable;
use crate::scalar::{Field, Real};

/// Largest dimension for `g` tables and the admissibility scan.
pub const MAX_PROFILE_DIM: u32 = 26;

/// Largest dimension for sums over the whole configuration space.
pub const MAX_STATE_SPACE_DIM: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub n: u32,
    pub h: T,
    /// Inverse temperature; zero unless the caller needs the dynamics.
    pub beta: T,
    /// `h` passed [`validate_field`] at the default tolerance.
    pub admissible: bool,
}

impl<T: Field> ModelParams<T> {
    /// Parameters with an admissible field; fails with
    /// [`Error::InadmissibleField`] otherwise.
    pub fn new(n: u32, h: T) -> Result<Self> {
        let report = validate_field(n, h, None)?;
        report.check()?;
        Ok(Self {
            n,
            h,
            beta: T::zero(),
            admissible: true,
        })
    }

    /// Skips the admissibility requirement, keeping only `0 < h < n`. Meant for
    /// round fields such as `h = 1/2` whose energy levels can coincide.
    pub fn new_degenerate(n: u32, h: T) -> Result<Self> {
        let report = validate_field(n, h, None)?;
        Ok(Self {
            n,
            h,
            beta: T::zero(),
            admissible: report.admissible,
        })
    }

    pub fn with_beta(self, beta: T) -> Result<Self> {
        if !(beta >= T::zero()) {
            return Err(Error::param(format!("beta must be >= 0, got {beta}")));
        }
        Ok(Self { beta, ..self })
    }

    pub fn j(&self) -> T {
        T::one()
    }

    /// Same parameters in another scalar type, via `f64`.
    pub fn cast<U: Field>(&self) -> ModelParams<U> {
        ModelParams {
            n: self.n,
            h: U::from_f64(self.h.as_f64()).expect("finite field"),
            beta: U::from_f64(self.beta.as_f64()).expect("finite beta"),
            admissible: self.admissible,
        }
    }
}

/// Energy gap `e - h·s` kept as the exact integer pair `(e, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EnergyValue {
    pub e: i64,
    pub s: i64,
}

impl EnergyValue {
    pub const ZERO: EnergyValue = EnergyValue { e: 0, s: 0 };

    pub fn new(e: i64, s: i64) -> Self {
        Self { e, s }
    }

    pub fn realize<T: Field>(self, h: T) -> T {
        T::from_int(self.e) - h * T::from_int(self.s)
    }

    /// Compares realized values at field `h`; exact whenever `h·(s₁ - s₂)` is.
    pub fn cmp_at<T: Field>(self, other: Self, h: T) -> Ordering {
        if self.s == other.s {
            return self.e.cmp(&other.e);
        }
        let lhs = T::from_int(self.e - other.e);
        let rhs = h * T::from_int(self.s - other.s);
        lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal)
    }

    pub fn max_at<T: Field>(self, other: Self, h: T) -> Self {
        if self.cmp_at(other, h) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl Add for EnergyValue {
    type Output = EnergyValue;
    fn add(self, rhs: Self) -> Self {
        EnergyValue::new(self.e + rhs.e, self.s + rhs.s)
    }
}

impl Sub for EnergyValue {
    type Output = EnergyValue;
    fn sub(self, rhs: Self) -> Self {
        EnergyValue::new(self.e - rhs.e, self.s - rhs.s)
    }
}

impl Neg for EnergyValue {
    type Output = EnergyValue;
    fn neg(self) -> Self {
        EnergyValue::new(-self.e, -self.s)
    }
}

/// `|E_n| = n·2^{n-1}`.
pub fn total_edges(n: u32) -> u64 {
    u64::from(n) << (n - 1)
}

/// `H(⊟) = -|E_n|/2 + h·2^{n-1}`.
pub fn ground_energy<T: Field>(n: u32, h: T) -> T {
    let half = T::one() / T::from_int(2);
    -(T::from_int(total_edges(n) as i64) * half) + h * T::pow2(i64::from(n) - 1)
}

/// `-(|E_n| - 2|E(S,S̄)|)/2 - h(|S| - |S̄|)/2`.
pub fn hamiltonian<T: Field>(s: &Config, p: &ModelParams<T>) -> T {
    let n = s.dim();
    let ec = edge_counts(s);
    let half = T::one() / T::from_int(2);
    let size = s.len() as i64;
    let rest = s.num_vertices() as i64 - size;
    -(T::from_int(total_edges(n) as i64) - T::from_int(2 * ec.boundary as i64)) * half
        - p.h * T::from_int(size - rest) * half
}

/// `(|E(S,S̄)|, |S|)`, realizing `H(S) - H(⊟)`.
pub fn energy_gap(s: &Config) -> EnergyValue {
    EnergyValue::new(edge_counts(s).boundary as i64, s.len() as i64)
}

/// Energy change from flipping vertex `v`.
pub fn flip_delta(s: &Config, v: u32) -> EnergyValue {
    let n = i64::from(s.dim());
    let deg = i64::from(s.degree_in(v));
    if s.contains(v) {
        EnergyValue::new(2 * deg - n, -1)
    } else {
        EnergyValue::new(n - 2 * deg, 1)
    }
}

fn check_profile_dim(n: u32) -> Result<()> {
    check_dim(n)?;
    if n > MAX_PROFILE_DIM {
        return Err(Error::capability(format!(
            "g tables need n <= {MAX_PROFILE_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// `g(k)` for `k = 0..=2^n` as exact pairs `(nk - 2·qsum(k-1), k)`.
pub fn g_values(n: u32) -> Result<Vec<EnergyValue>> {
    check_profile_dim(n)?;
    let nv = 1u64 << n;
    let table = QTable::new(nv)?;
    Ok((0..=nv)
        .map(|k| {
            let e = if k == 0 {
                0
            } else {
                u64::from(n) * k - 2 * table.qsum(k - 1)
            };
            EnergyValue::new(e as i64, k as i64)
        })
        .collect())
}

/// `g(k) = k(n-h) - 2·qsum(k-1)`, realized.
pub fn g_profile<T: Field>(n: u32, h: T) -> Result<Vec<T>> {
    Ok(g_values(n)?.into_iter().map(|g| g.realize(h)).collect())
}

/// `-β·H(S)`.
pub fn gibbs_log_weight<T: Real>(s: &Config, p: &ModelParams<T>) -> T {
    -(p.beta * hamiltonian(s, p))
}

fn check_state_space_dim(n: u32) -> Result<()> {
    check_dim(n)?;
    if n > MAX_STATE_SPACE_DIM {
        return Err(Error::capability(format!(
            "sums over all 2^(2^n) configurations need n <= {MAX_STATE_SPACE_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// `ln Z`, accumulated with a max shift.
pub fn log_partition_function<T: Real>(n: u32, h: T, beta: T) -> Result<T> {
    check_state_space_dim(n)?;
    let p = ModelParams {
        n,
        h,
        beta,
        admissible: false,
    };
    let count = 1u64 << (1u32 << n);
    let weights: Vec<T> = (0..count)
        .map(|m| gibbs_log_weight(&Config::from_mask(n, m).expect("n <= 4"), &p))
        .collect();
    let max = weights
        .iter()
        .copied()
        .fold(weights[0], |a, b| if b > a { b } else { a });
    let sum = weights
        .iter()
        .fold(T::zero(), |acc, &w| acc + (w - max).exp());
    Ok(max + sum.ln())
}

pub fn partition_function<T: Real>(n: u32, h: T, beta: T) -> Result<T> {
    Ok(log_partition_function(n, h, beta)?.exp())
}

/// Result of scanning `b·h` for `b = 1..=2^n` against the integers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldReport<T> {
    pub n: u32,
    pub h: T,
    pub tol: T,
    /// `min_b |b·h - a|` over `b <= 2^n` and integers `a`.
    pub margin: T,
    pub witness_a: i64,
    pub witness_b: u64,
    pub admissible: bool,
}

impl<T: Field> FieldReport<T> {
    pub fn check(&self) -> Result<()> {
        if self.admissible {
            Ok(())
        } else {
            Err(Error::InadmissibleField {
                h: self.h.as_f64(),
                a: self.witness_a,
                b: self.witness_b,
                margin: self.margin.as_f64(),
            })
        }
    }
}

pub fn default_field_tol<T: Field>(n: u32) -> T {
    T::from_f64(1e-9).expect("representable") / T::pow2(i64::from(n))
}

/// Admissibility scan; `tol` defaults to `1e-9 / 2^n`.
pub fn validate_field<T: Field>(n: u32, h: T, tol: Option<T>) -> Result<FieldReport<T>> {
    check_profile_dim(n)?;
    if !(h > T::zero() && h < T::from_int(i64::from(n))) {
        return Err(Error::param(format!("field h = {h} must lie in (0, {n})")));
    }
    let tol = tol.unwrap_or_else(|| default_field_tol(n));
    let mut best: Option<(T, i64, u64)> = None;
    for b in 1..=1u64 << n {
        let x = h * T::from_int(b as i64);
        let a = x.round_half_up();
        let dist = (x - a).abs();
        if best.is_none_or(|(m, _, _)| dist < m) {
            best = Some((dist, a.floor_int(), b));
        }
    }
    let (margin, witness_a, witness_b) = best.expect("at least one denominator");
    Ok(FieldReport {
        n,
        h,
        tol,
        margin,
        witness_a,
        witness_b,
        admissible: margin > tol,
    })
}
