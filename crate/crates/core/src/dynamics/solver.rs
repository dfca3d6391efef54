//! Dense elimination for absorbing-chain systems `(D - R) x = b`.
//!
//! `R` holds the non-negative rates between unknown states, `D` the total exit
//! rate (to unknowns and to the absorbing boundary). Unknowns are eliminated
//! from the last index down; each pivot is recomputed as the sum of the
//! remaining off-diagonal rates plus the accumulated exit rate, so no
//! subtraction ever enters the factorization (the Grassmann–Taksar–Heyman
//! trick). Residuals are always evaluated in double-double arithmetic against
//! the double-double system.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{DoubleDouble, Real};

/// Default bound on `‖b - Ax‖_∞`.
pub const DEFAULT_RESIDUAL_BOUND: f64 = 1e-8;

/// `exp(βΓ*)` above which `Auto` goes straight to extended precision.
pub const EXTENDED_THRESHOLD: f64 = 1e12;

const MAX_REFINEMENTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    Auto,
    Double,
    Extended,
}

/// Arithmetic actually used for the factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Extended,
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Precision::Double => "double",
            Precision::Extended => "extended",
        })
    }
}

/// Linear system over the unknown states of an absorbing chain.
#[derive(Clone, Debug)]
pub(crate) struct AbsorbingSystem {
    /// Off-diagonal rates between unknowns.
    pub rows: Vec<Vec<(usize, DoubleDouble)>>,
    /// Rate from each unknown into the boundary.
    pub exit: Vec<DoubleDouble>,
    /// Right-hand sides, one vector per column.
    pub rhs: Vec<Vec<DoubleDouble>>,
}

struct Factorization<T> {
    m: usize,
    /// Row `k`, columns `j < k`: rates `R_kj` at elimination time.
    /// Row `i`, column `k > i`: multiplier `R_ik / D_k`.
    a: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Factorization<T> {
    fn new(sys: &AbsorbingSystem) -> Result<Self> {
        let m = sys.exit.len();
        let mut a = vec![T::zero(); m * m];
        for (i, row) in sys.rows.iter().enumerate() {
            for &(j, r) in row {
                a[i * m + j] = a[i * m + j] + T::from_double_double(r);
            }
        }
        let mut e: Vec<T> = sys.exit.iter().map(|&x| T::from_double_double(x)).collect();
        let mut d = vec![T::zero(); m];
        for k in (0..m).rev() {
            let dk = a[k * m..k * m + k].iter().fold(e[k], |acc, &x| acc + x);
            if !(dk > T::zero()) {
                return Err(Error::InvariantViolation(format!(
                    "unknown {k} cannot reach the absorbing set"
                )));
            }
            d[k] = dk;
            for i in 0..k {
                let rik = a[i * m + k];
                if rik == T::zero() {
                    continue;
                }
                let mult = rik / dk;
                a[i * m + k] = mult;
                e[i] = e[i] + mult * e[k];
                for j in 0..k {
                    if j != i {
                        let rkj = a[k * m + j];
                        if rkj != T::zero() {
                            a[i * m + j] = a[i * m + j] + mult * rkj;
                        }
                    }
                }
            }
        }
        Ok(Self { m, a, d })
    }

    fn solve(&self, b: &mut [T]) {
        let m = self.m;
        for k in (0..m).rev() {
            let bk = b[k];
            for (i, bi) in b.iter_mut().enumerate().take(k) {
                let mult = self.a[i * m + k];
                if mult != T::zero() {
                    *bi = *bi + mult * bk;
                }
            }
        }
        for k in 0..m {
            let acc = (0..k).fold(b[k], |acc, j| acc + self.a[k * m + j] * b[j]);
            b[k] = acc / self.d[k];
        }
    }
}

fn residual_column(sys: &AbsorbingSystem, b: &[DoubleDouble], x: &[DoubleDouble]) -> Vec<DoubleDouble> {
    (0..x.len())
        .map(|i| {
            let mut ax = DoubleDouble::ZERO;
            let mut diag = sys.exit[i];
            for &(j, r) in &sys.rows[i] {
                diag += r;
                ax -= r * x[j];
            }
            ax += diag * x[i];
            b[i] - ax
        })
        .collect()
}

fn max_abs(v: &[DoubleDouble]) -> f64 {
    v.iter().map(|x| x.hi().abs()).fold(0.0, f64::max)
}

/// Solution columns with the worst residual over all of them.
#[derive(Clone, Debug)]
pub(crate) struct Solved<T> {
    pub columns: Vec<Vec<T>>,
    pub residual: f64,
}

/// Factorize in `T`, solve each column, then refine with residuals computed in
/// double-double while the residual keeps shrinking.
pub(crate) fn solve_in<T: Real>(sys: &AbsorbingSystem) -> Result<Solved<T>> {
    let f = Factorization::<T>::new(sys)?;
    let mut columns = Vec::with_capacity(sys.rhs.len());
    let mut worst = 0.0f64;
    for b in &sys.rhs {
        let mut x: Vec<T> = b.iter().map(|&v| T::from_double_double(v)).collect();
        f.solve(&mut x);
        let xd: Vec<DoubleDouble> = x.iter().map(|v| v.to_double_double()).collect();
        let mut r = residual_column(sys, b, &xd);
        let mut norm = max_abs(&r);
        for _ in 0..MAX_REFINEMENTS {
            if norm == 0.0 {
                break;
            }
            let mut dx: Vec<T> = r.iter().map(|&v| T::from_double_double(v)).collect();
            f.solve(&mut dx);
            let cand: Vec<T> = x.iter().zip(&dx).map(|(&a, &b)| a + b).collect();
            let cand_d: Vec<DoubleDouble> = cand.iter().map(|v| v.to_double_double()).collect();
            let r2 = residual_column(sys, b, &cand_d);
            let n2 = max_abs(&r2);
            if !(n2 < norm) {
                break;
            }
            let improved = n2 < 0.5 * norm;
            (x, r, norm) = (cand, r2, n2);
            if !improved {
                break;
            }
        }
        worst = worst.max(norm);
        columns.push(x);
    }
    Ok(Solved {
        columns,
        residual: worst,
    })
}

/// Solve at the requested precision; `barrier` is `exp(βΓ*)`, used by `Auto`.
pub(crate) fn solve_certified(
    sys: &AbsorbingSystem,
    mode: PrecisionMode,
    barrier: f64,
    bound: f64,
) -> Result<(Solved<DoubleDouble>, Precision)> {
    let promote = |s: Solved<f64>| Solved {
        columns: s
            .columns
            .into_iter()
            .map(|c| c.into_iter().map(DoubleDouble::from).collect())
            .collect(),
        residual: s.residual,
    };
    let check = |s: Solved<DoubleDouble>, p: Precision| {
        if s.residual <= bound {
            Ok((s, p))
        } else {
            Err(Error::Precision {
                residual: s.residual,
                bound,
                mode: p.to_string(),
            })
        }
    };
    match mode {
        PrecisionMode::Double => check(promote(solve_in::<f64>(sys)?), Precision::Double),
        PrecisionMode::Extended => check(solve_in::<DoubleDouble>(sys)?, Precision::Extended),
        PrecisionMode::Auto => {
            if !(barrier <= EXTENDED_THRESHOLD) {
                return check(solve_in::<DoubleDouble>(sys)?, Precision::Extended);
            }
            let s = promote(solve_in::<f64>(sys)?);
            if s.residual <= bound {
                Ok((s, Precision::Double))
            } else {
                check(solve_in::<DoubleDouble>(sys)?, Precision::Extended)
            }
        }
    }
}
