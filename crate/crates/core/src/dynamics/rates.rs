//! Metropolis-type Glauber rates `c(ξ,ξ') = exp(-β[ΔH]₊)`.

use serde::Serialize;

use crate::energy::{flip_delta, EnergyValue, ModelParams};
use crate::hypercube::Config;
use crate::scalar::Real;

fn rate_of<T: Real>(delta: EnergyValue, p: &ModelParams<T>) -> T {
    let d = delta.realize(p.h);
    if d <= T::zero() {
        T::one()
    } else {
        (-(p.beta * d)).exp()
    }
}

/// Rate of flipping `v` in `s`.
pub fn flip_rate<T: Real>(s: &Config, v: u32, p: &ModelParams<T>) -> T {
    rate_of(flip_delta(s, v), p)
}

/// Rates tabulated by whether the vertex is occupied and how many of its
/// neighbours are.
#[derive(Clone, Debug, Serialize)]
pub struct RateModel<T> {
    params: ModelParams<T>,
    add: Vec<T>,
    remove: Vec<T>,
}

impl<T: Real> RateModel<T> {
    pub fn new(params: ModelParams<T>) -> Self {
        let n = i64::from(params.n);
        let add = (0..=n)
            .map(|deg| rate_of(EnergyValue::new(n - 2 * deg, 1), &params))
            .collect();
        let remove = (0..=n)
            .map(|deg| rate_of(EnergyValue::new(2 * deg - n, -1), &params))
            .collect();
        Self {
            params,
            add,
            remove,
        }
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    #[inline]
    pub fn rate(&self, occupied: bool, deg: u32) -> T {
        if occupied {
            self.remove[deg as usize]
        } else {
            self.add[deg as usize]
        }
    }

    pub fn rate_at(&self, s: &Config, v: u32) -> T {
        self.rate(s.contains(v), s.degree_in(v))
    }

    /// Total exit rate of `s`.
    pub fn exit_rate(&self, s: &Config) -> T {
        (0..s.num_vertices() as u32).fold(T::zero(), |acc, v| acc + self.rate_at(s, v))
    }
}
