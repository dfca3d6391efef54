//! Finite state spaces for the exact solvers: either every configuration, or
//! one class per orbit of the automorphism group.
//!
//! The rates and the sets `{⊟}`, `{⊞}`, `C*` are invariant under every
//! automorphism of `Q_n`, so the orbit process is again Markov (strong
//! lumpability) and hitting quantities that only depend on orbits can be
//! computed on it exactly.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{apply_table, check_dim, group_tables, Config};
use crate::scalar::Real;

use super::rates::RateModel;

/// Largest dimension with an explicit state space.
pub const MAX_SOLVER_DIM: u32 = 4;

/// Largest dimension for the unlumped space (`2^16` states at `n = 4` would
/// need a sparse solver).
pub const MAX_FULL_SPACE_DIM: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lumping {
    Full,
    Orbits,
}

/// Classes ordered by size, then by the bits of the representative.
#[derive(Clone, Debug)]
pub struct StateSpace {
    n: u32,
    lumping: Lumping,
    reps: Vec<u64>,
    sizes: Vec<u64>,
    class_of: Vec<u32>,
}

fn class_key(mask: u64) -> (u32, u64) {
    (mask.count_ones(), mask)
}

impl StateSpace {
    pub fn new(n: u32, lumping: Lumping) -> Result<Self> {
        check_dim(n)?;
        let cap = match lumping {
            Lumping::Full => MAX_FULL_SPACE_DIM,
            Lumping::Orbits => MAX_SOLVER_DIM,
        };
        if n > cap {
            return Err(Error::capability(format!(
                "{lumping:?} state space needs n <= {cap}, got {n}"
            )));
        }
        let count = 1usize << (1u32 << n);
        let (mut reps, mut sizes) = (Vec::new(), Vec::new());
        let mut class_of = vec![u32::MAX; count];
        match lumping {
            Lumping::Full => {
                reps = (0..count as u64).collect();
                sizes = vec![1; count];
                class_of = (0..count as u32).collect();
            }
            Lumping::Orbits => {
                let tables = group_tables(n)?;
                for m in 0..count as u64 {
                    if class_of[m as usize] != u32::MAX {
                        continue;
                    }
                    // masks are visited in increasing order, so `m` is the
                    // minimum of its orbit
                    let id = reps.len() as u32;
                    let mut size = 0;
                    for t in tables {
                        let img = apply_table(t, m) as usize;
                        if class_of[img] == u32::MAX {
                            class_of[img] = id;
                            size += 1;
                        }
                    }
                    reps.push(m);
                    sizes.push(size);
                }
            }
        }
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by_key(|&i| class_key(reps[i]));
        let mut rank = vec![0u32; reps.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r as u32;
        }
        for c in class_of.iter_mut() {
            *c = rank[*c as usize];
        }
        Ok(Self {
            n,
            lumping,
            reps: order.iter().map(|&i| reps[i]).collect(),
            sizes: order.iter().map(|&i| sizes[i]).collect(),
            class_of,
        })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn lumping(&self) -> Lumping {
        self.lumping
    }

    pub fn num_classes(&self) -> usize {
        self.reps.len()
    }

    /// Smallest mask in the class.
    pub fn representative(&self, class: usize) -> Config {
        Config::from_mask(self.n, self.reps[class]).expect("n <= 4")
    }

    /// Number of configurations in the class.
    pub fn class_size(&self, class: usize) -> u64 {
        self.sizes[class]
    }

    pub fn class_of(&self, s: &Config) -> Result<usize> {
        if s.dim() != self.n {
            return Err(Error::param(format!(
                "configuration of dimension {} in a space of dimension {}",
                s.dim(),
                self.n
            )));
        }
        Ok(self.class_of[s.to_mask().expect("n <= 4") as usize] as usize)
    }

    pub(crate) fn class_of_mask(&self, mask: u64) -> usize {
        self.class_of[mask as usize] as usize
    }

    pub fn minus(&self) -> usize {
        0
    }

    pub fn plus(&self) -> usize {
        self.reps.len() - 1
    }

    /// Off-diagonal generator rows between classes, rates summed over the
    /// members of the target class.
    pub fn generator<T: Real>(&self, rates: &RateModel<T>) -> Vec<Vec<(usize, T)>> {
        let nv = 1u32 << self.n;
        let nbr: Vec<u64> = (0..nv)
            .map(|v| (0..self.n).fold(0u64, |m, i| m | 1 << (v ^ (1 << i))))
            .collect();
        self.reps
            .iter()
            .map(|&x| {
                let mut row: BTreeMap<usize, T> = BTreeMap::new();
                for v in 0..nv {
                    let occupied = x >> v & 1 == 1;
                    let deg = (x & nbr[v as usize]).count_ones();
                    let j = self.class_of_mask(x ^ 1 << v);
                    let r = rates.rate(occupied, deg);
                    row.entry(j).and_modify(|a| *a = *a + r).or_insert(r);
                }
                row.into_iter().collect()
            })
            .collect()
    }
}
