//! Exact stationary solution `v = -M^{-1} I` of the reduced system.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{canonicalize, CorrelatorIndex};
use crate::linalg::{solve_triplets, SolverOptions};
use crate::params::SystemParams;
use crate::system::{assemble_closure, AssemblyOptions, ReducedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Pert0,
    Pert1,
    Pert2,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Exact, Method::Pert0, Method::Pert1, Method::Pert2, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Pert0 => "pert0",
            Method::Pert1 => "pert1",
            Method::Pert2 => "pert2",
            Method::Oracle => "oracle",
        }
    }

    pub fn perturbative_order(self) -> Option<usize> {
        match self {
            Method::Pert0 => Some(0),
            Method::Pert1 => Some(1),
            Method::Pert2 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// Correlator values keyed by canonical index.
#[derive(Debug, Clone)]
pub struct SolutionVector {
    pub params: SystemParams,
    pub method: Method,
    pub residual: f64,
    values: Vec<(CorrelatorIndex, Complex64)>,
    lookup: HashMap<CorrelatorIndex, usize>,
}

impl SolutionVector {
    pub fn new(
        params: SystemParams,
        method: Method,
        residual: f64,
        values: Vec<(CorrelatorIndex, Complex64)>,
    ) -> Self {
        let lookup = values.iter().enumerate().map(|(i, (c, _))| (c.clone(), i)).collect();
        Self { params, method, residual, values, lookup }
    }

    pub fn values(&self) -> &[(CorrelatorIndex, Complex64)] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of any (not necessarily canonical) index.
    pub fn get(&self, idx: &CorrelatorIndex) -> Option<Complex64> {
        self.lookup.get(&canonicalize(idx)).map(|&i| self.values[i].1)
    }

    /// Single-cavity moment `<a^{+m} a^n>`; the identity is 1.
    pub fn single(&self, m: u8, n: u8) -> Option<Complex64> {
        match CorrelatorIndex::single(self.params.n_cavities, m, n) {
            None => Some(Complex64::new(1.0, 0.0)),
            Some(idx) => self.get(&idx),
        }
    }

    /// Largest conjugate-pair mismatch `|<O^+> - conj<O>|` over stored pairs.
    pub fn conjugation_defect(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|(c, v)| self.get(&c.conj()).map(|w| (w - v.conj()).norm()))
            .fold(0.0, f64::max)
    }
}

/// `max_r |(M v + I)_r|`.
pub fn residual_norm(system: &ReducedSystem, v: &[Complex64]) -> f64 {
    system.apply(v).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn solve_steady(system: &ReducedSystem) -> Result<SolutionVector> {
    solve_steady_with(system, SolverOptions::default())
}

pub fn solve_steady_with(system: &ReducedSystem, opts: SolverOptions) -> Result<SolutionVector> {
    let rhs: Vec<Complex64> = system.rhs().into_iter().map(|z| -z).collect();
    let sol = solve_triplets(system.dim(), &system.triplets(), &rhs, opts)?;
    let residual = residual_norm(system, &sol.x);
    let values = system.index().iter().cloned().zip(sol.x).collect();
    Ok(SolutionVector::new(system.params, Method::Exact, residual, values))
}

/// Correlators needed for `n_a`, `g2` and the neighbour coherence.
pub fn observable_seeds(params: &SystemParams) -> Vec<CorrelatorIndex> {
    let n = params.n_cavities;
    let mut seeds = vec![CorrelatorIndex::single(n, 1, 1).unwrap()];
    if params.n_max >= 2 {
        seeds.push(CorrelatorIndex::single(n, 2, 2).unwrap());
    }
    if n >= 2 {
        let mut pairs = vec![crate::index::PairIndex::ZERO; n];
        pairs[0] = crate::index::PairIndex::new(1, 0);
        pairs[1] = crate::index::PairIndex::new(0, 1);
        seeds.push(CorrelatorIndex::new(pairs).unwrap());
    }
    seeds
}

/// Exact solution restricted to the closure of `seeds`; values on the
/// closure equal those of the full reduced system.
pub fn solve_exact_for(
    params: &SystemParams,
    assembly: AssemblyOptions,
    seeds: &[CorrelatorIndex],
) -> Result<SolutionVector> {
    let system = assemble_closure(params, assembly, seeds)?;
    solve_steady(&system)
}
