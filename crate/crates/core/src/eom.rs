//! Equations of motion for normal-ordered correlators of the Kerr ring.
//!
//! For `O = prod_i a_i^{+m_i} a_i^{n_i}` the master equation gives
//! `d<O>/dt` as a linear combination of other correlators. Each cavity
//! contributes local detuning, Kerr, loss, pump and drive terms; each ring
//! link contributes four hopping terms that move one exponent unit between
//! its two cavities.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::index::{CorrelatorIndex, PairIndex};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    Detuning,
    KerrDiagonal,
    KerrRaise,
    Decay,
    PumpDiagonal,
    PumpLower,
    Drive,
    Hop,
}

impl Origin {
    pub fn tag(self) -> &'static str {
        match self {
            Origin::Detuning => "detuning",
            Origin::KerrDiagonal => "kerr-diagonal",
            Origin::KerrRaise => "kerr-raise",
            Origin::Decay => "decay",
            Origin::PumpDiagonal => "pump-diagonal",
            Origin::PumpLower => "pump-lower",
            Origin::Drive => "drive",
            Origin::Hop => "hop",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "detuning" => Origin::Detuning,
            "kerr-diagonal" => Origin::KerrDiagonal,
            "kerr-raise" => Origin::KerrRaise,
            "decay" => Origin::Decay,
            "pump-diagonal" => Origin::PumpDiagonal,
            "pump-lower" => Origin::PumpLower,
            "drive" => Origin::Drive,
            "hop" => Origin::Hop,
            _ => return Err(format!("unknown origin tag `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Identity,
    Correlator(CorrelatorIndex),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EomTerm {
    pub target: Target,
    pub coefficient: Complex64,
    pub origin: Origin,
}

/// Generator switches that are not physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EomOptions {
    /// Use the loss-only diagonal `-(gamma/2)(m+n)` and drop the pump's
    /// `+(P/2)(m+n)` contribution.
    pub appendix_verbatim: bool,
}

/// Undirected links of the ring. Two cavities share a single link.
pub fn ring_edges(n_cavities: usize) -> Vec<(usize, usize)> {
    match n_cavities {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        n => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

struct TermSink<'a> {
    terms: Vec<EomTerm>,
    base: &'a [PairIndex],
    n_max: u8,
}

impl TermSink<'_> {
    /// Pushes a term whose target differs from the row by `edits` (cavity,
    /// new pair). Targets beyond the truncation or zero coefficients are dropped.
    fn push(&mut self, coefficient: Complex64, origin: Origin, edits: &[(usize, PairIndex)]) {
        if coefficient == Complex64::new(0.0, 0.0) {
            return;
        }
        if edits.iter().any(|(_, p)| p.m > self.n_max || p.n > self.n_max) {
            return;
        }
        let mut pairs = self.base.to_vec();
        for &(i, p) in edits {
            pairs[i] = p;
        }
        let target = match CorrelatorIndex::new(pairs) {
            Some(idx) => Target::Correlator(idx),
            None => Target::Identity,
        };
        self.terms.push(EomTerm {
            target,
            coefficient,
            origin,
        });
    }
}

/// All terms of `d<idx>/dt`. Targets are not canonicalized.
pub fn derivative_terms(idx: &CorrelatorIndex, params: &SystemParams, opts: EomOptions) -> Vec<EomTerm> {
    let i1 = Complex64::i();
    let re = |x: f64| Complex64::new(x, 0.0);
    let pairs = idx.pairs();
    let mut sink = TermSink {
        terms: Vec::new(),
        base: pairs,
        n_max: params.n_max as u8,
    };
    let (delta, u, omega, j) = (params.delta, params.u, params.omega, params.j);
    let (gamma, pump) = (params.gamma(), params.pump());

    for (i, &p) in pairs.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let (m, n) = (p.m as f64, p.n as f64);
        sink.push(i1 * delta * (m - n), Origin::Detuning, &[]);
        sink.push(
            i1 * (u / 2.0) * (m * (m - 1.0) - n * (n - 1.0)),
            Origin::KerrDiagonal,
            &[],
        );
        sink.push(re(-(gamma / 2.0) * (m + n)), Origin::Decay, &[]);
        if !opts.appendix_verbatim {
            sink.push(re((pump / 2.0) * (m + n)), Origin::PumpDiagonal, &[]);
        }
        if p.m > 0 && p.n > 0 {
            sink.push(re(pump * m * n), Origin::PumpLower, &[(i, PairIndex::new(p.m - 1, p.n - 1))]);
        }
        sink.push(i1 * u * (m - n), Origin::KerrRaise, &[(i, PairIndex::new(p.m + 1, p.n + 1))]);
        if p.m > 0 {
            sink.push(i1 * omega * m, Origin::Drive, &[(i, PairIndex::new(p.m - 1, p.n))]);
        }
        if p.n > 0 {
            sink.push(-i1 * omega * n, Origin::Drive, &[(i, PairIndex::new(p.m, p.n - 1))]);
        }
    }

    for (x, y) in ring_edges(pairs.len()) {
        for (from, to) in [(x, y), (y, x)] {
            let (pf, pt) = (pairs[from], pairs[to]);
            if pf.m > 0 {
                sink.push(
                    i1 * j * pf.m as f64,
                    Origin::Hop,
                    &[(from, PairIndex::new(pf.m - 1, pf.n)), (to, PairIndex::new(pt.m + 1, pt.n))],
                );
            }
            if pf.n > 0 {
                sink.push(
                    -i1 * j * pf.n as f64,
                    Origin::Hop,
                    &[(from, PairIndex::new(pf.m, pf.n - 1)), (to, PairIndex::new(pt.m, pt.n + 1))],
                );
            }
        }
    }
    sink.terms
}
