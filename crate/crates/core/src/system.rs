//! Assembly of the reduced linear system `dv/dt = M v + I` over canonical
//! correlators.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::eom::{derivative_terms, EomOptions, Origin, Target};
use crate::error::{Error, Result};
use crate::index::{canonicalize, enumerate_canonical, sort_canonical, CorrelatorIndex};
use crate::params::SystemParams;

pub const DEFAULT_NONZERO_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedEntry {
    pub col: usize,
    pub origin: Origin,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub eom: EomOptions,
    pub nonzero_cap: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            eom: EomOptions::default(),
            nonzero_cap: DEFAULT_NONZERO_CAP,
        }
    }
}

/// `M` and `I` over an ordered list of canonical correlators. Matrix entries
/// keep their origin tag; entries of a row are sorted by `(col, origin)`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub params: SystemParams,
    pub options: AssemblyOptions,
    index: Vec<CorrelatorIndex>,
    lookup: HashMap<CorrelatorIndex, usize>,
    rows: Vec<Vec<TaggedEntry>>,
    rhs: Vec<Vec<(Origin, Complex64)>>,
}

type RowTerms = (BTreeMap<(usize, Origin), Complex64>, BTreeMap<Origin, Complex64>);

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &[CorrelatorIndex] {
        &self.index
    }

    /// Row of a correlator, canonicalizing first.
    pub fn row_of(&self, idx: &CorrelatorIndex) -> Option<usize> {
        self.lookup.get(&canonicalize(idx)).copied()
    }

    pub fn tagged_row(&self, row: usize) -> &[TaggedEntry] {
        &self.rows[row]
    }

    pub fn tagged_rhs(&self, row: usize) -> &[(Origin, Complex64)] {
        &self.rhs[row]
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Untagged row: entries with equal column summed, zeros removed.
    pub fn row(&self, row: usize) -> Vec<(usize, Complex64)> {
        let mut out: Vec<(usize, Complex64)> = Vec::new();
        for e in &self.rows[row] {
            match out.last_mut() {
                Some((c, v)) if *c == e.col => *v += e.value,
                _ => out.push((e.col, e.value)),
            }
        }
        out.retain(|(_, v)| *v != Complex64::new(0.0, 0.0));
        out
    }

    /// Dense vector `I`.
    pub fn rhs(&self) -> Vec<Complex64> {
        self.rhs.iter().map(|r| r.iter().map(|(_, v)| v).sum()).collect()
    }

    /// `(row, col, value)` triplets of the untagged `M`.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        (0..self.dim())
            .flat_map(|r| self.row(r).into_iter().map(move |(c, v)| (r, c, v)))
            .collect()
    }

    /// `M v + I`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let rhs = self.rhs();
        (0..self.dim())
            .map(|r| rhs[r] + self.rows[r].iter().map(|e| e.value * v[e.col]).sum::<Complex64>())
            .collect()
    }

    /// Writes one line per tagged nonzero: `row col re im origin`. Entries
    /// of `I` use the column token `I`.
    pub fn write_debug<W: Write>(&self, mut w: W) -> io::Result<()> {
        for r in 0..self.dim() {
            for e in &self.rows[r] {
                writeln!(w, "{} {} {:.17e} {:.17e} {}", r, e.col, e.value.re, e.value.im, e.origin)?;
            }
            for (o, v) in &self.rhs[r] {
                writeln!(w, "{} I {:.17e} {:.17e} {}", r, v.re, v.im, o)?;
            }
        }
        Ok(())
    }

    fn from_rows(
        params: SystemParams,
        options: AssemblyOptions,
        index: Vec<CorrelatorIndex>,
        terms: Vec<RowTerms>,
    ) -> Result<Self> {
        let lookup: HashMap<_, _> = index.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let mut rows = Vec::with_capacity(index.len());
        let mut rhs = Vec::with_capacity(index.len());
        let mut nnz = 0usize;
        for (entries, ident) in terms {
            let row: Vec<TaggedEntry> = entries
                .into_iter()
                .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
                .map(|((col, origin), value)| TaggedEntry { col, origin, value })
                .collect();
            nnz += row.len();
            rows.push(row);
            rhs.push(ident.into_iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect());
        }
        if nnz > options.nonzero_cap {
            return Err(Error::DimensionOverflow { needed: nnz, cap: options.nonzero_cap });
        }
        Ok(Self { params, options, index, lookup, rows, rhs })
    }
}

/// Canonicalized terms of one row, with targets mapped through `col_of`.
fn row_terms(
    idx: &CorrelatorIndex,
    params: &SystemParams,
    eom: EomOptions,
    mut col_of: impl FnMut(&CorrelatorIndex) -> usize,
) -> RowTerms {
    let mut entries = BTreeMap::new();
    let mut ident = BTreeMap::new();
    for t in derivative_terms(idx, params, eom) {
        match t.target {
            Target::Identity => *ident.entry(t.origin).or_insert(Complex64::new(0.0, 0.0)) += t.coefficient,
            Target::Correlator(c) => {
                let col = col_of(&canonicalize(&c));
                *entries.entry((col, t.origin)).or_insert(Complex64::new(0.0, 0.0)) += t.coefficient;
            }
        }
    }
    (entries, ident)
}

/// Full reduced system over every canonical correlator.
pub fn assemble_system(params: &SystemParams, options: AssemblyOptions) -> Result<ReducedSystem> {
    // Every row carries at least one diagonal entry, so the orbit count
    // bounds the nonzeros from below.
    let space = ((params.n_max + 1) as u128).pow(2 * params.n_cavities as u32);
    let min_rows = (space - 1) / (2 * params.n_cavities as u128);
    if min_rows > options.nonzero_cap as u128 {
        return Err(Error::DimensionOverflow { needed: min_rows as usize, cap: options.nonzero_cap });
    }
    let index = enumerate_canonical(params.n_cavities, params.n_max);
    let lookup: HashMap<&CorrelatorIndex, usize> = index.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let terms: Vec<RowTerms> = index
        .par_iter()
        .map(|idx| row_terms(idx, params, options.eom, |c| lookup[c]))
        .collect();
    ReducedSystem::from_rows(*params, options, index.clone(), terms)
}

/// Smallest subsystem closed under the generator that contains `seeds`.
///
/// Every correlator referenced by a row of the closure is itself a row, so
/// solving the closure gives exactly the values of the full system on it.
pub fn assemble_closure(
    params: &SystemParams,
    options: AssemblyOptions,
    seeds: &[CorrelatorIndex],
) -> Result<ReducedSystem> {
    let mut found: HashMap<CorrelatorIndex, usize> = HashMap::new();
    let mut order: Vec<CorrelatorIndex> = Vec::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        assert_eq!(s.len(), params.n_cavities, "seed length must equal N");
        if s.max_exponent() as usize > params.n_max {
            continue;
        }
        let c = canonicalize(s);
        if !found.contains_key(&c) {
            found.insert(c.clone(), order.len());
            order.push(c.clone());
            queue.push_back(c);
        }
    }
    let mut raw_rows: Vec<RowTerms> = Vec::new();
    let mut nnz = 0usize;
    while let Some(idx) = queue.pop_front() {
        let terms = row_terms(&idx, params, options.eom, |c| {
            if let Some(&k) = found.get(c) {
                k
            } else {
                let k = order.len();
                found.insert(c.clone(), k);
                order.push(c.clone());
                queue.push_back(c.clone());
                k
            }
        });
        nnz += terms.0.len();
        if nnz > options.nonzero_cap {
            return Err(Error::DimensionOverflow { needed: nnz, cap: options.nonzero_cap });
        }
        raw_rows.push(terms);
    }

    // Renumber into the canonical sort order.
    let mut sorted = order.clone();
    sort_canonical(&mut sorted);
    let new_pos: HashMap<&CorrelatorIndex, usize> = sorted.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let remap: Vec<usize> = order.iter().map(|c| new_pos[c]).collect();
    let mut terms: Vec<Option<RowTerms>> = vec![None; sorted.len()];
    for (old, (entries, ident)) in raw_rows.into_iter().enumerate() {
        let entries = entries.into_iter().map(|((c, o), v)| ((remap[c], o), v)).collect();
        terms[remap[old]] = Some((entries, ident));
    }
    let terms = terms.into_iter().map(|t| t.expect("closure row missing")).collect();
    ReducedSystem::from_rows(*params, options, sorted, terms)
}
