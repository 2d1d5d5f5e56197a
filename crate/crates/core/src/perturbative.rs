//! Support-pattern block decomposition and the expansion of the
//! single-cavity correlators in powers of the tunneling rate `J`.
//!
//! Rows of the reduced system are grouped by support pattern. Within a row
//! block, `M` holds every `J`-independent coupling inside the pattern, `S`
//! the hopping couplings inside the pattern divided by `iJ`, `B` the
//! drive/pump couplings to another pattern and `R` the hopping couplings to
//! another pattern divided by `iJ`. `S` and `R` are integer matrices.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;

use crate::eom::{derivative_terms, EomOptions, Origin, Target};
use crate::error::{Error, Result};
use crate::index::{canonicalize, sort_canonical, CorrelatorIndex, PairIndex};
use crate::linalg::{DenseMatrix, SolverOptions};
use crate::params::SystemParams;
use crate::pattern::{classify_pattern, Pattern};
use crate::steady::{Method, SolutionVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn template(p: Pattern) -> &'static [usize] {
    match p {
        Pattern::A => &[0],
        Pattern::B => &[0, 1],
        Pattern::C => &[0, 1, 2],
        Pattern::D => &[0, 1, 2, 3],
        Pattern::E => &[0, 2],
        Pattern::Other => &[],
    }
}

/// Canonical correlators of one support pattern, sorted.
pub fn canonical_of_pattern(n_cavities: usize, n_max: usize, pattern: Pattern) -> Vec<CorrelatorIndex> {
    let sites = template(pattern);
    if sites.is_empty() || *sites.last().unwrap() >= n_cavities {
        return Vec::new();
    }
    let nonzero: Vec<PairIndex> = (0..=n_max as u8)
        .flat_map(|m| (0..=n_max as u8).map(move |n| PairIndex::new(m, n)))
        .filter(|p| !p.is_zero())
        .collect();
    let mut seen = HashSet::new();
    let mut choice = vec![0usize; sites.len()];
    'outer: loop {
        let mut pairs = vec![PairIndex::ZERO; n_cavities];
        for (k, &s) in sites.iter().enumerate() {
            pairs[s] = nonzero[choice[k]];
        }
        let idx = canonicalize(&CorrelatorIndex::new(pairs).unwrap());
        if classify_pattern(&idx) == pattern {
            seen.insert(idx);
        }
        for c in choice.iter_mut() {
            *c += 1;
            if *c < nonzero.len() {
                continue 'outer;
            }
            *c = 0;
        }
        break;
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    sort_canonical(&mut out);
    out
}

/// Tagged couplings of a set of row patterns, split into `M`, `S`, `B`, `R`
/// and `I` blocks.
#[derive(Debug, Clone)]
pub struct PatternBlocks {
    pub params: SystemParams,
    index: BTreeMap<Pattern, Vec<CorrelatorIndex>>,
    lookup: HashMap<CorrelatorIndex, (Pattern, usize)>,
    row_patterns: Vec<Pattern>,
    within: BTreeMap<Pattern, DenseMatrix>,
    hop: BTreeMap<(Pattern, Pattern), DenseMatrix>,
    cross: BTreeMap<(Pattern, Pattern), DenseMatrix>,
    rhs: BTreeMap<Pattern, Vec<Complex64>>,
}

impl PatternBlocks {
    pub fn build(params: &SystemParams, eom: EomOptions, row_patterns: &[Pattern]) -> Result<Self> {
        let mut index: BTreeMap<Pattern, Vec<CorrelatorIndex>> = BTreeMap::new();
        for &p in row_patterns {
            index.insert(p, canonical_of_pattern(params.n_cavities, params.n_max, p));
        }
        // Hop coefficients are evaluated at J = 1 so that they read as i*k.
        let unit = params.with_j(1.0);
        let mut raw: Vec<(Pattern, usize, Vec<(Origin, Option<CorrelatorIndex>, Complex64)>)> = Vec::new();
        let mut extra: BTreeMap<Pattern, HashSet<CorrelatorIndex>> = BTreeMap::new();
        for &p in row_patterns {
            for (r, idx) in index[&p].iter().enumerate() {
                let mut terms = Vec::new();
                for t in derivative_terms(idx, &unit, eom) {
                    let target = match t.target {
                        Target::Identity => None,
                        Target::Correlator(c) => {
                            let c = canonicalize(&c);
                            let tp = classify_pattern(&c);
                            if !row_patterns.contains(&tp) {
                                extra.entry(tp).or_default().insert(c.clone());
                            }
                            Some(c)
                        }
                    };
                    terms.push((t.origin, target, t.coefficient));
                }
                raw.push((p, r, terms));
            }
        }
        for (p, set) in extra {
            let mut list: Vec<_> = set.into_iter().collect();
            sort_canonical(&mut list);
            index.insert(p, list);
        }
        let mut lookup = HashMap::new();
        for (&p, list) in &index {
            for (i, c) in list.iter().enumerate() {
                lookup.insert(c.clone(), (p, i));
            }
        }
        let dim = |p: &Pattern| index[p].len();
        let mut within: BTreeMap<Pattern, DenseMatrix> = BTreeMap::new();
        let mut hop: BTreeMap<(Pattern, Pattern), DenseMatrix> = BTreeMap::new();
        let mut cross: BTreeMap<(Pattern, Pattern), DenseMatrix> = BTreeMap::new();
        let mut rhs: BTreeMap<Pattern, Vec<Complex64>> = BTreeMap::new();
        for &p in row_patterns {
            within.insert(p, DenseMatrix::zeros(dim(&p), dim(&p)));
            rhs.insert(p, vec![ZERO; dim(&p)]);
        }
        for (p, r, terms) in raw {
            for (origin, target, coeff) in terms {
                let Some(c) = target else {
                    rhs.get_mut(&p).unwrap()[r] += coeff;
                    continue;
                };
                let (q, col) = lookup[&c];
                if origin == Origin::Hop {
                    // coeff = i*k  =>  k = coeff / i
                    let k = coeff * Complex64::new(0.0, -1.0);
                    hop.entry((p, q))
                        .or_insert_with(|| DenseMatrix::zeros(dim(&p), dim(&q)))
                        .add(r, col, k);
                } else if p == q {
                    within.get_mut(&p).unwrap().add(r, col, coeff);
                } else {
                    cross
                        .entry((p, q))
                        .or_insert_with(|| DenseMatrix::zeros(dim(&p), dim(&q)))
                        .add(r, col, coeff);
                }
            }
        }
        Ok(Self {
            params: *params,
            index,
            lookup,
            row_patterns: row_patterns.to_vec(),
            within,
            hop,
            cross,
            rhs,
        })
    }

    pub fn indices(&self, p: Pattern) -> &[CorrelatorIndex] {
        self.index.get(&p).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn position(&self, idx: &CorrelatorIndex) -> Option<(Pattern, usize)> {
        self.lookup.get(&canonicalize(idx)).copied()
    }

    pub fn dim(&self, p: Pattern) -> usize {
        self.indices(p).len()
    }

    /// `J`-independent couplings inside pattern `p` (the `M` block).
    pub fn m(&self, p: Pattern) -> DenseMatrix {
        self.within[&p].clone()
    }

    /// Hopping couplings divided by `iJ`: `S` when `p == q`, else `R_pq`.
    pub fn hop(&self, p: Pattern, q: Pattern) -> DenseMatrix {
        self.hop.get(&(p, q)).cloned().unwrap_or_else(|| DenseMatrix::zeros(self.dim(p), self.dim(q)))
    }

    /// Drive/pump couplings from pattern `p` rows to pattern `q` (the `B` block).
    pub fn b(&self, p: Pattern, q: Pattern) -> DenseMatrix {
        self.cross.get(&(p, q)).cloned().unwrap_or_else(|| DenseMatrix::zeros(self.dim(p), self.dim(q)))
    }

    pub fn rhs(&self, p: Pattern) -> Vec<Complex64> {
        self.rhs.get(&p).cloned().unwrap_or_else(|| vec![ZERO; self.dim(p)])
    }

    /// Column patterns coupled to rows of `p`, with any nonzero block.
    pub fn coupled_patterns(&self, p: Pattern) -> Vec<Pattern> {
        let mut out: Vec<Pattern> = self
            .hop
            .iter()
            .chain(self.cross.iter())
            .filter(|((r, _), m)| *r == p && !m.is_zero())
            .map(|((_, q), _)| *q)
            .filter(|q| *q != p)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn row_patterns(&self) -> &[Pattern] {
        &self.row_patterns
    }

    /// `M_p + iJ S_p` at the stored `J`.
    fn full_within(&self, p: Pattern) -> DenseMatrix {
        self.m(p).plus(&self.hop(p, p).scaled(Complex64::new(0.0, self.params.j)))
    }

    /// `B_pq + iJ R_pq` at the stored `J`.
    fn full_cross(&self, p: Pattern, q: Pattern) -> DenseMatrix {
        self.b(p, q).plus(&self.hop(p, q).scaled(Complex64::new(0.0, self.params.j)))
    }
}

/// Blocks entering the second-order expansion on a ring of `N >= 4`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub params: SystemParams,
    pub a: Vec<CorrelatorIndex>,
    pub b: Vec<CorrelatorIndex>,
    pub c: Vec<CorrelatorIndex>,
    pub e: Vec<CorrelatorIndex>,
    pub m_a: DenseMatrix,
    pub s_a: DenseMatrix,
    pub r_ab: DenseMatrix,
    pub i_a: Vec<Complex64>,
    pub m_b: DenseMatrix,
    pub s_b: DenseMatrix,
    pub b_ba: DenseMatrix,
    pub r_ba: DenseMatrix,
    pub r_bc: DenseMatrix,
    /// Hopping from adjacent pairs onto pairs at distance two.
    pub r_be: DenseMatrix,
}

pub fn build_blocks(params: &SystemParams, eom: EomOptions) -> Result<BlockSystem> {
    if params.n_cavities < 4 {
        return Err(Error::UnsupportedN { expected: ">= 4", got: params.n_cavities });
    }
    let pb = PatternBlocks::build(params, eom, &[Pattern::A, Pattern::B])?;
    for (p, allowed) in [
        (Pattern::A, &[Pattern::B][..]),
        (Pattern::B, &[Pattern::A, Pattern::C, Pattern::E][..]),
    ] {
        if let Some(q) = pb.coupled_patterns(p).into_iter().find(|q| !allowed.contains(q)) {
            return Err(Error::InvalidConfig(format!("unexpected coupling from pattern {p} to {q}")));
        }
    }
    if !pb.b(Pattern::A, Pattern::B).is_zero() {
        return Err(Error::InvalidConfig("drive coupling from pattern a to b".into()));
    }
    Ok(BlockSystem {
        params: *params,
        a: pb.indices(Pattern::A).to_vec(),
        b: pb.indices(Pattern::B).to_vec(),
        c: pb.indices(Pattern::C).to_vec(),
        e: pb.indices(Pattern::E).to_vec(),
        m_a: pb.m(Pattern::A),
        s_a: pb.hop(Pattern::A, Pattern::A),
        r_ab: pb.hop(Pattern::A, Pattern::B),
        i_a: pb.rhs(Pattern::A),
        m_b: pb.m(Pattern::B),
        s_b: pb.hop(Pattern::B, Pattern::B),
        b_ba: pb.b(Pattern::B, Pattern::A),
        r_ba: pb.hop(Pattern::B, Pattern::A),
        r_bc: pb.hop(Pattern::B, Pattern::C),
        r_be: pb.hop(Pattern::B, Pattern::E),
    })
}

/// Product of single-cavity moments over the occupied cavities of `idx`.
pub fn zero_order_product(idx: &CorrelatorIndex, single_cavity: &SolutionVector) -> Complex64 {
    product_moment(idx, |p| {
        single_cavity
            .single(p.m, p.n)
            .expect("single-cavity moment missing from zero-order solution")
    })
}

fn product_moment(idx: &CorrelatorIndex, mut moment: impl FnMut(PairIndex) -> Complex64) -> Complex64 {
    idx.pairs()
        .iter()
        .filter(|p| !p.is_zero())
        .map(|&p| moment(p))
        .product()
}

fn neg(v: Vec<Complex64>) -> Vec<Complex64> {
    v.into_iter().map(|z| -z).collect()
}

fn axpy(acc: &mut [Complex64], s: Complex64, x: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += s * b;
    }
}

/// Order-by-order coefficients of the expansion in `J`.
#[derive(Debug, Clone)]
pub struct PerturbativeSeries {
    pub blocks: BlockSystem,
    /// `v_a^(0)`, `v_a^(1)`, `v_a^(2)`.
    pub va: [Vec<Complex64>; 3],
    /// `v_b^(0)` (product form) and `v_b^(1)`.
    pub vb: [Vec<Complex64>; 2],
    pub vc0: Vec<Complex64>,
    pub ve0: Vec<Complex64>,
}

impl PerturbativeSeries {
    pub fn compute(params: &SystemParams, eom: EomOptions, opts: SolverOptions) -> Result<Self> {
        let blocks = build_blocks(params, eom)?;
        let i = Complex64::i();
        let ma = blocks.m_a.factor(opts)?;
        let mb = blocks.m_b.factor(opts)?;

        let va0 = neg(ma.solve(&blocks.i_a));
        let moments: HashMap<PairIndex, Complex64> = blocks
            .a
            .iter()
            .zip(&va0)
            .map(|(c, v)| (c.pairs()[c.support()[0]], *v))
            .collect();
        let product = |list: &[CorrelatorIndex]| -> Vec<Complex64> {
            list.iter().map(|c| product_moment(c, |p| moments[&p])).collect()
        };
        let vb0 = product(&blocks.b);
        let vc0 = product(&blocks.c);
        let ve0 = product(&blocks.e);

        let mut rhs = blocks.s_a.mul_vec(&va0);
        axpy(&mut rhs, Complex64::new(1.0, 0.0), &blocks.r_ab.mul_vec(&vb0));
        let va1 = neg(ma.solve(&rhs.iter().map(|z| i * z).collect::<Vec<_>>()));

        let mut rhs = vec![ZERO; blocks.b.len()];
        axpy(&mut rhs, i, &blocks.r_ba.mul_vec(&va0));
        axpy(&mut rhs, Complex64::new(1.0, 0.0), &blocks.b_ba.mul_vec(&va1));
        axpy(&mut rhs, i, &blocks.s_b.mul_vec(&vb0));
        axpy(&mut rhs, i, &blocks.r_bc.mul_vec(&vc0));
        axpy(&mut rhs, i, &blocks.r_be.mul_vec(&ve0));
        let vb1 = neg(mb.solve(&rhs));

        let mut rhs = vec![ZERO; blocks.a.len()];
        axpy(&mut rhs, i, &blocks.s_a.mul_vec(&va1));
        axpy(&mut rhs, i, &blocks.r_ab.mul_vec(&vb1));
        let va2 = neg(ma.solve(&rhs));

        Ok(Self { blocks, va: [va0, va1, va2], vb: [vb0, vb1], vc0, ve0 })
    }

    /// `v_a` summed through `order` at tunneling rate `j`.
    pub fn va_at(&self, order: usize, j: f64) -> Vec<Complex64> {
        let mut out = self.va[0].clone();
        let mut jk = 1.0;
        for k in 1..=order.min(2) {
            jk *= j;
            axpy(&mut out, Complex64::new(jk, 0.0), &self.va[k]);
        }
        out
    }

    /// `v_b` summed through `order - 1` (at least the product form).
    pub fn vb_at(&self, order: usize, j: f64) -> Vec<Complex64> {
        let mut out = self.vb[0].clone();
        if order >= 2 {
            axpy(&mut out, Complex64::new(j, 0.0), &self.vb[1]);
        }
        out
    }

    /// Max-norm residual of the single-cavity block equations with the
    /// truncated series inserted; scales as `J^(order+1)`.
    pub fn residual(&self, order: usize, j: f64) -> f64 {
        let b = &self.blocks;
        let va = self.va_at(order, j);
        let vb = self.vb_at(order, j);
        let mut r = b.m_a.mul_vec(&va);
        axpy(&mut r, Complex64::new(1.0, 0.0), &b.i_a);
        axpy(&mut r, Complex64::new(0.0, j), &b.s_a.mul_vec(&va));
        axpy(&mut r, Complex64::new(0.0, j), &b.r_ab.mul_vec(&vb));
        r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Single-cavity correlators to order `order` in `J`, valid for `N >= 4`.
pub fn solve_perturbative(params: &SystemParams, order: usize, eom: EomOptions) -> Result<SolutionVector> {
    let method = match order {
        0 => Method::Pert0,
        1 => Method::Pert1,
        2 => Method::Pert2,
        _ => return Err(Error::InvalidConfig(format!("perturbative order {order} not in 0..=2"))),
    };
    let series = PerturbativeSeries::compute(params, eom, SolverOptions::default())?;
    let va = series.va_at(order, params.j);
    let residual = series.residual(order, params.j);
    let values = series.blocks.a.iter().cloned().zip(va).collect();
    Ok(SolutionVector::new(*params, method, residual, values))
}

/// Exact stationary state of a ring of two or three cavities by eliminating
/// the pattern blocks from the top down.
pub fn solve_recursive_exact(params: &SystemParams, eom: EomOptions) -> Result<SolutionVector> {
    let opts = SolverOptions::default();
    let levels: &[Pattern] = match params.n_cavities {
        2 => &[Pattern::A, Pattern::B],
        3 => &[Pattern::A, Pattern::B, Pattern::C],
        n => return Err(Error::UnsupportedN { expected: "{2, 3}", got: n }),
    };
    let pb = PatternBlocks::build(params, eom, levels)?;
    for (k, &p) in levels.iter().enumerate() {
        for q in pb.coupled_patterns(p) {
            let ok = levels.iter().position(|&x| x == q).is_some_and(|kq| kq.abs_diff(k) == 1);
            if !ok {
                return Err(Error::InvalidConfig(format!("unexpected coupling from pattern {p} to {q}")));
            }
        }
    }
    if levels.iter().skip(1).any(|&p| pb.rhs(p).iter().any(|z| z.norm() > 0.0)) {
        return Err(Error::InvalidConfig("identity coupling outside pattern a".into()));
    }

    // F_{k,k-1} = -(A_k + C_{k,k+1} F_{k+1,k})^{-1} C_{k,k-1}, built top-down.
    let depth = levels.len();
    let mut f: Vec<Option<DenseMatrix>> = vec![None; depth];
    let mut lower: Option<DenseMatrix> = None;
    for k in (1..depth).rev() {
        let p = levels[k];
        let mut a = pb.full_within(p);
        if let Some(fk1) = &lower {
            a = a.plus(&pb.full_cross(p, levels[k + 1]).matmul(fk1));
        }
        let fk = a.factor(opts)?.solve_mat(&pb.full_cross(p, levels[k - 1])).scaled(Complex64::new(-1.0, 0.0));
        f[k] = Some(fk.clone());
        lower = Some(fk);
    }
    let a_eff = pb
        .full_within(Pattern::A)
        .plus(&pb.full_cross(Pattern::A, Pattern::B).matmul(lower.as_ref().unwrap()));
    let va = neg(a_eff.factor(opts)?.solve(&pb.rhs(Pattern::A)));

    let mut blocks_v: Vec<Vec<Complex64>> = vec![va];
    for k in 1..depth {
        let next = f[k].as_ref().unwrap().mul_vec(&blocks_v[k - 1]);
        blocks_v.push(next);
    }

    // Residual of every row block.
    let mut residual = 0.0_f64;
    for (k, &p) in levels.iter().enumerate() {
        let mut r = pb.full_within(p).mul_vec(&blocks_v[k]);
        axpy(&mut r, Complex64::new(1.0, 0.0), &pb.rhs(p));
        for (kq, &q) in levels.iter().enumerate() {
            if kq != k {
                axpy(&mut r, Complex64::new(1.0, 0.0), &pb.full_cross(p, q).mul_vec(&blocks_v[kq]));
            }
        }
        residual = r.iter().map(|z| z.norm()).fold(residual, f64::max);
    }

    let values = levels
        .iter()
        .zip(blocks_v)
        .flat_map(|(&p, v)| pb.indices(p).iter().cloned().zip(v).collect::<Vec<_>>())
        .collect();
    Ok(SolutionVector::new(*params, Method::Exact, residual, values))
}
