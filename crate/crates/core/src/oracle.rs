//! Brute-force steady state of the full density matrix on a truncated Fock
//! space, used to validate the correlator solvers.

use num_complex::Complex64;

use crate::eom::ring_edges;
use crate::error::{Error, Result};
use crate::linalg::{solve_triplets, SolverOptions};
use crate::params::SystemParams;

pub const DEFAULT_DIM_CAP: usize = 256;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense square operator on the ring Hilbert space, row-major.
#[derive(Debug, Clone)]
struct Operator {
    d: usize,
    data: Vec<Complex64>,
}

impl Operator {
    fn zeros(d: usize) -> Self {
        Self { d, data: vec![ZERO; d * d] }
    }

    fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.d + c]
    }

    fn add(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.d + c] += v;
    }

    fn mul(&self, other: &Operator) -> Operator {
        let d = self.d;
        let mut out = Operator::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.at(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    let b = other.at(k, c);
                    if b != ZERO {
                        out.data[r * d + c] += a * b;
                    }
                }
            }
        }
        out
    }

    fn adjoint(&self) -> Operator {
        let d = self.d;
        let mut out = Operator::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.at(r, c).conj();
            }
        }
        out
    }

    /// Nonzeros of each column: `cols[k] = [(r, A_rk)]`.
    fn columns(&self) -> Vec<Vec<(usize, Complex64)>> {
        let d = self.d;
        let mut cols = vec![Vec::new(); d];
        for r in 0..d {
            for (c, col) in cols.iter_mut().enumerate() {
                let v = self.at(r, c);
                if v != ZERO {
                    col.push((r, v));
                }
            }
        }
        cols
    }
}

/// Mixed-radix Fock basis of `n` cavities with `cut + 1` levels each;
/// cavity 0 is the most significant digit.
#[derive(Debug, Clone, Copy)]
struct Basis {
    n: usize,
    levels: usize,
}

impl Basis {
    fn dim(&self) -> usize {
        self.levels.pow(self.n as u32)
    }

    fn stride(&self, cavity: usize) -> usize {
        self.levels.pow((self.n - 1 - cavity) as u32)
    }

    fn occupation(&self, state: usize, cavity: usize) -> usize {
        (state / self.stride(cavity)) % self.levels
    }

    fn annihilator(&self, cavity: usize) -> Operator {
        let d = self.dim();
        let mut a = Operator::zeros(d);
        let s = self.stride(cavity);
        for k in 0..d {
            let occ = self.occupation(k, cavity);
            if occ > 0 {
                a.add(k - s, k, Complex64::new((occ as f64).sqrt(), 0.0));
            }
        }
        a
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub n_cavities: usize,
    pub n_cut: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// `max |rho_rc - conj(rho_cr)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            for c in 0..=r {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let m = faer::Mat::<faer::c64>::from_fn(d, d, |r, c| {
            let z = (self.get(r, c) + self.get(c, r).conj()) * 0.5;
            faer::c64::new(z.re, z.im)
        });
        m.self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("hermitian eigenvalues")
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Vectorized Liouvillian as triplets over `vec(rho)[r*d + c] = rho_rc`.
fn liouvillian(params: &SystemParams, basis: Basis) -> Vec<(usize, usize, Complex64)> {
    let d = basis.dim();
    let n = params.n_cavities;
    let ops: Vec<Operator> = (0..n).map(|i| basis.annihilator(i)).collect();
    let adj: Vec<Operator> = ops.iter().map(|a| a.adjoint()).collect();
    let c = |z: f64| Complex64::new(z, 0.0);

    let mut h = Operator::zeros(d);
    for i in 0..n {
        let num = adj[i].mul(&ops[i]);
        let kerr = adj[i].mul(&adj[i]).mul(&ops[i]).mul(&ops[i]);
        for k in 0..d * d {
            h.data[k] += num.data[k] * params.delta + kerr.data[k] * (params.u / 2.0);
            h.data[k] += (ops[i].data[k] + adj[i].data[k]) * params.omega;
        }
    }
    for (x, y) in ring_edges(n) {
        let t = adj[x].mul(&ops[y]);
        let t2 = adj[y].mul(&ops[x]);
        for k in 0..d * d {
            h.data[k] += (t.data[k] + t2.data[k]) * params.j;
        }
    }

    // Jump operators with rates: loss sqrt(gamma) a, pump sqrt(P) a^+.
    let mut jumps: Vec<(Operator, f64)> = Vec::new();
    for i in 0..n {
        jumps.push((ops[i].clone(), params.gamma()));
        if params.pump() > 0.0 {
            jumps.push((adj[i].clone(), params.pump()));
        }
    }

    // Effective non-Hermitian generator: K = -i H - 1/2 sum rate L^+ L,
    // so that L(rho) = K rho + rho K^+ + sum rate L rho L^+.
    let mut k_op = Operator::zeros(d);
    for idx in 0..d * d {
        k_op.data[idx] = -Complex64::i() * h.data[idx];
    }
    for (l, rate) in &jumps {
        let ldl = l.adjoint().mul(l);
        for idx in 0..d * d {
            k_op.data[idx] -= ldl.data[idx] * c(rate / 2.0);
        }
    }
    let k_cols = k_op.columns();
    let k_adj = k_op.adjoint();
    let jump_cols: Vec<(Vec<Vec<(usize, Complex64)>>, f64)> =
        jumps.iter().map(|(l, rate)| (l.columns(), *rate)).collect();

    let mut trip = Vec::new();
    for kk in 0..d {
        for ll in 0..d {
            let col = kk * d + ll;
            // K |k><l| = sum_r K_rk |r><l|
            for &(r, v) in &k_cols[kk] {
                trip.push((r * d + ll, col, v));
            }
            // |k><l| K^+ = sum_s (K^+)_ls |k><s|
            for s in 0..d {
                let v = k_adj.at(ll, s);
                if v != ZERO {
                    trip.push((kk * d + s, col, v));
                }
            }
            // L |k><l| L^+ = sum_{r,s} L_rk conj(L_sl) |r><s|
            for (cols, rate) in &jump_cols {
                for &(r, a) in &cols[kk] {
                    for &(s, b) in &cols[ll] {
                        trip.push((r * d + s, col, a * b.conj() * *rate));
                    }
                }
            }
        }
    }
    trip
}

/// Applies the vectorized Liouvillian to `rho` (row-major `d x d`).
pub fn apply_liouvillian(params: &SystemParams, n_cut: usize, rho: &[Complex64]) -> Vec<Complex64> {
    let basis = Basis { n: params.n_cavities, levels: n_cut + 1 };
    let mut out = vec![ZERO; rho.len()];
    for (r, c, v) in liouvillian(params, basis) {
        out[r] += v * rho[c];
    }
    out
}

pub fn steady_density(params: &SystemParams, n_cut: usize) -> Result<DensityMatrix> {
    steady_density_capped(params, n_cut, DEFAULT_DIM_CAP)
}

pub fn steady_density_capped(params: &SystemParams, n_cut: usize, dim_cap: usize) -> Result<DensityMatrix> {
    if params.gamma0 <= 0.0 {
        return Err(Error::NonPositiveGamma0(params.gamma0));
    }
    let levels = n_cut + 1;
    let dim = levels
        .checked_pow(params.n_cavities as u32)
        .filter(|&d| d <= dim_cap)
        .ok_or(Error::CapExceeded { dim: levels.saturating_pow(params.n_cavities as u32), cap: dim_cap })?;
    let basis = Basis { n: params.n_cavities, levels };
    let d2 = dim * dim;

    // The (0,0) equation is a combination of the other diagonal equations
    // (the Liouvillian is trace preserving); replace it by Tr rho = 1.
    let mut trip: Vec<_> = liouvillian(params, basis).into_iter().filter(|t| t.0 != 0).collect();
    for k in 0..dim {
        trip.push((0, k * dim + k, Complex64::new(1.0, 0.0)));
    }
    let mut rhs = vec![ZERO; d2];
    rhs[0] = Complex64::new(1.0, 0.0);
    let opts = SolverOptions { dense_limit: 1024, ..Default::default() };
    let sol = solve_triplets(d2, &trip, &rhs, opts)?;
    Ok(DensityMatrix { n_cavities: params.n_cavities, n_cut, dim, data: sol.x })
}

/// `Tr(rho prod_i a_i^{+m_i} a_i^{n_i})`.
pub fn moment_from_density(rho: &DensityMatrix, exponents: &[(u8, u8)]) -> Result<Complex64> {
    assert_eq!(exponents.len(), rho.n_cavities, "one exponent pair per cavity");
    for &(m, n) in exponents {
        let e = m.max(n) as usize;
        if e > rho.n_cut {
            return Err(Error::ExponentExceedsCutoff { exponent: e, cutoff: rho.n_cut });
        }
    }
    let basis = Basis { n: rho.n_cavities, levels: rho.n_cut + 1 };
    let mut total = ZERO;
    // O|k> = c |l>, contributes rho_kl c.
    'states: for k in 0..rho.dim {
        let mut l = k;
        let mut amp = 1.0_f64;
        for (i, &(m, n)) in exponents.iter().enumerate() {
            let occ = basis.occupation(k, i);
            let (m, n) = (m as usize, n as usize);
            if occ < n || occ - n + m > rho.n_cut {
                continue 'states;
            }
            let mid = occ - n;
            amp *= falling(occ, n) * falling(mid + m, m);
            l = l - n * basis.stride(i) + m * basis.stride(i);
        }
        total += rho.get(k, l) * amp;
    }
    Ok(total)
}

/// `sqrt(x! / (x-k)!)`.
fn falling(x: usize, k: usize) -> f64 {
    ((x + 1 - k)..=x).map(|v| v as f64).product::<f64>().sqrt()
}
