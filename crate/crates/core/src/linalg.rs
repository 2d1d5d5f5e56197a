//! Direct LU solves for complex non-Hermitian systems, backed by faer.

use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};
use faer::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// A pivot below `singular_threshold * max|A_ij|` marks the system singular.
    pub singular_threshold: f64,
    /// Largest dimension solved with a dense factorization.
    pub dense_limit: usize,
    /// Condition estimate above which a warning is logged.
    pub ill_conditioned: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            singular_threshold: 1e-12,
            dense_limit: 5000,
            ill_conditioned: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<Complex64>,
    /// Ratio of the largest to smallest pivot magnitude, dense path only.
    pub condition_estimate: Option<f64>,
}

fn to_c64(z: Complex64) -> c64 {
    c64::new(z.re, z.im)
}

fn from_c64(z: c64) -> Complex64 {
    Complex64::new(z.re, z.im)
}

/// Solves `A x = b` for `A` given as triplets (duplicates are summed).
pub fn solve_triplets(
    n: usize,
    triplets: &[(usize, usize, Complex64)],
    b: &[Complex64],
    opts: SolverOptions,
) -> Result<LinearSolution> {
    assert_eq!(b.len(), n);
    if n == 0 {
        return Ok(LinearSolution { x: Vec::new(), condition_estimate: None });
    }
    if n <= opts.dense_limit {
        let mut a = Mat::<c64>::zeros(n, n);
        for &(r, c, v) in triplets {
            a[(r, c)] += to_c64(v);
        }
        solve_dense(a, b, opts)
    } else {
        solve_sparse(n, triplets, b, opts)
    }
}

/// Dense partial-pivoting LU with a relative pivot check.
pub fn solve_dense_rows(a: &[Vec<Complex64>], b: &[Complex64], opts: SolverOptions) -> Result<LinearSolution> {
    let n = b.len();
    let m = Mat::<c64>::from_fn(n, n, |i, j| to_c64(a[i][j]));
    solve_dense(m, b, opts)
}

fn solve_dense(a: Mat<c64>, b: &[Complex64], opts: SolverOptions) -> Result<LinearSolution> {
    let n = b.len();
    let max_abs = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| a[(i, j)].norm())
        .fold(0.0_f64, f64::max);
    let threshold = opts.singular_threshold * max_abs;
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let mut min_piv = f64::INFINITY;
    let mut max_piv = 0.0_f64;
    for i in 0..n {
        let p = u[(i, i)].norm();
        min_piv = min_piv.min(p);
        max_piv = max_piv.max(p);
    }
    if !(min_piv > threshold) {
        return Err(Error::SingularSystem { pivot: min_piv, threshold });
    }
    let cond = max_piv / min_piv;
    if cond > opts.ill_conditioned {
        log::warn!("ill-conditioned system: pivot ratio {cond:e}");
    }
    let rhs = Mat::<c64>::from_fn(n, 1, |i, _| to_c64(b[i]));
    let x = lu.solve(&rhs);
    let x: Vec<Complex64> = (0..n).map(|i| from_c64(x[(i, 0)])).collect();
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::SingularSystem { pivot: min_piv, threshold });
    }
    Ok(LinearSolution { x, condition_estimate: Some(cond) })
}

fn solve_sparse(
    n: usize,
    triplets: &[(usize, usize, Complex64)],
    b: &[Complex64],
    opts: SolverOptions,
) -> Result<LinearSolution> {
    let max_abs = triplets.iter().map(|t| t.2.norm()).fold(0.0_f64, f64::max);
    let threshold = opts.singular_threshold * max_abs;
    let trip: Vec<Triplet<usize, usize, c64>> =
        triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, to_c64(v))).collect();
    let a = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::InvalidConfig(format!("sparse matrix assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|_| Error::SingularSystem { pivot: 0.0, threshold })?;
    let rhs = Mat::<c64>::from_fn(n, 1, |i, _| to_c64(b[i]));
    let x = lu.solve(&rhs);
    let x: Vec<Complex64> = (0..n).map(|i| from_c64(x[(i, 0)])).collect();
    // Without pivot access, reject solutions that do not satisfy the system.
    let mut resid = b.iter().map(|z| -z).collect::<Vec<_>>();
    for &(r, c, v) in triplets {
        resid[r] += v * x[c];
    }
    let res = resid.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let scale = b.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    if x.iter().any(|z| !z.is_finite()) || res > 1e-8 * scale.max(max_abs * x.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
        return Err(Error::SingularSystem { pivot: 0.0, threshold });
    }
    Ok(LinearSolution { x, condition_estimate: None })
}

/// Small dense complex matrix used by the block solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn add(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.data.iter().enumerate().map(move |(k, &v)| (k / self.cols, k % self.cols, v))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let c = self.to_faer() * other.to_faer();
        Self::from_faer(&c)
    }

    fn to_faer(&self) -> Mat<c64> {
        Mat::from_fn(self.rows, self.cols, |i, j| to_c64(self.get(i, j)))
    }

    fn from_faer(m: &Mat<c64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.data[i * m.ncols() + j] = from_c64(m[(i, j)]);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.norm() == 0.0)
    }

    /// Factorizes once for repeated solves.
    pub fn factor(&self, opts: SolverOptions) -> Result<Factorized> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let max_abs = self.data.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        let threshold = opts.singular_threshold * max_abs;
        let lu = self.to_faer().partial_piv_lu();
        let u = lu.U();
        let min_piv = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if n > 0 && !(min_piv > threshold) {
            return Err(Error::SingularSystem { pivot: min_piv, threshold });
        }
        Ok(Factorized { n, lu })
    }
}

pub struct Factorized {
    n: usize,
    lu: faer::linalg::solvers::PartialPivLu<c64>,
}

impl Factorized {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<c64>::from_fn(self.n, 1, |i, _| to_c64(b[i]));
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| from_c64(x[(i, 0)])).collect()
    }

    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.rows, self.n);
        let rhs = b.to_faer();
        let x = self.lu.solve(&rhs);
        DenseMatrix::from_faer(&x)
    }
}
