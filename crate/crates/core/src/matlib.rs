//! Dense matrix utilities: Khatri–Rao and Hadamard products, spark and
//! Kruskal rank, the model covariance `σ²I + A·diag(γ)·Aᵀ`, and symmetric
//! eigen helpers used by the divergence code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative singular-value tolerance for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

/// Default column cap for exhaustive spark / Kruskal-rank searches.
pub const EXHAUSTIVE_COLUMN_LIMIT: usize = 20;

/// Eigenvalue floor used when forming symmetric square roots.
pub const EIG_FLOOR: f64 = 1e-14;

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Lexicographic iterator over the `k`-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        // advance to the next subset
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

pub(crate) fn check_budget(op: &'static str, n: usize, k: usize, limit: u128) -> Result<u128> {
    let needed = binomial(n, k);
    if needed > limit {
        return Err(Error::Capacity { op, needed, limit });
    }
    Ok(needed)
}

/// Check every entry is finite.
pub fn ensure_finite(op: &'static str, m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{op}: matrix contains non-finite entries"
        )))
    }
}

/// Columns of `a` indexed by `cols`, in order.
pub fn select_columns(a: &Matrix, cols: &[usize]) -> Matrix {
    a.select_columns(cols)
}

/// Largest absolute entry, `‖vec(A)‖_∞`.
pub fn max_abs_entry(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Columnwise Khatri–Rao product: column `j` is `a_j ⊗ b_j`.
pub fn khatri_rao(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::dims("khatri_rao", a.ncols(), b.ncols()));
    }
    let (m, p) = (a.nrows(), b.nrows());
    let mut out = Matrix::zeros(m * p, a.ncols());
    for j in 0..a.ncols() {
        for i in 0..m {
            let aij = a[(i, j)];
            for r in 0..p {
                out[(i * p + r, j)] = aij * b[(r, j)];
            }
        }
    }
    Ok(out)
}

/// Entrywise (Hadamard) product.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            "hadamard",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    Ok(a.component_mul(b))
}

/// Numerical rank with relative singular-value tolerance [`RANK_RTOL`].
pub fn rank(a: &Matrix) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * smax).count()
}

/// Smallest number of linearly dependent columns.
///
/// Returns `n + 1` when every subset of columns is independent. Exhaustive,
/// so `n` may not exceed `column_limit`.
pub fn spark_with_limit(a: &Matrix, column_limit: usize) -> Result<usize> {
    let n = a.ncols();
    if n == 0 {
        return Err(Error::invalid("spark: matrix has no columns"));
    }
    if n > column_limit {
        return Err(Error::Capacity {
            op: "spark",
            needed: n as u128,
            limit: column_limit as u128,
        });
    }
    for p in 1..=n {
        if p > a.nrows() {
            // any m+1 vectors in R^m are dependent
            return Ok(p);
        }
        if Combinations::new(n, p).any(|s| rank(&select_columns(a, &s)) < p) {
            return Ok(p);
        }
    }
    Ok(n + 1)
}

pub fn spark(a: &Matrix) -> Result<usize> {
    spark_with_limit(a, EXHAUSTIVE_COLUMN_LIMIT)
}

/// Largest `k` such that every `k` columns are linearly independent.
pub fn kruskal_rank(a: &Matrix) -> Result<usize> {
    Ok(spark(a)? - 1)
}

pub fn kruskal_rank_with_limit(a: &Matrix, column_limit: usize) -> Result<usize> {
    Ok(spark_with_limit(a, column_limit)? - 1)
}

/// The model covariance `Σ_γ = σ²I + A·diag(γ)·Aᵀ` together with its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    pub sigma2: f64,
    pub gamma: Vector,
    pub matrix: Matrix,
}

/// Assemble `Σ_γ`, symmetrized as `(M + Mᵀ)/2`.
pub fn sigma_gamma(a: &Matrix, gamma: &Vector, sigma2: f64) -> Result<CovarianceModel> {
    if gamma.len() != a.ncols() {
        return Err(Error::dims("sigma_gamma", a.ncols(), gamma.len()));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::invalid(format!("sigma_gamma: sigma2 = {sigma2}")));
    }
    if let Some(i) = gamma.iter().position(|&g| !(g >= 0.0) || !g.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma_gamma: gamma[{i}] = {} is negative or non-finite",
            gamma[i]
        )));
    }
    Ok(CovarianceModel {
        sigma2,
        gamma: gamma.clone(),
        matrix: sigma_gamma_matrix(a, gamma.as_slice(), sigma2),
    })
}

/// Unchecked assembly used on hot paths where inputs are already validated.
pub(crate) fn sigma_gamma_matrix(a: &Matrix, gamma: &[f64], sigma2: f64) -> Matrix {
    let m = a.nrows();
    let mut scaled = a.clone();
    for (j, &g) in gamma.iter().enumerate() {
        scaled.column_mut(j).scale_mut(g);
    }
    let mut s = &scaled * a.transpose();
    for i in 0..m {
        s[(i, i)] += sigma2;
    }
    symmetrize(&s)
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn sym_extreme_eigenvalues(m: &Matrix) -> (f64, f64) {
    let ev = sym_eigenvalues(m);
    (ev[0], ev[ev.len() - 1])
}

/// Spectral norm of a symmetric matrix.
pub fn sym_spectral_norm(m: &Matrix) -> f64 {
    let (lo, hi) = sym_extreme_eigenvalues(m);
    lo.abs().max(hi.abs())
}

/// Spectral norm of a general matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Apply `f` to the eigenvalues of symmetric `m` (floored at [`EIG_FLOOR`]).
fn sym_spectral_map(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let eig = SymmetricEigen::new(m.clone());
    let mapped = eig.eigenvalues.map(|l| f(l.max(EIG_FLOOR)));
    let v = &eig.eigenvectors;
    symmetrize(&(v * Matrix::from_diagonal(&mapped) * v.transpose()))
}

pub fn sym_sqrt(m: &Matrix) -> Matrix {
    sym_spectral_map(m, f64::sqrt)
}

pub fn sym_inv_sqrt(m: &Matrix) -> Matrix {
    sym_spectral_map(m, |l| 1.0 / l.sqrt())
}

/// Cholesky factor of an SPD matrix, or a domain error naming `op`.
pub fn cholesky(op: &'static str, m: &Matrix) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(Error::domain(
            op,
            format!("matrix is {}x{}, not square", m.nrows(), m.ncols()),
        ));
    }
    ensure_finite(op, m)?;
    Cholesky::new(m.clone()).ok_or_else(|| Error::domain(op, "matrix is not positive definite"))
}

/// `log|M|` from a Cholesky factor.
pub fn chol_logdet(ch: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * ch.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Gram matrix `AᵀA`.
pub fn gram(a: &Matrix) -> Matrix {
    a.transpose() * a
}
