//! Measurement matrices, joint-sparse Gaussian sources and noisy MMV data.
//!
//! Observations follow `Y = A X + W`: the columns of `X` are i.i.d.
//! `N(0, diag(γ*))` and `W` has i.i.d. `N(0, σ²)` entries.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matlib::{max_abs_entry, Matrix, Vector};
use crate::rng::{random_subset, rng_from_seed, PolarNormal};

/// Column scaling applied by [`sample_gaussian_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Each column rescaled to unit ℓ₂ norm.
    UnitColumns,
    /// Entries with standard deviation `m^{-1/4}` (variance `1/√m`).
    IidScaled,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_columns" => Ok(Self::UnitColumns),
            "iid_scaled" => Ok(Self::IidScaled),
            _ => Err(Error::Config(format!(
                "normalization must be unit_columns or iid_scaled, got '{s}'"
            ))),
        }
    }
}

/// A measurement matrix with its column norms and largest absolute entry `a*`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    pub matrix: Matrix,
    pub col_norms: Vec<f64>,
    pub a_star: f64,
}

impl MeasurementMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::invalid("measurement matrix must be non-empty"));
        }
        crate::matlib::ensure_finite("MeasurementMatrix::new", &matrix)?;
        let col_norms = matrix.column_iter().map(|c| c.norm()).collect();
        let a_star = max_abs_entry(&matrix);
        Ok(Self {
            matrix,
            col_norms,
            a_star,
        })
    }
}

/// Draw an `m × n` Gaussian matrix. Entries are generated column by column.
pub fn sample_gaussian_matrix(
    m: usize,
    n: usize,
    norm: Normalization,
    seed: u64,
) -> Result<Matrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut g = PolarNormal::new();
    let sd = match norm {
        Normalization::UnitColumns => 1.0,
        Normalization::IidScaled => (m as f64).powf(-0.25),
    };
    let mut a = Matrix::from_fn(m, n, |_, _| 0.0);
    for j in 0..n {
        for i in 0..m {
            a[(i, j)] = sd * g.sample(&mut rng);
        }
    }
    if norm == Normalization::UnitColumns {
        for mut col in a.column_iter_mut() {
            let nrm = col.norm();
            // a zero column has probability zero; leave it alone if it happens
            if nrm > 0.0 {
                col /= nrm;
            }
        }
    }
    Ok(a)
}

/// How [`sample_source`] chooses the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportPolicy {
    Fixed,
    UniformRandom,
}

/// Joint-sparse source description: support, variances and their interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub n: usize,
    pub k_max: usize,
    /// Sorted support indices.
    pub support: Vec<usize>,
    pub gamma_star: Vector,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl SourceSpec {
    /// Spec with the given support and every active variance at `gamma_min`.
    pub fn new(
        n: usize,
        k_max: usize,
        support: Vec<usize>,
        gamma_min: f64,
        gamma_max: f64,
    ) -> Result<Self> {
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        let mut gamma_star = Vector::zeros(n);
        for &i in &support {
            if i >= n {
                return Err(Error::invalid(format!(
                    "support index {i} out of range for n = {n}"
                )));
            }
            gamma_star[i] = gamma_min;
        }
        let spec = Self {
            n,
            k_max,
            support,
            gamma_star,
            gamma_min,
            gamma_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec with support `{0, …, k_true−1}`.
    pub fn with_leading_support(
        n: usize,
        k_max: usize,
        k_true: usize,
        gamma_min: f64,
        gamma_max: f64,
    ) -> Result<Self> {
        Self::new(n, k_max, (0..k_true).collect(), gamma_min, gamma_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if self.k_max > self.n {
            return Err(Error::invalid(format!(
                "K = {} exceeds n = {}",
                self.k_max, self.n
            )));
        }
        if self.support.len() > self.k_max {
            return Err(Error::invalid(format!(
                "support size {} exceeds K = {}",
                self.support.len(),
                self.k_max
            )));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max && self.gamma_max.is_finite())
        {
            return Err(Error::invalid(format!(
                "need 0 < gamma_min <= gamma_max < inf, got [{}, {}]",
                self.gamma_min, self.gamma_max
            )));
        }
        if self.gamma_star.len() != self.n {
            return Err(Error::dims("SourceSpec", self.n, self.gamma_star.len()));
        }
        for (i, &g) in self.gamma_star.iter().enumerate() {
            let active = self.support.binary_search(&i).is_ok();
            let ok = if active {
                g >= self.gamma_min && g <= self.gamma_max
            } else {
                g == 0.0
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "gamma_star[{i}] = {g} inconsistent with support and interval"
                )));
            }
        }
        Ok(())
    }
}

/// Realize a source: optionally redraw the support, then draw active variances
/// uniformly on `[γmin, γmax]`.
pub fn sample_source(spec: &SourceSpec, policy: SupportPolicy, seed: u64) -> Result<SourceSpec> {
    spec.validate()?;
    if spec.support.is_empty() {
        return Err(Error::invalid("sample_source: empty support"));
    }
    let mut rng = rng_from_seed(seed);
    let support = match policy {
        SupportPolicy::Fixed => spec.support.clone(),
        SupportPolicy::UniformRandom => random_subset(&mut rng, spec.n, spec.support.len()),
    };
    let mut gamma_star = Vector::zeros(spec.n);
    for &i in &support {
        gamma_star[i] = if spec.gamma_min == spec.gamma_max {
            spec.gamma_min
        } else {
            let u: f64 = rng.random();
            (spec.gamma_min + u * (spec.gamma_max - spec.gamma_min)).min(spec.gamma_max)
        };
    }
    Ok(SourceSpec {
        support,
        gamma_star,
        ..spec.clone()
    })
}

/// One realized MMV problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MmvInstance {
    pub a: Matrix,
    pub x: Matrix,
    pub y: Matrix,
    pub sigma2: f64,
    pub seed: u64,
    pub source: SourceSpec,
}

impl MmvInstance {
    pub fn l(&self) -> usize {
        self.y.ncols()
    }

    pub fn sample_covariance(&self) -> Matrix {
        sample_covariance(&self.y)
    }
}

/// Draw `X` (row by row over the support) and then `W`, and form `Y = AX + W`.
pub fn synthesize_mmv(
    spec: &SourceSpec,
    a: &Matrix,
    l: usize,
    sigma2: f64,
    seed: u64,
) -> Result<MmvInstance> {
    if a.ncols() != spec.n {
        return Err(Error::dims("synthesize_mmv", spec.n, a.ncols()));
    }
    if l == 0 {
        return Err(Error::invalid("synthesize_mmv: L must be at least 1"));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("synthesize_mmv: sigma2 = {sigma2}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut g = PolarNormal::new();
    let mut x = Matrix::zeros(spec.n, l);
    for i in 0..spec.n {
        let sd = spec.gamma_star[i].sqrt();
        if sd > 0.0 {
            for j in 0..l {
                x[(i, j)] = sd * g.sample(&mut rng);
            }
        }
    }
    let mut y = a * &x;
    if sigma2 > 0.0 {
        let sd = sigma2.sqrt();
        for j in 0..l {
            for i in 0..a.nrows() {
                y[(i, j)] += sd * g.sample(&mut rng);
            }
        }
    }
    Ok(MmvInstance {
        a: a.clone(),
        x,
        y,
        sigma2,
        seed,
        source: spec.clone(),
    })
}

/// `R_Y = Y Yᵀ / L`.
pub fn sample_covariance(y: &Matrix) -> Matrix {
    let l = y.ncols().max(1) as f64;
    crate::matlib::symmetrize(&(y * y.transpose() / l))
}
