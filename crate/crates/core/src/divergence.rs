//! Divergences between zero-mean Gaussians and their lower bounds.
//!
//! The α-Rényi divergence has three evaluations here: the determinant closed
//! form, the eigenvalue form of the discrimination matrix at α = 1/2, and a
//! numerical-integration oracle for one and two dimensions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matlib::{
    chol_logdet, cholesky, max_abs_entry, sigma_gamma_matrix, sym_eigenvalues,
    sym_extreme_eigenvalues, sym_inv_sqrt, sym_sqrt, symmetrize, Combinations, Matrix, Vector,
};
use crate::rip::{gram_spectral_sup, SupportSearch, DEFAULT_SUBSET_BUDGET};
use crate::rng::{random_subset, rng_from_seed};

/// Pair of SPD covariances `(Σ₁, Σ₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPair {
    pub sigma1: Matrix,
    pub sigma2: Matrix,
}

impl GaussianPair {
    pub fn new(sigma1: Matrix, sigma2: Matrix) -> Result<Self> {
        if sigma1.shape() != sigma2.shape() {
            return Err(Error::dims(
                "GaussianPair",
                format!("{:?}", sigma1.shape()),
                format!("{:?}", sigma2.shape()),
            ));
        }
        cholesky("GaussianPair", &sigma1)?;
        cholesky("GaussianPair", &sigma2)?;
        Ok(Self { sigma1, sigma2 })
    }

    pub fn dim(&self) -> usize {
        self.sigma1.nrows()
    }

    /// `(1 − t)Σ₁ + tΣ₂`.
    pub fn interpolate(&self, t: f64) -> Matrix {
        &self.sigma1 * (1.0 - t) + &self.sigma2 * t
    }
}

fn check_alpha(op: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{op}: alpha = {alpha} outside (0, 1)"
        )))
    }
}

/// LogDet Bregman divergence `tr(XY⁻¹) − log|XY⁻¹| − n`.
pub fn logdet_bregman(x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::dims(
            "logdet_bregman",
            format!("{:?}", y.shape()),
            format!("{:?}", x.shape()),
        ));
    }
    let cx = cholesky("logdet_bregman", x)?;
    let cy = cholesky("logdet_bregman", y)?;
    let tr = cy.solve(x).trace();
    Ok(tr - (chol_logdet(&cx) - chol_logdet(&cy)) - x.nrows() as f64)
}

/// Closed-form α-Rényi divergence.
pub fn renyi_gaussian(pair: &GaussianPair, alpha: f64) -> Result<f64> {
    check_alpha("renyi_gaussian", alpha)?;
    let mix = symmetrize(&pair.interpolate(alpha));
    let l_mix = chol_logdet(&cholesky("renyi_gaussian", &mix)?);
    let l1 = chol_logdet(&cholesky("renyi_gaussian", &pair.sigma1)?);
    let l2 = chol_logdet(&cholesky("renyi_gaussian", &pair.sigma2)?);
    Ok((l_mix - (1.0 - alpha) * l1 - alpha * l2) / (2.0 * (1.0 - alpha)))
}

/// Eigenvalues `λᵢ` of `H = Σ₁^{1/2} Σ₂⁻¹ Σ₁^{1/2}` (ascending).
pub fn discrimination_eigenvalues(sigma1: &Matrix, sigma2: &Matrix) -> Vec<f64> {
    let s1h = sym_sqrt(sigma1);
    let s2ih = sym_inv_sqrt(sigma2);
    // Σ₁^{1/2} Σ₂⁻¹ Σ₁^{1/2} = Mᵀ M with M = Σ₂^{-1/2} Σ₁^{1/2}
    let m = &s2ih * &s1h;
    sym_eigenvalues(&symmetrize(&(m.transpose() * &m)))
}

/// `D_{1/2}` via the discrimination matrix: `Σᵢ log((√λᵢ + 1/√λᵢ)/2)`.
pub fn renyi_half_eigenform(pair: &GaussianPair) -> (f64, Vec<f64>) {
    let ev = discrimination_eigenvalues(&pair.sigma1, &pair.sigma2);
    let value = ev
        .iter()
        .map(|&l| {
            let r = l.sqrt();
            ((r + 1.0 / r) / 2.0).ln()
        })
        .sum();
    (value, ev)
}

/// Accuracy target (absolute) on the integral in the quadrature oracle.
pub const QUADRATURE_TOL: f64 = 1e-13;
const PANELS: usize = 24;

fn integrate_panels<F: Fn(f64) -> f64>(f: F, r: f64) -> f64 {
    let h = 2.0 * r / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let a = -r + p as f64 * h;
            quadrature::integrate(&f, a, a + h, QUADRATURE_TOL / PANELS as f64).integral
        })
        .sum()
}

/// `(1/(α−1)) log ∫ p₁^α p₂^{1−α}` by numerical integration over
/// `[−R, R]^m`, `R` = 10 of the largest standard deviations. Only `m ≤ 2`.
pub fn renyi_quadrature_oracle(pair: &GaussianPair, alpha: f64) -> Result<f64> {
    check_alpha("renyi_quadrature_oracle", alpha)?;
    let m = pair.dim();
    if m > 2 {
        return Err(Error::Capacity {
            op: "renyi_quadrature_oracle",
            needed: m as u128,
            limit: 2,
        });
    }
    let ch1 = cholesky("renyi_quadrature_oracle", &pair.sigma1)?;
    let ch2 = cholesky("renyi_quadrature_oracle", &pair.sigma2)?;
    let (p1, p2) = (ch1.inverse(), ch2.inverse());
    let (ld1, ld2) = (chol_logdet(&ch1), chol_logdet(&ch2));
    let norm = -(m as f64) / 2.0 * (2.0 * PI).ln();
    // log of p₁^α p₂^{1−α} as a single exponent keeps the tails finite
    let log_integrand = |x: &[f64]| -> f64 {
        let q = |p: &Matrix| -> f64 {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += x[i] * p[(i, j)] * x[j];
                }
            }
            s
        };
        let lp1 = norm - 0.5 * ld1 - 0.5 * q(&p1);
        let lp2 = norm - 0.5 * ld2 - 0.5 * q(&p2);
        alpha * lp1 + (1.0 - alpha) * lp2
    };
    let sd = (0..m)
        .map(|i| pair.sigma1[(i, i)].max(pair.sigma2[(i, i)]).sqrt())
        .fold(0.0, f64::max);
    let r = 10.0 * sd;
    let integral = if m == 1 {
        integrate_panels(|x| log_integrand(&[x]).exp(), r)
    } else {
        integrate_panels(|x| integrate_panels(|y| log_integrand(&[x, y]).exp(), r), r)
    };
    if !(integral > 0.0 && integral.is_finite()) {
        return Err(Error::Numerical {
            op: "renyi_quadrature_oracle",
            iteration: 0,
            reason: format!("integral = {integral}"),
        });
    }
    Ok(integral.ln() / (alpha - 1.0))
}

/// Strong-convexity constant `m_ψ = 1 / sup |||Σ_γ ∘ Σ_γ|||₂` over
/// `‖γ‖₀ ≤ 2K`, `γ ∈ [0, γmax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongConvexity {
    pub value: f64,
    /// The supremum it was computed from.
    pub sup: f64,
    /// `false` when supports were sampled, so `value` is only an upper bound.
    pub certified: bool,
}

/// Evaluate the supremum at `γ = γmax·1_S` over supports of size `min(2K, n)`.
pub fn strong_convexity_constant(
    a: &Matrix,
    sigma2: f64,
    gamma_max: f64,
    k: usize,
    search: SupportSearch,
) -> Result<StrongConvexity> {
    if !(sigma2 >= 0.0) || !(gamma_max >= 0.0) {
        return Err(Error::invalid(
            "strong_convexity_constant: negative sigma2 or gamma_max",
        ));
    }
    let n = a.ncols();
    let order = (2 * k).min(n);
    let norm_at = |s: &[usize]| {
        let mut g = vec![0.0; n];
        for &i in s {
            g[i] = gamma_max;
        }
        let sg = sigma_gamma_matrix(a, &g, sigma2);
        sym_extreme_eigenvalues(&sg.component_mul(&sg)).1
    };
    let (sup, certified) = match search {
        SupportSearch::Exhaustive { budget } => {
            crate::matlib::check_budget("strong_convexity_constant", n, order, budget)?;
            let s = Combinations::new(n, order)
                .map(|s| norm_at(&s))
                .fold(0.0, f64::max);
            (s, true)
        }
        SupportSearch::Randomized { trials, seed } => {
            let mut rng = rng_from_seed(seed);
            let s = (0..trials.max(1))
                .map(|_| norm_at(&random_subset(&mut rng, n, order)))
                .fold(0.0, f64::max);
            (s, false)
        }
    };
    if !(sup > 0.0) {
        return Err(Error::domain(
            "strong_convexity_constant",
            "supremum is zero",
        ));
    }
    Ok(StrongConvexity {
        value: 1.0 / sup,
        sup,
        certified,
    })
}

/// Grid step used by [`convex_hull_constant`].
pub const HULL_GRID_STEP: f64 = 0.01;

/// Strong-convexity constant of `−log det` over the segment `[Σ₁, Σ₂]`:
/// `1 / max_t λmax(Σ_t)²`, maximized on a grid of step 0.01 in `t`.
pub fn convex_hull_constant(pair: &GaussianPair) -> f64 {
    let steps = (1.0 / HULL_GRID_STEP).round() as usize;
    let lmax = (0..=steps)
        .map(|i| sym_extreme_eigenvalues(&pair.interpolate(i as f64 / steps as f64)).1)
        .fold(0.0, f64::max);
    1.0 / (lmax * lmax)
}

/// Lower bound `(α/4)·m*·‖Σ₂ − Σ₁‖_F²`.
pub fn renyi_lower_bound_thm1(pair: &GaussianPair, alpha: f64, m_star: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1)")));
    }
    if !(m_star > 0.0) {
        return Err(Error::invalid(format!(
            "m_star = {m_star} must be positive"
        )));
    }
    Ok(0.25 * alpha * m_star * (&pair.sigma2 - &pair.sigma1).norm_squared())
}

/// How the `sup_{|S|=2K} |||A_SᵀA_S|||₂` factor is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupMode {
    /// Exhaustive over supports of size `2K`.
    Exact,
    /// `√(1 + δ⊙_{2K})·√(2K)`.
    RipRelaxed,
    /// Supplied by the caller.
    Given(f64),
}

impl SupMode {
    pub fn evaluate(self, a: &Matrix, k: usize, ric_kr_2k: f64) -> Result<f64> {
        match self {
            SupMode::Exact => gram_spectral_sup(a, 2 * k, DEFAULT_SUBSET_BUDGET),
            SupMode::RipRelaxed => Ok((1.0 + ric_kr_2k).sqrt() * ((2 * k) as f64).sqrt()),
            SupMode::Given(v) => Ok(v),
        }
    }
}

/// Lower bound on `D_α(p_{γ₁}, p_{γ₂})` in terms of the support difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop4Bound {
    pub value: f64,
    pub k_d: usize,
    pub a_star: f64,
    pub sup_term: f64,
    /// `δ⊙_{2K} ≥ 1`: the bound carries no information.
    pub vacuous: bool,
}

/// Inputs to [`renyi_lower_bound_prop4`] that describe the hyperparameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaK {
    pub k: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

/// `(α/4)(γmin/(σ²+γmax))² k_d (1 − δ⊙_{2K}) / (K a*² sup)`.
pub fn renyi_lower_bound_prop4(
    a: &Matrix,
    gamma1: &Vector,
    gamma2: &Vector,
    sigma2: f64,
    theta: ThetaK,
    alpha: f64,
    ric_kr_2k: f64,
    sup_mode: SupMode,
) -> Result<Prop4Bound> {
    check_alpha("renyi_lower_bound_prop4", alpha)?;
    let ThetaK {
        k,
        gamma_min,
        gamma_max,
    } = theta;
    if gamma1.len() != a.ncols() || gamma2.len() != a.ncols() {
        return Err(Error::dims(
            "renyi_lower_bound_prop4",
            a.ncols(),
            gamma1.len().max(gamma2.len()),
        ));
    }
    if k == 0 || !(gamma_min > 0.0 && gamma_min <= gamma_max) {
        return Err(Error::invalid(
            "renyi_lower_bound_prop4: need K >= 1 and 0 < gamma_min <= gamma_max",
        ));
    }
    for g in [gamma1, gamma2] {
        let nnz = g.iter().filter(|&&v| v != 0.0).count();
        let in_box = g
            .iter()
            .all(|&v| v == 0.0 || (v >= gamma_min && v <= gamma_max));
        if nnz > k || !in_box {
            return Err(Error::invalid(
                "renyi_lower_bound_prop4: gamma outside Theta_K",
            ));
        }
    }
    let k_d = gamma1
        .iter()
        .zip(gamma2.iter())
        .filter(|(x, y)| (**x != 0.0) != (**y != 0.0))
        .count();
    let a_star = max_abs_entry(a);
    let sup_term = sup_mode.evaluate(a, k, ric_kr_2k)?;
    let r = gamma_min / (sigma2 + gamma_max);
    let value = 0.25 * alpha * r * r * k_d as f64 * (1.0 - ric_kr_2k)
        / (k as f64 * a_star * a_star * sup_term);
    Ok(Prop4Bound {
        value,
        k_d,
        a_star,
        sup_term,
        vacuous: ric_kr_2k >= 1.0,
    })
}
