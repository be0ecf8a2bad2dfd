//! Recovery certificates: the error-exponent scale `η`, the log-likelihood
//! Lipschitz constant, the ε-net cardinality `κ_cov`, sufficient numbers of
//! MMVs, and the noiseless scaling of the discrimination matrix.
//!
//! Everything here is arithmetic on supplied restricted isometry constants;
//! nothing computes a RIC implicitly except [`SupMode::Exact`], which the
//! caller selects explicitly.

use std::f64::consts::{E, SQRT_2};

use crate::divergence::{discrimination_eigenvalues, SupMode};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::matlib::{max_abs_entry, sigma_gamma_matrix, Matrix, Vector};

/// Default for the absolute constant in the covariance-concentration term.
pub const DEFAULT_C_ABS: f64 = 16.0;

/// Problem constants shared by the sufficient-MMV formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub k: usize,
    pub a_star: f64,
    pub sigma2: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Target failure level; the certificates bound the error by `2δ`.
    pub delta: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return Err(Error::invalid(format!(
                "need 1 <= K <= n, got K = {}, n = {}",
                self.k, self.n
            )));
        }
        if !(self.a_star > 0.0 && self.a_star.is_finite()) {
            return Err(Error::invalid(format!(
                "a_star = {} must be positive",
                self.a_star
            )));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 = {}", self.sigma2)));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max && self.gamma_max.is_finite())
        {
            return Err(Error::invalid(format!(
                "need 0 < gamma_min <= gamma_max, got [{}, {}]",
                self.gamma_min, self.gamma_max
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta = {} outside (0, 1)",
                self.delta
            )));
        }
        Ok(())
    }

    /// `γmin / (σ² + γmax)`.
    fn ratio(&self) -> f64 {
        self.gamma_min / (self.sigma2 + self.gamma_max)
    }

    /// `log(3enK(1+δ)/δ)`.
    fn union_log(&self) -> f64 {
        (3.0 * E * self.n as f64 * self.k as f64 * (1.0 + self.delta) / self.delta).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaValue {
    pub eta: f64,
    /// Relaxation with the supremum replaced by `√(1+δ⊙_{2K})·√(2K)`.
    pub eta_lb: f64,
    pub sup_term: f64,
    /// `δ⊙_{2K} ≥ 1`.
    pub vacuous: bool,
}

/// `η` from its ingredients.
pub fn eta_from_parts(
    k: usize,
    a_star: f64,
    sigma2: f64,
    gamma_min: f64,
    gamma_max: f64,
    ric_kr_2k: f64,
    sup_term: f64,
) -> EtaValue {
    let r = gamma_min / (sigma2 + gamma_max);
    let kf = k as f64;
    let eta = r * r * (1.0 - ric_kr_2k) / (8.0 * kf * a_star * a_star * sup_term);
    let eta_lb = r * r * (1.0 - ric_kr_2k)
        / (8.0 * SQRT_2 * kf.powf(1.5) * a_star * a_star * (1.0 + ric_kr_2k).sqrt());
    EtaValue {
        eta,
        eta_lb,
        sup_term,
        vacuous: ric_kr_2k >= 1.0,
    }
}

/// `η = (1/8)(γmin/(σ²+γmax))² (1 − δ⊙_{2K}) / (K a*² sup_{|S|=2K} |||A_SᵀA_S|||₂)`.
pub fn eta(
    a: &Matrix,
    k: usize,
    sigma2: f64,
    gamma_min: f64,
    gamma_max: f64,
    ric_kr_2k: f64,
    sup_mode: SupMode,
) -> Result<EtaValue> {
    if k == 0 {
        return Err(Error::invalid("eta: K must be at least 1"));
    }
    if !(ric_kr_2k >= 0.0) {
        return Err(Error::invalid(format!(
            "eta: RIC = {ric_kr_2k} must be nonnegative"
        )));
    }
    let sup = sup_mode.evaluate(a, k, ric_kr_2k)?;
    Ok(eta_from_parts(
        k,
        max_abs_entry(a),
        sigma2,
        gamma_min,
        gamma_max,
        ric_kr_2k,
        sup,
    ))
}

/// `(L K / γmin)(1 + |||R_Y|||₂ / σ²)`.
pub fn lipschitz_bound(
    l_mmv: f64,
    k: usize,
    gamma_min: f64,
    sigma2: f64,
    spec_norm_ry: f64,
) -> Result<f64> {
    if !(l_mmv > 0.0 && gamma_min > 0.0 && sigma2 > 0.0 && spec_norm_ry >= 0.0) || k == 0 {
        return Err(Error::invalid("lipschitz_bound: inputs must be positive"));
    }
    Ok(l_mmv * k as f64 / gamma_min * (1.0 + spec_norm_ry / sigma2))
}

/// Log of the ε-net cardinality bound
/// `max{1, (K^{7/2} a*² ζ (γmax − γmin)/σ²)^K}` with
/// `ζ = 48√2 ((1+δ⊙)/(1−δ⊙)) ((σ²+γmax)/γmin)² ((3σ²+2γmax)/γmin)`.
pub fn kappa_cov_bound(
    k: usize,
    gamma_min: f64,
    gamma_max: f64,
    sigma2: f64,
    ric_kr_2k: f64,
    a_star: f64,
) -> Result<f64> {
    if sigma2 <= 0.0 {
        return Err(Error::domain(
            "kappa_cov_bound",
            "sigma2 must be positive; the noiseless case has no covering term",
        ));
    }
    if !(gamma_min > 0.0 && gamma_min <= gamma_max) || k == 0 {
        return Err(Error::invalid(
            "kappa_cov_bound: need K >= 1 and 0 < gamma_min <= gamma_max",
        ));
    }
    if gamma_max == gamma_min {
        return Ok(0.0);
    }
    if ric_kr_2k >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let zeta = zeta(gamma_min, gamma_max, sigma2, ric_kr_2k);
    let kf = k as f64;
    let inner = kf.powf(3.5) * a_star * a_star * zeta * (gamma_max - gamma_min) / sigma2;
    Ok((kf * inner.ln()).max(0.0))
}

pub fn zeta(gamma_min: f64, gamma_max: f64, sigma2: f64, ric_kr_2k: f64) -> f64 {
    let s = (sigma2 + gamma_max) / gamma_min;
    48.0 * SQRT_2
        * ((1.0 + ric_kr_2k) / (1.0 - ric_kr_2k))
        * s
        * s
        * ((3.0 * sigma2 + 2.0 * gamma_max) / gamma_min)
}

/// `max{(8/η) log(3enK(1+δ)/δ), (8/η) log κ_cov, C log(2/δ)}`; `+∞` when `η ≤ 0`.
pub fn sufficient_mmv_thm3(
    eta: f64,
    kappa_cov_log: f64,
    n: usize,
    k: usize,
    delta: f64,
    c_abs: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) || !(c_abs > 0.0) || n == 0 || k == 0 {
        return Err(Error::invalid(
            "sufficient_mmv_thm3: need delta in (0,1), C > 0, n, K >= 1",
        ));
    }
    if !(eta > 0.0) {
        return Ok(f64::INFINITY);
    }
    let union = (3.0 * E * n as f64 * k as f64 * (1.0 + delta) / delta).ln();
    Ok((8.0 / eta * union)
        .max(8.0 / eta * kappa_cov_log)
        .max(c_abs * (2.0 / delta).ln()))
}

/// `ξ = 64√2 ((σ²+γmax)/γmin)² √(1+δ⊙) / (1−δ⊙)`.
pub fn xi(p: &BoundParams, ric_kr_2k: f64) -> f64 {
    let s = 1.0 / p.ratio();
    64.0 * SQRT_2 * s * s * (1.0 + ric_kr_2k).sqrt() / (1.0 - ric_kr_2k)
}

/// `K^{3/2} a*² ξ max{log(3enK(1+δ)/δ), log κ_cov}`; `+∞` when `δ⊙ ≥ 1`.
pub fn sufficient_mmv_c2(p: &BoundParams, ric_kr_2k: f64, kappa_cov_log: f64) -> Result<f64> {
    p.validate()?;
    if ric_kr_2k >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((p.k as f64).powf(1.5)
        * p.a_star
        * p.a_star
        * xi(p, ric_kr_2k)
        * p.union_log().max(kappa_cov_log))
}

/// Threshold for unit-norm-column `A` expressed through `δ^A_{2K}` and `δ^A_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipACertificate {
    pub eta_lb: f64,
    pub kappa_cov_log: f64,
    pub l_sufficient: f64,
}

pub fn sufficient_mmv_ripa(
    p: &BoundParams,
    ric_a_2k: f64,
    ric_a_k: f64,
) -> Result<RipACertificate> {
    p.validate()?;
    if ric_a_2k >= 1.0 || ric_a_k >= 1.0 {
        return Ok(RipACertificate {
            eta_lb: 0.0,
            kappa_cov_log: f64::INFINITY,
            l_sufficient: f64::INFINITY,
        });
    }
    let (kf, a2) = (p.k as f64, p.a_star * p.a_star);
    let r = p.ratio();
    let eta_lb = r * r * (1.0 - ric_a_2k * ric_a_2k) / ((1.0 + ric_a_2k) * 8.0 * kf * a2);
    let kappa_cov_log = if p.gamma_max == p.gamma_min {
        0.0
    } else {
        if p.sigma2 <= 0.0 {
            return Err(Error::domain(
                "sufficient_mmv_ripa",
                "sigma2 must be positive",
            ));
        }
        let zeta_p = 144.0 / (p.gamma_min * p.gamma_min)
            * ((1.0 + ric_a_k) / (1.0 - ric_a_k))
            * (p.sigma2 + p.gamma_max).powi(3)
            / (p.sigma2 + p.gamma_min);
        let inner = kf.powf(2.5) * a2 * (p.gamma_max - p.gamma_min) * zeta_p
            / (p.gamma_min * (1.0 - ric_a_2k));
        (kf * inner.ln()).max(0.0)
    };
    let lead = 64.0 * kf * a2 / ((1.0 - ric_a_2k) * r * r);
    Ok(RipACertificate {
        eta_lb,
        kappa_cov_log,
        l_sufficient: lead * p.union_log().max(kappa_cov_log),
    })
}

/// `λmax(Σ_{γ₁}^{1/2} Σ_{γ₂}⁻¹ Σ_{γ₁}^{1/2})` for each `σ²` on the grid.
pub fn lambda_max_noiseless(
    a: &Matrix,
    gamma1: &Vector,
    gamma2: &Vector,
    sigma2_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if gamma1.len() != a.ncols() || gamma2.len() != a.ncols() {
        return Err(Error::dims(
            "lambda_max_noiseless",
            a.ncols(),
            gamma1.len().max(gamma2.len()),
        ));
    }
    if gamma1.iter().chain(gamma2.iter()).any(|&g| !(g >= 0.0)) {
        return Err(Error::invalid(
            "lambda_max_noiseless: gamma must be nonnegative",
        ));
    }
    if !(0..a.ncols()).any(|i| gamma1[i] > 0.0 && gamma2[i] == 0.0) {
        return Err(Error::invalid(
            "lambda_max_noiseless: supp(gamma1) must not be contained in supp(gamma2)",
        ));
    }
    sigma2_grid
        .iter()
        .map(|&s2| {
            if !(s2 > 0.0) {
                return Err(Error::invalid(format!(
                    "lambda_max_noiseless: sigma2 = {s2}"
                )));
            }
            let s1 = sigma_gamma_matrix(a, gamma1.as_slice(), s2);
            let s2m = sigma_gamma_matrix(a, gamma2.as_slice(), s2);
            let ev = discrimination_eigenvalues(&s1, &s2m);
            let lmax = *ev.last().expect("non-empty spectrum");
            if !lmax.is_finite() {
                return Err(Error::Numerical {
                    op: "lambda_max_noiseless",
                    iteration: 0,
                    reason: format!("eigenvalue {lmax} at sigma2 = {s2}"),
                });
            }
            Ok((s2, lmax))
        })
        .collect()
}

/// RIC inputs to a [`BoundsReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicInputs {
    pub kr_2k: f64,
    pub a_2k: f64,
    pub a_k: f64,
    /// `sup_{|S|=2K} |||A_SᵀA_S|||₂`, or its relaxation.
    pub sup_term: f64,
}

/// All certificates for one `(A, K, σ², [γmin, γmax], δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub eta: f64,
    pub eta_lb: f64,
    /// Per-MMV Lipschitz constant using `|||R_Y|||₂ ≤ 2(σ² + γmax√K√(1+δ⊙))`.
    pub lipschitz: f64,
    pub kappa_cov_log: f64,
    pub l_sufficient_thm3: f64,
    pub l_sufficient_c2: f64,
    pub l_sufficient_ripa: f64,
    pub params: BoundParams,
    pub c_abs: f64,
    pub ric: RicInputs,
}

pub fn bounds_report(p: &BoundParams, ric: RicInputs, c_abs: f64) -> Result<BoundsReport> {
    p.validate()?;
    if p.sigma2 <= 0.0 {
        return Err(Error::domain(
            "bounds_report",
            "sigma2 must be positive; noiseless recovery needs no MMV certificate",
        ));
    }
    let e = eta_from_parts(
        p.k,
        p.a_star,
        p.sigma2,
        p.gamma_min,
        p.gamma_max,
        ric.kr_2k,
        ric.sup_term,
    );
    let kappa = kappa_cov_bound(p.k, p.gamma_min, p.gamma_max, p.sigma2, ric.kr_2k, p.a_star)?;
    let ry =
        2.0 * (p.sigma2 + p.gamma_max * (p.k as f64).sqrt() * (1.0 + ric.kr_2k.min(1.0)).sqrt());
    let lipschitz = lipschitz_bound(1.0, p.k, p.gamma_min, p.sigma2, ry)?;
    let thm3 = sufficient_mmv_thm3(
        if e.vacuous { 0.0 } else { e.eta },
        kappa,
        p.n,
        p.k,
        p.delta,
        c_abs,
    )?;
    let c2 = sufficient_mmv_c2(p, ric.kr_2k, kappa)?;
    // δ⊙ ≤ (δ^A)² for unit columns, so δ⊙ ≥ 1 rules out δ^A < 1
    let ripa = if ric.kr_2k >= 1.0 {
        f64::INFINITY
    } else {
        sufficient_mmv_ripa(p, ric.a_2k, ric.a_k)?.l_sufficient
    };
    Ok(BoundsReport {
        eta: e.eta,
        eta_lb: e.eta_lb,
        lipschitz,
        kappa_cov_log: kappa,
        l_sufficient_thm3: thm3,
        l_sufficient_c2: c2,
        l_sufficient_ripa: ripa,
        params: *p,
        c_abs,
        ric,
    })
}

/// `{:.16e}`, with `infinite` for `+∞`.
pub fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "infinite".to_string()
    } else {
        fmt_f64(v)
    }
}

impl BoundsReport {
    pub const CSV_HEADER: &'static str = "eta,eta_lb,lipschitz,kappa_cov_log,L_sufficient_thm3,L_sufficient_c2,L_sufficient_ripA,n,K,sigma2,gamma_min,gamma_max,delta,a_star,ric_kr_2K,ric_A_2K,ric_A_K,sup_term,C_abs";

    pub fn csv_row(&self) -> String {
        let p = &self.params;
        [
            fmt_bound(self.eta),
            fmt_bound(self.eta_lb),
            fmt_bound(self.lipschitz),
            fmt_bound(self.kappa_cov_log),
            fmt_bound(self.l_sufficient_thm3),
            fmt_bound(self.l_sufficient_c2),
            fmt_bound(self.l_sufficient_ripa),
            p.n.to_string(),
            p.k.to_string(),
            fmt_bound(p.sigma2),
            fmt_bound(p.gamma_min),
            fmt_bound(p.gamma_max),
            fmt_bound(p.delta),
            fmt_bound(p.a_star),
            fmt_bound(self.ric.kr_2k),
            fmt_bound(self.ric.a_2k),
            fmt_bound(self.ric.a_k),
            fmt_bound(self.ric.sup_term),
            fmt_bound(self.c_abs),
        ]
        .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_gaussian_matrix, Normalization};
    use crate::rip::{kr_ric, ric_exhaustive, SupportSearch};
    use proptest::prelude::*;

    fn unit() -> BoundParams {
        BoundParams {
            n: 10,
            k: 1,
            a_star: 1.0,
            sigma2: 1.0,
            gamma_min: 1.0,
            gamma_max: 1.0,
            delta: 0.1,
        }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn eta_unit_plug() {
        let e = eta_from_parts(1, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
        assert!((e.eta - 0.03125).abs() < 1e-15);
        let near = eta_from_parts(1, 1.0, 1.0, 1.0, 1.0, 1.0 - 1e-12, 1.0);
        assert!(near.eta < 1e-13 && near.eta > 0.0);
        assert!(eta_from_parts(1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).vacuous);
    }

    #[test]
    fn eta_exact_dominates_relaxed() {
        for seed in 0..5 {
            let a = sample_gaussian_matrix(6, 12, Normalization::UnitColumns, seed).unwrap();
            let d = kr_ric(&a, 4, SupportSearch::exhaustive()).unwrap().lower;
            if d >= 1.0 {
                continue;
            }
            let ex = eta(&a, 2, 0.5, 1.0, 2.0, d, SupMode::Exact).unwrap();
            let rel = eta(&a, 2, 0.5, 1.0, 2.0, d, SupMode::RipRelaxed).unwrap();
            assert!(ex.eta >= rel.eta * (1.0 - 1e-12));
            assert!(close(rel.eta, rel.eta_lb, 1e-12));
        }
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_bound(1.0, 1, 1.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(lipschitz_bound(3.0, 2, 0.5, 1.0, 0.0).unwrap(), 12.0);
        assert!(lipschitz_bound(1.0, 1, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_cov_bound(2, 1.0, 1.0, 0.3, 0.2, 0.5).unwrap(), 0.0);
        assert_eq!(
            kappa_cov_bound(1, 1.0, 1.0 + 1e-12, 1.0, 0.0, 1e-3).unwrap(),
            0.0
        );
        let z = zeta(1.0, 2.0, 1.0, 0.0);
        assert!(close(z, 48.0 * SQRT_2 * 9.0 * 7.0, 1e-14));
        assert!(close(z, 4276.6, 1e-4));
        let v = kappa_cov_bound(1, 1.0, 2.0, 1.0, 0.0, 1.0).unwrap();
        assert!(close(v, z.ln(), 1e-14));
        assert!((v - 8.361).abs() < 1e-3);
        assert!(matches!(
            kappa_cov_bound(1, 1.0, 2.0, 0.0, 0.0, 1.0),
            Err(Error::Domain { .. })
        ));
        assert_eq!(
            kappa_cov_bound(1, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn thm3_examples() {
        let l = sufficient_mmv_thm3(0.03125, 0.0, 10, 1, 0.1, DEFAULT_C_ABS).unwrap();
        assert!(close(l, 256.0 * (3.0 * E * 110.0).ln(), 1e-14));
        assert!((l - 1740.3).abs() < 0.5);
        assert_eq!(
            sufficient_mmv_thm3(0.0, 0.0, 10, 1, 0.1, 16.0).unwrap(),
            f64::INFINITY
        );
        let big_c = sufficient_mmv_thm3(0.03125, 0.0, 10, 1, 0.1, 1e4).unwrap();
        assert!(close(big_c, 1e4 * 20f64.ln(), 1e-14));
        let lo = sufficient_mmv_thm3(0.03125, 0.0, 10, 1, 0.9, 1e-3).unwrap();
        let hi = sufficient_mmv_thm3(0.03125, 0.0, 10, 1, 0.5, 1e-3).unwrap();
        assert!(lo < hi);
    }

    #[test]
    fn c2_examples() {
        let p = unit();
        assert!(close(xi(&p, 0.0), 64.0 * SQRT_2 * 4.0, 1e-14));
        let c2 = sufficient_mmv_c2(&p, 0.0, 0.0).unwrap();
        assert!((c2 - 362.04 * 6.7988).abs() < 1.0);
        assert!((c2 - 2461.0).abs() < 2.0);
        let m: f64 = 9.0;
        let scaled = sufficient_mmv_c2(
            &BoundParams {
                a_star: 1.0 / m.sqrt(),
                ..p
            },
            0.0,
            0.0,
        )
        .unwrap();
        assert!(close(scaled, c2 / m, 1e-12));
        assert_eq!(sufficient_mmv_c2(&p, 1.0, 0.0).unwrap(), f64::INFINITY);
        let wide = sufficient_mmv_c2(
            &BoundParams {
                gamma_max: 1e6,
                ..p
            },
            0.0,
            0.0,
        )
        .unwrap();
        assert!(wide > 1e12);
    }

    #[test]
    fn ripa_examples() {
        let p = unit();
        let r = sufficient_mmv_ripa(&p, 0.0, 0.0).unwrap();
        assert_eq!(r.kappa_cov_log, 0.0);
        assert!(close(r.l_sufficient, 256.0 * (3.0 * E * 110.0).ln(), 1e-14));
        assert!((r.l_sufficient - 1740.3).abs() < 0.5);
        assert_eq!(
            sufficient_mmv_ripa(&p, 1.0, 0.0).unwrap().l_sufficient,
            f64::INFINITY
        );
    }

    #[test]
    fn ripa_is_tighter_than_c2() {
        for &d in &[0.0, 0.1, 0.3, 0.6, 0.9] {
            for &(gmin, gmax) in &[(1.0, 1.0), (0.5, 2.0)] {
                let p = BoundParams {
                    gamma_min: gmin,
                    gamma_max: gmax,
                    k: 2,
                    a_star: 0.8,
                    sigma2: 0.5,
                    ..unit()
                };
                let ripa = sufficient_mmv_ripa(&p, d, d).unwrap();
                let kappa = kappa_cov_bound(p.k, gmin, gmax, p.sigma2, d * d, p.a_star).unwrap();
                let c2 = sufficient_mmv_c2(&p, d * d, kappa).unwrap();
                // leading factors compare analytically
                let lead_ripa = 64.0 * 2.0 * 0.64 / ((1.0 - d) * p.ratio().powi(2));
                let lead_c2 = 2f64.powf(1.5) * 0.64 * xi(&p, d * d);
                assert!(lead_ripa <= lead_c2 * (1.0 + 1e-12));
                assert!(
                    ripa.l_sufficient <= c2 * (1.0 + 1e-12),
                    "d = {d}: {} vs {c2}",
                    ripa.l_sufficient
                );
            }
        }
    }

    #[test]
    fn lambda_max_scalar_and_control() {
        let a = Matrix::from_element(1, 1, 1.0);
        let g1 = Vector::from_element(1, 1.0);
        let g0 = Vector::from_element(1, 0.0);
        let grid = [1e-2, 1e-4, 1e-6];
        for (s2, l) in lambda_max_noiseless(&a, &g1, &g0, &grid).unwrap() {
            assert!(close(l * s2, s2 + 1.0, 1e-9));
        }
        assert!(lambda_max_noiseless(&a, &g1, &g1, &grid).is_err());
    }

    #[test]
    fn report_with_vacuous_ric() {
        let ric = RicInputs {
            kr_2k: 1.0,
            a_2k: 0.5,
            a_k: 0.2,
            sup_term: 1.5,
        };
        let r = bounds_report(
            &BoundParams {
                gamma_max: 2.0,
                ..unit()
            },
            ric,
            DEFAULT_C_ABS,
        )
        .unwrap();
        assert!(r.eta <= 0.0);
        for v in [r.l_sufficient_thm3, r.l_sufficient_c2, r.l_sufficient_ripa] {
            assert_eq!(v, f64::INFINITY);
        }
        let row = r.csv_row();
        assert_eq!(
            row.split(',').count(),
            BoundsReport::CSV_HEADER.split(',').count()
        );
        assert!(row.contains("infinite"));
    }

    #[test]
    fn report_on_real_matrix() {
        let a = sample_gaussian_matrix(5, 10, Normalization::UnitColumns, 3).unwrap();
        let kr = kr_ric(&a, 2, SupportSearch::exhaustive()).unwrap().lower;
        let ric = RicInputs {
            kr_2k: kr,
            a_2k: ric_exhaustive(&a, 2).unwrap().lower,
            a_k: ric_exhaustive(&a, 1).unwrap().lower,
            sup_term: SupMode::Exact.evaluate(&a, 1, kr).unwrap(),
        };
        let p = BoundParams {
            n: 10,
            k: 1,
            a_star: max_abs_entry(&a),
            sigma2: 0.1,
            gamma_min: 1.0,
            gamma_max: 2.0,
            delta: 0.05,
        };
        let r = bounds_report(&p, ric, DEFAULT_C_ABS).unwrap();
        assert_eq!(r.eta > 0.0, kr < 1.0);
        if kr < 1.0 {
            assert!(r.l_sufficient_thm3.is_finite() && r.l_sufficient_thm3 >= 0.0);
            assert!(r.l_sufficient_c2.is_finite());
        }
    }

    proptest! {
        #[test]
        fn prop_eta_sign(d in 0.0f64..2.0, s2 in 0.01f64..3.0, k in 1usize..5) {
            let e = eta_from_parts(k, 0.7, s2, 0.5, 1.5, d, 1.3);
            prop_assert_eq!(e.eta > 0.0, d < 1.0);
        }

        #[test]
        fn prop_monotone_in_gamma_and_sigma(d in 0.0f64..0.9, s2 in 0.5f64..4.0, gmin in 0.2f64..1.0, spread in 0.0f64..2.0) {
            let base = BoundParams { n: 20, k: 2, a_star: 0.6, sigma2: s2, gamma_min: gmin, gamma_max: gmin + spread, delta: 0.05 };
            let eval = |p: &BoundParams| {
                let kappa = kappa_cov_bound(p.k, p.gamma_min, p.gamma_max, p.sigma2, d, p.a_star).unwrap();
                let e = eta_from_parts(p.k, p.a_star, p.sigma2, p.gamma_min, p.gamma_max, d, 1.2);
                (
                    sufficient_mmv_thm3(e.eta, kappa, p.n, p.k, p.delta, DEFAULT_C_ABS).unwrap(),
                    sufficient_mmv_c2(p, d, kappa).unwrap(),
                    sufficient_mmv_ripa(p, d.sqrt(), d.sqrt() / 2.0).unwrap().l_sufficient,
                )
            };
            let b = eval(&base);
            let more_noise = eval(&BoundParams { sigma2: s2 * 1.1, ..base });
            let wider = eval(&BoundParams { gamma_max: base.gamma_max * 1.1, ..base });
            let higher_min = eval(&BoundParams { gamma_min: (gmin * 1.05).min(base.gamma_max), ..base });
            let tol = 1e-9;
            for (x, y) in [(b.0, more_noise.0), (b.1, more_noise.1), (b.2, more_noise.2)] {
                prop_assert!(y >= x * (1.0 - tol));
            }
            for (x, y) in [(b.0, wider.0), (b.1, wider.1), (b.2, wider.2)] {
                prop_assert!(y >= x * (1.0 - tol));
            }
            for (x, y) in [(b.0, higher_min.0), (b.1, higher_min.1), (b.2, higher_min.2)] {
                prop_assert!(y <= x * (1.0 + tol));
            }
        }
    }
}
