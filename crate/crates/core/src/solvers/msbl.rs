//! Type-II maximum likelihood for `γ` (M-SBL).
//!
//! With `Σ = σ²I + AΓAᵀ`, `R = YYᵀ/L`, `bᵢ = Σ⁻¹aᵢ`, `qᵢ = aᵢᵀbᵢ` and
//! `pᵢ = bᵢᵀRbᵢ`, the posterior row energy is `(1/L)‖μᵢ‖² = γᵢ²pᵢ` and the
//! posterior variance is `sᵢ = γᵢ − γᵢ²qᵢ`. The EM step is
//! `γᵢ ← γᵢ²pᵢ + sᵢ`; the MacKay fixed-point step is
//! `γᵢ ← γᵢ²pᵢ / (1 − sᵢ/γᵢ) = γᵢpᵢ/qᵢ`.

use crate::error::{Error, Result};
use crate::matlib::{chol_logdet, sigma_gamma_matrix, Matrix, Vector};
use crate::model::sample_covariance;

use super::check_y_a;
use super::support::{extract_support, ExtractionPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    Em,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitGamma {
    Ones,
    /// `γ₀ᵢ = ‖aᵢᵀY‖² / (L‖aᵢ‖⁴)`.
    MatchedFilter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsblConfig {
    pub max_iters: usize,
    /// Stop when `‖Δγ‖∞ / ‖γ‖∞ < tol`.
    pub tol: f64,
    pub prune_floor: f64,
    pub sigma2_eff_floor: f64,
    pub update_rule: UpdateRule,
    pub init_gamma: InitGamma,
    /// Extraction rule used to fill `support_hat`.
    pub extraction: ExtractionPolicy,
}

impl Default for MsblConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-6,
            prune_floor: 1e-8,
            sigma2_eff_floor: 1e-10,
            update_rule: UpdateRule::Em,
            init_gamma: InitGamma::Ones,
            extraction: ExtractionPolicy::default(),
        }
    }
}

impl MsblConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::invalid(format!("tol = {} outside (0, 1)", self.tol)));
        }
        if !(self.prune_floor >= 0.0) || !(self.sigma2_eff_floor > 0.0) {
            return Err(Error::invalid(
                "prune_floor must be >= 0 and sigma2_eff_floor > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub gamma_hat: Vector,
    pub support_hat: Vec<usize>,
    /// `loglik(Y; γ_t)` for `t = 0, …, iters`.
    pub loglik_trace: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
}

impl RecoveryResult {
    pub fn csv_header(n: usize) -> String {
        let mut h: Vec<String> = (0..n).map(|i| format!("gamma_{i}")).collect();
        h.extend(["support", "iters", "converged"].map(String::from));
        h.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut f: Vec<String> = self
            .gamma_hat
            .iter()
            .map(|&g| crate::io::fmt_f64(g))
            .collect();
        f.push(
            self.support_hat
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        f.push(self.iters.to_string());
        f.push(self.converged.to_string());
        f.join(",")
    }
}

/// Quantities of one likelihood evaluation at `γ`.
struct Evidence {
    loglik: f64,
    p: Vec<f64>,
    q: Vec<f64>,
}

fn evidence(
    op: &'static str,
    r: &Matrix,
    l: usize,
    a: &Matrix,
    gamma: &[f64],
    sigma2: f64,
    iteration: usize,
) -> Result<Evidence> {
    let sigma = sigma_gamma_matrix(a, gamma, sigma2);
    let ch = sigma.cholesky().ok_or_else(|| Error::Numerical {
        op,
        iteration,
        reason: "covariance lost positive definiteness".into(),
    })?;
    let b = ch.solve(a);
    let rb = r * &b;
    let n = a.ncols();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        q[i] = a.column(i).dot(&b.column(i));
        p[i] = b.column(i).dot(&rb.column(i));
    }
    let tr = ch.solve(r).trace();
    let loglik = -(l as f64) * (chol_logdet(&ch) + tr);
    if !loglik.is_finite() {
        return Err(Error::Numerical {
            op,
            iteration,
            reason: format!("log-likelihood is {loglik}"),
        });
    }
    Ok(Evidence { loglik, p, q })
}

/// `−L log|Σ_γ| − tr(Σ_γ⁻¹YYᵀ)`, the log-likelihood without its
/// γ-independent `−(mL/2) log 2π` term. `σ²` is floored at `1e-10`.
pub fn loglik(y: &Matrix, a: &Matrix, gamma: &Vector, sigma2: f64) -> Result<f64> {
    check_y_a("loglik", y, a)?;
    if gamma.len() != a.ncols() {
        return Err(Error::dims("loglik", a.ncols(), gamma.len()));
    }
    if gamma.iter().any(|&g| !(g >= 0.0)) || !(sigma2 >= 0.0) {
        return Err(Error::invalid(
            "loglik: gamma and sigma2 must be nonnegative",
        ));
    }
    let s2 = sigma2.max(MsblConfig::default().sigma2_eff_floor);
    let r = sample_covariance(y);
    match evidence("loglik", &r, y.ncols(), a, gamma.as_slice(), s2, 0) {
        Ok(e) => Ok(e.loglik),
        Err(Error::Numerical { reason, .. }) => Err(Error::domain("loglik", reason)),
        Err(e) => Err(e),
    }
}

fn initial_gamma(y: &Matrix, a: &Matrix, init: InitGamma) -> Vec<f64> {
    match init {
        InitGamma::Ones => vec![1.0; a.ncols()],
        InitGamma::MatchedFilter => {
            let l = y.ncols() as f64;
            let c = a.transpose() * y;
            (0..a.ncols())
                .map(|i| {
                    let nrm2 = a.column(i).norm_squared();
                    if nrm2 > 0.0 {
                        c.row(i).norm_squared() / (l * nrm2 * nrm2)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    }
}

/// Projection applied after every update.
#[derive(Debug, Clone, Copy)]
struct Projection {
    k: usize,
    gamma_min: f64,
    gamma_max: f64,
}

impl Projection {
    /// Keep the `k` largest entries, zero the rest, clamp the kept nonzero
    /// entries into `[γmin, γmax]`.
    fn apply(&self, g: &mut [f64]) {
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.sort_by(|&i, &j| g[j].total_cmp(&g[i]));
        for &i in &order[self.k.min(g.len())..] {
            g[i] = 0.0;
        }
        for v in g.iter_mut() {
            if *v > 0.0 {
                *v = v.clamp(self.gamma_min, self.gamma_max);
            }
        }
    }
}

fn run(
    op: &'static str,
    y: &Matrix,
    a: &Matrix,
    sigma2: f64,
    cfg: &MsblConfig,
    mut gamma: Vec<f64>,
    proj: Option<Projection>,
) -> Result<RecoveryResult> {
    let s2 = sigma2.max(cfg.sigma2_eff_floor);
    let l = y.ncols();
    let r = sample_covariance(y);
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut converged = false;
    let mut iters = 0;

    while iters < cfg.max_iters {
        let ev = evidence(op, &r, l, a, &gamma, s2, iters)?;
        trace.push(ev.loglik);
        let mut next: Vec<f64> = gamma
            .iter()
            .enumerate()
            .map(|(i, &g)| match cfg.update_rule {
                UpdateRule::Em => g * g * ev.p[i] + g - g * g * ev.q[i],
                UpdateRule::FixedPoint => {
                    if ev.q[i] > 0.0 {
                        g * ev.p[i] / ev.q[i]
                    } else {
                        0.0
                    }
                }
            })
            .map(|g| if g < cfg.prune_floor { 0.0 } else { g })
            .collect();
        if let Some(p) = proj {
            p.apply(&mut next);
        }
        if next.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical {
                op,
                iteration: iters + 1,
                reason: "non-finite hyperparameter".into(),
            });
        }
        let delta = gamma
            .iter()
            .zip(&next)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        let scale = next
            .iter()
            .fold(0.0_f64, |m, &g| m.max(g))
            .max(f64::MIN_POSITIVE);
        gamma = next;
        iters += 1;
        if delta / scale < cfg.tol {
            converged = true;
            break;
        }
    }
    trace.push(evidence(op, &r, l, a, &gamma, s2, iters)?.loglik);

    let gamma_hat = Vector::from_vec(gamma);
    let support_hat = extract_support(&gamma_hat, cfg.extraction)?.support;
    Ok(RecoveryResult {
        gamma_hat,
        support_hat,
        loglik_trace: trace,
        iters,
        converged,
    })
}

fn check_inputs(
    op: &'static str,
    y: &Matrix,
    a: &Matrix,
    sigma2: f64,
    cfg: &MsblConfig,
) -> Result<()> {
    check_y_a(op, y, a)?;
    cfg.validate()?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("{op}: sigma2 = {sigma2}")));
    }
    Ok(())
}

/// Unconstrained M-SBL.
pub fn msbl(y: &Matrix, a: &Matrix, sigma2: f64, cfg: &MsblConfig) -> Result<RecoveryResult> {
    check_inputs("msbl", y, a, sigma2, cfg)?;
    run(
        "msbl",
        y,
        a,
        sigma2,
        cfg,
        initial_gamma(y, a, cfg.init_gamma),
        None,
    )
}

/// Unconstrained M-SBL started from `gamma0` instead of `cfg.init_gamma`.
pub fn msbl_from(
    y: &Matrix,
    a: &Matrix,
    sigma2: f64,
    cfg: &MsblConfig,
    gamma0: &Vector,
) -> Result<RecoveryResult> {
    check_inputs("msbl", y, a, sigma2, cfg)?;
    if gamma0.len() != a.ncols() {
        return Err(Error::dims("msbl", a.ncols(), gamma0.len()));
    }
    if gamma0.iter().any(|&g| !(g >= 0.0 && g.is_finite())) {
        return Err(Error::invalid(
            "msbl: initial gamma must be finite and nonnegative",
        ));
    }
    run(
        "msbl",
        y,
        a,
        sigma2,
        cfg,
        gamma0.iter().cloned().collect(),
        None,
    )
}

/// M-SBL constrained to `Θ_K` (at most `K` nonzeros, each in `[γmin, γmax]`).
///
/// Zeroed entries never revive under the multiplicative update, so the
/// projection is switched on only once the unconstrained iteration has
/// stopped: if that iterate already lies in `Θ_K` it is returned as is,
/// otherwise projected updates continue from it for up to `max_iters` more
/// steps. The trace is the concatenation of both phases.
pub fn cmsbl(
    y: &Matrix,
    a: &Matrix,
    sigma2: f64,
    k: usize,
    gamma_min: f64,
    gamma_max: f64,
    cfg: &MsblConfig,
) -> Result<RecoveryResult> {
    if k == 0 || k > a.ncols() {
        return Err(Error::invalid(format!(
            "cmsbl: K = {k} outside 1..={}",
            a.ncols()
        )));
    }
    if !(gamma_min > 0.0 && gamma_min <= gamma_max) {
        return Err(Error::invalid(format!(
            "cmsbl: need 0 < gamma_min <= gamma_max, got [{gamma_min}, {gamma_max}]"
        )));
    }
    check_inputs("cmsbl", y, a, sigma2, cfg)?;
    let proj = Projection {
        k,
        gamma_min,
        gamma_max,
    };
    let free = run(
        "cmsbl",
        y,
        a,
        sigma2,
        cfg,
        initial_gamma(y, a, cfg.init_gamma),
        None,
    )?;
    let mut projected: Vec<f64> = free.gamma_hat.iter().cloned().collect();
    proj.apply(&mut projected);
    if projected.as_slice() == free.gamma_hat.as_slice() {
        return Ok(free);
    }
    let start: Vec<f64> = free.gamma_hat.iter().cloned().collect();
    let mut tail = run("cmsbl", y, a, sigma2, cfg, start, Some(proj))?;
    let mut trace = free.loglik_trace;
    trace.extend_from_slice(&tail.loglik_trace[1..]);
    tail.loglik_trace = trace;
    tail.iters += free.iters;
    Ok(tail)
}
