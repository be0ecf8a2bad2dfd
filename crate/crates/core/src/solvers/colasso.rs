//! Covariance-matching non-negative LASSO.
//!
//! Minimizes `½‖(A⊙A)γ − vec(R_Y − σ²I)‖² + λ‖γ‖₁` over `γ ≥ 0`, written as
//! `½γᵀQγ − cᵀγ + λ1ᵀγ + ½‖R_Y − σ²I‖_F²` with `Q = (AᵀA)∘(AᵀA)` and
//! `cᵢ = aᵢᵀ(R_Y − σ²I)aᵢ`. Solved by accelerated projected gradient with
//! backtracking and function-value restarts.

use crate::error::{Error, Result};
use crate::matlib::{gram, Matrix, Vector};
use crate::model::sample_covariance;

use super::check_y_a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColassoConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop when `‖Δγ‖∞ ≤ tol·max(1, ‖γ‖∞)`.
    pub tol: f64,
}

impl Default for ColassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            max_iters: 5000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColassoResult {
    /// Best iterate found.
    pub gamma: Vector,
    pub objective: f64,
    pub iters: usize,
    pub converged: bool,
}

struct Problem {
    q: Matrix,
    c: Vector,
    lambda: f64,
    constant: f64,
}

impl Problem {
    fn value(&self, g: &Vector) -> f64 {
        0.5 * g.dot(&(&self.q * g)) - self.c.dot(g) + self.lambda * g.sum() + self.constant
    }

    /// Gradient of the smooth part plus the (constant) ℓ₁ slope.
    fn grad(&self, g: &Vector) -> Vector {
        (&self.q * g - &self.c).add_scalar(self.lambda)
    }
}

pub fn colasso(y: &Matrix, a: &Matrix, sigma2: f64, cfg: &ColassoConfig) -> Result<ColassoResult> {
    check_y_a("colasso", y, a)?;
    if !(cfg.lambda >= 0.0) || cfg.max_iters == 0 || !(cfg.tol > 0.0) {
        return Err(Error::invalid(
            "colasso: need lambda >= 0, max_iters >= 1, tol > 0",
        ));
    }
    let mut d = sample_covariance(y);
    for i in 0..d.nrows() {
        d[(i, i)] -= sigma2;
    }
    let g = gram(a);
    let da = &d * a;
    let prob = Problem {
        q: g.component_mul(&g),
        c: Vector::from_iterator(
            a.ncols(),
            (0..a.ncols()).map(|i| a.column(i).dot(&da.column(i))),
        ),
        lambda: cfg.lambda,
        constant: 0.5 * d.norm_squared(),
    };
    let n = a.ncols();
    let mut x = Vector::zeros(n);
    let mut fx = prob.value(&x);
    let mut z = x.clone();
    let mut t = 1.0_f64;
    let mut lip = 1.0_f64;
    let (mut best, mut best_f) = (x.clone(), fx);
    let mut converged = false;
    let mut iters = 0;

    while iters < cfg.max_iters {
        iters += 1;
        let fz = prob.value(&z);
        let gz = prob.grad(&z);
        let mut x_new;
        loop {
            x_new = (&z - &gz / lip).map(|v| v.max(0.0));
            let step = &x_new - &z;
            let model = fz + gz.dot(&step) + 0.5 * lip * step.norm_squared();
            if prob.value(&x_new) <= model + 1e-12 * model.abs().max(1.0) || lip > 1e300 {
                break;
            }
            lip *= 2.0;
        }
        let f_new = prob.value(&x_new);
        if !f_new.is_finite() {
            return Err(Error::Numerical {
                op: "colasso",
                iteration: iters,
                reason: format!("objective is {f_new}"),
            });
        }
        let delta = (&x_new - &x).amax();
        let t_new = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        if f_new > fx {
            // restart momentum
            t = 1.0;
            z = x_new.clone();
        } else {
            z = &x_new + (&x_new - &x) * ((t - 1.0) / t_new);
            t = t_new;
        }
        x = x_new;
        fx = f_new;
        if fx < best_f {
            best_f = fx;
            best = x.clone();
        }
        if delta <= cfg.tol * x.amax().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(ColassoResult {
        gamma: best,
        objective: best_f.max(0.0),
        iters,
        converged,
    })
}
