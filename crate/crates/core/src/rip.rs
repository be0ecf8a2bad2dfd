//! Restricted isometry constants of `A` and of its self Khatri–Rao product.
//!
//! For a support `S` the statistic is `max(λmax(A_SᵀA_S) − 1, 1 − λmin(A_SᵀA_S))`
//! and `δ_k` is its maximum over all supports of size `k`.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matlib::{
    binomial, check_budget, khatri_rao, sym_extreme_eigenvalues, Combinations, Matrix,
};
use crate::rng::{random_subset, rng_from_seed};

/// Default cap on the number of supports an exhaustive search may visit.
pub const DEFAULT_SUBSET_BUDGET: u128 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicMethod {
    Exhaustive,
    Randomized,
}

impl fmt::Display for RicMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RicMethod::Exhaustive => "exhaustive",
            RicMethod::Randomized => "randomized",
        })
    }
}

impl std::str::FromStr for RicMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "randomized" => Ok(Self::Randomized),
            _ => Err(Error::Config(format!(
                "method must be exhaustive or randomized, got '{s}'"
            ))),
        }
    }
}

/// How to search supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportSearch {
    Exhaustive { budget: u128 },
    Randomized { trials: usize, seed: u64 },
}

impl SupportSearch {
    pub fn exhaustive() -> Self {
        SupportSearch::Exhaustive {
            budget: DEFAULT_SUBSET_BUDGET,
        }
    }
}

/// Bracket on a restricted isometry constant.
///
/// A randomized search that does not cover every support only certifies the
/// lower end, so `upper` is `+∞` in that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicEstimate {
    pub order: usize,
    pub lower: f64,
    pub upper: f64,
    pub method: RicMethod,
    pub trials: usize,
}

impl RicEstimate {
    pub const CSV_HEADER: &'static str = "order,lower,upper,method,trials";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.order, self.lower, self.upper, self.method, self.trials
        )
    }
}

/// RIC statistic of a single support.
pub fn support_ric(a: &Matrix, support: &[usize]) -> f64 {
    let sub = a.select_columns(support);
    let (lo, hi) = sym_extreme_eigenvalues(&(sub.transpose() * &sub));
    (hi - 1.0).max(1.0 - lo).max(0.0)
}

fn check_order(op: &'static str, a: &Matrix, k: usize) -> Result<()> {
    if k == 0 || k > a.ncols() {
        return Err(Error::invalid(format!(
            "{op}: order {k} outside 1..={}",
            a.ncols()
        )));
    }
    Ok(())
}

fn max_over<F>(subsets: &[Vec<usize>], f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    subsets.par_iter().map(|s| f(s)).reduce(|| 0.0, f64::max)
}

pub fn ric_exhaustive(a: &Matrix, k: usize) -> Result<RicEstimate> {
    ric_exhaustive_with_budget(a, k, DEFAULT_SUBSET_BUDGET)
}

pub fn ric_exhaustive_with_budget(a: &Matrix, k: usize, budget: u128) -> Result<RicEstimate> {
    check_order("ric_exhaustive", a, k)?;
    check_budget("ric_exhaustive", a.ncols(), k, budget)?;
    let subsets: Vec<Vec<usize>> = Combinations::new(a.ncols(), k).collect();
    let d = max_over(&subsets, |s| support_ric(a, s));
    Ok(RicEstimate {
        order: k,
        lower: d,
        upper: d,
        method: RicMethod::Exhaustive,
        trials: 0,
    })
}

/// Lower bound on `δ_k` from `trials` uniformly sampled supports.
///
/// When `trials ≥ C(n, k)` every support is visited instead, and the bracket
/// closes.
pub fn ric_randomized(a: &Matrix, k: usize, trials: usize, seed: u64) -> Result<RicEstimate> {
    check_order("ric_randomized", a, k)?;
    if trials == 0 {
        return Err(Error::invalid("ric_randomized: trials must be at least 1"));
    }
    let n = a.ncols();
    let full = trials as u128 >= binomial(n, k);
    let subsets: Vec<Vec<usize>> = if full {
        Combinations::new(n, k).collect()
    } else {
        let mut rng = rng_from_seed(seed);
        (0..trials).map(|_| random_subset(&mut rng, n, k)).collect()
    };
    let d = max_over(&subsets, |s| support_ric(a, s));
    Ok(RicEstimate {
        order: k,
        lower: d,
        upper: if full { d } else { f64::INFINITY },
        method: RicMethod::Randomized,
        trials,
    })
}

pub fn ric(a: &Matrix, k: usize, search: SupportSearch) -> Result<RicEstimate> {
    match search {
        SupportSearch::Exhaustive { budget } => ric_exhaustive_with_budget(a, k, budget),
        SupportSearch::Randomized { trials, seed } => ric_randomized(a, k, trials, seed),
    }
}

/// RIC of the raw (not renormalized) self Khatri–Rao product `A ⊙ A`.
pub fn kr_ric(a: &Matrix, k: usize, search: SupportSearch) -> Result<RicEstimate> {
    let kr = khatri_rao(a, a)?;
    ric(&kr, k, search)
}

/// `max_{|S| = k} λmax(A_SᵀA_S)`, exhaustively. `k` is capped at `n`.
pub fn gram_spectral_sup(a: &Matrix, k: usize, budget: u128) -> Result<f64> {
    let k = k.min(a.ncols());
    check_order("gram_spectral_sup", a, k)?;
    check_budget("gram_spectral_sup", a.ncols(), k, budget)?;
    let subsets: Vec<Vec<usize>> = Combinations::new(a.ncols(), k).collect();
    Ok(max_over(&subsets, |s| {
        let sub = a.select_columns(s);
        sym_extreme_eigenvalues(&(sub.transpose() * &sub)).1
    }))
}
