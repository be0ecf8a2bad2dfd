//! Greedy baselines: simultaneous OMP and the one-step greedy algorithm.

use crate::error::{Error, Result};
use crate::matlib::{Matrix, Vector, RANK_RTOL};
use crate::model::sample_covariance;

use super::check_y_a;
use super::support::{extract_support, ExtractionPolicy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SompResult {
    /// Sorted ascending.
    pub support: Vec<usize>,
    /// Some selected column set was numerically rank deficient; its
    /// projection used a truncated-SVD pseudo-inverse.
    pub rank_deficient: bool,
}

/// Simultaneous orthogonal matching pursuit with `k` picks.
pub fn somp(y: &Matrix, a: &Matrix, k: usize) -> Result<SompResult> {
    check_y_a("somp", y, a)?;
    if k > a.nrows() || k > a.ncols() {
        return Err(Error::invalid(format!(
            "somp: k = {k} exceeds min(m, n) = {}",
            a.nrows().min(a.ncols())
        )));
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut resid = y.clone();
    let mut rank_deficient = false;
    for _ in 0..k {
        let corr = a.transpose() * &resid;
        let best = (0..a.ncols())
            .filter(|i| !chosen.contains(i) && norms[*i] > 0.0)
            .map(|i| (i, corr.row(i).norm() / norms[i]))
            // max score, lowest index on ties
            .fold(None, |acc: Option<(usize, f64)>, (i, s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((i, s)),
            });
        let Some((i, _)) = best else { break };
        chosen.push(i);
        let a_s = a.select_columns(&chosen);
        let svd = a_s.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let eps = RANK_RTOL * smax;
        if svd.singular_values.iter().any(|&s| s <= eps) {
            rank_deficient = true;
        }
        let pinv = svd.pseudo_inverse(eps).map_err(|e| Error::Numerical {
            op: "somp",
            iteration: chosen.len(),
            reason: e.to_string(),
        })?;
        resid = y - &a_s * (pinv * y);
    }
    chosen.sort_unstable();
    Ok(SompResult {
        support: chosen,
        rank_deficient,
    })
}

/// OSGA scores `sᵢ = (1/L) Σⱼ (aᵢᵀyⱼ)² = aᵢᵀ R_Y aᵢ`.
pub fn osga_scores(y: &Matrix, a: &Matrix) -> Result<Vector> {
    check_y_a("osga", y, a)?;
    let r = sample_covariance(y);
    let ra = &r * a;
    Ok(Vector::from_iterator(
        a.ncols(),
        (0..a.ncols()).map(|i| a.column(i).dot(&ra.column(i))),
    ))
}

/// Indices of the `k` largest OSGA scores, sorted ascending.
pub fn osga(y: &Matrix, a: &Matrix, k: usize) -> Result<Vec<usize>> {
    let s = osga_scores(y, a)?;
    Ok(extract_support(&s, ExtractionPolicy::TopK(k))?.support)
}
