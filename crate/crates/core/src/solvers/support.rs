use crate::error::{Error, Result};
use crate::matlib::Vector;

/// Default relative threshold for [`ExtractionPolicy::Threshold`].
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

/// Rule that turns a hyperparameter vector into an index set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtractionPolicy {
    /// `{i : γᵢ > τ·max γ}`.
    Threshold(f64),
    /// The `k` largest entries, ties to the lowest index.
    TopK(usize),
}

impl Default for ExtractionPolicy {
    fn default() -> Self {
        ExtractionPolicy::Threshold(DEFAULT_THRESHOLD)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    /// Sorted ascending.
    pub support: Vec<usize>,
    /// Top-k on an all-zero vector: the `k` lowest indices were returned.
    pub degenerate: bool,
}

pub fn extract_support(gamma: &Vector, policy: ExtractionPolicy) -> Result<Extracted> {
    let n = gamma.len();
    match policy {
        ExtractionPolicy::Threshold(tau) => {
            if !(tau > 0.0) {
                return Err(Error::invalid(format!(
                    "threshold must be positive, got {tau}"
                )));
            }
            let gmax = gamma.iter().cloned().fold(0.0, f64::max);
            let support = if gmax > 0.0 {
                (0..n).filter(|&i| gamma[i] > tau * gmax).collect()
            } else {
                Vec::new()
            };
            Ok(Extracted {
                support,
                degenerate: false,
            })
        }
        ExtractionPolicy::TopK(k) => {
            if k > n {
                return Err(Error::invalid(format!("top_k: k = {k} exceeds n = {n}")));
            }
            let mut order: Vec<usize> = (0..n).collect();
            // stable sort keeps the lower index first among ties
            order.sort_by(|&i, &j| gamma[j].total_cmp(&gamma[i]));
            let mut support = order[..k].to_vec();
            support.sort_unstable();
            Ok(Extracted {
                support,
                degenerate: k > 0 && gamma.iter().all(|&g| g == 0.0),
            })
        }
    }
}
