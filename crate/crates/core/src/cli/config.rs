//! Flat `key = value` configuration with typed lookups.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! win, and command-line overrides are applied after the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Every recognized key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "master seed (overridden by --seed)"),
    ("m", "rows of A"),
    ("n", "columns of A"),
    ("K", "sparsity level bound"),
    ("k_true", "size of the true support (defaults to K)"),
    ("L", "number of MMVs (gen, phase)"),
    ("L_grid", "comma-separated increasing list of L (simulate)"),
    ("sigma2", "noise variance"),
    ("gamma_min", "smallest active variance"),
    ("gamma_max", "largest active variance"),
    ("normalization", "unit_columns | iid_scaled"),
    ("support_policy", "fixed | uniform_random"),
    ("trials", "trials per cell"),
    ("matrix_policy", "fresh_per_trial | fixed"),
    ("algorithm", "msbl | cmsbl | somp | colasso | osga"),
    ("extraction", "topk | threshold"),
    ("threshold", "threshold for extraction = threshold"),
    ("max_iters", "M-SBL iteration cap"),
    ("tol", "M-SBL relative convergence tolerance"),
    ("prune_floor", "M-SBL pruning floor"),
    (
        "sigma2_eff_floor",
        "floor on the noise variance used inside M-SBL",
    ),
    ("update_rule", "em | fixed_point"),
    ("init_gamma", "ones | matched_filter"),
    ("lambda", "CoLASSO l1 weight"),
    ("colasso_max_iters", "CoLASSO iteration cap"),
    ("delta", "target failure probability for certificates"),
    ("C_abs", "absolute constant in the union-bound certificate"),
    ("timing", "record wall_time_ms (true | false)"),
    ("m_grid", "comma-separated m values (phase)"),
    ("k_grid", "comma-separated k values (phase)"),
    ("target", "A | kr: matrix whose RIC `rip` reports"),
    ("rip_trials", "supports sampled by the randomized RIC"),
    ("budget", "subset budget for exhaustive searches"),
    ("ric_kr_2K", "override for the RIC of A⊙A at order 2K"),
    ("ric_A_2K", "override for the RIC of A at order 2K"),
    ("ric_A_K", "override for the RIC of A at order K"),
    (
        "sup_term",
        "override for the max spectral norm of 2K-column Gram blocks",
    ),
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !known(key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Apply `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| {
                Error::Config(format!("override `{o}` is not of the form key=value"))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(known(key), "lookup of undeclared key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse::<T>().map_err(|_| {
                            Error::Config(format!("key `{key}`: cannot parse `{}`", s.trim()))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Like [`Config::get`] for enumerated values parsed by `f`.
    pub fn choice<T>(&self, key: &str, default: T, f: impl Fn(&str) -> Option<T>) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                f(v).ok_or_else(|| Error::Config(format!("key `{key}`: unrecognized value `{v}`")))
            }
        }
    }
}
