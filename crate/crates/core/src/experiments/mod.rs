//! Seeded Monte Carlo studies: error-versus-L curves, phase diagrams and
//! exponential-decay fits.
//!
//! Trial `t` draws its measurement matrix and source from
//! `derive_seed(master, [t])` and its data at `L` from
//! `derive_seed(master, [L, t])`, so every cell of a curve sees the same
//! problems and results do not depend on the number of threads.

mod svg;

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::bounds::{bounds_report, BoundParams, BoundsReport, RicInputs, DEFAULT_C_ABS};
use crate::divergence::SupMode;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::matlib::{binomial, max_abs_entry, Matrix};
use crate::model::{
    sample_gaussian_matrix, sample_source, synthesize_mmv, Normalization, SourceSpec, SupportPolicy,
};
use crate::rip::{gram_spectral_sup, kr_ric, ric, RicMethod, SupportSearch, DEFAULT_SUBSET_BUDGET};
use crate::rng::{derive_seed, rng_from_seed};
use crate::solvers::{
    cmsbl, colasso, extract_support, msbl, osga, somp, ColassoConfig, ExtractionPolicy, MsblConfig,
};

pub use svg::{heatmap_svg, line_plot_svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixPolicy {
    FreshPerTrial,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Msbl,
    Cmsbl,
    Somp,
    Colasso,
    Osga,
}

/// Support extraction for the γ-returning solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extraction {
    Threshold(f64),
    /// Top-`k_true`.
    TopK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub k_max: usize,
    pub k_true: usize,
    pub l_grid: Vec<usize>,
    pub sigma2: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub trials: usize,
    pub matrix_policy: MatrixPolicy,
    pub normalization: Normalization,
    pub support_policy: SupportPolicy,
    pub algorithm: Algorithm,
    pub extraction: Extraction,
    pub msbl: MsblConfig,
    pub colasso: ColassoConfig,
    pub master_seed: u64,
    /// Target level `δ` for the companion certificates.
    pub delta: f64,
    pub c_abs: f64,
    /// Record wall-clock time per cell; off by default so outputs are reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 8,
            n: 20,
            k_max: 3,
            k_true: 3,
            l_grid: vec![5, 10, 20, 40, 80, 160],
            sigma2: 0.1,
            gamma_min: 1.0,
            gamma_max: 1.0,
            trials: 100,
            matrix_policy: MatrixPolicy::FreshPerTrial,
            normalization: Normalization::UnitColumns,
            support_policy: SupportPolicy::UniformRandom,
            algorithm: Algorithm::Msbl,
            extraction: Extraction::TopK,
            msbl: MsblConfig::default(),
            colasso: ColassoConfig::default(),
            master_seed: 0,
            delta: 0.05,
            c_abs: DEFAULT_C_ABS,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!(
                "m and n must be positive, got m = {}, n = {}",
                self.m, self.n
            ));
        }
        if !(self.k_true <= self.k_max && self.k_max <= self.n) {
            return bad(format!(
                "need k_true <= K <= n, got k_true = {}, K = {}, n = {}",
                self.k_true, self.k_max, self.n
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.l_grid.is_empty()
            || self.l_grid[0] == 0
            || self.l_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return bad(format!(
                "L_grid must be positive and strictly increasing, got {:?}",
                self.l_grid
            ));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return bad(format!("sigma2 = {}", self.sigma2));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max && self.gamma_max.is_finite())
        {
            return bad(format!(
                "need 0 < gamma_min <= gamma_max, got [{}, {}]",
                self.gamma_min, self.gamma_max
            ));
        }
        if let Extraction::Threshold(t) = self.extraction {
            if !(t > 0.0) {
                return bad(format!("threshold = {t} must be positive"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) || !(self.c_abs > 0.0) {
            return bad("delta must be in (0, 1) and C_abs positive".into());
        }
        self.msbl
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    fn policy(&self) -> ExtractionPolicy {
        match self.extraction {
            Extraction::Threshold(t) => ExtractionPolicy::Threshold(t),
            Extraction::TopK => ExtractionPolicy::TopK(self.k_true),
        }
    }

    fn matrix_seed(&self, trial: usize) -> u64 {
        match self.matrix_policy {
            MatrixPolicy::Fixed => derive_seed(self.master_seed, &[u64::MAX]),
            MatrixPolicy::FreshPerTrial => {
                derive_seed(derive_seed(self.master_seed, &[trial as u64]), &[0])
            }
        }
    }

    /// The measurement matrix used by `trial`.
    pub fn matrix(&self, trial: usize) -> Result<Matrix> {
        sample_gaussian_matrix(self.m, self.n, self.normalization, self.matrix_seed(trial))
    }

    /// The realized source of `trial`.
    pub fn source(&self, trial: usize) -> Result<SourceSpec> {
        let template = SourceSpec::with_leading_support(
            self.n,
            self.k_max,
            self.k_true,
            self.gamma_min,
            self.gamma_max,
        )?;
        if self.k_true == 0 {
            return Ok(template);
        }
        let seed = derive_seed(derive_seed(self.master_seed, &[trial as u64]), &[1]);
        sample_source(&template, self.support_policy, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    /// The solver failed numerically; counted as a failure.
    pub numerical_failure: bool,
    pub iters: usize,
}

/// One seeded trial at `L` MMVs: success iff the recovered support equals `S*`.
pub fn run_trial(cfg: &ExperimentConfig, l: usize, trial: usize) -> Result<TrialOutcome> {
    let a = cfg.matrix(trial)?;
    let source = cfg.source(trial)?;
    let inst = synthesize_mmv(
        &source,
        &a,
        l,
        cfg.sigma2,
        derive_seed(cfg.master_seed, &[l as u64, trial as u64]),
    )?;
    let y = &inst.y;
    let policy = cfg.policy();
    let solved: Result<(Vec<usize>, usize)> = match cfg.algorithm {
        Algorithm::Msbl => {
            let mc = MsblConfig {
                extraction: policy,
                ..cfg.msbl
            };
            msbl(y, &a, cfg.sigma2, &mc).map(|r| (r.support_hat, r.iters))
        }
        Algorithm::Cmsbl => {
            let mc = MsblConfig {
                extraction: policy,
                ..cfg.msbl
            };
            cmsbl(
                y,
                &a,
                cfg.sigma2,
                cfg.k_max.max(1),
                cfg.gamma_min,
                cfg.gamma_max,
                &mc,
            )
            .map(|r| (r.support_hat, r.iters))
        }
        Algorithm::Somp => {
            if cfg.k_true > cfg.m {
                // more picks than measurements: SOMP cannot return S*
                Ok((Vec::new(), 0))
            } else {
                somp(y, &a, cfg.k_true).map(|r| (r.support, cfg.k_true))
            }
        }
        Algorithm::Osga => osga(y, &a, cfg.k_true).map(|s| (s, 1)),
        Algorithm::Colasso => colasso(y, &a, cfg.sigma2, &cfg.colasso)
            .and_then(|r| Ok((extract_support(&r.gamma, policy)?.support, r.iters))),
    };
    match solved {
        Ok((support, iters)) => Ok(TrialOutcome {
            success: support == source.support,
            numerical_failure: false,
            iters,
        }),
        Err(Error::Numerical { .. }) => Ok(TrialOutcome {
            success: false,
            numerical_failure: true,
            iters: 0,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub l: usize,
    pub successes: usize,
    pub trials: usize,
    pub numerical_failures: usize,
    pub error_rate: f64,
    pub mean_iters: f64,
    pub wall_time_ms: u128,
}

impl CellResult {
    pub const CSV_HEADER: &'static str = "L,successes,trials,error_rate,mean_iters,wall_time_ms";

    pub fn from_outcomes(l: usize, outcomes: &[TrialOutcome], wall_time_ms: u128) -> Self {
        let trials = outcomes.len();
        let successes = outcomes.iter().filter(|o| o.success).count();
        let iters: usize = outcomes.iter().map(|o| o.iters).sum();
        Self {
            l,
            successes,
            trials,
            numerical_failures: outcomes.iter().filter(|o| o.numerical_failure).count(),
            error_rate: 1.0 - successes as f64 / trials as f64,
            mean_iters: iters as f64 / trials as f64,
            wall_time_ms,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.l,
            self.successes,
            self.trials,
            fmt_f64(self.error_rate),
            fmt_f64(self.mean_iters),
            self.wall_time_ms
        )
    }

    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

fn run_cell(cfg: &ExperimentConfig, l: usize) -> Result<CellResult> {
    let start = Instant::now();
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, l, t))
        .collect::<Result<_>>()?;
    let ms = if cfg.timing {
        start.elapsed().as_millis()
    } else {
        0
    };
    Ok(CellResult::from_outcomes(l, &outcomes, ms))
}

/// One [`CellResult`] per entry of the L grid.
pub fn error_curve(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    cfg.l_grid.iter().map(|&l| run_cell(cfg, l)).collect()
}

pub fn results_csv(cells: &[CellResult]) -> String {
    let mut s = String::from(CellResult::CSV_HEADER);
    s.push('\n');
    for c in cells {
        s.push_str(&c.csv_row());
        s.push('\n');
    }
    s
}

/// RIC inputs for certificates at sparsity `k`: exhaustive when the
/// order-`2k` search fits [`DEFAULT_SUBSET_BUDGET`], otherwise randomized
/// lower estimates with `seed` and the RIP-relaxed sup term.
pub fn ric_inputs(a: &Matrix, k: usize, seed: u64) -> Result<(RicInputs, RicMethod)> {
    let n = a.ncols();
    let order2 = (2 * k).min(n);
    let exhaustive = binomial(n, order2) <= DEFAULT_SUBSET_BUDGET;
    let search = if exhaustive {
        SupportSearch::exhaustive()
    } else {
        SupportSearch::Randomized { trials: 2000, seed }
    };
    let kr = kr_ric(a, order2, search)?.lower;
    let sup_term = if exhaustive {
        gram_spectral_sup(a, order2, DEFAULT_SUBSET_BUDGET)?
    } else {
        SupMode::RipRelaxed.evaluate(a, k, kr)?
    };
    let inputs = RicInputs {
        kr_2k: kr,
        a_2k: ric(a, order2, search)?.lower,
        a_k: ric(a, k.min(n), search)?.lower,
        sup_term,
    };
    let method = if exhaustive {
        RicMethod::Exhaustive
    } else {
        RicMethod::Randomized
    };
    Ok((inputs, method))
}

/// Certificates for the matrix of trial 0, with the RIC method used.
pub fn companion_bounds(cfg: &ExperimentConfig) -> Result<(BoundsReport, RicMethod)> {
    let a = cfg.matrix(0)?;
    let k = cfg.k_max.max(1);
    let (ric_in, method) = ric_inputs(&a, k, derive_seed(cfg.master_seed, &[u64::MAX - 1]))?;
    let params = BoundParams {
        n: cfg.n,
        k,
        a_star: max_abs_entry(&a),
        sigma2: cfg.sigma2,
        gamma_min: cfg.gamma_min,
        gamma_max: cfg.gamma_max,
        delta: cfg.delta,
    };
    Ok((bounds_report(&params, ric_in, cfg.c_abs)?, method))
}

/// Write `<base>.csv`, `<base>.svg` and, when `σ² > 0`, `<base>_bounds.csv`.
pub fn write_curve(
    dir: &Path,
    base: &str,
    cfg: &ExperimentConfig,
    cells: &[CellResult],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{base}.csv")), results_csv(cells))?;
    let pts: Vec<(f64, f64)> = cells.iter().map(|c| (c.l as f64, c.error_rate)).collect();
    fs::write(
        dir.join(format!("{base}.svg")),
        line_plot_svg("error rate vs L", "L", "error rate", &pts),
    )?;
    if cfg.sigma2 > 0.0 {
        let (report, method) = companion_bounds(cfg)?;
        let mut s = format!("L,ric_method,{}\n", BoundsReport::CSV_HEADER);
        for c in cells {
            s.push_str(&format!("{},{},{}\n", c.l, method, report.csv_row()));
        }
        fs::write(dir.join(format!("{base}_bounds.csv")), s)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub m: usize,
    pub k: usize,
    pub error_rate: f64,
    pub trials: usize,
    pub numerical_failures: usize,
}

/// Error rate over an `m × k` grid at the first `L` of `base.l_grid`, with
/// `K = k_true = k` in each cell.
pub fn phase_diagram(
    base: &ExperimentConfig,
    m_grid: &[usize],
    k_grid: &[usize],
) -> Result<Vec<PhaseCell>> {
    if m_grid.is_empty() || k_grid.is_empty() {
        return Err(Error::Config(
            "phase diagram grids must be non-empty".into(),
        ));
    }
    let l = *base
        .l_grid
        .first()
        .ok_or_else(|| Error::Config("L_grid must be non-empty".into()))?;
    let mut out = Vec::with_capacity(m_grid.len() * k_grid.len());
    for &m in m_grid {
        for &k in k_grid {
            let cfg = ExperimentConfig {
                m,
                k_max: k,
                k_true: k,
                l_grid: vec![l],
                master_seed: derive_seed(base.master_seed, &[m as u64, k as u64]),
                ..base.clone()
            };
            cfg.validate()?;
            let cell = run_cell(&cfg, l)?;
            out.push(PhaseCell {
                m,
                k,
                error_rate: cell.error_rate,
                trials: cell.trials,
                numerical_failures: cell.numerical_failures,
            });
        }
    }
    Ok(out)
}

pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut s = String::from("m,k,error_rate,trials\n");
    for c in cells {
        s.push_str(&format!(
            "{},{},{},{}\n",
            c.m,
            c.k,
            fmt_f64(c.error_rate),
            c.trials
        ));
    }
    s
}

pub fn write_phase(dir: &Path, base: &str, cells: &[PhaseCell]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{base}.csv")), phase_csv(cells))?;
    let data: Vec<(usize, usize, f64)> = cells.iter().map(|c| (c.m, c.k, c.error_rate)).collect();
    fs::write(
        dir.join(format!("{base}.svg")),
        heatmap_svg("error rate", "k", "m", &data),
    )?;
    Ok(())
}

/// Least-squares fit of `log(error rate)` against `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
    /// Cells dropped because their error rate was 0 or 1.
    pub excluded: usize,
}

pub fn decay_fit(cells: &[CellResult]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.error_rate > 0.0 && c.error_rate < 1.0)
        .map(|c| (c.l as f64, c.error_rate.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::invalid(format!(
            "decay_fit: insufficient data, {} usable cells (need 3)",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        r2,
        used: pts.len(),
        excluded: cells.len() - pts.len(),
    })
}

/// Parametric bootstrap p-value for `slope < 0`: each cell's success count is
/// redrawn from `Binomial(trials, error rate)` and the fit repeated. Returns
/// the fraction of resamples whose slope is `≥ 0` (fits without enough
/// usable cells count as `≥ 0`).
pub fn bootstrap_slope_pvalue(cells: &[CellResult], resamples: usize, seed: u64) -> Result<f64> {
    if resamples == 0 {
        return Err(Error::invalid("bootstrap: resamples must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let dists: Vec<Binomial> = cells
        .iter()
        .map(|c| {
            Binomial::new(c.trials as u64, c.error_rate).map_err(|e| Error::invalid(e.to_string()))
        })
        .collect::<Result<_>>()?;
    let mut nonneg = 0usize;
    for _ in 0..resamples {
        let resampled: Vec<CellResult> = cells
            .iter()
            .zip(&dists)
            .map(|(c, d)| {
                let errors = d.sample(&mut rng) as usize;
                CellResult {
                    successes: c.trials - errors,
                    error_rate: errors as f64 / c.trials as f64,
                    ..c.clone()
                }
            })
            .collect();
        match decay_fit(&resampled) {
            Ok(f) if f.slope < 0.0 => {}
            _ => nonneg += 1,
        }
    }
    Ok(nonneg as f64 / resamples as f64)
}
