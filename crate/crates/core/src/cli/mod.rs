//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 capacity
//! exceeded, 4 numerical or domain failure.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{bounds_report, BoundParams, BoundsReport, RicInputs, DEFAULT_C_ABS};
use crate::error::{Error, Result};
use crate::experiments::{
    bootstrap_slope_pvalue, decay_fit, error_curve, phase_diagram, ric_inputs, write_curve,
    write_phase, Algorithm, ExperimentConfig, Extraction, MatrixPolicy,
};
use crate::io::{fmt_f64, read_matrix, write_matrix};
use crate::matlib::{max_abs_entry, Matrix};
use crate::model::{
    sample_gaussian_matrix, sample_source, synthesize_mmv, MmvInstance, Normalization, SourceSpec,
    SupportPolicy,
};
use crate::rip::{kr_ric, ric, RicEstimate, RicMethod, SupportSearch, DEFAULT_SUBSET_BUDGET};
use crate::rng::derive_seed;
use crate::solvers::{
    cmsbl, colasso, extract_support, msbl, osga, somp, ColassoConfig, ExtractionPolicy, InitGamma,
    MsblConfig, RecoveryResult, UpdateRule,
};

pub use config::{Config, KEYS};

const AFTER_HELP: &str = "Configuration keys may be set in the --config file (one `key = value` per line, `#` comments) \
or as trailing KEY=VALUE arguments, which win. Run `msbl keys` for the full list.";

#[derive(Debug, Parser)]
#[command(name = "msbl", version, about = "Joint sparse support recovery with M-SBL", after_help = AFTER_HELP)]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,
    /// Master seed; overrides the `seed` key.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Configuration overrides.
    #[arg(value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample A, X and Y; writes A.csv, X.csv, Y.csv, gamma.csv and instance.txt.
    Gen(Overrides),
    /// Recover the support of Y; writes recovery.csv (and loglik.csv for M-SBL).
    Recover {
        /// Measurement matrix CSV (default: <out>/A.csv).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Observation matrix CSV (default: <out>/Y.csv).
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Restricted isometry constant of A or A⊙A; writes rip.csv.
    Rip {
        /// Matrix CSV (default: a sampled m × n matrix).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Sparsity order (default: K, else 2).
        #[arg(long)]
        order: Option<usize>,
        /// exhaustive | randomized.
        #[arg(long, default_value = "exhaustive")]
        method: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Error-exponent and sufficient-L certificates; writes bounds.csv.
    Bounds {
        /// Matrix CSV (default: a sampled m × n matrix).
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Error rate versus L; writes simulate.csv, simulate.svg and simulate_bounds.csv.
    Simulate(Overrides),
    /// Error rate over an m × k grid; writes phase.csv and phase.svg.
    Phase(Overrides),
    /// List configuration keys.
    Keys,
}

impl Command {
    fn overrides(&self) -> &[String] {
        match self {
            Command::Gen(o) | Command::Simulate(o) | Command::Phase(o) => &o.set,
            Command::Recover { overrides, .. }
            | Command::Rip { overrides, .. }
            | Command::Bounds { overrides, .. } => &overrides.set,
            Command::Keys => &[],
        }
    }
}

/// Parse `argv`, run, report errors on stderr and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_overrides(cli.command.overrides())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.get_or("seed", 0u64)?,
    };
    match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| dispatch(cli, &cfg, seed)),
        None => dispatch(cli, &cfg, seed),
    }
}

fn dispatch(cli: &Cli, cfg: &Config, seed: u64) -> Result<()> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::Keys => {
            for (k, d) in KEYS {
                println!("{k:<18} {d}");
            }
            Ok(())
        }
        Command::Gen(_) => cmd_gen(cfg, seed, out),
        Command::Recover { matrix, data, .. } => {
            let a = read_matrix(&matrix.clone().unwrap_or_else(|| out.join("A.csv")))?;
            let y = read_matrix(&data.clone().unwrap_or_else(|| out.join("Y.csv")))?;
            let rec = recover(cfg, &y, &a)?;
            fs::create_dir_all(out)?;
            fs::write(out.join("recovery.csv"), &rec.csv)?;
            if let Some(trace) = &rec.loglik_csv {
                fs::write(out.join("loglik.csv"), trace)?;
            }
            println!("recover: support={} iters={}", rec.support, rec.iters);
            Ok(())
        }
        Command::Rip {
            matrix,
            order,
            method,
            ..
        } => {
            let a = matrix_or_sample(cfg, matrix.as_deref(), seed)?;
            let est = rip(cfg, &a, *order, method, seed)?;
            fs::create_dir_all(out)?;
            fs::write(
                out.join("rip.csv"),
                format!("{}\n{}\n", RicEstimate::CSV_HEADER, est.csv_row()),
            )?;
            println!("{}", est.csv_row());
            Ok(())
        }
        Command::Bounds { matrix, .. } => {
            let a = matrix_or_sample(cfg, matrix.as_deref(), seed)?;
            let report = bounds(cfg, &a, seed)?;
            fs::create_dir_all(out)?;
            fs::write(
                out.join("bounds.csv"),
                format!("{}\n{}\n", BoundsReport::CSV_HEADER, report.csv_row()),
            )?;
            println!(
                "bounds: eta={} L_sufficient_thm3={} L_sufficient_c2={} L_sufficient_ripA={}",
                fmt_f64(report.eta),
                crate::bounds::fmt_bound(report.l_sufficient_thm3),
                crate::bounds::fmt_bound(report.l_sufficient_c2),
                crate::bounds::fmt_bound(report.l_sufficient_ripa)
            );
            Ok(())
        }
        Command::Simulate(_) => cmd_simulate(cfg, seed, out),
        Command::Phase(_) => cmd_phase(cfg, seed, out),
    }
}

fn normalization(cfg: &Config) -> Result<Normalization> {
    cfg.get_or("normalization", Normalization::UnitColumns)
        .map_err(|_| {
            Error::Config(format!(
                "key `normalization`: unrecognized value `{}`",
                cfg.raw("normalization").unwrap_or("")
            ))
        })
}

fn matrix_or_sample(cfg: &Config, path: Option<&Path>, seed: u64) -> Result<Matrix> {
    match path {
        Some(p) => read_matrix(p),
        None => sample_gaussian_matrix(
            cfg.get_or("m", 8)?,
            cfg.get_or("n", 20)?,
            normalization(cfg)?,
            derive_seed(seed, &[0]),
        ),
    }
}

/// The instance `gen` writes for `(cfg, seed)`.
pub fn instance_from_config(cfg: &Config, seed: u64) -> Result<MmvInstance> {
    let m: usize = cfg.get_or("m", 8)?;
    let n: usize = cfg.get_or("n", 20)?;
    let k: usize = cfg.get_or("K", 3)?;
    let k_true: usize = cfg.get_or("k_true", k)?;
    let l: usize = cfg.get_or("L", 20)?;
    let sigma2: f64 = cfg.get_or("sigma2", 0.1)?;
    let gmin: f64 = cfg.get_or("gamma_min", 1.0)?;
    let gmax: f64 = cfg.get_or("gamma_max", gmin.max(1.0))?;
    let policy = cfg.choice(
        "support_policy",
        SupportPolicy::UniformRandom,
        |v| match v {
            "fixed" => Some(SupportPolicy::Fixed),
            "uniform_random" => Some(SupportPolicy::UniformRandom),
            _ => None,
        },
    )?;
    let a = sample_gaussian_matrix(m, n, normalization(cfg)?, derive_seed(seed, &[0]))?;
    let template = SourceSpec::with_leading_support(n, k, k_true, gmin, gmax)
        .map_err(|e| Error::Config(e.to_string()))?;
    let source = if k_true == 0 {
        template
    } else {
        sample_source(&template, policy, derive_seed(seed, &[1]))?
    };
    synthesize_mmv(&source, &a, l, sigma2, derive_seed(seed, &[2]))
}

fn cmd_gen(cfg: &Config, seed: u64, out: &Path) -> Result<()> {
    let inst = instance_from_config(cfg, seed)?;
    fs::create_dir_all(out)?;
    write_matrix(&out.join("A.csv"), &inst.a)?;
    write_matrix(&out.join("X.csv"), &inst.x)?;
    write_matrix(&out.join("Y.csv"), &inst.y)?;
    let g = &inst.source.gamma_star;
    write_matrix(
        &out.join("gamma.csv"),
        &Matrix::from_column_slice(g.len(), 1, g.as_slice()),
    )?;
    let support = join_support(&inst.source.support);
    fs::write(
        out.join("instance.txt"),
        format!(
            "m = {}\nn = {}\nL = {}\nsigma2 = {}\nseed = {}\nsupport = {}\n",
            inst.a.nrows(),
            inst.a.ncols(),
            inst.l(),
            fmt_f64(inst.sigma2),
            seed,
            support
        ),
    )?;
    println!(
        "gen: m={} n={} L={} support={}",
        inst.a.nrows(),
        inst.a.ncols(),
        inst.l(),
        support
    );
    Ok(())
}

fn join_support(s: &[usize]) -> String {
    s.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn msbl_config(cfg: &Config) -> Result<MsblConfig> {
    let d = MsblConfig::default();
    let mc = MsblConfig {
        max_iters: cfg.get_or("max_iters", d.max_iters)?,
        tol: cfg.get_or("tol", d.tol)?,
        prune_floor: cfg.get_or("prune_floor", d.prune_floor)?,
        sigma2_eff_floor: cfg.get_or("sigma2_eff_floor", d.sigma2_eff_floor)?,
        update_rule: cfg.choice("update_rule", d.update_rule, |v| match v {
            "em" => Some(UpdateRule::Em),
            "fixed_point" => Some(UpdateRule::FixedPoint),
            _ => None,
        })?,
        init_gamma: cfg.choice("init_gamma", d.init_gamma, |v| match v {
            "ones" => Some(InitGamma::Ones),
            "matched_filter" => Some(InitGamma::MatchedFilter),
            _ => None,
        })?,
        extraction: d.extraction,
    };
    mc.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(mc)
}

fn colasso_config(cfg: &Config) -> Result<ColassoConfig> {
    let d = ColassoConfig::default();
    Ok(ColassoConfig {
        lambda: cfg.get_or("lambda", d.lambda)?,
        max_iters: cfg.get_or("colasso_max_iters", d.max_iters)?,
        ..d
    })
}

fn algorithm(cfg: &Config) -> Result<Algorithm> {
    cfg.choice("algorithm", Algorithm::Msbl, |v| match v {
        "msbl" => Some(Algorithm::Msbl),
        "cmsbl" => Some(Algorithm::Cmsbl),
        "somp" => Some(Algorithm::Somp),
        "colasso" => Some(Algorithm::Colasso),
        "osga" => Some(Algorithm::Osga),
        _ => None,
    })
}

fn extraction(cfg: &Config, default: Extraction) -> Result<Extraction> {
    let threshold = cfg.get_or("threshold", crate::solvers::DEFAULT_THRESHOLD)?;
    cfg.choice("extraction", default, |v| match v {
        "topk" => Some(Extraction::TopK),
        "threshold" => Some(Extraction::Threshold(threshold)),
        _ => None,
    })
}

/// Text outputs of `recover`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    pub csv: String,
    pub loglik_csv: Option<String>,
    pub support: String,
    pub iters: usize,
}

fn recovery_text(r: &RecoveryResult) -> Recovered {
    let mut trace = String::from("iteration,loglik\n");
    for (t, v) in r.loglik_trace.iter().enumerate() {
        trace.push_str(&format!("{t},{}\n", fmt_f64(*v)));
    }
    Recovered {
        csv: format!(
            "{}\n{}\n",
            RecoveryResult::csv_header(r.gamma_hat.len()),
            r.csv_row()
        ),
        loglik_csv: Some(trace),
        support: join_support(&r.support_hat),
        iters: r.iters,
    }
}

/// Run the configured solver on `(Y, A)`.
pub fn recover(cfg: &Config, y: &Matrix, a: &Matrix) -> Result<Recovered> {
    let sigma2: f64 = cfg.get_or("sigma2", 0.1)?;
    let k: usize = cfg.get_or("K", 3)?;
    let k_true: usize = cfg.get_or("k_true", k)?;
    let policy = match extraction(
        cfg,
        Extraction::Threshold(crate::solvers::DEFAULT_THRESHOLD),
    )? {
        Extraction::TopK => ExtractionPolicy::TopK(k_true),
        Extraction::Threshold(t) => ExtractionPolicy::Threshold(t),
    };
    let support_only = |s: Vec<usize>| {
        let support = join_support(&s);
        Recovered {
            csv: format!("support\n{support}\n"),
            loglik_csv: None,
            support,
            iters: 0,
        }
    };
    match algorithm(cfg)? {
        Algorithm::Msbl => {
            let mc = MsblConfig {
                extraction: policy,
                ..msbl_config(cfg)?
            };
            Ok(recovery_text(&msbl(y, a, sigma2, &mc)?))
        }
        Algorithm::Cmsbl => {
            let mc = MsblConfig {
                extraction: policy,
                ..msbl_config(cfg)?
            };
            let gmin: f64 = cfg.get_or("gamma_min", 1.0)?;
            let gmax: f64 = cfg.get_or("gamma_max", gmin.max(1.0))?;
            Ok(recovery_text(&cmsbl(y, a, sigma2, k, gmin, gmax, &mc)?))
        }
        Algorithm::Somp => Ok(support_only(somp(y, a, k_true)?.support)),
        Algorithm::Osga => Ok(support_only(osga(y, a, k_true)?)),
        Algorithm::Colasso => {
            let r = colasso(y, a, sigma2, &colasso_config(cfg)?)?;
            let support = extract_support(&r.gamma, policy)?.support;
            let rr = RecoveryResult {
                gamma_hat: r.gamma,
                support_hat: support,
                loglik_trace: Vec::new(),
                iters: r.iters,
                converged: r.converged,
            };
            Ok(Recovered {
                loglik_csv: None,
                ..recovery_text(&rr)
            })
        }
    }
}

/// RIC estimate for `rip`.
pub fn rip(
    cfg: &Config,
    a: &Matrix,
    order: Option<usize>,
    method: &str,
    seed: u64,
) -> Result<RicEstimate> {
    let method: RicMethod = method
        .parse()
        .map_err(|_| Error::Config(format!("--method: unrecognized value `{method}`")))?;
    let order = match order {
        Some(o) => o,
        None => cfg.get_or("K", 2)?,
    };
    let search = match method {
        RicMethod::Exhaustive => SupportSearch::Exhaustive {
            budget: cfg.get_or("budget", DEFAULT_SUBSET_BUDGET)?,
        },
        RicMethod::Randomized => SupportSearch::Randomized {
            trials: cfg.get_or("rip_trials", 1000)?,
            seed: derive_seed(seed, &[1]),
        },
    };
    match cfg.raw("target").unwrap_or("A") {
        "A" => ric(a, order, search),
        "kr" => kr_ric(a, order, search),
        v => Err(Error::Config(format!(
            "key `target`: unrecognized value `{v}`"
        ))),
    }
}

/// Certificates for `bounds`; any of the RIC keys overrides the computed value.
pub fn bounds(cfg: &Config, a: &Matrix, seed: u64) -> Result<BoundsReport> {
    let k: usize = cfg.get_or("K", 3)?;
    let gmin: f64 = cfg.get_or("gamma_min", 1.0)?;
    let params = BoundParams {
        n: a.ncols(),
        k,
        a_star: max_abs_entry(a),
        sigma2: cfg.get_or("sigma2", 0.1)?,
        gamma_min: gmin,
        gamma_max: cfg.get_or("gamma_max", gmin.max(1.0))?,
        delta: cfg.get_or("delta", 0.05)?,
    };
    let given = [
        cfg.get::<f64>("ric_kr_2K")?,
        cfg.get::<f64>("ric_A_2K")?,
        cfg.get::<f64>("ric_A_K")?,
        cfg.get::<f64>("sup_term")?,
    ];
    let computed = if given.iter().all(Option::is_some) {
        None
    } else {
        Some(ric_inputs(a, k, derive_seed(seed, &[1]))?.0)
    };
    let pick = |g: Option<f64>, f: fn(&RicInputs) -> f64| {
        g.unwrap_or_else(|| f(computed.as_ref().expect("computed when a value is missing")))
    };
    let inputs = RicInputs {
        kr_2k: pick(given[0], |r| r.kr_2k),
        a_2k: pick(given[1], |r| r.a_2k),
        a_k: pick(given[2], |r| r.a_k),
        sup_term: pick(given[3], |r| r.sup_term),
    };
    bounds_report(&params, inputs, cfg.get_or("C_abs", DEFAULT_C_ABS)?)
}

/// Experiment configuration from keys, with `master_seed = seed`.
pub fn experiment_config(cfg: &Config, seed: u64) -> Result<ExperimentConfig> {
    let d = ExperimentConfig::default();
    let k_max: usize = cfg.get_or("K", d.k_max)?;
    let gmin: f64 = cfg.get_or("gamma_min", d.gamma_min)?;
    let e = ExperimentConfig {
        m: cfg.get_or("m", d.m)?,
        n: cfg.get_or("n", d.n)?,
        k_max,
        k_true: cfg.get_or("k_true", k_max)?,
        l_grid: cfg.list("L_grid")?.unwrap_or(d.l_grid),
        sigma2: cfg.get_or("sigma2", d.sigma2)?,
        gamma_min: gmin,
        gamma_max: cfg.get_or("gamma_max", gmin.max(d.gamma_max))?,
        trials: cfg.get_or("trials", d.trials)?,
        matrix_policy: cfg.choice("matrix_policy", d.matrix_policy, |v| match v {
            "fresh_per_trial" => Some(MatrixPolicy::FreshPerTrial),
            "fixed" => Some(MatrixPolicy::Fixed),
            _ => None,
        })?,
        normalization: normalization(cfg)?,
        support_policy: cfg.choice("support_policy", d.support_policy, |v| match v {
            "fixed" => Some(SupportPolicy::Fixed),
            "uniform_random" => Some(SupportPolicy::UniformRandom),
            _ => None,
        })?,
        algorithm: algorithm(cfg)?,
        extraction: extraction(cfg, d.extraction)?,
        msbl: msbl_config(cfg)?,
        colasso: colasso_config(cfg)?,
        master_seed: seed,
        delta: cfg.get_or("delta", d.delta)?,
        c_abs: cfg.get_or("C_abs", d.c_abs)?,
        timing: cfg.get_or("timing", d.timing)?,
    };
    e.validate()?;
    Ok(e)
}

fn cmd_simulate(cfg: &Config, seed: u64, out: &Path) -> Result<()> {
    let e = experiment_config(cfg, seed)?;
    let cells = error_curve(&e)?;
    for c in &cells {
        println!(
            "L={} successes={} trials={} numerical_failures={} error_rate={:.4} mean_iters={:.1}",
            c.l, c.successes, c.trials, c.numerical_failures, c.error_rate, c.mean_iters
        );
    }
    write_curve(out, "simulate", &e, &cells)?;
    match decay_fit(&cells) {
        Ok(f) => {
            let p = bootstrap_slope_pvalue(&cells, 1000, derive_seed(seed, &[u64::MAX - 2]))?;
            println!(
                "decay fit: slope={:.6} r2={:.4} used={} excluded={} bootstrap_p={:.4}",
                f.slope, f.r2, f.used, f.excluded, p
            );
        }
        Err(e) => println!("decay fit: {e}"),
    }
    Ok(())
}

fn cmd_phase(cfg: &Config, seed: u64, out: &Path) -> Result<()> {
    let mut base = experiment_config(cfg, seed)?;
    base.l_grid = vec![cfg.get_or("L", 20)?];
    let m_grid: Vec<usize> = cfg.list("m_grid")?.unwrap_or_else(|| vec![4, 6, 8]);
    let k_grid: Vec<usize> = cfg.list("k_grid")?.unwrap_or_else(|| vec![1, 2, 3, 4]);
    let cells = phase_diagram(&base, &m_grid, &k_grid)?;
    for c in &cells {
        println!(
            "m={} k={} error_rate={:.4} trials={}",
            c.m, c.k, c.error_rate, c.trials
        );
    }
    write_phase(out, "phase", &cells)
}
