use std::fs;
use std::path::Path;

use serde::Serialize;

use quizsim::protocol::{build_table, LookupTable};
use quizsim::study::{
    mean_delta_f, measure_csv, measure_study, noise_csv, noise_study, summarize_table, sweep,
    sweep_csv,
};

use crate::config::{Command, RunConfig};
use crate::error::CliError;

/// Reference values for the default chain (four sites, unit coupling, five
/// field levels on [−0.5, 0.5]).
pub mod reference {
    pub const MEAN_DELTA_F: f64 = 0.45;
    pub const MEAN_DELTA_F_TOL: f64 = 0.05;
    /// `(ε, mean |χ error|)`
    pub const NOISE_CHI_ERROR: [(f64, f64); 2] = [(0.05, 0.06), (0.1, 0.08)];
    pub const NOISE_CHI_ERROR_TOL: f64 = 0.03;
    pub const ZERO_NOISE_TOL: f64 = 1e-12;
    pub const BINOMIAL_REL_TOL: f64 = 0.05;
    /// Below this the binomial prediction is rounding noise and is compared
    /// in absolute terms.
    pub const BINOMIAL_FLOOR: f64 = 1e-6;
    pub const MEAN_SE_BOUND: f64 = 3.0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub checks: Vec<CheckResult>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    #[serde(flatten)]
    config: &'a RunConfig,
    output: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_distribution: Option<&'static str>,
}

/// Runs `cfg.command` on a pool of `cfg.threads` workers and writes the CSV
/// and a `.meta.json` sidecar into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let (csv, outcome) = pool.install(|| compute(cfg))?;

    fs::create_dir_all(&cfg.out).map_err(|e| io_error(&cfg.out, e))?;
    let name = cfg.command.output_name();
    let path = cfg.out.join(name);
    fs::write(&path, csv).map_err(|e| io_error(&path, e))?;

    let meta = Metadata {
        config: cfg,
        output: name,
        noise_distribution: (cfg.command == Command::Noise).then_some("uniform(-epsilon, epsilon)"),
    };
    let meta_path = path.with_extension("meta.json");
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&meta_path, json + "\n").map_err(|e| io_error(&meta_path, e))?;
    Ok(outcome)
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn is_default_chain(cfg: &RunConfig) -> bool {
    cfg.n == 4 && cfg.j == 1.0 && cfg.bmin == -0.5 && cfg.bmax == 0.5 && cfg.d == 5
}

/// CSV text plus summary and checks; pure apart from the thread pool in use.
pub fn compute(cfg: &RunConfig) -> Result<(String, Outcome), CliError> {
    let table = build_table(&cfg.grid()?, &cfg.candidate()?, cfg.j)?;
    match cfg.command {
        Command::Table => Ok(table_command(cfg, &table)),
        Command::Sweep => sweep_command(cfg, &table),
        Command::Noise => noise_command(cfg, &table),
        Command::Measure => measure_command(cfg, &table),
    }
}

fn table_command(cfg: &RunConfig, table: &LookupTable) -> (String, Outcome) {
    let s = summarize_table(table);
    let mut out = Outcome::default();
    out.summary.push(format!("entries: {}", s.entries));
    out.summary.push(format!(
        "chi_opt min / median / max: {:.6} / {:.6} / {:.6}",
        s.chi_min, s.chi_median, s.chi_max
    ));

    let expected = (cfg.d as u64).pow(cfg.n as u32) as usize;
    out.checks.push(CheckResult::new(
        "table size",
        s.entries == expected,
        format!("{} entries, expected {expected}", s.entries),
    ));
    let own = table.by_target()[0];
    let n = cfg.n as f64;
    out.checks.push(CheckResult::new(
        "candidate's own chain",
        (own.f - n).abs() < 1e-9 && own.chi_opt.abs() < 1e-9,
        format!("F = {:.12}, chi_opt = {:.3e}", own.f, own.chi_opt),
    ));
    (table.to_csv_string(), out)
}

fn sweep_command(cfg: &RunConfig, table: &LookupTable) -> Result<(String, Outcome), CliError> {
    let rows = sweep(table)?;
    let mean = mean_delta_f(&rows);
    let best = rows
        .iter()
        .max_by(|a, b| {
            a.delta_f
                .total_cmp(&b.delta_f)
                .then(b.target_id.cmp(&a.target_id))
        })
        .expect("table is never empty");
    let worst = rows.iter().map(|r| r.delta_f).fold(f64::INFINITY, f64::min);

    let chi = summarize_table(table);
    let mut out = Outcome::default();
    out.summary.push(format!("targets: {}", rows.len()));
    out.summary.push(format!("mean delta_F: {mean:.6}"));
    out.summary.push(format!(
        "chi_opt median / max: {:.6} / {:.6}",
        chi.chi_median, chi.chi_max
    ));
    out.summary.push(format!(
        "largest gain: target {} with F = {:.6}, delta_F = {:.6}",
        best.target_id, best.f, best.delta_f
    ));

    if is_default_chain(cfg) {
        use reference::*;
        out.summary.push(format!(
            "reference mean delta_F: {MEAN_DELTA_F} +/- {MEAN_DELTA_F_TOL}"
        ));
        out.checks.push(CheckResult::new(
            "mean delta_F",
            (mean - MEAN_DELTA_F).abs() <= MEAN_DELTA_F_TOL,
            format!("{mean:.6} vs {MEAN_DELTA_F} +/- {MEAN_DELTA_F_TOL}"),
        ));
    }
    out.checks.push(CheckResult::new(
        "gain never negative",
        worst >= -1e-9,
        format!("min delta_F = {worst:.3e}"),
    ));
    let n = cfg.n as f64;
    out.checks.push(CheckResult::new(
        "largest gain reaches full similarity",
        (best.f + best.delta_f - n).abs() <= 1e-6,
        format!("F + delta_F = {:.9}", best.f + best.delta_f),
    ));
    Ok((sweep_csv(&rows), out))
}

fn noise_command(cfg: &RunConfig, table: &LookupTable) -> Result<(String, Outcome), CliError> {
    use reference::*;
    let rows = noise_study(table, &cfg.eps, cfg.trials, cfg.seed)?;
    let mut out = Outcome::default();
    out.summary.push(format!(
        "noise: uniform on (-eps, eps), {} trials per target",
        cfg.trials
    ));
    for r in &rows {
        out.summary.push(format!(
            "eps = {}: mean |chi error| = {:.6}, mean delta_F = {:.6}",
            r.epsilon, r.mean_abs_chi_error, r.mean_delta_f
        ));
    }

    for r in rows.iter().filter(|r| r.epsilon == 0.0) {
        out.checks.push(CheckResult::new(
            "noiseless lookup is exact",
            r.mean_abs_chi_error <= ZERO_NOISE_TOL,
            format!("mean |chi error| = {:.3e}", r.mean_abs_chi_error),
        ));
    }
    if is_default_chain(cfg) {
        for (eps, expected) in NOISE_CHI_ERROR {
            if let Some(r) = rows.iter().find(|r| (r.epsilon - eps).abs() < 1e-12) {
                out.summary
                    .push(format!("reference at eps = {eps}: {expected}"));
                out.checks.push(CheckResult::new(
                    format!("chi error at eps = {eps}"),
                    (r.mean_abs_chi_error - expected).abs() <= NOISE_CHI_ERROR_TOL,
                    format!(
                        "{:.6} vs {expected} +/- {NOISE_CHI_ERROR_TOL}",
                        r.mean_abs_chi_error
                    ),
                ));
            }
        }
    }
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let monotone = sorted
        .windows(2)
        .all(|w| w[1].mean_abs_chi_error >= w[0].mean_abs_chi_error);
    out.checks.push(CheckResult::new(
        "chi error non-decreasing in eps",
        monotone,
        format!("{} noise levels", sorted.len()),
    ));
    Ok((noise_csv(&rows), out))
}

fn measure_command(cfg: &RunConfig, table: &LookupTable) -> Result<(String, Outcome), CliError> {
    use reference::*;
    let rows = measure_study(table, cfg.trials, cfg.seed)?;
    let bound = (cfg.n as f64).sqrt();
    let max_std = rows.iter().map(|r| r.f_est_std).fold(0.0, f64::max);
    let std_misses: Vec<_> = rows
        .iter()
        .filter(|r| {
            if r.binomial_std < BINOMIAL_FLOOR {
                r.f_est_std > BINOMIAL_FLOOR
            } else {
                (r.f_est_std - r.binomial_std).abs() > BINOMIAL_REL_TOL * r.binomial_std
            }
        })
        .collect();
    let mean_misses: Vec<_> = rows
        .iter()
        .filter(|r| (r.f_est_mean - r.f_exact).abs() > MEAN_SE_BOUND * r.standard_error() + 1e-12)
        .collect();

    let mut out = Outcome::default();
    out.summary.push(format!(
        "targets: {}, {} shots each, max std = {max_std:.6} (bound sqrt(N) = {bound:.6})",
        rows.len(),
        cfg.trials
    ));
    out.checks.push(CheckResult::new(
        "std never exceeds sqrt(N)",
        max_std <= bound,
        format!("max std = {max_std:.6}"),
    ));
    let describe = |ids: Vec<String>| {
        if ids.is_empty() {
            "all targets".to_string()
        } else {
            format!("{} outside: targets {}", ids.len(), ids.join(", "))
        }
    };
    out.checks.push(CheckResult::new(
        "std matches binomial prediction within 5%",
        std_misses.is_empty(),
        describe(
            std_misses
                .iter()
                .map(|r| {
                    format!(
                        "{} ({:.4} vs {:.4})",
                        r.target_id, r.f_est_std, r.binomial_std
                    )
                })
                .collect(),
        ),
    ));
    out.checks.push(CheckResult::new(
        "mean within 3 standard errors of exact F",
        mean_misses.is_empty(),
        describe(
            mean_misses
                .iter()
                .map(|r| {
                    let z = (r.f_est_mean - r.f_exact) / r.standard_error();
                    format!("{} (z = {z:.2})", r.target_id)
                })
                .collect(),
        ),
    ));
    Ok((measure_csv(&rows), out))
}
