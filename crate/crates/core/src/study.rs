//! Whole-grid studies: protocol sweep, noisy lookups and measurement
//! statistics. Every study is parallel over targets and assembles results in
//! target-id order, so output is independent of the thread count.

use rayon::prelude::*;

use crate::chain::{ground_state, ChainSpec, TargetId};
use crate::error::Result;
use crate::hilbert::StateVector;
use crate::oracle::{make_oracle, Oracle, OracleKind, SimilarityOracle};
use crate::protocol::{
    delta_f_planar, fmt_float, lookup_chi, run_protocol, LookupTable, ProtocolConfig,
};
use crate::similarity::similarity_chain;

const NOISE_STREAM: u64 = 0x6e6f_6973_6500_0000;
const MEASURE_STREAM: u64 = 0x6d65_6173_7572_6500;

/// Per-target seed from a base seed, a stream tag and an index (SplitMix64
/// finalizer over the combined words).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn target_spec(table: &LookupTable, id: TargetId) -> Result<ChainSpec> {
    let n = table.n_sites();
    ChainSpec::new(id.fields(table.grid(), n), table.coupling())
}

fn write_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ASCII")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableSummary {
    pub entries: usize,
    pub chi_min: f64,
    pub chi_median: f64,
    pub chi_max: f64,
}

pub fn summarize_table(table: &LookupTable) -> TableSummary {
    let mut chis: Vec<f64> = table.entries().iter().map(|e| e.chi_opt).collect();
    chis.sort_by(f64::total_cmp);
    let n = chis.len();
    let median = if n % 2 == 1 {
        chis[n / 2]
    } else {
        0.5 * (chis[n / 2 - 1] + chis[n / 2])
    };
    TableSummary {
        entries: n,
        chi_min: chis[0],
        chi_median: median,
        chi_max: chis[n - 1],
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub target_id: TargetId,
    pub f: f64,
    pub delta_f: f64,
}

/// Runs the single-query protocol against an exact oracle for every target.
pub fn sweep(table: &LookupTable) -> Result<Vec<SweepRow>> {
    let config = ProtocolConfig::default();
    let ids: Vec<TargetId> = table.by_target().iter().map(|e| e.target_id).collect();
    ids.par_iter()
        .map(|&id| {
            let spec = target_spec(table, id)?;
            let mut oracle = make_oracle(&spec, OracleKind::Exact, 1, 0)?;
            let report = run_protocol(table.candidate(), &mut oracle, table, &config)?;
            Ok(SweepRow {
                target_id: id,
                f: report.f_before,
                delta_f: report.delta_f_actual,
            })
        })
        .collect()
}

pub fn mean_delta_f(rows: &[SweepRow]) -> f64 {
    rows.iter().map(|r| r.delta_f).sum::<f64>() / rows.len() as f64
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    write_csv(
        &["target_id", "F", "delta_F"],
        rows.iter().map(|r| {
            vec![
                r.target_id.to_string(),
                fmt_float(r.f),
                fmt_float(r.delta_f),
            ]
        }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseRow {
    pub epsilon: f64,
    pub mean_abs_chi_error: f64,
    pub mean_delta_f: f64,
}

/// For each `ε`, queries a uniformly noisy oracle `trials` times per target,
/// looks up `χ` from the noisy reply, and averages `|χ − χ_opt|` and the gain
/// that rotation achieves.
pub fn noise_study(
    table: &LookupTable,
    epsilons: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<NoiseRow>> {
    let candidate = ground_state(table.candidate())?.state;
    let entries = table.by_target();
    epsilons
        .iter()
        .enumerate()
        .map(|(e_idx, &eps)| {
            let per_target = entries
                .par_iter()
                .map(|entry| {
                    let spec = target_spec(table, entry.target_id)?;
                    let kind = OracleKind::UniformNoise { epsilon: eps };
                    let s = derive_seed(seed, NOISE_STREAM + e_idx as u64, entry.target_id.0);
                    let mut oracle = make_oracle(&spec, kind, trials, s)?;
                    let mut err = 0.0;
                    let mut gain = 0.0;
                    for _ in 0..trials {
                        let f_noisy = oracle.query(&candidate)?;
                        let chi = lookup_chi(table, f_noisy);
                        err += (chi - entry.chi_opt).abs();
                        gain += delta_f_planar(&entry.thetas, chi);
                    }
                    Ok((err, gain))
                })
                .collect::<Result<Vec<_>>>()?;
            let count = (per_target.len() * trials) as f64;
            let (err, gain) = per_target
                .iter()
                .fold((0.0, 0.0), |(a, b), (e, g)| (a + e, b + g));
            Ok(NoiseRow {
                epsilon: eps,
                mean_abs_chi_error: err / count,
                mean_delta_f: gain / count,
            })
        })
        .collect()
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    write_csv(
        &["epsilon", "mean_abs_chi_error", "mean_delta_f"],
        rows.iter().map(|r| {
            vec![
                fmt_float(r.epsilon),
                fmt_float(r.mean_abs_chi_error),
                fmt_float(r.mean_delta_f),
            ]
        }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureRow {
    pub target_id: TargetId,
    pub f_exact: f64,
    pub f_est_mean: f64,
    /// Population standard deviation over the trials.
    pub f_est_std: f64,
    /// `2 √(Σ_k p_k (1 − p_k))` with `p_k = (1 + cos θ_k) / 2`.
    pub binomial_std: f64,
    pub trials: usize,
}

impl MeasureRow {
    /// `std / √trials`
    pub fn standard_error(&self) -> f64 {
        self.f_est_std / (self.trials as f64).sqrt()
    }
}

/// Measured-oracle statistics for one target and a fixed candidate state.
pub fn measure_target(
    target: &StateVector,
    candidate: &StateVector,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64, f64, f64)> {
    let (f_exact, profile) = similarity_chain(target, candidate)?;
    let var: f64 = profile
        .cosines()
        .iter()
        .map(|c| {
            let p = ((1.0 + c) / 2.0).clamp(0.0, 1.0);
            p * (1.0 - p)
        })
        .sum();
    let mut oracle = Oracle::from_state(target, OracleKind::Measurement, trials, seed)?;
    // F_est is an integer, so the moments are exact in integer arithmetic.
    let (mut sum, mut sum_sq) = (0i128, 0i128);
    for _ in 0..trials {
        let (f, _) = oracle.query_measured(candidate)?;
        let f = f as i128;
        sum += f;
        sum_sq += f * f;
    }
    let t = trials as i128;
    let mean = sum as f64 / trials as f64;
    let var_emp = (t * sum_sq - sum * sum) as f64 / (t * t) as f64;
    Ok((f_exact, mean, var_emp.max(0.0).sqrt(), 2.0 * var.sqrt()))
}

pub fn measure_study(table: &LookupTable, trials: usize, seed: u64) -> Result<Vec<MeasureRow>> {
    if trials == 0 {
        return Err(crate::error::validation("trials must be at least 1"));
    }
    let candidate = ground_state(table.candidate())?.state;
    let ids: Vec<TargetId> = table.by_target().iter().map(|e| e.target_id).collect();
    ids.par_iter()
        .map(|&id| {
            let target = ground_state(&target_spec(table, id)?)?.state;
            let s = derive_seed(seed, MEASURE_STREAM, id.0);
            let (f_exact, mean, std, binomial) = measure_target(&target, &candidate, trials, s)?;
            Ok(MeasureRow {
                target_id: id,
                f_exact,
                f_est_mean: mean,
                f_est_std: std,
                binomial_std: binomial,
                trials,
            })
        })
        .collect()
}

pub fn measure_csv(rows: &[MeasureRow]) -> String {
    write_csv(
        &[
            "target_id",
            "F_exact",
            "F_est_mean",
            "F_est_std",
            "binomial_std",
        ],
        rows.iter().map(|r| {
            vec![
                r.target_id.to_string(),
                fmt_float(r.f_exact),
                fmt_float(r.f_est_mean),
                fmt_float(r.f_est_std),
                fmt_float(r.binomial_std),
            ]
        }),
    )
}
