use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chi_opt, delta_f_planar};
use crate::chain::{enumerate_targets, ground_state, ChainSpec, ParameterGrid, TargetId};
use crate::error::{validation, QuizError, Result};
use crate::similarity::{similarity_from_densities, site_densities};

pub const TABLE_CSV_HEADER: [&str; 5] = ["target_id", "F", "chi_opt", "delta_F", "sum_sin"];

/// Slack on the `(−π/2, π/2]` check when reading serialized angles.
const CHI_PARSE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub target_id: TargetId,
    pub f: f64,
    pub chi_opt: f64,
    pub delta_f: f64,
    pub sum_sin: f64,
    /// Signed per-site angles, kept for analysis; not serialized to CSV.
    pub thetas: Vec<f64>,
    /// Target or candidate ground state was degenerate.
    pub degenerate: bool,
}

/// One serialized table row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub target_id: TargetId,
    pub f: f64,
    pub chi_opt: f64,
    pub delta_f: f64,
    pub sum_sin: f64,
}

impl From<&TableEntry> for TableRow {
    fn from(e: &TableEntry) -> Self {
        TableRow {
            target_id: e.target_id,
            f: e.f,
            chi_opt: e.chi_opt,
            delta_f: e.delta_f,
            sum_sin: e.sum_sin,
        }
    }
}

/// Optimal rotation for every target on a grid, sorted by similarity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    entries: Vec<TableEntry>,
    grid: ParameterGrid,
    candidate: ChainSpec,
    coupling: f64,
}

fn by_f_then_id(a_f: f64, a_id: TargetId, b_f: f64, b_id: TargetId) -> Ordering {
    a_f.total_cmp(&b_f).then(a_id.cmp(&b_id))
}

impl LookupTable {
    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn candidate(&self) -> &ChainSpec {
        &self.candidate
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn n_sites(&self) -> usize {
        self.candidate.n_sites()
    }

    pub fn entry(&self, id: TargetId) -> Option<&TableEntry> {
        self.entries.iter().find(|e| e.target_id == id)
    }

    /// Entries in target-id order.
    pub fn by_target(&self) -> Vec<&TableEntry> {
        let mut v: Vec<&TableEntry> = self.entries.iter().collect();
        v.sort_by_key(|e| e.target_id);
        v
    }

    /// Entry whose `F` is nearest to `f_query`, smallest target id on ties.
    pub fn lookup(&self, f_query: f64) -> &TableEntry {
        let idx = nearest(
            self.entries.len(),
            |i| (self.entries[i].f, self.entries[i].target_id),
            f_query,
        );
        &self.entries[idx]
    }

    pub fn rows(&self) -> impl Iterator<Item = TableRow> + '_ {
        self.entries.iter().map(TableRow::from)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TABLE_CSV_HEADER)?;
        for row in self.rows() {
            w.write_record([
                row.target_id.to_string(),
                fmt_float(row.f),
                fmt_float(row.chi_opt),
                fmt_float(row.delta_f),
                fmt_float(row.sum_sin),
            ])?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

/// Scientific notation with 16 significant digits; `-0` prints as `0`.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.15e}")
}

/// Index minimizing `|F_i − q|` over entries sorted by `(F, id)`, breaking
/// distance ties by smallest id.
fn nearest(len: usize, key: impl Fn(usize) -> (f64, TargetId), q: f64) -> usize {
    assert!(len > 0, "lookup in an empty table");
    let q = if q.is_nan() { 0.0 } else { q };
    let split = partition_point(len, |i| key(i).0 < q);
    let mut best: Option<(f64, TargetId, usize)> = None;
    let mut consider = |i: usize| {
        let (f, id) = key(i);
        let d = (f - q).abs();
        let better = match best {
            None => true,
            Some((bd, bid, _)) => d < bd || (d == bd && id < bid),
        };
        if better {
            best = Some((d, id, i));
        }
    };
    // The nearest values sit on either side of the split; equal-F runs extend
    // away from it.
    if split < len {
        let f0 = key(split).0;
        let mut i = split;
        while i < len && key(i).0 == f0 {
            consider(i);
            i += 1;
        }
    }
    if split > 0 {
        let f0 = key(split - 1).0;
        let mut i = split;
        while i > 0 && key(i - 1).0 == f0 {
            consider(i - 1);
            i -= 1;
        }
    }
    best.expect("non-empty").2
}

fn partition_point(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `χ_opt` of the entry nearest in `F` to `f_query`.
pub fn lookup_chi(table: &LookupTable, f_query: f64) -> f64 {
    table.lookup(f_query).chi_opt
}

/// Same nearest-`F` rule over parsed rows, which must be sorted by `(F, id)`.
pub fn lookup_chi_rows(rows: &[TableRow], f_query: f64) -> Option<f64> {
    if rows.is_empty() {
        return None;
    }
    let idx = nearest(rows.len(), |i| (rows[i].f, rows[i].target_id), f_query);
    Some(rows[idx].chi_opt)
}

/// Solves every target on `grid` (coupling `j`) and records the similarity to
/// the fixed candidate ground state together with the optimal rotation.
///
/// Targets are processed in parallel; the result does not depend on the
/// thread count.
pub fn build_table(grid: &ParameterGrid, candidate: &ChainSpec, j: f64) -> Result<LookupTable> {
    let n = candidate.n_sites();
    let cand = ground_state(candidate)?;
    let cand_sites = site_densities(&cand.state)?;
    let targets: Vec<(TargetId, ChainSpec)> = enumerate_targets(grid, n, j)?.collect();

    let mut entries = targets
        .par_iter()
        .map(|(id, spec)| {
            let gs = ground_state(spec)?;
            let (f, profile) = similarity_from_densities(&site_densities(&gs.state)?, &cand_sites)?;
            let chi = chi_opt(&profile)?;
            Ok(TableEntry {
                target_id: *id,
                f,
                chi_opt: chi,
                delta_f: delta_f_planar(profile.thetas(), chi),
                sum_sin: profile.sum_sin(),
                thetas: profile.thetas().to_vec(),
                degenerate: gs.degenerate || cand.degenerate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| by_f_then_id(a.f, a.target_id, b.f, b.target_id));

    Ok(LookupTable {
        entries,
        grid: *grid,
        candidate: candidate.clone(),
        coupling: j,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> QuizError {
    QuizError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a serialized table, checking the header, numeric fields, angle
/// range, unique ids and `(F, id)` ordering.
pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if header.iter().ne(TABLE_CSV_HEADER) {
        return Err(parse_err(1, format!("unexpected header {:?}", header)));
    }

    let mut rows: Vec<TableRow> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let target_id: u64 = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad target id {:?}", &record[0])))?;
        let mut nums = [0.0f64; 4];
        for (slot, field) in nums.iter_mut().zip(record.iter().skip(1)) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad number {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value {field:?}")));
            }
            *slot = v;
        }
        let [f, chi, delta_f, sum_sin] = nums;
        if chi <= -FRAC_PI_2 - CHI_PARSE_SLACK || chi > FRAC_PI_2 + CHI_PARSE_SLACK {
            return Err(parse_err(
                line,
                format!("chi_opt {chi} outside (-pi/2, pi/2]"),
            ));
        }
        let row = TableRow {
            target_id: TargetId(target_id),
            f,
            chi_opt: chi,
            delta_f,
            sum_sin,
        };
        if !seen.insert(target_id) {
            return Err(parse_err(line, format!("duplicate target id {target_id}")));
        }
        if let Some(prev) = rows.last() {
            if by_f_then_id(prev.f, prev.target_id, row.f, row.target_id) != Ordering::Less {
                return Err(parse_err(line, "rows are not sorted by (F, target_id)"));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(validation("table has no rows"));
    }
    Ok(rows)
}
