// Copyright 2026 The hvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


//! Output-quality metrics, savings share, and run reports.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::columnar::{DataType, KeyValue, Table};
use crate::error::{Error, Result};

/// Output columns identifying a row for recall: everything except floats
/// and embeddings.
pub fn default_recall_keys(table: &Table) -> Vec<String> {
    table
        .schema()
        .fields()
        .iter()
        .filter(|f| !matches!(f.dtype, DataType::Float64 | DataType::Embedding(_)))
        .map(|f| f.name.clone())
        .collect()
}

fn key_rows(t: &Table, keys: &[String]) -> Result<Vec<Vec<KeyValue>>> {
    let cols = keys.iter().map(|k| t.column(k)).collect::<Result<Vec<_>>>()?;
    Ok((0..t.row_count())
        .map(|r| cols.iter().map(|c| KeyValue(c.value(r))).collect())
        .collect())
}

/// Multiset recall of `ann` against `enn` over `keys`. `None` when the
/// exact output is empty.
pub fn recall(ann: &Table, enn: &Table, keys: &[String]) -> Result<Option<f64>> {
    if enn.row_count() == 0 {
        return Ok(None);
    }
    let mut truth: HashMap<Vec<KeyValue>, usize> = HashMap::new();
    for k in key_rows(enn, keys)? {
        *truth.entry(k).or_default() += 1;
    }
    let mut hits = 0usize;
    for k in key_rows(ann, keys)? {
        if let Some(n) = truth.get_mut(&k) {
            if *n > 0 {
                *n -= 1;
                hits += 1;
            }
        }
    }
    Ok(Some(hits as f64 / enn.row_count() as f64))
}

/// `None` when `rev_enn` is zero or either input is not finite.
pub fn rel_err(rev_ann: f64, rev_enn: f64) -> Option<f64> {
    if rev_enn == 0.0 || !rev_enn.is_finite() || !rev_ann.is_finite() {
        return None;
    }
    Some((rev_ann - rev_enn).abs() / rev_enn.abs())
}

/// Fraction of the total host-to-device saving that comes from relational
/// operators. `None` when the totals are equal.
pub fn share_rel(rel_cpu: f64, rel_gpu: f64, total_cpu: f64, total_gpu: f64) -> Option<f64> {
    let denom = total_cpu - total_gpu;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    Some((rel_cpu - rel_gpu) / denom)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QualityReport {
    pub query: String,
    pub recall: Option<f64>,
    pub rel_err: Option<f64>,
    /// Rows missing after post-filtering, summed over query vectors.
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub query: String,
    pub strategy: String,
    pub profile: String,
    pub vs_mode: String,
    pub seed: u64,
    pub relational_ops: f64,
    pub vector_search: f64,
    pub data_movement: f64,
    pub index_movement: f64,
    pub residual: f64,
    pub total: f64,
    pub copy_calls: u64,
    pub index_copy_calls: u64,
    pub fallback: Option<String>,
}

impl RunReport {
    pub fn component_sum(&self) -> f64 {
        self.relational_ops + self.vector_search + self.data_movement + self.index_movement + self.residual
    }

    pub fn movement(&self) -> f64 {
        self.data_movement + self.index_movement
    }

    pub fn index_share(&self) -> f64 {
        if self.total > 0.0 {
            self.index_movement / self.total
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    pub run: RunReport,
    pub quality: Option<QualityReport>,
}

pub const RECORD_COLUMNS: [&str; 17] = [
    "query",
    "strategy",
    "profile",
    "vs_mode",
    "seed",
    "relational_ops_s",
    "vector_search_s",
    "data_movement_s",
    "index_movement_s",
    "residual_s",
    "total_s",
    "copy_calls",
    "index_copy_calls",
    "fallback",
    "recall",
    "rel_err",
    "shortfall",
];

const NA: &str = "-";

fn opt_f(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |v| v.to_string())
}

pub fn format_record(r: &Record) -> String {
    let q = r.quality.as_ref();
    let run = &r.run;
    [
        run.query.clone(),
        run.strategy.clone(),
        run.profile.clone(),
        run.vs_mode.clone(),
        run.seed.to_string(),
        run.relational_ops.to_string(),
        run.vector_search.to_string(),
        run.data_movement.to_string(),
        run.index_movement.to_string(),
        run.residual.to_string(),
        run.total.to_string(),
        run.copy_calls.to_string(),
        run.index_copy_calls.to_string(),
        run.fallback.clone().unwrap_or_else(|| NA.to_string()),
        opt_f(q.and_then(|q| q.recall)),
        opt_f(q.and_then(|q| q.rel_err)),
        q.map_or_else(|| NA.to_string(), |q| q.shortfall.to_string()),
    ]
    .join("\t")
}

pub fn parse_record(line: &str) -> Result<Record> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != RECORD_COLUMNS.len() {
        return Err(Error::format(format!(
            "record has {} fields, expected {}",
            f.len(),
            RECORD_COLUMNS.len()
        )));
    }
    let num = |i: usize| -> Result<f64> {
        f[i].parse()
            .map_err(|_| Error::format(format!("bad number `{}` in {}", f[i], RECORD_COLUMNS[i])))
    };
    let int = |i: usize| -> Result<u64> {
        f[i].parse()
            .map_err(|_| Error::format(format!("bad integer `{}` in {}", f[i], RECORD_COLUMNS[i])))
    };
    let opt = |i: usize| -> Result<Option<f64>> { if f[i] == NA { Ok(None) } else { num(i).map(Some) } };
    let run = RunReport {
        query: f[0].to_string(),
        strategy: f[1].to_string(),
        profile: f[2].to_string(),
        vs_mode: f[3].to_string(),
        seed: int(4)?,
        relational_ops: num(5)?,
        vector_search: num(6)?,
        data_movement: num(7)?,
        index_movement: num(8)?,
        residual: num(9)?,
        total: num(10)?,
        copy_calls: int(11)?,
        index_copy_calls: int(12)?,
        fallback: (f[13] != NA).then(|| f[13].to_string()),
    };
    let quality = if f[16] == NA {
        None
    } else {
        Some(QualityReport {
            query: run.query.clone(),
            recall: opt(14)?,
            rel_err: opt(15)?,
            shortfall: int(16)? as usize,
        })
    };
    Ok(Record { run, quality })
}

pub fn parse_records(text: &str) -> Result<Vec<Record>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RECORD_COLUMNS.join("\t") => {}
        _ => return Err(Error::format("missing or unexpected record header")),
    }
    lines.filter(|l| !l.is_empty()).map(parse_record).collect()
}

pub fn render_records(records: &[Record]) -> String {
    let mut out = RECORD_COLUMNS.join("\t");
    out.push('\n');
    for r in records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

fn ms(s: f64) -> String {
    format!("{:.3}", s * 1e3)
}

/// Fixed-width table, times in milliseconds.
pub fn summary_table(records: &[Record]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<5} {:<8} {:<11} {:<6} {:>11} {:>11} {:>11} {:>11} {:>9} {:>11} {:>7} {:>8} {:>8}  fallback",
        "query", "strategy", "profile", "vs", "rel_ms", "vs_ms", "data_ms", "index_ms", "resid_ms", "total_ms", "calls", "recall", "rel_err"
    );
    for r in records {
        let run = &r.run;
        let q = r.quality.as_ref();
        let show = |x: Option<f64>| x.map_or_else(|| NA.to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "{:<5} {:<8} {:<11} {:<6} {:>11} {:>11} {:>11} {:>11} {:>9} {:>11} {:>7} {:>8} {:>8}  {}",
            run.query,
            run.strategy,
            run.profile,
            run.vs_mode,
            ms(run.relational_ops),
            ms(run.vector_search),
            ms(run.data_movement),
            ms(run.index_movement),
            ms(run.residual),
            ms(run.total),
            run.copy_calls,
            show(q.and_then(|q| q.recall)),
            show(q.and_then(|q| q.rel_err)),
            run.fallback.as_deref().unwrap_or(NA)
        );
    }
    out
}

/// Writes `runs.tsv` and `summary.txt` into `dir`, returning both paths.
pub fn emit_report(records: &[Record], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let runs = dir.join("runs.tsv");
    let summary = dir.join("summary.txt");
    fs::write(&runs, render_records(records))?;
    fs::write(&summary, summary_table(records))?;
    Ok((runs, summary))
}

pub fn read_report(dir: &Path) -> Result<Vec<Record>> {
    parse_records(&fs::read_to_string(dir.join("runs.tsv"))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columnar::{Column, ColumnData, Field, Schema};

    fn keyed(keys: &[i64]) -> Table {
        let n = keys.len();
        Table::new(
            Schema::new(vec![Field::new("k", DataType::Int64), Field::new("v", DataType::Float64)]).unwrap(),
            vec![
                Column::new(ColumnData::Int64(keys.to_vec())),
                Column::new(ColumnData::Float64(vec![0.5; n])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn recall_boundaries() {
        let enn = keyed(&(0..20).collect::<Vec<_>>());
        let keys = default_recall_keys(&enn);
        assert_eq!(keys, vec!["k".to_string()]);
        assert_eq!(recall(&enn, &enn, &keys).unwrap(), Some(1.0));
        let ann = keyed(&(0..19).collect::<Vec<_>>());
        assert_eq!(recall(&ann, &enn, &keys).unwrap(), Some(0.95));
        assert_eq!(recall(&ann, &keyed(&[]), &keys).unwrap(), None);
        // duplicates only count as often as they appear in the truth
        assert_eq!(recall(&keyed(&[1, 1, 1]), &keyed(&[1, 2]), &keys).unwrap(), Some(0.5));
    }

    #[test]
    fn rel_err_and_share() {
        assert_eq!(rel_err(5.0, 5.0), Some(0.0));
        assert!((rel_err(0.99, 1.0).unwrap() - 0.01).abs() < 1e-12);
        assert_eq!(rel_err(1.0, 0.0), None);
        assert_eq!(share_rel(3.0, 1.0, 5.0, 3.0), Some(1.0));
        assert_eq!(share_rel(1.0, 1.0, 5.0, 3.0), Some(0.0));
        assert_eq!(share_rel(1.0, 1.0, 3.0, 3.0), None);
    }

    #[test]
    fn records_round_trip_and_are_deterministic() {
        let rec = Record {
            run: RunReport {
                query: "Q2".into(),
                strategy: "copy_di".into(),
                profile: "nvlink-c2c".into(),
                vs_mode: "ivf".into(),
                seed: 42,
                relational_ops: 1e-4,
                vector_search: 0.1 + 0.2,
                data_movement: 0.0,
                index_movement: 1.2661,
                residual: 5e-6,
                total: 1.3661050000000001,
                copy_calls: 5200,
                index_copy_calls: 5121,
                fallback: Some("topk_cap".into()),
            },
            quality: Some(QualityReport {
                query: "Q2".into(),
                recall: Some(0.95),
                rel_err: None,
                shortfall: 3,
            }),
        };
        let plain = Record {
            run: RunReport::default(),
            quality: None,
        };
        let recs = vec![rec, plain];
        let text = render_records(&recs);
        assert_eq!(parse_records(&text).unwrap(), recs);
        let dir = tempfile::tempdir().unwrap();
        emit_report(&recs, dir.path()).unwrap();
        let first = fs::read(dir.path().join("runs.tsv")).unwrap();
        emit_report(&recs, dir.path()).unwrap();
        assert_eq!(first, fs::read(dir.path().join("runs.tsv")).unwrap());
        assert_eq!(read_report(dir.path()).unwrap(), recs);
        assert!(parse_records("bogus\n").is_err());
    }
}
