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


//! The binary vector-search operator.
//!
//! The query port and the data port are both consumed whole; one output row
//! is produced per (query, neighbor) pair. Query-side columns come first,
//! then data-side columns, then `distance`, `vs_query` and `vs_rank`.
//! Embedding columns are never carried to the output.

use std::sync::Arc;

use crate::columnar::{project, Column, ColumnData, DataType, Field, Schema, Table};
use crate::error::{Error, Result};
use crate::expr::{bind_predicate, Expr};

use super::{enn_search, Metric, NeighborTable, SearchParams, VectorIndex};

pub const DISTANCE: &str = "distance";
pub const QUERY_ROW: &str = "vs_query";
pub const RANK: &str = "vs_rank";

/// Where the data port reads from.
#[derive(Debug, Clone, Copy)]
pub enum DataSide<'a> {
    /// Exhaustive scan over an embedding field of `table`.
    Scan { table: &'a Table, field: &'a str },
    /// Prebuilt index whose row ids address `table`.
    Index { table: &'a Table, index: &'a VectorIndex },
}

impl DataSide<'_> {
    fn table(&self) -> &Table {
        match self {
            DataSide::Scan { table, .. } | DataSide::Index { table, .. } => table,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VsSpec {
    pub query_field: String,
    pub params: SearchParams,
    pub metric: Metric,
    /// Placed on the simulated device, where the top-k cap applies.
    pub on_device: bool,
    pub query_prefix: String,
    pub data_prefix: String,
    pub output: Option<Vec<String>>,
}

impl VsSpec {
    pub fn new(query_field: &str, params: SearchParams) -> Self {
        VsSpec {
            query_field: query_field.to_string(),
            params,
            metric: Metric::SquaredL2,
            on_device: false,
            query_prefix: "q_".to_string(),
            data_prefix: String::new(),
            output: None,
        }
    }
}

fn scalar_part(t: &Table, prefix: &str) -> Result<Table> {
    let keep: Vec<&str> = t
        .schema()
        .fields()
        .iter()
        .filter(|f| !matches!(f.dtype, DataType::Embedding(_)))
        .map(|f| f.name.as_str())
        .collect();
    project(t, &keep)?.rename(|n| format!("{prefix}{n}"))
}

pub fn vector_search_operator(query: &Table, data: DataSide<'_>, spec: &VsSpec) -> Result<(Table, NeighborTable)> {
    spec.params.validate()?;
    if spec.on_device && spec.params.k_prime > spec.params.gpu_topk_cap {
        return Err(Error::CapExceeded {
            k_prime: spec.params.k_prime,
            cap: spec.params.gpu_topk_cap,
        });
    }
    let queries = query.embedding(&spec.query_field)?;
    let dtable = data.table();
    let nt = match data {
        DataSide::Scan { table, field } => {
            let d = table.embedding(field)?;
            if d.is_empty() || queries.is_empty() {
                NeighborTable {
                    metric: spec.metric,
                    ..Default::default()
                }
            } else {
                enn_search(queries, d, &spec.params, spec.metric)?
            }
        }
        DataSide::Index { table, index } => {
            if index.count() != table.row_count() {
                return Err(Error::Shape(format!(
                    "index covers {} rows but data table has {}",
                    index.count(),
                    table.row_count()
                )));
            }
            index.search(queries, &spec.params)?
        }
    };
    let qi: Vec<usize> = nt.query_row.iter().map(|&r| r as usize).collect();
    let di: Vec<usize> = nt.data_row.iter().map(|&r| r as usize).collect();
    let q = scalar_part(query, &spec.query_prefix)?.take(&qi);
    let d = scalar_part(dtable, &spec.data_prefix)?.take(&di);
    let extra = Table::new(
        Schema::new(vec![
            Field::new(DISTANCE, DataType::Float64),
            Field::new(QUERY_ROW, DataType::Int64),
            Field::new(RANK, DataType::Int64),
        ])?,
        vec![
            Column::new(ColumnData::Float64(nt.distance.iter().map(|&x| x as f64).collect())),
            Column::new(ColumnData::Int64(nt.query_row.iter().map(|&x| x as i64).collect())),
            Column::new(ColumnData::Int64(nt.rank.iter().map(|&x| x as i64).collect())),
        ],
    )?;
    let mut out = q.hstack(&d)?.hstack(&extra)?;
    if let Some(cols) = &spec.output {
        let keep: Vec<&str> = cols.iter().map(String::as_str).collect();
        out = project(&out, &keep)?;
    }
    Ok((out, nt))
}

/// Queries that kept fewer than `k` rows after a post-filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shortfall {
    pub query_row: u32,
    pub missing: usize,
}

/// Keep, per query, the first `k` rows (in rank order) for which `keep`
/// holds. `keep` receives the row position in `nt`.
pub fn oversample_postfilter(
    nt: &NeighborTable,
    keep: impl Fn(usize) -> bool,
    k: usize,
) -> (NeighborTable, Vec<Shortfall>) {
    let mut out = NeighborTable {
        metric: nt.metric,
        stats: nt.stats,
        ..Default::default()
    };
    let mut short = Vec::new();
    for (q, range) in nt.groups() {
        let mut kept = 0;
        for r in range {
            if kept == k {
                break;
            }
            if keep(r) {
                out.query_row.push(q);
                out.data_row.push(nt.data_row[r]);
                out.distance.push(nt.distance[r]);
                out.rank.push(kept as u32);
                kept += 1;
            }
        }
        if kept < k {
            short.push(Shortfall {
                query_row: q,
                missing: k - kept,
            });
        }
    }
    (out, short)
}

/// Table form of [`oversample_postfilter`] over an operator output that
/// still carries `vs_query` and `vs_rank`. Ranks are renumbered.
pub fn postfilter_output(table: &Table, predicate: &Expr, k: usize) -> Result<(Table, Vec<Shortfall>)> {
    let p = bind_predicate(predicate, table.schema())?;
    let qcol = table
        .column(QUERY_ROW)?
        .as_i64()
        .ok_or_else(|| Error::schema("vs_query must be int64"))?;
    let mut nt = NeighborTable::default();
    for (r, &q) in qcol.iter().enumerate() {
        nt.query_row.push(q as u32);
        nt.data_row.push(r as u32);
        nt.distance.push(0.0);
        nt.rank.push(0);
    }
    let (kept, short) = oversample_postfilter(&nt, |r| p.test(table, r), k);
    let rows: Vec<usize> = kept.data_row.iter().map(|&r| r as usize).collect();
    let out = table.take(&rows);
    let ri = out.schema().index_of(RANK).ok_or_else(|| Error::schema("missing vs_rank"))?;
    let mut cols: Vec<Arc<Column>> = out.columns().to_vec();
    cols[ri] = Arc::new(Column::new(ColumnData::Int64(kept.rank.iter().map(|&x| x as i64).collect())));
    Ok((Table::from_arcs(out.schema_arc(), cols)?, short))
}
