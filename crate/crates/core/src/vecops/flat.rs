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


use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};

use super::{check_dims, scan_block, Metric, NeighborTable, SearchParams, SearchStats, TopK};

/// Exhaustive search over a borrowed embedding column.
#[derive(Debug, Clone)]
pub struct FlatIndex {
    pub data: EmbeddingColumn,
    pub metric: Metric,
}

impl FlatIndex {
    pub fn new(data: EmbeddingColumn, metric: Metric) -> Self {
        FlatIndex { data, metric }
    }
}

/// Exact top-k' of every query against every data row.
pub fn enn_search(
    queries: &EmbeddingColumn,
    data: &EmbeddingColumn,
    params: &SearchParams,
    metric: Metric,
) -> Result<NeighborTable> {
    params.validate()?;
    check_dims(queries, data.dim())?;
    if data.is_empty() {
        return Err(Error::EmptyInput("exhaustive search over empty data".into()));
    }
    let n = data.count();
    let dim = data.dim();
    let cap = params.k_prime.min(n);
    let ids: Vec<u32> = (0..n as u32).collect();
    let mut out = NeighborTable {
        metric,
        ..Default::default()
    };
    for q in 0..queries.count() {
        let mut top = TopK::new(cap);
        scan_block(metric, queries.row(q), data.values(), dim, &ids, &mut top);
        out.push_query(q as u32, &top.into_sorted());
    }
    let m = queries.count() as u64;
    out.stats = SearchStats {
        queries: m,
        distance_evals: m * n as u64,
        centroid_evals: 0,
        rows_read: if m > 0 { n as u64 } else { 0 },
    };
    Ok(out)
}
