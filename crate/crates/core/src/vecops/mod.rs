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


//! Vector search: exhaustive scan, IVF and kNN-graph indexes, and the
//! two-port search operator.
//!
//! Candidates are ranked by `(key, data_row)` ascending, where the key is the
//! squared L2 distance or the negated inner product. This total order makes
//! every search deterministic and lets a full-probe IVF scan reproduce the
//! exhaustive result bit for bit.

pub mod distance;
pub mod flat;
pub mod graph;
pub mod index_io;
pub mod ivf;
pub mod kmeans;
pub mod operator;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};

pub use flat::{enn_search, FlatIndex};
pub use graph::{graph_build, graph_search, KnnGraphIndex};
pub use ivf::{ivf_build, ivf_search, IvfIndex};
pub use operator::{oversample_postfilter, vector_search_operator, DataSide, Shortfall, VsSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    SquaredL2,
    InnerProduct,
}

impl Metric {
    /// Value reported in the distance column for a ranking key.
    #[inline]
    pub fn reported(self, key: f32) -> f32 {
        match self {
            Metric::SquaredL2 => key,
            Metric::InnerProduct => -key,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Metric::SquaredL2 => 0,
            Metric::InnerProduct => 1,
        }
    }

    pub fn from_code(c: u32) -> Result<Self> {
        match c {
            0 => Ok(Metric::SquaredL2),
            1 => Ok(Metric::InnerProduct),
            _ => Err(Error::format(format!("unknown metric code {c}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::SquaredL2 => "squared_l2",
            Metric::InnerProduct => "inner_product",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared_l2" | "l2" => Ok(Metric::SquaredL2),
            "inner_product" | "ip" => Ok(Metric::InnerProduct),
            _ => Err(Error::param(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    Owning,
    NonOwning,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Owning => "owning",
            Layout::NonOwning => "non_owning",
        })
    }
}

pub const DEFAULT_GPU_TOPK_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub k: usize,
    pub k_prime: usize,
    pub nprobe: usize,
    pub ef: usize,
    pub gpu_topk_cap: usize,
}

impl SearchParams {
    pub fn new(k: usize) -> Self {
        SearchParams {
            k,
            k_prime: k,
            nprobe: 1,
            ef: k.max(64),
            gpu_topk_cap: DEFAULT_GPU_TOPK_CAP,
        }
    }

    pub fn with_k_prime(mut self, k_prime: usize) -> Self {
        self.k_prime = k_prime;
        self.ef = self.ef.max(k_prime);
        self
    }

    pub fn with_nprobe(mut self, nprobe: usize) -> Self {
        self.nprobe = nprobe;
        self
    }

    pub fn with_ef(mut self, ef: usize) -> Self {
        self.ef = ef;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if self.k_prime < self.k {
            return Err(Error::param(format!("k'={} < k={}", self.k_prime, self.k)));
        }
        if self.nprobe == 0 {
            return Err(Error::param("nprobe must be at least 1"));
        }
        if self.ef < self.k {
            return Err(Error::param(format!("ef={} < k={}", self.ef, self.k)));
        }
        Ok(())
    }
}

/// Work counters of one search call, consumed by the placement model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub queries: u64,
    /// Query-to-data-row distance evaluations.
    pub distance_evals: u64,
    /// Query-to-centroid evaluations (IVF only).
    pub centroid_evals: u64,
    /// Embedding rows fetched from the data side. Exhaustive and IVF scans
    /// read each touched row once per batch; graph search fetches per visit.
    pub rows_read: u64,
}

impl SearchStats {
    pub fn merge(&mut self, o: &SearchStats) {
        self.queries += o.queries;
        self.distance_evals += o.distance_evals;
        self.centroid_evals += o.centroid_evals;
        self.rows_read += o.rows_read;
    }
}

/// `(query_row, data_row, distance, rank)` rows grouped by query in
/// ascending query order, each group in rank order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborTable {
    pub metric: Metric,
    pub query_row: Vec<u32>,
    pub data_row: Vec<u32>,
    pub distance: Vec<f32>,
    pub rank: Vec<u32>,
    pub stats: SearchStats,
}

impl NeighborTable {
    pub fn len(&self) -> usize {
        self.query_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.query_row.is_empty()
    }

    pub(crate) fn push_query(&mut self, q: u32, ranked: &[Candidate]) {
        for (r, c) in ranked.iter().enumerate() {
            self.query_row.push(q);
            self.data_row.push(c.row);
            self.distance.push(self.metric.reported(c.key));
            self.rank.push(r as u32);
        }
    }

    /// Row range of each query group, in order.
    pub fn groups(&self) -> Vec<(u32, std::ops::Range<usize>)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            if i == self.len() || self.query_row[i] != self.query_row[start] {
                out.push((self.query_row[start], start..i));
                start = i;
            }
        }
        out
    }

    /// Rank contiguity and distance monotonicity.
    pub fn check_invariants(&self) -> Result<()> {
        for (_, range) in self.groups() {
            for (i, r) in range.clone().enumerate() {
                if self.rank[r] as usize != i {
                    return Err(Error::Shape(format!("rank gap at row {r}")));
                }
                if i > 0 {
                    let (a, b) = (self.distance[r - 1], self.distance[r]);
                    let ok = match self.metric {
                        Metric::SquaredL2 => a <= b,
                        Metric::InnerProduct => a >= b,
                    };
                    if !ok {
                        return Err(Error::Shape(format!("distance order broken at row {r}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate {
    pub key: f32,
    pub row: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.row.cmp(&other.row))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded selection of the `cap` smallest candidates.
pub(crate) struct TopK {
    cap: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    pub fn new(cap: usize) -> Self {
        TopK {
            cap,
            heap: BinaryHeap::with_capacity(cap.min(1 << 16) + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, key: f32, row: u32) {
        let c = Candidate { key, row };
        if self.heap.len() < self.cap {
            self.heap.push(c);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if c < *top {
                *top = c;
            }
        }
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.cap
    }

    pub fn worst(&self) -> Option<Candidate> {
        self.heap.peek().copied()
    }

    pub fn into_sorted(self) -> Vec<Candidate> {
        self.heap.into_sorted_vec()
    }
}

/// Scan rows `ids` of `base` (row-major, `dim` wide) into `top`.
pub(crate) fn scan_ids(
    metric: Metric,
    q: &[f32],
    base: &[f32],
    dim: usize,
    ids: &[u32],
    top: &mut TopK,
) {
    let row = |i: u32| &base[i as usize * dim..(i as usize + 1) * dim];
    let mut chunks = ids.chunks_exact(4);
    for c in &mut chunks {
        let k = distance::key4(metric, q, [row(c[0]), row(c[1]), row(c[2]), row(c[3])]);
        for j in 0..4 {
            top.push(k[j], c[j]);
        }
    }
    for &i in chunks.remainder() {
        top.push(distance::key(metric, q, row(i)), i);
    }
}

/// Scan a contiguous block whose local row `j` has id `ids[j]`.
pub(crate) fn scan_block(
    metric: Metric,
    q: &[f32],
    block: &[f32],
    dim: usize,
    ids: &[u32],
    top: &mut TopK,
) {
    let n = ids.len();
    let row = |j: usize| &block[j * dim..(j + 1) * dim];
    let mut j = 0;
    while j + 4 <= n {
        let k = distance::key4(metric, q, [row(j), row(j + 1), row(j + 2), row(j + 3)]);
        for t in 0..4 {
            top.push(k[t], ids[j + t]);
        }
        j += 4;
    }
    while j < n {
        top.push(distance::key(metric, q, row(j)), ids[j]);
        j += 1;
    }
}

pub(crate) fn check_dims(queries: &EmbeddingColumn, dim: usize) -> Result<()> {
    if queries.dim() != dim {
        return Err(Error::Shape(format!(
            "query dimension {} does not match data dimension {dim}",
            queries.dim()
        )));
    }
    Ok(())
}

/// Any searchable structure over one embedding column.
#[derive(Debug, Clone)]
pub enum VectorIndex {
    Flat(FlatIndex),
    Ivf(IvfIndex),
    Graph(KnnGraphIndex),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Flat,
    Ivf,
    Graph,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::Flat => "flat",
            IndexKind::Ivf => "ivf",
            IndexKind::Graph => "graph",
        })
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" | "enn" => Ok(IndexKind::Flat),
            "ivf" => Ok(IndexKind::Ivf),
            "graph" => Ok(IndexKind::Graph),
            _ => Err(Error::param(format!("unknown index kind `{s}`"))),
        }
    }
}

impl VectorIndex {
    pub fn kind(&self) -> IndexKind {
        match self {
            VectorIndex::Flat(_) => IndexKind::Flat,
            VectorIndex::Ivf(_) => IndexKind::Ivf,
            VectorIndex::Graph(_) => IndexKind::Graph,
        }
    }

    pub fn metric(&self) -> Metric {
        match self {
            VectorIndex::Flat(i) => i.metric,
            VectorIndex::Ivf(i) => i.metric(),
            VectorIndex::Graph(i) => i.metric(),
        }
    }

    pub fn layout(&self) -> Layout {
        match self {
            VectorIndex::Flat(_) => Layout::NonOwning,
            VectorIndex::Ivf(i) => i.layout(),
            VectorIndex::Graph(i) => i.layout(),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            VectorIndex::Flat(i) => i.data.count(),
            VectorIndex::Ivf(i) => i.count(),
            VectorIndex::Graph(i) => i.count(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorIndex::Flat(i) => i.data.dim(),
            VectorIndex::Ivf(i) => i.dim(),
            VectorIndex::Graph(i) => i.dim(),
        }
    }

    pub fn search(&self, queries: &EmbeddingColumn, params: &SearchParams) -> Result<NeighborTable> {
        match self {
            VectorIndex::Flat(i) => enn_search(queries, &i.data, params, i.metric),
            VectorIndex::Ivf(i) => ivf_search(i, queries, params),
            VectorIndex::Graph(i) => graph_search(i, queries, params),
        }
    }

    /// Bytes of the search structure alone (centroids and list offsets, or
    /// the neighbor matrix).
    pub fn structure_bytes(&self) -> u64 {
        match self {
            VectorIndex::Flat(_) => 0,
            VectorIndex::Ivf(i) => i.structure_bytes(),
            VectorIndex::Graph(i) => i.structure_bytes(),
        }
    }

    /// Embedding bytes stored inside the index (zero when non-owning).
    pub fn payload_bytes(&self) -> u64 {
        match self {
            VectorIndex::Flat(_) => 0,
            VectorIndex::Ivf(i) => i.payload_bytes(),
            VectorIndex::Graph(i) => i.payload_bytes(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topk_keeps_smallest_with_row_ties() {
        let mut t = TopK::new(3);
        for (k, r) in [(1.0, 5), (0.5, 9), (1.0, 2), (2.0, 1), (0.5, 3), (1.0, 0)] {
            t.push(k, r);
        }
        let rows: Vec<u32> = t.into_sorted().iter().map(|c| c.row).collect();
        assert_eq!(rows, [3, 9, 0]);
    }

    #[test]
    fn params_validation() {
        assert!(SearchParams::new(0).validate().is_err());
        let mut p = SearchParams::new(5);
        p.k_prime = 4;
        assert!(p.validate().is_err());
        assert!(SearchParams::new(5).with_k_prime(50).validate().is_ok());
    }
}
