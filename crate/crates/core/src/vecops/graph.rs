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


//! Flat exact-kNN graph with best-first search.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};

use super::distance::{key, key4};
use super::{check_dims, Candidate, Layout, Metric, NeighborTable, SearchParams, SearchStats, TopK};

pub const DEFAULT_DEGREE: usize = 32;
pub const ENTRY_POINTS: usize = 8;

/// Random long-range edges per row, so that well separated clusters stay
/// reachable from a handful of entry points.
pub fn long_links(degree: usize) -> usize {
    degree / 8
}

#[derive(Debug, Clone)]
pub struct KnnGraphIndex {
    pub(crate) metric: Metric,
    pub(crate) degree: usize,
    /// `count × degree`; row `i` holds its nearest rows sorted by the tie
    /// rule followed by `long_links(degree)` random rows.
    pub(crate) neighbors: Vec<u32>,
    pub(crate) entry_points: Vec<u32>,
    pub(crate) layout: Layout,
    /// Shared with the base column when non-owning, a private copy otherwise.
    pub(crate) vectors: EmbeddingColumn,
}

pub fn graph_build(data: &EmbeddingColumn, degree: usize, metric: Metric, seed: u64) -> Result<KnnGraphIndex> {
    let n = data.count();
    if degree == 0 || degree >= n {
        return Err(Error::param(format!("degree={degree} must be in 1..{n}")));
    }
    let far = long_links(degree);
    let near = degree - far;
    let mut tops: Vec<TopK> = (0..n).map(|_| TopK::new(near)).collect();
    for i in 0..n {
        let a = data.row(i);
        let mut j = i + 1;
        while j + 4 <= n {
            let k = key4(metric, a, [data.row(j), data.row(j + 1), data.row(j + 2), data.row(j + 3)]);
            for t in 0..4 {
                tops[i].push(k[t], (j + t) as u32);
                tops[j + t].push(k[t], i as u32);
            }
            j += 4;
        }
        while j < n {
            let k = key(metric, a, data.row(j));
            tops[i].push(k, j as u32);
            tops[j].push(k, i as u32);
            j += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neighbors = Vec::with_capacity(n * degree);
    for (i, t) in tops.into_iter().enumerate() {
        let start = neighbors.len();
        neighbors.extend(t.into_sorted().into_iter().map(|c| c.row));
        while neighbors.len() - start < degree {
            let r = rng.gen_range(0..n) as u32;
            if r as usize != i && !neighbors[start..].contains(&r) {
                neighbors.push(r);
            }
        }
    }
    let entry_points = sample(&mut rng, n, ENTRY_POINTS.min(n))
        .into_vec()
        .into_iter()
        .map(|r| r as u32)
        .collect();
    Ok(KnnGraphIndex {
        metric,
        degree,
        neighbors,
        entry_points,
        layout: Layout::NonOwning,
        vectors: data.clone(),
    })
}

impl KnnGraphIndex {
    pub(crate) fn from_parts(
        metric: Metric,
        degree: usize,
        neighbors: Vec<u32>,
        entry_points: Vec<u32>,
        layout: Layout,
        vectors: EmbeddingColumn,
    ) -> Result<Self> {
        let n = vectors.count();
        if degree == 0 || neighbors.len() != n * degree {
            return Err(Error::format("neighbor matrix size mismatch"));
        }
        if neighbors.iter().chain(&entry_points).any(|&r| r as usize >= n) || entry_points.is_empty() {
            return Err(Error::format("graph references rows out of range"));
        }
        Ok(KnnGraphIndex {
            metric,
            degree,
            neighbors,
            entry_points,
            layout,
            vectors,
        })
    }

    pub fn with_layout(&self, layout: Layout) -> KnnGraphIndex {
        let mut out = self.clone();
        if layout != self.layout {
            out.vectors = match layout {
                Layout::Owning => EmbeddingColumn::new(self.dim(), self.vectors.values().to_vec())
                    .expect("finite values"),
                Layout::NonOwning => self.vectors.clone(),
            };
        }
        out.layout = layout;
        out
    }

    /// Attach a non-owning graph to its base column.
    pub fn with_base(mut self, base: EmbeddingColumn) -> Result<Self> {
        if base.count() != self.count() || base.dim() != self.dim() {
            return Err(Error::Shape("base column does not match graph".into()));
        }
        self.vectors = base;
        Ok(self)
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn count(&self) -> usize {
        self.vectors.count()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn entry_points(&self) -> &[u32] {
        &self.entry_points
    }

    pub fn vectors(&self) -> &EmbeddingColumn {
        &self.vectors
    }

    pub fn neighbors_of(&self, i: usize) -> &[u32] {
        &self.neighbors[i * self.degree..(i + 1) * self.degree]
    }

    pub fn structure_bytes(&self) -> u64 {
        self.neighbors.len() as u64 * 4
    }

    pub fn payload_bytes(&self) -> u64 {
        match self.layout {
            Layout::Owning => self.vectors.byte_size(),
            Layout::NonOwning => 0,
        }
    }

    /// Rows reachable from the entry points along neighbor edges.
    pub fn reachable(&self) -> usize {
        let mut seen = vec![false; self.count()];
        let mut stack: Vec<u32> = self.entry_points.clone();
        for &e in &stack {
            seen[e as usize] = true;
        }
        let mut n = stack.len();
        while let Some(v) = stack.pop() {
            for &w in self.neighbors_of(v as usize) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    n += 1;
                    stack.push(w);
                }
            }
        }
        n
    }
}

pub fn graph_search(idx: &KnnGraphIndex, queries: &EmbeddingColumn, params: &SearchParams) -> Result<NeighborTable> {
    params.validate()?;
    check_dims(queries, idx.dim())?;
    let n = idx.count();
    let pool = params.ef.max(params.k_prime).min(n);
    let metric = idx.metric;
    let vec = &idx.vectors;
    let mut out = NeighborTable {
        metric,
        ..Default::default()
    };
    let mut stats = SearchStats {
        queries: queries.count() as u64,
        ..Default::default()
    };
    let mut stamp = vec![0u32; n];
    let mut fresh: Vec<u32> = Vec::with_capacity(idx.degree);
    for q in 0..queries.count() {
        let qv = queries.row(q);
        let mark = q as u32 + 1;
        let mut results = TopK::new(pool);
        let mut frontier: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
        for &e in &idx.entry_points {
            if stamp[e as usize] != mark {
                stamp[e as usize] = mark;
                let k = key(metric, qv, vec.row(e as usize));
                stats.distance_evals += 1;
                results.push(k, e);
                frontier.push(Reverse(Candidate { key: k, row: e }));
            }
        }
        while let Some(Reverse(c)) = frontier.pop() {
            if results.is_full() && results.worst().is_some_and(|w| c > w) {
                break;
            }
            fresh.clear();
            for &w in idx.neighbors_of(c.row as usize) {
                if stamp[w as usize] != mark {
                    stamp[w as usize] = mark;
                    fresh.push(w);
                }
            }
            stats.distance_evals += fresh.len() as u64;
            let mut consider = |k: f32, w: u32, results: &mut TopK| {
                let cand = Candidate { key: k, row: w };
                if !results.is_full() || results.worst().is_none_or(|x| cand < x) {
                    results.push(k, w);
                    frontier.push(Reverse(cand));
                }
            };
            let mut chunks = fresh.chunks_exact(4);
            for ch in &mut chunks {
                let ks = key4(
                    metric,
                    qv,
                    [
                        vec.row(ch[0] as usize),
                        vec.row(ch[1] as usize),
                        vec.row(ch[2] as usize),
                        vec.row(ch[3] as usize),
                    ],
                );
                for t in 0..4 {
                    consider(ks[t], ch[t], &mut results);
                }
            }
            for &w in chunks.remainder() {
                consider(key(metric, qv, vec.row(w as usize)), w, &mut results);
            }
        }
        let mut ranked = results.into_sorted();
        ranked.truncate(params.k_prime);
        out.push_query(q as u32, &ranked);
        if mark == u32::MAX {
            stamp.iter_mut().for_each(|s| *s = 0);
        }
    }
    stats.rows_read = stats.distance_evals;
    out.stats = stats;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::enn_search;

    #[test]
    fn collinear_middle_picks_nearer_end() {
        let d = EmbeddingColumn::new(1, vec![0.0, 1.0, 3.0]).unwrap();
        let g = graph_build(&d, 1, Metric::SquaredL2, 0).unwrap();
        assert_eq!(g.neighbors_of(1), &[0]);
        assert_eq!(g.neighbors_of(0), &[1]);
    }

    #[test]
    fn complete_graph_and_no_self_loops() {
        let d = EmbeddingColumn::new(2, (0..20).map(|i| (i as f32).sin()).collect()).unwrap();
        let g = graph_build(&d, 9, Metric::SquaredL2, 0).unwrap();
        for i in 0..10 {
            let mut nb = g.neighbors_of(i).to_vec();
            assert!(!nb.contains(&(i as u32)));
            nb.sort();
            nb.dedup();
            assert_eq!(nb.len(), 9);
        }
        assert!(graph_build(&d, 10, Metric::SquaredL2, 0).is_err());
    }

    #[test]
    fn full_pool_is_exact_when_connected() {
        let d = EmbeddingColumn::new(3, (0..300).map(|i| ((i * 13 % 41) as f32 * 0.3).cos()).collect())
            .unwrap();
        let g = graph_build(&d, 8, Metric::SquaredL2, 4).unwrap();
        assert_eq!(g.reachable(), 100);
        let q = EmbeddingColumn::new(3, vec![0.1, 0.2, 0.3, -0.5, 0.9, 0.0]).unwrap();
        let p = SearchParams::new(5).with_ef(100);
        let a = graph_search(&g, &q, &p).unwrap();
        let e = enn_search(&q, &d, &p, Metric::SquaredL2).unwrap();
        assert_eq!((a.data_row, a.distance), (e.data_row, e.distance));
    }

    #[test]
    fn entry_point_query_hits_itself() {
        let d = EmbeddingColumn::new(2, (0..64).map(|i| (i as f32 * 0.77).sin()).collect()).unwrap();
        let g = graph_build(&d, 4, Metric::SquaredL2, 1).unwrap();
        let e = g.entry_points()[0] as usize;
        let q = EmbeddingColumn::new(2, d.row(e).to_vec()).unwrap();
        let nt = graph_search(&g, &q, &SearchParams::new(1)).unwrap();
        assert_eq!((nt.data_row[0] as usize, nt.distance[0]), (e, 0.0));
    }
}
