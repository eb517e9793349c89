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


//! Test oracles written independently of the library's search code.

#![allow(dead_code)]

use hvec_core::columnar::EmbeddingColumn;
use hvec_core::vecops::{Metric, NeighborTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force top-`k_prime` per query as `(data_row, reported distance)`.
/// Ranking: ascending squared L2 or descending inner product, ties broken by
/// the lower data row.
pub fn brute_force(queries: &[Vec<f32>], data: &[Vec<f32>], k_prime: usize, metric: Metric) -> Vec<Vec<(u32, f32)>> {
    queries
        .iter()
        .map(|q| {
            let mut all: Vec<(f32, u32)> = data
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let mut s = 0.0f32;
                    for j in 0..q.len() {
                        s += match metric {
                            Metric::SquaredL2 => (q[j] - x[j]) * (q[j] - x[j]),
                            Metric::InnerProduct => q[j] * x[j],
                        };
                    }
                    (s, i as u32)
                })
                .collect();
            all.sort_by(|a, b| match metric {
                Metric::SquaredL2 => a.0.total_cmp(&b.0),
                Metric::InnerProduct => b.0.total_cmp(&a.0),
            }
            .then(a.1.cmp(&b.1)));
            all.truncate(k_prime);
            all.into_iter().map(|(d, i)| (i, d)).collect()
        })
        .collect()
}

pub fn per_query(nt: &NeighborTable, queries: usize) -> Vec<Vec<(u32, f32)>> {
    let mut out = vec![Vec::new(); queries];
    for i in 0..nt.len() {
        out[nt.query_row[i] as usize].push((nt.data_row[i], nt.distance[i]));
    }
    out
}

/// Vectors on a coarse grid so exact distance ties are common.
pub fn grid_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f32>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-4i32..=4) as f32 * 0.5).collect())
        .collect()
}

pub fn gaussian_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f32>> {
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect()).collect()
}

pub fn column(rows: &[Vec<f32>], dim: usize) -> EmbeddingColumn {
    EmbeddingColumn::new(dim, rows.concat()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
