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


//! Lloyd's k-means used as the IVF coarse quantizer.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};

use super::distance::squared_l2;
use super::{scan_block, Metric, TopK};

pub const MAX_ITERATIONS: usize = 20;
pub const SHIFT_TOLERANCE: f32 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub dim: usize,
    /// `nlist × dim`, row-major.
    pub centroids: Vec<f32>,
    pub assignment: Vec<u32>,
    pub iterations: usize,
}

impl KMeans {
    pub fn nlist(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroid(&self, c: usize) -> &[f32] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }
}

/// Index of the nearest centroid under squared L2, ties to the lower id.
pub fn nearest_centroid(centroids: &[f32], dim: usize, ids: &[u32], v: &[f32]) -> u32 {
    let mut top = TopK::new(1);
    scan_block(Metric::SquaredL2, v, centroids, dim, ids, &mut top);
    top.into_sorted()[0].row
}

pub fn kmeans(data: &EmbeddingColumn, nlist: usize, seed: u64) -> Result<KMeans> {
    let n = data.count();
    let dim = data.dim();
    if nlist == 0 || nlist > n {
        return Err(Error::param(format!(
            "nlist={nlist} must be in 1..={n} (data row count)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Vec::with_capacity(nlist * dim);
    for r in sample(&mut rng, n, nlist).into_vec() {
        centroids.extend_from_slice(data.row(r));
    }
    let ids: Vec<u32> = (0..nlist as u32).collect();
    let mut assignment = vec![0u32; n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (r, a) in assignment.iter_mut().enumerate() {
            *a = nearest_centroid(&centroids, dim, &ids, data.row(r));
        }
        reseed_empty(data, &mut centroids, &mut assignment, nlist);
        let next = means(data, &assignment, nlist);
        let shift = (0..nlist)
            .map(|c| squared_l2(&centroids[c * dim..(c + 1) * dim], &next[c * dim..(c + 1) * dim]))
            .fold(0.0f32, f32::max);
        centroids = next;
        if iterations >= MAX_ITERATIONS || shift < SHIFT_TOLERANCE {
            break;
        }
    }
    Ok(KMeans {
        dim,
        centroids,
        assignment,
        iterations,
    })
}

/// Move the farthest member of the largest partition into each empty one.
fn reseed_empty(data: &EmbeddingColumn, centroids: &mut [f32], assignment: &mut [u32], nlist: usize) {
    let dim = data.dim();
    loop {
        let mut counts = vec![0usize; nlist];
        for &a in assignment.iter() {
            counts[a as usize] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..nlist)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .unwrap();
        let center = centroids[largest * dim..(largest + 1) * dim].to_vec();
        let mut far: Option<(f32, usize)> = None;
        for (r, &a) in assignment.iter().enumerate() {
            if a as usize != largest {
                continue;
            }
            let d = squared_l2(&center, data.row(r));
            if far.is_none_or(|(fd, _)| d > fd) {
                far = Some((d, r));
            }
        }
        let (_, r) = far.expect("largest partition is non-empty");
        assignment[r] = empty as u32;
        centroids[empty * dim..(empty + 1) * dim].copy_from_slice(data.row(r));
    }
}

fn means(data: &EmbeddingColumn, assignment: &[u32], nlist: usize) -> Vec<f32> {
    let dim = data.dim();
    let mut sums = vec![0.0f64; nlist * dim];
    let mut counts = vec![0usize; nlist];
    for (r, &a) in assignment.iter().enumerate() {
        let a = a as usize;
        counts[a] += 1;
        for (s, &x) in sums[a * dim..(a + 1) * dim].iter_mut().zip(data.row(r)) {
            *s += x as f64;
        }
    }
    sums.chunks(dim)
        .zip(&counts)
        .flat_map(|(s, &c)| s.iter().map(move |&v| (v / c as f64) as f32))
        .collect()
}
