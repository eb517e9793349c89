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


//! Inverted-file index over k-means partitions.

use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};

use super::kmeans::kmeans;
use super::{
    check_dims, scan_block, scan_ids, Layout, Metric, NeighborTable, SearchParams, SearchStats, TopK,
};

#[derive(Debug, Clone)]
pub struct IvfIndex {
    pub(crate) metric: Metric,
    pub(crate) dim: usize,
    pub(crate) centroids: Vec<f32>,
    /// List `l` holds `ids[offsets[l]..offsets[l + 1]]`, ascending row order.
    pub(crate) offsets: Vec<u64>,
    pub(crate) ids: Vec<u32>,
    pub(crate) layout: Layout,
    /// Base column for non-owning lookups; shared, never copied.
    pub(crate) base: Option<EmbeddingColumn>,
    /// List-major embedding copy for the owning layout.
    pub(crate) payload: Option<Vec<f32>>,
}

pub fn ivf_build(
    data: &EmbeddingColumn,
    nlist: usize,
    metric: Metric,
    seed: u64,
    layout: Layout,
) -> Result<IvfIndex> {
    let km = kmeans(data, nlist, seed)?;
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); nlist];
    for (r, &a) in km.assignment.iter().enumerate() {
        lists[a as usize].push(r as u32);
    }
    let mut offsets = Vec::with_capacity(nlist + 1);
    let mut ids = Vec::with_capacity(data.count());
    offsets.push(0u64);
    for l in &lists {
        ids.extend_from_slice(l);
        offsets.push(ids.len() as u64);
    }
    let idx = IvfIndex {
        metric,
        dim: data.dim(),
        centroids: km.centroids,
        offsets,
        ids,
        layout: Layout::NonOwning,
        base: Some(data.clone()),
        payload: None,
    };
    Ok(idx.with_layout(layout))
}

impl IvfIndex {
    pub(crate) fn from_parts(
        metric: Metric,
        dim: usize,
        centroids: Vec<f32>,
        offsets: Vec<u64>,
        ids: Vec<u32>,
        base: Option<EmbeddingColumn>,
        payload: Option<Vec<f32>>,
    ) -> Result<Self> {
        let layout = if payload.is_some() {
            Layout::Owning
        } else {
            Layout::NonOwning
        };
        let nlist = offsets.len().saturating_sub(1);
        if nlist == 0 || centroids.len() != nlist * dim || *offsets.last().unwrap() as usize != ids.len() {
            return Err(Error::format("inconsistent IVF sections"));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::format("IVF list offsets not monotone"));
        }
        if let Some(p) = &payload {
            if p.len() != ids.len() * dim {
                return Err(Error::format("IVF payload size mismatch"));
            }
        }
        if let Some(b) = &base {
            if b.dim() != dim || b.count() != ids.len() {
                return Err(Error::Shape("base column does not match IVF index".into()));
            }
        }
        if payload.is_none() && base.is_none() {
            return Err(Error::param("non-owning IVF index needs its base column"));
        }
        Ok(IvfIndex {
            metric,
            dim,
            centroids,
            offsets,
            ids,
            layout,
            base,
            payload,
        })
    }

    /// Same partitions in the requested layout. Converting to owning copies
    /// every embedding into list-major order.
    pub fn with_layout(&self, layout: Layout) -> IvfIndex {
        let mut out = self.clone();
        match layout {
            Layout::Owning if self.payload.is_none() => {
                let base = self.base.as_ref().expect("non-owning index has a base");
                let mut p = Vec::with_capacity(self.ids.len() * self.dim);
                for &r in &self.ids {
                    p.extend_from_slice(base.row(r as usize));
                }
                out.payload = Some(p);
            }
            Layout::NonOwning if self.base.is_some() => out.payload = None,
            Layout::NonOwning => {
                let p = self.payload.as_ref().unwrap();
                let mut v = vec![0.0f32; p.len()];
                for (j, &r) in self.ids.iter().enumerate() {
                    let r = r as usize;
                    v[r * self.dim..(r + 1) * self.dim]
                        .copy_from_slice(&p[j * self.dim..(j + 1) * self.dim]);
                }
                out.base = Some(EmbeddingColumn::new(self.dim, v).expect("finite payload"));
                out.payload = None;
            }
            Layout::Owning => {}
        }
        out.layout = layout;
        out
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nlist(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn count(&self) -> usize {
        self.ids.len()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn centroids(&self) -> &[f32] {
        &self.centroids
    }

    pub fn list(&self, l: usize) -> &[u32] {
        &self.ids[self.offsets[l] as usize..self.offsets[l + 1] as usize]
    }

    pub fn list_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| (w[1] - w[0]) as usize).collect()
    }

    pub fn structure_bytes(&self) -> u64 {
        (self.centroids.len() * 4 + self.offsets.len() * 8) as u64
    }

    /// Row-id lists, transferred alongside embeddings.
    pub fn id_bytes(&self) -> u64 {
        self.ids.len() as u64 * 4
    }

    pub fn payload_bytes(&self) -> u64 {
        self.payload.as_ref().map_or(0, |p| p.len() as u64 * 4)
    }

    /// The `nprobe` lists whose centroids are nearest to `q`.
    pub fn probe(&self, q: &[f32], nprobe: usize) -> Vec<u32> {
        let nlist = self.nlist();
        let ids: Vec<u32> = (0..nlist as u32).collect();
        let mut top = TopK::new(nprobe.min(nlist));
        scan_block(Metric::SquaredL2, q, &self.centroids, self.dim, &ids, &mut top);
        top.into_sorted().into_iter().map(|c| c.row).collect()
    }
}

pub fn ivf_search(idx: &IvfIndex, queries: &EmbeddingColumn, params: &SearchParams) -> Result<NeighborTable> {
    params.validate()?;
    check_dims(queries, idx.dim)?;
    if params.nprobe > idx.nlist() {
        return Err(Error::param(format!(
            "nprobe={} exceeds nlist={}",
            params.nprobe,
            idx.nlist()
        )));
    }
    let dim = idx.dim;
    let mut out = NeighborTable {
        metric: idx.metric,
        ..Default::default()
    };
    let mut touched = vec![false; idx.nlist()];
    let mut stats = SearchStats {
        queries: queries.count() as u64,
        ..Default::default()
    };
    for q in 0..queries.count() {
        let qv = queries.row(q);
        let mut top = TopK::new(params.k_prime.min(idx.count()));
        stats.centroid_evals += idx.nlist() as u64;
        for l in idx.probe(qv, params.nprobe) {
            let l = l as usize;
            let ids = idx.list(l);
            touched[l] = true;
            stats.distance_evals += ids.len() as u64;
            match (&idx.payload, &idx.base) {
                (Some(p), _) => {
                    let s = idx.offsets[l] as usize * dim;
                    scan_block(idx.metric, qv, &p[s..s + ids.len() * dim], dim, ids, &mut top)
                }
                (None, Some(b)) => scan_ids(idx.metric, qv, b.values(), dim, ids, &mut top),
                (None, None) => unreachable!("index without embeddings"),
            }
        }
        out.push_query(q as u32, &top.into_sorted());
    }
    stats.rows_read = touched
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(l, _)| idx.list(l).len() as u64)
        .sum();
    out.stats = stats;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::enn_search;

    fn data(n: usize, dim: usize) -> EmbeddingColumn {
        EmbeddingColumn::new(dim, (0..n * dim).map(|i| ((i * 31 % 97) as f32 * 0.173).sin()).collect())
            .unwrap()
    }

    #[test]
    fn every_row_in_one_list() {
        let d = data(300, 4);
        let idx = ivf_build(&d, 7, Metric::SquaredL2, 1, Layout::NonOwning).unwrap();
        let mut all = idx.ids.clone();
        all.sort();
        assert_eq!(all, (0..300).collect::<Vec<u32>>());
        assert!(idx.list_sizes().iter().all(|&s| s > 0));
        assert_eq!(idx.payload_bytes(), 0);
        let own = idx.with_layout(Layout::Owning);
        assert_eq!(own.payload_bytes(), d.byte_size());
    }

    #[test]
    fn full_probe_equals_exhaustive_and_layouts_agree() {
        let d = data(500, 8);
        let q = data(13, 8);
        let idx = ivf_build(&d, 10, Metric::SquaredL2, 5, Layout::NonOwning).unwrap();
        let p = SearchParams::new(7).with_nprobe(10);
        let a = ivf_search(&idx, &q, &p).unwrap();
        let e = enn_search(&q, &d, &p, Metric::SquaredL2).unwrap();
        assert_eq!((&a.data_row, &a.distance), (&e.data_row, &e.distance));
        let p = p.with_nprobe(3);
        let x = ivf_search(&idx, &q, &p).unwrap();
        let y = ivf_search(&idx.with_layout(Layout::Owning), &q, &p).unwrap();
        assert_eq!(x, y);
        let back = idx.with_layout(Layout::Owning).with_layout(Layout::NonOwning);
        assert_eq!(ivf_search(&back, &q, &p).unwrap(), x);
    }

    #[test]
    fn single_probe_stays_in_partition() {
        let d = data(200, 4);
        let idx = ivf_build(&d, 5, Metric::SquaredL2, 2, Layout::NonOwning).unwrap();
        let c = EmbeddingColumn::new(4, idx.centroids[8..12].to_vec()).unwrap();
        let nt = ivf_search(&idx, &c, &SearchParams::new(10).with_nprobe(1)).unwrap();
        let list = idx.list(idx.probe(c.row(0), 1)[0] as usize);
        assert!(nt.data_row.iter().all(|r| list.contains(r)));
    }

    #[test]
    fn nprobe_bound() {
        let d = data(50, 2);
        let idx = ivf_build(&d, 4, Metric::SquaredL2, 0, Layout::NonOwning).unwrap();
        assert!(ivf_search(&idx, &d, &SearchParams::new(1).with_nprobe(5)).is_err());
    }
}
