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


//! Binary index files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! header   magic "HVIX" | version u32 | kind u32 (0 flat, 1 ivf, 2 graph)
//!          | metric u32 | layout u32 (0 non-owning, 1 owning)
//!          | nlist-or-degree u32 | dim u32 | count u64
//! ivf      centroids f32[nlist*dim] | offsets u64[nlist+1] | ids u32[count]
//!          | owning only: payload f32[count*dim] (list-major)
//! graph    n_entry u32 | entry u32[n_entry] | neighbors u32[count*degree]
//!          | owning only: vectors f32[count*dim] (row-major)
//! ```
//!
//! Non-owning and flat indexes are re-attached to their base column on read.

use std::io::{Read, Write};

use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};

use super::{FlatIndex, IvfIndex, KnnGraphIndex, Layout, Metric, VectorIndex};

const MAGIC: &[u8; 4] = b"HVIX";
const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f32s(w: &mut impl Write, v: &[f32]) -> Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 4);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn put_u32s(w: &mut impl Write, v: &[u32]) -> Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 4);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_bytes(r: &mut impl Read, n: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|e| Error::format(format!("truncated index file: {e}")))?;
    Ok(buf)
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(get_bytes(r, 4)?.try_into().unwrap()))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(get_bytes(r, 8)?.try_into().unwrap()))
}

pub(crate) fn get_f32s(r: &mut impl Read, n: usize) -> Result<Vec<f32>> {
    Ok(get_bytes(r, n * 4)?
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn get_u32s(r: &mut impl Read, n: usize) -> Result<Vec<u32>> {
    Ok(get_bytes(r, n * 4)?
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn layout_code(l: Layout) -> u32 {
    match l {
        Layout::NonOwning => 0,
        Layout::Owning => 1,
    }
}

pub fn write_index(w: &mut impl Write, index: &VectorIndex) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    let (kind, param) = match index {
        VectorIndex::Flat(_) => (0, 0),
        VectorIndex::Ivf(i) => (1, i.nlist() as u32),
        VectorIndex::Graph(g) => (2, g.degree() as u32),
    };
    put_u32(w, kind)?;
    put_u32(w, index.metric().code())?;
    put_u32(w, layout_code(index.layout()))?;
    put_u32(w, param)?;
    put_u32(w, index.dim() as u32)?;
    put_u64(w, index.count() as u64)?;
    match index {
        VectorIndex::Flat(_) => {}
        VectorIndex::Ivf(i) => {
            put_f32s(w, &i.centroids)?;
            for &o in &i.offsets {
                put_u64(w, o)?;
            }
            put_u32s(w, &i.ids)?;
            if let Some(p) = &i.payload {
                put_f32s(w, p)?;
            }
        }
        VectorIndex::Graph(g) => {
            put_u32(w, g.entry_points.len() as u32)?;
            put_u32s(w, &g.entry_points)?;
            put_u32s(w, &g.neighbors)?;
            if g.layout == Layout::Owning {
                put_f32s(w, g.vectors.values())?;
            }
        }
    }
    Ok(())
}

/// Read an index. `base` is required for flat and non-owning indexes.
pub fn read_index(r: &mut impl Read, base: Option<&EmbeddingColumn>) -> Result<VectorIndex> {
    if get_bytes(r, 4)? != MAGIC {
        return Err(Error::format("not an index file (bad magic)"));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(Error::format(format!("unsupported index version {version}")));
    }
    let kind = get_u32(r)?;
    let metric = Metric::from_code(get_u32(r)?)?;
    let layout = match get_u32(r)? {
        0 => Layout::NonOwning,
        1 => Layout::Owning,
        c => return Err(Error::format(format!("unknown layout code {c}"))),
    };
    let param = get_u32(r)? as usize;
    let dim = get_u32(r)? as usize;
    let count = get_u64(r)? as usize;
    let need_base = || -> Result<EmbeddingColumn> {
        let b = base.ok_or_else(|| Error::param("non-owning index needs its base embedding column"))?;
        if b.dim() != dim || b.count() != count {
            return Err(Error::Shape("base column does not match index header".into()));
        }
        Ok(b.clone())
    };
    match kind {
        0 => Ok(VectorIndex::Flat(FlatIndex::new(need_base()?, metric))),
        1 => {
            let centroids = get_f32s(r, param * dim)?;
            let offsets = (0..=param).map(|_| get_u64(r)).collect::<Result<Vec<_>>>()?;
            let ids = get_u32s(r, count)?;
            let (b, payload) = match layout {
                Layout::Owning => (None, Some(get_f32s(r, count * dim)?)),
                Layout::NonOwning => (Some(need_base()?), None),
            };
            Ok(VectorIndex::Ivf(IvfIndex::from_parts(
                metric, dim, centroids, offsets, ids, b, payload,
            )?))
        }
        2 => {
            let n_entry = get_u32(r)? as usize;
            let entry = get_u32s(r, n_entry)?;
            let neighbors = get_u32s(r, count * param)?;
            let vectors = match layout {
                Layout::Owning => EmbeddingColumn::new(dim, get_f32s(r, count * dim)?)?,
                Layout::NonOwning => need_base()?,
            };
            Ok(VectorIndex::Graph(KnnGraphIndex::from_parts(
                metric, param, neighbors, entry, layout, vectors,
            )?))
        }
        k => Err(Error::format(format!("unknown index kind {k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::{graph_build, ivf_build, SearchParams};

    fn data() -> EmbeddingColumn {
        EmbeddingColumn::new(3, (0..150).map(|i| ((i * 17 % 23) as f32 * 0.41).sin()).collect()).unwrap()
    }

    fn roundtrip(idx: &VectorIndex, base: Option<&EmbeddingColumn>) -> VectorIndex {
        let mut buf = Vec::new();
        write_index(&mut buf, idx).unwrap();
        let back = read_index(&mut buf.as_slice(), base).unwrap();
        let mut again = Vec::new();
        write_index(&mut again, &back).unwrap();
        assert_eq!(buf, again);
        back
    }

    #[test]
    fn ivf_and_graph_roundtrip_both_layouts() {
        let d = data();
        let q = EmbeddingColumn::new(3, vec![0.1, 0.2, 0.3]).unwrap();
        let p = SearchParams::new(4).with_nprobe(2);
        let ivf = ivf_build(&d, 4, Metric::SquaredL2, 3, Layout::NonOwning).unwrap();
        for l in [Layout::NonOwning, Layout::Owning] {
            let idx = VectorIndex::Ivf(ivf.with_layout(l));
            let back = roundtrip(&idx, Some(&d));
            assert_eq!(back.layout(), l);
            assert_eq!(back.search(&q, &p).unwrap(), idx.search(&q, &p).unwrap());
        }
        let g = graph_build(&d, 5, Metric::InnerProduct, 3).unwrap();
        for l in [Layout::NonOwning, Layout::Owning] {
            let idx = VectorIndex::Graph(g.with_layout(l));
            let back = roundtrip(&idx, Some(&d));
            assert_eq!(back.search(&q, &p).unwrap(), idx.search(&q, &p).unwrap());
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_index(&mut &b"NOPE"[..], None).is_err());
        let d = data();
        let ivf = VectorIndex::Ivf(ivf_build(&d, 2, Metric::SquaredL2, 3, Layout::NonOwning).unwrap());
        let mut buf = Vec::new();
        write_index(&mut buf, &ivf).unwrap();
        assert!(read_index(&mut buf.as_slice(), None).is_err());
        buf.truncate(buf.len() - 3);
        assert!(read_index(&mut buf.as_slice(), Some(&d)).is_err());
    }
}
