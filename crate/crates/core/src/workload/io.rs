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


//! Dataset directory layout.
//!
//! ```text
//! DIR/dataset.toml            generator spec and embedding file list
//! DIR/<table>.tbl             header `name:type|...`, then `|`-delimited rows
//! DIR/<table>.<field>.emb     embedding column (see below)
//! DIR/<kind>_centers.emb      mixture centers used for query sampling
//! ```
//!
//! Embedding files are little-endian: magic `HVEM`, version u32, count u64,
//! dim u32, element type u32 (0 = f32), then `count*dim` floats row-major.
//! Scalar text uses `\N` for null. Embedding columns are the last column of
//! their table and are not written to the `.tbl` file.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::columnar::{
    format_date, parse_date, Column, ColumnData, DataType, EmbeddingColumn, Field, Schema, Table,
};
use crate::error::{Error, Result};
use crate::vecops::index_io::get_f32s;

use super::gen::{Dataset, DatasetSpec, TABLES};

const EMB_MAGIC: &[u8; 4] = b"HVEM";
const EMB_VERSION: u32 = 1;
const ELEM_F32: u32 = 0;

pub fn write_embeddings(w: &mut impl Write, e: &EmbeddingColumn) -> Result<()> {
    w.write_all(EMB_MAGIC)?;
    w.write_all(&EMB_VERSION.to_le_bytes())?;
    w.write_all(&(e.count() as u64).to_le_bytes())?;
    w.write_all(&(e.dim() as u32).to_le_bytes())?;
    w.write_all(&ELEM_F32.to_le_bytes())?;
    let mut buf = Vec::with_capacity(e.values().len() * 4);
    for x in e.values() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_embeddings(r: &mut impl Read) -> Result<EmbeddingColumn> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)
        .map_err(|e| Error::format(format!("truncated embedding header: {e}")))?;
    if &head[..4] != EMB_MAGIC {
        return Err(Error::format("not an embedding file (bad magic)"));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    let count = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(head[16..20].try_into().unwrap()) as usize;
    let elem = u32::from_le_bytes(head[20..24].try_into().unwrap());
    if version != EMB_VERSION || elem != ELEM_F32 {
        return Err(Error::format(format!(
            "unsupported embedding file (version {version}, element type {elem})"
        )));
    }
    EmbeddingColumn::new(dim, get_f32s(r, count * dim)?)
}

fn type_name(t: DataType) -> String {
    t.to_string()
}

fn parse_type(s: &str) -> Result<DataType> {
    Ok(match s {
        "int64" => DataType::Int64,
        "float64" => DataType::Float64,
        "string" => DataType::Utf8,
        "date" => DataType::Date32,
        _ => return Err(Error::format(format!("unknown column type `{s}`"))),
    })
}

/// Write the scalar columns of `t` as delimited text.
pub fn write_table_text(w: &mut impl Write, t: &Table) -> Result<()> {
    let cols: Vec<(usize, &Field)> = t
        .schema()
        .fields()
        .iter()
        .enumerate()
        .filter(|(_, f)| !matches!(f.dtype, DataType::Embedding(_)))
        .collect();
    let header: Vec<String> = cols.iter().map(|(_, f)| format!("{}:{}", f.name, type_name(f.dtype))).collect();
    writeln!(w, "{}", header.join("|"))?;
    let mut line = String::new();
    for r in 0..t.row_count() {
        line.clear();
        for (j, (ci, _)) in cols.iter().enumerate() {
            if j > 0 {
                line.push('|');
            }
            let c = t.column_at(*ci);
            if !c.is_valid(r) {
                line.push_str("\\N");
                continue;
            }
            match c.data() {
                ColumnData::Int64(v) => line.push_str(&v[r].to_string()),
                ColumnData::Float64(v) => line.push_str(&v[r].to_string()),
                ColumnData::Date32(v) => line.push_str(&format_date(v[r])),
                ColumnData::Utf8(v) => {
                    if v[r].contains(['|', '\n', '\r']) || v[r] == "\\N" {
                        return Err(Error::format(format!("unencodable string `{}`", v[r])));
                    }
                    line.push_str(&v[r]);
                }
                ColumnData::Embedding(_) => unreachable!(),
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_table_text(r: &mut impl BufRead) -> Result<Table> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format("missing table header"))??;
    let mut fields = Vec::new();
    for h in header.split('|') {
        let (name, ty) = h
            .split_once(':')
            .ok_or_else(|| Error::format(format!("bad header entry `{h}`")))?;
        fields.push(Field::new(name, parse_type(ty)?));
    }
    let mut data: Vec<ColumnData> = fields
        .iter()
        .map(|f| match f.dtype {
            DataType::Int64 => ColumnData::Int64(Vec::new()),
            DataType::Float64 => ColumnData::Float64(Vec::new()),
            DataType::Date32 => ColumnData::Date32(Vec::new()),
            _ => ColumnData::Utf8(Vec::new()),
        })
        .collect();
    let mut valid: Vec<Vec<bool>> = vec![Vec::new(); fields.len()];
    for (ln, line) in lines.enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split('|').collect();
        if parts.len() != fields.len() {
            return Err(Error::format(format!(
                "line {}: {} values for {} columns",
                ln + 2,
                parts.len(),
                fields.len()
            )));
        }
        for (j, p) in parts.into_iter().enumerate() {
            let null = p == "\\N";
            valid[j].push(!null);
            let bad = || Error::format(format!("line {}: cannot parse `{p}`", ln + 2));
            match &mut data[j] {
                ColumnData::Int64(v) => v.push(if null { 0 } else { p.parse().map_err(|_| bad())? }),
                ColumnData::Float64(v) => v.push(if null { 0.0 } else { p.parse().map_err(|_| bad())? }),
                ColumnData::Date32(v) => v.push(if null { 0 } else { parse_date(p).ok_or_else(bad)? }),
                ColumnData::Utf8(v) => v.push(if null { String::new() } else { p.to_string() }),
                ColumnData::Embedding(_) => unreachable!(),
            }
        }
    }
    let columns = data
        .into_iter()
        .zip(valid)
        .map(|(d, v)| {
            if v.iter().all(|&b| b) {
                Ok(Column::new(d))
            } else {
                Column::with_validity(d, v)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Table::new(Schema::new(fields)?, columns)
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    spec: DatasetSpec,
    embeddings: Vec<EmbeddingEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingEntry {
    table: String,
    field: String,
    file: String,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut embeddings = Vec::new();
    for name in TABLES {
        let t = ds.table(name)?;
        let mut w = create(&dir.join(format!("{name}.tbl")))?;
        write_table_text(&mut w, t)?;
        w.flush()?;
        for f in t.schema().fields() {
            if let DataType::Embedding(_) = f.dtype {
                let file = format!("{name}.{}.emb", f.name);
                let mut w = create(&dir.join(&file))?;
                write_embeddings(&mut w, t.embedding(&f.name)?)?;
                w.flush()?;
                embeddings.push(EmbeddingEntry {
                    table: name.to_string(),
                    field: f.name.clone(),
                    file,
                });
            }
        }
    }
    for (file, e) in [("review_centers.emb", &ds.review_centers), ("image_centers.emb", &ds.image_centers)] {
        let mut w = create(&dir.join(file))?;
        write_embeddings(&mut w, e)?;
        w.flush()?;
    }
    let manifest = Manifest {
        spec: ds.spec.clone(),
        embeddings,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::format(e.to_string()))?;
    fs::write(dir.join("dataset.toml"), text)?;
    Ok(())
}

fn open_emb(path: &Path) -> Result<EmbeddingColumn> {
    read_embeddings(&mut BufReader::new(fs::File::open(path)?))
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(dir.join("dataset.toml"))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::format(e.to_string()))?;
    let mut tables = Vec::new();
    for name in TABLES {
        let mut t = read_table_text(&mut BufReader::new(fs::File::open(dir.join(format!("{name}.tbl")))?))?;
        for e in manifest.embeddings.iter().filter(|e| e.table == name) {
            let col = open_emb(&dir.join(&e.file))?;
            t = t.with_column(
                Field::new(e.field.clone(), DataType::Embedding(col.dim())),
                Column::new(ColumnData::Embedding(col)),
            )?;
        }
        tables.push(t);
    }
    let mut it = tables.into_iter();
    let mut next = || it.next().unwrap();
    Ok(Dataset {
        spec: manifest.spec,
        region: next(),
        nation: next(),
        part: next(),
        supplier: next(),
        partsupp: next(),
        customer: next(),
        orders: next(),
        lineitem: next(),
        reviews: next(),
        images: next(),
        review_centers: open_emb(&dir.join("review_centers.emb"))?,
        image_centers: open_emb(&dir.join("image_centers.emb"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::gen::generate;

    #[test]
    fn embedding_file_bit_exact() {
        let e = EmbeddingColumn::new(3, vec![1.0, -0.0, f32::MIN_POSITIVE, 3.5, 1e-30, -7.25]).unwrap();
        let mut buf = Vec::new();
        write_embeddings(&mut buf, &e).unwrap();
        let back = read_embeddings(&mut buf.as_slice()).unwrap();
        let bits = |c: &EmbeddingColumn| c.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&e));
        buf[0] = b'X';
        assert!(read_embeddings(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn dataset_directory_roundtrip() {
        let ds = generate(&DatasetSpec {
            sf: 0.0005,
            ..Default::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn nulls_roundtrip() {
        let t = Table::new(
            Schema::new(vec![Field::new("a", DataType::Int64), Field::new("s", DataType::Utf8)]).unwrap(),
            vec![
                Column::with_validity(ColumnData::Int64(vec![1, 0]), vec![true, false]).unwrap(),
                Column::new(ColumnData::Utf8(vec!["x y".into(), "".into()])),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_table_text(&mut buf, &t).unwrap();
        assert_eq!(read_table_text(&mut buf.as_slice()).unwrap(), t);
    }
}
