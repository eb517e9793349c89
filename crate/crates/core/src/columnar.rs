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

//! Immutable columnar tables.
//!
//! A [`Table`] is a schema plus one shared column per field. Embedding
//! columns hold a contiguous row-major `f32` buffer so that indexes and the
//! search kernels can read them without copying. Columns produced by a left
//! join carry a validity sequence; every other column is fully valid.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataType {
    Int64,
    Float64,
    Utf8,
    /// Days since 1970-01-01.
    Date32,
    /// Fixed-dimension `f32` vector.
    Embedding(usize),
}

impl DataType {
    pub fn is_numeric(self) -> bool {
        matches!(self, DataType::Int64 | DataType::Float64)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Int64 => f.write_str("int64"),
            DataType::Float64 => f.write_str("float64"),
            DataType::Utf8 => f.write_str("string"),
            DataType::Date32 => f.write_str("date"),
            DataType::Embedding(d) => write!(f, "embedding({d})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub dtype: DataType,
}

impl Field {
    pub fn new(name: impl Into<String>, dtype: DataType) -> Self {
        Field {
            name: name.into(),
            dtype,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    fields: Vec<Field>,
}

impl Schema {
    pub fn new(fields: Vec<Field>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &fields {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::schema(format!("duplicate field `{}`", f.name)));
            }
            if f.dtype == DataType::Embedding(0) {
                return Err(Error::schema(format!(
                    "embedding field `{}` has dimension 0",
                    f.name
                )));
            }
        }
        Ok(Schema { fields })
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn field(&self, name: &str) -> Result<&Field> {
        self.index_of(name)
            .map(|i| &self.fields[i])
            .ok_or_else(|| Error::schema(format!("unknown field `{name}`")))
    }
}

/// Ordinal of a row within its base table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub u32);

impl RowId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for RowId {
    fn from(i: usize) -> Self {
        RowId(u32::try_from(i).expect("row id exceeds u32 range"))
    }
}

/// Contiguous row-major `f32` vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingColumn {
    dim: usize,
    values: Arc<Vec<f32>>,
}

impl EmbeddingColumn {
    pub fn new(dim: usize, values: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("embedding dimension must be >= 1".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values is not a multiple of dimension {dim}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!(
                "non-finite embedding value at row {}",
                pos / dim
            )));
        }
        Ok(EmbeddingColumn {
            dim,
            values: Arc::new(values),
        })
    }

    pub fn empty(dim: usize) -> Self {
        EmbeddingColumn {
            dim,
            values: Arc::new(Vec::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn byte_size(&self) -> u64 {
        (self.values.len() * 4) as u64
    }

    pub fn take(&self, rows: &[usize]) -> Self {
        let mut out = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            out.extend_from_slice(self.row(r));
        }
        EmbeddingColumn {
            dim: self.dim,
            values: Arc::new(out),
        }
    }

    /// Rows `[start, end)` as a new column.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        EmbeddingColumn {
            dim: self.dim,
            values: Arc::new(self.values[start * self.dim..end * self.dim].to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Int64(Vec<i64>),
    Float64(Vec<f64>),
    Utf8(Vec<String>),
    Date32(Vec<i32>),
    Embedding(EmbeddingColumn),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int64(v) => v.len(),
            ColumnData::Float64(v) => v.len(),
            ColumnData::Utf8(v) => v.len(),
            ColumnData::Date32(v) => v.len(),
            ColumnData::Embedding(e) => e.count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DataType {
        match self {
            ColumnData::Int64(_) => DataType::Int64,
            ColumnData::Float64(_) => DataType::Float64,
            ColumnData::Utf8(_) => DataType::Utf8,
            ColumnData::Date32(_) => DataType::Date32,
            ColumnData::Embedding(e) => DataType::Embedding(e.dim()),
        }
    }

    fn empty_of(dtype: DataType) -> Self {
        match dtype {
            DataType::Int64 => ColumnData::Int64(Vec::new()),
            DataType::Float64 => ColumnData::Float64(Vec::new()),
            DataType::Utf8 => ColumnData::Utf8(Vec::new()),
            DataType::Date32 => ColumnData::Date32(Vec::new()),
            DataType::Embedding(d) => ColumnData::Embedding(EmbeddingColumn::empty(d)),
        }
    }

    /// Gather with optional indices; `None` yields a default placeholder that
    /// the caller must mark invalid.
    fn take_opt(&self, rows: &[Option<usize>]) -> Self {
        fn pick<T: Clone + Default>(v: &[T], rows: &[Option<usize>]) -> Vec<T> {
            rows.iter()
                .map(|r| r.map(|i| v[i].clone()).unwrap_or_default())
                .collect()
        }
        match self {
            ColumnData::Int64(v) => ColumnData::Int64(pick(v, rows)),
            ColumnData::Float64(v) => ColumnData::Float64(pick(v, rows)),
            ColumnData::Utf8(v) => ColumnData::Utf8(pick(v, rows)),
            ColumnData::Date32(v) => ColumnData::Date32(pick(v, rows)),
            ColumnData::Embedding(e) => {
                let mut out = Vec::with_capacity(rows.len() * e.dim());
                for r in rows {
                    match r {
                        Some(i) => out.extend_from_slice(e.row(*i)),
                        None => out.extend(std::iter::repeat_n(0.0, e.dim())),
                    }
                }
                ColumnData::Embedding(EmbeddingColumn {
                    dim: e.dim(),
                    values: Arc::new(out),
                })
            }
        }
    }

    fn take(&self, rows: &[usize]) -> Self {
        fn pick<T: Clone>(v: &[T], rows: &[usize]) -> Vec<T> {
            rows.iter().map(|&i| v[i].clone()).collect()
        }
        match self {
            ColumnData::Int64(v) => ColumnData::Int64(pick(v, rows)),
            ColumnData::Float64(v) => ColumnData::Float64(pick(v, rows)),
            ColumnData::Utf8(v) => ColumnData::Utf8(pick(v, rows)),
            ColumnData::Date32(v) => ColumnData::Date32(pick(v, rows)),
            ColumnData::Embedding(e) => ColumnData::Embedding(e.take(rows)),
        }
    }

    fn append(&mut self, other: &ColumnData) {
        match (self, other) {
            (ColumnData::Int64(a), ColumnData::Int64(b)) => a.extend_from_slice(b),
            (ColumnData::Float64(a), ColumnData::Float64(b)) => a.extend_from_slice(b),
            (ColumnData::Utf8(a), ColumnData::Utf8(b)) => a.extend_from_slice(b),
            (ColumnData::Date32(a), ColumnData::Date32(b)) => a.extend_from_slice(b),
            (ColumnData::Embedding(a), ColumnData::Embedding(b)) => {
                let mut v = a.values.as_ref().clone();
                v.extend_from_slice(b.values());
                a.values = Arc::new(v);
            }
            _ => unreachable!("append on mismatched column types"),
        }
    }
}

/// A column plus an optional validity sequence (`false` = null).
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    data: ColumnData,
    validity: Option<Vec<bool>>,
}

impl Column {
    pub fn new(data: ColumnData) -> Self {
        Column {
            data,
            validity: None,
        }
    }

    pub fn with_validity(data: ColumnData, validity: Vec<bool>) -> Result<Self> {
        if validity.len() != data.len() {
            return Err(Error::Shape(format!(
                "validity length {} != column length {}",
                validity.len(),
                data.len()
            )));
        }
        let validity = if validity.iter().all(|v| *v) {
            None
        } else {
            Some(validity)
        };
        Ok(Column { data, validity })
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dtype(&self) -> DataType {
        self.data.dtype()
    }

    pub fn is_valid(&self, row: usize) -> bool {
        self.validity.as_ref().is_none_or(|v| v[row])
    }

    pub fn null_count(&self) -> usize {
        self.validity
            .as_ref()
            .map_or(0, |v| v.iter().filter(|x| !**x).count())
    }

    pub fn value(&self, row: usize) -> Value {
        if !self.is_valid(row) {
            return Value::Null;
        }
        match &self.data {
            ColumnData::Int64(v) => Value::Int(v[row]),
            ColumnData::Float64(v) => Value::Float(v[row]),
            ColumnData::Utf8(v) => Value::Str(v[row].clone()),
            ColumnData::Date32(v) => Value::Date(v[row]),
            ColumnData::Embedding(_) => Value::Null,
        }
    }

    pub fn as_i64(&self) -> Option<&[i64]> {
        match &self.data {
            ColumnData::Int64(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Float64(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Utf8(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_embedding(&self) -> Option<&EmbeddingColumn> {
        match &self.data {
            ColumnData::Embedding(e) => Some(e),
            _ => None,
        }
    }

    /// Payload bytes as moved over an interconnect: fixed-width values,
    /// string bytes plus 4-byte offsets, and one validity byte per row when
    /// nulls are present.
    pub fn byte_size(&self) -> u64 {
        let payload = match &self.data {
            ColumnData::Int64(v) => v.len() as u64 * 8,
            ColumnData::Float64(v) => v.len() as u64 * 8,
            ColumnData::Date32(v) => v.len() as u64 * 4,
            ColumnData::Utf8(v) => v.iter().map(|s| s.len() as u64 + 4).sum(),
            ColumnData::Embedding(e) => e.byte_size(),
        };
        payload + self.validity.as_ref().map_or(0, |v| v.len() as u64)
    }

    pub fn take(&self, rows: &[usize]) -> Column {
        Column {
            data: self.data.take(rows),
            validity: self
                .validity
                .as_ref()
                .map(|v| rows.iter().map(|&i| v[i]).collect()),
        }
    }

    pub fn take_opt(&self, rows: &[Option<usize>]) -> Column {
        let validity: Vec<bool> = rows
            .iter()
            .map(|r| r.is_some_and(|i| self.is_valid(i)))
            .collect();
        let validity = if validity.iter().all(|v| *v) {
            None
        } else {
            Some(validity)
        };
        Column {
            data: self.data.take_opt(rows),
            validity,
        }
    }
}

/// Scalar value used by expressions, grouping keys and row inspection.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Int(i64),
    Float(f64),
    Str(String),
    Date(i32),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Date(d) => Some(*d as f64),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Int(_) | Value::Float(_) => 1,
            Value::Date(_) => 2,
            Value::Str(_) => 3,
        }
    }

    /// Total order: nulls first, numbers compared by value (ints exactly,
    /// floats by IEEE total order), then dates, then strings.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Int(a), Value::Float(b)) => (*a as f64).total_cmp(b),
            (Value::Float(a), Value::Int(b)) => a.total_cmp(&(*b as f64)),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => f.write_str(s),
            Value::Date(d) => f.write_str(&format_date(*d)),
        }
    }
}

/// Hashable, totally ordered wrapper used for join and grouping keys.
#[derive(Debug, Clone)]
pub struct KeyValue(pub Value);

impl PartialEq for KeyValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for KeyValue {}

impl PartialOrd for KeyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KeyValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::hash::Hash for KeyValue {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match &self.0 {
            Value::Null => 0u8.hash(state),
            // Int and Float compare equal across types, so both hash via f64 bits.
            Value::Int(i) => (*i as f64).to_bits().hash(state),
            Value::Float(x) => x.to_bits().hash(state),
            Value::Date(d) => d.hash(state),
            Value::Str(s) => s.hash(state),
        }
    }
}

/// Days since 1970-01-01 for a proleptic Gregorian date.
pub fn days_from_civil(year: i32, month: u32, day: u32) -> i32 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let m = month as i32;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + day as i32 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

pub fn civil_from_days(days: i32) -> (i32, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

pub fn format_date(days: i32) -> String {
    let (y, m, d) = civil_from_days(days);
    format!("{y:04}-{m:02}-{d:02}")
}

pub fn parse_date(s: &str) -> Option<i32> {
    let mut it = s.split('-');
    let y: i32 = it.next()?.parse().ok()?;
    let m: u32 = it.next()?.parse().ok()?;
    let d: u32 = it.next()?.parse().ok()?;
    if it.next().is_some() || !(1..=12).contains(&m) || !(1..=31).contains(&d) {
        return None;
    }
    Some(days_from_civil(y, m, d))
}

/// Immutable columnar table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Arc<Schema>,
    columns: Vec<Arc<Column>>,
    row_count: usize,
}

impl Table {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        Self::from_arcs(Arc::new(schema), columns.into_iter().map(Arc::new).collect())
    }

    pub fn from_arcs(schema: Arc<Schema>, columns: Vec<Arc<Column>>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::schema(format!(
                "{} fields but {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let row_count = columns.first().map_or(0, |c| c.len());
        for (f, c) in schema.fields().iter().zip(&columns) {
            if c.dtype() != f.dtype {
                return Err(Error::schema(format!(
                    "field `{}` declared {} but column is {}",
                    f.name,
                    f.dtype,
                    c.dtype()
                )));
            }
            if c.len() != row_count {
                return Err(Error::Shape(format!(
                    "column `{}` has {} rows, expected {row_count}",
                    f.name,
                    c.len()
                )));
            }
        }
        Ok(Table {
            schema,
            columns,
            row_count,
        })
    }

    pub fn empty(schema: Schema) -> Self {
        let columns = schema
            .fields()
            .iter()
            .map(|f| Arc::new(Column::new(ColumnData::empty_of(f.dtype))))
            .collect();
        Table {
            schema: Arc::new(schema),
            columns,
            row_count: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Arc<Column>] {
        &self.columns
    }

    pub fn column_at(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        let i = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::schema(format!("unknown field `{name}`")))?;
        Ok(&self.columns[i])
    }

    pub fn embedding(&self, name: &str) -> Result<&EmbeddingColumn> {
        self.column(name)?
            .as_embedding()
            .ok_or_else(|| Error::schema(format!("field `{name}` is not an embedding column")))
    }

    pub fn row(&self, i: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(i)).collect()
    }

    pub fn byte_size(&self) -> u64 {
        self.columns.iter().map(|c| c.byte_size()).sum()
    }

    /// Gather rows by position without bounds checks beyond slice indexing.
    pub fn take(&self, rows: &[usize]) -> Table {
        Table {
            schema: Arc::clone(&self.schema),
            columns: self.columns.iter().map(|c| Arc::new(c.take(rows))).collect(),
            row_count: rows.len(),
        }
    }

    pub fn take_opt(&self, rows: &[Option<usize>]) -> Table {
        Table {
            schema: Arc::clone(&self.schema),
            columns: self
                .columns
                .iter()
                .map(|c| Arc::new(c.take_opt(rows)))
                .collect(),
            row_count: rows.len(),
        }
    }

    /// Append columns of `other` (same row count) after this table's columns.
    pub fn hstack(&self, other: &Table) -> Result<Table> {
        if self.row_count != other.row_count {
            return Err(Error::Shape(format!(
                "hstack of {} and {} rows",
                self.row_count, other.row_count
            )));
        }
        let mut fields = self.schema.fields().to_vec();
        fields.extend_from_slice(other.schema.fields());
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        Table::from_arcs(Arc::new(Schema::new(fields)?), columns)
    }

    pub fn with_column(&self, field: Field, column: Column) -> Result<Table> {
        let mut fields = self.schema.fields().to_vec();
        fields.push(field);
        let mut columns = self.columns.clone();
        columns.push(Arc::new(column));
        Table::from_arcs(Arc::new(Schema::new(fields)?), columns)
    }

    /// Rename every field through `f`.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Result<Table> {
        let fields = self
            .schema
            .fields()
            .iter()
            .map(|x| Field::new(f(&x.name), x.dtype))
            .collect();
        Table::from_arcs(Arc::new(Schema::new(fields)?), self.columns.clone())
    }
}

/// Rows of `table` in the order given by `rows`; duplicates allowed.
pub fn gather(table: &Table, rows: &[RowId]) -> Result<Table> {
    let mut idx = Vec::with_capacity(rows.len());
    for r in rows {
        if r.index() >= table.row_count() {
            return Err(Error::Bounds {
                index: r.index(),
                rows: table.row_count(),
            });
        }
        idx.push(r.index());
    }
    Ok(table.take(&idx))
}

/// Restrict and reorder columns to `keep`.
pub fn project(table: &Table, keep: &[&str]) -> Result<Table> {
    let mut fields = Vec::with_capacity(keep.len());
    let mut columns = Vec::with_capacity(keep.len());
    for name in keep {
        let i = table
            .schema()
            .index_of(name)
            .ok_or_else(|| Error::schema(format!("unknown field `{name}`")))?;
        fields.push(table.schema().fields()[i].clone());
        columns.push(Arc::clone(&table.columns()[i]));
    }
    let mut t = Table::from_arcs(Arc::new(Schema::new(fields)?), columns)?;
    t.row_count = table.row_count();
    Ok(t)
}

/// Vertical concatenation. `schema` is used when `parts` is empty.
pub fn concat(parts: &[Table], schema: &Schema) -> Result<Table> {
    let Some(first) = parts.first() else {
        return Ok(Table::empty(schema.clone()));
    };
    for p in parts {
        if p.schema() != first.schema() {
            return Err(Error::schema("concat of tables with different schemas"));
        }
    }
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    let mut columns = Vec::with_capacity(first.schema().len());
    for ci in 0..first.schema().len() {
        let mut data = first.columns()[ci].data().clone();
        let mut validity: Vec<bool> = (0..first.row_count())
            .map(|r| first.columns()[ci].is_valid(r))
            .collect();
        for p in &parts[1..] {
            let c = &p.columns()[ci];
            data.append(c.data());
            validity.extend((0..p.row_count()).map(|r| c.is_valid(r)));
        }
        columns.push(Column::with_validity(data, validity)?);
    }
    Table::new(first.schema().clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Table {
        let schema = Schema::new(vec![
            Field::new("a", DataType::Int64),
            Field::new("b", DataType::Utf8),
            Field::new("c", DataType::Float64),
            Field::new("e", DataType::Embedding(2)),
        ])
        .unwrap();
        let emb: Vec<f32> = (0..n).flat_map(|i| [i as f32, -(i as f32)]).collect();
        Table::new(
            schema,
            vec![
                Column::new(ColumnData::Int64((0..n as i64).collect())),
                Column::new(ColumnData::Utf8((0..n).map(|i| format!("s{i}")).collect())),
                Column::new(ColumnData::Float64((0..n).map(|i| i as f64 * 0.5).collect())),
                Column::new(ColumnData::Embedding(EmbeddingColumn::new(2, emb).unwrap())),
            ],
        )
        .unwrap()
    }

    #[test]
    fn gather_permutes_rows() {
        let t = sample(3);
        let g = gather(&t, &[RowId(2), RowId(0)]).unwrap();
        assert_eq!(g.row_count(), 2);
        assert_eq!(g.row(0), t.row(2));
        assert_eq!(g.row(1), t.row(0));
        assert_eq!(g.embedding("e").unwrap().row(0), &[2.0, -2.0]);
    }

    #[test]
    fn gather_empty_keeps_schema() {
        let t = sample(3);
        let g = gather(&t, &[]).unwrap();
        assert_eq!(g.row_count(), 0);
        assert_eq!(g.schema(), t.schema());
    }

    #[test]
    fn gather_duplicates_match_per_row_copy() {
        let t = sample(5);
        let g = gather(&t, &[RowId(1), RowId(1), RowId(1)]).unwrap();
        for i in 0..3 {
            assert_eq!(g.row(i), t.row(1));
            assert_eq!(g.embedding("e").unwrap().row(i), t.embedding("e").unwrap().row(1));
        }
    }

    #[test]
    fn gather_out_of_range() {
        let t = sample(3);
        assert!(matches!(
            gather(&t, &[RowId(3)]),
            Err(Error::Bounds { index: 3, rows: 3 })
        ));
    }

    #[test]
    fn project_reorders_and_is_idempotent() {
        let t = sample(4);
        let p = project(&t, &["c", "a"]).unwrap();
        let names: Vec<_> = p.schema().fields().iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["c", "a"]);
        assert_eq!(p.row_count(), 4);
        let all = project(&t, &["a", "b", "c", "e"]).unwrap();
        assert_eq!(all, t);
        let once = project(&t, &["b"]).unwrap();
        assert_eq!(project(&once, &["b"]).unwrap(), once);
        assert!(matches!(project(&t, &["zz"]), Err(Error::Schema(_))));
    }

    #[test]
    fn concat_cases() {
        let a = sample(2);
        let b = sample(3);
        let c = concat(&[a.clone(), b.clone()], a.schema()).unwrap();
        assert_eq!(c.row_count(), 5);
        assert_eq!(c.row(4), b.row(2));
        assert_eq!(c.embedding("e").unwrap().row(3), &[1.0, -1.0]);
        assert_eq!(concat(std::slice::from_ref(&a), a.schema()).unwrap(), a);
        let e = concat(&[], a.schema()).unwrap();
        assert_eq!(e.row_count(), 0);
        let other = project(&a, &["a"]).unwrap();
        assert!(concat(&[a, other], b.schema()).is_err());
    }

    #[test]
    fn schema_rejects_duplicates_and_zero_dim() {
        assert!(Schema::new(vec![
            Field::new("x", DataType::Int64),
            Field::new("x", DataType::Utf8)
        ])
        .is_err());
        assert!(Schema::new(vec![Field::new("e", DataType::Embedding(0))]).is_err());
    }

    #[test]
    fn embedding_rejects_non_finite() {
        assert!(EmbeddingColumn::new(2, vec![1.0, f32::NAN]).is_err());
        assert!(EmbeddingColumn::new(2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn dates_round_trip() {
        for s in ["1970-01-01", "1992-01-01", "1998-12-31", "2000-02-29"] {
            assert_eq!(format_date(parse_date(s).unwrap()), s);
        }
        assert_eq!(parse_date("1970-01-02"), Some(1));
    }
}
