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

//! Relational operators over [`Table`]s.
//!
//! Every operator is a pure function of its inputs and produces rows in a
//! deterministic order: filters keep input order, joins emit left-row order
//! with matches in right-row order, aggregation emits groups sorted by key
//! tuple and sorts are stable.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::columnar::{Column, ColumnData, DataType, Field, KeyValue, Schema, Table, Value};
use crate::error::{Error, Result};
use crate::expr::{bind, bind_predicate, Expr};

/// Rows for which `predicate` is true, in input order.
pub fn filter(table: &Table, predicate: &Expr) -> Result<Table> {
    let p = bind_predicate(predicate, table.schema())?;
    let keep: Vec<usize> = (0..table.row_count()).filter(|&r| p.test(table, r)).collect();
    if keep.len() == table.row_count() {
        return Ok(table.clone());
    }
    Ok(table.take(&keep))
}

/// Append one computed column per `(name, expr)`.
pub fn compute(table: &Table, exprs: &[(String, Expr)]) -> Result<Table> {
    let mut out = table.clone();
    for (name, e) in exprs {
        let b = bind(e, out.schema())?;
        let dtype = b.ty().data_type().unwrap_or(DataType::Int64);
        let column = b.eval_column(&out)?;
        out = out.with_column(Field::new(name.clone(), dtype), column)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinKind {
    Inner,
    Left,
    Semi,
    Anti,
}

impl fmt::Display for JoinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JoinKind::Inner => "inner",
            JoinKind::Left => "left",
            JoinKind::Semi => "semi",
            JoinKind::Anti => "anti",
        })
    }
}

impl FromStr for JoinKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "inner" => JoinKind::Inner,
            "left" => JoinKind::Left,
            "semi" => JoinKind::Semi,
            "anti" => JoinKind::Anti,
            _ => return Err(Error::param(format!("unknown join kind `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinSpec {
    pub kind: JoinKind,
    pub left_keys: Vec<String>,
    pub right_keys: Vec<String>,
}

impl JoinSpec {
    pub fn new(kind: JoinKind, left: &[&str], right: &[&str]) -> Self {
        JoinSpec {
            kind,
            left_keys: left.iter().map(|s| s.to_string()).collect(),
            right_keys: right.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn key_columns<'a>(t: &'a Table, keys: &[String]) -> Result<Vec<&'a Column>> {
    keys.iter().map(|k| t.column(k)).collect()
}

fn row_key(cols: &[&Column], row: usize) -> Option<Vec<KeyValue>> {
    let mut key = Vec::with_capacity(cols.len());
    for c in cols {
        let v = c.value(row);
        if v.is_null() {
            return None;
        }
        key.push(KeyValue(v));
    }
    Some(key)
}

/// Hash join with the right side as build side.
pub fn hash_join(left: &Table, right: &Table, spec: &JoinSpec) -> Result<Table> {
    if spec.left_keys.len() != spec.right_keys.len() || spec.left_keys.is_empty() {
        return Err(Error::schema("join key lists must be non-empty and of equal length"));
    }
    let lcols = key_columns(left, &spec.left_keys)?;
    let rcols = key_columns(right, &spec.right_keys)?;
    for ((lk, rk), (lc, rc)) in spec
        .left_keys
        .iter()
        .zip(&spec.right_keys)
        .zip(lcols.iter().zip(&rcols))
    {
        if lc.dtype() != rc.dtype() || matches!(lc.dtype(), DataType::Embedding(_)) {
            return Err(Error::schema(format!(
                "join key type mismatch: `{lk}` is {} but `{rk}` is {}",
                lc.dtype(),
                rc.dtype()
            )));
        }
    }

    let mut build: HashMap<Vec<KeyValue>, Vec<usize>> = HashMap::new();
    for r in 0..right.row_count() {
        if let Some(k) = row_key(&rcols, r) {
            build.entry(k).or_default().push(r);
        }
    }

    match spec.kind {
        JoinKind::Semi | JoinKind::Anti => {
            let want = spec.kind == JoinKind::Semi;
            let keep: Vec<usize> = (0..left.row_count())
                .filter(|&l| {
                    let hit = row_key(&lcols, l).is_some_and(|k| build.contains_key(&k));
                    hit == want
                })
                .collect();
            Ok(if keep.len() == left.row_count() {
                left.clone()
            } else {
                left.take(&keep)
            })
        }
        JoinKind::Inner | JoinKind::Left => {
            let mut li = Vec::new();
            let mut ri: Vec<Option<usize>> = Vec::new();
            for l in 0..left.row_count() {
                match row_key(&lcols, l).and_then(|k| build.get(&k)) {
                    Some(matches) => {
                        for &r in matches {
                            li.push(l);
                            ri.push(Some(r));
                        }
                    }
                    None if spec.kind == JoinKind::Left => {
                        li.push(l);
                        ri.push(None);
                    }
                    None => {}
                }
            }
            let lt = left.take(&li);
            let rt = right.take_opt(&ri);
            lt.hstack(&rt).map_err(|e| match e {
                Error::Schema(m) => Error::schema(format!("join output: {m}")),
                other => other,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFunc {
    Sum,
    Count,
    Min,
    Max,
    Avg,
}

impl fmt::Display for AggFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggFunc::Sum => "sum",
            AggFunc::Count => "count",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
            AggFunc::Avg => "avg",
        })
    }
}

impl FromStr for AggFunc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sum" => AggFunc::Sum,
            "count" => AggFunc::Count,
            "min" => AggFunc::Min,
            "max" => AggFunc::Max,
            "avg" => AggFunc::Avg,
            _ => return Err(Error::param(format!("unknown aggregate `{s}`"))),
        })
    }
}

/// One aggregate output. `input = None` is `count(*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub func: AggFunc,
    pub input: Option<String>,
    pub output: String,
}

impl Aggregate {
    pub fn new(func: AggFunc, input: &str, output: &str) -> Self {
        Aggregate {
            func,
            input: if input == "*" { None } else { Some(input.to_string()) },
            output: output.to_string(),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) as {}",
            self.func,
            self.input.as_deref().unwrap_or("*"),
            self.output
        )
    }
}

impl FromStr for Aggregate {
    type Err = Error;

    /// `func(input) as output`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("malformed aggregate `{s}`"));
        let open = s.find('(').ok_or_else(bad)?;
        let close = s.find(')').ok_or_else(bad)?;
        let func: AggFunc = s[..open].trim().parse()?;
        let input = s[open + 1..close].trim();
        let rest = s[close + 1..].trim();
        let output = rest
            .strip_prefix("as ")
            .or_else(|| rest.strip_prefix("AS "))
            .ok_or_else(bad)?
            .trim();
        if input.is_empty() || output.is_empty() {
            return Err(bad());
        }
        Ok(Aggregate::new(func, input, output))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggSpec {
    pub group_keys: Vec<String>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone)]
enum Acc {
    SumInt(i64, bool),
    SumFloat(f64, bool),
    Count(i64),
    Extreme(Option<Value>),
    Avg(f64, i64),
}

impl Acc {
    fn finish(self) -> Value {
        match self {
            Acc::SumInt(s, any) => if any { Value::Int(s) } else { Value::Null },
            Acc::SumFloat(s, any) => if any { Value::Float(s) } else { Value::Null },
            Acc::Count(c) => Value::Int(c),
            Acc::Extreme(v) => v.unwrap_or(Value::Null),
            Acc::Avg(s, n) => if n > 0 { Value::Float(s / n as f64) } else { Value::Null },
        }
    }
}

fn column_from_values(dtype: DataType, vals: Vec<Value>) -> Result<Column> {
    let valid: Vec<bool> = vals.iter().map(|v| !v.is_null()).collect();
    let data = match dtype {
        DataType::Int64 => ColumnData::Int64(
            vals.iter().map(|v| if let Value::Int(i) = v { *i } else { 0 }).collect(),
        ),
        DataType::Float64 => ColumnData::Float64(
            vals.iter().map(|v| v.as_f64().unwrap_or(0.0)).collect(),
        ),
        DataType::Date32 => ColumnData::Date32(
            vals.iter().map(|v| if let Value::Date(d) = v { *d } else { 0 }).collect(),
        ),
        DataType::Utf8 => ColumnData::Utf8(
            vals.into_iter()
                .map(|v| if let Value::Str(s) = v { s } else { String::new() })
                .collect(),
        ),
        DataType::Embedding(_) => return Err(Error::schema("cannot aggregate embeddings")),
    };
    Column::with_validity(data, valid)
}

/// Group-by aggregation. Groups are emitted sorted by key tuple; with no
/// group keys exactly one row is produced.
pub fn group_aggregate(table: &Table, spec: &AggSpec) -> Result<Table> {
    let mut names: Vec<&str> = spec.group_keys.iter().map(String::as_str).collect();
    for a in &spec.aggregates {
        if names.contains(&a.output.as_str()) {
            return Err(Error::schema(format!("duplicate aggregate output `{}`", a.output)));
        }
        names.push(&a.output);
    }
    let key_cols = key_columns(table, &spec.group_keys)?;
    let mut inputs: Vec<Option<&Column>> = Vec::with_capacity(spec.aggregates.len());
    let mut out_fields: Vec<Field> = spec
        .group_keys
        .iter()
        .zip(&key_cols)
        .map(|(k, c)| Field::new(k.clone(), c.dtype()))
        .collect();
    let mut init: Vec<Acc> = Vec::with_capacity(spec.aggregates.len());
    for a in &spec.aggregates {
        let c = match &a.input {
            Some(name) => Some(table.column(name)?),
            None if a.func == AggFunc::Count => None,
            None => return Err(Error::schema(format!("{}(*) is not supported", a.func))),
        };
        let dt = c.map(|c| c.dtype());
        if matches!(dt, Some(DataType::Embedding(_))) {
            return Err(Error::schema("cannot aggregate embeddings"));
        }
        let (acc, out_dt) = match (a.func, dt) {
            (AggFunc::Count, _) => (Acc::Count(0), DataType::Int64),
            (AggFunc::Sum, Some(DataType::Int64)) => (Acc::SumInt(0, false), DataType::Int64),
            (AggFunc::Sum, Some(DataType::Float64)) => (Acc::SumFloat(0.0, false), DataType::Float64),
            (AggFunc::Avg, Some(t)) if t.is_numeric() => (Acc::Avg(0.0, 0), DataType::Float64),
            (AggFunc::Min | AggFunc::Max, Some(t)) => (Acc::Extreme(None), t),
            (f, t) => {
                return Err(Error::schema(format!("{f} not defined for {t:?}")));
            }
        };
        inputs.push(c);
        init.push(acc);
        out_fields.push(Field::new(a.output.clone(), out_dt));
    }

    let mut groups: BTreeMap<Vec<KeyValue>, usize> = BTreeMap::new();
    let mut accs: Vec<Vec<Acc>> = Vec::new();
    if spec.group_keys.is_empty() {
        groups.insert(Vec::new(), 0);
        accs.push(init.clone());
    }
    for r in 0..table.row_count() {
        let key: Vec<KeyValue> = key_cols.iter().map(|c| KeyValue(c.value(r))).collect();
        let g = match groups.get(&key) {
            Some(&g) => g,
            None => {
                let g = accs.len();
                groups.insert(key, g);
                accs.push(init.clone());
                g
            }
        };
        for ((acc, input), a) in accs[g].iter_mut().zip(&inputs).zip(&spec.aggregates) {
            let v = match input {
                Some(c) => c.value(r),
                None => Value::Int(1),
            };
            if v.is_null() {
                continue;
            }
            match acc {
                Acc::Count(n) => *n += 1,
                Acc::SumInt(s, any) => {
                    if let Value::Int(i) = v {
                        *s = s.wrapping_add(i);
                        *any = true;
                    }
                }
                Acc::SumFloat(s, any) => {
                    *s += v.as_f64().unwrap_or(0.0);
                    *any = true;
                }
                Acc::Avg(s, n) => {
                    *s += v.as_f64().unwrap_or(0.0);
                    *n += 1;
                }
                Acc::Extreme(cur) => {
                    let better = match cur {
                        None => true,
                        Some(c) => {
                            let o = v.total_cmp(c);
                            if a.func == AggFunc::Min {
                                o == Ordering::Less
                            } else {
                                o == Ordering::Greater
                            }
                        }
                    };
                    if better {
                        *cur = Some(v);
                    }
                }
            }
        }
    }

    let ncols = out_fields.len();
    let mut cols: Vec<Vec<Value>> = vec![Vec::with_capacity(groups.len()); ncols];
    let mut accs: Vec<Option<Vec<Acc>>> = accs.into_iter().map(Some).collect();
    for (key, g) in groups {
        for (i, k) in key.into_iter().enumerate() {
            cols[i].push(k.0);
        }
        let nk = spec.group_keys.len();
        for (j, acc) in accs[g].take().unwrap().into_iter().enumerate() {
            cols[nk + j].push(acc.finish());
        }
    }
    let columns = out_fields
        .iter()
        .zip(cols)
        .map(|(f, v)| column_from_values(f.dtype, v))
        .collect::<Result<Vec<_>>>()?;
    Table::new(Schema::new(out_fields)?, columns)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortKey {
    pub field: String,
    pub descending: bool,
}

impl SortKey {
    pub fn asc(field: &str) -> Self {
        SortKey {
            field: field.to_string(),
            descending: false,
        }
    }

    pub fn desc(field: &str) -> Self {
        SortKey {
            field: field.to_string(),
            descending: true,
        }
    }
}

impl fmt::Display for SortKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, if self.descending { "desc" } else { "asc" })
    }
}

impl FromStr for SortKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        let field = it.next().ok_or_else(|| Error::param("empty sort key"))?;
        let descending = match it.next() {
            None | Some("asc") => false,
            Some("desc") => true,
            Some(o) => return Err(Error::param(format!("bad sort direction `{o}`"))),
        };
        Ok(SortKey {
            field: field.to_string(),
            descending,
        })
    }
}

/// Stable lexicographic sort, then keep the first `limit` rows.
pub fn sort_limit(table: &Table, keys: &[SortKey], limit: Option<usize>) -> Result<Table> {
    let cols = keys
        .iter()
        .map(|k| table.column(&k.field))
        .collect::<Result<Vec<_>>>()?;
    let mut idx: Vec<usize> = (0..table.row_count()).collect();
    if !keys.is_empty() {
        let vals: Vec<Vec<Value>> = cols
            .iter()
            .map(|c| (0..table.row_count()).map(|r| c.value(r)).collect())
            .collect();
        idx.sort_by(|&a, &b| {
            for (k, v) in keys.iter().zip(&vals) {
                let o = v[a].total_cmp(&v[b]);
                let o = if k.descending { o.reverse() } else { o };
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        });
    }
    if let Some(l) = limit {
        idx.truncate(l);
    }
    Ok(table.take(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn t(keys: &[i64], vals: &[f64], prefix: &str) -> Table {
        let schema = Schema::new(vec![
            Field::new(format!("{prefix}k"), DataType::Int64),
            Field::new(format!("{prefix}v"), DataType::Float64),
        ])
        .unwrap();
        Table::new(
            schema,
            vec![
                Column::new(ColumnData::Int64(keys.to_vec())),
                Column::new(ColumnData::Float64(vals.to_vec())),
            ],
        )
        .unwrap()
    }

    #[test]
    fn filter_identity_and_empty() {
        let a = t(&[1, 2, 3], &[1.0, 2.0, 3.0], "");
        assert_eq!(filter(&a, &Expr::Bool(true)).unwrap(), a);
        assert_eq!(filter(&a, &Expr::Bool(false)).unwrap().row_count(), 0);
        assert!(filter(&a, &parse("k + 1").unwrap()).is_err());
    }

    #[test]
    fn semi_all_match_and_anti_empty_right() {
        let l = t(&[1, 2, 2], &[0.1, 0.2, 0.3], "l");
        let r = t(&[2, 1], &[0.0, 0.0], "r");
        let s = hash_join(&l, &r, &JoinSpec::new(JoinKind::Semi, &["lk"], &["rk"])).unwrap();
        assert_eq!(s, l);
        let empty = t(&[], &[], "r");
        let a = hash_join(&l, &empty, &JoinSpec::new(JoinKind::Anti, &["lk"], &["rk"])).unwrap();
        assert_eq!(a, l);
    }

    #[test]
    fn inner_join_with_duplicates_orders_deterministically() {
        let l = t(&[1, 2, 2, 3], &[0.1, 0.2, 0.3, 0.4], "l");
        let r = t(&[2, 2, 3], &[9.0, 8.0, 7.0], "r");
        let j = hash_join(&l, &r, &JoinSpec::new(JoinKind::Inner, &["lk"], &["rk"])).unwrap();
        let rows: Vec<(f64, f64)> = (0..j.row_count())
            .map(|i| (j.column("lv").unwrap().as_f64().unwrap()[i], j.column("rv").unwrap().as_f64().unwrap()[i]))
            .collect();
        assert_eq!(rows, [(0.2, 9.0), (0.2, 8.0), (0.3, 9.0), (0.3, 8.0), (0.4, 7.0)]);
    }

    #[test]
    fn left_join_null_flags_unmatched() {
        let l = t(&[1, 2], &[0.1, 0.2], "l");
        let r = t(&[2], &[5.0], "r");
        let j = hash_join(&l, &r, &JoinSpec::new(JoinKind::Left, &["lk"], &["rk"])).unwrap();
        assert_eq!(j.row_count(), 2);
        assert_eq!(j.row(0)[2], Value::Null);
        assert_eq!(j.row(1)[3], Value::Float(5.0));
    }

    #[test]
    fn join_key_type_mismatch() {
        let l = t(&[1], &[0.1], "l");
        let r = t(&[1], &[0.1], "r");
        let e = hash_join(&l, &r, &JoinSpec::new(JoinKind::Inner, &["lk"], &["rv"]));
        assert!(matches!(e, Err(Error::Schema(_))));
    }

    #[test]
    fn aggregate_basics() {
        let empty = t(&[], &[], "");
        let spec = AggSpec {
            group_keys: vec!["k".into()],
            aggregates: vec![Aggregate::new(AggFunc::Count, "*", "n")],
        };
        assert_eq!(group_aggregate(&empty, &spec).unwrap().row_count(), 0);

        let one = t(&[7, 7], &[1.0, 2.5], "");
        let spec = AggSpec {
            group_keys: vec!["k".into()],
            aggregates: vec![
                Aggregate::new(AggFunc::Sum, "v", "s"),
                Aggregate::new(AggFunc::Min, "v", "lo"),
                Aggregate::new(AggFunc::Avg, "v", "mean"),
            ],
        };
        let g = group_aggregate(&one, &spec).unwrap();
        assert_eq!(g.row(0), vec![Value::Int(7), Value::Float(3.5), Value::Float(1.0), Value::Float(1.75)]);

        let global = AggSpec {
            group_keys: vec![],
            aggregates: vec![Aggregate::new(AggFunc::Sum, "v", "s")],
        };
        assert_eq!(group_aggregate(&empty, &global).unwrap().row(0), vec![Value::Null]);
    }

    #[test]
    fn aggregate_parse_display() {
        let a: Aggregate = "count(*) as n".parse().unwrap();
        assert_eq!(a.input, None);
        assert_eq!(a.to_string().parse::<Aggregate>().unwrap(), a);
        assert!("sum(x)".parse::<Aggregate>().is_err());
    }

    #[test]
    fn sort_is_stable_with_limit() {
        let a = t(&[3, 1, 2, 1], &[0.0, 1.0, 2.0, 3.0], "");
        let s = sort_limit(&a, &[SortKey::asc("k")], None).unwrap();
        assert_eq!(s.column("v").unwrap().as_f64().unwrap(), &[1.0, 3.0, 2.0, 0.0]);
        let s = sort_limit(&a, &[SortKey::desc("k")], Some(2)).unwrap();
        assert_eq!(s.column("k").unwrap().as_i64().unwrap(), &[3, 2]);
        assert_eq!(sort_limit(&a, &[SortKey::asc("k")], Some(0)).unwrap().row_count(), 0);
        let sorted = t(&[1, 2, 3], &[0.0, 0.0, 0.0], "");
        assert_eq!(sort_limit(&sorted, &[SortKey::asc("k")], None).unwrap(), sorted);
    }
}
