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


//! Plan interpreter with simulated placement accounting.
//!
//! Every operator runs on the host. Node devices and transfer nodes only
//! drive the cost trace: relational and vector work is charged at the
//! profile's host or device rate, transfers through the interconnect model.

use std::collections::{HashMap, HashSet};

use crate::columnar::{Column, ColumnData, DataType, Field, Schema, Table};
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::metrics::{self, QualityReport, RunReport};
use crate::placement::{
    account_run, transfer_cost, Artifact, ArtifactKind, Category, DeviceKind, HardwareProfile, MemoryBudget,
    ResidencyState, TraceEntry, TransferReport,
};
use crate::relops::{self, AggSpec, Aggregate, JoinKind, JoinSpec, SortKey};
use crate::vecops::graph::DEFAULT_DEGREE;
use crate::vecops::operator::postfilter_output;
use crate::vecops::{
    graph_build, ivf_build, vector_search_operator, DataSide, FlatIndex, IndexKind, Layout, Metric, SearchParams,
    Shortfall, VectorIndex, VsSpec,
};
use crate::workload::plans::{QUERY_EMBEDDING, QUERY_ID};
use crate::workload::{make_query_vectors, Dataset, OpKind, PlanNode, PlanSpec, VectorKind};

/// Fallback marker recorded when a device search exceeds the top-k cap.
pub const FALLBACK_TOPK_CAP: &str = "topk_cap";

/// Largest power of two not above `sqrt(n)`.
pub fn auto_nlist(n: usize) -> usize {
    let r = (n as f64).sqrt().floor() as usize;
    if r <= 1 {
        1
    } else {
        1 << (usize::BITS - 1 - r.leading_zeros())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexConfig {
    pub metric: Metric,
    /// `None` picks [`auto_nlist`] per table.
    pub nlist: Option<usize>,
    pub degree: usize,
    pub layout: Layout,
    pub seed: u64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            metric: Metric::SquaredL2,
            nlist: None,
            degree: DEFAULT_DEGREE,
            layout: Layout::NonOwning,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone)]
struct IndexEntry {
    table: String,
    field: String,
    index: VectorIndex,
}

/// Prebuilt indexes addressed by (table, embedding field, kind).
#[derive(Debug, Clone, Default)]
pub struct IndexRegistry {
    entries: Vec<IndexEntry>,
}

impl IndexRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: &str, field: &str, index: VectorIndex) {
        let kind = index.kind();
        self.entries
            .retain(|e| !(e.table == table && e.field == field && e.index.kind() == kind));
        self.entries.push(IndexEntry {
            table: table.to_string(),
            field: field.to_string(),
            index,
        });
    }

    pub fn get(&self, table: &str, field: &str, kind: IndexKind) -> Result<&VectorIndex> {
        self.entries
            .iter()
            .find(|e| e.table == table && e.field == field && e.index.kind() == kind)
            .map(|e| &e.index)
            .ok_or_else(|| Error::param(format!("no {kind} index on {table}.{field}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &VectorIndex)> {
        self.entries.iter().map(|e| (e.table.as_str(), e.field.as_str(), &e.index))
    }

    /// Builds `kinds` over both embedding tables of `ds`.
    pub fn build(ds: &Dataset, kinds: &[IndexKind], cfg: &IndexConfig) -> Result<Self> {
        let mut reg = IndexRegistry::new();
        for (table, field) in [("reviews", "rv_embedding"), ("images", "i_embedding")] {
            let data = ds.table(table)?.embedding(field)?;
            for &kind in kinds {
                let index = match kind {
                    IndexKind::Flat => VectorIndex::Flat(FlatIndex {
                        data: data.clone(),
                        metric: cfg.metric,
                    }),
                    IndexKind::Ivf => {
                        let nlist = cfg.nlist.unwrap_or_else(|| auto_nlist(data.count()));
                        VectorIndex::Ivf(ivf_build(data, nlist, cfg.metric, cfg.seed, cfg.layout)?)
                    }
                    IndexKind::Graph => {
                        let g = graph_build(data, cfg.degree, cfg.metric, cfg.seed)?;
                        VectorIndex::Graph(g.with_layout(cfg.layout))
                    }
                };
                reg.insert(table, field, index);
            }
        }
        Ok(reg)
    }
}

/// Inputs shared by every run of a plan.
pub struct ExecContext<'a> {
    pub dataset: &'a Dataset,
    pub indexes: &'a IndexRegistry,
    pub profile: &'a HardwareProfile,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub output: Table,
    pub trace: Vec<TraceEntry>,
    pub shortfalls: Vec<Shortfall>,
    pub report: RunReport,
}

impl Execution {
    pub fn shortfall_rows(&self) -> usize {
        self.shortfalls.iter().map(|s| s.missing).sum()
    }
}

#[derive(Clone)]
enum Value<'a> {
    Table(Table),
    Index(&'a VectorIndex),
}

fn split_alias(item: &str) -> (&str, Option<&str>) {
    match item.rfind(" as ") {
        Some(i) => (item[..i].trim(), Some(item[i + 4..].trim())),
        None => (item.trim(), None),
    }
}

fn project_items(t: &Table, items: &[String]) -> Result<Table> {
    let names: Vec<(&str, &str)> = items
        .iter()
        .map(|it| {
            let (src, alias) = split_alias(it);
            (src, alias.unwrap_or(src))
        })
        .collect();
    let mut seen = HashSet::new();
    for (_, out) in &names {
        if !seen.insert(*out) {
            return Err(Error::schema(format!("projection produces `{out}` twice")));
        }
    }
    let cols: Vec<Column> = names
        .iter()
        .map(|(src, _)| t.column(src).cloned())
        .collect::<Result<_>>()?;
    let fields = names
        .iter()
        .zip(&cols)
        .map(|((_, out), c)| Field::new(*out, c.dtype()))
        .collect();
    Table::new(Schema::new(fields)?, cols)
}

fn query_table(ds: &Dataset, node: &PlanNode) -> Result<Table> {
    let kind: VectorKind = node.str_param("vectors")?.parse()?;
    let n = node.int_param("n")?;
    if n <= 0 {
        return Err(Error::param(format!("node `{}` needs n > 0", node.id)));
    }
    let seed = node.int_param("seed")? as u64;
    let q = make_query_vectors(ds, kind, n as usize, seed)?;
    let dim = q.dim();
    Table::new(
        Schema::new(vec![
            Field::new(QUERY_ID, DataType::Int64),
            Field::new(QUERY_EMBEDDING, DataType::Embedding(dim)),
        ])?,
        vec![
            Column::new(ColumnData::Int64((0..n).collect())),
            Column::new(ColumnData::Embedding(q)),
        ],
    )
}

fn embedding_fields(t: &Table) -> Vec<&Field> {
    t.schema()
        .fields()
        .iter()
        .filter(|f| matches!(f.dtype, DataType::Embedding(_)))
        .collect()
}

fn embedding_bytes(t: &Table) -> u64 {
    embedding_fields(t)
        .iter()
        .map(|f| t.column(&f.name).map_or(0, |c| c.byte_size()))
        .sum()
}

/// Runs `plan`, falling back to an all-host run when a device search hits
/// the top-k cap.
pub fn execute(plan: &PlanSpec, ctx: &ExecContext<'_>) -> Result<Execution> {
    match run(plan, ctx) {
        Err(Error::CapExceeded { .. }) => {
            let mut host = host_only(plan);
            host.annotate("fallback", crate::workload::ParamValue::str(FALLBACK_TOPK_CAP));
            run(&host, ctx)
        }
        other => other,
    }
}

/// The same plan with every node on the host and all transfers removed.
pub fn host_only(plan: &PlanSpec) -> PlanSpec {
    let mut through: HashMap<String, String> = HashMap::new();
    for n in plan.nodes_of(OpKind::Transfer) {
        through.insert(n.id.clone(), n.inputs[0].clone());
    }
    let resolve = |mut id: String| {
        while let Some(src) = through.get(&id) {
            id = src.clone();
        }
        id
    };
    let mut out = plan.clone();
    out.nodes = plan
        .nodes
        .iter()
        .filter(|n| n.kind != OpKind::Transfer)
        .map(|n| {
            let mut n = n.clone();
            n.device = Some(DeviceKind::Host);
            n.inputs = n.inputs.into_iter().map(&resolve).collect();
            n.params.retain(|(k, _)| k != "stream");
            n
        })
        .collect();
    out
}

fn run(plan: &PlanSpec, ctx: &ExecContext<'_>) -> Result<Execution> {
    let order = plan.topo_order()?;
    let sink = plan.sink()?.id.clone();
    let profile = ctx.profile;
    let cm = &profile.compute;
    let mut values: HashMap<&str, Value<'_>> = HashMap::new();
    let mut remaining: HashMap<&str, usize> = HashMap::new();
    for n in &plan.nodes {
        for i in &n.inputs {
            *remaining.entry(i.as_str()).or_default() += 1;
        }
    }
    let mut trace = Vec::new();
    let mut shortfalls = Vec::new();
    let mut budget = MemoryBudget::new(profile.device_capacity_bytes);
    let mut streamed: HashSet<&str> = HashSet::new();

    for idx in order {
        let node = &plan.nodes[idx];
        let device = node.device.unwrap_or_default();
        let on_device = device == DeviceKind::Device;
        let table_in = |i: usize| -> Result<&Table> {
            match values.get(node.inputs[i].as_str()) {
                Some(Value::Table(t)) => Ok(t),
                _ => Err(Error::param(format!(
                    "node `{}` input `{}` is not a table",
                    node.id, node.inputs[i]
                ))),
            }
        };
        let mut rel_rows = 0u64;
        let value = match node.kind {
            OpKind::Scan => Value::Table(ctx.dataset.table(node.str_param("table")?)?.clone()),
            OpKind::Query => Value::Table(query_table(ctx.dataset, node)?),
            OpKind::Index => {
                let kind: IndexKind = node.str_param("index")?.parse()?;
                Value::Index(ctx.indexes.get(node.str_param("table")?, node.str_param("field")?, kind)?)
            }
            OpKind::Filter => {
                let t = table_in(0)?;
                let out = relops::filter(t, &expr::parse(node.str_param("pred")?)?)?;
                rel_rows = (t.row_count() + out.row_count()) as u64;
                Value::Table(out)
            }
            OpKind::Project => {
                let t = table_in(0)?;
                let out = project_items(t, &node.list_param("cols")?)?;
                rel_rows = t.row_count() as u64;
                Value::Table(out)
            }
            OpKind::Compute => {
                let t = table_in(0)?;
                let exprs = node
                    .list_param("exprs")?
                    .iter()
                    .map(|e| match split_alias(e) {
                        (src, Some(name)) => Ok((name.to_string(), expr::parse(src)?)),
                        _ => Err(Error::param(format!("compute item `{e}` needs `as NAME`"))),
                    })
                    .collect::<Result<Vec<(String, Expr)>>>()?;
                let out = relops::compute(t, &exprs)?;
                rel_rows = (t.row_count() * exprs.len().max(1)) as u64;
                Value::Table(out)
            }
            OpKind::Join => {
                let (l, r) = (table_in(0)?, table_in(1)?);
                let kind: JoinKind = node.str_param("how")?.parse()?;
                let lk = node.list_param("left")?;
                let rk = node.list_param("right")?;
                let lk: Vec<&str> = lk.iter().map(String::as_str).collect();
                let rk: Vec<&str> = rk.iter().map(String::as_str).collect();
                let out = relops::hash_join(l, r, &JoinSpec::new(kind, &lk, &rk))?;
                rel_rows = (l.row_count() + r.row_count() + out.row_count()) as u64;
                Value::Table(out)
            }
            OpKind::Aggregate => {
                let t = table_in(0)?;
                let spec = AggSpec {
                    group_keys: node.list_param("keys")?,
                    aggregates: node
                        .list_param("aggs")?
                        .iter()
                        .map(|a| a.parse::<Aggregate>())
                        .collect::<Result<_>>()?,
                };
                let out = relops::group_aggregate(t, &spec)?;
                rel_rows = (t.row_count() + out.row_count()) as u64;
                Value::Table(out)
            }
            OpKind::Sort => {
                let t = table_in(0)?;
                let keys = node
                    .list_param("by")?
                    .iter()
                    .map(|k| k.parse::<SortKey>())
                    .collect::<Result<Vec<_>>>()?;
                let limit = node.opt_int("limit")?.map(|l| l.max(0) as usize);
                let out = relops::sort_limit(t, &keys, limit)?;
                let n = t.row_count().max(2) as f64;
                rel_rows = (t.row_count() as f64 * n.log2()).ceil() as u64;
                Value::Table(out)
            }
            OpKind::VectorSearch => {
                let query = table_in(0)?;
                let data = table_in(1)?;
                let metric: Metric = node.get("metric").and_then(|v| v.as_str()).unwrap_or("squared_l2").parse()?;
                let k_prime = node.int_param("k_prime")?.max(0) as usize;
                let mut params = SearchParams::new(k_prime);
                params.gpu_topk_cap = profile.gpu_topk_cap;
                if let Some(np) = node.opt_int("nprobe")? {
                    params = params.with_nprobe(np.max(0) as usize);
                }
                if let Some(ef) = node.opt_int("ef")? {
                    params = params.with_ef((ef.max(0) as usize).max(k_prime));
                }
                let spec = VsSpec {
                    metric,
                    on_device,
                    ..VsSpec::new(node.str_param("query_field")?, params)
                };
                let field = node.str_param("field")?;
                let (side, kind, dim) = if node.inputs.len() == 3 {
                    let index = match values.get(node.inputs[2].as_str()) {
                        Some(Value::Index(i)) => *i,
                        _ => return Err(Error::param(format!("node `{}` third input must be an index", node.id))),
                    };
                    if index.metric() != metric {
                        return Err(Error::param(format!(
                            "node `{}` searches with {metric} but its index uses {}",
                            node.id,
                            index.metric()
                        )));
                    }
                    (DataSide::Index { table: data, index }, index.kind(), index.dim())
                } else {
                    let dim = data.embedding(field)?.dim();
                    (DataSide::Scan { table: data, field }, IndexKind::Flat, dim)
                };
                let (out, nt) = vector_search_operator(query, side, &spec)?;
                let st = nt.stats;
                trace.push(TraceEntry::compute(
                    &node.id,
                    "vector_search",
                    device,
                    Category::VectorSearch,
                    cm.vs_seconds(kind, dim, st.distance_evals, st.centroid_evals, on_device),
                ));
                let data_streamed = streamed.contains(node.inputs[1].as_str()) || node.flag("stream");
                if on_device && data_streamed {
                    let bytes = st.rows_read * dim as u64 * 4;
                    let secs = profile.stream_seconds(bytes);
                    trace.push(TraceEntry::movement(
                        &format!("{}/stream", node.id),
                        Category::DataMovement,
                        TransferReport {
                            n_calls: 0,
                            bytes,
                            t_htod: secs,
                            t_total: secs,
                            ..Default::default()
                        },
                    ));
                }
                trace.push(TraceEntry::compute(
                    &node.id,
                    "vector_search",
                    device,
                    Category::Residual,
                    cm.node_overhead_s,
                ));
                Value::Table(out)
            }
            OpKind::Postfilter => {
                let t = table_in(0)?;
                let k = node.int_param("k")?.max(0) as usize;
                let (out, short) = postfilter_output(t, &expr::parse(node.str_param("pred")?)?, k)?;
                shortfalls.extend(short);
                trace.push(TraceEntry::compute(
                    &node.id,
                    "postfilter",
                    device,
                    Category::VectorSearch,
                    cm.rel_seconds(t.row_count() as u64, on_device),
                ));
                trace.push(TraceEntry::compute(&node.id, "postfilter", device, Category::Residual, cm.node_overhead_s));
                Value::Table(out)
            }
            OpKind::Transfer => {
                let input = values
                    .get(node.inputs[0].as_str())
                    .cloned()
                    .ok_or_else(|| Error::param(format!("node `{}` has no input value", node.id)))?;
                let from: DeviceKind = node.str_param("from")?.parse()?;
                let to: DeviceKind = node.str_param("to")?.parse()?;
                let mut state = ResidencyState::new();
                if node.flag("pinned") {
                    state = crate::placement::apply_pinning(state, &node.id);
                }
                if node.flag("cached") {
                    state = crate::placement::apply_transform_cache(state, &node.id);
                }
                let mut moves: Vec<(Category, Artifact)> = Vec::new();
                match &input {
                    Value::Index(index) => {
                        let structure_only = node.str_param("layout")? == "structure";
                        let layout = if structure_only { Layout::NonOwning } else { Layout::Owning };
                        let mut a = Artifact::of_index(node.id.clone(), index, layout, structure_only);
                        if index.kind() == IndexKind::Flat {
                            a.kind = ArtifactKind::Embeddings;
                        }
                        moves.push((Category::IndexMovement, a));
                    }
                    Value::Table(t) => {
                        let emb_mode = node.get("emb").and_then(|v| v.as_str()).unwrap_or("copy");
                        let emb = embedding_fields(t);
                        let emb_bytes = embedding_bytes(t);
                        let (mut columns, mut bytes) = (t.schema().len() - emb.len(), t.byte_size() - emb_bytes);
                        if !emb.is_empty() {
                            match emb_mode {
                                "copy" => {
                                    columns += emb.len();
                                    bytes += emb_bytes;
                                }
                                "stream" => {
                                    streamed.insert(node.id.as_str());
                                }
                                "none" => {}
                                other => return Err(Error::param(format!("unknown embedding mode `{other}`"))),
                            }
                        }
                        moves.push((
                            Category::DataMovement,
                            Artifact::new(node.id.clone(), ArtifactKind::Table { columns }, bytes),
                        ));
                    }
                }
                for (cat, a) in moves {
                    if a.bytes == 0 && matches!(a.kind, ArtifactKind::Table { columns: 0 }) {
                        continue;
                    }
                    let rep = transfer_cost(&a, from, to, profile, &state)?;
                    if to == DeviceKind::Device && !profile.unified {
                        budget.place(&a.id, a.bytes)?;
                    }
                    trace.push(TraceEntry::movement(&node.id, cat, rep));
                }
                input
            }
        };
        if node.kind.is_relational() {
            trace.push(TraceEntry::compute(
                &node.id,
                node.kind.name(),
                device,
                Category::Relational,
                cm.rel_seconds(rel_rows, on_device),
            ));
            trace.push(TraceEntry::compute(&node.id, node.kind.name(), device, Category::Residual, cm.node_overhead_s));
        }
        // Rows streamed into a device relational operator.
        if on_device && node.kind.is_relational() {
            let streamed_bytes: u64 = node
                .inputs
                .iter()
                .filter(|i| streamed.contains(i.as_str()))
                .filter_map(|i| match values.get(i.as_str()) {
                    Some(Value::Table(t)) => Some(embedding_bytes(t)),
                    _ => None,
                })
                .sum();
            if streamed_bytes > 0 {
                let secs = profile.stream_seconds(streamed_bytes);
                trace.push(TraceEntry::movement(
                    &format!("{}/stream", node.id),
                    Category::DataMovement,
                    TransferReport {
                        bytes: streamed_bytes,
                        t_htod: secs,
                        t_total: secs,
                        ..Default::default()
                    },
                ));
            }
        }
        for i in &node.inputs {
            if let Some(r) = remaining.get_mut(i.as_str()) {
                *r -= 1;
                if *r == 0 && *i != sink {
                    values.remove(i.as_str());
                }
            }
        }
        values.insert(node.id.as_str(), value);
    }
    let output = match values.remove(sink.as_str()) {
        Some(Value::Table(t)) => t,
        _ => return Err(Error::param("plan sink must produce a table")),
    };
    let mut report = account_run(&trace);
    let ann = |k: &str| plan.annotation(k).and_then(|v| v.as_str()).map(str::to_string);
    report.query = plan.name.clone();
    report.strategy = ann("strategy").unwrap_or_else(|| "cpu".into());
    report.profile = profile.name.clone();
    report.vs_mode = ann("vs_mode").unwrap_or_default();
    report.seed = ctx.dataset.spec.seed;
    report.fallback = ann("fallback");
    Ok(Execution {
        output,
        trace,
        shortfalls,
        report,
    })
}

/// Output quality of `ann` against the exact run of the same query: relative
/// revenue error for Q19, multiset recall otherwise.
pub fn quality(query: &str, ann: &Execution, enn: &Execution) -> Result<QualityReport> {
    let mut q = QualityReport {
        query: query.to_string(),
        shortfall: ann.shortfall_rows(),
        ..Default::default()
    };
    if query.eq_ignore_ascii_case("Q19") {
        let rev = |t: &Table| -> Result<f64> {
            Ok(match t.column("revenue")?.value(0) {
                crate::columnar::Value::Float(x) => x,
                crate::columnar::Value::Int(i) => i as f64,
                _ => 0.0,
            })
        };
        q.rel_err = metrics::rel_err(rev(&ann.output)?, rev(&enn.output)?);
    } else {
        let keys = metrics::default_recall_keys(&enn.output);
        q.recall = metrics::recall(&ann.output, &enn.output, &keys)?;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nlist_is_power_of_two_below_sqrt() {
        assert_eq!(auto_nlist(0), 1);
        assert_eq!(auto_nlist(24_000), 128);
        assert_eq!(auto_nlist(8_000), 64);
        assert_eq!(auto_nlist(16), 4);
    }

    #[test]
    fn alias_split_uses_last_as() {
        assert_eq!(split_alias("a as b"), ("a", Some("b")));
        assert_eq!(split_alias("CAST(x as INT) as y"), ("CAST(x as INT)", Some("y")));
        assert_eq!(split_alias("plain"), ("plain", None));
    }
}
