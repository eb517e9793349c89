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


//! Execution strategies: placement programs over a plan, the strategy
//! decision heuristic, simulated cost estimation and the batch-size sweep.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::columnar::EmbeddingColumn;
use crate::error::{Error, Result};
use crate::exec::{execute, quality, ExecContext, Execution, FALLBACK_TOPK_CAP};
use crate::metrics::{Record, RunReport};
use crate::placement::{
    apply_transform_cache, transfer_cost, Artifact, DeviceKind, HardwareProfile, MemoryBudget, ResidencyState,
};
use crate::vecops::{IndexKind, Layout, SearchParams, VectorIndex};
use crate::workload::{builtin_plan, OpKind, ParamValue, PlanNode, PlanParams, PlanSpec, VsMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Cpu,
    Gpu,
    Hybrid,
    CopyDi,
    CopyI,
    GpuI,
}

pub const STRATEGIES: [Strategy; 6] = [
    Strategy::Cpu,
    Strategy::Gpu,
    Strategy::Hybrid,
    Strategy::CopyDi,
    Strategy::CopyI,
    Strategy::GpuI,
];

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Cpu => "cpu",
            Strategy::Gpu => "gpu",
            Strategy::Hybrid => "hybrid",
            Strategy::CopyDi => "copy_di",
            Strategy::CopyI => "copy_i",
            Strategy::GpuI => "gpu_i",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        STRATEGIES
            .iter()
            .copied()
            .find(|st| st.to_string() == norm)
            .ok_or_else(|| Error::param(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    None,
    /// Moved before execution.
    Copy,
    /// Read from host memory while the operator runs.
    Stream,
}

/// One row of the strategy matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyRow {
    pub vs: DeviceKind,
    pub rel: DeviceKind,
    pub index_on: DeviceKind,
    pub emb_on: DeviceKind,
    pub rel_on: DeviceKind,
    pub index: Movement,
    pub emb: Movement,
    pub rel_data: Movement,
}

impl Strategy {
    pub fn row(self) -> StrategyRow {
        use DeviceKind::{Device as D, Host as H};
        use Movement::{Copy as C, None as N, Stream as S};
        let r = |vs, rel, index_on, emb_on, rel_on, index, emb, rel_data| StrategyRow {
            vs,
            rel,
            index_on,
            emb_on,
            rel_on,
            index,
            emb,
            rel_data,
        };
        match self {
            Strategy::Cpu => r(H, H, H, H, H, N, N, N),
            Strategy::Gpu => r(D, D, D, D, D, N, N, N),
            Strategy::Hybrid => r(H, D, H, H, H, N, N, C),
            Strategy::CopyDi => r(D, D, H, H, H, C, C, C),
            Strategy::CopyI => r(D, D, H, H, H, C, S, C),
            Strategy::GpuI => r(D, D, D, H, H, N, S, C),
        }
    }

    /// Device reads of host memory during execution.
    pub fn needs_coherent_reads(self) -> bool {
        self.row().emb == Movement::Stream
    }
}

fn emb_rank(mode: &str) -> u8 {
    match mode {
        "copy" => 2,
        "stream" => 1,
        _ => 0,
    }
}

/// Assigns devices and inserts transfer nodes for `strategy`.
///
/// A device search with `k'` above the profile's top-k cap makes the whole
/// query run on the host; the result is annotated `fallback=topk_cap`.
pub fn realize(plan: &PlanSpec, strategy: Strategy, profile: &HardwareProfile) -> Result<PlanSpec> {
    plan.validate()?;
    if plan.nodes_of(OpKind::Transfer).next().is_some() {
        return Err(Error::param(format!("plan `{}` already contains transfer nodes", plan.name)));
    }
    if strategy.needs_coherent_reads() && !profile.coherent_host_reads && !profile.unified {
        return Err(Error::Capability(format!(
            "{strategy} streams host memory from the device, which profile `{}` does not support",
            profile.name
        )));
    }
    let row = strategy.row();
    if row.vs == DeviceKind::Device {
        let over = plan
            .nodes_of(OpKind::VectorSearch)
            .any(|n| n.int_param("k_prime").is_ok_and(|k| k.max(0) as usize > profile.gpu_topk_cap));
        if over {
            let mut host = realize(plan, Strategy::Cpu, profile)?;
            host.annotate("strategy", ParamValue::str(&strategy.to_string()));
            host.annotate("fallback", ParamValue::str(FALLBACK_TOPK_CAP));
            return Ok(host);
        }
    }

    let device_of = |n: &PlanNode| -> DeviceKind {
        match n.kind {
            OpKind::Scan => row.rel_on,
            OpKind::Query => {
                if strategy == Strategy::Gpu {
                    DeviceKind::Device
                } else {
                    DeviceKind::Host
                }
            }
            OpKind::Index => row.index_on,
            OpKind::VectorSearch | OpKind::Postfilter => row.vs,
            _ => row.rel,
        }
    };
    let dev: HashMap<&str, DeviceKind> = plan.nodes.iter().map(|n| (n.id.as_str(), device_of(n))).collect();
    let kind_of: HashMap<&str, OpKind> = plan.nodes.iter().map(|n| (n.id.as_str(), n.kind)).collect();

    // (producer, target device) -> transfer node, in first-use order
    let mut transfers: Vec<PlanNode> = Vec::new();
    let mut slot: HashMap<(String, DeviceKind), usize> = HashMap::new();
    let mut rewired: Vec<PlanNode> = Vec::with_capacity(plan.nodes.len());
    let mut insert_before: HashMap<usize, Vec<usize>> = HashMap::new();

    for (ci, n) in plan.nodes.iter().enumerate() {
        let mut node = n.clone();
        node.device = Some(dev[n.id.as_str()]);
        let to = dev[n.id.as_str()];
        let indexed = n.kind == OpKind::VectorSearch && n.inputs.len() == 3;
        for (port, input) in n.inputs.iter().enumerate() {
            let from = dev[input.as_str()];
            if from == to {
                continue;
            }
            let pk = kind_of[input.as_str()];
            let emb_need = match pk {
                OpKind::Index => "",
                OpKind::Scan if n.kind == OpKind::VectorSearch && port == 1 => {
                    if indexed {
                        "none"
                    } else if row.emb == Movement::Stream {
                        "stream"
                    } else {
                        "copy"
                    }
                }
                OpKind::Scan if n.kind.is_relational() && row.emb == Movement::Stream => "stream",
                _ => "copy",
            };
            let key = (input.clone(), to);
            let ti = match slot.get(&key) {
                Some(&ti) => ti,
                None => {
                    let id = format!("to_{to}_{input}");
                    let mut t = PlanNode::new(&id, OpKind::Transfer, &[input.as_str()])
                        .with("from", ParamValue::str(&from.to_string()))
                        .with("to", ParamValue::str(&to.to_string()));
                    t.device = Some(to);
                    if pk == OpKind::Index {
                        let structure = strategy == Strategy::CopyI;
                        t.set("layout", ParamValue::str(if structure { "structure" } else { "owning" }));
                        if structure {
                            t.set("cached", ParamValue::str("true"));
                        }
                    } else {
                        t.set("emb", ParamValue::str(emb_need));
                    }
                    transfers.push(t);
                    slot.insert(key, transfers.len() - 1);
                    insert_before.entry(ci).or_default().push(transfers.len() - 1);
                    transfers.len() - 1
                }
            };
            if pk != OpKind::Index {
                let t = &mut transfers[ti];
                let cur = t.get("emb").and_then(|v| v.as_str()).unwrap_or("none").to_string();
                if emb_rank(emb_need) > emb_rank(&cur) {
                    t.set("emb", ParamValue::str(emb_need));
                }
            }
            node.inputs[port] = transfers[ti].id.clone();
        }
        if indexed && to == DeviceKind::Device && row.emb == Movement::Stream {
            node.set("stream", ParamValue::str("true"));
        }
        rewired.push(node);
    }

    let mut out = PlanSpec {
        name: plan.name.clone(),
        annotations: plan.annotations.clone(),
        nodes: Vec::with_capacity(rewired.len() + transfers.len()),
    };
    for (ci, node) in rewired.into_iter().enumerate() {
        for &ti in insert_before.get(&ci).map(Vec::as_slice).unwrap_or(&[]) {
            out.nodes.push(transfers[ti].clone());
        }
        out.nodes.push(node);
    }
    out.annotate("strategy", ParamValue::str(&strategy.to_string()));
    out.annotate("profile", ParamValue::str(&profile.name));
    out.validate()?;
    Ok(out)
}

/// Realizes and runs `plan` under `strategy`.
pub fn run_strategy(plan: &PlanSpec, strategy: Strategy, ctx: &ExecContext<'_>) -> Result<Execution> {
    let realized = realize(plan, strategy, ctx.profile)?;
    execute(&realized, ctx)
}

/// Simulated time breakdown of `plan` under `strategy`.
pub fn estimate_cost(plan: &PlanSpec, strategy: Strategy, ctx: &ExecContext<'_>) -> Result<RunReport> {
    Ok(run_strategy(plan, strategy, ctx)?.report)
}

/// A combination the profile cannot execute, with its error.
pub type Skipped = (String, VsMode, Strategy, Error);

/// Runs every (query, mode, strategy) combination and scores each approximate
/// run against the exact cpu run of the same query.
pub fn run_matrix(
    ctx: &ExecContext<'_>,
    queries: &[&str],
    modes: &[VsMode],
    strategies: &[Strategy],
    params: &PlanParams,
) -> Result<(Vec<Record>, Vec<Skipped>)> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for q in queries {
        let exact = run_strategy(&builtin_plan(q, VsMode::Enn, params)?, Strategy::Cpu, ctx)?;
        for &mode in modes {
            let plan = builtin_plan(q, mode, params)?;
            for &s in strategies {
                let run = match run_strategy(&plan, s, ctx) {
                    Ok(run) => run,
                    Err(e @ Error::Capability(_)) => {
                        skipped.push((q.to_string(), mode, s, e));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let quality = if mode.is_exact() { None } else { Some(quality(q, &run, &exact)?) };
                records.push(Record {
                    run: run.report,
                    quality,
                });
            }
        }
    }
    Ok((records, skipped))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnKind {
    Ivf,
    Graph,
}

impl fmt::Display for AnnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnKind::Ivf => "ivf",
            AnnKind::Graph => "graph",
        })
    }
}

impl FromStr for AnnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ivf" => Ok(AnnKind::Ivf),
            "graph" | "cagra" => Ok(AnnKind::Graph),
            _ => Err(Error::param(format!("unknown index kind `{s}` (expected ivf or graph)"))),
        }
    }
}

/// Bytes the decision needs. `index_bytes` is what must stay on the device
/// for `gpu_i`: the non-owning structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArtifactSizes {
    pub index_bytes: u64,
    pub embedding_bytes: u64,
    pub relational_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rationale {
    AllFit,
    IndexFitsIvf,
    IndexFitsGraph,
    NothingFits,
    NothingFitsIvfLargeBatch,
}

impl fmt::Display for Rationale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rationale::AllFit => "data, embeddings and index fit in device memory: gpu",
            Rationale::IndexFitsIvf => "only the index fits, IVF: gpu_i",
            Rationale::IndexFitsGraph => "only the index fits, graph: hybrid",
            Rationale::NothingFits => "index does not fit: hybrid",
            Rationale::NothingFitsIvfLargeBatch => "index does not fit, IVF with a large query batch: hybrid, copy_i alternative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionInputs {
    pub fits_all: bool,
    pub fits_index: bool,
    pub index_kind: AnnKind,
    pub batch: usize,
    pub large_batch_threshold: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyDecision {
    pub chosen: Strategy,
    pub alternative: Option<Strategy>,
    pub rationale: Rationale,
    pub inputs: DecisionInputs,
}

/// The heuristic as a pure function of its inputs.
pub fn decide(inputs: DecisionInputs) -> StrategyDecision {
    let (chosen, alternative, rationale) = if inputs.fits_all {
        (Strategy::Gpu, None, Rationale::AllFit)
    } else if inputs.fits_index {
        match inputs.index_kind {
            AnnKind::Ivf => (Strategy::GpuI, None, Rationale::IndexFitsIvf),
            AnnKind::Graph => (Strategy::Hybrid, None, Rationale::IndexFitsGraph),
        }
    } else if inputs.index_kind == AnnKind::Ivf && inputs.batch >= inputs.large_batch_threshold {
        (Strategy::Hybrid, Some(Strategy::CopyI), Rationale::NothingFitsIvfLargeBatch)
    } else {
        (Strategy::Hybrid, None, Rationale::NothingFits)
    };
    StrategyDecision {
        chosen,
        alternative,
        rationale,
        inputs,
    }
}

pub fn choose_strategy(
    budget: &MemoryBudget,
    sizes: &ArtifactSizes,
    index_kind: AnnKind,
    batch: usize,
    profile: &HardwareProfile,
) -> StrategyDecision {
    let all = sizes
        .index_bytes
        .saturating_add(sizes.embedding_bytes)
        .saturating_add(sizes.relational_bytes);
    decide(DecisionInputs {
        fits_all: budget.fits(all),
        fits_index: budget.fits(sizes.index_bytes),
        index_kind,
        batch,
        large_batch_threshold: profile.large_batch_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepLine {
    Cpu,
    CopyI,
    CopyDi,
    Gpu,
    /// Owning IVF moved as one contiguous buffer.
    Theoretical,
}

impl fmt::Display for SweepLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepLine::Cpu => "cpu",
            SweepLine::CopyI => "copy_i",
            SweepLine::CopyDi => "copy_di",
            SweepLine::Gpu => "gpu",
            SweepLine::Theoretical => "theoretical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: IndexKind,
    pub batch: usize,
    pub line: SweepLine,
    pub seconds: f64,
}

/// Simulated vector-search-only time per batch size for one index.
/// `queries` must hold at least the largest batch.
pub fn crossover_sweep(
    index: &VectorIndex,
    queries: &EmbeddingColumn,
    batches: &[usize],
    params: &SearchParams,
    profile: &HardwareProfile,
) -> Result<Vec<SweepPoint>> {
    let kind = index.kind();
    if kind == IndexKind::Flat {
        return Err(Error::param("the sweep compares approximate indexes"));
    }
    let dim = index.dim();
    let cm = &profile.compute;
    let host = ResidencyState::new();
    let structure = Artifact::of_index("sweep", index, Layout::NonOwning, true);
    let owning = Artifact::of_index("sweep", index, Layout::Owning, false);
    let cached = apply_transform_cache(ResidencyState::new(), "sweep");
    let t_structure = transfer_cost(&structure, DeviceKind::Host, DeviceKind::Device, profile, &cached)?.t_total;
    let t_owning = transfer_cost(&owning, DeviceKind::Host, DeviceKind::Device, profile, &host)?.t_total;
    let bw = profile.bw_pageable_gbps * 1e9;
    let t_contiguous = if profile.unified { 0.0 } else { owning.bytes as f64 / bw };
    let mut out = Vec::new();
    for &batch in batches {
        if batch == 0 || batch > queries.count() {
            return Err(Error::param(format!(
                "batch {batch} outside 1..={} available queries",
                queries.count()
            )));
        }
        let st = index.search(&queries.slice(0, batch), params)?.stats;
        let cpu = cm.vs_seconds(kind, dim, st.distance_evals, st.centroid_evals, false);
        let gpu = cm.vs_seconds(kind, dim, st.distance_evals, st.centroid_evals, true);
        let stream = profile.stream_seconds(st.rows_read * dim as u64 * 4);
        let mut push = |line, seconds| {
            out.push(SweepPoint {
                index: kind,
                batch,
                line,
                seconds,
            })
        };
        push(SweepLine::Cpu, cpu);
        push(SweepLine::CopyI, t_structure + stream + gpu);
        push(SweepLine::CopyDi, t_owning + gpu);
        push(SweepLine::Gpu, gpu);
        if kind == IndexKind::Ivf {
            push(SweepLine::Theoretical, t_contiguous + gpu);
        }
    }
    Ok(out)
}
