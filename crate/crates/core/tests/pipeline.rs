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


use hvec_core::exec::{ExecContext, IndexConfig, IndexRegistry, FALLBACK_TOPK_CAP};
use hvec_core::metrics::{emit_report, read_report};
use hvec_core::placement::{HardwareProfile, MemoryBudget};
use hvec_core::strategy::{
    choose_strategy, estimate_cost, realize, run_matrix, AnnKind, ArtifactSizes, Strategy, STRATEGIES,
};
use hvec_core::vecops::IndexKind;
use hvec_core::workload::{builtin_plan, generate, Dataset, DatasetSpec, OpKind, PlanParams, PlanSpec, VsMode, QUERIES, VS_MODES};
use hvec_core::Error;

fn small() -> (Dataset, IndexRegistry) {
    let ds = generate(&DatasetSpec {
        sf: 0.002,
        d_r: 16,
        d_i: 16,
        n_clusters: 16,
        ..DatasetSpec::default()
    })
    .unwrap();
    let reg = IndexRegistry::build(&ds, &[IndexKind::Ivf, IndexKind::Graph], &IndexConfig::default()).unwrap();
    (ds, reg)
}

fn transfers(p: &PlanSpec) -> Vec<&hvec_core::workload::PlanNode> {
    p.nodes_of(OpKind::Transfer).collect()
}

fn index_transfers(p: &PlanSpec) -> Vec<&hvec_core::workload::PlanNode> {
    transfers(p).into_iter().filter(|t| t.get("layout").is_some()).collect()
}

#[test]
fn realized_plans_follow_the_strategy_matrix() {
    let nv = HardwareProfile::nvlink_c2c();
    let plan = builtin_plan("Q16", VsMode::Ivf, &PlanParams::default()).unwrap();
    let cpu = realize(&plan, Strategy::Cpu, &nv).unwrap();
    assert!(transfers(&cpu).is_empty());
    let gpu = realize(&plan, Strategy::Gpu, &nv).unwrap();
    assert!(transfers(&gpu).is_empty());
    let hybrid = realize(&plan, Strategy::Hybrid, &nv).unwrap();
    assert!(index_transfers(&hybrid).is_empty() && !transfers(&hybrid).is_empty());

    let di = realize(&plan, Strategy::CopyDi, &nv).unwrap();
    let ix = index_transfers(&di);
    assert_eq!(ix.len(), 1);
    assert_eq!(ix[0].str_param("layout").unwrap(), "owning");

    let ci = realize(&plan, Strategy::CopyI, &nv).unwrap();
    let ix = index_transfers(&ci);
    assert_eq!(ix[0].str_param("layout").unwrap(), "structure");
    assert!(ix[0].flag("cached"));

    let gi = realize(&plan, Strategy::GpuI, &nv).unwrap();
    assert!(index_transfers(&gi).is_empty());
    assert!(gi.nodes_of(OpKind::VectorSearch).all(|n| n.flag("stream")));

    for p in [cpu, gpu, hybrid, di, ci, gi] {
        let text = p.to_string();
        assert_eq!(text.parse::<PlanSpec>().unwrap(), p, "{text}");
        assert_eq!(realize(&p, Strategy::Gpu, &nv).is_err(), !transfers(&p).is_empty());
    }
}

#[test]
fn streaming_strategies_need_coherent_reads() {
    let pcie = HardwareProfile::pcie5();
    let plan = builtin_plan("Q2", VsMode::Graph, &PlanParams::default()).unwrap();
    for s in [Strategy::CopyI, Strategy::GpuI] {
        assert!(matches!(realize(&plan, s, &pcie), Err(Error::Capability(_))));
    }
    for s in [Strategy::Cpu, Strategy::Gpu, Strategy::Hybrid, Strategy::CopyDi] {
        realize(&plan, s, &pcie).unwrap();
    }
}

#[test]
fn wide_oversampling_falls_back_to_host() {
    let nv = HardwareProfile::nvlink_c2c();
    let plan = builtin_plan("Q15", VsMode::Ivf, &PlanParams::default()).unwrap();
    let p = realize(&plan, Strategy::CopyDi, &nv).unwrap();
    assert_eq!(p.annotation("fallback").and_then(|v| v.as_str()), Some(FALLBACK_TOPK_CAP));
    assert_eq!(p.annotation("strategy").and_then(|v| v.as_str()), Some("copy_di"));
    assert!(transfers(&p).is_empty());
    let enn = builtin_plan("Q15", VsMode::Enn, &PlanParams::default()).unwrap();
    assert!(realize(&enn, Strategy::CopyDi, &nv).unwrap().annotation("fallback").is_none());
}

#[test]
fn full_matrix_reports_round_trip() {
    let (ds, reg) = small();
    let nv = HardwareProfile::nvlink_c2c();
    let ctx = ExecContext {
        dataset: &ds,
        indexes: &reg,
        profile: &nv,
    };
    let (records, skipped) = run_matrix(&ctx, &QUERIES, &VS_MODES, &STRATEGIES, &PlanParams::default()).unwrap();
    assert!(skipped.is_empty());
    assert_eq!(records.len(), 8 * 6 * 3);
    for r in &records {
        let sum = r.run.component_sum();
        assert!((sum - r.run.total).abs() <= 1e-12 * sum.max(1.0));
        assert!(r.run.relational_ops >= 0.0 && r.run.data_movement >= 0.0 && r.run.index_movement >= 0.0);
    }
    let dir = tempfile::tempdir().unwrap();
    let (runs, summary) = emit_report(&records, dir.path()).unwrap();
    let first = (std::fs::read(&runs).unwrap(), std::fs::read(&summary).unwrap());
    emit_report(&records, dir.path()).unwrap();
    assert_eq!(first, (std::fs::read(&runs).unwrap(), std::fs::read(&summary).unwrap()));
    assert_eq!(read_report(dir.path()).unwrap(), records);
}

#[test]
fn unified_memory_moves_for_free() {
    let (ds, reg) = small();
    let uni = HardwareProfile::unified();
    let ctx = ExecContext {
        dataset: &ds,
        indexes: &reg,
        profile: &uni,
    };
    for q in ["Q2", "Q19"] {
        let plan = builtin_plan(q, VsMode::Ivf, &PlanParams::default()).unwrap();
        for s in STRATEGIES {
            let r = estimate_cost(&plan, s, &ctx).unwrap();
            assert_eq!(r.movement(), 0.0, "{q} {s}");
        }
    }
}

#[test]
fn copy_di_moves_more_than_copy_i() {
    let (ds, reg) = small();
    let nv = HardwareProfile::nvlink_c2c();
    let ctx = ExecContext {
        dataset: &ds,
        indexes: &reg,
        profile: &nv,
    };
    for mode in [VsMode::Ivf, VsMode::Graph] {
        let plan = builtin_plan("Q10", mode, &PlanParams::default()).unwrap();
        let di = estimate_cost(&plan, Strategy::CopyDi, &ctx).unwrap();
        let ci = estimate_cost(&plan, Strategy::CopyI, &ctx).unwrap();
        let gi = estimate_cost(&plan, Strategy::GpuI, &ctx).unwrap();
        assert!(di.index_movement > ci.index_movement, "{mode}");
        assert_eq!(gi.index_movement, 0.0);
        assert!(di.index_copy_calls > ci.index_copy_calls || mode == VsMode::Graph);
    }
}

#[test]
fn decision_follows_memory_budget() {
    let nv = HardwareProfile::nvlink_c2c();
    let sizes = ArtifactSizes {
        index_bytes: 100,
        embedding_bytes: 1_000,
        relational_bytes: 100,
    };
    let pick = |cap, kind, batch| choose_strategy(&MemoryBudget::new(cap), &sizes, kind, batch, &nv);
    assert_eq!(pick(1_200, AnnKind::Graph, 1).chosen, Strategy::Gpu);
    assert_eq!(pick(1_199, AnnKind::Ivf, 1).chosen, Strategy::GpuI);
    assert_eq!(pick(1_199, AnnKind::Graph, 1).chosen, Strategy::Hybrid);
    let d = pick(99, AnnKind::Ivf, nv.large_batch_threshold);
    assert_eq!((d.chosen, d.alternative), (Strategy::Hybrid, Some(Strategy::CopyI)));
    assert_eq!(pick(99, AnnKind::Ivf, nv.large_batch_threshold - 1).alternative, None);
}
