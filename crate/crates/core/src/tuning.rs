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


//! Search-breadth tuning: the smallest `nprobe` / `ef` meeting the recall and
//! revenue-error targets on every built-in query.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::{quality, ExecContext, Execution};
use crate::metrics::QualityReport;
use crate::strategy::{run_strategy, Strategy};
use crate::vecops::{IndexKind, VectorIndex};
use crate::workload::{builtin_plan, PlanParams, VsMode, QUERIES};

pub const RECALL_TARGET: f64 = 0.95;
pub const REL_ERR_TARGET: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TunePoint {
    pub mode: VsMode,
    /// `nprobe` for IVF, `ef` for the graph.
    pub setting: usize,
    pub qualities: Vec<QualityReport>,
}

impl TunePoint {
    pub fn min_recall(&self) -> Option<f64> {
        self.qualities.iter().filter_map(|q| q.recall).reduce(f64::min)
    }

    pub fn max_rel_err(&self) -> Option<f64> {
        self.qualities.iter().filter_map(|q| q.rel_err).reduce(f64::max)
    }

    pub fn meets_targets(&self) -> bool {
        self.qualities.iter().all(|q| {
            q.recall.is_none_or(|r| r >= RECALL_TARGET) && q.rel_err.is_none_or(|e| e <= REL_ERR_TARGET)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub mode: VsMode,
    /// Candidates evaluated in ascending order, up to and including the first
    /// one meeting the targets.
    pub trace: Vec<TunePoint>,
    pub minimal: Option<usize>,
}

impl TuneResult {
    pub fn chosen(&self) -> Option<&TunePoint> {
        self.trace.last().filter(|p| p.meets_targets())
    }
}

/// Powers of two below `nlist`, then `nlist` itself, for the smallest IVF
/// list count among the registry's indexes.
pub fn nprobe_candidates(ctx: &ExecContext<'_>) -> Vec<usize> {
    let nlist = ctx
        .indexes
        .iter()
        .filter_map(|(_, _, ix)| match ix {
            VectorIndex::Ivf(i) => Some(i.nlist()),
            _ => None,
        })
        .min()
        .unwrap_or(1);
    ladder(1, nlist)
}

/// Powers of two from `k` up to the smallest graph-indexed table, then the
/// table size itself.
pub fn ef_candidates(ctx: &ExecContext<'_>, k: usize) -> Vec<usize> {
    let n = ctx
        .indexes
        .iter()
        .filter(|(_, _, ix)| ix.kind() == IndexKind::Graph)
        .map(|(_, _, ix)| ix.count())
        .min()
        .unwrap_or(k);
    ladder(k.next_power_of_two(), n.max(k))
}

fn ladder(start: usize, end: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut v = start.max(1);
    while v < end {
        out.push(v);
        v *= 2;
    }
    out.push(end);
    out
}

fn exact_runs(ctx: &ExecContext<'_>, params: &PlanParams) -> Result<Vec<Execution>> {
    QUERIES
        .iter()
        .map(|q| run_strategy(&builtin_plan(q, VsMode::Enn, params)?, Strategy::Cpu, ctx))
        .collect()
}

/// Scores one setting on all built-in queries against `exact`.
pub fn evaluate(
    ctx: &ExecContext<'_>,
    params: &PlanParams,
    mode: VsMode,
    setting: usize,
    exact: &[Execution],
) -> Result<TunePoint> {
    let mut p = params.clone();
    match mode {
        VsMode::Ivf => p.nprobe = setting,
        VsMode::Graph => p.ef = setting,
        VsMode::Enn => return Err(Error::param("exact search has no breadth to tune")),
    }
    let mut qualities = Vec::with_capacity(QUERIES.len());
    for (q, enn) in QUERIES.iter().zip(exact) {
        let ann = run_strategy(&builtin_plan(q, mode, &p)?, Strategy::Cpu, ctx)?;
        qualities.push(quality(q, &ann, enn)?);
    }
    Ok(TunePoint {
        mode,
        setting,
        qualities,
    })
}

/// Walks the candidate ladder of each approximate mode upward and stops at
/// the first setting meeting every target.
pub fn tune(ctx: &ExecContext<'_>, params: &PlanParams) -> Result<Vec<TuneResult>> {
    let exact = exact_runs(ctx, params)?;
    let mut out = Vec::new();
    for mode in [VsMode::Ivf, VsMode::Graph] {
        let candidates = match mode {
            VsMode::Ivf => nprobe_candidates(ctx),
            _ => ef_candidates(ctx, params.k),
        };
        let mut res = TuneResult {
            mode,
            trace: Vec::new(),
            minimal: None,
        };
        for c in candidates {
            let point = evaluate(ctx, params, mode, c, &exact)?;
            let ok = point.meets_targets();
            res.trace.push(point);
            if ok {
                res.minimal = Some(c);
                break;
            }
        }
        out.push(res);
    }
    Ok(out)
}

/// Tab-separated record of every evaluated setting.
pub fn render_tuning(results: &[TuneResult]) -> String {
    let mut s = String::from("mode\tsetting\tquery\trecall\trel_err\tmeets\tminimal\n");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    for r in results {
        for p in &r.trace {
            let minimal = r.minimal == Some(p.setting);
            for q in &p.qualities {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.mode,
                    p.setting,
                    q.query,
                    opt(q.recall),
                    opt(q.rel_err),
                    p.meets_targets(),
                    minimal
                );
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_ends_at_bound() {
        assert_eq!(ladder(1, 8), vec![1, 2, 4, 8]);
        assert_eq!(ladder(1, 6), vec![1, 2, 4, 6]);
        assert_eq!(ladder(16, 40), vec![16, 32, 40]);
        assert_eq!(ladder(5, 5), vec![5]);
    }
}
