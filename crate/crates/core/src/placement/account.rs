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


//! Folding an executed plan trace into a time breakdown.

use std::fmt;

use crate::metrics::RunReport;

use super::transfer::{DeviceKind, TransferReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Relational,
    VectorSearch,
    /// Tables, intermediates, flat embeddings and streamed reads.
    DataMovement,
    IndexMovement,
    Residual,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Relational => "relational",
            Category::VectorSearch => "vector_search",
            Category::DataMovement => "data_movement",
            Category::IndexMovement => "index_movement",
            Category::Residual => "residual",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub node: String,
    pub op: String,
    pub device: DeviceKind,
    pub category: Category,
    pub seconds: f64,
    pub transfer: Option<TransferReport>,
}

impl TraceEntry {
    pub fn compute(node: &str, op: &str, device: DeviceKind, category: Category, seconds: f64) -> Self {
        TraceEntry {
            node: node.to_string(),
            op: op.to_string(),
            device,
            category,
            seconds,
            transfer: None,
        }
    }

    pub fn movement(node: &str, category: Category, report: TransferReport) -> Self {
        TraceEntry {
            node: node.to_string(),
            op: "transfer".to_string(),
            device: DeviceKind::Device,
            category,
            seconds: report.t_total,
            transfer: Some(report),
        }
    }
}

/// Component totals and copy-call counts; run metadata is left for the
/// caller to fill in.
pub fn account_run(trace: &[TraceEntry]) -> RunReport {
    let mut r = RunReport::default();
    for e in trace {
        let s = e.seconds.max(0.0);
        match e.category {
            Category::Relational => r.relational_ops += s,
            Category::VectorSearch => r.vector_search += s,
            Category::DataMovement => r.data_movement += s,
            Category::IndexMovement => r.index_movement += s,
            Category::Residual => r.residual += s,
        }
        if let Some(t) = &e.transfer {
            r.copy_calls += t.n_calls;
            if e.category == Category::IndexMovement {
                r.index_copy_calls += t.n_calls;
            }
        }
    }
    r.total = r.component_sum();
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_sum_to_total() {
        let t = TransferReport {
            n_calls: 5121,
            bytes: 10,
            t_htod: 0.02,
            t_setup: 1.2,
            t_transform: 0.0,
            t_total: 1.22,
        };
        let trace = vec![
            TraceEntry::compute("a", "filter", DeviceKind::Device, Category::Relational, 0.01),
            TraceEntry::compute("b", "vector_search", DeviceKind::Device, Category::VectorSearch, 0.02),
            TraceEntry::movement("idx", Category::IndexMovement, t),
            TraceEntry::compute("a", "filter", DeviceKind::Device, Category::Residual, 5e-6),
        ];
        let r = account_run(&trace);
        assert_eq!(r.total, r.component_sum());
        assert_eq!(r.index_copy_calls, 5121);
        assert!(r.index_share() > 0.85);
        assert_eq!(r.data_movement, 0.0);
    }
}
