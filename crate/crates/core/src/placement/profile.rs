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


//! Hardware profiles and the modeled compute rates.
//!
//! Built-in interconnect constants are fitted to measured index transfer
//! times on a reviews-sized workload (2.4M x 1024 floats):
//!
//! | profile      | pageable | pinned  | per clone call | clone fixed | direct call |
//! |--------------|----------|---------|----------------|-------------|-------------|
//! | `nvlink-c2c` | 417.4    | 417.4   | 0.241617 ms    | 4.9554 ms   | 1.3 us      |
//! | `pcie5`      | 24       | 55      | 1.18975 ms     | 4.810 ms    | 10 us       |
//!
//! Bandwidths are in GB/s (1e9 bytes). Index transfers through the cloner
//! pay `clone_fixed + calls * per_clone_call`; plain buffer copies pay
//! `calls * direct_call` only.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::IndexKind;

/// Operator cost rates. Device multipliers scale the host rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComputeModel {
    pub host_rel_ns_per_row: f64,
    pub host_vs_ns_per_dimop: f64,
    /// Extra host cost per graph distance evaluation (neighbor lookups).
    pub host_graph_ns_per_eval: f64,
    pub device_rel_mult: f64,
    pub device_flat_mult: f64,
    pub device_ivf_mult: f64,
    pub device_graph_mult: f64,
    /// Fixed bookkeeping per executed plan node, reported as residual.
    pub node_overhead_s: f64,
}

impl Default for ComputeModel {
    fn default() -> Self {
        ComputeModel {
            host_rel_ns_per_row: 2.0,
            host_vs_ns_per_dimop: 0.025,
            host_graph_ns_per_eval: 0.3,
            device_rel_mult: 1.0,
            device_flat_mult: 1.0,
            device_ivf_mult: 1.0,
            device_graph_mult: 1.0,
            node_overhead_s: 5e-6,
        }
    }
}

impl ComputeModel {
    fn accelerated() -> Self {
        ComputeModel {
            device_rel_mult: 0.05,
            device_flat_mult: 0.03,
            device_ivf_mult: 0.05,
            device_graph_mult: 0.1,
            ..Default::default()
        }
    }

    pub fn vs_mult(&self, kind: IndexKind, on_device: bool) -> f64 {
        if !on_device {
            return 1.0;
        }
        match kind {
            IndexKind::Flat => self.device_flat_mult,
            IndexKind::Ivf => self.device_ivf_mult,
            IndexKind::Graph => self.device_graph_mult,
        }
    }

    pub fn rel_seconds(&self, rows: u64, on_device: bool) -> f64 {
        let m = if on_device { self.device_rel_mult } else { 1.0 };
        rows as f64 * self.host_rel_ns_per_row * 1e-9 * m
    }

    pub fn vs_seconds(&self, kind: IndexKind, dim: usize, distance_evals: u64, centroid_evals: u64, on_device: bool) -> f64 {
        let dimops = (distance_evals + centroid_evals) as f64 * dim as f64;
        let mut ns = dimops * self.host_vs_ns_per_dimop;
        if kind == IndexKind::Graph {
            ns += distance_evals as f64 * self.host_graph_ns_per_eval;
        }
        ns * 1e-9 * self.vs_mult(kind, on_device)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub name: String,
    pub bw_pageable_gbps: f64,
    pub bw_pinned_gbps: f64,
    /// Cost of one copy call issued by the index cloner.
    pub per_call_setup_s: f64,
    /// Fixed cost of one cloner invocation.
    pub clone_overhead_s: f64,
    /// Cost of one plain buffer copy call.
    pub direct_call_setup_s: f64,
    /// Host-to-device graph conversion, per byte of neighbor structure.
    pub graph_transform_s_per_byte: f64,
    /// IVF layout conversion, per payload byte.
    pub ivf_transform_s_per_byte: f64,
    pub unified: bool,
    pub coherent_host_reads: bool,
    pub ats_host_read_bw_gbps: f64,
    pub device_capacity_bytes: u64,
    pub gpu_topk_cap: usize,
    pub large_batch_threshold: usize,
    #[serde(default)]
    pub compute: ComputeModel,
}

pub const BUILTIN_PROFILES: [&str; 3] = ["nvlink-c2c", "pcie5", "unified"];

impl HardwareProfile {
    pub fn nvlink_c2c() -> Self {
        HardwareProfile {
            name: "nvlink-c2c".into(),
            bw_pageable_gbps: 417.4,
            bw_pinned_gbps: 417.4,
            per_call_setup_s: 0.241617e-3,
            clone_overhead_s: 4.9554e-3,
            direct_call_setup_s: 1.3e-6,
            graph_transform_s_per_byte: 82.29e-3 / 0.307e9,
            ivf_transform_s_per_byte: 0.0,
            unified: false,
            coherent_host_reads: true,
            ats_host_read_bw_gbps: 120.0,
            device_capacity_bytes: 96_000_000_000,
            gpu_topk_cap: 2048,
            large_batch_threshold: 1000,
            compute: ComputeModel::accelerated(),
        }
    }

    pub fn pcie5() -> Self {
        HardwareProfile {
            name: "pcie5".into(),
            bw_pageable_gbps: 24.0,
            bw_pinned_gbps: 55.0,
            per_call_setup_s: 1.18975e-3,
            clone_overhead_s: 4.810e-3,
            direct_call_setup_s: 10e-6,
            graph_transform_s_per_byte: 423.7e-3 / 0.307e9,
            ivf_transform_s_per_byte: 0.0,
            unified: false,
            coherent_host_reads: false,
            ats_host_read_bw_gbps: 0.0,
            device_capacity_bytes: 80_000_000_000,
            gpu_topk_cap: 2048,
            large_batch_threshold: 1000,
            compute: ComputeModel::accelerated(),
        }
    }

    pub fn unified() -> Self {
        HardwareProfile {
            name: "unified".into(),
            bw_pageable_gbps: 1e6,
            bw_pinned_gbps: 1e6,
            per_call_setup_s: 0.0,
            clone_overhead_s: 0.0,
            direct_call_setup_s: 0.0,
            graph_transform_s_per_byte: 0.0,
            ivf_transform_s_per_byte: 0.0,
            unified: true,
            coherent_host_reads: true,
            ats_host_read_bw_gbps: 0.0,
            device_capacity_bytes: 128_000_000_000,
            gpu_topk_cap: 2048,
            large_batch_threshold: 1000,
            compute: ComputeModel::accelerated(),
        }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "nvlink-c2c" | "nvlink" => Ok(Self::nvlink_c2c()),
            "pcie5" | "pcie" => Ok(Self::pcie5()),
            "unified" => Ok(Self::unified()),
            _ => Err(Error::param(format!(
                "unknown profile `{name}` (built-ins: {})",
                BUILTIN_PROFILES.join(", ")
            ))),
        }
    }

    /// Built-in name or path to a TOML profile file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        let p = Path::new(name_or_path);
        if p.extension().is_some_and(|e| e == "toml") || p.exists() {
            Self::load(p)
        } else {
            Self::builtin(name_or_path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.compute;
        let nonneg = [
            self.per_call_setup_s,
            self.clone_overhead_s,
            self.direct_call_setup_s,
            self.graph_transform_s_per_byte,
            self.ivf_transform_s_per_byte,
            self.ats_host_read_bw_gbps,
            c.host_rel_ns_per_row,
            c.host_vs_ns_per_dimop,
            c.host_graph_ns_per_eval,
            c.device_rel_mult,
            c.device_flat_mult,
            c.device_ivf_mult,
            c.device_graph_mult,
            c.node_overhead_s,
        ];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Model(format!("profile `{}` has a negative or non-finite cost", self.name)));
        }
        if !(self.bw_pageable_gbps > 0.0 && self.bw_pinned_gbps >= self.bw_pageable_gbps) {
            return Err(Error::Model(format!(
                "profile `{}` needs bw_pinned >= bw_pageable > 0",
                self.name
            )));
        }
        if self.coherent_host_reads && !self.unified && self.ats_host_read_bw_gbps <= 0.0 {
            return Err(Error::Model("coherent host reads need a positive read bandwidth".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: HardwareProfile = toml::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Seconds to read `bytes` from host memory during a device-side search.
    pub fn stream_seconds(&self, bytes: u64) -> f64 {
        if self.unified || bytes == 0 {
            0.0
        } else {
            bytes as f64 / (self.ats_host_read_bw_gbps * 1e9)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_and_roundtrip() {
        for n in BUILTIN_PROFILES {
            let p = HardwareProfile::builtin(n).unwrap();
            p.validate().unwrap();
            assert_eq!(HardwareProfile::from_toml(&p.to_toml().unwrap()).unwrap(), p);
        }
        assert!(HardwareProfile::builtin("tpu").is_err());
    }

    #[test]
    fn compute_section_defaults_to_host_speed() {
        let mut p = HardwareProfile::nvlink_c2c();
        p.compute = ComputeModel::default();
        let text = p.to_toml().unwrap();
        let cut = text.find("[compute]").unwrap();
        let back = HardwareProfile::from_toml(&text[..cut]).unwrap();
        assert_eq!(back.compute.device_ivf_mult, 1.0);
    }

    #[test]
    fn rejects_bad_bandwidths() {
        let mut p = HardwareProfile::pcie5();
        p.bw_pinned_gbps = 10.0;
        assert!(p.validate().is_err());
    }
}
