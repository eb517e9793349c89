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


//! Residency tracking and the interconnect transfer model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::{Layout, VectorIndex};

use super::profile::HardwareProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    #[default]
    Host,
    Device,
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceKind::Host => "host",
            DeviceKind::Device => "device",
        })
    }
}

impl FromStr for DeviceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "host" => Ok(DeviceKind::Host),
            "device" => Ok(DeviceKind::Device),
            _ => Err(Error::param(format!("unknown device `{s}`"))),
        }
    }
}

/// What is being moved; decides the copy-call count and the call path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArtifactKind {
    /// Relational columns, one plain copy per column.
    Table { columns: usize },
    /// A contiguous embedding column (flat index payload).
    Embeddings,
    IvfOwning { nlist: usize },
    IvfStructure { nlist: usize },
    /// Graph with co-stored embeddings; `structure_bytes` of it is the
    /// neighbor matrix that needs conversion.
    GraphOwning { structure_bytes: u64 },
    GraphStructure,
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactKind::Table { columns } => write!(f, "table({columns})"),
            ArtifactKind::Embeddings => f.write_str("embeddings"),
            ArtifactKind::IvfOwning { nlist } => write!(f, "ivf_owning({nlist})"),
            ArtifactKind::IvfStructure { nlist } => write!(f, "ivf_structure({nlist})"),
            ArtifactKind::GraphOwning { structure_bytes } => write!(f, "graph_owning({structure_bytes})"),
            ArtifactKind::GraphStructure => f.write_str("graph_structure"),
        }
    }
}

impl FromStr for ArtifactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once('(') {
            Some((n, rest)) => (n, rest.strip_suffix(')').map(str::trim)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u64> {
            a.and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::Model(format!("artifact `{s}` needs a numeric argument")))
        };
        Ok(match name {
            "table" => ArtifactKind::Table { columns: num(arg)? as usize },
            "embeddings" | "flat" => ArtifactKind::Embeddings,
            "ivf_owning" => ArtifactKind::IvfOwning { nlist: num(arg)? as usize },
            "ivf_structure" => ArtifactKind::IvfStructure { nlist: num(arg)? as usize },
            "graph_owning" => ArtifactKind::GraphOwning { structure_bytes: num(arg)? },
            "graph_structure" => ArtifactKind::GraphStructure,
            _ => return Err(Error::Model(format!("unknown artifact kind `{s}`"))),
        })
    }
}

impl ArtifactKind {
    pub fn copy_calls(&self) -> u64 {
        match *self {
            ArtifactKind::Table { columns } => columns as u64,
            ArtifactKind::Embeddings => 1,
            ArtifactKind::IvfOwning { nlist } => 5 * nlist as u64 + 1,
            ArtifactKind::IvfStructure { nlist } => 3 * nlist as u64 + 1,
            ArtifactKind::GraphOwning { .. } => 2,
            ArtifactKind::GraphStructure => 1,
        }
    }

    /// Goes through the index cloner (fixed overhead plus per-call setup).
    pub fn uses_cloner(&self) -> bool {
        matches!(
            self,
            ArtifactKind::Embeddings | ArtifactKind::IvfOwning { .. } | ArtifactKind::GraphOwning { .. }
        )
    }

    pub fn is_index(&self) -> bool {
        !matches!(self, ArtifactKind::Table { .. } | ArtifactKind::Embeddings)
    }

    pub fn is_non_owning(&self) -> bool {
        matches!(self, ArtifactKind::IvfStructure { .. } | ArtifactKind::GraphStructure)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Artifact {
    pub id: String,
    pub kind: ArtifactKind,
    pub bytes: u64,
}

impl Artifact {
    pub fn new(id: impl Into<String>, kind: ArtifactKind, bytes: u64) -> Self {
        Artifact {
            id: id.into(),
            kind,
            bytes,
        }
    }

    /// The transferable form of an index: everything it holds, or only the
    /// search structure when `structure_only`.
    pub fn of_index(id: impl Into<String>, index: &VectorIndex, layout: Layout, structure_only: bool) -> Self {
        let payload = index.count() as u64 * index.dim() as u64 * 4;
        let (kind, bytes) = match index {
            VectorIndex::Flat(_) => (ArtifactKind::Embeddings, payload),
            VectorIndex::Ivf(i) => {
                if structure_only || layout == Layout::NonOwning {
                    (ArtifactKind::IvfStructure { nlist: i.nlist() }, i.structure_bytes())
                } else {
                    (
                        ArtifactKind::IvfOwning { nlist: i.nlist() },
                        i.structure_bytes() + i.id_bytes() + payload,
                    )
                }
            }
            VectorIndex::Graph(g) => {
                if structure_only || layout == Layout::NonOwning {
                    (ArtifactKind::GraphStructure, g.structure_bytes())
                } else {
                    (
                        ArtifactKind::GraphOwning {
                            structure_bytes: g.structure_bytes(),
                        },
                        g.structure_bytes() + payload,
                    )
                }
            }
        };
        Artifact::new(id, kind, bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Residency {
    pub location: DeviceKind,
    pub pinned: bool,
    pub cached_transform: bool,
    /// Searched in place from host memory by the device.
    pub host_resident: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidencyState {
    entries: BTreeMap<String, Residency>,
}

impl ResidencyState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Residency {
        self.entries.get(id).copied().unwrap_or_default()
    }

    pub fn set_location(&mut self, id: &str, location: DeviceKind) {
        self.entries.entry(id.to_string()).or_default().location = location;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Residency)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransferReport {
    pub n_calls: u64,
    pub bytes: u64,
    pub t_htod: f64,
    pub t_setup: f64,
    pub t_transform: f64,
    pub t_total: f64,
}

impl TransferReport {
    pub fn add(&mut self, o: &TransferReport) {
        self.n_calls += o.n_calls;
        self.bytes += o.bytes;
        self.t_htod += o.t_htod;
        self.t_setup += o.t_setup;
        self.t_transform += o.t_transform;
        self.t_total += o.t_total;
    }
}

pub fn transfer_cost(
    artifact: &Artifact,
    from: DeviceKind,
    to: DeviceKind,
    profile: &HardwareProfile,
    state: &ResidencyState,
) -> Result<TransferReport> {
    if from == to || profile.unified {
        return Ok(TransferReport::default());
    }
    let res = state.get(&artifact.id);
    let bw = if res.pinned {
        profile.bw_pinned_gbps
    } else {
        profile.bw_pageable_gbps
    };
    if bw.is_nan() || bw <= 0.0 {
        return Err(Error::Model(format!("profile `{}` has no usable bandwidth", profile.name)));
    }
    let kind = artifact.kind;
    let n_calls = kind.copy_calls();
    let t_setup = if kind.uses_cloner() {
        profile.clone_overhead_s + n_calls as f64 * profile.per_call_setup_s
    } else {
        n_calls as f64 * profile.direct_call_setup_s
    };
    let t_transform = if res.cached_transform {
        0.0
    } else {
        match kind {
            ArtifactKind::GraphOwning { structure_bytes } => structure_bytes as f64 * profile.graph_transform_s_per_byte,
            ArtifactKind::GraphStructure => artifact.bytes as f64 * profile.graph_transform_s_per_byte,
            ArtifactKind::IvfOwning { .. } => artifact.bytes as f64 * profile.ivf_transform_s_per_byte,
            _ => 0.0,
        }
    };
    let t_htod = artifact.bytes as f64 / (bw * 1e9);
    Ok(TransferReport {
        n_calls,
        bytes: artifact.bytes,
        t_htod,
        t_setup,
        t_transform,
        t_total: t_htod + t_setup + t_transform,
    })
}

/// Later transfers of `id` use pinned bandwidth.
pub fn apply_pinning(mut state: ResidencyState, id: &str) -> ResidencyState {
    state.entries.entry(id.to_string()).or_default().pinned = true;
    state
}

/// Later transfers of `id` skip the host-to-device index conversion.
pub fn apply_transform_cache(mut state: ResidencyState, id: &str) -> ResidencyState {
    state.entries.entry(id.to_string()).or_default().cached_transform = true;
    state
}

/// Let the device search a non-owning index in place, streaming embeddings
/// from host memory.
pub fn enable_host_residency(
    mut state: ResidencyState,
    artifact: &Artifact,
    profile: &HardwareProfile,
) -> Result<ResidencyState> {
    if !profile.coherent_host_reads {
        return Err(Error::Capability(format!(
            "profile `{}` cannot read host memory coherently from the device",
            profile.name
        )));
    }
    if artifact.kind.is_index() && !artifact.kind.is_non_owning() {
        return Err(Error::Placement(format!(
            "host residency needs a non-owning index, `{}` is {}",
            artifact.id, artifact.kind
        )));
    }
    let e = state.entries.entry(artifact.id.clone()).or_default();
    e.host_resident = true;
    e.location = DeviceKind::Host;
    Ok(state)
}

/// Device memory accounting; placements beyond capacity are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBudget {
    pub device_capacity: u64,
    usage: BTreeMap<String, u64>,
}

impl MemoryBudget {
    pub fn new(device_capacity: u64) -> Self {
        MemoryBudget {
            device_capacity,
            usage: BTreeMap::new(),
        }
    }

    pub fn used(&self) -> u64 {
        self.usage.values().sum()
    }

    pub fn fits(&self, bytes: u64) -> bool {
        self.used().saturating_add(bytes) <= self.device_capacity
    }

    pub fn place(&mut self, id: &str, bytes: u64) -> Result<()> {
        let current = self.usage.get(id).copied().unwrap_or(0);
        let after = self.used() - current + bytes;
        if after > self.device_capacity {
            return Err(Error::Placement(format!(
                "`{id}` ({bytes} B) exceeds device capacity {} B ({} B in use)",
                self.device_capacity,
                self.used() - current
            )));
        }
        self.usage.insert(id.to_string(), bytes);
        Ok(())
    }

    pub fn release(&mut self, id: &str) {
        self.usage.remove(id);
    }
}
