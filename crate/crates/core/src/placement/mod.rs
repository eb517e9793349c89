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


//! Simulated device placement: hardware profiles, transfer costs and run
//! accounting.

pub mod account;
pub mod profile;
pub mod transfer;

pub use account::{account_run, Category, TraceEntry};
pub use profile::{ComputeModel, HardwareProfile, BUILTIN_PROFILES};
pub use transfer::{
    apply_pinning, apply_transform_cache, enable_host_residency, transfer_cost, Artifact, ArtifactKind, DeviceKind,
    MemoryBudget, Residency, ResidencyState, TransferReport,
};
