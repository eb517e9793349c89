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


//! Synthetic benchmark data and the eight hybrid query plans.

pub mod gen;
pub mod io;

pub use gen::{generate, make_query_vectors, Dataset, DatasetSpec, VectorKind};
pub mod plan;
pub mod plans;

pub use plan::{parse_plan, OpKind, ParamValue, PlanNode, PlanSpec};
pub use plans::{builtin_plan, PlanParams, VsMode, QUERIES, VS_MODES};
