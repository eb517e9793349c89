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


//! Hybrid relational and vector query engine with a CPU/GPU placement model.

pub mod columnar;
pub mod error;
pub mod exec;
pub mod expr;
pub mod metrics;
pub mod placement;
pub mod relops;
pub mod strategy;
pub mod tuning;
pub mod vecops;
pub mod workload;

pub use error::{Error, Result};
