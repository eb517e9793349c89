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

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row id {index} out of bounds for table of {rows} rows")]
    Bounds { index: usize, rows: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    /// Requested k' exceeds the device top-k limit of a device-placed search.
    #[error("top-k cap exceeded: k'={k_prime} > cap={cap}")]
    CapExceeded { k_prime: usize, cap: usize },

    #[error("cost model error: {0}")]
    Model(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("placement rejected: {0}")]
    Placement(String),

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("plan contains a cycle through node `{0}`")]
    Cycle(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
