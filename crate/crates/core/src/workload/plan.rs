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


//! Textual operator DAGs.
//!
//! ```text
//! # comment
//! plan Q2 vs_mode=ivf k=10
//! part = op(kind=scan, inputs=[], device=any, table=part)
//! hits = op(kind=vector_search, inputs=[q, img, idx], device=any, k=10)
//! ```
//!
//! Parameter values are integers, floats, double-quoted strings (`\"` and
//! `\\` escapes), bare identifiers, or bracketed lists of values.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::placement::DeviceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Scan,
    Query,
    Index,
    Filter,
    Project,
    Compute,
    Join,
    Aggregate,
    Sort,
    VectorSearch,
    Postfilter,
    Transfer,
}

const OP_NAMES: [(OpKind, &str); 12] = [
    (OpKind::Scan, "scan"),
    (OpKind::Query, "query"),
    (OpKind::Index, "index"),
    (OpKind::Filter, "filter"),
    (OpKind::Project, "project"),
    (OpKind::Compute, "compute"),
    (OpKind::Join, "join"),
    (OpKind::Aggregate, "aggregate"),
    (OpKind::Sort, "sort"),
    (OpKind::VectorSearch, "vector_search"),
    (OpKind::Postfilter, "postfilter"),
    (OpKind::Transfer, "transfer"),
];

impl OpKind {
    pub fn name(self) -> &'static str {
        OP_NAMES.iter().find(|(k, _)| *k == self).map(|(_, n)| *n).unwrap_or("?")
    }

    /// Allowed input counts.
    pub fn arity(self) -> &'static [usize] {
        match self {
            OpKind::Scan | OpKind::Query | OpKind::Index => &[0],
            OpKind::Join => &[2],
            OpKind::VectorSearch => &[2, 3],
            _ => &[1],
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            OpKind::Filter | OpKind::Project | OpKind::Compute | OpKind::Join | OpKind::Aggregate | OpKind::Sort
        )
    }

    /// Vector-search work: the search itself and its post-filter.
    pub fn is_vector(self) -> bool {
        matches!(self, OpKind::VectorSearch | OpKind::Postfilter)
    }

    /// Sources that name stored data rather than compute anything.
    pub fn is_source(self) -> bool {
        matches!(self, OpKind::Scan | OpKind::Query | OpKind::Index)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OP_NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(k, _)| *k)
            .ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Str(String),
    Ident(String),
    List(Vec<ParamValue>),
}

impl ParamValue {
    pub fn str(s: &str) -> Self {
        if is_ident(s) {
            ParamValue::Ident(s.to_string())
        } else {
            ParamValue::Str(s.to_string())
        }
    }

    pub fn list<S: AsRef<str>>(items: &[S]) -> Self {
        ParamValue::List(items.iter().map(|s| ParamValue::str(s.as_ref())).collect())
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Str(s) | ParamValue::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(i) => Some(*i as f64),
            ParamValue::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_str_list(&self) -> Option<Vec<String>> {
        match self {
            ParamValue::List(items) => items.iter().map(|v| v.as_str().map(str::to_string)).collect(),
            _ => None,
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Ident(s) => f.write_str(s),
            ParamValue::Str(s) => {
                f.write_str("\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        _ => write!(f, "{ch}")?,
                    }
                }
                f.write_str("\"")
            }
            ParamValue::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    pub id: String,
    pub kind: OpKind,
    pub inputs: Vec<String>,
    /// `None` until a strategy assigns it.
    pub device: Option<DeviceKind>,
    pub params: Vec<(String, ParamValue)>,
}

impl PlanNode {
    pub fn new(id: &str, kind: OpKind, inputs: &[&str]) -> Self {
        PlanNode {
            id: id.to_string(),
            kind,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            device: None,
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: ParamValue) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: ParamValue) {
        match self.params.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.params.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn missing(&self, key: &str, what: &str) -> Error {
        Error::param(format!("node `{}` ({}) needs {what} parameter `{key}`", self.id, self.kind))
    }

    pub fn str_param(&self, key: &str) -> Result<&str> {
        self.get(key).and_then(ParamValue::as_str).ok_or_else(|| self.missing(key, "a string"))
    }

    pub fn int_param(&self, key: &str) -> Result<i64> {
        self.get(key).and_then(ParamValue::as_int).ok_or_else(|| self.missing(key, "an integer"))
    }

    pub fn opt_int(&self, key: &str) -> Result<Option<i64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_int().map(Some).ok_or_else(|| self.missing(key, "an integer")),
        }
    }

    pub fn list_param(&self, key: &str) -> Result<Vec<String>> {
        self.get(key)
            .and_then(ParamValue::as_str_list)
            .ok_or_else(|| self.missing(key, "a string list"))
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.get(key), Some(ParamValue::Ident(s)) if s == "true")
    }
}

impl fmt::Display for PlanNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let device = self.device.map_or_else(|| "any".to_string(), |d| d.to_string());
        write!(
            f,
            "{} = op(kind={}, inputs=[{}], device={device}",
            self.id,
            self.kind,
            self.inputs.join(", ")
        )?;
        for (k, v) in &self.params {
            write!(f, ", {k}={v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanSpec {
    pub name: String,
    pub annotations: BTreeMap<String, ParamValue>,
    pub nodes: Vec<PlanNode>,
}

impl PlanSpec {
    pub fn new(name: &str) -> Self {
        PlanSpec {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, node: PlanNode) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn node(&self, id: &str) -> Option<&PlanNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn annotate(&mut self, key: &str, value: ParamValue) {
        self.annotations.insert(key.to_string(), value);
    }

    pub fn annotation(&self, key: &str) -> Option<&ParamValue> {
        self.annotations.get(key)
    }

    pub fn nodes_of(&self, kind: OpKind) -> impl Iterator<Item = &PlanNode> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    /// Ids of nodes that consume `id`, with the input port.
    pub fn consumers(&self, id: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for (port, input) in n.inputs.iter().enumerate() {
                if input == id {
                    out.push((i, port));
                }
            }
        }
        out
    }

    pub fn sink(&self) -> Result<&PlanNode> {
        let used: HashSet<&str> = self.nodes.iter().flat_map(|n| n.inputs.iter().map(String::as_str)).collect();
        let sinks: Vec<&PlanNode> = self.nodes.iter().filter(|n| !used.contains(n.id.as_str())).collect();
        match sinks.as_slice() {
            [one] => Ok(one),
            [] => Err(Error::param(format!("plan `{}` has no sink", self.name))),
            many => Err(Error::param(format!(
                "plan `{}` has {} sinks ({})",
                self.name,
                many.len(),
                many.iter().map(|n| n.id.as_str()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    /// Node indices in dependency order. Fails on dangling references and
    /// cycles.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        for n in &self.nodes {
            for input in &n.inputs {
                if !index.contains_key(input.as_str()) {
                    return Err(Error::param(format!("node `{}` reads unknown node `{input}`", n.id)));
                }
            }
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        for root in 0..self.nodes.len() {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                let inputs = &self.nodes[v].inputs;
                if *next < inputs.len() {
                    let w = index[inputs[*next].as_str()];
                    *next += 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => return Err(Error::Cycle(self.nodes[w].id.clone())),
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    order.push(v);
                    stack.pop();
                }
            }
        }
        Ok(order)
    }

    /// Structural checks: unique ids, known references, arity, no cycles,
    /// exactly one sink.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                return Err(Error::param(format!("duplicate node id `{}`", n.id)));
            }
            if !n.kind.arity().contains(&n.inputs.len()) {
                return Err(Error::param(format!(
                    "node `{}` ({}) has {} inputs, expected {:?}",
                    n.id,
                    n.kind,
                    n.inputs.len(),
                    n.kind.arity()
                )));
            }
        }
        self.topo_order()?;
        self.sink()?;
        Ok(())
    }
}

impl fmt::Display for PlanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "plan {}", self.name)?;
        for (k, v) in &self.annotations {
            write!(f, " {k}={v}")?;
        }
        writeln!(f)?;
        for n in &self.nodes {
            writeln!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for PlanSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_plan(s)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.src[..self.pos].chars().count() + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t' || c == '\r') {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{ch}`")))
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            self.pos += 1;
        }
        if start == self.pos || !is_ident(&self.src[start..self.pos]) {
            self.pos = start;
            return Err(self.err("expected identifier"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn value(&mut self) -> Result<ParamValue> {
        self.skip_ws();
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                if self.eat(']') {
                    return Ok(ParamValue::List(items));
                }
                loop {
                    items.push(self.value()?);
                    if self.eat(']') {
                        return Ok(ParamValue::List(items));
                    }
                    self.expect(',')?;
                }
            }
            Some('"') => {
                self.pos += 1;
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated string")),
                        Some('"') => return Ok(ParamValue::Str(s)),
                        Some('\\') => match self.bump() {
                            Some(c @ ('"' | '\\')) => s.push(c),
                            _ => return Err(self.err("invalid escape")),
                        },
                        Some(c) => s.push(c),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' => {
                let start = self.pos;
                self.pos += 1;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '+') {
                    self.pos += 1;
                }
                let text = &self.src[start..self.pos];
                if let Ok(i) = text.parse::<i64>() {
                    Ok(ParamValue::Int(i))
                } else if let Ok(x) = text.parse::<f64>() {
                    Ok(ParamValue::Float(x))
                } else {
                    self.pos = start;
                    Err(self.err(format!("invalid number `{text}`")))
                }
            }
            Some(_) => Ok(ParamValue::Ident(self.word()?.to_string())),
            None => Err(self.err("expected value")),
        }
    }
}

fn parse_node(c: &mut Cursor<'_>) -> Result<PlanNode> {
    let id = c.word()?.to_string();
    c.expect('=')?;
    let op_at = c.pos;
    if c.word()? != "op" {
        c.pos = op_at;
        return Err(c.err("expected `op(`"));
    }
    c.expect('(')?;
    let mut kind = None;
    let mut inputs = None;
    let mut device = None;
    let mut params: Vec<(String, ParamValue)> = Vec::new();
    if !c.eat(')') {
        loop {
            let key_at = c.pos;
            let key = c.word()?.to_string();
            c.expect('=')?;
            let val_at = c.pos;
            let v = c.value()?;
            let at = |c: &mut Cursor<'_>, pos: usize, msg: String| {
                c.pos = pos;
                c.err(msg)
            };
            match key.as_str() {
                "kind" => {
                    let name = v.as_str().ok_or_else(|| at(c, val_at, "operator kind must be a name".into()))?;
                    kind = Some(name.parse::<OpKind>()?);
                }
                "inputs" => {
                    let list = v
                        .as_str_list()
                        .ok_or_else(|| at(c, val_at, "inputs must be a list of node ids".into()))?;
                    inputs = Some(list);
                }
                "device" => {
                    device = match v.as_str() {
                        Some("any") => None,
                        Some(d) => Some(d.parse::<DeviceKind>().map_err(|_| at(c, val_at, format!("unknown device `{d}`")))?),
                        None => return Err(at(c, val_at, "device must be host, device or any".into())),
                    };
                }
                _ => {
                    if params.iter().any(|(k, _)| *k == key) {
                        return Err(at(c, key_at, format!("duplicate parameter `{key}`")));
                    }
                    params.push((key, v));
                }
            }
            if c.eat(')') {
                break;
            }
            c.expect(',')?;
        }
    }
    let kind = kind.ok_or_else(|| c.err("missing `kind`"))?;
    if !c.at_end() {
        return Err(c.err("trailing characters after node"));
    }
    Ok(PlanNode {
        id,
        kind,
        inputs: inputs.unwrap_or_default(),
        device,
        params,
    })
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, ch) in line.char_indices() {
        match ch {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Parses and validates a plan.
pub fn parse_plan(text: &str) -> Result<PlanSpec> {
    let mut plan = PlanSpec::default();
    let mut saw_node = false;
    for (i, raw) in text.lines().enumerate() {
        let src = strip_comment(raw);
        let mut c = Cursor { src, pos: 0, line: i + 1 };
        if c.at_end() {
            continue;
        }
        let save = c.pos;
        if c.word().ok() == Some("plan") && !matches!({ c.skip_ws(); c.peek() }, Some('=')) {
            if saw_node || !plan.name.is_empty() {
                return Err(c.err("`plan` header must be the first statement"));
            }
            plan.name = c.word()?.to_string();
            while !c.at_end() {
                let key = c.word()?.to_string();
                c.expect('=')?;
                let v = c.value()?;
                plan.annotations.insert(key, v);
            }
            continue;
        }
        c.pos = save;
        plan.nodes.push(parse_node(&mut c)?);
        saw_node = true;
    }
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# two-way join
plan demo vs_mode=enn k=10 note="a \"quoted\" \\ value"
a = op(kind=scan, inputs=[], device=host, table=part)
b = op(kind=filter, inputs=[a], device=any, pred="p_size > 3 # not a comment")
c = op(kind=sort, inputs=[b], device=device, by=["p_size desc", "p_partkey asc"], limit=5, frac=0.25)
"#;

    #[test]
    fn parse_print_round_trip() {
        let p = parse_plan(SAMPLE).unwrap();
        assert_eq!(p.name, "demo");
        assert_eq!(p.nodes.len(), 3);
        assert_eq!(p.nodes[1].str_param("pred").unwrap(), "p_size > 3 # not a comment");
        assert_eq!(p.annotation("note").unwrap().as_str(), Some("a \"quoted\" \\ value"));
        assert_eq!(p.nodes[2].get("frac"), Some(&ParamValue::Float(0.25)));
        let again = parse_plan(&p.to_string()).unwrap();
        assert_eq!(again, p);
        assert_eq!(p.sink().unwrap().id, "c");
    }

    #[test]
    fn rejects_cycles_unknown_ops_and_bad_syntax() {
        let cyc = "a = op(kind=filter, inputs=[b], pred=x)\nb = op(kind=filter, inputs=[a], pred=y)\n";
        assert!(matches!(parse_plan(cyc), Err(Error::Cycle(_))));
        let unk = "a = op(kind=teleport, inputs=[])";
        assert!(matches!(parse_plan(unk), Err(Error::UnknownOperator(op)) if op == "teleport"));
        match parse_plan("a = op(kind=scan, inputs=[], table=\"x)\n") {
            Err(Error::Syntax { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_plan("\n\na = op(kind=scan inputs=[])") {
            Err(Error::Syntax { line: 3, column, .. }) => assert_eq!(column, 18),
            other => panic!("{other:?}"),
        }
        assert!(parse_plan("a = op(kind=scan, inputs=[])\nb = op(kind=scan, inputs=[])").is_err());
        assert!(parse_plan("a = op(kind=scan, inputs=[])\na = op(kind=filter, inputs=[a])").is_err());
        assert!(parse_plan("a = op(kind=join, inputs=[a])").is_err());
    }
}
