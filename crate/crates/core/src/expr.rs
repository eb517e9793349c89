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

//! Scalar expressions: predicates, arithmetic, `CASE`, `IN` lists and null
//! tests over table fields.
//!
//! Expressions are written in a small SQL-like text form (see [`parse`]) so
//! that plan files can carry them. The printer emits a fully parenthesized
//! form that parses back to an identical tree.

use std::cmp::Ordering;
use std::fmt;

use crate::columnar::{format_date, parse_date, Column, ColumnData, DataType, Schema, Table, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, o: Ordering) -> bool {
        match self {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Col(String),
    Lit(Value),
    Bool(bool),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    IsNull { expr: Box<Expr>, negated: bool },
    InList { expr: Box<Expr>, list: Vec<Value>, negated: bool },
    Like { expr: Box<Expr>, pattern: String, negated: bool },
    Case { whens: Vec<(Expr, Expr)>, otherwise: Option<Box<Expr>> },
}

/// Builders used by the built-in plans and tests.
pub fn col(name: &str) -> Expr {
    Expr::Col(name.to_string())
}

pub fn lit_i(v: i64) -> Expr {
    Expr::Lit(Value::Int(v))
}

pub fn lit_f(v: f64) -> Expr {
    Expr::Lit(Value::Float(v))
}

pub fn lit_s(v: &str) -> Expr {
    Expr::Lit(Value::Str(v.to_string()))
}

impl Expr {
    pub fn cmp(self, op: CmpOp, rhs: Expr) -> Expr {
        Expr::Cmp(op, Box::new(self), Box::new(rhs))
    }

    pub fn arith(self, op: ArithOp, rhs: Expr) -> Expr {
        Expr::Arith(op, Box::new(self), Box::new(rhs))
    }

    /// Names of all referenced fields, in first-use order.
    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_columns(&mut |c| {
            if !out.iter().any(|x: &String| x == c) {
                out.push(c.to_string());
            }
        });
        out
    }

    fn visit_columns(&self, f: &mut dyn FnMut(&str)) {
        match self {
            Expr::Col(c) => f(c),
            Expr::Lit(_) | Expr::Bool(_) => {}
            Expr::Cmp(_, a, b) | Expr::Arith(_, a, b) => {
                a.visit_columns(f);
                b.visit_columns(f);
            }
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.visit_columns(f)),
            Expr::Not(e) => e.visit_columns(f),
            Expr::IsNull { expr, .. } | Expr::InList { expr, .. } | Expr::Like { expr, .. } => {
                expr.visit_columns(f)
            }
            Expr::Case { whens, otherwise } => {
                for (w, t) in whens {
                    w.visit_columns(f);
                    t.visit_columns(f);
                }
                if let Some(o) = otherwise {
                    o.visit_columns(f);
                }
            }
        }
    }
}

fn write_lit(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Null => f.write_str("NULL"),
        Value::Int(i) => write!(f, "{i}"),
        Value::Float(x) => write!(f, "{x:?}"),
        Value::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
        Value::Date(d) => write!(f, "DATE '{}'", format_date(*d)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Col(c) => f.write_str(c),
            Expr::Lit(v) => write_lit(f, v),
            Expr::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Expr::Cmp(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Arith(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::And(xs) | Expr::Or(xs) => {
                let sep = if matches!(self, Expr::And(_)) { " AND " } else { " OR " };
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Expr::Not(e) => write!(f, "(NOT {e})"),
            Expr::IsNull { expr, negated } => {
                write!(f, "({expr} IS {}NULL)", if *negated { "NOT " } else { "" })
            }
            Expr::InList {
                expr,
                list,
                negated,
            } => {
                write!(f, "({expr} {}IN (", if *negated { "NOT " } else { "" })?;
                for (i, v) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_lit(f, v)?;
                }
                f.write_str("))")
            }
            Expr::Like {
                expr,
                pattern,
                negated,
            } => write!(
                f,
                "({expr} {}LIKE '{}')",
                if *negated { "NOT " } else { "" },
                pattern.replace('\'', "''")
            ),
            Expr::Case { whens, otherwise } => {
                f.write_str("CASE")?;
                for (w, t) in whens {
                    write!(f, " WHEN {w} THEN {t}")?;
                }
                if let Some(o) = otherwise {
                    write!(f, " ELSE {o}")?;
                }
                f.write_str(" END")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Sym(&'static str),
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| Error::Expr(format!("{msg} at offset {pos} in `{src}`"));
    while i < b.len() {
        let c = b[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'.') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if c.is_ascii_digit() {
            let mut is_float = false;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.' || b[i] == b'e' || b[i] == b'E'
                || ((b[i] == b'-' || b[i] == b'+') && (b[i - 1] == b'e' || b[i - 1] == b'E')))
            {
                if !(b[i] as char).is_ascii_digit() {
                    is_float = true;
                }
                i += 1;
            }
            let text = &src[start..i];
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| err(start, "bad number"))?)
            } else {
                Tok::Int(text.parse().map_err(|_| err(start, "bad number"))?)
            };
            out.push((tok, start));
        } else if c == '\'' {
            i += 1;
            let mut s = String::new();
            loop {
                if i >= b.len() {
                    return Err(err(start, "unterminated string"));
                }
                if b[i] == b'\'' {
                    if i + 1 < b.len() && b[i + 1] == b'\'' {
                        s.push('\'');
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                let ch = src[i..].chars().next().unwrap();
                s.push(ch);
                i += ch.len_utf8();
            }
            out.push((Tok::Str(s), start));
        } else {
            let two = if i + 1 < b.len() { &src[i..i + 2] } else { "" };
            let (tok, w) = match (c, two) {
                (_, "<=") => (Tok::Sym("<="), 2),
                (_, ">=") => (Tok::Sym(">="), 2),
                (_, "<>") => (Tok::Sym("<>"), 2),
                (_, "!=") => (Tok::Sym("<>"), 2),
                ('<', _) => (Tok::Sym("<"), 1),
                ('>', _) => (Tok::Sym(">"), 1),
                ('=', _) => (Tok::Sym("="), 1),
                ('+', _) => (Tok::Sym("+"), 1),
                ('-', _) => (Tok::Sym("-"), 1),
                ('*', _) => (Tok::Sym("*"), 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                _ => return Err(err(start, &format!("unexpected character `{c}`"))),
            };
            out.push((tok, start));
            i += w;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn is_kw(t: Option<&Tok>, kw: &str) -> bool {
    matches!(t, Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|t| &t.0)
    }

    fn err(&self, msg: &str) -> Error {
        let at = self.toks.get(self.pos).map_or(self.src.len(), |t| t.1);
        Error::Expr(format!("{msg} at offset {at} in `{}`", self.src))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if is_kw(self.peek(), kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{kw}`")))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Expr> {
        let mut xs = vec![self.and()?];
        while self.eat_kw("OR") {
            xs.push(self.and()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Expr::Or(xs) })
    }

    fn and(&mut self) -> Result<Expr> {
        let mut xs = vec![self.not()?];
        while self.eat_kw("AND") {
            xs.push(self.not()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Expr::And(xs) })
    }

    fn not(&mut self) -> Result<Expr> {
        if self.eat_kw("NOT") {
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr> {
        let lhs = self.additive()?;
        if let Some(Tok::Sym(s)) = self.peek() {
            let op = match *s {
                "=" => Some(CmpOp::Eq),
                "<>" => Some(CmpOp::Ne),
                "<" => Some(CmpOp::Lt),
                "<=" => Some(CmpOp::Le),
                ">" => Some(CmpOp::Gt),
                ">=" => Some(CmpOp::Ge),
                _ => None,
            };
            if let Some(op) = op {
                self.pos += 1;
                let rhs = self.additive()?;
                return Ok(lhs.cmp(op, rhs));
            }
        }
        if self.eat_kw("IS") {
            let negated = self.eat_kw("NOT");
            self.expect_kw("NULL")?;
            return Ok(Expr::IsNull {
                expr: Box::new(lhs),
                negated,
            });
        }
        let negated = if is_kw(self.peek(), "NOT")
            && (is_kw(self.peek_at(1), "IN") || is_kw(self.peek_at(1), "LIKE"))
        {
            self.pos += 1;
            true
        } else {
            false
        };
        if self.eat_kw("IN") {
            if !self.eat(&Tok::LParen) {
                return Err(self.err("expected `(` after IN"));
            }
            let mut list = Vec::new();
            loop {
                list.push(self.literal()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                if self.eat(&Tok::RParen) {
                    break;
                }
                return Err(self.err("expected `,` or `)` in IN list"));
            }
            return Ok(Expr::InList {
                expr: Box::new(lhs),
                list,
                negated,
            });
        }
        if self.eat_kw("LIKE") {
            let Some(Tok::Str(p)) = self.peek().cloned() else {
                return Err(self.err("expected pattern string after LIKE"));
            };
            self.pos += 1;
            return Ok(Expr::Like {
                expr: Box::new(lhs),
                pattern: p,
                negated,
            });
        }
        if negated {
            return Err(self.err("expected IN or LIKE after NOT"));
        }
        if self.eat_kw("BETWEEN") {
            let lo = self.additive()?;
            self.expect_kw("AND")?;
            let hi = self.additive()?;
            return Ok(Expr::And(vec![
                lhs.clone().cmp(CmpOp::Ge, lo),
                lhs.cmp(CmpOp::Le, hi),
            ]));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut e = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => ArithOp::Add,
                Some(Tok::Sym("-")) => ArithOp::Sub,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = e.arith(op, self.multiplicative()?);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.eat(&Tok::Sym("*")) {
            e = e.arith(ArithOp::Mul, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Tok::Sym("-")) {
            return Ok(match self.peek().cloned() {
                Some(Tok::Int(i)) => {
                    self.pos += 1;
                    lit_i(-i)
                }
                Some(Tok::Float(x)) => {
                    self.pos += 1;
                    lit_f(-x)
                }
                _ => lit_i(0).arith(ArithOp::Sub, self.unary()?),
            });
        }
        self.primary()
    }

    fn literal(&mut self) -> Result<Value> {
        let neg = self.eat(&Tok::Sym("-"));
        let v = match self.peek().cloned() {
            Some(Tok::Int(i)) => Value::Int(if neg { -i } else { i }),
            Some(Tok::Float(x)) => Value::Float(if neg { -x } else { x }),
            Some(Tok::Str(s)) if !neg => Value::Str(s),
            Some(Tok::Ident(k)) if !neg && k.eq_ignore_ascii_case("NULL") => Value::Null,
            Some(Tok::Ident(k)) if !neg && k.eq_ignore_ascii_case("DATE") => {
                self.pos += 1;
                return self.date_body();
            }
            _ => return Err(self.err("expected literal")),
        };
        self.pos += 1;
        Ok(v)
    }

    fn date_body(&mut self) -> Result<Value> {
        let Some(Tok::Str(s)) = self.peek().cloned() else {
            return Err(self.err("expected date string after DATE"));
        };
        self.pos += 1;
        parse_date(&s)
            .map(Value::Date)
            .ok_or_else(|| self.err(&format!("invalid date `{s}`")))
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(lit_i(i))
            }
            Some(Tok::Float(x)) => {
                self.pos += 1;
                Ok(lit_f(x))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Str(s)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                match id.to_ascii_uppercase().as_str() {
                    "TRUE" => Ok(Expr::Bool(true)),
                    "FALSE" => Ok(Expr::Bool(false)),
                    "NULL" => Ok(Expr::Lit(Value::Null)),
                    "DATE" => Ok(Expr::Lit(self.date_body()?)),
                    "CASE" => {
                        let mut whens = Vec::new();
                        while self.eat_kw("WHEN") {
                            let w = self.or()?;
                            self.expect_kw("THEN")?;
                            whens.push((w, self.or()?));
                        }
                        if whens.is_empty() {
                            return Err(self.err("CASE without WHEN"));
                        }
                        let otherwise = if self.eat_kw("ELSE") {
                            Some(Box::new(self.or()?))
                        } else {
                            None
                        };
                        self.expect_kw("END")?;
                        Ok(Expr::Case { whens, otherwise })
                    }
                    _ => Ok(Expr::Col(id)),
                }
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

/// Parse the text form of an expression.
pub fn parse(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.or()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Type checking and evaluation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Bool,
    Int,
    Float,
    Str,
    Date,
    /// Literal NULL; unifies with anything.
    Null,
}

impl ExprType {
    fn of_value(v: &Value) -> ExprType {
        match v {
            Value::Null => ExprType::Null,
            Value::Int(_) => ExprType::Int,
            Value::Float(_) => ExprType::Float,
            Value::Str(_) => ExprType::Str,
            Value::Date(_) => ExprType::Date,
        }
    }

    fn numeric(self) -> bool {
        matches!(self, ExprType::Int | ExprType::Float | ExprType::Null)
    }

    fn comparable(self, other: ExprType) -> bool {
        use ExprType::*;
        match (self, other) {
            (Null, _) | (_, Null) => true,
            (a, b) if a.numeric() && b.numeric() => true,
            (Str, Str) | (Date, Date) | (Bool, Bool) => true,
            _ => false,
        }
    }

    fn unify(self, other: ExprType) -> Option<ExprType> {
        use ExprType::*;
        match (self, other) {
            (Null, x) | (x, Null) => Some(x),
            (Int, Float) | (Float, Int) => Some(Float),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn data_type(self) -> Option<DataType> {
        match self {
            ExprType::Int | ExprType::Bool => Some(DataType::Int64),
            ExprType::Float => Some(DataType::Float64),
            ExprType::Str => Some(DataType::Utf8),
            ExprType::Date => Some(DataType::Date32),
            ExprType::Null => None,
        }
    }
}

/// Expression resolved against a schema; field names become column indices.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    node: Node,
    ty: ExprType,
}

#[derive(Debug, Clone)]
enum Node {
    Col(usize),
    Lit(Scalar),
    Cmp(CmpOp, Box<Node>, Box<Node>),
    Arith(ArithOp, Box<Node>, Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
    IsNull(Box<Node>, bool),
    InList(Box<Node>, Vec<Scalar>, bool),
    Like(Box<Node>, String, bool),
    Case(Vec<(Node, Node)>, Option<Box<Node>>),
}

/// Runtime scalar including booleans.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Date(i32),
}

impl Scalar {
    fn from_value(v: &Value) -> Scalar {
        match v {
            Value::Null => Scalar::Null,
            Value::Int(i) => Scalar::Int(*i),
            Value::Float(x) => Scalar::Float(*x),
            Value::Str(s) => Scalar::Str(s.clone()),
            Value::Date(d) => Scalar::Date(*d),
        }
    }

    pub fn into_value(self) -> Value {
        match self {
            Scalar::Null => Value::Null,
            Scalar::Bool(b) => Value::Int(b as i64),
            Scalar::Int(i) => Value::Int(i),
            Scalar::Float(x) => Value::Float(x),
            Scalar::Str(s) => Value::Str(s),
            Scalar::Date(d) => Value::Date(d),
        }
    }

    fn as_f64(&self) -> f64 {
        match self {
            Scalar::Int(i) => *i as f64,
            Scalar::Float(x) => *x,
            Scalar::Date(d) => *d as f64,
            _ => f64::NAN,
        }
    }

    fn compare(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Null, _) | (_, Scalar::Null) => None,
            (Scalar::Int(a), Scalar::Int(b)) => Some(a.cmp(b)),
            (Scalar::Str(a), Scalar::Str(b)) => Some(a.cmp(b)),
            (Scalar::Date(a), Scalar::Date(b)) => Some(a.cmp(b)),
            (Scalar::Bool(a), Scalar::Bool(b)) => Some(a.cmp(b)),
            (a, b) => Some(a.as_f64().total_cmp(&b.as_f64())),
        }
    }
}

fn like_match(s: &str, pat: &str) -> bool {
    fn rec(s: &[char], p: &[char]) -> bool {
        match p.first() {
            None => s.is_empty(),
            Some('%') => (0..=s.len()).any(|i| rec(&s[i..], &p[1..])),
            Some('_') => !s.is_empty() && rec(&s[1..], &p[1..]),
            Some(c) => s.first() == Some(c) && rec(&s[1..], &p[1..]),
        }
    }
    let s: Vec<char> = s.chars().collect();
    let p: Vec<char> = pat.chars().collect();
    rec(&s, &p)
}

fn field_type(dt: DataType) -> Result<ExprType> {
    Ok(match dt {
        DataType::Int64 => ExprType::Int,
        DataType::Float64 => ExprType::Float,
        DataType::Utf8 => ExprType::Str,
        DataType::Date32 => ExprType::Date,
        DataType::Embedding(_) => {
            return Err(Error::Expr("embedding fields cannot appear in expressions".into()))
        }
    })
}

impl BoundExpr {
    pub fn ty(&self) -> ExprType {
        self.ty
    }

    /// Evaluate for one row of the table the expression was bound against.
    pub fn eval(&self, table: &Table, row: usize) -> Scalar {
        eval_node(&self.node, table.columns(), row)
    }

    /// Evaluate as a predicate: true only when the result is boolean true.
    pub fn test(&self, table: &Table, row: usize) -> bool {
        matches!(eval_node(&self.node, table.columns(), row), Scalar::Bool(true))
    }

    /// Materialize as a column.
    pub fn eval_column(&self, table: &Table) -> Result<Column> {
        let n = table.row_count();
        let vals: Vec<Scalar> = (0..n).map(|r| self.eval(table, r)).collect();
        let valid: Vec<bool> = vals.iter().map(|v| *v != Scalar::Null).collect();
        let data = match self.ty {
            ExprType::Int | ExprType::Bool | ExprType::Null => ColumnData::Int64(
                vals.iter()
                    .map(|v| match v {
                        Scalar::Int(i) => *i,
                        Scalar::Bool(b) => *b as i64,
                        _ => 0,
                    })
                    .collect(),
            ),
            ExprType::Float => ColumnData::Float64(
                vals.iter()
                    .map(|v| match v {
                        Scalar::Null => 0.0,
                        x => x.as_f64(),
                    })
                    .collect(),
            ),
            ExprType::Str => ColumnData::Utf8(
                vals.into_iter()
                    .map(|v| match v {
                        Scalar::Str(s) => s,
                        _ => String::new(),
                    })
                    .collect(),
            ),
            ExprType::Date => ColumnData::Date32(
                vals.iter()
                    .map(|v| match v {
                        Scalar::Date(d) => *d,
                        _ => 0,
                    })
                    .collect(),
            ),
        };
        Column::with_validity(data, valid)
    }
}

/// Resolve field references and type-check.
pub fn bind(expr: &Expr, schema: &Schema) -> Result<BoundExpr> {
    let (node, ty) = bind_node(expr, schema)?;
    Ok(BoundExpr { node, ty })
}

/// Bind and require a boolean result.
pub fn bind_predicate(expr: &Expr, schema: &Schema) -> Result<BoundExpr> {
    let b = bind(expr, schema)?;
    if !matches!(b.ty, ExprType::Bool | ExprType::Null) {
        return Err(Error::Expr(format!("predicate `{expr}` is not boolean")));
    }
    Ok(b)
}

fn bind_node(expr: &Expr, schema: &Schema) -> Result<(Node, ExprType)> {
    Ok(match expr {
        Expr::Col(name) => {
            let i = schema
                .index_of(name)
                .ok_or_else(|| Error::Expr(format!("unknown field `{name}`")))?;
            (Node::Col(i), field_type(schema.fields()[i].dtype)?)
        }
        Expr::Lit(v) => (Node::Lit(Scalar::from_value(v)), ExprType::of_value(v)),
        Expr::Bool(b) => (Node::Lit(Scalar::Bool(*b)), ExprType::Bool),
        Expr::Cmp(op, a, b) => {
            let (na, ta) = bind_node(a, schema)?;
            let (nb, tb) = bind_node(b, schema)?;
            if !ta.comparable(tb) {
                return Err(Error::Expr(format!("cannot compare {ta:?} with {tb:?} in `{expr}`")));
            }
            (Node::Cmp(*op, Box::new(na), Box::new(nb)), ExprType::Bool)
        }
        Expr::Arith(op, a, b) => {
            let (na, ta) = bind_node(a, schema)?;
            let (nb, tb) = bind_node(b, schema)?;
            use ExprType::*;
            let ty = match (op, ta, tb) {
                (_, Null, _) | (_, _, Null) => Null,
                (_, Int, Int) => Int,
                (_, x, y) if x.numeric() && y.numeric() => Float,
                (ArithOp::Add | ArithOp::Sub, Date, Int) => Date,
                (ArithOp::Add, Int, Date) => Date,
                (ArithOp::Sub, Date, Date) => Int,
                _ => {
                    return Err(Error::Expr(format!(
                        "invalid operands {ta:?}, {tb:?} in `{expr}`"
                    )))
                }
            };
            (Node::Arith(*op, Box::new(na), Box::new(nb)), ty)
        }
        Expr::And(xs) | Expr::Or(xs) => {
            let mut nodes = Vec::with_capacity(xs.len());
            for x in xs {
                let (n, t) = bind_node(x, schema)?;
                if !matches!(t, ExprType::Bool | ExprType::Null) {
                    return Err(Error::Expr(format!("operand `{x}` is not boolean")));
                }
                nodes.push(n);
            }
            let n = if matches!(expr, Expr::And(_)) {
                Node::And(nodes)
            } else {
                Node::Or(nodes)
            };
            (n, ExprType::Bool)
        }
        Expr::Not(e) => {
            let (n, t) = bind_node(e, schema)?;
            if !matches!(t, ExprType::Bool | ExprType::Null) {
                return Err(Error::Expr(format!("NOT operand `{e}` is not boolean")));
            }
            (Node::Not(Box::new(n)), ExprType::Bool)
        }
        Expr::IsNull { expr: e, negated } => {
            let (n, _) = bind_node(e, schema)?;
            (Node::IsNull(Box::new(n), *negated), ExprType::Bool)
        }
        Expr::InList {
            expr: e,
            list,
            negated,
        } => {
            let (n, t) = bind_node(e, schema)?;
            for v in list {
                if !t.comparable(ExprType::of_value(v)) {
                    return Err(Error::Expr(format!("IN list value {v} incompatible with {t:?}")));
                }
            }
            (
                Node::InList(Box::new(n), list.iter().map(Scalar::from_value).collect(), *negated),
                ExprType::Bool,
            )
        }
        Expr::Like {
            expr: e,
            pattern,
            negated,
        } => {
            let (n, t) = bind_node(e, schema)?;
            if !matches!(t, ExprType::Str | ExprType::Null) {
                return Err(Error::Expr(format!("LIKE operand `{e}` is not a string")));
            }
            (Node::Like(Box::new(n), pattern.clone(), *negated), ExprType::Bool)
        }
        Expr::Case { whens, otherwise } => {
            let mut ty = ExprType::Null;
            let mut arms = Vec::with_capacity(whens.len());
            for (w, t) in whens {
                let (nw, tw) = bind_node(w, schema)?;
                if !matches!(tw, ExprType::Bool | ExprType::Null) {
                    return Err(Error::Expr(format!("WHEN condition `{w}` is not boolean")));
                }
                let (nt, tt) = bind_node(t, schema)?;
                ty = ty
                    .unify(tt)
                    .ok_or_else(|| Error::Expr(format!("CASE arms disagree in `{expr}`")))?;
                arms.push((nw, nt));
            }
            let other = match otherwise {
                Some(o) => {
                    let (no, to) = bind_node(o, schema)?;
                    ty = ty
                        .unify(to)
                        .ok_or_else(|| Error::Expr(format!("CASE arms disagree in `{expr}`")))?;
                    Some(Box::new(no))
                }
                None => None,
            };
            (Node::Case(arms, other), ty)
        }
    })
}

fn column_scalar(c: &Column, row: usize) -> Scalar {
    if !c.is_valid(row) {
        return Scalar::Null;
    }
    match c.data() {
        ColumnData::Int64(v) => Scalar::Int(v[row]),
        ColumnData::Float64(v) => Scalar::Float(v[row]),
        ColumnData::Utf8(v) => Scalar::Str(v[row].clone()),
        ColumnData::Date32(v) => Scalar::Date(v[row]),
        ColumnData::Embedding(_) => Scalar::Null,
    }
}

fn eval_node(node: &Node, cols: &[std::sync::Arc<Column>], row: usize) -> Scalar {
    match node {
        Node::Col(i) => column_scalar(&cols[*i], row),
        Node::Lit(s) => s.clone(),
        Node::Cmp(op, a, b) => {
            let x = eval_node(a, cols, row);
            let y = eval_node(b, cols, row);
            match x.compare(&y) {
                Some(o) => Scalar::Bool(op.holds(o)),
                None => Scalar::Null,
            }
        }
        Node::Arith(op, a, b) => {
            let x = eval_node(a, cols, row);
            let y = eval_node(b, cols, row);
            match (&x, &y) {
                (Scalar::Null, _) | (_, Scalar::Null) => Scalar::Null,
                (Scalar::Date(p), Scalar::Date(q)) => Scalar::Int((*p - *q) as i64),
                (Scalar::Date(d), Scalar::Int(n)) | (Scalar::Int(n), Scalar::Date(d)) => {
                    let n = *n as i32;
                    Scalar::Date(if *op == ArithOp::Sub { d - n } else { d + n })
                }
                (Scalar::Int(p), Scalar::Int(q)) => Scalar::Int(match op {
                    ArithOp::Add => p.wrapping_add(*q),
                    ArithOp::Sub => p.wrapping_sub(*q),
                    ArithOp::Mul => p.wrapping_mul(*q),
                }),
                _ => {
                    let (p, q) = (x.as_f64(), y.as_f64());
                    Scalar::Float(match op {
                        ArithOp::Add => p + q,
                        ArithOp::Sub => p - q,
                        ArithOp::Mul => p * q,
                    })
                }
            }
        }
        Node::And(xs) => {
            let mut saw_null = false;
            for x in xs {
                match eval_node(x, cols, row) {
                    Scalar::Bool(false) => return Scalar::Bool(false),
                    Scalar::Bool(true) => {}
                    _ => saw_null = true,
                }
            }
            if saw_null {
                Scalar::Null
            } else {
                Scalar::Bool(true)
            }
        }
        Node::Or(xs) => {
            let mut saw_null = false;
            for x in xs {
                match eval_node(x, cols, row) {
                    Scalar::Bool(true) => return Scalar::Bool(true),
                    Scalar::Bool(false) => {}
                    _ => saw_null = true,
                }
            }
            if saw_null {
                Scalar::Null
            } else {
                Scalar::Bool(false)
            }
        }
        Node::Not(e) => match eval_node(e, cols, row) {
            Scalar::Bool(b) => Scalar::Bool(!b),
            _ => Scalar::Null,
        },
        Node::IsNull(e, negated) => {
            let is_null = eval_node(e, cols, row) == Scalar::Null;
            Scalar::Bool(is_null != *negated)
        }
        Node::InList(e, list, negated) => {
            let x = eval_node(e, cols, row);
            if x == Scalar::Null {
                return Scalar::Null;
            }
            let found = list
                .iter()
                .any(|v| x.compare(v) == Some(Ordering::Equal));
            Scalar::Bool(found != *negated)
        }
        Node::Like(e, pat, negated) => match eval_node(e, cols, row) {
            Scalar::Str(s) => Scalar::Bool(like_match(&s, pat) != *negated),
            _ => Scalar::Null,
        },
        Node::Case(arms, otherwise) => {
            for (w, t) in arms {
                if eval_node(w, cols, row) == Scalar::Bool(true) {
                    return eval_node(t, cols, row);
                }
            }
            otherwise
                .as_ref()
                .map_or(Scalar::Null, |o| eval_node(o, cols, row))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columnar::{Field, Schema};

    fn table() -> Table {
        let schema = Schema::new(vec![
            Field::new("qty", DataType::Int64),
            Field::new("price", DataType::Float64),
            Field::new("brand", DataType::Utf8),
            Field::new("ship", DataType::Date32),
        ])
        .unwrap();
        Table::new(
            schema,
            vec![
                Column::new(ColumnData::Int64(vec![5, 31, 40])),
                Column::with_validity(ColumnData::Float64(vec![1.5, 0.0, 3.0]), vec![true, false, true])
                    .unwrap(),
                Column::new(ColumnData::Utf8(vec!["Brand#12".into(), "Brand#23".into(), "Brand#12".into()])),
                Column::new(ColumnData::Date32(vec![
                    parse_date("1995-01-01").unwrap(),
                    parse_date("1995-06-01").unwrap(),
                    parse_date("1996-01-01").unwrap(),
                ])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parse_print_round_trip() {
        for src in [
            "qty > 30",
            "brand IN ('Brand#12', 'Brand#23') AND qty BETWEEN 1 AND 11",
            "CASE WHEN price IS NULL THEN 0 ELSE qty * 2 END",
            "NOT (brand LIKE 'Brand#1%') OR ship >= DATE '1995-03-01'",
            "price * (1 - 0.05) + -3.5",
            "brand NOT IN ('x') AND price IS NOT NULL",
            "-(qty + 1)",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn evaluation_and_nulls() {
        let t = table();
        let p = bind_predicate(&parse("qty > 30").unwrap(), t.schema()).unwrap();
        let hits: Vec<_> = (0..3).filter(|&r| p.test(&t, r)).collect();
        assert_eq!(hits, [1, 2]);

        let c = bind(&parse("CASE WHEN price IS NULL THEN 0 ELSE qty END").unwrap(), t.schema()).unwrap();
        assert_eq!(c.eval(&t, 1), Scalar::Int(0));
        assert_eq!(c.eval(&t, 2), Scalar::Int(40));

        // comparisons with null are unknown, so the row is filtered out
        let p = bind_predicate(&parse("price > 0").unwrap(), t.schema()).unwrap();
        assert!(!p.test(&t, 1));
        let p = bind_predicate(&parse("price > 0 OR qty = 31").unwrap(), t.schema()).unwrap();
        assert!(p.test(&t, 1));

        let d = bind(&parse("ship - DATE '1995-01-01'").unwrap(), t.schema()).unwrap();
        assert_eq!(d.eval(&t, 1), Scalar::Int(151));
        let l = bind_predicate(&parse("brand LIKE 'Brand#1_'").unwrap(), t.schema()).unwrap();
        assert!(l.test(&t, 0) && !l.test(&t, 1));
    }

    #[test]
    fn type_errors() {
        let t = table();
        for bad in ["brand > 3", "qty + brand", "unknown = 1", "qty AND TRUE", "ship LIKE 'x'"] {
            let e = parse(bad).unwrap();
            assert!(bind_predicate(&e, t.schema()).is_err(), "{bad}");
        }
        assert!(bind_predicate(&parse("qty + 1").unwrap(), t.schema()).is_err());
        assert!(parse("qty >").is_err());
        assert!(parse("'open").is_err());
    }
}
