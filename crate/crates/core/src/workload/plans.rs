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


//! The eight built-in hybrid query plans.
//!
//! Each plan takes its relational skeleton from the TPC-H query of the same
//! number and adds vector search over REVIEWS and/or IMAGES. Per-query
//! choices that go beyond the TPC-H text:
//!
//! | query | vector search | recall key (non-float output columns) |
//! |-------|---------------|----------------------------------------|
//! | Q2  | image top-k' collapsed to the k nearest parts replaces the size/type predicates; distance is a sort key | supplier, nation, part, manufacturer |
//! | Q10 | top-k review authors flagged via LEFT JOIN (`is_in_top_k`) | customer, name, nation, flag |
//! | Q11 | qualifying parts' images form one query batch; nearest image of a different part (`k'` then post-filter `k = 1`) | part, image, similar part |
//! | Q13 | per-customer count of top-k reviews carried through both grouping levels (`sim_count`) | c_count, sim_count, custdist |
//! | Q15 | exact: data side restricted by SQL joins; approximate: full-index search with `k' = 500 k`, semi-join, post-filter | supplier, review, part |
//! | Q16 | suppliers of parts with top-k reviews excluded by anti-join | brand, type, size, supplier_cnt |
//! | Q18 | `similar_qty` sums quantities of lines whose part is among the top-k image parts | customer, order, date |
//! | Q19 | two searches (reviews and images) OR-ed into the predicate as extra branches | revenue (compared by relative error) |
//!
//! The Q19 ship-mode and ship-instruction conditions are applied once to
//! LINEITEM before the branches, so the similarity branches share them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::{IndexKind, Metric, DEFAULT_GPU_TOPK_CAP};

use super::gen::VectorKind;
use super::plan::{OpKind, ParamValue, PlanNode, PlanSpec};

pub const QUERIES: [&str; 8] = ["Q2", "Q10", "Q11", "Q13", "Q15", "Q16", "Q18", "Q19"];

/// Column names of the query-vector table produced by `query` nodes.
pub const QUERY_ID: &str = "qid";
pub const QUERY_EMBEDDING: &str = "embedding";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VsMode {
    Enn,
    Ivf,
    Graph,
}

pub const VS_MODES: [VsMode; 3] = [VsMode::Enn, VsMode::Ivf, VsMode::Graph];

impl VsMode {
    pub fn index_kind(self) -> IndexKind {
        match self {
            VsMode::Enn => IndexKind::Flat,
            VsMode::Ivf => IndexKind::Ivf,
            VsMode::Graph => IndexKind::Graph,
        }
    }

    pub fn is_exact(self) -> bool {
        self == VsMode::Enn
    }
}

impl fmt::Display for VsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VsMode::Enn => "enn",
            VsMode::Ivf => "ivf",
            VsMode::Graph => "graph",
        })
    }
}

impl FromStr for VsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enn" | "flat" => Ok(VsMode::Enn),
            "ivf" => Ok(VsMode::Ivf),
            "graph" | "cagra" => Ok(VsMode::Graph),
            _ => Err(Error::param(format!("unknown vector search mode `{s}`"))),
        }
    }
}

/// Knobs shared by all built-in plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanParams {
    pub k: usize,
    /// `k' = oversample × k` where a plan searches wider than it keeps.
    pub oversample: usize,
    /// Q15's approximate-mode oversampling factor.
    pub q15_oversample: usize,
    pub nprobe: usize,
    pub ef: usize,
    pub metric: Metric,
    pub query_seed: u64,
    /// Query vectors per `query` node.
    pub batch: usize,
    /// Q11: a part qualifies when its stock value exceeds this fraction of
    /// the national total.
    pub q11_fraction: f64,
    /// Q18: minimum summed order quantity.
    pub q18_quantity: f64,
}

impl Default for PlanParams {
    fn default() -> Self {
        PlanParams {
            k: 10,
            oversample: 10,
            q15_oversample: 500,
            nprobe: 8,
            ef: 128,
            metric: Metric::SquaredL2,
            query_seed: 7,
            batch: 1,
            q11_fraction: 0.01,
            q18_quantity: 230.0,
        }
    }
}

impl PlanParams {
    pub fn k_prime(&self) -> usize {
        self.k * self.oversample
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.oversample == 0 || self.q15_oversample == 0 || self.batch == 0 {
            return Err(Error::param("k, oversampling factors and batch must be positive"));
        }
        if self.nprobe == 0 || self.ef == 0 {
            return Err(Error::param("nprobe and ef must be positive"));
        }
        if !(self.q11_fraction > 0.0 && self.q11_fraction < 1.0) {
            return Err(Error::param("q11_fraction must be in (0, 1)"));
        }
        Ok(())
    }
}

fn s(v: &str) -> ParamValue {
    ParamValue::str(v)
}

fn l(items: &[&str]) -> ParamValue {
    ParamValue::list(items)
}

fn int(v: usize) -> ParamValue {
    ParamValue::Int(v as i64)
}

struct Builder<'a> {
    plan: PlanSpec,
    mode: VsMode,
    p: &'a PlanParams,
    salt: u64,
}

impl<'a> Builder<'a> {
    fn add(&mut self, node: PlanNode) -> String {
        let id = node.id.clone();
        self.plan.push(node);
        id
    }

    fn scan(&mut self, id: &str, table: &str) -> String {
        self.add(PlanNode::new(id, OpKind::Scan, &[]).with("table", s(table)))
    }

    fn query(&mut self, id: &str, kind: VectorKind, n: usize) -> String {
        self.salt += 1;
        let seed = self.p.query_seed.wrapping_mul(1000).wrapping_add(self.salt);
        self.add(
            PlanNode::new(id, OpKind::Query, &[])
                .with("vectors", s(&kind.to_string()))
                .with("n", int(n))
                .with("seed", ParamValue::Int(seed as i64)),
        )
    }

    fn filter(&mut self, id: &str, input: &str, pred: &str) -> String {
        self.add(PlanNode::new(id, OpKind::Filter, &[input]).with("pred", ParamValue::Str(pred.into())))
    }

    fn project(&mut self, id: &str, input: &str, cols: &[&str]) -> String {
        self.add(PlanNode::new(id, OpKind::Project, &[input]).with("cols", l(cols)))
    }

    fn compute(&mut self, id: &str, input: &str, exprs: &[&str]) -> String {
        let list = ParamValue::List(exprs.iter().map(|e| ParamValue::Str(e.to_string())).collect());
        self.add(PlanNode::new(id, OpKind::Compute, &[input]).with("exprs", list))
    }

    fn join(&mut self, id: &str, left: &str, right: &str, how: &str, lk: &[&str], rk: &[&str]) -> String {
        self.add(
            PlanNode::new(id, OpKind::Join, &[left, right])
                .with("how", s(how))
                .with("left", l(lk))
                .with("right", l(rk)),
        )
    }

    fn aggregate(&mut self, id: &str, input: &str, keys: &[&str], aggs: &[&str]) -> String {
        let list = ParamValue::List(aggs.iter().map(|e| ParamValue::Str(e.to_string())).collect());
        self.add(
            PlanNode::new(id, OpKind::Aggregate, &[input])
                .with("keys", l(keys))
                .with("aggs", list),
        )
    }

    fn sort(&mut self, id: &str, input: &str, by: &[&str], limit: Option<usize>) -> String {
        let mut n = PlanNode::new(id, OpKind::Sort, &[input])
            .with("by", ParamValue::List(by.iter().map(|e| ParamValue::Str(e.to_string())).collect()));
        if let Some(lim) = limit {
            n.set("limit", int(lim));
        }
        self.add(n)
    }

    /// Data scan plus, for approximate modes, the matching index node.
    fn data_side(&mut self, table: &str, field: &str) -> (String, Option<String>) {
        let scan = self.scan(table, table);
        let idx = match self.mode {
            VsMode::Enn => None,
            m => Some(
                self.add(
                    PlanNode::new(&format!("{table}_{m}"), OpKind::Index, &[])
                        .with("table", s(table))
                        .with("field", s(field))
                        .with("index", s(&m.to_string())),
                ),
            ),
        };
        (scan, idx)
    }

    #[allow(clippy::too_many_arguments)]
    fn vs_on(
        &mut self,
        id: &str,
        query: &str,
        query_field: &str,
        data: &str,
        index: Option<&str>,
        field: &str,
        k_prime: usize,
    ) -> String {
        let mut inputs = vec![query, data];
        inputs.extend(index);
        let mut n = PlanNode::new(id, OpKind::VectorSearch, &inputs)
            .with("field", s(field))
            .with("query_field", s(query_field))
            .with("k_prime", int(k_prime))
            .with("metric", s(&self.p.metric.to_string()));
        match self.mode {
            VsMode::Enn => {}
            VsMode::Ivf => n.set("nprobe", int(self.p.nprobe)),
            VsMode::Graph => n.set("ef", int(self.p.ef)),
        }
        self.add(n)
    }

    /// Search `table` for the user query vectors of `kind`.
    fn vs(&mut self, id: &str, kind: VectorKind, table: &str, field: &str, k_prime: usize) -> String {
        let q = self.query(&format!("{id}_q"), kind, self.p.batch);
        let (data, idx) = self.data_side(table, field);
        self.vs_on(id, &q, QUERY_EMBEDDING, &data, idx.as_deref(), field, k_prime)
    }

    fn revenue(&mut self, id: &str, input: &str) -> String {
        self.compute(id, input, &["l_extendedprice * (1 - l_discount) as revenue"])
    }
}

/// Builds `query` for `mode`. Unknown query ids are a parameter error.
pub fn builtin_plan(query: &str, mode: VsMode, params: &PlanParams) -> Result<PlanSpec> {
    params.validate()?;
    let name = query.to_ascii_uppercase();
    let mut b = Builder {
        plan: PlanSpec::new(&name),
        mode,
        p: params,
        salt: 0,
    };
    b.plan.annotate("vs_mode", s(&mode.to_string()));
    b.plan.annotate("k", int(params.k));
    match name.as_str() {
        "Q2" => q2(&mut b),
        "Q10" => q10(&mut b),
        "Q11" => q11(&mut b),
        "Q13" => q13(&mut b),
        "Q15" => q15(&mut b),
        "Q16" => q16(&mut b),
        "Q18" => q18(&mut b),
        "Q19" => q19(&mut b),
        _ => return Err(Error::param(format!("unknown query `{query}` (expected one of {QUERIES:?})"))),
    }
    b.plan.validate()?;
    Ok(b.plan)
}

fn q2(b: &mut Builder<'_>) {
    let k = b.p.k;
    let hits = b.vs("img_hits", VectorKind::Image, "images", "i_embedding", b.p.k_prime());
    let best = b.aggregate("part_best", &hits, &["i_partkey"], &["min(distance) as distance"]);
    let top = b.sort("top_parts", &best, &["distance asc", "i_partkey asc"], Some(k));
    let part = b.scan("part", "part");
    let tp = b.join("tp", &top, &part, "inner", &["i_partkey"], &["p_partkey"]);
    let ps = b.scan("partsupp", "partsupp");
    let sup = b.scan("supplier", "supplier");
    let nat = b.scan("nation", "nation");
    let reg = b.scan("region", "region");
    let eu = b.filter("europe", &reg, "r_name = 'EUROPE'");
    let ne = b.join("eu_nation", &nat, &eu, "inner", &["n_regionkey"], &["r_regionkey"]);
    let se = b.join("eu_supplier", &sup, &ne, "inner", &["s_nationkey"], &["n_nationkey"]);
    let pse = b.join("eu_partsupp", &ps, &se, "inner", &["ps_suppkey"], &["s_suppkey"]);
    let cand = b.join("cand", &tp, &pse, "inner", &["p_partkey"], &["ps_partkey"]);
    let mc = b.aggregate("min_cost", &cand, &["p_partkey"], &["min(ps_supplycost) as min_cost"]);
    let mcr = b.project("min_cost_r", &mc, &["p_partkey as mc_partkey", "min_cost"]);
    let best = b.join("cheapest", &cand, &mcr, "inner", &["p_partkey", "ps_supplycost"], &["mc_partkey", "min_cost"]);
    let out = b.project(
        "out",
        &best,
        &["s_acctbal", "s_name", "n_name", "p_partkey", "p_mfgr", "distance"],
    );
    b.sort(
        "result",
        &out,
        &["s_acctbal desc", "distance asc", "n_name asc", "s_name asc", "p_partkey asc"],
        Some(100),
    );
}

fn q10(b: &mut Builder<'_>) {
    let orders = b.scan("orders", "orders");
    let li = b.scan("lineitem", "lineitem");
    let cust = b.scan("customer", "customer");
    let nat = b.scan("nation", "nation");
    let o = b.filter(
        "quarter",
        &orders,
        "o_orderdate >= DATE '1993-10-01' AND o_orderdate < DATE '1994-01-01'",
    );
    let r = b.filter("returned", &li, "l_returnflag = 'R'");
    let ol = b.join("ol", &r, &o, "inner", &["l_orderkey"], &["o_orderkey"]);
    let olc = b.join("olc", &ol, &cust, "inner", &["o_custkey"], &["c_custkey"]);
    let rev = b.revenue("line_rev", &olc);
    let g = b.aggregate(
        "cust_rev",
        &rev,
        &["c_custkey", "c_name", "c_acctbal", "c_nationkey"],
        &["sum(revenue) as revenue"],
    );
    let gn = b.join("cust_nation", &g, &nat, "inner", &["c_nationkey"], &["n_nationkey"]);
    let top = b.sort("top20", &gn, &["revenue desc", "c_custkey asc"], Some(20));
    let hits = b.vs("rv_hits", VectorKind::Review, "reviews", "rv_embedding", b.p.k);
    let tk = b.aggregate("topk_cust", &hits, &["rv_custkey"], &[]);
    let tkr = b.project("topk_cust_r", &tk, &["rv_custkey as topk_custkey"]);
    let j = b.join("flagged", &top, &tkr, "left", &["c_custkey"], &["topk_custkey"]);
    let c = b.compute(
        "flag",
        &j,
        &["CASE WHEN topk_custkey IS NULL THEN 0 ELSE 1 END as is_in_top_k"],
    );
    let out = b.project(
        "out",
        &c,
        &["c_custkey", "c_name", "revenue", "c_acctbal", "n_name", "is_in_top_k"],
    );
    b.sort("result", &out, &["revenue desc", "c_custkey asc"], None);
}

fn q11(b: &mut Builder<'_>) {
    let ps = b.scan("partsupp", "partsupp");
    let sup = b.scan("supplier", "supplier");
    let nat = b.scan("nation", "nation");
    let de = b.filter("germany", &nat, "n_name = 'GERMANY'");
    let sn = b.join("de_supplier", &sup, &de, "inner", &["s_nationkey"], &["n_nationkey"]);
    let pss = b.join("de_partsupp", &ps, &sn, "inner", &["ps_suppkey"], &["s_suppkey"]);
    let v = b.compute("stock_value", &pss, &["ps_supplycost * ps_availqty as value"]);
    let pv = b.aggregate("part_value", &v, &["ps_partkey"], &["sum(value) as part_value"]);
    let tot = b.aggregate("total_value", &v, &[], &["sum(value) as total_value"]);
    let frac = b.p.q11_fraction;
    let th = b.compute(
        "threshold",
        &tot,
        &[&format!("total_value * {frac:?} as threshold"), "1 as t_one"],
    );
    let pk = b.compute("part_value_k", &pv, &["1 as p_one"]);
    let x = b.join("with_threshold", &pk, &th, "inner", &["p_one"], &["t_one"]);
    let q = b.filter("qualifying", &x, "part_value > threshold");
    let qual = b.project("qual", &q, &["ps_partkey", "part_value"]);
    let (img, idx) = b.data_side("images", "i_embedding");
    let batch = b.join("batch", &img, &qual, "inner", &["i_partkey"], &["ps_partkey"]);
    let hits = b.vs_on("hits", &batch, "i_embedding", &img, idx.as_deref(), "i_embedding", b.p.k_prime());
    let pf = b.add(
        PlanNode::new("other_part", OpKind::Postfilter, &[&hits])
            .with("pred", ParamValue::Str("q_i_partkey <> i_partkey".into()))
            .with("k", int(1)),
    );
    let out = b.project(
        "out",
        &pf,
        &[
            "q_ps_partkey as ps_partkey",
            "q_part_value as part_value",
            "q_i_imagekey as image",
            "i_partkey as similar_partkey",
            "distance",
        ],
    );
    b.sort("result", &out, &["part_value desc", "ps_partkey asc", "image asc"], None);
}

fn q13(b: &mut Builder<'_>) {
    let cust = b.scan("customer", "customer");
    let orders = b.scan("orders", "orders");
    let co = b.join("cust_orders", &cust, &orders, "left", &["c_custkey"], &["o_custkey"]);
    let cc = b.aggregate("c_orders", &co, &["c_custkey"], &["count(o_orderkey) as c_count"]);
    let hits = b.vs("rv_hits", VectorKind::Review, "reviews", "rv_embedding", b.p.k);
    let sc = b.aggregate("sim_by_cust", &hits, &["rv_custkey"], &["count(*) as sim_n"]);
    let scr = b.project("sim_by_cust_r", &sc, &["rv_custkey as s_custkey", "sim_n"]);
    let j = b.join("with_sim", &cc, &scr, "left", &["c_custkey"], &["s_custkey"]);
    let c = b.compute(
        "sim_count",
        &j,
        &["CASE WHEN sim_n IS NULL THEN 0 ELSE sim_n END as sim_count"],
    );
    let g = b.aggregate("dist", &c, &["c_count", "sim_count"], &["count(*) as custdist"]);
    b.sort(
        "result",
        &g,
        &["custdist desc", "c_count desc", "sim_count desc"],
        None,
    );
}

fn q15(b: &mut Builder<'_>) {
    let li = b.scan("lineitem", "lineitem");
    let sup = b.scan("supplier", "supplier");
    let ps = b.scan("partsupp", "partsupp");
    let lf = b.filter(
        "quarter",
        &li,
        "l_shipdate >= DATE '1996-01-01' AND l_shipdate < DATE '1996-04-01'",
    );
    let rev = b.revenue("line_rev", &lf);
    let sr = b.aggregate("supp_rev", &rev, &["l_suppkey"], &["sum(revenue) as total_revenue"]);
    let top = b.sort("top_supplier", &sr, &["total_revenue desc", "l_suppkey asc"], Some(1));
    let ts = b.join("top_supp", &sup, &top, "inner", &["s_suppkey"], &["l_suppkey"]);
    let tps = b.join("top_partsupp", &ts, &ps, "inner", &["s_suppkey"], &["ps_suppkey"]);
    let allowed = b.project("allowed", &tps, &["ps_partkey", "s_suppkey", "s_name", "total_revenue"]);
    let k = b.p.k;
    let q = b.query("hits_q", VectorKind::Review, b.p.batch);
    let (rv, idx) = b.data_side("reviews", "rv_embedding");
    let hits = match idx {
        None => {
            let scoped = b.join("scoped_reviews", &rv, &allowed, "semi", &["rv_partkey"], &["ps_partkey"]);
            b.vs_on("hits", &q, QUERY_EMBEDDING, &scoped, None, "rv_embedding", k)
        }
        Some(idx) => {
            let wide = b.vs_on(
                "wide_hits",
                &q,
                QUERY_EMBEDDING,
                &rv,
                Some(&idx),
                "rv_embedding",
                k * b.p.q15_oversample,
            );
            let sj = b.join("scoped_hits", &wide, &allowed, "semi", &["rv_partkey"], &["ps_partkey"]);
            b.add(
                PlanNode::new("hits", OpKind::Postfilter, &[&sj])
                    .with("pred", ParamValue::Str("TRUE".into()))
                    .with("k", int(k)),
            )
        }
    };
    let res = b.join("hits_supplier", &hits, &allowed, "inner", &["rv_partkey"], &["ps_partkey"]);
    let out = b.project(
        "out",
        &res,
        &["s_suppkey", "s_name", "total_revenue", "rv_reviewkey", "rv_partkey", "distance"],
    );
    b.sort("result", &out, &["distance asc", "rv_reviewkey asc"], None);
}

fn q16(b: &mut Builder<'_>) {
    let hits = b.vs("rv_hits", VectorKind::Review, "reviews", "rv_embedding", b.p.k);
    let ps = b.scan("partsupp", "partsupp");
    let part = b.scan("part", "part");
    let hp = b.join("hit_suppliers", &hits, &ps, "inner", &["rv_partkey"], &["ps_partkey"]);
    let bad = b.aggregate("bad", &hp, &["ps_suppkey"], &[]);
    let badr = b.project("bad_r", &bad, &["ps_suppkey as bad_suppkey"]);
    let pf = b.filter(
        "part_filter",
        &part,
        "p_brand <> 'Brand#45' AND p_type NOT LIKE 'MEDIUM POLISHED%' AND p_size IN (49, 14, 23, 45, 19, 3, 36, 9)",
    );
    let psp = b.join("ps_part", &ps, &pf, "inner", &["ps_partkey"], &["p_partkey"]);
    let keep = b.join("not_bad", &psp, &badr, "anti", &["ps_suppkey"], &["bad_suppkey"]);
    let d = b.aggregate("distinct", &keep, &["p_brand", "p_type", "p_size", "ps_suppkey"], &[]);
    let cnt = b.aggregate(
        "counts",
        &d,
        &["p_brand", "p_type", "p_size"],
        &["count(ps_suppkey) as supplier_cnt"],
    );
    b.sort(
        "result",
        &cnt,
        &["supplier_cnt desc", "p_brand asc", "p_type asc", "p_size asc"],
        None,
    );
}

fn q18(b: &mut Builder<'_>) {
    let li = b.scan("lineitem", "lineitem");
    let orders = b.scan("orders", "orders");
    let cust = b.scan("customer", "customer");
    let lq = b.aggregate("order_qty", &li, &["l_orderkey"], &["sum(l_quantity) as order_qty"]);
    let th = b.p.q18_quantity;
    let big = b.filter("large", &lq, &format!("order_qty > {th:?}"));
    let bo = b.join("large_orders", &orders, &big, "semi", &["o_orderkey"], &["l_orderkey"]);
    let boc = b.join("large_cust", &bo, &cust, "inner", &["o_custkey"], &["c_custkey"]);
    let bl = b.join("large_lines", &boc, &li, "inner", &["o_orderkey"], &["l_orderkey"]);
    let hits = b.vs("img_hits", VectorKind::Image, "images", "i_embedding", b.p.k);
    let sp = b.aggregate("sim_parts", &hits, &["i_partkey"], &[]);
    let spr = b.project("sim_parts_r", &sp, &["i_partkey as sim_partkey"]);
    let j = b.join("with_sim", &bl, &spr, "left", &["l_partkey"], &["sim_partkey"]);
    let c = b.compute(
        "sim_qty",
        &j,
        &["CASE WHEN sim_partkey IS NULL THEN 0.0 ELSE l_quantity END as sim_qty"],
    );
    let g = b.aggregate(
        "per_order",
        &c,
        &["c_name", "c_custkey", "o_orderkey", "o_orderdate", "o_totalprice"],
        &["sum(l_quantity) as sum_qty", "sum(sim_qty) as similar_qty"],
    );
    b.sort(
        "result",
        &g,
        &["similar_qty desc", "o_totalprice desc", "o_orderdate asc", "o_orderkey asc"],
        Some(100),
    );
}

const Q19_BRANCHES: &str = "(p_brand = 'Brand#12' AND p_container IN ('SM CASE', 'SM BOX', 'SM PACK', 'SM PKG') \
AND l_quantity >= 1 AND l_quantity <= 11 AND p_size >= 1 AND p_size <= 5) \
OR (p_brand = 'Brand#23' AND p_container IN ('MED BAG', 'MED BOX', 'MED PKG', 'MED PACK') \
AND l_quantity >= 10 AND l_quantity <= 20 AND p_size >= 1 AND p_size <= 10) \
OR (p_brand = 'Brand#34' AND p_container IN ('LG CASE', 'LG BOX', 'LG PACK', 'LG PKG') \
AND l_quantity >= 20 AND l_quantity <= 30 AND p_size >= 1 AND p_size <= 15) \
OR r_partkey IS NOT NULL OR im_partkey IS NOT NULL";

fn q19(b: &mut Builder<'_>) {
    let rh = b.vs("rv_hits", VectorKind::Review, "reviews", "rv_embedding", b.p.k);
    let rp = b.aggregate("rv_parts", &rh, &["rv_partkey"], &[]);
    let rpr = b.project("rv_parts_r", &rp, &["rv_partkey as r_partkey"]);
    let ih = b.vs("img_hits", VectorKind::Image, "images", "i_embedding", b.p.k);
    let ip = b.aggregate("img_parts", &ih, &["i_partkey"], &[]);
    let ipr = b.project("img_parts_r", &ip, &["i_partkey as im_partkey"]);
    let li = b.scan("lineitem", "lineitem");
    let part = b.scan("part", "part");
    let lf = b.filter(
        "air_person",
        &li,
        "l_shipmode IN ('AIR', 'REG AIR') AND l_shipinstruct = 'DELIVER IN PERSON'",
    );
    let lp = b.join("line_part", &lf, &part, "inner", &["l_partkey"], &["p_partkey"]);
    let l1 = b.join("with_rv", &lp, &rpr, "left", &["p_partkey"], &["r_partkey"]);
    let l2 = b.join("with_img", &l1, &ipr, "left", &["p_partkey"], &["im_partkey"]);
    let f = b.filter("branches", &l2, Q19_BRANCHES);
    let rev = b.revenue("line_rev", &f);
    b.aggregate("result", &rev, &[], &["sum(revenue) as revenue"]);
}

/// Default cap on device top-k used when a plan is checked without a
/// hardware profile.
pub const PLAN_TOPK_CAP: usize = DEFAULT_GPU_TOPK_CAP;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::plan::parse_plan;

    #[test]
    fn all_builtins_validate_and_round_trip() {
        let p = PlanParams::default();
        for q in QUERIES {
            for m in VS_MODES {
                let plan = builtin_plan(q, m, &p).unwrap();
                let text = plan.to_string();
                assert_eq!(parse_plan(&text).unwrap(), plan, "{q} {m}");
                let n_index = plan.nodes_of(OpKind::Index).count();
                assert_eq!(n_index == 0, m == VsMode::Enn, "{q} {m}");
            }
        }
    }

    #[test]
    fn q19_has_two_searches_and_q15_oversamples() {
        let p = PlanParams::default();
        let q19 = builtin_plan("Q19", VsMode::Ivf, &p).unwrap();
        assert_eq!(q19.nodes_of(OpKind::VectorSearch).count(), 2);
        let q15 = builtin_plan("Q15", VsMode::Graph, &p).unwrap();
        let wide = q15.node("wide_hits").unwrap();
        assert_eq!(wide.int_param("k_prime").unwrap(), 5000);
        assert!(wide.int_param("k_prime").unwrap() as usize > PLAN_TOPK_CAP);
        assert!(builtin_plan("Q99", VsMode::Enn, &p).is_err());
    }
}
