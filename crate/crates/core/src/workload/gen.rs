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


//! Seeded generator for the TPC-H-shaped tables plus REVIEWS and IMAGES.
//!
//! Relational values are uniform or categorical draws sized for the eight
//! query plans; they follow TPC-H cardinalities and key formulas but not
//! dbgen's text generators.

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::columnar::{days_from_civil, Column, ColumnData, DataType, EmbeddingColumn, Field, Schema, Table};
use crate::error::{Error, Result};

/// Parts per unit of scale factor.
pub const PARTS_PER_SF: f64 = 200_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub sf: f64,
    pub d_r: usize,
    pub d_i: usize,
    /// Mean reviews per part.
    pub r_bar: f64,
    /// Mean images per part.
    pub i_bar: f64,
    pub n_clusters: usize,
    /// Norm of the per-vector perturbation around its mixture center.
    pub cluster_noise: f64,
    pub review_sigma: f64,
    pub image_sd: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            sf: 0.01,
            d_r: 64,
            d_i: 64,
            r_bar: 12.0,
            i_bar: 4.0,
            n_clusters: 64,
            cluster_noise: 1.0,
            review_sigma: 1.0,
            image_sd: 1.5,
            seed: 42,
        }
    }
}

impl DatasetSpec {
    pub fn parts(&self) -> usize {
        (self.sf * PARTS_PER_SF).round() as usize
    }

    pub fn suppliers(&self) -> usize {
        ((self.sf * 10_000.0).round() as usize).max(4)
    }

    pub fn customers(&self) -> usize {
        ((self.sf * 150_000.0).round() as usize).max(3)
    }

    pub fn orders(&self) -> usize {
        self.customers() * 10
    }

    /// Expected embedding bytes with 4-byte floats.
    pub fn expected_vec_bytes(&self) -> f64 {
        self.sf * PARTS_PER_SF * (self.r_bar * self.d_r as f64 + self.i_bar * self.d_i as f64) * 4.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.sf.is_nan() || self.sf <= 0.0 || self.parts() == 0 {
            return Err(Error::param(format!("scale factor {} yields no parts", self.sf)));
        }
        if self.d_r == 0 || self.d_i == 0 || self.n_clusters == 0 {
            return Err(Error::param("dimensions and cluster count must be positive"));
        }
        if !(self.r_bar > 0.0 && self.i_bar >= 0.0 && self.review_sigma > 0.0 && self.image_sd >= 0.0) {
            return Err(Error::param("count-law parameters out of range"));
        }
        Ok(())
    }
}

pub const TABLES: [&str; 10] = [
    "region", "nation", "part", "supplier", "partsupp", "customer", "orders", "lineitem", "reviews",
    "images",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub region: Table,
    pub nation: Table,
    pub part: Table,
    pub supplier: Table,
    pub partsupp: Table,
    pub customer: Table,
    pub orders: Table,
    pub lineitem: Table,
    pub reviews: Table,
    pub images: Table,
    /// Unit-norm mixture centers used for the review embeddings.
    pub review_centers: EmbeddingColumn,
    pub image_centers: EmbeddingColumn,
}

impl Dataset {
    pub fn table(&self, name: &str) -> Result<&Table> {
        Ok(match name {
            "region" => &self.region,
            "nation" => &self.nation,
            "part" => &self.part,
            "supplier" => &self.supplier,
            "partsupp" => &self.partsupp,
            "customer" => &self.customer,
            "orders" => &self.orders,
            "lineitem" => &self.lineitem,
            "reviews" => &self.reviews,
            "images" => &self.images,
            _ => return Err(Error::schema(format!("unknown table `{name}`"))),
        })
    }

    pub fn relational_bytes(&self) -> u64 {
        TABLES.iter().map(|t| self.table(t).unwrap().byte_size()).sum::<u64>()
            - self.review_embeddings().byte_size()
            - self.image_embeddings().byte_size()
    }

    pub fn review_embeddings(&self) -> &EmbeddingColumn {
        self.reviews.embedding("rv_embedding").expect("generated schema")
    }

    pub fn image_embeddings(&self) -> &EmbeddingColumn {
        self.images.embedding("i_embedding").expect("generated schema")
    }

    /// Foreign keys that do not resolve, as `(table.column, value)`.
    pub fn dangling_keys(&self) -> Vec<(String, i64)> {
        let mut bad = Vec::new();
        let keys = |t: &Table, c: &str| -> std::collections::HashSet<i64> {
            t.column(c).unwrap().as_i64().unwrap().iter().copied().collect()
        };
        let region = keys(&self.region, "r_regionkey");
        let nation = keys(&self.nation, "n_nationkey");
        let part = keys(&self.part, "p_partkey");
        let supp = keys(&self.supplier, "s_suppkey");
        let cust = keys(&self.customer, "c_custkey");
        let order = keys(&self.orders, "o_orderkey");
        let ps: std::collections::HashSet<(i64, i64)> = {
            let p = self.partsupp.column("ps_partkey").unwrap().as_i64().unwrap();
            let s = self.partsupp.column("ps_suppkey").unwrap().as_i64().unwrap();
            p.iter().copied().zip(s.iter().copied()).collect()
        };
        let checks: [(&Table, &str, &std::collections::HashSet<i64>); 12] = [
            (&self.nation, "n_regionkey", &region),
            (&self.supplier, "s_nationkey", &nation),
            (&self.customer, "c_nationkey", &nation),
            (&self.partsupp, "ps_partkey", &part),
            (&self.partsupp, "ps_suppkey", &supp),
            (&self.orders, "o_custkey", &cust),
            (&self.lineitem, "l_orderkey", &order),
            (&self.lineitem, "l_partkey", &part),
            (&self.lineitem, "l_suppkey", &supp),
            (&self.reviews, "rv_partkey", &part),
            (&self.reviews, "rv_custkey", &cust),
            (&self.images, "i_partkey", &part),
        ];
        for (t, c, set) in checks {
            for v in t.column(c).unwrap().as_i64().unwrap() {
                if !set.contains(v) {
                    bad.push((c.to_string(), *v));
                }
            }
        }
        let lp = self.lineitem.column("l_partkey").unwrap().as_i64().unwrap();
        let ls = self.lineitem.column("l_suppkey").unwrap().as_i64().unwrap();
        for (p, s) in lp.iter().zip(ls) {
            if !ps.contains(&(*p, *s)) {
                bad.push(("l_partkey,l_suppkey".into(), *p));
            }
        }
        bad
    }
}

const REGIONS: [&str; 5] = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"];
const NATIONS: [(&str, i64); 25] = [
    ("ALGERIA", 0),
    ("ARGENTINA", 1),
    ("BRAZIL", 1),
    ("CANADA", 1),
    ("EGYPT", 4),
    ("ETHIOPIA", 0),
    ("FRANCE", 3),
    ("GERMANY", 3),
    ("INDIA", 2),
    ("INDONESIA", 2),
    ("IRAN", 4),
    ("IRAQ", 4),
    ("JAPAN", 2),
    ("JORDAN", 4),
    ("KENYA", 0),
    ("MOROCCO", 0),
    ("MOZAMBIQUE", 0),
    ("PERU", 1),
    ("CHINA", 2),
    ("ROMANIA", 3),
    ("SAUDI ARABIA", 4),
    ("VIETNAM", 2),
    ("RUSSIA", 3),
    ("UNITED KINGDOM", 3),
    ("UNITED STATES", 1),
];
const TYPE_S1: [&str; 6] = ["STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"];
const TYPE_S2: [&str; 5] = ["ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"];
const TYPE_S3: [&str; 5] = ["TIN", "NICKEL", "BRASS", "STEEL", "COPPER"];
pub const CONTAINER_S1: [&str; 5] = ["SM", "MED", "LG", "JUMBO", "WRAP"];
pub const CONTAINER_S2: [&str; 8] = ["CASE", "BOX", "BAG", "JAR", "PKG", "PACK", "CAN", "DRUM"];
const SEGMENTS: [&str; 5] = ["AUTOMOBILE", "BUILDING", "FURNITURE", "MACHINERY", "HOUSEHOLD"];
const SHIPMODES: [&str; 7] = ["REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"];
const INSTRUCTIONS: [&str; 4] = ["DELIVER IN PERSON", "COLLECT COD", "NONE", "TAKE BACK RETURN"];
const COLORS: [&str; 16] = [
    "almond", "antique", "azure", "blush", "burnished", "chartreuse", "coral", "cyan", "forest",
    "ivory", "khaki", "lavender", "linen", "navy", "orchid", "sienna",
];

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn cents(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 100.0
}

fn table(fields: Vec<(&str, DataType)>, data: Vec<ColumnData>) -> Table {
    let schema = Schema::new(fields.into_iter().map(|(n, t)| Field::new(n, t)).collect())
        .expect("generator schema");
    Table::new(schema, data.into_iter().map(Column::new).collect()).expect("generator columns")
}

/// TPC-H supplier of the `i`-th partsupp entry of `partkey`.
pub fn partsupp_supplier(partkey: i64, i: i64, suppliers: i64) -> i64 {
    (partkey + i * (suppliers / 4 + (partkey - 1) / suppliers)) % suppliers + 1
}

pub fn retail_price(partkey: i64) -> f64 {
    (90_000 + (partkey / 10) % 20_001 + 100 * (partkey % 1000)) as f64 / 100.0
}

/// `n` unit vectors drawn from a standard normal.
fn unit_centers(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<f32> {
    let mut out = Vec::with_capacity(n * d);
    for _ in 0..n {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        push_normalized(&mut out, &v);
    }
    out
}

fn push_normalized(out: &mut Vec<f32>, v: &[f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    out.extend(v.iter().map(|x| (x / norm) as f32));
}

/// Unit vector near `center`, perturbed by an isotropic Gaussian whose
/// expected norm is `noise`.
pub fn perturbed(rng: &mut ChaCha8Rng, center: &[f32], noise: f64, out: &mut Vec<f32>) {
    let scale = noise / (center.len() as f64).sqrt();
    let v: Vec<f64> = center
        .iter()
        .map(|&c| c as f64 + scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    push_normalized(out, &v);
}

pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let seed = spec.seed;
    let n_part = spec.parts() as i64;
    let n_supp = spec.suppliers() as i64;
    let n_cust = spec.customers() as i64;
    let n_ord = spec.orders() as i64;

    let region = table(
        vec![("r_regionkey", DataType::Int64), ("r_name", DataType::Utf8)],
        vec![
            ColumnData::Int64((0..5).collect()),
            ColumnData::Utf8(REGIONS.iter().map(|s| s.to_string()).collect()),
        ],
    );
    let nation = table(
        vec![
            ("n_nationkey", DataType::Int64),
            ("n_name", DataType::Utf8),
            ("n_regionkey", DataType::Int64),
        ],
        vec![
            ColumnData::Int64((0..25).collect()),
            ColumnData::Utf8(NATIONS.iter().map(|n| n.0.to_string()).collect()),
            ColumnData::Int64(NATIONS.iter().map(|n| n.1).collect()),
        ],
    );

    // PART
    let mut rng = rng_for(seed, 1);
    let mut p_name = Vec::new();
    let mut p_mfgr = Vec::new();
    let mut p_brand = Vec::new();
    let mut p_type = Vec::new();
    let mut p_size = Vec::new();
    let mut p_container = Vec::new();
    for _ in 0..n_part {
        let words: Vec<&str> = COLORS.choose_multiple(&mut rng, 3).copied().collect();
        p_name.push(words.join(" "));
        let m = rng.gen_range(1..=5);
        let b = rng.gen_range(1..=5);
        p_mfgr.push(format!("Manufacturer#{m}"));
        p_brand.push(format!("Brand#{m}{b}"));
        p_type.push(format!(
            "{} {} {}",
            TYPE_S1.choose(&mut rng).unwrap(),
            TYPE_S2.choose(&mut rng).unwrap(),
            TYPE_S3.choose(&mut rng).unwrap()
        ));
        p_size.push(rng.gen_range(1..=50));
        p_container.push(format!(
            "{} {}",
            CONTAINER_S1.choose(&mut rng).unwrap(),
            CONTAINER_S2.choose(&mut rng).unwrap()
        ));
    }
    let part = table(
        vec![
            ("p_partkey", DataType::Int64),
            ("p_name", DataType::Utf8),
            ("p_mfgr", DataType::Utf8),
            ("p_brand", DataType::Utf8),
            ("p_type", DataType::Utf8),
            ("p_size", DataType::Int64),
            ("p_container", DataType::Utf8),
            ("p_retailprice", DataType::Float64),
        ],
        vec![
            ColumnData::Int64((1..=n_part).collect()),
            ColumnData::Utf8(p_name),
            ColumnData::Utf8(p_mfgr),
            ColumnData::Utf8(p_brand),
            ColumnData::Utf8(p_type),
            ColumnData::Int64(p_size),
            ColumnData::Utf8(p_container),
            ColumnData::Float64((1..=n_part).map(retail_price).collect()),
        ],
    );

    // SUPPLIER
    let mut rng = rng_for(seed, 2);
    let mut s_nation = Vec::new();
    let mut s_acct = Vec::new();
    for _ in 0..n_supp {
        s_nation.push(rng.gen_range(0..25));
        s_acct.push(cents(&mut rng, -99_999, 999_999));
    }
    let supplier = table(
        vec![
            ("s_suppkey", DataType::Int64),
            ("s_name", DataType::Utf8),
            ("s_nationkey", DataType::Int64),
            ("s_acctbal", DataType::Float64),
        ],
        vec![
            ColumnData::Int64((1..=n_supp).collect()),
            ColumnData::Utf8((1..=n_supp).map(|k| format!("Supplier#{k:09}")).collect()),
            ColumnData::Int64(s_nation),
            ColumnData::Float64(s_acct),
        ],
    );

    // PARTSUPP
    let mut rng = rng_for(seed, 3);
    let (mut ps_p, mut ps_s, mut ps_q, mut ps_c) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for p in 1..=n_part {
        for i in 0..4 {
            ps_p.push(p);
            ps_s.push(partsupp_supplier(p, i, n_supp));
            ps_q.push(rng.gen_range(1..=9999));
            ps_c.push(cents(&mut rng, 100, 100_000));
        }
    }
    let partsupp = table(
        vec![
            ("ps_partkey", DataType::Int64),
            ("ps_suppkey", DataType::Int64),
            ("ps_availqty", DataType::Int64),
            ("ps_supplycost", DataType::Float64),
        ],
        vec![
            ColumnData::Int64(ps_p),
            ColumnData::Int64(ps_s),
            ColumnData::Int64(ps_q),
            ColumnData::Float64(ps_c),
        ],
    );

    // CUSTOMER
    let mut rng = rng_for(seed, 4);
    let (mut c_nat, mut c_acct, mut c_seg) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n_cust {
        c_nat.push(rng.gen_range(0..25));
        c_acct.push(cents(&mut rng, -99_999, 999_999));
        c_seg.push(SEGMENTS.choose(&mut rng).unwrap().to_string());
    }
    let customer = table(
        vec![
            ("c_custkey", DataType::Int64),
            ("c_name", DataType::Utf8),
            ("c_nationkey", DataType::Int64),
            ("c_acctbal", DataType::Float64),
            ("c_mktsegment", DataType::Utf8),
        ],
        vec![
            ColumnData::Int64((1..=n_cust).collect()),
            ColumnData::Utf8((1..=n_cust).map(|k| format!("Customer#{k:09}")).collect()),
            ColumnData::Int64(c_nat),
            ColumnData::Float64(c_acct),
            ColumnData::Utf8(c_seg),
        ],
    );

    // ORDERS and LINEITEM
    let mut rng = rng_for(seed, 5);
    let start = days_from_civil(1992, 1, 1);
    let end = days_from_civil(1998, 8, 2) - 151;
    let current = days_from_civil(1995, 6, 17);
    let (mut o_key, mut o_cust, mut o_date, mut o_total) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut li: [Vec<i64>; 4] = Default::default();
    let (mut l_qty, mut l_price, mut l_disc) = (Vec::new(), Vec::new(), Vec::new());
    let (mut l_flag, mut l_ship, mut l_mode, mut l_instr) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for o in 1..=n_ord {
        // Every third customer places no orders, as in TPC-H.
        let cust = loop {
            let c = rng.gen_range(1..=n_cust);
            if c % 3 != 0 {
                break c;
            }
        };
        let date = rng.gen_range(start..=end);
        let mut total = 0.0;
        for line in 1..=rng.gen_range(1..=7) {
            let p = rng.gen_range(1..=n_part);
            let s = partsupp_supplier(p, rng.gen_range(0..4), n_supp);
            let qty = rng.gen_range(1..=50) as f64;
            let price = qty * retail_price(p);
            let disc = rng.gen_range(0..=10) as f64 / 100.0;
            let ship = date + rng.gen_range(1..=121);
            let receipt = ship + rng.gen_range(1..=30);
            let flag = if receipt <= current {
                if rng.gen_bool(0.5) { "R" } else { "A" }
            } else {
                "N"
            };
            total += price * (1.0 - disc);
            li[0].push(o);
            li[1].push(p);
            li[2].push(s);
            li[3].push(line);
            l_qty.push(qty);
            l_price.push(price);
            l_disc.push(disc);
            l_flag.push(flag.to_string());
            l_ship.push(ship);
            l_mode.push(SHIPMODES.choose(&mut rng).unwrap().to_string());
            l_instr.push(INSTRUCTIONS.choose(&mut rng).unwrap().to_string());
        }
        o_key.push(o);
        o_cust.push(cust);
        o_date.push(date);
        o_total.push((total * 100.0).round() / 100.0);
    }
    let orders = table(
        vec![
            ("o_orderkey", DataType::Int64),
            ("o_custkey", DataType::Int64),
            ("o_totalprice", DataType::Float64),
            ("o_orderdate", DataType::Date32),
        ],
        vec![
            ColumnData::Int64(o_key),
            ColumnData::Int64(o_cust),
            ColumnData::Float64(o_total),
            ColumnData::Date32(o_date),
        ],
    );
    let [l_order, l_part, l_supp, l_line] = li;
    let lineitem = table(
        vec![
            ("l_orderkey", DataType::Int64),
            ("l_partkey", DataType::Int64),
            ("l_suppkey", DataType::Int64),
            ("l_linenumber", DataType::Int64),
            ("l_quantity", DataType::Float64),
            ("l_extendedprice", DataType::Float64),
            ("l_discount", DataType::Float64),
            ("l_returnflag", DataType::Utf8),
            ("l_shipdate", DataType::Date32),
            ("l_shipmode", DataType::Utf8),
            ("l_shipinstruct", DataType::Utf8),
        ],
        vec![
            ColumnData::Int64(l_order),
            ColumnData::Int64(l_part),
            ColumnData::Int64(l_supp),
            ColumnData::Int64(l_line),
            ColumnData::Float64(l_qty),
            ColumnData::Float64(l_price),
            ColumnData::Float64(l_disc),
            ColumnData::Utf8(l_flag),
            ColumnData::Date32(l_ship),
            ColumnData::Utf8(l_mode),
            ColumnData::Utf8(l_instr),
        ],
    );

    // REVIEWS and IMAGES
    let mut rng = rng_for(seed, 6);
    let review_centers = unit_centers(&mut rng, spec.n_clusters, spec.d_r);
    let image_centers = unit_centers(&mut rng, spec.n_clusters, spec.d_i);
    let mu = spec.r_bar.ln() - spec.review_sigma * spec.review_sigma / 2.0;
    let review_law = LogNormal::new(mu, spec.review_sigma).map_err(|e| Error::param(e.to_string()))?;
    let image_law = Normal::new(spec.i_bar, spec.image_sd).map_err(|e| Error::param(e.to_string()))?;
    let cluster = Uniform::new(0, spec.n_clusters);
    let cust_law = Uniform::new_inclusive(1, n_cust);
    let (mut rv_part, mut rv_cust, mut rv_rating, mut rv_emb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut i_part, mut i_emb) = (Vec::new(), Vec::new());
    for p in 1..=n_part {
        let nr = review_law.sample(&mut rng).round().max(0.0) as usize;
        let ni = image_law.sample(&mut rng).round().max(0.0) as usize;
        let rc = cluster.sample(&mut rng);
        let ic = cluster.sample(&mut rng);
        for _ in 0..nr {
            rv_part.push(p);
            rv_cust.push(cust_law.sample(&mut rng));
            rv_rating.push(rng.gen_range(1..=5));
            let c = &review_centers[rc * spec.d_r..(rc + 1) * spec.d_r];
            perturbed(&mut rng, c, spec.cluster_noise, &mut rv_emb);
        }
        for _ in 0..ni {
            i_part.push(p);
            let c = &image_centers[ic * spec.d_i..(ic + 1) * spec.d_i];
            perturbed(&mut rng, c, spec.cluster_noise, &mut i_emb);
        }
    }
    let n_rev = rv_part.len() as i64;
    let n_img = i_part.len() as i64;
    let reviews = table(
        vec![
            ("rv_reviewkey", DataType::Int64),
            ("rv_partkey", DataType::Int64),
            ("rv_custkey", DataType::Int64),
            ("rv_rating", DataType::Int64),
            ("rv_embedding", DataType::Embedding(spec.d_r)),
        ],
        vec![
            ColumnData::Int64((1..=n_rev).collect()),
            ColumnData::Int64(rv_part),
            ColumnData::Int64(rv_cust),
            ColumnData::Int64(rv_rating),
            ColumnData::Embedding(EmbeddingColumn::new(spec.d_r, rv_emb)?),
        ],
    );
    let images = table(
        vec![
            ("i_imagekey", DataType::Int64),
            ("i_partkey", DataType::Int64),
            ("i_embedding", DataType::Embedding(spec.d_i)),
        ],
        vec![
            ColumnData::Int64((1..=n_img).collect()),
            ColumnData::Int64(i_part),
            ColumnData::Embedding(EmbeddingColumn::new(spec.d_i, i_emb)?),
        ],
    );

    Ok(Dataset {
        spec: spec.clone(),
        region,
        nation,
        part,
        supplier,
        partsupp,
        customer,
        orders,
        lineitem,
        reviews,
        images,
        review_centers: EmbeddingColumn::new(spec.d_r, review_centers)?,
        image_centers: EmbeddingColumn::new(spec.d_i, image_centers)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKind {
    Review,
    Image,
}

impl std::fmt::Display for VectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VectorKind::Review => "review",
            VectorKind::Image => "image",
        })
    }
}

impl std::str::FromStr for VectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "review" | "reviews" => Ok(VectorKind::Review),
            "image" | "images" => Ok(VectorKind::Image),
            _ => Err(Error::param(format!("unknown vector kind `{s}`"))),
        }
    }
}

/// Query vectors drawn near randomly chosen mixture centers. The spread is
/// a quarter of the data noise so queries land inside a cluster.
pub fn make_query_vectors(ds: &Dataset, kind: VectorKind, n: usize, seed: u64) -> Result<EmbeddingColumn> {
    let (centers, data) = match kind {
        VectorKind::Review => (&ds.review_centers, ds.review_embeddings()),
        VectorKind::Image => (&ds.image_centers, ds.image_embeddings()),
    };
    if data.is_empty() {
        return Err(Error::EmptyInput(format!("no {kind:?} embeddings to query")));
    }
    let mut rng = rng_for(seed, 100 + kind as u64);
    let mut out = Vec::with_capacity(n * centers.dim());
    for _ in 0..n {
        let c = rng.gen_range(0..centers.count());
        perturbed(&mut rng, centers.row(c), ds.spec.cluster_noise * 0.25, &mut out);
    }
    EmbeddingColumn::new(centers.dim(), out)
}
