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


mod common;

use common::{brute_force, column, gaussian_vectors, grid_vectors, per_query, rng};
use hvec_core::columnar::{Column, ColumnData, DataType, Field, Schema, Table};
use hvec_core::metrics::{recall, rel_err};
use hvec_core::vecops::{enn_search, graph_build, graph_search, ivf_build, ivf_search, Layout, Metric, SearchParams};
use proptest::prelude::*;

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![Just(Metric::SquaredL2), Just(Metric::InnerProduct)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enn_matches_brute_force(seed in any::<u64>(), nq in 1usize..20, n in 1usize..120, dim in 1usize..12,
                               kp in 1usize..30, grid in any::<bool>(), m in metric()) {
        let mut r = rng(seed);
        let gen = if grid { grid_vectors } else { gaussian_vectors };
        let (q, d) = (gen(&mut r, nq, dim), gen(&mut r, n, dim));
        let nt = enn_search(&column(&q, dim), &column(&d, dim), &SearchParams::new(1).with_k_prime(kp), m).unwrap();
        nt.check_invariants().unwrap();
        let got = per_query(&nt, nq);
        let want = brute_force(&q, &d, kp, m);
        for (g, w) in got.iter().zip(&want) {
            prop_assert_eq!(g.len(), w.len());
            for (a, b) in g.iter().zip(w) {
                prop_assert_eq!(a.0, b.0);
                prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
            }
        }
    }

    #[test]
    fn ivf_full_probe_is_exact(seed in any::<u64>(), n in 8usize..200, dim in 1usize..10, nlist in 1usize..8,
                               kp in 1usize..20, layout_owning in any::<bool>(), m in metric()) {
        let mut r = rng(seed);
        let (q, d) = (grid_vectors(&mut r, 6, dim), grid_vectors(&mut r, n, dim));
        let layout = if layout_owning { Layout::Owning } else { Layout::NonOwning };
        let idx = ivf_build(&column(&d, dim), nlist, m, seed, layout).unwrap();
        let p = SearchParams::new(1).with_k_prime(kp).with_nprobe(idx.nlist());
        let a = ivf_search(&idx, &column(&q, dim), &p).unwrap();
        let e = enn_search(&column(&q, dim), &column(&d, dim), &p, m).unwrap();
        prop_assert_eq!((&a.query_row, &a.data_row, &a.rank), (&e.query_row, &e.data_row, &e.rank));
        prop_assert_eq!(a.distance.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                        e.distance.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn approximate_results_keep_rank_order(seed in any::<u64>(), n in 40usize..200, np in 1usize..4, ef in 10usize..60) {
        let mut r = rng(seed);
        let (q, d) = (gaussian_vectors(&mut r, 5, 8), gaussian_vectors(&mut r, n, 8));
        let data = column(&d, 8);
        let p = SearchParams::new(5).with_k_prime(10).with_nprobe(np).with_ef(ef);
        let ivf = ivf_build(&data, 4, Metric::SquaredL2, seed, Layout::NonOwning).unwrap();
        ivf_search(&ivf, &column(&q, 8), &p).unwrap().check_invariants().unwrap();
        let g = graph_build(&data, 8, Metric::SquaredL2, seed).unwrap();
        let nt = graph_search(&g, &column(&q, 8), &p).unwrap();
        nt.check_invariants().unwrap();
        prop_assert!(nt.len() <= 5 * 10);
    }

    #[test]
    fn recall_ignores_row_order(keys in prop::collection::vec(0i64..20, 1..40), drop in 0usize..10, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let enn = keyed(&keys);
        let mut ann_keys = keys[..keys.len().saturating_sub(drop)].to_vec();
        let base = recall(&keyed(&ann_keys), &enn, &["key".to_string()]).unwrap();
        ann_keys.shuffle(&mut rng(seed));
        let mut enn_keys = keys.clone();
        enn_keys.shuffle(&mut rng(seed ^ 1));
        let permuted = recall(&keyed(&ann_keys), &keyed(&enn_keys), &["key".to_string()]).unwrap();
        prop_assert_eq!(base, permuted);
    }

    #[test]
    fn rel_err_is_scale_free(a in 0.0f64..1e6, b in 1e-3f64..1e6, c in 1e-3f64..1e3) {
        prop_assert_eq!(rel_err(b, b), Some(0.0));
        let x = rel_err(a, b).unwrap();
        let y = rel_err(c * a, c * b).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }
}

fn keyed(keys: &[i64]) -> Table {
    let schema = Schema::new(vec![Field::new("key", DataType::Int64)]).unwrap();
    Table::new(schema, vec![Column::new(ColumnData::Int64(keys.to_vec()))]).unwrap()
}
