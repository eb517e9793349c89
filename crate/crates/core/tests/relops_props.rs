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


use hvec_core::columnar::{gather, project, Column, ColumnData, DataType, Field, RowId, Schema, Table, Value};
use hvec_core::relops::{group_aggregate, hash_join, AggFunc, AggSpec, Aggregate, JoinKind, JoinSpec};
use proptest::prelude::*;

fn table(names: &[&str], cols: Vec<Vec<i64>>) -> Table {
    let schema = Schema::new(names.iter().map(|n| Field::new(*n, DataType::Int64)).collect()).unwrap();
    Table::new(schema, cols.into_iter().map(|c| Column::new(ColumnData::Int64(c))).collect()).unwrap()
}

fn rows(t: &Table) -> Vec<Vec<Value>> {
    (0..t.row_count()).map(|r| t.row(r)).collect()
}

fn pairs(max_len: usize, key_range: i64) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((0..key_range, -1000i64..1000), 0..max_len)
}

fn split(v: &[(i64, i64)]) -> Vec<Vec<i64>> {
    vec![v.iter().map(|p| p.0).collect(), v.iter().map(|p| p.1).collect()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gather_commutes_with_project(data in pairs(40, 10), picks in prop::collection::vec(0usize..40, 0..60)) {
        let t = table(&["k", "v"], split(&data));
        let ids: Vec<RowId> = picks.iter().filter(|&&p| p < data.len()).map(|&p| RowId(p as u32)).collect();
        let a = project(&gather(&t, &ids).unwrap(), &["v"]).unwrap();
        let b = gather(&project(&t, &["v"]).unwrap(), &ids).unwrap();
        prop_assert_eq!(rows(&a), rows(&b));
    }

    #[test]
    fn inner_join_matches_nested_loop(l in pairs(30, 6), r in pairs(30, 6)) {
        let lt = table(&["lk", "lv"], split(&l));
        let rt = table(&["rk", "rv"], split(&r));
        let got = hash_join(&lt, &rt, &JoinSpec::new(JoinKind::Inner, &["lk"], &["rk"])).unwrap();
        let mut want = Vec::new();
        for a in &l {
            for b in &r {
                if a.0 == b.0 {
                    want.push(vec![Value::Int(a.0), Value::Int(a.1), Value::Int(b.0), Value::Int(b.1)]);
                }
            }
        }
        prop_assert_eq!(rows(&got), want);
    }

    #[test]
    fn semi_and_anti_partition_the_left_side(l in pairs(30, 8), r in pairs(30, 8)) {
        let lt = table(&["lk", "lv"], split(&l));
        let rt = table(&["rk", "rv"], split(&r));
        let semi = hash_join(&lt, &rt, &JoinSpec::new(JoinKind::Semi, &["lk"], &["rk"])).unwrap();
        let anti = hash_join(&lt, &rt, &JoinSpec::new(JoinKind::Anti, &["lk"], &["rk"])).unwrap();
        prop_assert_eq!(semi.row_count() + anti.row_count(), lt.row_count());
        let keys: std::collections::HashSet<i64> = r.iter().map(|p| p.0).collect();
        let (mut s, mut a) = (rows(&semi).into_iter(), rows(&anti).into_iter());
        for p in &l {
            let row = vec![Value::Int(p.0), Value::Int(p.1)];
            let next = if keys.contains(&p.0) { s.next() } else { a.next() };
            prop_assert_eq!(next, Some(row));
        }
    }

    #[test]
    fn grouped_sum_ignores_row_order(data in pairs(50, 5), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = data.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let spec = AggSpec {
            group_keys: vec!["k".into()],
            aggregates: vec![Aggregate::new(AggFunc::Sum, "v", "s"), Aggregate::new(AggFunc::Count, "v", "n")],
        };
        let a = group_aggregate(&table(&["k", "v"], split(&data)), &spec).unwrap();
        let b = group_aggregate(&table(&["k", "v"], split(&shuffled)), &spec).unwrap();
        prop_assert_eq!(rows(&a), rows(&b));
    }
}
