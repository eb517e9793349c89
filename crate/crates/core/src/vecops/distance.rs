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


//! Distance kernels.
//!
//! Every kernel sums coordinates strictly left to right in `f32`, so a
//! distance is bit-identical no matter which search path computed it. The
//! blocked variants only interleave independent rows.

use super::Metric;

#[inline]
pub fn squared_l2(a: &[f32], b: &[f32]) -> f32 {
    let mut s = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut s = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Ranking key: smaller is better for both metrics.
#[inline]
pub fn key(metric: Metric, a: &[f32], b: &[f32]) -> f32 {
    match metric {
        Metric::SquaredL2 => squared_l2(a, b),
        Metric::InnerProduct => -dot(a, b),
    }
}

/// Keys of one query against four rows at once.
#[inline]
pub fn key4(metric: Metric, q: &[f32], r: [&[f32]; 4]) -> [f32; 4] {
    let d = q.len();
    let (r0, r1, r2, r3) = (&r[0][..d], &r[1][..d], &r[2][..d], &r[3][..d]);
    let mut s = [0.0f32; 4];
    match metric {
        Metric::SquaredL2 => {
            for j in 0..d {
                let x = q[j];
                let t0 = x - r0[j];
                let t1 = x - r1[j];
                let t2 = x - r2[j];
                let t3 = x - r3[j];
                s[0] += t0 * t0;
                s[1] += t1 * t1;
                s[2] += t2 * t2;
                s[3] += t3 * t3;
            }
            s
        }
        Metric::InnerProduct => {
            for j in 0..d {
                let x = q[j];
                s[0] += x * r0[j];
                s[1] += x * r1[j];
                s[2] += x * r2[j];
                s[3] += x * r3[j];
            }
            [-s[0], -s[1], -s[2], -s[3]]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocked_matches_scalar_bits() {
        let q: Vec<f32> = (0..37).map(|i| (i as f32 * 0.37).sin()).collect();
        let rows: Vec<Vec<f32>> = (0..4)
            .map(|r| (0..37).map(|i| ((i * 7 + r * 3) as f32 * 0.11).cos()).collect())
            .collect();
        for m in [Metric::SquaredL2, Metric::InnerProduct] {
            let b = key4(m, &q, [&rows[0], &rows[1], &rows[2], &rows[3]]);
            for r in 0..4 {
                assert_eq!(b[r].to_bits(), key(m, &q, &rows[r]).to_bits());
            }
        }
    }

    #[test]
    fn l2_symmetric_bits() {
        let a = [0.1f32, -2.5, 3.25];
        let b = [1.7f32, 0.3, -0.9];
        assert_eq!(squared_l2(&a, &b).to_bits(), squared_l2(&b, &a).to_bits());
        assert_eq!(squared_l2(&a, &a), 0.0);
    }
}
