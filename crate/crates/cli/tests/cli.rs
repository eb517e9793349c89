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


use std::process::Command;

fn hvec(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hvec")).args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn decide_prints_choice_and_alternative() {
    let (ok, out, _) = hvec(&["decide", "--device-mem", "10", "--index", "ivf", "--batch", "10000", "--index-bytes", "20"]);
    assert!(ok);
    assert!(out.starts_with("hybrid (alternative: copy_i)"), "{out}");
    let (ok, out, _) = hvec(&["decide", "--device-mem", "100", "--index", "graph", "--index-bytes", "20"]);
    assert!(ok);
    assert!(out.starts_with("gpu\n"), "{out}");
}

#[test]
fn plan_prints_realized_plan() {
    let (ok, out, _) = hvec(&["plan", "--query", "Q2", "--vs", "graph", "--strategy", "copy-di"]);
    assert!(ok);
    assert!(out.starts_with("plan Q2"));
    assert!(out.contains("layout=owning"));
}

#[test]
fn unknown_names_fail_cleanly() {
    let (ok, _, err) = hvec(&["run", "--query", "Q99", "--sf", "0.001"]);
    assert!(!ok);
    assert!(err.contains("unknown query"), "{err}");
    let (ok, _, _) = hvec(&["plan", "--query", "Q2", "--strategy", "warp"]);
    assert!(!ok);
}

#[test]
fn gen_run_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let rep = dir.path().join("rep");
    let (ok, _, err) = hvec(&["gen", "--sf", "0.001", "--dr", "8", "--di", "8", "--seed", "3", "--out", data.to_str().unwrap()]);
    assert!(ok, "{err}");
    let (ok, out, err) = hvec(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--query",
        "Q16",
        "--vs",
        "ivf",
        "--strategy",
        "all",
        "--profile",
        "pcie5",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    assert_eq!(err.matches("capability").count(), 2, "{err}");
    let (ok, summary, _) = hvec(&["report", "--in", rep.to_str().unwrap(), "--summary"]);
    assert!(ok);
    assert_eq!(summary, out);
    let (ok, records, _) = hvec(&["report", "--in", rep.to_str().unwrap()]);
    assert!(ok);
    assert_eq!(records.lines().count(), 1 + 4);
}
