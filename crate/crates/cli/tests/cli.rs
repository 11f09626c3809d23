//! End-to-end checks of the shipped command surface: pinned outputs for the
//! documented examples, the exit-code contract, and byte-identical reruns.

use std::process::{Command, Output};

fn sumdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumdim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn attractor_prints_one_interval_per_line() {
    let out = sumdim(&[
        "attractor", "--family", "digit-cantor", "--n", "3", "--A", "0,2", "--depth", "4",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 16, "2^4 prefix intervals");
    // Set-format lines are "lo hi" rationals; spot-check the first cell.
    assert_eq!(text.lines().next(), Some("0 1/81"));

    let out = sumdim(&[
        "attractor", "--family", "r2", "--J", "3", "--r", "9/40", "--depth", "2",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 16, "(J+1)^2 intervals");
}

#[test]
fn attractor_rejects_ratio_outside_window() {
    let out = sumdim(&[
        "attractor", "--family", "r2", "--J", "3", "--r", "1/4", "--depth", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("hypothesis"), "stderr names the violation: {err}");
}

#[test]
fn boxdim_recovers_the_ternary_slope() {
    let out = sumdim(&[
        "boxdim", "--family", "digit-cantor", "--n", "3", "--A", "0,2", "--depths", "4:12",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], "sumdim.boxdim.v1");
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 0.6309297535714574).abs() < 1e-9, "slope {slope}");
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn sumdim_compares_against_the_family_bound() {
    let out = sumdim(&["sumdim", "--K", "cantor3", "--E", "cantor4", "--depths", "4:8"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bound"]["tag"], "eq2106");
    assert_eq!(v["bound"]["verdict"], "pass");
    let value = v["bound"]["value"].as_f64().unwrap();
    assert!((value - 0.81546).abs() < 1e-4, "bound value {value}");

    // Degenerate summand: the two-map bound applies, at dim E = 0.
    let out = sumdim(&["sumdim", "--K", "cantor3", "--E", "point", "--depths", "2:6"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bound"]["tag"], "prop1");
    assert_eq!(v["bound"]["value"].as_f64().unwrap(), 0.5);
    assert_eq!(v["bound"]["verdict"], "pass");
}

#[test]
fn verify_exit_codes_follow_the_contract() {
    // Failed property -> 1, with the concrete witness in the report.
    let out = sumdim(&["verify", "eq42", "--n", "3", "--A", "0,1", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["holds"], false);
    assert_eq!(v["witness"], serde_json::json!([1, 2]));

    // Passing engines -> 0.
    for args in [
        vec!["verify", "eq42", "--n", "3", "--A", "0,1", "--k", "1"],
        vec!["verify", "r4", "--J", "3", "--r", "9/40"],
        vec!["verify", "r3", "--J", "3", "--r", "2/9", "--depth", "2"],
        vec!["verify", "prop3", "--family", "cantor3", "--k", "2", "--depth", "8"],
        vec!["verify", "lemma2a", "--n", "7", "--K", "0,1,3", "--S", "2,5", "--k", "2"],
        vec!["verify", "plunnecke", "--n", "7", "--K", "0,1,3", "--S", "2,5", "--signs", "+-"],
    ] {
        let out = sumdim(&args);
        assert_eq!(out.status.code(), Some(0), "args {args:?}: {}", stdout(&out));
    }

    // Violated hypothesis -> 2 (ratio at the window's open end).
    let out = sumdim(&["verify", "r4", "--J", "3", "--r", "1/4"]);
    assert_eq!(out.status.code(), Some(2));

    // Resource cap -> 3.
    let out = Command::new(env!("CARGO_BIN_EXE_sumdim"))
        .args(["attractor", "--family", "digit-cantor", "--n", "3", "--A", "0,2", "--depth", "8"])
        .env("SUMDIM_MAX_INTERVALS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_prop2_solves_and_covers() {
    let out = sumdim(&[
        "verify", "prop2", "--n", "3", "--A", "0,1", "--k", "1", "--y", "2,1,0,2",
        "--cover-depth", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cover_full"], true);
    let delta = v["solution"]["delta"][0].as_i64().unwrap();
    assert!(delta == 0 || delta == -1, "offset in {{-1, 0}}, got {delta}");
}

#[test]
fn search_reruns_are_byte_identical() {
    let args = ["search", "conj5", "--nmax", "12", "--trials", "200", "--seed", "7"];
    let a = sumdim(&args);
    let b = sumdim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.lines().next().unwrap().contains("sumdim.conj5.v1"));
    assert!(text.contains("\"record\":\"max_ratio\""));

    let args = ["search", "conj222", "--a", "49/100", "--k", "2", "--depths", "1:8"];
    let a = sumdim(&args);
    let b = sumdim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().last().unwrap().contains("\"nonincreasing\":true"));
}

#[test]
fn outputs_are_independent_of_worker_count() {
    let one = sumdim(&[
        "sumdim", "--K", "cantor3", "--E", "cantor4", "--depths", "4:7", "--threads", "1",
    ]);
    let four = sumdim(&[
        "sumdim", "--K", "cantor3", "--E", "cantor4", "--depths", "4:7", "--threads", "4",
    ]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn rationals_must_be_fractions() {
    let out = sumdim(&["search", "conj222", "--a", "0.49", "--k", "2", "--depths", "1:3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("decimal"), "stderr explains the rejection: {err}");
}
