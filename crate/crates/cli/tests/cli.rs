use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

const RHO3: &str = r#"{"n":3,"angles":[["0","1/3","1/5"],["-1/3","0","1/7"],["-1/5","-1/7","0"]]}"#;
const RHO2: &str = r#"{"n":2,"angles":[["0","1/3"],["-1/3","0"]]}"#;
const FLAT2: &str = r#"{"n":2,"angles":[["0","0"],["0","0"]]}"#;

fn ncsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncsphere")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ncsphere-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn zgen_level_three_prints_the_explicit_matrix() {
    let o = ncsphere(&["zgen", "--rho", RHO3, "--level", "3", "--pretty"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.trim_matches(|c| c == '[' || c == ']' || c == ' ').split("  ").map(str::trim).filter(|s| !s.is_empty()).collect())
        .collect();
    // α = w(1/3), β = w(1/5), γ = w(1/7); γβ = w(12/35).
    let expected = [
        ["z1", "z2", "z3", "0"],
        ["-w(2/3) z2'", "z1'", "0", "w(12/35) z3"],
        ["-w(4/5) z3'", "0", "z1'", "-w(1/3) z2"],
        ["0", "-w(6/7) z3'", "z2'", "z1"],
    ];
    assert_eq!(rows, expected.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
}

#[test]
fn normalize_applies_the_swap_phase() {
    let o = ncsphere(&["normalize", "--rho", RHO3, "z2 z1", "--pretty"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "w(1/3) z1 z2");
    let v = json_of(&ncsphere(&["normalize", "--rho", RHO3, "z3' z1"]));
    assert_eq!(v["normal_form"], "w(4/5) z1 z3'");
}

#[test]
fn emitted_json_is_read_back() {
    let z = tmp("z.json");
    let z_s = z.to_str().unwrap();
    assert!(ncsphere(&["zgen", "--rho", RHO3, "--out", z_s]).status.success());
    // adjoint twice returns the same matrix
    let once = ncsphere(&["adjoint", z_s]);
    let adj = tmp("zadj.json");
    std::fs::write(&adj, &once.stdout).unwrap();
    let twice = json_of(&ncsphere(&["adjoint", adj.to_str().unwrap()]));
    let orig: Value = serde_json::from_str(&std::fs::read_to_string(&z).unwrap()).unwrap();
    assert_eq!(twice, orig);

    // polynomial output feeds back into another command
    let p = json_of(&ncsphere(&["normalize", "--rho", RHO2, "z2 z1"]));
    let back = json_of(&ncsphere(&["adjoint", &p.to_string()]));
    assert_eq!(back["normal_form"], "z1' z2'");

    // representation output feeds eval
    let rep = tmp("rep.json");
    std::fs::write(&rep, ncsphere(&["rep-build", "--rho", RHO2]).stdout).unwrap();
    let e = ncsphere(&["eval", "--rho", RHO2, "--rep", rep.to_str().unwrap(), "z1 z1' + z2 z2'"]);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let value = &json_of(&e)["value"];
    assert_eq!(value.as_array().unwrap().len(), 3);
    for (i, row) in value.as_array().unwrap().iter().enumerate() {
        for (j, c) in row.as_array().unwrap().iter().enumerate() {
            let re = c[0].as_f64().unwrap();
            assert!((re - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }

    // loop output feeds winding
    let lp = tmp("loop.json");
    let b = tmp("b.json");
    std::fs::write(&b, json!({ "normal_form": "z1", "context": { "rho": serde_json::from_str::<Value>(FLAT2).unwrap() } }).to_string()).unwrap();
    std::fs::write(&lp, ncsphere(&["circle-loop", b.to_str().unwrap(), "--resolution", "32"]).stdout).unwrap();
    let w = json_of(&ncsphere(&["winding", lp.to_str().unwrap()]));
    assert_eq!(w["winding"], 1);
    assert!(w["scope"].as_str().unwrap().contains("commutative"));
}

#[test]
fn seeded_suites_are_reproducible() {
    let a = ncsphere(&["suite", "--name", "borsuk-ulam-engine", "--seed", "7"]);
    let b = ncsphere(&["suite", "--name", "borsuk-ulam-engine", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);
    for key in ["suite", "witnesses", "summary", "timings"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn exit_codes_separate_usage_from_failure() {
    assert_eq!(ncsphere(&["normalize", "--rho", RHO2, "z1 +* z2"]).status.code(), Some(2));
    assert_eq!(ncsphere(&["normalize", "--rho", RHO2, "z7"]).status.code(), Some(2));
    assert_eq!(ncsphere(&["zgen"]).status.code(), Some(2));
    assert_eq!(ncsphere(&["no-such-command"]).status.code(), Some(2));

    let bad = json!({
        "domain": serde_json::from_str::<Value>(RHO2).unwrap(),
        "codomain": serde_json::from_str::<Value>(RHO2).unwrap(),
        "images": { "z1": "z2", "z2": "z1" },
    });
    let o = ncsphere(&["validate-hom", "--hom", &bad.to_string()]);
    assert_eq!(o.status.code(), Some(1));
    let report = json_of(&o);
    assert_eq!(report["valid"], false);
    assert!(!report["failures"].as_array().unwrap().is_empty());

    // inhomogeneous entry: factorization is a mathematical failure
    let o = ncsphere(&["factor-rotation", "--rho", RHO2, "--action", r#"{"k":2,"alphas":["1/2","1/2"]}"#, "z1 + z1 z2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn standard_hom_is_valid_and_equivariant() {
    let neg = json!({
        "domain": serde_json::from_str::<Value>(RHO2).unwrap(),
        "codomain": serde_json::from_str::<Value>(RHO2).unwrap(),
        "images": { "z1": "-z1", "z2": "-z2" },
    });
    let o = ncsphere(&["validate-hom", "--hom", &neg.to_string(), "--action", r#"{"k":2,"alphas":["1/2","1/2"]}"#]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert_eq!(v["valid"], true);
    assert_eq!(v["equivariant"], true);
    let applied = json_of(&ncsphere(&["apply-hom", "--hom", &neg.to_string(), "z1 z2'"]));
    assert_eq!(applied["normal_form"], "z1 z2'");
}

#[test]
fn factor_rotation_of_zgen() {
    let o = ncsphere(&["factor-rotation", "--rho", RHO3, "--action", r#"{"k":5,"alphas":["1/5","2/5","3/5"]}"#]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert_eq!(v["A^k = I"], true);
    assert_eq!(v["B^k = I"], true);
    assert_eq!(v["b_exponents"][0], 0);
}

#[test]
fn counterexample_bound_holds() {
    let o = ncsphere(&["counterexample", "--rho", RHO2, "--grid", r#"{"t_steps":12,"w_steps":12}"#]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert!((v["bound"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["grid"]["value"].as_f64().unwrap() <= 0.5 + 1e-9);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let cfg = tmp("cfg.json");
    std::fs::write(&cfg, json!({ "rho": serde_json::from_str::<Value>(RHO3).unwrap(), "level": 2 }).to_string()).unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let two = json_of(&ncsphere(&["zgen", "--config", cfg_s]));
    assert_eq!(two["rows"], 2);
    let three = json_of(&ncsphere(&["zgen", "--config", cfg_s, "--level", "3"]));
    assert_eq!(three["rows"], 4);
    let bad_tol = ncsphere(&["zgen", "--config", cfg_s, "--tolerance", "nonsense"]);
    assert_eq!(bad_tol.status.code(), Some(2));
}
