use std::path::Path;
use std::process::Command;

fn qdi(args: &[&str], config: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_qdi"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: serde_json::Value) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json.to_string()).unwrap();
    p
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let typo = write_config(
        tmp.path(),
        "typo.json",
        serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle"}, "sead": 3}),
    );
    assert_eq!(qdi(&["dimension"], &typo, &out), 1);

    let alpha = write_config(
        tmp.path(),
        "alpha.json",
        serde_json::json!({"experiment": "x", "channel": {"family": "mixed_segment"},
                           "pipeline": {"kind": "typical", "n": [4], "alpha": 0.3}}),
    );
    assert_eq!(qdi(&["build"], &alpha, &out), 1);

    let empty = write_config(
        tmp.path(),
        "empty.json",
        serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle"},
                           "pipeline": {"kind": "pure", "n": []}}),
    );
    assert_eq!(qdi(&["sweep"], &empty, &out), 1);

    let typical = write_config(
        tmp.path(),
        "typical.json",
        serde_json::json!({"experiment": "x", "channel": {"family": "mixed_segment"},
                           "pipeline": {"kind": "typical", "n": [4]}}),
    );
    let typical_out = tmp.path().join("typical");
    assert_eq!(qdi(&["build"], &typical, &typical_out), 2);
    assert!(typical_out.join("infeasible_n4.json").exists());

    let pure = write_config(
        tmp.path(),
        "pure.json",
        serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle"},
                           "pipeline": {"kind": "pure", "n": [4]}}),
    );
    let pure_out = tmp.path().join("pure");
    assert_eq!(qdi(&["build"], &pure, &pure_out), 0);

    let code_path = pure_out.join("code_n4.json");
    let verify = write_config(
        tmp.path(),
        "verify.json",
        serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle"},
                           "verify": {"code": code_path}}),
    );
    assert_eq!(qdi(&["verify"], &verify, &out), 0);

    // Stored errors that disagree with the recomputation are an internal check failure.
    let mut code: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&code_path).unwrap()).unwrap();
    code["measured"]["lambda2"] = serde_json::json!(0.01);
    std::fs::write(&code_path, code.to_string()).unwrap();
    assert_eq!(qdi(&["verify"], &verify, &out), 3);

    let bad_args = Command::new(env!("CARGO_BIN_EXE_qdi")).args(["build"]).output().unwrap();
    assert_eq!(bad_args.status.code(), Some(1));
}

#[test]
fn outputs_carry_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "c.json",
        serde_json::json!({"experiment": "prov", "channel": {"family": "bloch_circle"},
                           "schedule": {"steps": 4}}),
    );
    let out = tmp.path().join("out");
    assert_eq!(qdi(&["dimension", "--seed", "11"], &config, &out), 0);
    let csv = std::fs::read_to_string(out.join("dimension.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# experiment=prov config_hash="), "{first}");
    assert!(first.contains(" seed=11 "), "{first}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("dimension.json")).unwrap()).unwrap();
    assert_eq!(json["provenance"]["seed"], 11);
    assert_eq!(json["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    let estimates = json["result"].as_array().unwrap();
    assert!(estimates[0]["liminf"].as_f64().unwrap() <= estimates[0]["limsup"].as_f64().unwrap());
}
