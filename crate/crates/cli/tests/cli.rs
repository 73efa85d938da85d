use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gt"))
        .args(args)
        .output()
        .expect("gt runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = path(dir, "sim.json");
    fs::write(&p, body).unwrap();
    p
}

const CONFIG: &str = r#"{"n_items": 80, "n_defectives": 3, "design_kind": "bernoulli",
    "t_values": [15, 25, 35], "n_trials": 60, "algorithms": ["comp", "dd", "scomp", "wscomp"]}"#;

#[test]
fn theory_snr_prints_both_snrs() {
    let out = gt(&["theory", "snr", "--n", "2", "--k", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("SNR_W = 0.534522"), "{text}");
    assert!(text.contains("SNR_U = 0.377964"), "{text}");
}

#[test]
fn theory_snr_domain_error() {
    assert_eq!(code(&gt(&["theory", "snr", "--n", "2", "--k", "2"])), 1);
}

#[test]
fn theory_f_writes_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = path(dir.path(), "f.csv");
    let out = gt(&["theory", "f", "--k-max", "3", "--n-span", "4", "-o", &out_path]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,N,f_value,residual_19,snr_w,snr_u");
    assert_eq!(lines.count(), 12);
}

#[test]
fn verify_passes() {
    let out = gt(&["verify", "--n-max", "12"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    assert_eq!(code(&gt(&["simulate", "--config", &cfg, "-o", &a, "--seed", "11"])), 0);
    assert_eq!(code(&gt(&["simulate", "--config", &cfg, "-o", &b, "--seed", "11"])), 0);
    let (a, b) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "design,algorithm,N,k,T,alpha,n_trials,master_seed,success_prob,mean_fn,mean_fp,mean_jaccard,mean_f1,mean_misclassified,counting_bound\n"
    ));
    assert_eq!(text.lines().count(), 1 + 3 * 4);
}

#[test]
fn simulate_seed_handling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = path(dir.path(), "a.csv");
    assert_eq!(code(&gt(&["simulate", "--config", &cfg, "-o", &out])), 1);

    let with_seed = CONFIG.replacen('{', r#"{"master_seed": 11, "#, 1);
    let cfg = write_config(dir.path(), &with_seed);
    let from_config = path(dir.path(), "c.csv");
    assert_eq!(code(&gt(&["simulate", "--config", &cfg, "-o", &from_config])), 0);
    let from_flag = path(dir.path(), "d.csv");
    assert_eq!(
        code(&gt(&["simulate", "--config", &cfg, "-o", &from_flag, "--seed", "11"])),
        0
    );
    assert_eq!(fs::read(&from_config).unwrap(), fs::read(&from_flag).unwrap());
}

#[test]
fn simulate_rejects_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("[15, 25, 35]", "[]"));
    assert_eq!(code(&gt(&["simulate", "--config", &cfg, "--seed", "1"])), 1);
    let missing = path(dir.path(), "absent.json");
    assert_eq!(code(&gt(&["simulate", "--config", &missing, "--seed", "1"])), 3);
}

#[test]
fn design_then_decode_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (x, k, y) = (
        path(dir.path(), "x.json"),
        path(dir.path(), "k.json"),
        path(dir.path(), "y.json"),
    );
    let out = gt(&[
        "design",
        "--kind",
        "constant_column",
        "--n",
        "60",
        "--t",
        "40",
        "--k",
        "3",
        "--seed",
        "5",
        "-o",
        &x,
        "--defectives-out",
        &k,
        "--outcomes-out",
        &y,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let design: serde_json::Value = serde_json::from_str(&fs::read_to_string(&x).unwrap()).unwrap();
    assert_eq!(design["design_kind"], "constant_column");
    assert_eq!(design["rows"].as_array().unwrap().len(), 40);

    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(&k).unwrap()).unwrap();
    let decoded = path(dir.path(), "d.json");
    let out = gt(&[
        "decode",
        "--design",
        &x,
        "--outcomes",
        &y,
        "--algo",
        "comp",
        "-o",
        &decoded,
    ]);
    assert_eq!(code(&out), 0);
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(&decoded).unwrap()).unwrap();
    let est: Vec<u64> = result["estimate"]["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    for m in truth["members"].as_array().unwrap() {
        assert!(est.contains(&m.as_u64().unwrap()));
    }
    assert!(result["trace"].is_null());
}

#[test]
fn design_is_seed_deterministic_and_seed_is_mandatory() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    for p in [&a, &b] {
        assert_eq!(
            code(&gt(&[
                "design",
                "--kind",
                "bernoulli",
                "--n",
                "30",
                "--t",
                "10",
                "--p",
                "0.2",
                "--seed",
                "9",
                "-o",
                p
            ])),
            0
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        code(&gt(&[
            "design",
            "--kind",
            "bernoulli",
            "--n",
            "30",
            "--t",
            "10",
            "--p",
            "0.2"
        ])),
        1
    );
    assert_eq!(
        code(&gt(&[
            "design",
            "--kind",
            "bernoulli",
            "--n",
            "30",
            "--t",
            "10",
            "--p",
            "1.5",
            "--seed",
            "1"
        ])),
        1
    );
    assert_eq!(
        code(&gt(&[
            "design", "--kind", "weird", "--n", "3", "--t", "1", "--L", "1", "--seed", "1"
        ])),
        1
    );
}

#[test]
fn decode_worked_instance_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(dir.path(), "x.json");
    let y = path(dir.path(), "y.json");
    fs::write(
        &x,
        r#"{"n_tests": 4, "n_items": 5, "rows": [[0, 1], [0, 2], [1, 2, 3], [4]]}"#,
    )
    .unwrap();
    fs::write(&y, r#"{"bits": [1, 1, 1, 0]}"#).unwrap();
    let out = gt(&[
        "decode",
        "--design",
        &x,
        "--outcomes",
        &y,
        "--algo",
        "wscomp",
        "--trace",
    ]);
    assert_eq!(code(&out), 0);
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["estimate"]["members"], serde_json::json!([0, 1]));
    let trace = result["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 2);
    assert_eq!(trace[0]["item"], 0);
    assert_eq!(trace[0]["score"], 1.0);

    fs::write(&y, r#"{"bits": [1, 1, 1]}"#).unwrap();
    assert_eq!(code(&gt(&["decode", "--design", &x, "--outcomes", &y])), 1);
    fs::write(&y, r#"{"bits": [1, 1, 1, 2]}"#).unwrap();
    assert_eq!(code(&gt(&["decode", "--design", &x, "--outcomes", &y])), 1);
    assert_eq!(
        code(&gt(&["decode", "--design", &x, "--outcomes", &y, "--algo", "lp"])),
        1
    );
}

#[test]
fn plot_round_trip_keeps_every_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let csv = path(dir.path(), "s.csv");
    assert_eq!(code(&gt(&["simulate", "--config", &cfg, "-o", &csv, "--seed", "2"])), 0);
    let svg = path(dir.path(), "p.svg");
    let out = gt(&["plot", "--input", &csv, "--overlay-bound", "-o", &svg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    for algo in ["comp", "dd", "scomp", "wscomp"] {
        assert!(text.contains(&format!(r#"data-label="{algo}""#)), "{algo}");
    }
    let dashed = text
        .lines()
        .filter(|l| l.starts_with("<polyline") && l.contains("stroke-dasharray"))
        .count();
    assert_eq!(dashed, 1);

    let zoomed = path(dir.path(), "z.svg");
    assert_eq!(
        code(&gt(&["plot", "--input", &csv, "--zoom", "15", "25", "-o", &zoomed])),
        0
    );
    assert_eq!(
        code(&gt(&["plot", "--input", &csv, "--zoom", "5", "25", "-o", &zoomed])),
        1
    );
    assert_eq!(
        code(&gt(&[
            "plot", "--input", &csv, "--metric", "delta", "--smooth", "2", "-o", &zoomed
        ])),
        0
    );
}

#[test]
fn plot_missing_column_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "s.csv");
    fs::write(&csv, "algorithm,T,success_prob\ncomp,10,0.5\n").unwrap();
    let out = gt(&[
        "plot",
        "--input",
        &csv,
        "--metric",
        "f1",
        "-o",
        &path(dir.path(), "p.svg"),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("mean_f1"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = gt(&["frobnicate"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}
