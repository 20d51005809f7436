use std::process::Command;

use crt_design::ScenarioConfig;
use crt_design_cli::{read_config, run};
use serde_json::Value;

struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn crtdesign(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("crtdesign").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let o = crtdesign(&all);
    assert_eq!(o.code, 0, "{}", o.stderr);
    serde_json::from_str(&o.stdout).unwrap()
}

fn design(v: &Value) -> (u64, u64) {
    (
        v["result"]["m"].as_u64().unwrap(),
        v["result"]["n"].as_u64().unwrap(),
    )
}

const K10: [&str; 8] = [
    "--budget",
    "100000",
    "--cluster-cost",
    "500",
    "--indiv-cost",
    "50",
    "--min-clusters",
    "6",
];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn lod_hte_table_row() {
    let v = json(&with(&["lod", "hte", "--rho-y", "0.05", "--rho-x", "0.75"], &K10));
    assert_eq!(design(&v), (22, 62));
    assert_eq!(v["result"]["capped"], false);
}

#[test]
fn lod_compound_table_row() {
    let v = json(&with(
        &[
            "lod", "compound", "--lambda", "0.6", "--rho-y", "0.05", "--rho-x", "0.5",
        ],
        &K10,
    ));
    assert_eq!(design(&v), (17, 74));
}

#[test]
fn lod_prints_power_when_an_effect_is_given() {
    let o = crtdesign(&with(
        &[
            "lod",
            "hte",
            "--rho-y",
            "0.05",
            "--rho-x",
            "0.75",
            "--beta-hte",
            "0.2",
        ],
        &K10,
    ));
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("0.830001"), "{}", o.stdout);
}

#[test]
fn missing_covariate_icc_exits_2() {
    let o = crtdesign(&with(&["lod", "hte", "--rho-y", "0.05"], &K10));
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("rho_x"), "{}", o.stderr);
}

#[test]
fn out_of_range_weight_exits_2() {
    let o = crtdesign(&with(
        &[
            "lod", "compound", "--lambda", "1.2", "--rho-y", "0.05", "--rho-x", "0.5",
        ],
        &K10,
    ));
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("lambda"));
}

#[test]
fn unknown_table_exits_2() {
    assert_eq!(crtdesign(&["reproduce", "table9"]).code, 2);
    assert_eq!(crtdesign(&["lod", "median"]).code, 2);
}

#[test]
fn degenerate_input_exits_3() {
    let o = crtdesign(&[
        "power",
        "point",
        "-m",
        "10",
        "-n",
        "2",
        "--rho-y",
        "0.1",
        "--rho-x",
        "0.5",
        "--beta-hte",
        "0.2",
        "--approximation",
        "student_t",
    ]);
    assert_eq!(o.code, 3, "{}", o.stderr);
}

#[test]
fn maximin_reference_setup() {
    let v = json(&["maximin", "hte", "--preset", "k10"]);
    assert_eq!(design(&v), (22, 62));
    let min = v["result"]["min_value"].as_f64().unwrap();
    assert!((min - 0.68).abs() < 0.02, "{min}");
}

#[test]
fn maximin_case_study() {
    let v = json(&["maximin", "compound", "--preset", "kdpp", "--lambda", "0.6"]);
    assert_eq!(design(&v), (27, 85));
}

#[test]
fn surface_export_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    let p = path.to_str().unwrap();
    let v = json(&[
        "maximin",
        "hte",
        "--preset",
        "k10",
        "--grid-steps",
        "4",
        "--emit-surface",
        p,
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,n,rho_y,rho_x,value,kind,lambda"));
    let candidates = v["result"]["candidates"].as_u64().unwrap();
    assert_eq!(lines.count() as u64, candidates * 25);
    assert!(v["result"].get("surface").is_none());
}

#[test]
fn power_table_row() {
    let v = json(&[
        "power", "point", "--preset", "k10", "-m", "22", "--rho-y", "0.05", "--rho-x", "0.75", "--test",
        "hte",
    ]);
    let p = v["result"]["reports"][0]["power"].as_f64().unwrap();
    assert!((p - 0.830).abs() < 0.0005, "{p}");
}

#[test]
fn power_bounds_case_study() {
    let v = json(&[
        "power", "bounds", "--preset", "kdpp", "-m", "27", "-n", "85", "--test", "ate",
    ]);
    let b = &v["result"]["bounds"][0];
    assert!((b["lower"].as_f64().unwrap() - 0.497).abs() < 0.005, "{b}");
    assert!((b["upper"].as_f64().unwrap() - 0.912).abs() < 0.005, "{b}");
}

#[test]
fn zero_effect_power() {
    let v = json(&[
        "power",
        "point",
        "--preset",
        "k10",
        "-m",
        "22",
        "--rho-y",
        "0.05",
        "--rho-x",
        "0.5",
        "--beta-hte",
        "0",
        "--beta-ate",
        "0",
    ]);
    for r in v["result"]["reports"].as_array().unwrap() {
        assert!((r["power"].as_f64().unwrap() - 0.025).abs() < 1e-9);
    }
}

#[test]
fn power_curve_csv() {
    let o = crtdesign(&[
        "power",
        "curve",
        "--preset",
        "k10",
        "-m",
        "22",
        "--grid-steps",
        "10",
        "--test",
        "hte",
        "--csv",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let mut lines = o.stdout.lines();
    assert_eq!(lines.next(), Some("test,m,n,rho_y,rho_x,effect,alpha,power"));
    assert_eq!(lines.count(), 4 * 11);
}

#[test]
fn reproduce_row_counts() {
    for (id, rows) in [("table2", 40), ("table5", 10)] {
        let o = crtdesign(&["reproduce", id, "--csv"]);
        assert_eq!(o.code, 0);
        assert_eq!(o.stdout.lines().count(), rows + 1, "{id}");
    }
    let o = crtdesign(&["reproduce", "fig3", "--csv"]);
    assert!(o.stdout.starts_with("k,m,n,rho_y,rho_x,power"));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        budget: Some(100_000.0),
        cluster_cost: Some(500.0),
        indiv_cost: Some(50.0),
        rho_y: Some(0.05),
        rho_x: Some(0.5),
        lambda: Some(0.6),
        beta_hte: Some(0.2),
        rho_y_levels: Some(vec![0.005, 0.05]),
        ..Default::default()
    };
    let toml_path = dir.path().join("scenario.toml");
    std::fs::write(&toml_path, toml::to_string(&cfg).unwrap()).unwrap();
    let json_path = dir.path().join("scenario.json");
    std::fs::write(&json_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(read_config(&toml_path).unwrap(), cfg);
    assert_eq!(read_config(&json_path).unwrap(), cfg);

    let from_file = crtdesign(&["lod", "compound", "--config", toml_path.to_str().unwrap()]);
    let from_flags = crtdesign(&[
        "lod",
        "compound",
        "--budget",
        "100000",
        "--cluster-cost",
        "500",
        "--indiv-cost",
        "50",
        "--rho-y",
        "0.05",
        "--rho-x",
        "0.5",
        "--lambda",
        "0.6",
        "--beta-hte",
        "0.2",
    ]);
    assert_eq!(from_file.code, 0, "{}", from_file.stderr);
    assert_eq!(from_file.stdout, from_flags.stdout);

    // Flags win over the file.
    let v = json(&[
        "lod",
        "compound",
        "--config",
        toml_path.to_str().unwrap(),
        "--lambda",
        "1",
    ]);
    assert_eq!(v["inputs"]["lambda"], 1.0);
}

#[test]
fn bad_config_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "budget = 100000\nbugdet = 5\n").unwrap();
    let o = crtdesign(&["lod", "hte", "--config", path.to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("bugdet"), "{}", o.stderr);
}

fn binary(args: &[&str], threads: &str) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_crtdesign"))
        .args(args)
        .env("CRT_DESIGN_THREADS", threads)
        .output()
        .unwrap();
    (out.status.code().unwrap(), out.stdout)
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = [
        "maximin",
        "compound",
        "--preset",
        "k20",
        "--lambda",
        "0.6",
        "--grid-steps",
        "20",
        "--json",
    ];
    let (code, first) = binary(&args, "1");
    assert_eq!(code, 0);
    for threads in ["1", "4", "8"] {
        assert_eq!(binary(&args, threads).1, first, "threads={threads}");
    }
}

#[test]
fn binary_exit_codes() {
    assert_eq!(binary(&["lod", "hte", "--budget", "1000"], "2").0, 2);
    assert_eq!(binary(&["reproduce", "table2"], "0").0, 2);
    assert_eq!(binary(&["--version"], "2").0, 0);
}
