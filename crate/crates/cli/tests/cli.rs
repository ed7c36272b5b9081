use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn cvm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cvm(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
    stdout(&out)
}

const SMALL: &[&str] = &[
    "--N",
    "10000,100000",
    "--mtbf",
    "1d,1w",
    "--epsilon",
    "1e-4,1e-6",
];

fn scenario(name: &str, extra: &[&str]) -> String {
    let mut args = vec!["scenario", name];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn table_csv_and_json_carry_the_same_numbers() {
    let json: Value = serde_json::from_str(&scenario("today", &["--format", "json"])).unwrap();
    let csv = scenario("today", &["--format", "csv"]);
    let table = scenario("today", &[]);

    let cells = json["grid"].as_array().unwrap();
    assert_eq!(cells.len(), 8);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), cells.len());

    for (cell, row) in cells.iter().zip(&rows) {
        for key in [
            "mu_minutes",
            "epsilon",
            "rho_cp",
            "rho_m",
            "improvement_pct",
        ] {
            let from_csv: f64 = row[col(key)].parse().unwrap();
            assert_eq!(from_csv, cell[key].as_f64().unwrap(), "{key}");
        }
        for key in ["N", "spares"] {
            let from_csv: u64 = row[col(key)].parse().unwrap();
            assert_eq!(from_csv, cell[key].as_u64().unwrap(), "{key}");
        }
        let text = format!(
            "{:.1}% ({})",
            cell["improvement_pct"].as_f64().unwrap(),
            cell["spares"].as_u64().unwrap()
        );
        assert!(table.contains(&text), "table lacks {text}\n{table}");
    }
}

#[test]
fn json_has_stable_field_names() {
    let json: Value = serde_json::from_str(&scenario("2011-ssd", &["--format", "json"])).unwrap();
    assert_eq!(json["scenario"], "2011-ssd");
    for cell in json["grid"].as_array().unwrap() {
        for key in [
            "mu_minutes",
            "N",
            "epsilon",
            "spares",
            "rho_cp",
            "rho_m",
            "improvement_pct",
        ] {
            assert!(cell.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn editing_the_preset_file_changes_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("presets.toml");
    let write = |c: f64| {
        fs::write(
            &path,
            format!(
                "[grid]\nmtbf = [\"1d\"]\nmachines = [10000]\nepsilon = [1e-4]\n\n\
                 [[preset]]\nname = \"lab\"\nC = {c}\nR = 5.0\nD = 2.5\nM = 1.0\n"
            ),
        )
        .unwrap();
    };
    let run = || -> Value {
        let p = path.to_str().unwrap();
        serde_json::from_str(&ok(&[
            "scenario",
            "lab",
            "--presets",
            p,
            "--format",
            "json",
        ]))
        .unwrap()
    };
    write(5.0);
    let before = run();
    write(50.0);
    let after = run();
    assert_eq!(before["C"], 5.0);
    assert_eq!(after["C"], 50.0);
    let imp = |v: &Value| v["grid"][0]["improvement_pct"].as_f64().unwrap();
    assert!(imp(&after) > imp(&before));
    // The preset file's grid is used when no grid flags are given.
    assert_eq!(after["grid"].as_array().unwrap().len(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(
        cvm(&["spares", "--N", "100", "--mtbf", "1y"]).status.code(),
        Some(0)
    );
    assert_eq!(cvm(&["spares", "--N", "100"]).status.code(), Some(2));
    assert_eq!(
        cvm(&["spares", "--N", "100", "--mtbf", "1fortnight"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cvm(&["spares", "--N", "0", "--mtbf", "1d"]).status.code(),
        Some(2)
    );
    assert_eq!(cvm(&["scenario", "no-such-preset"]).status.code(), Some(2));
    assert_eq!(
        cvm(&["scenario", "custom", "--C", "1"]).status.code(),
        Some(2)
    );
    let out = cvm(&[
        "spares",
        "--N",
        "10000",
        "--mtbf",
        "1d",
        "--method",
        "lower-bound",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("infeasible"));
}

#[test]
fn custom_scenario_warns_when_migration_is_too_expensive() {
    let out = cvm(&[
        "scenario",
        "custom",
        "--C",
        "1",
        "--R",
        "1",
        "--D",
        "1",
        "--M",
        "5",
        "--N",
        "1000",
        "--mtbf",
        "1d",
        "--epsilon",
        "1e-4",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("makes sense only if M < C+D+R"));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["warnings"][0].as_str().unwrap().contains("M < C+D+R"));
    let table = ok(&[
        "scenario",
        "custom",
        "--C",
        "1",
        "--R",
        "1",
        "--D",
        "1",
        "--M",
        "5",
        "--N",
        "1000",
        "--mtbf",
        "1d",
        "--epsilon",
        "1e-4",
    ]);
    assert!(table.contains("makes sense only if M < C+D+R"));
}

#[test]
fn yield_defaults_reproduce_the_reference_table() {
    let text = ok(&["yield"]);
    for cell in [
        "90.8%", "97.5%", "69.9%", "92.6%", "13.5%", "76.3%", "1.7%", "22.1%", "0.2%", "2.8%",
    ] {
        assert!(text.contains(cell), "missing {cell}\n{text}");
    }
    let json: Value = serde_json::from_str(&ok(&["yield", "--format", "json"])).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 10);
}

#[test]
fn trivial_yield_is_full() {
    let json: Value = serde_json::from_str(&ok(&[
        "yield", "--p1", "1", "--C", "0", "--R", "0", "--D", "0", "--format", "json",
    ]))
    .unwrap();
    for cell in json["cells"].as_array().unwrap() {
        assert_eq!(cell["yield_pct"].as_f64().unwrap(), 100.0);
    }
}

#[test]
fn newest_preset_at_a_million_machines() {
    let json: Value = serde_json::from_str(&ok(&[
        "scenario",
        "2015",
        "--N",
        "1000000",
        "--epsilon",
        "1e-6",
        "--format",
        "json",
    ]))
    .unwrap();
    let cells = json["grid"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for cell in cells {
        assert!(cell["improvement_pct"].as_f64().unwrap().is_finite());
        assert!(cell["spares"].as_u64().unwrap() > 0);
    }
    let par = ok(&[
        "scenario",
        "2015",
        "--N",
        "1000000",
        "--epsilon",
        "1e-6",
        "--workload",
        "par",
    ]);
    assert!(par.contains("not a power of two"));
}

#[test]
fn mtbf_suffixes_are_minutes() {
    let a = ok(&["spares", "--N", "5000", "--mtbf", "1d", "--format", "json"]);
    let b = ok(&[
        "spares", "--N", "5000", "--mtbf", "1440", "--format", "json",
    ]);
    let c = ok(&["spares", "--N", "5000", "--mtbf", "24h", "--format", "json"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("yield.csv");
    let printed = ok(&["yield", "--format", "csv"]);
    let written = ok(&["yield", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(written.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), printed);
}

#[test]
fn periodic_reports_the_threshold() {
    let json: Value = serde_json::from_str(&ok(&[
        "periodic", "--mtbf", "1mo", "--period", "100", "--format", "json",
    ]))
    .unwrap();
    let t_opt = json["T_opt"].as_f64().unwrap();
    assert!((t_opt - (2.0f64 * 43200.0).sqrt()).abs() < 1e-9);
    assert!(json["W_T"].as_f64().unwrap() > json["W_min"].as_f64().unwrap());
    assert!((json["mu_min"].as_f64().unwrap() - (3.0 + 5f64.sqrt())).abs() < 1e-9);
}

#[test]
fn simulate_is_reproducible_and_close_to_the_formula() {
    let args = [
        "simulate",
        "--policy",
        "checkpoint",
        "--N",
        "100",
        "--mtbf",
        "1d",
        "--replications",
        "4",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    let json: Value = serde_json::from_str(&first).unwrap();
    let sim = json["mean_throughput"].as_f64().unwrap();
    let formula = json["analytic_throughput"].as_f64().unwrap();
    assert!(((sim - formula) / formula).abs() < 0.01);
}
