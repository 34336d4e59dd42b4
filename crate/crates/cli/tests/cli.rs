use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linecross")).args(args).output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("valid JSON line"))
        .collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn count_examples() {
    let out = run(&["count", "--p", "1", "--n-max", "5", "--check"]);
    assert_eq!(code(&out), 0);
    let counts: Vec<String> = lines(&out).iter().map(|v| v["result"]["count"].as_str().unwrap().to_string()).collect();
    assert_eq!(counts, ["1", "1", "2", "5", "14", "42"]);

    let out = run(&["count", "--p", "2", "--n-max", "2", "--kind", "strictly"]);
    let counts: Vec<String> = lines(&out).iter().map(|v| v["result"]["count"].as_str().unwrap().to_string()).collect();
    assert_eq!(counts, ["0", "1", "2"]);

    let out = run(&["count", "--p", "3", "--n-max", "0"]);
    assert_eq!(lines(&out)[0]["result"]["count"], "1");
}

#[test]
fn large_counts_stay_exact() {
    let out = run(&["count", "--p", "3", "--n-max", "60", "--check"]);
    assert_eq!(code(&out), 0);
    let last = &lines(&out)[60];
    assert!(last["result"]["count"].as_str().unwrap().len() > 40);
    assert_eq!(last["result"]["check"]["pass"], true);
}

#[test]
fn prob_examples() {
    let out = run(&["prob", "--beta", "2", "--p", "1"]);
    assert_eq!(code(&out), 0);
    let r = &lines(&out)[0]["result"];
    assert_eq!(r["phi"].as_f64().unwrap(), 1.0);
    assert!((r["psi"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    let out = run(&["prob", "--beta", "1", "--p", "2", "--method", "series", "--n-terms", "60"]);
    let v = lines(&out)[0]["result"]["phi"].as_f64().unwrap();
    assert!(v < 0.618034 && v > 0.6180);
}

#[test]
fn usage_and_domain_errors_exit_2() {
    assert_eq!(code(&run(&["prob", "--beta", "1", "--p", "2", "--method", "series"])), 2);
    assert_eq!(code(&run(&["prob", "--beta", "-1", "--p", "2"])), 2);
    assert_eq!(code(&run(&["prob", "--beta", "1", "--p", "2", "--method", "asymptotic", "--d", "1"])), 2);
    assert_eq!(code(&run(&["count", "--p", "0", "--n-max", "3"])), 2);
    assert_eq!(code(&run(&["simulate", "crossing", "--beta", "1", "--alpha", "2", "--trials", "10"])), 2);
    assert_eq!(code(&run(&["simulate", "hitting", "--beta", "1", "--alpha", "1/2", "--seed", "1"])), 2);
    assert_eq!(code(&run(&["nonsense"])), 2);
}

#[test]
fn simulation_is_thread_count_independent() {
    let base = ["simulate", "crossing", "--beta", "1", "--alpha", "2", "--trials", "20000", "--seed", "11"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let eight = run(&[&base[..], &["--threads", "8"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, eight.stdout);
    assert_eq!(lines(&one)[0]["seed"], 11);
}

#[test]
fn compare_analytic_reports_z_score() {
    let out = run(&[
        "simulate", "hitting", "--beta", "2", "--alpha", "1", "--trials", "50000", "--seed", "5", "--compare-analytic",
    ]);
    assert_eq!(code(&out), 0);
    let r = &lines(&out)[0]["result"];
    assert!(r["z_score"].as_f64().unwrap() <= 4.0);
    assert!((r["analytic"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    // A deliberately impossible threshold turns the comparison into a failure.
    let out = run(&[
        "simulate", "crossing", "--beta", "1", "--alpha", "2", "--trials", "5000", "--seed", "5", "--compare-analytic",
        "--sigma-threshold", "1e-9",
    ]);
    let z = lines(&out)[0]["result"]["z_score"].as_f64().unwrap();
    assert!(z > 1e-9);
    assert_eq!(code(&out), 3);
}

#[test]
fn auto_seed_is_reported() {
    let out = run(&["simulate", "crossing", "--beta", "1", "--alpha", "3", "--trials", "500", "--seed", "auto"]);
    assert_eq!(code(&out), 0);
    let seed = lines(&out)[0]["seed"].as_u64().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains(&seed.to_string()));
}

#[test]
fn verify_suites_pass() {
    for suite in ["identities", "convolutions", "roots", "asymptotics", "all"] {
        let out = run(&["verify", suite]);
        assert_eq!(code(&out), 0, "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(lines(&out).iter().all(|v| v["result"]["pass"] == true));
    }
}

#[test]
fn sweep_alpha_brackets_and_ranges() {
    let out = run(&[
        "sweep-alpha", "--beta", "2.5", "--lo", "2", "--hi", "3", "--steps", "3", "--trials", "4000", "--seed", "9",
    ]);
    assert_eq!(code(&out), 0);
    let recs = lines(&out);
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert_eq!(r["result"]["bracket_lo"], 2);
        assert_eq!(r["result"]["bracket_hi"], 3);
        assert_eq!(r["seed"], 9);
    }
    assert_eq!(recs[1]["params"]["alpha"], "5/2");

    let bad = ["sweep-alpha", "--beta", "1", "--lo", "3", "--hi", "2", "--steps", "4", "--seed", "1"];
    assert_eq!(code(&run(&bad)), 2);
}

#[test]
fn json_lines_are_canonical() {
    let out = run(&["prob", "--beta", "3/4", "--p", "3", "--d", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(linecross_cli::output::canonical_json(&v), line);
    }
}

#[test]
fn csv_agrees_with_json() {
    let args = ["count", "--p", "2", "--d", "1", "--n-max", "6"];
    let json = lines(&run(&args));
    let csv_out = run(&[&args[..], &["--format", "csv"]].concat());
    let mut reader = csv::Reader::from_reader(csv_out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "result.count").unwrap();
    let n_col = header.iter().position(|h| h == "params.n").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), json.len());
    for (row, v) in rows.iter().zip(&json) {
        assert_eq!(row[col], *v["result"]["count"].as_str().unwrap());
        assert_eq!(row[n_col], v["params"]["n"].to_string());
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join(format!("linecross-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.conf");
    std::fs::write(&path, "trials = 321\nseed = 4\nformat = csv\n").unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["simulate", "crossing", "--beta", "1", "--alpha", "2", "--config", p, "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rec = &lines(&out)[0];
    assert_eq!(rec["params"]["trials"], 321);
    assert_eq!(rec["seed"], 4);

    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/defaults.conf");
    let out = run(&["simulate", "crossing", "--beta", "1", "--alpha", "2", "--config", shipped, "--seed", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(lines(&out)[0]["params"]["trials"], 100000);
}
