use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cornershuffle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

#[test]
fn exact_curve_has_one_row_per_grid_point() {
    let out = run(&[
        "exact", "--family", "S", "--n", "4", "--k", "1", "--t", "0:40:80",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "t,value,lo,hi,method");
    let values: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 80);
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    for key in [
        "# tool: cornershuffle",
        "# config: {",
        "# seed: 1",
        "# provenance: exact",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn exhaustive_decomposition_report() {
    let out = run(&["verify-decomposition", "--n", "6", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let result = &v["result"];
    assert_eq!(result["failures"].as_array().unwrap().len(), 0);
    assert!(result["max_word_length"].as_u64().unwrap() <= 640);
    assert_eq!(result["three_cycles_checked"], 14280);
    assert_eq!(result["support"]["ok"], true);
    assert_eq!(v["config"]["command"], "verify-decomposition");
}

#[test]
fn sampled_decomposition_beyond_the_exhaustive_cap() {
    let out = run(&[
        "verify-decomposition",
        "--n",
        "14",
        "--samples",
        "40",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["mode"], "samples");
    assert_eq!(v["result"]["length_ceilings_ok"], true);
    assert_eq!(v["seed"], 3);
}

#[test]
fn infeasible_constant_is_a_verification_failure() {
    let out = run(&["compare-constant", "--n", "4", "--scheme", "explicit"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_json(&out)["error"], "verification");
}

#[test]
fn cap_violation_names_the_cap() {
    let out = run(&["exact-full", "--n", "4", "--t", "0:1:2"]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_json(&out);
    assert_eq!(err["error"], "cap");
    assert_eq!(err["cap"]["value"], "4");
    assert!(err["cap"]["name"].as_str().unwrap().contains("side"));
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["exact", "--n", "4"],
        vec!["exact", "--n", "4", "--t", "0:1"],
        vec!["geometry", "--n", "6", "--reps", "3"],
        vec![
            "exact",
            "--n",
            "4",
            "--t",
            "0:1:2",
            "--state-cap",
            "1000000",
        ],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&out)["error"], "config", "{args:?}");
    }
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("mc.csv");
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"command":"simulate","family":"S","n":4,"k":1,"t":"0:6:4","reps":500,"seed":7,"output":{}}}"#,
            serde_json::to_string(&target).unwrap()
        ),
    )
    .unwrap();
    let config_arg = config.to_str().unwrap();
    assert_eq!(run(&["--config", config_arg]).status.code(), Some(0));
    let first = std::fs::read(&target).unwrap();
    assert_eq!(run(&["--config", config_arg]).status.code(), Some(0));
    assert_eq!(std::fs::read(&target).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("\"seed\":7"));
    assert_eq!(data_lines(&text).len(), 5);
    assert!(data_lines(&text)[1..].iter().all(|l| l.ends_with(",mc")));

    // Flags after the subcommand override the file.
    assert_eq!(
        run(&["--config", config_arg, "simulate", "--seed", "8"])
            .status
            .code(),
        Some(0)
    );
    let overridden = std::fs::read_to_string(&target).unwrap();
    assert!(overridden.contains("\"seed\":8"));
    assert_ne!(overridden, text);
    assert_eq!(
        run(&["--config", config_arg, "exact"]).status.code(),
        Some(2)
    );
}

#[test]
fn characters_csv() {
    let out = run(&["characters", "--m", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let body: String = data_lines(&text).join("\n");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["partition", "d", "chi3", "r", "bound", "case"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    let trivial = rows.iter().find(|r| &r[0] == "(5)").unwrap();
    assert_eq!(
        (&trivial[1], &trivial[2], &trivial[3], &trivial[4]),
        ("1", "1", "1", "")
    );
    let standard = rows.iter().find(|r| &r[0] == "(4,1)").unwrap();
    assert_eq!(
        (&standard[1], &standard[2], &standard[5]),
        ("4", "1", "long-row")
    );
}

#[test]
fn spectral_bound_dominates_the_exact_curve() {
    let bound = run(&["spectral-bound", "--n", "3", "--t", "0:600:7"]);
    assert_eq!(bound.status.code(), Some(0));
    let text = stdout(&bound);
    assert!(text.contains("comparison constant 67.5"));
    let values: Vec<f64> = data_lines(&text)[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 7);
    assert!(values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert!(values.last().unwrap() < &1.0);
}

#[test]
fn bounds_and_geometry_and_coupling() {
    let out = run(&["bounds", "--family", "S0", "--n", "3", "--t", "0:10:3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(data_lines(&text)[0], "t,counting,stuck_card");
    assert!(data_lines(&text)[1..]
        .iter()
        .all(|l| l.split(',').count() == 3 && !l.ends_with(',')));

    let out = run(&["geometry", "--n", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["rate_ok"], true);
    assert_eq!(v["result"]["common_ok"], true);

    let out = run(&["coupling", "--n", "4", "--reps", "200", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# mean: "));
    let lines = data_lines(&text);
    assert_eq!(lines[0], "rep,time");
    assert_eq!(lines.len(), 201);
    assert_eq!(
        run(&["coupling", "--n", "4", "--reps", "200", "--seed", "5"]).stdout,
        out.stdout
    );
}

#[test]
fn json_curves_carry_metadata() {
    let out = run(&[
        "exact-full",
        "--family",
        "S",
        "--n",
        "2",
        "--t",
        "0:3:4",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tool"], "cornershuffle");
    assert_eq!(v["provenance"], "exact");
    assert_eq!(v["result"]["k"], "full");
    assert_eq!(v["result"]["points"].as_array().unwrap().len(), 4);
}
