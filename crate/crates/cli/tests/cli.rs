use std::collections::HashMap;
use std::process::{Command, Output};

fn resolv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resolv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn resolv_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resolv"))
        .args(args)
        .env("RESOLV_THREADS", threads)
        .output()
        .expect("binary runs")
}

/// Parses CSV stdout into one map per row.
fn rows(out: &Output) -> Vec<HashMap<String, String>> {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key}={}", row[key]))
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `p <= 1/2` with binary entropy `h`, by bisection.
fn binary_with_entropy(h: f64) -> f64 {
    let (mut lo, mut hi) = (1e-15, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn smooth_examples() {
    let r = rows(&resolv(&[
        "smooth",
        "--probs",
        "0.5,0.3,0.2",
        "--delta",
        "0.25",
    ]));
    assert!((num(&r[0], "h_delta") - 0.811278).abs() < 1e-6);
    assert_eq!(r[0]["j_star"], "2");
    assert!((num(&r[0], "epsilon") - 0.05).abs() < 1e-12);

    let r = rows(&resolv(&[
        "smooth", "--iid", "0.5", "--n", "100", "--delta", "0",
    ]));
    assert!((num(&r[0], "h_delta_per_n") - 1.0).abs() < 1e-9);

    let r = rows(&resolv(&[
        "smooth", "--iid", "0.3", "--n", "10000", "--delta", "0.1",
    ]));
    assert!((num(&r[0], "h_delta_per_n") - 0.793162).abs() <= 0.02);
}

#[test]
fn rates_examples() {
    let half = binary_with_entropy(0.5).to_string();
    let r = rows(&resolv(&[
        "rates",
        "--component",
        "0.5",
        "--component",
        &half,
        "--weights",
        "0.3,0.7",
        "--delta",
        "0.1,0",
    ]));
    assert!((num(&r[0], "rate_first") - 0.55).abs() < 1e-9);
    assert_eq!(r[0]["i_star"], "1");
    assert!((num(&r[1], "rate_first") - 0.65).abs() < 1e-9);

    let r = rows(&resolv(&[
        "rates",
        "--component",
        "0.5,0.125,0.125,0.125,0.125",
        "--component",
        "1,0,0,0,0",
        "--weights",
        "0.5,0.5",
        "--delta",
        "0.25",
    ]));
    assert!((num(&r[0], "rate_second") + 0.199471).abs() < 1e-6);
    assert!((num(&r[0], "delta_istar") - 0.5).abs() < 1e-12);
}

#[test]
fn rates_reject_ties_unless_first_only() {
    let args = [
        "rates",
        "--component",
        "0.3",
        "--component",
        "0.7",
        "--weights",
        "0.5,0.5",
        "--delta",
        "0.2",
    ];
    let out = resolv(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("equal entropy"));
    let mut first = args.to_vec();
    first.push("--first-only");
    let r = rows(&resolv(&first));
    assert!(!r[0].contains_key("rate_second"));
}

#[test]
fn code_examples() {
    let r = rows(&resolv(&[
        "code",
        "--probs",
        "0.75,0.25",
        "--K",
        "2",
        "--gamma",
        "1",
    ]));
    assert!((num(&r[0], "e_len") - 2.25).abs() < 1e-12);
    assert_eq!(num(&r[0], "distance"), 0.0);

    let r = rows(&resolv(&[
        "code",
        "--probs",
        "0.25,0.25,0.25,0.25",
        "--n",
        "2",
        "--gamma",
        "0.5",
    ]));
    assert_eq!(num(&r[0], "distance"), 0.0);

    let r = rows(&resolv(&[
        "code",
        "--probs",
        "0.5,0.3,0.2",
        "--K",
        "2",
        "--gamma",
        "0.5",
    ]));
    assert!((num(&r[0], "distance") - 0.0125).abs() < 1e-12);
    assert!((num(&r[0], "distance_bound") - 0.853553).abs() < 1e-6);
}

#[test]
fn code_columns_respect_bounds() {
    let r = rows(&resolv(&[
        "code",
        "--iid",
        "0.2,0.5,0.3",
        "--n-sweep",
        "1,2,3,4",
        "--K",
        "3",
        "--gamma",
        "0.1,0.25,0.5,1",
    ]));
    assert_eq!(r.len(), 16);
    for row in &r {
        assert!(num(row, "distance") <= num(row, "distance_bound"));
        assert!(num(row, "e_len") <= num(row, "length_bound"));
    }
    let r = rows(&resolv(&[
        "code",
        "--component",
        "0.75,0.25",
        "--component",
        "0.25,0.75",
        "--weights",
        "0.5,0.5",
        "--gamma",
        "1",
    ]));
    assert!((num(&r[0], "e_len") - 2.25).abs() < 1e-12);
    assert!(num(&r[0], "mixture_distance") <= num(&r[0], "distance"));
}

#[test]
fn fv_examples() {
    let r = rows(&resolv(&[
        "fv",
        "--probs",
        "0.5,0.3,0.2",
        "--delta",
        "0.2,0",
    ]));
    assert!((num(&r[0], "error") - 0.2).abs() < 1e-12);
    assert!((num(&r[0], "e_len") - 1.1).abs() < 1e-12);
    assert_eq!(r[0]["kept"], "2");
    assert_eq!(num(&r[1], "error"), 0.0);

    let r = rows(&resolv(&[
        "fv", "--iid", "0.3", "--n", "10000", "--delta", "0.1",
    ]));
    assert!((num(&r[0], "e_len_per_n") - 0.793162).abs() <= 0.05);
}

#[test]
fn converge_examples() {
    let r = rows(&resolv(&[
        "converge",
        "--iid",
        "0.5",
        "--n-sweep",
        "4,10,30",
        "--delta",
        "0.3",
    ]));
    for row in &r {
        let n = num(row, "n") as i32;
        let total = 2f64.powi(n);
        let u = 1.0 / total;
        let delta = 0.3;
        let j = total - (delta * total).floor();
        let eps = delta - (total - j) * u;
        let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
        let h = term(u + delta) + (j - 2.0) * u * n as f64 + term(u - eps);
        assert!(
            (num(row, "h_delta_per_n") - h / n as f64).abs() < 1e-9,
            "n={n}"
        );
    }

    let r = rows(&resolv(&[
        "converge",
        "--iid",
        "0.3",
        "--n-sweep",
        "100,1000,10000",
        "--delta",
        "0.1",
    ]));
    let gaps: Vec<f64> = r.iter().map(|row| num(row, "gap").abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);

    let r = rows(&resolv(&[
        "converge",
        "--component",
        "0.1",
        "--component",
        "0.4",
        "--weights",
        "0.3,0.7",
        "--n",
        "10000",
        "--delta",
        "0.35",
    ]));
    assert!(num(&r[0], "gap").abs() <= 0.05);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = [
        "converge",
        "--iid",
        "0.3",
        "--n-sweep",
        "50,500,5000,200",
        "--delta",
        "0.1,0.25",
    ];
    let a = resolv_env(&args, "1");
    let b = resolv_env(&args, "4");
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = rows(&a);
    let ns: Vec<&str> = r.iter().map(|row| row["n"].as_str()).collect();
    assert_eq!(ns, ["50", "50", "500", "500", "5000", "5000", "200", "200"]);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"components": [{"p": 0.1, "alpha": 0.3}, {"p": 0.4, "alpha": 0.7}], "n": 1000, "delta": [0.35]}"#,
    )
    .unwrap();
    let out_path = dir.path().join("out.csv");
    let out = resolv(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "200",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with(
        "command,n,delta,h_delta_per_n,rate_first,gap,rate_second,residual_per_sqrt_n\n"
    ));
    assert!(text.contains("converge,200,0.35,"));
}

#[test]
fn json_output() {
    let out = resolv(&[
        "smooth",
        "--probs",
        "0.5,0.3,0.2",
        "--delta",
        "0.25",
        "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"][0]["j_star"], 2);
    assert!((v["rows"][0]["h_delta"].as_f64().unwrap() - 0.811278).abs() < 1e-6);
}

#[test]
fn timing_column_is_opt_in() {
    let plain = resolv(&["smooth", "--probs", "0.5,0.5", "--delta", "0.1"]);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("wall_time_ms"));
    let timed = rows(&resolv(&[
        "smooth", "--probs", "0.5,0.5", "--delta", "0.1", "--timing",
    ]));
    assert!(num(&timed[0], "wall_time_ms") >= 0.0);
}

#[test]
fn spec_errors_exit_with_two() {
    for args in [
        vec!["smooth", "--probs", "0.5,0.3,0.2", "--delta", "1.0"],
        vec!["smooth", "--probs", "0.5,0.6", "--delta", "0.1"],
        vec![
            "smooth", "--iid", "0.3", "--n", "20000000", "--delta", "0.1",
        ],
        vec![
            "smooth", "--iid", "0.3", "--probs", "0.5,0.5", "--delta", "0.1",
        ],
        vec!["rates", "--probs", "0.5,0.5", "--delta", "0.1"],
        vec!["code", "--probs", "0.5,0.5", "--gamma", "0"],
        vec!["code", "--probs", "0.5,0.5", "--gamma", "0.5", "--K", "1"],
        vec![
            "converge",
            "--iid",
            "0.2,0.3,0.5",
            "--n",
            "10",
            "--delta",
            "0.1",
        ],
        vec!["smooth", "--delta", "0.1"],
        vec!["bogus"],
    ] {
        let out = resolv(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let bad_threads = resolv_env(&["smooth", "--probs", "1", "--delta", "0"], "zero");
    assert_eq!(bad_threads.status.code(), Some(2));
}
