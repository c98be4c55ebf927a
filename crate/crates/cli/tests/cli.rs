use std::path::Path;
use std::process::{Command, Output};

fn delrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delrate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Output without the timestamp comment.
fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn warmup_bound_is_one_row() {
    let text = stdout(&delrate(&[
        "bound", "--kind", "warmup", "--n", "10000", "--d", "0.5",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# generated_at="));
    assert_eq!(
        lines[1],
        "kind,n,d,value,half_width,samples,seed,generator_id"
    );
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "warmup_ub");
    assert_eq!(r[0][1], "10000");
    assert!(r[0][4..].iter().all(String::is_empty));
}

#[test]
fn sweep_schema() {
    let text = stdout(&delrate(&[
        "sweep",
        "--n",
        "40",
        "--d-grid",
        "0.05:0.95:0.05",
        "--kinds",
        "main,sim",
        "--samples",
        "50",
        "--seed",
        "7",
    ]));
    let r = rows(&text);
    assert_eq!(r.len(), 19 * 5);
    for chunk in r.chunks(5) {
        let kinds: Vec<&str> = chunk.iter().map(|row| row[0].as_str()).collect();
        assert_eq!(
            kinds,
            ["main_ub", "sim_lb", "sim_ub", "e_inf_ub", "comp_rate_lb"]
        );
        assert!(chunk
            .iter()
            .all(|row| row[2] == chunk[0][2] && row.len() == 8));
        assert_eq!(chunk[1][5], "50");
        assert_eq!(chunk[1][6], "7");
        assert_eq!(chunk[1][7], "chacha20");
        assert!(chunk[0][4].is_empty());
    }
}

#[test]
fn pi_cache_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("pi60.csv");
    stdout(&delrate(&[
        "pi-table",
        "--n",
        "60",
        "--out",
        path_str(&cache),
    ]));
    let args = [
        "bound",
        "--kind",
        "main",
        "--n",
        "60",
        "--d-grid",
        "0.1:0.9:0.2",
    ];
    let fresh = stdout(&delrate(&args));
    let mut cached_args = args.to_vec();
    cached_args.extend(["--pi-cache", path_str(&cache)]);
    let cached = stdout(&delrate(&cached_args));
    assert_eq!(body(&fresh), body(&cached));

    // a missing cache is built and written, then reused
    let built = dir.path().join("built.csv");
    let mut build_args = args.to_vec();
    build_args.extend(["--pi-cache", path_str(&built)]);
    assert_eq!(body(&stdout(&delrate(&build_args))), body(&fresh));
    assert_eq!(
        std::fs::read_to_string(&built).unwrap(),
        std::fs::read_to_string(&cache).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let base = [
        "sweep",
        "--n",
        "64",
        "--d-grid",
        "0.2:0.8:0.3",
        "--kinds",
        "main,efficient,sim",
        "--samples",
        "300",
        "--seed",
        "11",
    ];
    let one = stdout(&delrate(&[&["--threads", "1"], &base[..]].concat()));
    let three = stdout(&delrate(&[&["--threads", "3"], &base[..]].concat()));
    assert_eq!(body(&one), body(&three));
}

#[test]
fn reruns_reproduce_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let out = delrate(&[
            "simulate",
            "--n",
            "30",
            "--d-grid",
            "0.1:0.5:0.2",
            "--samples",
            "100",
            "--seed",
            "3",
            "--out",
            path_str(out),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty(), "per-d summary goes to stderr");
    }
    let a = std::fs::read_to_string(a).unwrap();
    let b = std::fs::read_to_string(b).unwrap();
    assert_eq!(body(&a), body(&b));
    assert_eq!(rows(&a).len(), 6);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| delrate(args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(
        code(&["bound", "--kind", "warmup", "--n", "10", "--d", "0.5", "--bogus"]),
        Some(1)
    );
    assert_eq!(
        code(&["bound", "--kind", "warmup", "--n", "10", "--d", "1.5"]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "bound",
            "--kind",
            "warmup",
            "--n",
            "10",
            "--d-grid",
            "0.9:0.1:0.1"
        ]),
        Some(1)
    );
    assert_eq!(
        code(&["bound", "--kind", "warmup", "--n", "0", "--d", "0.5"]),
        Some(1)
    );
    assert_eq!(
        code(&["simulate", "--n", "10", "--d", "0.5", "--samples", "0"]),
        Some(1)
    );
    assert_eq!(code(&["verify", "--max-n", "13"]), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "not a table\n").unwrap();
    let out = delrate(&[
        "bound",
        "--kind",
        "main",
        "--n",
        "10",
        "--d",
        "0.5",
        "--pi-cache",
        path_str(&junk),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--pi-cache"));

    let wrong_n = dir.path().join("pi8.csv");
    stdout(&delrate(&[
        "pi-table",
        "--n",
        "8",
        "--out",
        path_str(&wrong_n),
    ]));
    assert_eq!(
        code(&[
            "bound",
            "--kind",
            "main",
            "--n",
            "10",
            "--d",
            "0.5",
            "--pi-cache",
            path_str(&wrong_n)
        ]),
        Some(1)
    );

    let unwritable = dir.path().join("missing-dir").join("out.csv");
    assert_eq!(
        code(&[
            "bound",
            "--kind",
            "warmup",
            "--n",
            "10",
            "--d",
            "0.5",
            "--out",
            path_str(&unwritable)
        ]),
        Some(2)
    );
}

#[test]
fn verify_passes_at_small_n() {
    let text = stdout(&delrate(&["verify", "--max-n", "5"]));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn json_output() {
    let text = stdout(&delrate(&[
        "bound",
        "--kind",
        "efficient",
        "--n",
        "30",
        "--d",
        "0.4",
        "--format",
        "json",
        "--verbose-components",
    ]));
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"kind\": \"efficient_ub\""));
    assert!(text.contains("\"components\""));
    assert!(text.contains("\"kl_tail\""));
}
