use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dotalg"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Compares with `tests/golden/{name}`; set `UPDATE_GOLDEN=1` to rewrite.
fn golden(name: &str, args: &[&str]) {
    let got = stdout_of(args);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(got, want, "output of {args:?} changed");
}

#[test]
fn golden_outputs_of_shipped_examples() {
    let cases: &[(&str, &[&str])] = &[
        ("has_disease.parse.txt", &["parse", "data/has_disease.dpp"]),
        (
            "has_disease.graph.dot",
            &["graph", "data/has_disease.dpp", "--node", "test"],
        ),
        (
            "has_disease.hypergraph.dot",
            &[
                "graph",
                "data/has_disease.dpp",
                "--node",
                "test",
                "--hypergraph",
            ],
        ),
        (
            "has_disease.decompose.txt",
            &[
                "decompose",
                "data/has_disease.dpp",
                "--node",
                "test",
                "--mode",
                "exact",
            ],
        ),
        (
            "has_disease.decompose.dot",
            &[
                "decompose",
                "data/has_disease.dpp",
                "--node",
                "test",
                "--dot",
            ],
        ),
        (
            "has_disease.algebraise.txt",
            &["algebraise", "data/has_disease.dpp"],
        ),
        (
            "has_disease.compile.json",
            &["compile", "data/has_disease.dpp"],
        ),
        (
            "has_disease.infer.txt",
            &["infer", "data/has_disease.dpp", "--digits", "30"],
        ),
        (
            "has_disease.infer.json",
            &["infer", "data/has_disease.dpp", "--digits", "30", "--json"],
        ),
        ("has_disease.eval.txt", &["eval", "data/has_disease.dpp"]),
        (
            "has_disease.oracle.txt",
            &["oracle", "data/has_disease.dpp"],
        ),
        ("has_disease.stats.txt", &["stats", "data/has_disease.dpp"]),
        (
            "f_3.infer.txt",
            &[
                "infer",
                "data/f_family.dpp",
                "--fn",
                "f_3",
                "--digits",
                "20",
            ],
        ),
        (
            "f_8.stats.txt",
            &["stats", "data/f_family.dpp", "--fn", "f_8"],
        ),
        (
            "booking.eval.txt",
            &[
                "eval",
                "data/booking.cq",
                "--instance",
                "data/booking.csv",
                "--semiring",
                "bool",
            ],
        ),
        ("booking.parse.txt", &["parse", "data/booking.cq"]),
        ("attack_tree.eval.txt", &["eval", "data/attack_tree.json"]),
        ("attack_tree.stats.txt", &["stats", "data/attack_tree.json"]),
    ];
    for (name, args) in cases {
        golden(name, args);
    }
}

#[test]
fn subcommands_are_deterministic() {
    for args in [
        &["algebraise", "data/has_disease.dpp", "--json"][..],
        &["compile", "data/f_family.dpp", "--fn", "f_4"],
        &["decompose", "data/booking.cq", "--json"],
    ] {
        assert_eq!(stdout_of(args), stdout_of(args), "{args:?}");
    }
}

fn dyadic(v: &serde_json::Value) -> f64 {
    let m: f64 = v["mantissa"].as_str().unwrap().parse().unwrap();
    m * 2f64.powi(v["exponent"].as_i64().unwrap() as i32)
}

#[test]
fn has_disease_inference_is_within_the_bound() {
    let out = stdout_of(&["infer", "data/has_disease.dpp", "--digits", "30", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let exact = (1e-4 * 0.99 * 0.01) / (1e-4 * 0.99 * 0.01 + 0.9999 * 0.02 * 0.98);
    assert!((dyadic(&v["p_f_approx"]) - exact).abs() <= 2f64.powi(-31));
    assert_eq!(dyadic(&v["error_bound"]), 2f64.powi(-31));
}

#[test]
fn f_three_is_four_to_the_minus_eight() {
    for method in ["exact", "truncated"] {
        let out = stdout_of(&[
            "infer",
            "data/f_family.dpp",
            "--fn",
            "f_3",
            "--digits",
            "20",
            "--method",
            method,
            "--json",
        ]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((dyadic(&v["p_f_approx"]) - 4f64.powi(-8)).abs() <= 2f64.powi(-21));
    }
}

#[test]
fn pipeline_and_oracle_agree_on_applications() {
    let query = [
        "data/booking.cq",
        "--instance",
        "data/booking.csv",
        "--json",
    ];
    let eval = stdout_of(&[&["eval"][..], &query].concat());
    let oracle = stdout_of(&[&["oracle"][..], &query].concat());
    assert_eq!(eval, oracle);
    assert_eq!(
        stdout_of(&["eval", "data/attack_tree.json"]),
        stdout_of(&["oracle", "data/attack_tree.json"])
    );
    assert_eq!(
        stdout_of(&["eval", "data/has_disease.dpp", "--semiring", "bool"]),
        stdout_of(&["oracle", "data/has_disease.dpp", "--semiring", "bool"])
    );
}

#[test]
fn bare_diagram_json_is_accepted() {
    let dir = std::env::temp_dir().join("dotalg-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("chain.json");
    std::fs::write(
        &path,
        r#"{"vars": ["A", "A", "B"],
            "assignments": [
              {"outs": [1], "sym": "f", "ins": [0]},
              {"outs": [2], "sym": "g", "ins": [1, 0]}
            ],
            "inputs": [0], "outputs": [2]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    for s in ["rational", "bool", "tropical"] {
        let args = ["--semiring", s, "--seed", "3"];
        assert_eq!(
            stdout_of(&[&["eval", p][..], &args].concat()),
            stdout_of(&[&["oracle", p][..], &args].concat()),
            "semiring {s}"
        );
    }
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = std::env::temp_dir().join("dotalg-cli-codes");
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let bad = write("bad.dpp", "f() := let x = ; x");
    assert_eq!(code(&["parse", &bad]), 2);

    let clash = write(
        "clash.json",
        r#"{"vars": ["A", "B"],
            "assignments": [
              {"outs": [1], "sym": "f", "ins": [0]},
              {"outs": [0], "sym": "f", "ins": [1]}
            ],
            "inputs": [], "outputs": []}"#,
    );
    assert_eq!(code(&["stats", &clash]), 3);

    assert_eq!(
        code(&[
            "oracle",
            "data/f_family.dpp",
            "--fn",
            "f_3",
            "--max-unfold",
            "5"
        ]),
        4
    );

    let never = write(
        "never.dpp",
        "f() := let x = flip(1/3); let y = x ∧ ¬x; observe(y); x",
    );
    let out = run(&[
        "infer",
        &never,
        "--method",
        "truncated",
        "--precision-cap",
        "40",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "unresolved_acceptance");
    assert_eq!(code(&["infer", &never]), 0);

    assert_eq!(code(&["eval", "data/booking.cq"]), 1);
    assert_eq!(
        code(&["eval", "data/attack_tree.json", "--semiring", "rational"]),
        1
    );
}
