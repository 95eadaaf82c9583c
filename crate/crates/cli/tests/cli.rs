use std::path::PathBuf;
use std::process::Command;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pga(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pga"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("pga runs");
    (
        out.status.code().expect("exit status"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const LOOP: &str = "{1 | true} (-c.iszero;#2;!;c.decr)^w {0 | c = nnc(0)}";

#[test]
fn normalize_prints_period_and_length() {
    let (code, out, _) = pga(&["normalize", "(!)^w ; c.incr"]);
    assert_eq!(code, 0);
    assert_eq!(out, "canonical: !^w\nperiod: !\nlen: omega\n");
    let (code, out, _) = pga(&["normalize", "c.incr ; (#0)^2"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "canonical: c.incr ; #0 ; #0\nprefix: c.incr ; #0 ; #0\nlen: 3\n"
    );
}

#[test]
fn thread_dump_is_an_adjacency_list() {
    let (code, out, _) = pga(&["thread", "-c.iszero ; #2 ; ! ; c.decr ; #0"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "n0: branch c.iszero -> n1 / n2\nn1: stop\nn2: branch c.decr -> n3 / n3\nn3: dead\n"
    );
}

#[test]
fn run_reports_the_outcome() {
    let (code, out, _) = pga(&[
        "run",
        "(-c.iszero;#2;!;c.decr)^w",
        "--state",
        "{c = counter(3)}",
    ]);
    assert_eq!((code, out.as_str()), (0, "halted {c = counter(0)}\n"));
    let (code, out, _) = pga(&[
        "run",
        "-c.iszero ; #2 ; ! ; c.decr",
        "--state",
        "{c = counter(5)}",
    ]);
    assert_eq!((code, out.as_str()), (0, "exited 1 {c = counter(4)}\n"));
    let (code, out, _) = pga(&["run", "#0"]);
    assert_eq!((code, out.as_str()), (0, "inactive\n"));
    let (code, out, _) = pga(&[
        "run",
        "(c.incr)^w",
        "--state",
        "{c = counter(0)}",
        "--bound",
        "2",
    ]);
    assert_eq!(code, 2, "{out}");
    assert!(out.starts_with("budget of"));
}

#[test]
fn holds_exit_status_follows_the_verdict() {
    let (code, out, _) = pga(&["holds", "--algebra", "counter", "--bound", "100", LOOP]);
    assert_eq!((code, out.as_str()), (0, "HOLDS (bounded, B=100)\n"));
    let (code, out, _) = pga(&[
        "holds",
        "--algebra",
        "boolreg",
        "{1 | true} r.set:t ; ! {0 | r = reg(true)}",
    ]);
    assert_eq!((code, out.as_str()), (0, "HOLDS (exhaustive)\n"));
    let (code, out, _) = pga(&["holds", "{1 | true} c.incr {2 | true}"]);
    assert_eq!(code, 1);
    assert_eq!(
        out,
        "FAILS: from {c = counter(0)}: exited 1 {c = counter(1)}\n"
    );
}

#[test]
fn strongest_post() {
    let (code, out, _) = pga(&[
        "sp",
        "-c.iszero ; #2 ; ! ; c.decr",
        "--pre",
        "c = nnc(s(s(0)))",
        "--exit",
        "1",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("post: c = nnc(s(0))\n"), "{out}");
    let (code, out, _) = pga(&["sp", "c.incr", "--exit", "2"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("NONE"), "{out}");
}

#[test]
fn check_golden_proof() {
    let (code, out, _) = pga(&["check", "proofs/counter_zero.proof"]);
    assert_eq!(code, 0);
    assert!(
        out.starts_with("ACCEPTED, 2 bounded entailment assumptions\n"),
        "{out}"
    );
    let (code, out, _) = pga(&["check", "--strict", "proofs/counter_zero.proof"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("REJECTED, 2 failing nodes\n"), "{out}");
}

#[test]
fn usage_and_parse_errors_exit_with_three() {
    let (code, _, err) = pga(&["normalize", "c.incr ;"]);
    assert_eq!(code, 3);
    assert!(err.contains("position 8"), "{err}");
    let (code, _, _) = pga(&["--bound", "0", "normalize", "!"]);
    assert_eq!(code, 3);
    let (code, _, _) = pga(&["frobnicate"]);
    assert_eq!(code, 3);
    let (code, _, err) = pga(&["check", "no/such.proof"]);
    assert_eq!(code, 3);
    assert!(err.contains("cannot read"), "{err}");
    let (code, _, _) = pga(&["holds", "{0 | true} ! {0 | true}"]);
    assert_eq!(code, 3);
    let (code, _, _) = pga(&["run", "!", "--entry", "3"]);
    assert_eq!(code, 3);
}

/// Structured output is compared byte for byte with the files in `golden/`.
#[test]
fn structured_output_matches_golden_files() {
    let cases: &[(&str, &[&str], i32)] = &[
        ("normalize", &["normalize", "c.incr ; (!)^w"], 0),
        ("thread", &["thread", "-c.iszero ; #2 ; ! ; c.decr ; #0"], 0),
        (
            "run",
            &[
                "run",
                "-c.iszero ; #2 ; ! ; c.decr",
                "--state",
                "{c = counter(5)}",
            ],
            0,
        ),
        ("holds", &["holds", LOOP], 0),
        ("holds_fails", &["holds", "{1 | true} c.incr {2 | true}"], 1),
        (
            "sp",
            &["sp", "r.set:f", "--algebra", "boolreg", "--exit", "1"],
            0,
        ),
        ("check", &["check", "proofs/counter_zero.proof"], 0),
        ("error", &["normalize", "#"], 3),
    ];
    for (name, args, expected) in cases {
        let mut args = args.to_vec();
        args.extend(["--format", "structured"]);
        let (code, out, _) = pga(&args);
        assert_eq!(code, *expected, "{name}: {out}");
        let path = root().join(format!("crates/cli/tests/golden/{name}.json"));
        let golden =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(out, golden, "{name}");
        serde_json::from_str::<serde_json::Value>(&out).expect("valid JSON");
    }
}
