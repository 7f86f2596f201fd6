use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use triadsat::fixture::EXAMPLE_DIMACS;

fn triadsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triadsat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// All 32 clauses over 4 variables.
fn full_universe_n4() -> String {
    let mut out = String::from("p cnf 4 32\n");
    for (a, b, c) in [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)] {
        for signs in 0..8 {
            let s = |bit: i32, v: i32| if signs >> bit & 1 == 1 { -v } else { v };
            out.push_str(&format!("{} {} {} 0\n", s(2, a), s(1, b), s(0, c)));
        }
    }
    out
}

#[test]
fn example_prints_headline_numbers() {
    let out = triadsat(&["example"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("aclausole: 20 -> 7"), "{text}");
    assert!(text.contains("max3sat clauses: 25"));
    assert!(text.contains("triads: 7 == aclausole: 7"));
    assert!(text.contains("model: FTTT") || text.contains("model: FTFT"));
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let example = write(dir.path(), "example.cnf", EXAMPLE_DIMACS);
    let out = triadsat(&["solve", example.to_str().unwrap()]);
    assert_eq!(code(&out), 10);
    let text = stdout(&out);
    assert!(text.contains("v -1 2 3 4 0") || text.contains("v -1 2 -3 4 0"), "{text}");

    let full = write(dir.path(), "full.cnf", &full_universe_n4());
    let out = triadsat(&["solve", full.to_str().unwrap()]);
    assert_eq!(code(&out), 20);
    assert_eq!(stdout(&out).trim(), "UNSAT");

    let bad = write(dir.path(), "bad.cnf", "p cnf x 3\n1 2 3 0\n");
    let out = triadsat(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1"), "{err}");

    let out = triadsat(&["solve", dir.path().join("missing.cnf").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn solve_json_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let example = write(dir.path(), "example.cnf", EXAMPLE_DIMACS);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = triadsat(&["solve", example.to_str().unwrap(), "--json", p.to_str().unwrap(), "--trace"]);
        assert_eq!(code(&out), 10);
    }
    let (ja, jb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["status"], "SAT_EXTRACTED");
    assert_eq!(v["saturated_count"], 7);
}

#[test]
fn oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let example = write(dir.path(), "example.cnf", EXAMPLE_DIMACS);
    let out = triadsat(&["oracle", "--enumerate", example.to_str().unwrap()]);
    assert_eq!(code(&out), 10);
    let text = stdout(&out);
    let models: Vec<&str> = text.lines().filter(|l| !l.starts_with('c')).collect();
    assert_eq!(models, ["FTFT", "FTTT"]);

    let empty3 = write(dir.path(), "empty3.cnf", "p cnf 3 0\n");
    let out = triadsat(&["oracle", empty3.to_str().unwrap()]);
    assert_eq!(code(&out), 10);
    assert!(stdout(&out).contains("c FFF"));

    let big = write(dir.path(), "big.cnf", "p cnf 30 1\n1 2 3 0\n");
    let out = triadsat(&["oracle", big.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    let full = write(dir.path(), "full.cnf", &full_universe_n4());
    assert_eq!(code(&triadsat(&["oracle", full.to_str().unwrap()])), 20);
}

#[test]
fn fuzz_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = triadsat(&["fuzz", "--count", "0", "--outdir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("instances: 0"));

    let out = triadsat(&["fuzz", "--example", "--outdir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("AGREE_SAT: 1"));

    let run = |name: &str| {
        let json = dir.path().join(format!("{name}.json"));
        let out = triadsat(&[
            "fuzz",
            "--seed",
            "42",
            "--count",
            "100",
            "--vars",
            "4..6",
            "--density",
            "4",
            "--outdir",
            dir.path().join(name).to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
        ]);
        assert!([0, 30].contains(&code(&out)));
        fs::read(json).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["instances"], 100);
    assert_eq!(report["tallies"]["SOUNDNESS_VIOLATION"], 0);

    assert_eq!(code(&triadsat(&["fuzz", "--vars", "2..3", "--outdir", out_dir.to_str().unwrap()])), 1);
}

#[test]
fn fuzz_persists_bundles_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    // Above --verify-max-n every instance is UNVERIFIED and gets a bundle.
    let out = triadsat(&[
        "fuzz",
        "--count",
        "3",
        "--vars",
        "5",
        "--verify-max-n",
        "4",
        "--outdir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 30);
    let bundles: Vec<_> = fs::read_dir(&out_dir).unwrap().collect();
    assert_eq!(bundles.len(), 3);
    for b in bundles {
        let out = triadsat(&["replay", b.unwrap().path().to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(stdout(&out).contains("files identical: true"));
    }
}

#[test]
fn audit_commands() {
    let dir = tempfile::tempdir().unwrap();
    let example = write(dir.path(), "example.cnf", EXAMPLE_DIMACS);
    let out = triadsat(&["audit", example.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("coincidence: 7 == 7 pass"));

    let full = write(dir.path(), "full.cnf", &full_universe_n4());
    let out = triadsat(&["audit", full.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("coincidence: 0 == 0 pass"));

    let empty4 = write(dir.path(), "empty4.cnf", "p cnf 4 0\n");
    let out = triadsat(&["audit", empty4.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("coincidence: 32 == 32 pass"));

    let big = write(dir.path(), "big.cnf", "p cnf 21 1\n1 2 3 0\n");
    assert_eq!(code(&triadsat(&["audit", big.to_str().unwrap()])), 1);
}

#[test]
fn scaling_emits_csv() {
    let out = triadsat(&["scaling", "--vars", "4..6", "--repetitions", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("n,m,instances,universe,"));
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text, stdout(&triadsat(&["scaling", "--vars", "4..6", "--repetitions", "2"])));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&triadsat(&["bogus"])), 1);
    assert_eq!(code(&triadsat(&["fuzz", "--vars", "nope"])), 1);
    assert_eq!(code(&triadsat(&["--help"])), 0);
}
