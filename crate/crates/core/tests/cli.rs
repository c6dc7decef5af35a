use std::path::{Path, PathBuf};

use meb_core::cli::{run_cli, EXIT_DISCREPANCY, EXIT_INEQUIVALENT, EXIT_OK, EXIT_USAGE};
use meb_core::chargroup::decompositions;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("meb").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn gen_file(dir: &Path, name: &str, source: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen"];
    args.extend_from_slice(source);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let (code, _, err) = run(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

fn without_timing(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with("timing_ms:")).collect::<Vec<_>>().join("\n")
}

#[test]
fn decomp_lists_trivial_first() {
    let (code, out, _) = run(&["decomp", "12"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], "[12]");
}

#[test]
fn gen_basis_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen_file(dir.path(), "g.json", &["--decomp", "2x3"]);
    let b = dir.path().join("b.json");
    let (code, _, err) = run(&["basis", "--gen", g.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");

    for input in [["--gen", g.to_str().unwrap()], ["--basis", b.to_str().unwrap()]] {
        let mut args = vec!["verify"];
        args.extend_from_slice(&input);
        let (code, out, err) = run(&args);
        assert_eq!(code, EXIT_OK, "{out}{err}");
        assert!(out.contains("result: pass"));
        assert!(out.contains("group power condition: pass"));
    }
}

#[test]
fn headline_pair_is_inequivalent() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_file(dir.path(), "dft4.json", &["--dft", "4"]);
    let b = gen_file(dir.path(), "h2.json", &["--hadamard", "2"]);
    let (code, out, _) = run(&["equiv", a.to_str().unwrap(), b.to_str().unwrap(), "--oracle"]);
    assert_eq!(code, EXIT_INEQUIVALENT);
    assert!(out.starts_with("verdict: inequivalent\n"));
    assert!(out.contains("oracle: agrees"));
    assert!(out.lines().last().unwrap().starts_with("timing_ms: "));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_file(dir.path(), "a.json", &["--decomp", "4"]);
    let b = gen_file(dir.path(), "b.json", &["--decomp", "4"]);
    let args = ["equiv", a.to_str().unwrap(), b.to_str().unwrap(), "--oracle", "--witness"];
    let (c1, o1, _) = run(&args);
    let (c2, o2, _) = run(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(without_timing(&o1), without_timing(&o2));
    assert!(o1.contains("bilocal relabeling: Identity"));
}

#[test]
fn oracle_never_disagrees_up_to_six() {
    let dir = tempfile::tempdir().unwrap();
    for d in 2..=6 {
        let files: Vec<PathBuf> = decompositions(d)
            .unwrap()
            .iter()
            .map(|dec| gen_file(dir.path(), &format!("{}.json", dec.flag()), &["--decomp", &dec.flag()]))
            .collect();
        for f1 in &files {
            for f2 in &files {
                let (code, out, err) = run(&["equiv", f1.to_str().unwrap(), f2.to_str().unwrap(), "--oracle"]);
                assert_ne!(code, EXIT_DISCREPANCY, "{out}{err}");
                assert!(code == EXIT_OK || code == EXIT_INEQUIVALENT);
            }
        }
    }
}

#[test]
fn usage_and_validation_errors() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["gen"]).0, EXIT_USAGE);
    assert_eq!(run(&["decomp", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&["gen", "--decomp", "2x"]).0, EXIT_USAGE);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"d":2,"base":2,"entries":[[0,0],[0,0]]}"#).unwrap();
    let (code, _, err) = run(&["verify", "--gen", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Zeilinger"), "{err}");

    let missing = dir.path().join("missing.json");
    let (code, _, err) = run(&["canon", missing.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("missing.json"));

    let g = gen_file(dir.path(), "g.json", &["--dft", "3"]);
    let (code, _, err) = run(&["basis", "--gen", g.to_str().unwrap(), "--tol", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("tolerance"), "{err}");
}

#[test]
fn classes_and_canon() {
    let (code, out, _) = run(&["classes", "8"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("classes: 3"));

    let dir = tempfile::tempdir().unwrap();
    let g = gen_file(dir.path(), "h.json", &["--hadamard", "1"]);
    let (code, out, _) = run(&["canon", g.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "d: 2\nbase: 2\n[0, 0]\n[0, 1]\n");
}

#[test]
fn cross_encoding_witness_reports_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_file(dir.path(), "z6.json", &["--decomp", "6"]);
    let b = gen_file(dir.path(), "z23.json", &["--decomp", "2x3"]);
    let (code, out, err) = run(&["equiv", a.to_str().unwrap(), b.to_str().unwrap(), "--witness"]);
    assert_eq!(code, EXIT_DISCREPANCY);
    assert!(out.starts_with("verdict: equivalent\n"));
    assert!(out.contains("bilocal: none"));
    assert!(err.contains("720"));
}
