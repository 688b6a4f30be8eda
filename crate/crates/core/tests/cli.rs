use std::path::Path;
use std::process::{Command, Output};

use ellipsoid_vc::cert::{Certificate, CertificateFile};

fn ellvc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellvc")).args(args).output().expect("ellvc runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn vcdim_prints_lifted_dimension() {
    let o = ellvc(&["vcdim", "--dim", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "5");
    assert_eq!(code(&ellvc(&["vcdim", "--dim", "0"])), 1);
    assert_eq!(code(&ellvc(&["vcdim", "--dim", "5"])), 1);
}

#[test]
fn vcdim_certify_d3() {
    let o = ellvc(&["vcdim", "--dim", "3", "--certify", "--refute-trials", "2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("512 of 512"));
}

#[test]
fn witness_file_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let o = ellvc(&["witness", "--dim", "1", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let file = CertificateFile::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.seed, Some(7));
    match file.certificate {
        Certificate::ShatterWitness(w) => {
            assert_eq!(w.points.len(), 2);
            assert_eq!(w.subsets.len(), 4);
        }
        other => panic!("unexpected kind {}", other.kind()),
    }
    assert_eq!(code(&ellvc(&["verify", out.to_str().unwrap()])), 0);
}

#[test]
fn refute_examples() {
    let dir = tempfile::tempdir().unwrap();
    let line = write(dir.path(), "line.json", r#"{"dim": 1, "points": [[0], [1], [2]]}"#);
    let o = ellvc(&["refute", "--points", &line]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("labeling 101"));

    let out = dir.path().join("r.json");
    assert_eq!(code(&ellvc(&["refute", "--dim", "2", "--seed", "11", "--out", out.to_str().unwrap()])), 2);
    let file = CertificateFile::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    match &file.certificate {
        Certificate::Refutation(r) => {
            assert_eq!(r.points.len(), 6);
            assert!(r.confirmation.lp_margin <= 1e-7);
        }
        other => panic!("unexpected kind {}", other.kind()),
    }
    assert_eq!(code(&ellvc(&["verify", out.to_str().unwrap()])), 0);

    let five = write(dir.path(), "five.json", r#"{"dim": 2, "points": [[0,0],[1,0],[0,1],[1,1],[2,3]]}"#);
    assert_eq!(code(&ellvc(&["refute", "--points", &five])), 1);
}

#[test]
fn oracle_examples() {
    let dir = tempfile::tempdir().unwrap();
    let line = write(dir.path(), "line.json", r#"{"dim": 1, "points": [[0], [1], [2]]}"#);
    let square = write(dir.path(), "square.json", r#"{"dim": 2, "points": [[0,0],[1,0],[0,1],[1,1]]}"#);
    assert_eq!(code(&ellvc(&["oracle", "--points", &line, "--labels", "010"])), 0);
    assert_eq!(code(&ellvc(&["oracle", "--points", &line, "--labels", "101"])), 2);
    let out = dir.path().join("o.json");
    assert_eq!(code(&ellvc(&["oracle", "--points", &square, "--labels", "1001", "--out", out.to_str().unwrap()])), 0);
    assert_eq!(code(&ellvc(&["verify", out.to_str().unwrap()])), 0);
    assert_eq!(code(&ellvc(&["oracle", "--points", &line, "--labels", "01"])), 1);
}

#[test]
fn oracle_tolerance_flag_marks_indeterminate() {
    let dir = tempfile::tempdir().unwrap();
    let line = write(dir.path(), "line.json", r#"{"dim": 1, "points": [[0], [1], [2]]}"#);
    // |t*| = 1.5 for the gapped labeling; a huge threshold makes it too close to call.
    assert_eq!(code(&ellvc(&["oracle", "--points", &line, "--labels", "101", "--tolerance", "10"])), 3);
}

#[test]
fn gmm_shatter_examples() {
    let o = ellvc(&["gmm-shatter", "--dim", "1", "--components", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("|U| = 4, 16 subsets certified"));
    let o = ellvc(&["gmm-shatter", "--dim", "2", "--components", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("|U| = 10, 1024 subsets certified"));
    assert_eq!(code(&ellvc(&["gmm-shatter", "--dim", "2", "--components", "9"])), 1);
}

#[test]
fn shatter_fn_table() {
    let dir = tempfile::tempdir().unwrap();
    let line = write(dir.path(), "line.json", r#"{"dim": 1, "points": [[0], [1], [2]]}"#);
    let o = ellvc(&["shatter-fn", "--points", &line]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "subset_size,realizable,total\n0,1,1\n1,3,3\n2,2,3\n3,1,1\n");
    let pair = write(dir.path(), "pair.json", r#"{"dim": 1, "points": [[-1], [1]]}"#);
    assert_eq!(stdout(&ellvc(&["shatter-fn", "--points", &pair])), "subset_size,realizable,total\n0,1,1\n1,2,2\n2,1,1\n");
    let empty = write(dir.path(), "empty.json", "");
    assert_eq!(code(&ellvc(&["shatter-fn", "--points", &empty])), 1);
}

#[test]
fn verify_rejects_tampered_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    assert_eq!(code(&ellvc(&["witness", "--dim", "2", "--seed", "1", "--out", out.to_str().unwrap()])), 0);
    let mut file = CertificateFile::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    if let Certificate::ShatterWitness(w) = &mut file.certificate {
        w.subsets[7].lifted[0] += 0.4;
    }
    std::fs::write(&out, file.to_json().unwrap()).unwrap();
    assert_eq!(code(&ellvc(&["verify", out.to_str().unwrap()])), 3);
    let garbage = write(dir.path(), "g.json", "{}");
    assert_eq!(code(&ellvc(&["verify", &garbage])), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&ellvc(&[])), 1);
    assert_eq!(code(&ellvc(&["refute"])), 1);
    assert_eq!(code(&ellvc(&["--help"])), 0);
}
