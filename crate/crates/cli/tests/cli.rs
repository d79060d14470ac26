use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jdm_core::io::{parse_jdm, read_samples};
use jdm_core::model::{extract_jdm, validate_realization};
use jdm_core::{fixtures, io::format_jdm};
use tempfile::TempDir;

fn jdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jdm")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_reports_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let six = write(&dir, "six.jdm", &format_jdm(&fixtures::six_node_jdm()));
    let o = jdm(&["check", s(&six)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("N 6\nM 7\n"));

    let asym = write(&dir, "asym.jdm", "2\n0 1\n2 0\n");
    assert_eq!(jdm(&["check", s(&asym)]).status.code(), Some(2));
    let garbled = write(&dir, "garbled.jdm", "2\n0 1\n1 x\n");
    let o = jdm(&["check", s(&garbled)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let lone = write(&dir, "lone.jdm", "2\n0 0\n0 1\n");
    assert_eq!(jdm(&["check", s(&lone)]).status.code(), Some(1));
    assert_eq!(jdm(&["check", "/nonexistent/file"]).status.code(), Some(2));
}

#[test]
fn sample_is_valid_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let j = fixtures::six_node_jdm();
    let six = write(&dir, "six.jdm", &format_jdm(&j));
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = jdm(&["sample", s(&six), "--seed", "42", "--n-spectra", "10", "--samples-per-spectra", "10", "--jobs", jobs, "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let samples: Vec<_> = read_samples(&bytes[..]).collect::<Result<_, _>>().unwrap();
    assert_eq!(samples.len(), 100);
    for smp in &samples {
        assert!(validate_realization(&smp.graph, &j));
        assert_eq!(format_jdm(&extract_jdm(&smp.graph)), format_jdm(&j));
    }
}

#[test]
fn single_edge_sample() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.jdm", "1\n1\n");
    let o = jdm(&["sample", s(&one), "--seed", "7", "--n-spectra", "1", "--samples-per-spectra", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let recs: Vec<_> = read_samples(&o.stdout[..]).collect::<Result<_, _>>().unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].graph.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    assert_eq!(recs[0].log_weight, 0.0);
}

#[test]
fn unseeded_runs_print_their_seed() {
    let dir = TempDir::new().unwrap();
    let six = write(&dir, "six.jdm", &format_jdm(&fixtures::six_node_jdm()));
    let o = jdm(&["sample", s(&six), "--n-spectra", "2", "--samples-per-spectra", "2"]);
    let err = String::from_utf8(o.stderr).unwrap();
    let seed = err.trim().strip_prefix("seed: ").expect("seed line");
    let again = jdm(&["sample", s(&six), "--n-spectra", "2", "--samples-per-spectra", "2", "--seed", seed]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn two_stage_pipeline_matches_one_stage() {
    let dir = TempDir::new().unwrap();
    let six = write(&dir, "six.jdm", &format_jdm(&fixtures::six_node_jdm()));
    let sp = dir.path().join("spectra.txt");
    assert_eq!(jdm(&["spectra", s(&six), "--seed", "5", "--n-spectra", "4", "--out", s(&sp)]).status.code(), Some(0));
    let staged = jdm(&["sample", s(&six), "--seed", "5", "--spectra", s(&sp), "--samples-per-spectra", "3"]);
    let direct = jdm(&["sample", s(&six), "--seed", "5", "--n-spectra", "4", "--samples-per-spectra", "3"]);
    assert_eq!(staged.status.code(), Some(0));
    assert_eq!(staged.stdout, direct.stdout);
}

#[test]
fn estimate_reports_and_rejects_empty_streams() {
    let dir = TempDir::new().unwrap();
    let six = write(&dir, "six.jdm", &format_jdm(&fixtures::six_node_jdm()));
    let samples = dir.path().join("s.jsonl");
    jdm(&["sample", s(&six), "--seed", "1", "--n-spectra", "5", "--samples-per-spectra", "4", "--out", s(&samples)]);
    let hist = dir.path().join("h.txt");
    let o = jdm(&["estimate", s(&samples), "--histogram", s(&hist), "--bins", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# samples 20 spectra 5\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);
    let h = fs::read_to_string(&hist).unwrap();
    assert_eq!(h.lines().filter(|l| !l.starts_with('#')).count(), 8);

    let o = jdm(&["estimate", s(&samples), "--observable", "cycles", "--max-cycle-len", "6"]);
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert_eq!(jdm(&["estimate", s(&samples), "--observable", "cycles", "--max-cycle-len", "9"]).status.code(), Some(2));

    let first = fs::read_to_string(&samples).unwrap().lines().next().unwrap().to_string() + "\n";
    let single = write(&dir, "one.jsonl", &first);
    let o = jdm(&["estimate", s(&single)]);
    for line in stdout(&o).lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split(' ').collect();
        assert_eq!(f[1], f[2]);
    }
    let empty = write(&dir, "empty.jsonl", "");
    assert_eq!(jdm(&["estimate", s(&empty)]).status.code(), Some(1));
    let junk = write(&dir, "junk.jsonl", "{\"nope\": 1}\n");
    assert_eq!(jdm(&["estimate", s(&junk)]).status.code(), Some(2));
}

#[test]
fn extract_examples() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.txt", "0 1\n1 2\n0 2\n");
    let o = jdm(&["extract", s(&tri)]);
    assert_eq!(stdout(&o), "2\n0 0\n0 3\n");
    let path = write(&dir, "path.txt", "0 1\n1 2\n2 3\n");
    let out = dir.path().join("path.jdm");
    jdm(&["extract", s(&path), "--out", s(&out)]);
    let j = parse_jdm(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((j.get(1, 2), j.get(2, 2)), (2, 1));
    assert_eq!(jdm(&["check", s(&out)]).status.code(), Some(0));
    let lp = write(&dir, "loop.txt", "0 1\n3 3\n");
    let o = jdm(&["extract", s(&lp)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn enumerate_examples() {
    let dir = TempDir::new().unwrap();
    let six = write(&dir, "six.jdm", &format_jdm(&fixtures::six_node_jdm()));
    let o = jdm(&["enumerate", s(&six)]);
    assert!(stdout(&o).contains("# isomorphism_classes 3\n"));
    let four = write(&dir, "four.jdm", "1\n2\n");
    let o = jdm(&["enumerate", s(&four)]);
    assert!(stdout(&o).starts_with("# labeled_graphs 3\n# isomorphism_classes 1\n"));
    let ten = write(&dir, "ten.jdm", &format_jdm(&fixtures::ten_node_jdm()));
    assert_eq!(jdm(&["enumerate", s(&ten), "--limit-n", "8"]).status.code(), Some(1));
}
