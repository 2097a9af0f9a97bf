use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use memzoo_cli::ProcessFile;
use memzoo_core::process::validate_causality;
use memzoo_core::{hermitian_eigen, ProcessTensor, SpaceLabel, Tolerances};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("memzoo-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn memzoo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memzoo"))
        .args(args)
        .env_remove("MEMZOO_TOLERANCE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn build(dir: &Path, file: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(file);
    let mut full = vec!["build"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let o = memzoo(&full);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    path
}

fn load(path: &Path) -> ProcessFile {
    ProcessFile::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_state(dir: &Path, file: &str, labels: &str, matrix: &str) -> PathBuf {
    let path = dir.join(file);
    fs::write(
        &path,
        format!("{{\"format_version\": 1, \"labels\": [{labels}], \"matrix\": [{matrix}]}}"),
    )
    .unwrap();
    path
}

const QUBIT_1I: &str = r#"{"time": 1, "port": "input", "role": "system", "dim": 2}"#;

#[test]
fn random_builds_are_byte_identical() {
    let d = scratch("random");
    for class in ["M", "MM", "CM", "SEP", "NS", "QM"] {
        let a = build(&d, "a.json", &["random", "--class", class, "--seed", "7"]);
        let first = fs::read(&a).unwrap();
        let b = build(&d, "b.json", &["random", "--class", class, "--seed", "7"]);
        assert_eq!(first, fs::read(&b).unwrap(), "class {class}");
        let other = build(&d, "c.json", &["random", "--class", class, "--seed", "8"]);
        assert_ne!(first, fs::read(&other).unwrap(), "class {class}");
    }
}

#[test]
fn guerin_has_trace_two_and_is_causal() {
    let d = scratch("guerin");
    let f = load(&build(&d, "g.json", &["guerin"]));
    let op = f.to_operator().unwrap();
    assert_eq!(f.labels.iter().map(|l| l.dim).collect::<Vec<_>>(), [2, 2, 2]);
    assert!((op.trace().re - 2.0).abs() < 1e-12);
    let p = ProcessTensor::from_operator(op).unwrap();
    let c = validate_causality(&p, &Tolerances::default()).unwrap();
    assert!(c.passed && c.max_residual <= 1e-9);
    assert_eq!(f.metadata["class_hint"], "SEP");
}

#[test]
fn trivial_identity_matches_rank_one_oracle() {
    let d = scratch("trivial");
    let f = load(&build(&d, "t.json", &["trivial-identity", "--times", "3", "--dim", "2"]));
    let want = [
        SpaceLabel::sys_in(3, 2),
        SpaceLabel::sys_out(2, 2),
        SpaceLabel::sys_in(2, 2),
        SpaceLabel::sys_out(1, 2),
        SpaceLabel::sys_in(1, 2),
    ];
    assert_eq!(f.labels, want);
    // |v⟩ = Σ_ab |a a b b 0⟩ and C = |v⟩⟨v|.
    let mut v = [0.0; 32];
    for a in 0..2 {
        for b in 0..2 {
            v[16 * a + 8 * a + 4 * b + 2 * b] = 1.0;
        }
    }
    for r in 0..32 {
        for c in 0..32 {
            assert_eq!(f.matrix[r * 32 + c], [v[r] * v[c], 0.0], "entry ({r}, {c})");
        }
    }
}

#[test]
fn classify_fig3_reports_the_k2_residual() {
    let d = scratch("fig3");
    let f = build(&d, "f.json", &["fig3"]);
    let o = memzoo(&["classify", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("non-signalling: fail"), "{text}");
    assert!(text.contains("k = 2: residual 4.000000e0"), "{text}");
    assert!(text.contains("NS   fail"));
    assert!(text.contains("CM   pass (by construction)"));
}

#[test]
fn classify_guerin_is_ppt_everywhere() {
    let d = scratch("guerin-classify");
    let f = build(&d, "g.json", &["guerin"]);
    let o = memzoo(&["classify", f.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["report"];
    assert_eq!(r["verdicts"]["SEP"], "pass_by_construction");
    assert_eq!(r["verdicts"]["CM"], "inconclusive");
    assert_eq!(r["known"], "guerin");
    let cuts = r["ppt"]["cuts"].as_array().unwrap();
    assert!(!cuts.is_empty());
    assert!(cuts.iter().all(|c| c["negative"] == false));
}

#[test]
fn probes_reproduce_the_controlled_flip() {
    let d = scratch("probe");
    let f = build(&d, "f.json", &["fig3"]);
    let zero = write_state(&d, "zero.json", QUBIT_1I, "[1,0],[0,0],[0,0],[0,0]");
    let one = write_state(&d, "one.json", QUBIT_1I, "[0,0],[0,0],[0,0],[1,0]");
    let fixed = write_state(
        &d,
        "fixed.json",
        r#"{"time": 2, "port": "output", "role": "system", "dim": 2}"#,
        "[1,0],[0,0],[0,0],[0,0]",
    );
    let args = [
        "classify",
        f.to_str().unwrap(),
        "--json",
        "--probe",
        zero.to_str().unwrap(),
        "--probe",
        one.to_str().unwrap(),
        "--fixed",
        fixed.to_str().unwrap(),
    ];
    let o = memzoo(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["probe"]["distance"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let o = memzoo(&args[..7]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["probe"]["distance"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn common_cause_bell_has_no_two_copy_extension() {
    let d = scratch("bell");
    let labels = r#"{"time": 2, "port": "input", "role": "system", "dim": 2}, {"time": 1, "port": "input", "role": "system", "dim": 2}"#;
    let m = "[0.5,0],[0,0],[0,0],[0.5,0], [0,0],[0,0],[0,0],[0,0], [0,0],[0,0],[0,0],[0,0], [0.5,0],[0,0],[0,0],[0.5,0]";
    let state = write_state(&d, "bell.json", labels, m);
    let f = build(&d, "cc.json", &["common-cause", state.to_str().unwrap()]);
    let o = memzoo(&["classify", f.to_str().unwrap(), "--json", "--extension", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["verdicts"]["SEP"], "fail");
    assert_eq!(v["report"]["verdicts"]["NS"], "pass");
    assert_eq!(v["extension"]["outcome"], "infeasible");
}

#[test]
fn corrupted_and_invalid_files_exit_two() {
    let d = scratch("corrupt");
    let f = build(&d, "f.json", &["fig3"]);
    let text = fs::read_to_string(&f).unwrap();
    let bad = d.join("bad.json");
    fs::write(&bad, text.replacen("], [", "], ]", 1)).unwrap();
    let o = memzoo(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse error at byte"));

    let mut scaled = load(&f);
    for z in &mut scaled.matrix {
        z[0] *= 2.0;
        z[1] *= 2.0;
    }
    fs::write(&bad, scaled.render()).unwrap();
    let o = memzoo(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("causality: fail"));

    let o = memzoo(&["classify", f.to_str().unwrap(), "--max-dim", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds the limit 16"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(memzoo(&["bogus"]).status.code(), Some(1));
    assert_eq!(memzoo(&["build", "random", "--class", "XX"]).status.code(), Some(1));
    assert_eq!(memzoo(&["classify", "/nonexistent/file.json"]).status.code(), Some(1));
    assert_eq!(memzoo(&["--help"]).status.code(), Some(0));
    assert_eq!(memzoo(&["--version"]).status.code(), Some(0));
}

#[test]
fn tolerance_comes_from_flag_or_environment() {
    let d = scratch("tolerance");
    let f = build(&d, "g.json", &["guerin"]);
    let read = |o: Output| -> f64 {
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["report"]["tolerances"]["causality"].as_f64().unwrap()
    };
    assert_eq!(read(memzoo(&["classify", f.to_str().unwrap(), "--json"])), 1e-9);
    assert_eq!(read(memzoo(&["classify", f.to_str().unwrap(), "--json", "--tolerance", "1e-6"])), 1e-6);
    let o = Command::new(env!("CARGO_BIN_EXE_memzoo"))
        .args(["classify", f.to_str().unwrap(), "--json"])
        .env("MEMZOO_TOLERANCE", "1e-7")
        .output()
        .unwrap();
    assert_eq!(read(o), 1e-7);
    let o = memzoo(&["classify", f.to_str().unwrap(), "--tolerance", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn roundtrip_keeps_canonical_files_and_reorders_others() {
    let d = scratch("roundtrip");
    let f = build(&d, "r.json", &["random", "--class", "QM", "--seed", "3"]);
    let out = d.join("out.json");
    let o = memzoo(&["roundtrip", f.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stderr(&o).trim(), "identical");
    assert_eq!(fs::read(&f).unwrap(), fs::read(&out).unwrap());

    let original = load(&f);
    let op = original.to_operator().unwrap();
    let mut order = op.labels().to_vec();
    order.reverse();
    order.swap(0, 2);
    let permuted = ProcessFile::from_operator(&op.permute(&order).unwrap(), original.metadata.clone());
    let shuffled = d.join("shuffled.json");
    fs::write(&shuffled, permuted.render()).unwrap();
    let o = memzoo(&["roundtrip", shuffled.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stderr(&o).trim(), "reordered");
    let back = ProcessFile::parse(&stdout(&o)).unwrap();
    assert_eq!(back.labels, original.labels);
    let a = hermitian_eigen(&back.to_operator().unwrap()).unwrap().values;
    let b = hermitian_eigen(&op).unwrap().values;
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    assert_eq!(back.render(), fs::read_to_string(&f).unwrap());
}

#[test]
fn truncated_file_reports_a_byte_offset() {
    let d = scratch("truncated");
    let f = build(&d, "g.json", &["guerin"]);
    let text = fs::read_to_string(&f).unwrap();
    let cut = d.join("cut.json");
    fs::write(&cut, &text[..text.len() * 2 / 3]).unwrap();
    let o = memzoo(&["roundtrip", cut.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    let offset: usize = msg
        .split("at byte ")
        .nth(1)
        .and_then(|s| s.split(':').next())
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no offset in {msg}"));
    assert!(offset > 0 && offset <= text.len() * 2 / 3);
}
