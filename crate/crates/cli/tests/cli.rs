use std::path::PathBuf;
use std::process::Command;

use jetlaw::problem::parse_problem;

struct Run {
    code: Option<i32>,
    stdout: String,
    stderr: String,
}

fn jetlaw(args: &[&str]) -> Run {
    jetlaw_env(args, &[])
}

fn jetlaw_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jetlaw"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    Run {
        code: out.status.code(),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.clw"));
    p.to_str().unwrap().to_string()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("jetlaw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn field<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
}

#[test]
fn dx_prints_the_total_derivative() {
    let r = jetlaw(&["dx", "--var", "t", "--expr", "u_x^2"]);
    assert_eq!(r.code, Some(0));
    assert_eq!(field(&r.stdout, "witness.expr"), Some("2*u_x*u_xt"));
    let r = jetlaw(&["dx", "--var", "z", "--expr", "u"]);
    assert_eq!(r.code, Some(2));
}

#[test]
fn verify_cl_reports_verified() {
    let r = jetlaw(&["verify-cl", &corpus("liouville_system")]);
    assert_eq!(r.code, Some(0), "{}", r.stdout);
    assert_eq!(field(&r.stdout, "result"), Some("verified"));
    assert_eq!(field(&r.stdout, "command"), Some("verify-cl"));
    assert_eq!(field(&r.stdout, "seed"), Some("0"));
    assert_eq!(field(&r.stdout, "digest").map(str::len), Some(16));
}

#[test]
fn every_subcommand_runs_on_a_corpus_file() {
    let cases: &[(&[&str], &str)] = &[
        (&["euler"], "pseudoparabolic_w"),
        (&["char-form"], "liouville_system"),
        (&["verify-multiplier"], "curvature_kx0"),
        (&["det-eqs"], "curvature_kx0"),
        (&["bridge"], "potential_flow"),
        (&["solve-lambda"], "kp"),
        (&["clambda"], "kp"),
        (&["syzygy"], "potential_flow"),
        (&["first-integral"], "pseudoparabolic_m1"),
        (&["symmetry"], "potential_form"),
        (&["variational"], "pseudoparabolic_w_gt"),
        (&["noether"], "liouville_hierarchy_k1"),
        (&["hodograph"], "mean_curvature"),
        (&["reduce", "--expr", "D_t(u_xx)"], "liouville_system"),
    ];
    for (args, file) in cases {
        let path = corpus(file);
        let mut all: Vec<&str> = args.to_vec();
        all.insert(1, &path);
        let r = jetlaw(&all);
        assert_eq!(r.code, Some(0), "{args:?} {file}\n{}{}", r.stdout, r.stderr);
    }
    let r = jetlaw(&["equiv", &corpus("kp"), &corpus("kp")]);
    assert_eq!(r.code, Some(0));
    let r = jetlaw(&["equiv", &corpus("kp"), &corpus("liouville_system")]);
    assert_eq!(r.code, Some(2));
}

#[test]
fn witnesses_are_canonical_expressions() {
    let r = jetlaw(&["reduce", &corpus("liouville_system"), "--expr", "D_t(u_xx)"]);
    assert_eq!(field(&r.stdout, "witness.expr"), Some("2*u_x*exp(2*u - v) - v_x*exp(2*u - v)"));
    let r = jetlaw(&["first-integral", &corpus("pseudoparabolic_m1")]);
    assert_eq!(field(&r.stdout, "witness.direction"), Some("t"));
}

#[test]
fn corrupted_lambda_is_refuted() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let file = data.join("liouville_corrupted.clw");
    let r = jetlaw(&["bridge", file.to_str().unwrap()]);
    assert_eq!(r.code, Some(1));
    assert_eq!(field(&r.stdout, "step.bridge"), Some("refuted"));
    let r = jetlaw(&["corpus", data.to_str().unwrap()]);
    assert_eq!(r.code, Some(1));
    assert_eq!(field(&r.stdout, "step.liouville_corrupted"), Some("refuted"));
}

#[test]
fn corpus_passes_and_is_deterministic() {
    let a = jetlaw(&["corpus"]);
    assert_eq!(a.code, Some(0), "{}", a.stdout);
    let b = jetlaw(&["corpus"]);
    assert_eq!(a.stdout, b.stdout);
    let c = jetlaw(&["corpus", PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").to_str().unwrap()]);
    assert_eq!(c.code, Some(0));
    let names: Vec<&str> = a.stdout.lines().filter_map(|l| l.strip_prefix("input: ")).collect();
    assert!(names.len() >= 19 && names.last() == Some(&"bundled"));
}

#[test]
fn corpus_files_round_trip_after_one_print() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let once = parse_problem(&text).unwrap().print();
        let twice = parse_problem(&once).unwrap().print();
        assert_eq!(once, twice, "{}", path.display());
        let r = jetlaw(&["normalize", path.to_str().unwrap()]);
        assert_eq!(r.code, Some(0));
        assert!(r.stdout.starts_with(&once));
    }
}

#[test]
fn parse_errors_exit_two_with_a_location() {
    let empty = scratch("empty.clw", "");
    let r = jetlaw(&["verify-cl", &empty]);
    assert_eq!(r.code, Some(2));
    assert!(r.stderr.contains("missing [vars]"));
    let bad = scratch("bad.clw", "[vars]\nindep = x\ndep = u\n\n[system]\nu_x = w + 1\n");
    let r = jetlaw(&["verify-cl", &bad]);
    assert_eq!(r.code, Some(2));
    assert!(r.stderr.contains("line 6, column 7: undeclared symbol `w`"), "{}", r.stderr);
    let r = jetlaw(&["frobnicate"]);
    assert_eq!(r.code, Some(2));
}

#[test]
fn numeric_only_support_exits_three() {
    let f = scratch("numeric.clw", "[vars]\nindep = x\ndep = u\n\n[system]\nu_x = u\n\n[checks]\nidentity pyth = sin(u)^2 + cos(u)^2 - 1\n");
    let dir = PathBuf::from(&f).parent().unwrap().to_path_buf();
    let only = dir.join("numeric_only");
    std::fs::create_dir_all(&only).unwrap();
    std::fs::copy(&f, only.join("numeric.clw")).unwrap();
    let r = jetlaw(&["corpus", only.to_str().unwrap()]);
    assert_eq!(r.code, Some(3), "{}", r.stdout);
    assert_eq!(field(&r.stdout, "result"), Some("numeric-only"));
}

#[test]
fn flags_and_environment() {
    let r = jetlaw_env(&["verify-cl", &corpus("kp")], &[("JETLAW_SEED", "5")]);
    assert_eq!(field(&r.stdout, "seed"), Some("5"));
    let r = jetlaw(&["--seed", "7", "verify-cl", &corpus("kp")]);
    assert_eq!(field(&r.stdout, "seed"), Some("7"));
    let r = jetlaw(&["--ranking", "weight = 0, 0, 1; fields = u, v; order; lex = t, y, x", "verify-cl", &corpus("kp")]);
    assert_eq!(r.code, Some(0));
    let r = jetlaw(&["--ranking", "lex = q", "verify-cl", &corpus("kp")]);
    assert_eq!(r.code, Some(2));
    let r = jetlaw(&["--max-order", "9", "hodograph", &corpus("mean_curvature")]);
    assert_eq!(r.code, Some(2));
    assert!(r.stdout.contains("exceeds the cap"));
}
