//! Run every check of each `.clw` file, in name order.

use std::path::Path;
use std::process::ExitCode;

use crate::report::{combine, digest, Outcome, Report, Step};
use crate::steps::Job;
use crate::{prepare, Opts};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".clw")))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = bundled![
    "curvature",
    "curvature_hodograph",
    "curvature_kx0",
    "kp",
    "liouville_hierarchy_k0",
    "liouville_hierarchy_k1",
    "liouville_second",
    "liouville_system",
    "mean_curvature",
    "mean_curvature_reduced",
    "potential_flow",
    "potential_flow_c1",
    "potential_flow_c2",
    "potential_form",
    "pseudoparabolic",
    "pseudoparabolic_exp",
    "pseudoparabolic_m1",
    "pseudoparabolic_w",
    "pseudoparabolic_w_gt",
];

fn read_dir(dir: &Path) -> std::io::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "clw") {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            out.push((name, std::fs::read_to_string(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

/// The full check plan for one file.
pub fn check_file(name: &str, text: &str, opts: &Opts) -> Report {
    let mut r = Report::new("check", name, text, opts.zt.seed);
    let p = match prepare(text, opts) {
        Ok(p) => p,
        Err(m) => {
            r.push(Step::new("parse", Outcome::Error(m)));
            return r;
        }
    };
    let canon = p.print();
    let again = prepare(&canon, opts).map(|q| q.print());
    let rt = if again.as_deref() == Ok(canon.as_str()) { Outcome::Verified } else { Outcome::Refuted };
    r.push(Step::new("round-trip", rt));
    Job { p: &p, zt: opts.zt, report: &mut r }.all();
    r
}

pub fn run(dir: Option<&Path>, opts: &Opts) -> ExitCode {
    let files: Vec<(String, String)> = match dir {
        Some(d) => match read_dir(d) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("jetlaw: {}: {e}", d.display());
                return ExitCode::from(2);
            }
        },
        None => BUNDLED.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect(),
    };
    let input = dir.map_or_else(|| "bundled".to_string(), |d| d.display().to_string());
    let all_text: String = files.iter().map(|(_, t)| t.as_str()).collect();
    let mut summary = Report::new("corpus", &input, &all_text, opts.zt.seed);
    for (name, text) in &files {
        let r = check_file(name, text, opts);
        print!("{}", r.render());
        println!();
        summary.push(Step::new(name.clone(), r.outcome()));
        summary.witness(format!("{name}.digest"), digest(text));
    }
    if files.is_empty() {
        summary.push(Step::new("corpus", Outcome::Error("no .clw files".into())));
    }
    print!("{}", summary.render());
    ExitCode::from(combine(summary.steps.iter().map(|s| &s.outcome)).exit_code() as u8)
}
