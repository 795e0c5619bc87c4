//! `jetlaw`: check conservation laws, multipliers and first integrals of PDE systems.
//!
//! Exit codes: 0 verified, 1 refuted or undecided, 2 usage, parse or runtime
//! error, 3 supported only by numeric probing.

mod corpus;
mod report;
mod steps;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jetlaw::expr::{parse_expr, Printer};
use jetlaw::problem::{parse_problem, ranking_from_spec, Problem};
use jetlaw::{Space, ZeroTest};

use report::{Outcome, Report, Step};
use steps::Job;

#[derive(Parser)]
#[command(name = "jetlaw", version, about = "Symbolic checks for conservation laws of PDE systems")]
struct Cli {
    /// Seed for numeric zero probes.
    #[arg(long, global = true, env = "JETLAW_SEED", default_value_t = 0)]
    seed: u64,
    /// Number of numeric probes.
    #[arg(long, global = true, env = "JETLAW_PROBES", default_value_t = 16)]
    probes: usize,
    /// Relative tolerance for numeric probes.
    #[arg(long, global = true, env = "JETLAW_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Jet order of the hodograph table (default 3).
    #[arg(long, global = true, env = "JETLAW_MAX_ORDER")]
    max_order: Option<u32>,
    /// Ranking, as `;`-separated `[ranking]` lines, e.g. `weight = 0, 1; order`.
    #[arg(long, global = true, env = "JETLAW_RANKING")]
    ranking: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the file in canonical form.
    Normalize { file: PathBuf },
    /// Total derivative of an expression.
    Dx {
        #[arg(long)]
        var: String,
        #[arg(long)]
        expr: String,
        /// Take variables from this file instead of x, y, t and u, v.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Euler operator of the Lagrangian, compared with the system if given.
    Euler { file: PathBuf },
    /// Normal form of an expression on solutions.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        expr: String,
    },
    /// Check that the divergence of the law vanishes on solutions.
    VerifyCl { file: PathBuf },
    /// Characteristic form of the law.
    CharForm { file: PathBuf },
    /// Check the multiplier.
    VerifyMultiplier { file: PathBuf },
    /// Determining equations of the multiplier.
    DetEqs { file: PathBuf },
    /// Check the λ-condition with the given λ.
    Bridge { file: PathBuf },
    /// Solve the λ-condition.
    SolveLambda { file: PathBuf },
    /// Build the law C_λ and compare it with the given law.
    Clambda { file: PathBuf },
    /// Equivalence of the laws in two files over the first file's system.
    Equiv { file: PathBuf, other: PathBuf },
    /// Check the syzygies listed in [checks].
    Syzygy { file: PathBuf },
    /// Read off and check a first integral.
    FirstIntegral { file: PathBuf },
    /// Check the symmetry characteristic.
    Symmetry { file: PathBuf },
    /// Check that the characteristic is a variational symmetry.
    Variational { file: PathBuf },
    /// Compare the variational and multiplier tests.
    Noether { file: PathBuf },
    /// Swap a dependent and an independent variable.
    Hodograph { file: PathBuf },
    /// Run every check in each file of a directory (default: the bundled corpus).
    Corpus { dir: Option<PathBuf> },
}

pub(crate) struct Opts {
    pub(crate) zt: ZeroTest,
    pub(crate) max_order: Option<u32>,
    pub(crate) ranking: Option<String>,
}

/// A problem ready to run, or the exit code of a failure to load it.
fn load(path: &Path, opts: &Opts) -> Result<(String, Problem), ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("jetlaw: {}: {e}", path.display());
        ExitCode::from(2)
    })?;
    let p = prepare(&text, opts).map_err(|m| {
        eprintln!("jetlaw: {}: {m}", path.display());
        ExitCode::from(2)
    })?;
    Ok((text, p))
}

pub(crate) fn prepare(text: &str, opts: &Opts) -> Result<Problem, String> {
    let mut p = parse_problem(text).map_err(|e| e.to_string())?;
    if let Some(r) = &opts.ranking {
        p.ranking = Some(ranking_from_spec(&p.space, r).map_err(|e| format!("--ranking: {e}"))?);
    }
    if let (Some(m), Some(h)) = (opts.max_order, p.hodograph.as_mut()) {
        h.order = m;
    }
    Ok(p)
}

fn finish(r: &Report) -> ExitCode {
    print!("{}", r.render());
    ExitCode::from(r.outcome().exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Opts {
        zt: ZeroTest { seed: cli.seed, probes: cli.probes, tol: cli.tol },
        max_order: cli.max_order,
        ranking: cli.ranking.clone(),
    };
    let (name, file) = match &cli.command {
        Command::Normalize { file } => ("normalize", file),
        Command::Dx { var, expr, file } => return dx(var, expr, file.as_deref(), &opts),
        Command::Euler { file } => ("euler", file),
        Command::Reduce { file, .. } => ("reduce", file),
        Command::VerifyCl { file } => ("verify-cl", file),
        Command::CharForm { file } => ("char-form", file),
        Command::VerifyMultiplier { file } => ("verify-multiplier", file),
        Command::DetEqs { file } => ("det-eqs", file),
        Command::Bridge { file } => ("bridge", file),
        Command::SolveLambda { file } => ("solve-lambda", file),
        Command::Clambda { file } => ("clambda", file),
        Command::Equiv { file, .. } => ("equiv", file),
        Command::Syzygy { file } => ("syzygy", file),
        Command::FirstIntegral { file } => ("first-integral", file),
        Command::Symmetry { file } => ("symmetry", file),
        Command::Variational { file } => ("variational", file),
        Command::Noether { file } => ("noether", file),
        Command::Hodograph { file } => ("hodograph", file),
        Command::Corpus { dir } => return corpus::run(dir.as_deref(), &opts),
    };
    let (text, p) = match load(file, &opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let mut report = Report::new(name, &file.display().to_string(), &text, opts.zt.seed);
    let mut job = Job { p: &p, zt: opts.zt, report: &mut report };
    match &cli.command {
        Command::Normalize { .. } => {
            let canon = p.print();
            print!("{canon}");
            let again = prepare(&canon, &opts).map(|q| q.print());
            let o = if again.as_deref() == Ok(canon.as_str()) { Outcome::Verified } else { Outcome::Refuted };
            job.report.push(Step::new("round-trip", o));
        }
        Command::Euler { .. } => job.euler(),
        Command::Reduce { expr, .. } => reduce(&mut job, expr),
        Command::VerifyCl { .. } => job.verify_cl(),
        Command::CharForm { .. } => job.char_form(),
        Command::VerifyMultiplier { .. } => job.verify_multiplier(),
        Command::DetEqs { .. } => job.det_eqs(),
        Command::Bridge { .. } => job.bridge(),
        Command::SolveLambda { .. } => {
            job.solve_lambda();
        }
        Command::Clambda { .. } => job.clambda(),
        Command::Equiv { other, .. } => {
            let (other_text, q) = match load(other, &opts) {
                Ok(x) => x,
                Err(code) => return code,
            };
            job.report.witness("other", report::digest(&other_text));
            equiv(&mut job, &q);
        }
        Command::Syzygy { .. } => job.syzygy(true),
        Command::FirstIntegral { .. } => job.first_integral(true),
        Command::Symmetry { .. } => job.symmetry(),
        Command::Variational { .. } => job.variational(),
        Command::Noether { .. } => job.noether(),
        Command::Hodograph { .. } => job.hodograph(),
        Command::Dx { .. } | Command::Corpus { .. } => unreachable!(),
    }
    finish(&report)
}

fn dx(var: &str, src: &str, file: Option<&Path>, opts: &Opts) -> ExitCode {
    let (text, space) = match file {
        Some(f) => match load(f, opts) {
            Ok((t, p)) => (t, p.space),
            Err(code) => return code,
        },
        None => (String::new(), Space::new(&["x", "y", "t"], &["u", "v"])),
    };
    let mut r = Report::new("dx", src, &format!("{text}\n{var}\n{src}"), opts.zt.seed);
    let Some(i) = space.indep_index(var) else {
        eprintln!("jetlaw: `{var}` is not an independent variable");
        return ExitCode::from(2);
    };
    let e = match parse_expr(src, &space, &HashMap::new()) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("jetlaw: {e}");
            return ExitCode::from(2);
        }
    };
    r.witness("expr", Printer::new(&space).print(&e.total_derivative(i)));
    r.push(Step::new("dx", Outcome::Verified));
    finish(&r)
}

fn reduce(job: &mut Job, src: &str) {
    let Some(sys) = job.system() else { return };
    let e = match parse_expr(src, &job.p.space, &HashMap::new()) {
        Ok(e) => e,
        Err(e) => return job.report.push(Step::new("reduce", Outcome::Error(e.to_string()))),
    };
    match sys.normal_form(&e) {
        Ok(nf) => {
            job.report.witness("expr", Printer::new(&job.p.space).print(&nf));
            job.report.push(Step::new("reduce", Outcome::Verified));
        }
        Err(e) => job.report.push(Step::new("reduce", Outcome::Error(e.to_string()))),
    }
}

fn equiv(job: &mut Job, other: &Problem) {
    let same = other.space.indep == job.p.space.indep && other.space.deps == job.p.space.deps && other.space.arbs == job.p.space.arbs;
    if !same {
        return job.report.push(Step::new("equiv", Outcome::Error("the files declare different variables".into())));
    }
    let (Some(sys), Some(cons)) = (job.system(), job.constraints()) else { return };
    let (Some(a), Some(b)) = (job.p.conservation_law(), other.conservation_law()) else {
        return job.report.push(Step::new("equiv", Outcome::Error("both files need a [claw] section".into())));
    };
    let syz: Vec<_> = job
        .p
        .checks
        .iter()
        .filter(|c| c.kind == jetlaw::problem::CheckKind::Syzygy)
        .filter_map(|c| jetlaw::claws::syzygy_ops(&c.exprs[0], sys.len(), sys.n()))
        .collect();
    let v = jetlaw::claws::equivalent(&sys, &a, &b, &cons, &syz, &job.zt);
    match v {
        Ok(v) => job.report.push(Step::verdict("equiv", v)),
        Err(e) => job.report.push(Step::new("equiv", Outcome::Error(e.to_string()))),
    }
}
