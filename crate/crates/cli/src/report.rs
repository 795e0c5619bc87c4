//! Verdict reports: a readable summary and a fenced `key: value` block.

use std::fmt::Write;

use jetlaw::Verdict;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Verified,
    Refuted,
    NumericOnly,
    /// The zero test could not decide.
    Undecided,
    Error(String),
    /// Not applicable to this input; ignored when aggregating.
    Skipped(String),
}

impl Outcome {
    pub fn from_verdict(v: Verdict) -> Outcome {
        match v {
            Verdict::ProvedZero => Outcome::Verified,
            Verdict::ProvedNonzero => Outcome::Refuted,
            Verdict::ProbablyZero => Outcome::NumericOnly,
            Verdict::Unknown => Outcome::Undecided,
        }
    }

    /// For claims of the form "this is not zero".
    pub fn from_nonzero(v: Verdict) -> Outcome {
        match v {
            Verdict::ProvedNonzero => Outcome::Verified,
            Verdict::ProvedZero | Verdict::ProbablyZero => Outcome::Refuted,
            Verdict::Unknown => Outcome::Undecided,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Verified => "verified",
            Outcome::Refuted => "refuted",
            Outcome::NumericOnly => "numeric-only",
            Outcome::Undecided => "undecided",
            Outcome::Error(_) => "error",
            Outcome::Skipped(_) => "skipped",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Outcome::Skipped(_) | Outcome::Verified => 0,
            Outcome::NumericOnly => 1,
            Outcome::Error(_) => 2,
            Outcome::Refuted | Outcome::Undecided => 3,
        }
    }
}

pub fn combine<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> Outcome {
    outcomes.into_iter().max_by_key(|o| o.rank()).cloned().unwrap_or(Outcome::Verified).normalized()
}

impl Outcome {
    fn normalized(self) -> Outcome {
        match self {
            Outcome::Skipped(_) => Outcome::Verified,
            o => o,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Verified | Outcome::Skipped(_) => 0,
            Outcome::Refuted | Outcome::Undecided => 1,
            Outcome::Error(_) => 2,
            Outcome::NumericOnly => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub name: String,
    pub outcome: Outcome,
    pub verdict: Option<Verdict>,
}

impl Step {
    pub fn new(name: impl Into<String>, outcome: Outcome) -> Step {
        Step { name: name.into(), outcome, verdict: None }
    }

    pub fn verdict(name: impl Into<String>, v: Verdict) -> Step {
        Step { name: name.into(), outcome: Outcome::from_verdict(v), verdict: Some(v) }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub digest: String,
    pub seed: u64,
    pub steps: Vec<Step>,
    pub witnesses: Vec<(String, String)>,
}

pub fn digest(text: &str) -> String {
    let h = Sha256::digest(text.as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(command: &str, input: &str, text: &str, seed: u64) -> Report {
        Report { command: command.into(), input: input.into(), digest: digest(text), seed, ..Report::default() }
    }

    pub fn push(&mut self, s: Step) {
        self.steps.push(s);
    }

    pub fn witness(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.witnesses.push((key.into(), value.into()));
    }

    pub fn outcome(&self) -> Outcome {
        combine(self.steps.iter().map(|s| &s.outcome))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.command, self.input).unwrap();
        for s in &self.steps {
            let mut line = format!("  {:<28} {}", s.name, s.outcome.label());
            match (&s.outcome, s.verdict) {
                (Outcome::Error(m) | Outcome::Skipped(m), _) => write!(line, " ({m})").unwrap(),
                (_, Some(v)) => write!(line, " ({})", v.name()).unwrap(),
                _ => {}
            }
            writeln!(out, "{line}").unwrap();
        }
        for (k, v) in &self.witnesses {
            writeln!(out, "  {k} = {v}").unwrap();
        }
        writeln!(out, "```").unwrap();
        writeln!(out, "command: {}", self.command).unwrap();
        writeln!(out, "input: {}", self.input).unwrap();
        writeln!(out, "digest: {}", self.digest).unwrap();
        writeln!(out, "result: {}", self.outcome().label()).unwrap();
        writeln!(out, "seed: {}", self.seed).unwrap();
        for s in &self.steps {
            writeln!(out, "step.{}: {}", s.name, s.outcome.label()).unwrap();
        }
        for (k, v) in &self.witnesses {
            writeln!(out, "witness.{k}: {v}").unwrap();
        }
        writeln!(out, "```").unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_outcome_wins() {
        let v = Outcome::Verified;
        let skip = Outcome::Skipped("n/a".into());
        assert_eq!(combine([&v, &skip]), Outcome::Verified);
        assert_eq!(combine([&v, &Outcome::NumericOnly]).exit_code(), 3);
        assert_eq!(combine([&Outcome::NumericOnly, &Outcome::Error("x".into())]).exit_code(), 2);
        assert_eq!(combine([&Outcome::Error("x".into()), &Outcome::Refuted]).exit_code(), 1);
        assert_eq!(combine([&Outcome::Undecided, &v]).exit_code(), 1);
        assert_eq!(combine(std::iter::empty()).exit_code(), 0);
    }

    #[test]
    fn nonzero_claims() {
        assert_eq!(Outcome::from_nonzero(Verdict::ProvedNonzero), Outcome::Verified);
        assert_eq!(Outcome::from_nonzero(Verdict::ProbablyZero), Outcome::Refuted);
    }

    #[test]
    fn block_is_key_value_lines() {
        let mut r = Report::new("verify-cl", "a.clw", "text", 4);
        r.push(Step::verdict("verify-cl", Verdict::ProvedZero));
        r.witness("flux", "u_x");
        let out = r.render();
        let block: Vec<&str> = out.split("```\n").nth(1).unwrap().lines().collect();
        assert_eq!(
            block,
            [
                "command: verify-cl",
                "input: a.clw",
                &format!("digest: {}", digest("text")),
                "result: verified",
                "seed: 4",
                "step.verify-cl: verified",
                "witness.flux: u_x",
            ]
        );
    }
}
