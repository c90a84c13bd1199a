//! Reporting for the acceptance run: one line per criterion, non-zero exit if any fails.

use std::fmt;
use std::process::ExitCode;
use std::time::Instant;

/// Result of checking one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    /// Passes only if every part passes; details are joined with `; `.
    pub fn all(parts: Vec<Outcome>) -> Self {
        Self {
            pass: parts.iter().all(|p| p.pass),
            detail: parts
                .iter()
                .map(|p| p.detail.as_str())
                .collect::<Vec<_>>()
                .join("; "),
        }
    }
}

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub check: fn() -> Result<Outcome, String>,
}

struct Line<'a> {
    id: u32,
    title: &'a str,
    outcome: &'a Outcome,
    seconds: f64,
}

impl fmt::Display for Line<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {} ({}) [{:.1}s]: {}",
            if self.outcome.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.outcome.detail
        )
    }
}

/// Runs every criterion in order, printing one line each and a summary.
pub fn run(criteria: &[Criterion]) -> ExitCode {
    let mut failed = Vec::new();
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.check)().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let line = Line {
            id: c.id,
            title: c.title,
            outcome: &outcome,
            seconds: start.elapsed().as_secs_f64(),
        };
        println!("{line}");
        if !outcome.pass {
            failed.push(c.id);
        }
    }
    println!(
        "acceptance: {} of {} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(", failed: {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_requires_every_part() {
        let o = Outcome::all(vec![Outcome::new(true, "a"), Outcome::new(false, "b")]);
        assert!(!o.pass);
        assert_eq!(o.detail, "a; b");
        assert!(Outcome::all(vec![Outcome::new(true, "a")]).pass);
    }
}
