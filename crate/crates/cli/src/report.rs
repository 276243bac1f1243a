//! The `--report` file and `--stats` output.
//!
//! A report is a sequence of `key = value` lines followed by one block per model:
//!
//! ```text
//! verdict = COHERENT
//! complete = true
//! models = 1
//! wall_time_ms = 3
//! conflicts = 0
//! ...
//! dispatch.sm-lazy.checkStableModel = 2
//! begin model 1
//! b
//! csp x=2
//! end model
//! ```
//!
//! Atoms inside a block are sorted, one per line. Keys are unique and never contain spaces.

use std::fmt::Write;
use std::time::Duration;

use aspx_core::Statistics;

pub struct RunReport {
    pub verdict: &'static str,
    pub complete: bool,
    pub models: Vec<Vec<String>>,
    pub bindings: Vec<Option<String>>,
    pub statistics: Statistics,
    pub wall_time: Duration,
}

/// `key = value` lines for the statistics, dispatch counts included.
pub fn statistics_lines(s: &Statistics) -> String {
    let mut out = String::new();
    for (key, value) in [
        ("conflicts", s.conflicts),
        ("decisions", s.decisions),
        ("restarts", s.restarts),
        ("learned", s.learned),
        ("deleted", s.deleted),
        ("propagations", s.propagations),
        ("external_constraints", s.external_constraints),
        ("check_failures", s.check_failures),
    ] {
        writeln!(out, "{key} = {value}").unwrap();
    }
    for ext in &s.dispatch {
        for (method, count) in &ext.counts {
            writeln!(out, "dispatch.{}.{method} = {count}", ext.extension).unwrap();
        }
    }
    out
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "verdict = {}", self.verdict).unwrap();
        writeln!(out, "complete = {}", self.complete).unwrap();
        writeln!(out, "models = {}", self.models.len()).unwrap();
        writeln!(out, "wall_time_ms = {}", self.wall_time.as_millis()).unwrap();
        out.push_str(&statistics_lines(&self.statistics));
        for (i, model) in self.models.iter().enumerate() {
            writeln!(out, "begin model {}", i + 1).unwrap();
            for atom in model {
                writeln!(out, "{atom}").unwrap();
            }
            if let Some(Some(b)) = self.bindings.get(i) {
                writeln!(out, "csp {b}").unwrap();
            }
            out.push_str("end model\n");
        }
        out
    }
}
