//! Alarm reports: the JSON form consumed by tools, a human listing with
//! source excerpts, and the compact text used by corpus expectations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::abi::Abi;
use crate::alarm::AlarmKind;
use crate::analyzer::Analysis;

pub const SCHEMA_VERSION: &str = "cellscope-report/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlarmEntry {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub point: usize,
    pub kind: String,
    pub expr: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlarmReport {
    pub schema: String,
    pub tool_version: String,
    pub abi: String,
    pub complete: bool,
    pub alarms: Vec<AlarmEntry>,
    pub counts: BTreeMap<String, usize>,
    /// Only filled on request, so that repeated runs compare equal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

pub fn message(k: AlarmKind) -> &'static str {
    match k {
        AlarmKind::Overflow => "arithmetic result may not fit its type",
        AlarmKind::DivByZero => "divisor may be zero",
        AlarmKind::OutOfBound => "access may fall outside its variable",
        AlarmKind::Misaligned => "access may be misaligned",
        AlarmKind::InvalidPointer => "pointer may be dangling or invalid",
        AlarmKind::NullDeref => "pointer may be null",
        AlarmKind::CrossBaseArith => "pointer operation mixes distinct variables",
        AlarmKind::UninitRead => "value may be uninitialized",
    }
}

impl AlarmReport {
    pub fn new(file: &str, abi: &Abi, a: &Analysis) -> AlarmReport {
        let mut alarms: Vec<AlarmEntry> = a
            .alarms
            .iter()
            .map(|x| AlarmEntry {
                file: file.to_string(),
                line: x.loc.line,
                column: x.loc.col,
                point: x.point,
                kind: x.kind.name().to_string(),
                expr: x.expr.clone(),
                message: message(x.kind).to_string(),
            })
            .collect();
        alarms.sort_by(|x, y| {
            (&x.file, x.line, &x.kind, x.column, x.point, &x.expr).cmp(&(&y.file, y.line, &y.kind, y.column, y.point, &y.expr))
        });
        let mut counts: BTreeMap<String, usize> = AlarmKind::ALL.iter().map(|k| (k.name().to_string(), 0)).collect();
        for x in &alarms {
            *counts.get_mut(&x.kind).unwrap() += 1;
        }
        AlarmReport {
            schema: SCHEMA_VERSION.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            abi: abi.to_string(),
            complete: a.complete,
            alarms,
            counts,
            wall_time_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Alarms grouped by file and line, each with its source line.
    pub fn render(&self, sources: &BTreeMap<String, String>) -> String {
        let mut out = String::new();
        let mut last: Option<(&str, u32)> = None;
        for x in &self.alarms {
            let _ = writeln!(out, "{}:{}:{}: {}: {} in `{}`", x.file, x.line, x.column, x.kind, x.message, x.expr);
            if last != Some((x.file.as_str(), x.line)) {
                if let Some(text) = sources.get(&x.file).and_then(|s| s.lines().nth(x.line.saturating_sub(1) as usize)) {
                    let _ = writeln!(out, "  {:>4} | {}", x.line, text.trim_end());
                }
            }
            last = Some((x.file.as_str(), x.line));
        }
        let _ = writeln!(out, "{} alarm(s)", self.alarms.len());
        out
    }

    /// One line per alarm without file names or point ids, stable under
    /// unrelated edits to the lowering.
    pub fn expectation(&self) -> String {
        let mut out = String::new();
        for x in &self.alarms {
            let _ = writeln!(out, "{}:{} {} {}", x.line, x.column, x.kind, x.expr);
        }
        let _ = writeln!(out, "total {}", self.alarms.len());
        out
    }
}
