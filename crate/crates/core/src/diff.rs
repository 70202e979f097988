//! Differential soundness check: seeded concrete runs against an analysis.

use std::collections::BTreeMap;
use std::fmt;

use crate::abi::Abi;
use crate::alarm::AlarmKind;
use crate::analyzer::Analysis;
use crate::cells::Dom;
use crate::concrete::{gamma_member, phi, run_with, AbstractView, ExecConfig, Memory, Outcome};
use crate::ir::Cfg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A visited memory outside the abstract state of its point.
    Inclusion { point: usize, step: usize, detail: String },
    /// A concrete error without an alarm of that kind at that point.
    Uncovered { point: usize, edge: usize, kind: AlarmKind },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub seed: u64,
    pub violation: Violation,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            Violation::Inclusion { point, step, detail } => {
                write!(f, "seed {}: state at point {} (step {}) not included: {}", self.seed, point, step, detail)
            }
            Violation::Uncovered { point, edge, kind } => {
                write!(f, "seed {}: uncovered {} at point {} (edge {})", self.seed, kind, point, edge)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffSummary {
    pub runs: usize,
    pub visits: usize,
    pub errors: usize,
    pub failures: Vec<Failure>,
}

/// The first cell or static range of `s` that `m` violates.
pub fn explain(s: &dyn AbstractView, m: &Memory, abi: &Abi, cfg: &Cfg) -> String {
    if s.is_bottom() {
        return "point unreachable in the analysis".into();
    }
    for (v, off, ty) in s.cells() {
        let name = &cfg.var(v).name;
        if !m.is_live(v) {
            return format!("cell ({}, {}, {}) of a dead variable", name, off, ty.name());
        }
        let size = abi.size(ty);
        let values = phi(ty, m.read(v, off, size), abi);
        if !s.admits((v, off, ty), &values, abi) {
            return format!("cell ({}, {}, {}) holds {:?}", name, off, ty.name(), values);
        }
    }
    for (v, _) in m.live() {
        for (lo, hi) in s.pristine(v) {
            if m.read(v, lo, hi - lo).iter().any(|b| *b != crate::concrete::Byte::ZERO) {
                return format!("bytes [{}, {}) of {} are not zero", lo, hi, cfg.var(v).name);
            }
        }
    }
    "unknown".into()
}

/// Runs `seeds` executions and checks each against `analysis`.
pub fn diff(
    cfg: &Cfg,
    abi: &Abi,
    dom: &Dom,
    analysis: &Analysis,
    seeds: std::ops::Range<u64>,
    max_steps: usize,
) -> DiffSummary {
    let inputs: BTreeMap<String, (i128, i128)> =
        dom.inputs.iter().map(|(v, r)| (cfg.var(*v).name.clone(), *r)).collect();
    let mut sum = DiffSummary::default();
    for seed in seeds {
        let conf = ExecConfig { seed, max_steps, inputs: inputs.clone() };
        let mut step = 0;
        let mut first: Option<Violation> = None;
        let trace = run_with(cfg, abi, &conf, &mut |point, m| {
            sum.visits += 1;
            if first.is_none() {
                let ok = match &analysis.states[point] {
                    Some(s) => gamma_member(&s.mem.view(dom), m, abi),
                    None => false,
                };
                if !ok {
                    let detail = match &analysis.states[point] {
                        Some(s) => explain(&s.mem.view(dom), m, abi, cfg),
                        None => "point unreachable in the analysis".into(),
                    };
                    first = Some(Violation::Inclusion { point, step, detail });
                }
            }
            step += 1;
        });
        sum.runs += 1;
        if let Some(v) = first {
            sum.failures.push(Failure { seed, violation: v });
        }
        if let Outcome::Error { kind, point, edge } = trace.outcome {
            sum.errors += 1;
            let covered = kind == AlarmKind::UninitRead || analysis.has_alarm(point, kind);
            if !covered {
                sum.failures.push(Failure { seed, violation: Violation::Uncovered { point, edge, kind } });
            }
        }
    }
    sum
}
