use std::collections::BTreeMap;
use std::fmt::Write;

use crate::abi::Abi;
use crate::alarm::AlarmKind;
use crate::ir::{Cfg, VarId};

use super::eval::{exec_inst, Chooser, Ctx, RngChooser};
use super::{Byte, Memory};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecConfig {
    pub seed: u64,
    pub max_steps: usize,
    /// Input ranges of volatile variables, by variable name.
    pub inputs: BTreeMap<String, (i128, i128)>,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig { seed: 0, max_steps: 10_000, inputs: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Reached a point without outgoing edges.
    Finished,
    /// A run-time error on the edge `edge` leaving `point`.
    Error { kind: AlarmKind, point: usize, edge: usize },
    StepLimit,
    /// Every guard leaving `point` failed.
    Blocked(usize),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Finished | Outcome::Blocked(_) => 0,
            Outcome::Error { .. } => 3,
            Outcome::StepLimit => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub point: usize,
    pub edge: usize,
    pub draws: Vec<String>,
    pub writes: Vec<(VarId, u64, Byte)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub outcome: Outcome,
    pub last_point: usize,
    pub memory: Memory,
}

impl Trace {
    pub fn render(&self, cfg: &Cfg) -> String {
        let mut out = String::new();
        for s in &self.steps {
            writeln!(out, "point={} inst={}", s.point, cfg.fmt_inst(&cfg.edges[s.edge].inst)).unwrap();
            for d in &s.draws {
                writeln!(out, "  draw={}", d).unwrap();
            }
            for (v, i, b) in &s.writes {
                writeln!(out, "  {}[{}]={}", cfg.var(*v).name, i, b.show(cfg)).unwrap();
            }
        }
        match &self.outcome {
            Outcome::Finished => writeln!(out, "end point={}", self.last_point),
            Outcome::Blocked(p) => writeln!(out, "blocked point={}", p),
            Outcome::Error { kind, point, edge } => writeln!(out, "error {} point={} edge={}", kind, point, edge),
            Outcome::StepLimit => writeln!(out, "step-limit point={}", self.last_point),
        }
        .unwrap();
        out
    }
}

/// Maps volatile variable names to their ids.
pub fn resolve_inputs(cfg: &Cfg, inputs: &BTreeMap<String, (i128, i128)>) -> BTreeMap<VarId, (i128, i128)> {
    inputs.iter().filter_map(|(n, r)| cfg.var_by_name(n).map(|v| (v, *r))).collect()
}

pub fn run(cfg: &Cfg, abi: &Abi, conf: &ExecConfig) -> Trace {
    run_with(cfg, abi, conf, &mut |_, _| {})
}

/// Runs the program, calling `visit` with every reached point and the
/// memory there.
pub fn run_with(cfg: &Cfg, abi: &Abi, conf: &ExecConfig, visit: &mut dyn FnMut(usize, &Memory)) -> Trace {
    let inputs = resolve_inputs(cfg, &conf.inputs);
    let mut chooser = RngChooser::new(conf.seed);
    let succ = cfg.successors();
    let mut point = cfg.entry;
    let mut mem = Memory::initial(cfg);
    let mut steps = Vec::new();
    visit(point, &mem);
    let outcome = loop {
        if succ[point].is_empty() {
            break Outcome::Finished;
        }
        if steps.len() >= conf.max_steps {
            break Outcome::StepLimit;
        }
        let mut order = succ[point].clone();
        for i in (1..order.len()).rev() {
            let j = chooser.below(i as u64 + 1) as usize;
            order.swap(i, j);
        }
        let mut taken = None;
        let mut error = None;
        for ei in order {
            let edge = &cfg.edges[ei];
            let (created, deleted) = cfg.scope_change(edge);
            let mut m = mem.clone();
            for v in &created {
                let info = cfg.var(*v);
                m.create(*v, info.size, info.is_static);
            }
            let mut ctx = Ctx { cfg, abi, inputs: &inputs, chooser: &mut chooser as &mut dyn Chooser, draws: Vec::new() };
            match exec_inst(&mut ctx, &edge.inst, &m) {
                Err(kind) => {
                    error = Some(Outcome::Error { kind, point, edge: ei });
                    break;
                }
                Ok(None) => continue,
                Ok(Some(mut next)) => {
                    let draws = ctx.draws;
                    for v in &deleted {
                        next.delete(*v);
                    }
                    steps.push(Step { point, edge: ei, draws, writes: next.diff(&mem) });
                    taken = Some((edge.dst, next));
                    break;
                }
            }
        }
        if let Some(e) = error {
            break e;
        }
        match taken {
            Some((dst, next)) => {
                point = dst;
                mem = next;
                visit(point, &mem);
            }
            None => break Outcome::Blocked(point),
        }
    };
    Trace { steps, outcome, last_point: point, memory: mem }
}
