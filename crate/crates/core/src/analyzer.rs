//! Worklist fixpoint over the inlined control-flow graph, with delayed
//! widening at loop heads, one decreasing pass and alarm collection.

use std::collections::{BTreeMap, BTreeSet};

use crate::abi::Abi;
use crate::alarm::{AlarmKind, AlarmSet};
use crate::cells::{Dom, MemState};
use crate::equality::EqState;
use crate::ir::{Cfg, Edge, Inst, Loc, VarId};
use crate::numeric::{OverflowPolicy, THRESHOLDS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Plain joins at a loop head before widening starts.
    pub widen_delay: u32,
    pub thresholds: Vec<i128>,
    /// Maximal number of cells a dereference may resolve to.
    pub fanout: usize,
    pub inputs: BTreeMap<VarId, (i128, i128)>,
    pub max_iterations: usize,
    pub policy: OverflowPolicy,
    pub narrow: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            widen_delay: 2,
            thresholds: THRESHOLDS.to_vec(),
            fanout: 64,
            inputs: BTreeMap::new(),
            max_iterations: 200_000,
            policy: OverflowPolicy::Wrap,
            narrow: true,
        }
    }
}

/// Product of the cell memory and the equality predicates.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub mem: MemState,
    pub eq: EqState,
}

impl State {
    pub fn initial() -> State {
        State { mem: MemState::initial(), eq: EqState::new() }
    }

    pub fn join(&self, o: &State, dom: &Dom) -> State {
        State { mem: self.mem.join(&o.mem, dom), eq: self.eq.lub(&o.eq) }
    }

    pub fn widen(&self, o: &State, dom: &Dom, thresholds: &[i128]) -> State {
        State { mem: self.mem.widen(&o.mem, dom, thresholds), eq: self.eq.lub(&o.eq) }
    }

    pub fn leq(&self, o: &State, dom: &Dom) -> bool {
        self.mem.leq(&o.mem, dom) && self.eq.leq(&o.eq)
    }

    pub fn dump(&self, cfg: &Cfg) -> String {
        let mut s = self.mem.dump(cfg);
        s.push_str(&self.eq.dump(cfg));
        s
    }
}

/// Abstract effect of following `e` from `s`; `None` when unreachable.
pub fn transfer(dom: &Dom, s: &State, e: &Edge) -> (Option<State>, AlarmSet) {
    let mut st = s.clone();
    let (created, deleted) = dom.cfg.scope_change(e);
    for v in created {
        st.mem.create_var(v);
        st.eq.forget_var(v);
    }
    let State { mem, eq } = &mut st;
    let alarms = match &e.inst {
        Inst::Assign { ty, addr, value } => {
            let fx = mem.assign(dom, eq, *ty, addr, value);
            eq.assign(&fx.written);
            fx.alarms
        }
        Inst::Copy { ty, dst, src } => {
            let fx = mem.copy(dom, eq, *ty, dst, src);
            match &fx.window {
                Some(w) => {
                    eq.copy(w);
                    eq.reduce(mem, dom, w.src);
                }
                None => eq.assign(&fx.written),
            }
            fx.alarms
        }
        Inst::Guard(c) => mem.guard(dom, eq, c).alarms,
    };
    for v in deleted {
        st.mem.delete_var(v);
        st.eq.forget_var(v);
    }
    if st.mem.is_bot() {
        (None, alarms)
    } else {
        (Some(st), alarms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Alarm {
    pub loc: Loc,
    pub kind: AlarmKind,
    pub point: usize,
    pub edge: usize,
    pub expr: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub iterations: usize,
    pub widenings: usize,
    pub narrowed: bool,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub states: Vec<Option<State>>,
    pub alarms: Vec<Alarm>,
    pub stats: Stats,
    /// False when the iteration cap was hit.
    pub complete: bool,
    /// First edge violating the post-fixpoint check.
    pub violation: Option<usize>,
}

impl Analysis {
    pub fn alarm_count(&self, k: AlarmKind) -> usize {
        self.alarms.iter().filter(|a| a.kind == k).count()
    }

    pub fn has_alarm(&self, point: usize, k: AlarmKind) -> bool {
        self.alarms.iter().any(|a| a.point == point && a.kind == k)
    }
}

/// Targets of back edges in a depth-first traversal from the entry.
pub fn loop_heads(cfg: &Cfg) -> BTreeSet<usize> {
    let succ = cfg.successors();
    let n = cfg.points.len();
    let mut state = vec![0u8; n];
    let mut heads = BTreeSet::new();
    let mut stack = vec![(cfg.entry, 0usize)];
    state[cfg.entry] = 1;
    while let Some(&mut (p, ref mut i)) = stack.last_mut() {
        if *i < succ[p].len() {
            let q = cfg.edges[succ[p][*i]].dst;
            *i += 1;
            match state[q] {
                0 => {
                    state[q] = 1;
                    stack.push((q, 0));
                }
                1 => {
                    heads.insert(q);
                }
                _ => {}
            }
        } else {
            state[p] = 2;
            stack.pop();
        }
    }
    heads
}

/// Reverse postorder rank of every point.
fn rpo_rank(cfg: &Cfg) -> Vec<usize> {
    let succ = cfg.successors();
    let n = cfg.points.len();
    let mut seen = vec![false; n];
    let mut post = Vec::with_capacity(n);
    let mut stack = vec![(cfg.entry, 0usize)];
    seen[cfg.entry] = true;
    while let Some(&mut (p, ref mut i)) = stack.last_mut() {
        if *i < succ[p].len() {
            let q = cfg.edges[succ[p][*i]].dst;
            *i += 1;
            if !seen[q] {
                seen[q] = true;
                stack.push((q, 0));
            }
        } else {
            post.push(p);
            stack.pop();
        }
    }
    let mut rank = vec![usize::MAX; n];
    for (r, p) in post.iter().rev().enumerate() {
        rank[*p] = r;
    }
    rank
}

pub struct Analyzer<'a> {
    pub cfg: &'a Cfg,
    pub abi: &'a Abi,
    pub config: &'a Config,
}

impl<'a> Analyzer<'a> {
    pub fn dom(&self) -> Dom<'a> {
        Dom { cfg: self.cfg, abi: self.abi, policy: self.config.policy, fanout: self.config.fanout, inputs: &self.config.inputs }
    }

    pub fn run(&self) -> Analysis {
        let dom = self.dom();
        let cfg = self.cfg;
        let n = cfg.points.len();
        let succ = cfg.successors();
        let heads = loop_heads(cfg);
        let rank = rpo_rank(cfg);
        let mut states: Vec<Option<State>> = vec![None; n];
        let mut visits = vec![0u32; n];
        let mut stats = Stats::default();
        states[cfg.entry] = Some(State::initial());
        let mut work: BTreeSet<(usize, usize)> = BTreeSet::new();
        work.insert((rank[cfg.entry], cfg.entry));
        let mut complete = true;
        while let Some((_, p)) = work.pop_first() {
            if stats.iterations >= self.config.max_iterations {
                complete = false;
                break;
            }
            stats.iterations += 1;
            let Some(sp) = states[p].clone() else { continue };
            for &ei in &succ[p] {
                let e = &cfg.edges[ei];
                let (Some(post), _) = transfer(&dom, &sp, e) else { continue };
                let q = e.dst;
                let next = match &states[q] {
                    None => post,
                    Some(old) => {
                        if post.leq(old, &dom) {
                            continue;
                        }
                        let j = old.join(&post, &dom);
                        if heads.contains(&q) {
                            visits[q] += 1;
                            if visits[q] > self.config.widen_delay {
                                stats.widenings += 1;
                                old.widen(&j, &dom, &self.config.thresholds)
                            } else {
                                j
                            }
                        } else {
                            j
                        }
                    }
                };
                states[q] = Some(next);
                work.insert((rank[q], q));
            }
        }
        let mut violation = None;
        if complete {
            violation = self.check(&states);
            if self.config.narrow && violation.is_none() {
                let narrowed = self.decrease(&states);
                if self.check(&narrowed).is_none() {
                    states = narrowed;
                    stats.narrowed = true;
                }
            }
        }
        let alarms = self.collect(&states);
        Analysis { states, alarms, stats, complete, violation }
    }

    /// Incoming states of every point from the current iterate.
    fn decrease(&self, states: &[Option<State>]) -> Vec<Option<State>> {
        let dom = self.dom();
        let mut out: Vec<Option<State>> = vec![None; states.len()];
        out[self.cfg.entry] = Some(State::initial());
        for e in &self.cfg.edges {
            let Some(sp) = &states[e.src] else { continue };
            let (Some(post), _) = transfer(&dom, sp, e) else { continue };
            out[e.dst] = Some(match out[e.dst].take() {
                None => post,
                Some(o) => o.join(&post, &dom),
            });
        }
        out
    }

    /// The first edge whose transfer escapes its target state.
    pub fn check(&self, states: &[Option<State>]) -> Option<usize> {
        let dom = self.dom();
        for (ei, e) in self.cfg.edges.iter().enumerate() {
            let Some(sp) = &states[e.src] else { continue };
            let (post, _) = transfer(&dom, sp, e);
            let ok = match (&post, &states[e.dst]) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(a), Some(b)) => a.leq(b, &dom),
            };
            if !ok {
                return Some(ei);
            }
        }
        None
    }

    pub fn collect(&self, states: &[Option<State>]) -> Vec<Alarm> {
        let dom = self.dom();
        let mut set = BTreeSet::new();
        for (ei, e) in self.cfg.edges.iter().enumerate() {
            let Some(sp) = &states[e.src] else { continue };
            let (_, alarms) = transfer(&dom, sp, e);
            for kind in alarms.iter() {
                set.insert(Alarm { loc: e.loc, kind, point: e.src, edge: ei, expr: self.cfg.fmt_inst(&e.inst) });
            }
        }
        let mut seen = BTreeSet::new();
        set.into_iter().filter(|a| seen.insert((a.point, a.kind, a.expr.clone()))).collect()
    }
}

pub fn analyze(cfg: &Cfg, abi: &Abi, config: &Config) -> Analysis {
    Analyzer { cfg, abi, config }.run()
}
