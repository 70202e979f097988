//! One line per acceptance criterion; exits non-zero if any fails.

mod props;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use cellscope_core::analyzer::{Analysis, Analyzer, Config, State};
use cellscope_core::cells::Cell;
use cellscope_core::diff::diff;
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::pointer::AVal;
use cellscope_core::report::AlarmReport;
use cellscope_core::{gen, Abi, AlarmKind, Cfg, ScalarType};

const SEEDS: u64 = 100;
const RANDOM_PROGRAMS: u64 = 50;
const CASES: u32 = 1000;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn source(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

/// Volatile ranges used for a corpus program.
fn inputs_for(cfg: &Cfg) -> BTreeMap<String, (i128, i128)> {
    let mut m = BTreeMap::new();
    if cfg.var_by_name("X").is_some_and(|x| cfg.var(x).volatile) {
        m.insert("X".to_string(), (0, 65535));
    }
    m
}

struct Run {
    cfg: Cfg,
    abi: Abi,
    config: Config,
    analysis: Analysis,
    time: Duration,
}

impl Run {
    fn new(src: &str, unroll: u32) -> Result<Run, String> {
        let abi = Abi::default();
        let cfg = compile(src, &abi, &LowerOptions { unroll }).map_err(|e| e.to_string())?;
        let mut config = Config::default();
        for (v, r) in inputs_for(&cfg) {
            config.inputs.insert(cfg.var_by_name(&v).unwrap(), r);
        }
        let t = Instant::now();
        let analysis = Analyzer { cfg: &cfg, abi: &abi, config: &config }.run();
        let time = t.elapsed();
        Ok(Run { cfg, abi, config, analysis, time })
    }

    fn at(&self, label: &str) -> Result<&State, String> {
        let p = self.cfg.point_by_label(label).ok_or(format!("no label {}", label))?;
        self.analysis.states[p].as_ref().ok_or(format!("{} unreachable", label))
    }

    fn cell(&self, var: &str, off: u64, ty: ScalarType) -> Cell {
        Cell::new(self.cfg.var_by_name(var).unwrap(), off, ty)
    }

    fn value(&self, label: &str, var: &str, off: u64, ty: ScalarType) -> Result<AVal, String> {
        let c = self.cell(var, off, ty);
        self.at(label)?.mem.value(&c).cloned().ok_or(format!("no cell ({}, {}, {}) at {}", var, off, ty.name(), label))
    }
}

fn interval(v: &AVal) -> Option<(i128, i128)> {
    let i = v.num()?.itv();
    Some((i.lo.fin()?, i.hi.fin()?))
}

fn emuex_cells() -> Result<String, String> {
    let r = Run::new(&source("emuex.c"), 64)?;
    let regs = r.cfg.var_by_name("regs").unwrap();
    let (al, ah, bl, bh, ax) =
        ((0, "uchar"), (1, "uchar"), (2, "uchar"), (3, "uchar"), (0, "ushort"));
    let expected: [(&str, Vec<(u64, &str)>); 7] = [
        ("p1", vec![ax]),
        ("p2", vec![ax, ah]),
        ("p3", vec![ax, ah, al, bl]),
        ("p4", vec![ax, ah]),
        ("p5", vec![ax, ah, al, bh]),
        ("p6", vec![ax, ah, al, bl, bh]),
        ("p7", vec![ah, al, bl, bh]),
    ];
    for (label, cells) in expected {
        let want: BTreeSet<(u64, String)> = cells.iter().map(|(o, t)| (*o, t.to_string())).collect();
        let got: BTreeSet<(u64, String)> =
            r.at(label)?.mem.cells_of(regs).iter().map(|c| (c.off, c.ty.name().to_string())).collect();
        if got != want {
            return Err(format!("{}: cells {:?}, expected {:?}", label, got, want));
        }
    }
    let x = interval(&r.value("p2", "X", 0, ScalarType::Int)?);
    if x != Some((0, 255)) {
        return Err(format!("X at (2) is {:?}", x));
    }
    if r.time > Duration::from_secs(1) {
        return Err(format!("took {:?}", r.time));
    }
    Ok(format!("C1..C7 exact, X in [0, 255] at (2), {:?}", r.time))
}

fn static_zero() -> Result<String, String> {
    let r = Run::new(&source("emuex.c"), 64)?;
    let dom = Analyzer { cfg: &r.cfg, abi: &r.abi, config: &r.config }.dom();
    let mut found = Vec::new();
    for (label, off, name) in [("p3", 3, "bh"), ("p5", 2, "bl")] {
        let mut s = r.at(label)?.mem.clone();
        let c = r.cell("regs", off, ScalarType::UChar);
        s.realize(&dom, c);
        let v = s.value(&c).and_then(interval);
        if v != Some((0, 0)) {
            return Err(format!("{} realized at ({}) is {:?}", name, &label[1..], v));
        }
        found.push(format!("{} = 0 on ({})", name, &label[1..]));
    }
    let six = r.at("p6")?;
    for off in [2, 3] {
        if six.mem.value(&r.cell("regs", off, ScalarType::UChar)).is_none() {
            return Err(format!("byte {} missing from C6", off));
        }
    }
    Ok(format!("{}, both in C6, {:?}", found.join(", "), r.time))
}

fn polymorphic_copy() -> Result<String, String> {
    let unroll = 64;
    let r = Run::new(&source("memcpyex.c"), unroll)?;
    let bases = |v: AVal| match v {
        AVal::Ptr(b, _) => Ok(b),
        other => Err(format!("not a pointer: {:?}", other)),
    };
    let copy = bases(r.value("get#1.copied", "get#1.S", 16, ScalarType::Ptr)?)?;
    let orig = bases(r.value("get#1.copied", "R", 16, ScalarType::Ptr)?)?;
    let invalid = r.analysis.alarm_count(AlarmKind::InvalidPointer);
    if copy != orig || copy.is_empty() || copy.is_top() {
        return Err(format!("copied bases {} vs original {}", copy.show(&r.cfg), orig.show(&r.cfg)));
    }
    if invalid != 0 || r.time > Duration::from_secs(5) {
        return Err(format!("{} invalid-pointer alarms, {:?}", invalid, r.time));
    }
    Ok(format!("bases {} = {}, 0 invalid-pointer alarms, unroll {}, {:?}", copy.show(&r.cfg), orig.show(&r.cfg), unroll, r.time))
}

fn equality_reduction() -> Result<String, String> {
    let r = Run::new(&source("bytecopy.c"), 64)?;
    let a = interval(&r.value("copied", "a", 0, ScalarType::Int)?);
    let b = interval(&r.value("copied", "b", 0, ScalarType::Int)?);
    if a != b || a.is_none() || r.time > Duration::from_secs(1) {
        return Err(format!("a {:?}, b {:?}, {:?}", a, b, r.time));
    }
    Ok(format!("a = b = {:?}, {:?}", a.unwrap(), r.time))
}

fn boundary() -> Result<String, String> {
    let r = Run::new(&source("ptrarith.c"), 64)?;
    let v = interval(&r.value("read", "r", 0, ScalarType::Int)?);
    if v != Some((42, 42)) {
        return Err(format!("U.b read as {:?}", v));
    }
    let o = Run::new(&source("oob.c"), 64)?;
    let n = o.analysis.alarm_count(AlarmKind::OutOfBound);
    if n != 1 || o.analysis.alarms.len() != 1 {
        return Err(format!("{} out-of-bound alarms, {} in total", n, o.analysis.alarms.len()));
    }
    if r.time + o.time > Duration::from_secs(1) {
        return Err(format!("took {:?}", r.time + o.time));
    }
    Ok(format!("U.b = 42, one out-of-bound alarm on U.a[4], {:?}", r.time + o.time))
}

fn alignment() -> Result<String, String> {
    let r = Run::new(&source("stride.c"), 0)?;
    let AVal::Ptr(_, off) = r.value("body", "p", 0, ScalarType::Ptr)? else {
        return Err("p is not a pointer".into());
    };
    let c = off.cong();
    let mis = r.analysis.alarm_count(AlarmKind::Misaligned);
    let ok = c.as_constant().map_or(c.modulus() % 4 == 0 && c.residue() % 4 == 0, |x| x % 4 == 0);
    if !ok || mis != 0 || r.analysis.stats.widenings == 0 || r.time > Duration::from_secs(1) {
        return Err(format!("offset {}, {} misaligned alarms, {} widenings", off, mis, r.analysis.stats.widenings));
    }
    Ok(format!("offset {} at the dereference, 0 misaligned alarms, {} widenings, {:?}", off, r.analysis.stats.widenings, r.time))
}

fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    files.sort();
    files
}

fn soundness() -> Result<String, String> {
    let t = Instant::now();
    let mut programs: Vec<(String, String)> = corpus_files()
        .iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().to_string(), std::fs::read_to_string(p).unwrap()))
        .collect();
    let hand = programs.len();
    for seed in 0..RANDOM_PROGRAMS {
        programs.push((format!("random #{}", seed), gen::program(seed)));
    }
    let (mut runs, mut errors) = (0, 0);
    for (name, src) in &programs {
        let r = Run::new(src, 64).map_err(|e| format!("{}: {}", name, e))?;
        let an = Analyzer { cfg: &r.cfg, abi: &r.abi, config: &r.config };
        let sum = diff(&r.cfg, &r.abi, &an.dom(), &r.analysis, 0..SEEDS, 100_000);
        if let Some(f) = sum.failures.first() {
            return Err(format!("{}: {} ({} failures)", name, f, sum.failures.len()));
        }
        runs += sum.runs;
        errors += sum.errors;
    }
    if hand < 12 || t.elapsed() > Duration::from_secs(300) {
        return Err(format!("{} corpus programs, {:?}", hand, t.elapsed()));
    }
    Ok(format!(
        "{} corpus + {} random programs, {} runs ({} ending in an error), 0 failures, {:?}",
        hand,
        RANDOM_PROGRAMS,
        runs,
        errors,
        t.elapsed()
    ))
}

fn property_suites() -> Result<String, String> {
    let t = Instant::now();
    let mut names = Vec::new();
    for (suite, ps) in props::suites() {
        for p in &ps {
            (p.run)(CASES).map_err(|e| format!("{}: {}: {}", suite, p.name, e))?;
        }
        names.push(format!("{} ({})", suite, ps.len()));
    }
    if t.elapsed() > Duration::from_secs(120) {
        return Err(format!("took {:?}", t.elapsed()));
    }
    Ok(format!("{} x {} cases, 0 failures, {:?}", names.join(", "), CASES, t.elapsed()))
}

fn determinism() -> Result<String, String> {
    let mut slowest = Duration::ZERO;
    let files = corpus_files();
    for p in &files {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        let src = std::fs::read_to_string(p).unwrap();
        let a = Run::new(&src, 64)?;
        let b = Run::new(&src, 64)?;
        if !a.analysis.complete || a.analysis.violation.is_some() {
            return Err(format!("{}: complete {}, violation {:?}", name, a.analysis.complete, a.analysis.violation));
        }
        let ja = AlarmReport::new(&name, &a.abi, &a.analysis).to_json();
        let jb = AlarmReport::new(&name, &b.abi, &b.analysis).to_json();
        if ja != jb {
            return Err(format!("{}: reports differ", name));
        }
        slowest = slowest.max(a.time).max(b.time);
    }
    if slowest > Duration::from_secs(30) {
        return Err(format!("slowest file took {:?}", slowest));
    }
    Ok(format!("{} files terminate, identical JSON twice, slowest {:?}", files.len(), slowest))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 9] = [
        ("emuex cell sets and X range", emuex_cells),
        ("static-zero realization", static_zero),
        ("polymorphic copy", polymorphic_copy),
        ("equality-domain reduction", equality_reduction),
        ("pointer-arithmetic boundary", boundary),
        ("alignment inference", alignment),
        ("global soundness", soundness),
        ("domain property suites", property_suites),
        ("termination and determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} PASS {}: {}", i + 1, name, detail),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {}: {}", i + 1, name, why);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
