use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cellscope_core::analyzer::{Analysis, Analyzer, Config};
use cellscope_core::concrete::{run, ExecConfig};
use cellscope_core::diff::diff;
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::report::AlarmReport;
use cellscope_core::{Abi, Cfg};

#[derive(Parser)]
#[command(name = "cellscope", version, about = "Cell-based value analysis for a byte-level C subset")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze a program and report possible run-time errors.
    Analyze(AnalyzeArgs),
    /// Execute a program on the concrete byte-level interpreter.
    Run(RunArgs),
    /// Check an analysis against seeded concrete executions.
    Diff(DiffArgs),
    /// Analyze every `.c` file of a directory against its `.expect` file.
    Corpus(CorpusArgs),
}

#[derive(Args, Clone)]
struct Common {
    file: PathBuf,
    /// ABI description; defaults to $CELLSCOPE_ABI, then the built-in ABI.
    #[arg(long)]
    abi: Option<PathBuf>,
    /// Leading iterations duplicated for copy loops.
    #[arg(long, default_value_t = 64)]
    unroll: u32,
    /// Input range of a volatile variable, as VAR=LO..HI.
    #[arg(long = "volatile", value_parser = parse_volatile)]
    volatile: Vec<(String, i128, i128)>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Write the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    widen_delay: u32,
    #[arg(long, default_value_t = 64)]
    fanout: usize,
    /// Print the lowered control-flow graph.
    #[arg(long)]
    dump_cfg: bool,
    /// Print the abstract state at a point, given by id or label.
    #[arg(long)]
    dump_state: Vec<String>,
    /// Record the analysis time in the JSON report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    /// Print every step.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct DiffArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
}

#[derive(Args)]
struct CorpusArgs {
    dir: PathBuf,
    #[arg(long)]
    abi: Option<PathBuf>,
    /// Write missing or differing `.expect` files instead of failing.
    #[arg(long)]
    bless: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_volatile(s: &str) -> Result<(String, i128, i128), String> {
    let (name, range) = s.split_once('=').ok_or("expected VAR=LO..HI")?;
    let (lo, hi) = range.split_once("..").ok_or("expected VAR=LO..HI")?;
    let lo: i128 = lo.trim().parse().map_err(|_| format!("bad bound `{}`", lo))?;
    let hi: i128 = hi.trim().parse().map_err(|_| format!("bad bound `{}`", hi))?;
    if lo > hi {
        return Err(format!("empty range {}..{}", lo, hi));
    }
    Ok((name.trim().to_string(), lo, hi))
}

fn load_abi(path: Option<&Path>) -> Result<Abi> {
    let path = match path {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os("CELLSCOPE_ABI").map(PathBuf::from),
    };
    match path {
        None => Ok(Abi::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("cannot read ABI file {}", p.display()))?;
            Abi::parse_config(&text).with_context(|| format!("bad ABI file {}", p.display()))
        }
    }
}

struct Loaded {
    name: String,
    src: String,
    abi: Abi,
    cfg: Cfg,
}

fn load(c: &Common) -> Result<Loaded> {
    let abi = load_abi(c.abi.as_deref())?;
    let src = std::fs::read_to_string(&c.file).with_context(|| format!("cannot read {}", c.file.display()))?;
    let name = c.file.display().to_string();
    let cfg = compile(&src, &abi, &LowerOptions { unroll: c.unroll }).map_err(|e| anyhow!("{}:{}", name, e))?;
    for (v, _, _) in &c.volatile {
        match cfg.var_by_name(v) {
            Some(id) if cfg.var(id).volatile => {}
            Some(_) => bail!("`{}` is not volatile", v),
            None => bail!("no variable `{}`", v),
        }
    }
    Ok(Loaded { name, src, abi, cfg })
}

fn config(l: &Loaded, c: &Common) -> Config {
    let mut conf = Config::default();
    for (v, lo, hi) in &c.volatile {
        conf.inputs.insert(l.cfg.var_by_name(v).unwrap(), (*lo, *hi));
    }
    conf
}

fn point_of(cfg: &Cfg, s: &str) -> Result<usize> {
    if let Some(p) = cfg.point_by_label(s) {
        return Ok(p);
    }
    let inlined: Vec<usize> = (0..cfg.points.len())
        .filter(|p| cfg.points[*p].label.as_deref().is_some_and(|l| l.rsplit_once('.').is_some_and(|(_, x)| x == s)))
        .collect();
    if let [p] = inlined[..] {
        return Ok(p);
    }
    match s.parse::<usize>() {
        Ok(p) if p < cfg.points.len() => Ok(p),
        _ => bail!("no point `{}`", s),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<u8> {
    let l = load(&args.common)?;
    let mut conf = config(&l, &args.common);
    conf.widen_delay = args.widen_delay;
    conf.fanout = args.fanout.max(1);
    if args.dump_cfg {
        print!("{}", l.cfg.dump());
    }
    let t = Instant::now();
    let a = Analyzer { cfg: &l.cfg, abi: &l.abi, config: &conf }.run();
    let elapsed = t.elapsed();
    for s in &args.dump_state {
        let p = point_of(&l.cfg, s)?;
        println!("== point {}", p);
        match &a.states[p] {
            Some(st) => print!("{}", st.dump(&l.cfg)),
            None => println!("unreachable"),
        }
    }
    let mut report = AlarmReport::new(&l.name, &l.abi, &a);
    if args.timing {
        report.wall_time_ms = Some(elapsed.as_secs_f64() * 1000.0);
    }
    let sources = BTreeMap::from([(l.name.clone(), l.src.clone())]);
    print!("{}", report.render(&sources));
    if !a.complete {
        eprintln!("warning: iteration cap reached, results are incomplete");
    }
    if let Some(out) = &args.json {
        std::fs::write(out, report.to_json()).with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(if report.alarms.is_empty() { 0 } else { 1 })
}

fn run_cmd(args: &RunArgs) -> Result<u8> {
    let l = load(&args.common)?;
    let inputs = args.common.volatile.iter().map(|(v, lo, hi)| (v.clone(), (*lo, *hi))).collect();
    let conf = ExecConfig { seed: args.seed, max_steps: args.max_steps, inputs };
    let t = run(&l.cfg, &l.abi, &conf);
    if args.trace {
        print!("{}", t.render(&l.cfg));
    }
    println!("{:?}", t.outcome);
    Ok(t.outcome.exit_code() as u8)
}

fn diff_cmd(args: &DiffArgs) -> Result<u8> {
    let l = load(&args.common)?;
    let conf = config(&l, &args.common);
    let an = Analyzer { cfg: &l.cfg, abi: &l.abi, config: &conf };
    let a: Analysis = an.run();
    let sum = diff(&l.cfg, &l.abi, &an.dom(), &a, 0..args.seeds, args.max_steps);
    for f in &sum.failures {
        println!("{}", f);
    }
    println!(
        "{} runs, {} visited states, {} run-time errors, {} failures",
        sum.runs,
        sum.visits,
        sum.errors,
        sum.failures.len()
    );
    Ok(if sum.failures.is_empty() { 0 } else { 1 })
}

/// Expectation text of one corpus file.
fn corpus_report(path: &Path, abi: &Abi) -> Result<String> {
    let src = std::fs::read_to_string(path)?;
    let cfg = compile(&src, abi, &LowerOptions::default()).map_err(|e| anyhow!("{}", e))?;
    let a = Analyzer { cfg: &cfg, abi, config: &Config::default() }.run();
    let name = path.file_name().unwrap().to_string_lossy().to_string();
    Ok(AlarmReport::new(&name, abi, &a).expectation())
}

fn corpus(args: &CorpusArgs) -> Result<u8> {
    let abi = load_abi(args.abi.as_deref())?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .with_context(|| format!("cannot read {}", args.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    files.sort();
    let jobs = args.jobs.max(1);
    let mut results: Vec<Option<Result<String>>> = (0..files.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (chunk_files, chunk_out) in files.chunks(files.len().div_ceil(jobs).max(1)).zip(results.chunks_mut(files.len().div_ceil(jobs).max(1))) {
            let abi = &abi;
            s.spawn(move || {
                for (f, out) in chunk_files.iter().zip(chunk_out.iter_mut()) {
                    *out = Some(corpus_report(f, abi));
                }
            });
        }
    });
    let mut failed = 0;
    for (f, r) in files.iter().zip(results) {
        let expect = f.with_extension("expect");
        match r.unwrap() {
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {}", f.display(), e);
            }
            Ok(text) => {
                let old = std::fs::read_to_string(&expect).ok();
                if old.as_deref() == Some(text.as_str()) {
                    println!("ok   {}", f.display());
                } else if args.bless {
                    std::fs::write(&expect, &text)?;
                    println!("bless {}", f.display());
                } else {
                    failed += 1;
                    println!("FAIL {}", f.display());
                    match old {
                        None => println!("  missing {}", expect.display()),
                        Some(old) => {
                            for l in old.lines().filter(|l| !text.lines().any(|m| m == *l)) {
                                println!("  - {}", l);
                            }
                            for l in text.lines().filter(|l| !old.lines().any(|m| m == *l)) {
                                println!("  + {}", l);
                            }
                        }
                    }
                }
            }
        }
    }
    println!("{} files, {} failed", files.len(), failed);
    Ok(if failed == 0 { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Analyze(a) => analyze(a),
        Cmd::Run(a) => run_cmd(a),
        Cmd::Diff(a) => diff_cmd(a),
        Cmd::Corpus(a) => corpus(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
