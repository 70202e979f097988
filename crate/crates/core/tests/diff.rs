use cellscope_core::analyzer::{Analysis, Analyzer, Config};
use cellscope_core::cells::Cell;
use cellscope_core::diff::{diff, Violation};
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::{Abi, AlarmKind, Cfg, ScalarType};

const STALE: &str = "\
static union { struct { uint8 al, ah; } b; uint16 ax; } regs;
volatile int X;
void main(void) {
  regs.ax = 5;
p1: ;
  regs.b.al = X;
p2: ;
}
";

fn setup(src: &str) -> (Cfg, Abi, Config) {
    let abi = Abi::default();
    let cfg = compile(src, &abi, &LowerOptions::default()).unwrap();
    let mut config = Config::default();
    if let Some(x) = cfg.var_by_name("X") {
        config.inputs.insert(x, (0, 65535));
    }
    (cfg, abi, config)
}

fn check(cfg: &Cfg, abi: &Abi, config: &Config, a: &Analysis) -> cellscope_core::diff::DiffSummary {
    let an = Analyzer { cfg, abi, config };
    diff(cfg, abi, &an.dom(), a, 0..100, 10_000)
}

#[test]
fn sound_analysis_passes() {
    let (cfg, abi, config) = setup(STALE);
    let a = Analyzer { cfg: &cfg, abi: &abi, config: &config }.run();
    let sum = check(&cfg, &abi, &config, &a);
    assert_eq!(sum.runs, 100);
    assert!(sum.failures.is_empty(), "{:?}", sum.failures);
}

#[test]
fn stale_overlapping_cell_is_caught() {
    let (cfg, abi, config) = setup(STALE);
    let mut a = Analyzer { cfg: &cfg, abi: &abi, config: &config }.run();
    let ax = Cell::new(cfg.var_by_name("regs").unwrap(), 0, ScalarType::UShort);
    let (p1, p2) = (cfg.point_by_label("p1").unwrap(), cfg.point_by_label("p2").unwrap());
    let old = a.states[p1].as_ref().unwrap().mem.value(&ax).unwrap().clone();
    a.states[p2].as_mut().unwrap().mem.env.set(ax, old);
    let sum = check(&cfg, &abi, &config, &a);
    assert!(!sum.failures.is_empty());
    let f = &sum.failures[0];
    match &f.violation {
        Violation::Inclusion { point, detail, .. } => {
            assert_eq!(*point, p2);
            assert!(detail.contains("(regs, 0, ushort)"), "{}", detail);
        }
        v => panic!("unexpected {:?}", v),
    }
    assert!(f.to_string().starts_with(&format!("seed {}:", f.seed)));
}

#[test]
fn missing_alarm_is_caught() {
    let src = "volatile int d;\nint q;\nvoid main(void) {\n  int x = d;\n  if (x >= 0 && x <= 3) q = 100 / x;\n}\n";
    let (cfg, abi, config) = setup(src);
    let mut a = Analyzer { cfg: &cfg, abi: &abi, config: &config }.run();
    assert_eq!(a.alarm_count(AlarmKind::DivByZero), 1);
    assert!(check(&cfg, &abi, &config, &a).failures.is_empty());
    a.alarms.clear();
    let sum = check(&cfg, &abi, &config, &a);
    assert!(sum.failures.iter().any(|f| matches!(f.violation, Violation::Uncovered { kind: AlarmKind::DivByZero, .. })));
}

#[test]
fn trivial_program_passes() {
    let (cfg, abi, config) = setup("void main(void) { }\n");
    let a = Analyzer { cfg: &cfg, abi: &abi, config: &config }.run();
    assert!(check(&cfg, &abi, &config, &a).failures.is_empty());
}
