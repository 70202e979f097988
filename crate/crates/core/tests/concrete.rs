use std::collections::BTreeMap;

use cellscope_core::concrete::{run, run_with, ExecConfig, Outcome, PtrVal, Value};
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::ir::Base;
use cellscope_core::{Abi, AlarmKind, Cfg};

fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{}", env!("CARGO_MANIFEST_DIR"), name)).unwrap()
}

fn cfg_of(src: &str) -> Cfg {
    compile(src, &Abi::default(), &LowerOptions::default()).unwrap()
}

fn conf(seed: u64, inputs: &[(&str, i128)]) -> ExecConfig {
    ExecConfig {
        seed,
        max_steps: 1000,
        inputs: inputs.iter().map(|(n, v)| (n.to_string(), (*v, *v))).collect::<BTreeMap<_, _>>(),
    }
}

fn byte_value(b: &cellscope_core::concrete::Byte, abi: &Abi) -> i128 {
    use cellscope_core::concrete::{phi, ValueSet};
    match phi(cellscope_core::ScalarType::UChar, std::slice::from_ref(b), abi) {
        ValueSet::Exact(v) => match v[0] {
            Value::Int(x) => x,
            _ => panic!(),
        },
        s => panic!("not a singleton: {:?}", s),
    }
}

#[test]
fn register_overlay_hand_trace() {
    // X = 7: ax = 0x0007, so ah = 0 and the then-branch copies al = 7 into bl.
    let cfg = cfg_of(&corpus("emuex.c"));
    let abi = Abi::default();
    let p3 = cfg.point_by_label("p3").unwrap();
    let regs = cfg.var_by_name("regs").unwrap();
    let mut at_p3 = None;
    let trace = run_with(&cfg, &abi, &conf(3, &[("X", 7)]), &mut |p, m| {
        if p == p3 {
            at_p3 = Some(m.bytes(regs).to_vec());
        }
    });
    assert_eq!(trace.outcome, Outcome::Finished);
    let bytes = at_p3.expect("point 3 reached");
    let vals: Vec<i128> = bytes.iter().map(|b| byte_value(b, &abi)).collect();
    assert_eq!(vals, vec![7, 0, 7, 0]);
}

#[test]
fn division_by_zero_input() {
    let cfg = cfg_of("volatile int d; int r; void main(void){ r = 10 / d; }");
    let t = run(&cfg, &Abi::default(), &conf(0, &[("d", 0)]));
    assert!(matches!(t.outcome, Outcome::Error { kind: AlarmKind::DivByZero, .. }));
    assert_eq!(t.outcome.exit_code(), 3);
}

#[test]
fn infinite_loop_hits_step_limit() {
    let cfg = cfg_of("void main(void){ while (1); }");
    let t = run(&cfg, &Abi::default(), &conf(0, &[]));
    assert_eq!(t.outcome, Outcome::StepLimit);
    assert_eq!(t.outcome.exit_code(), 4);
    assert_eq!(t.steps.len(), 1000);
}

#[test]
fn out_of_bound_array_read() {
    let cfg = cfg_of("struct { int a[4]; int b; } U; int r; void main(void){ r = U.a[5]; }");
    let t = run(&cfg, &Abi::default(), &conf(0, &[]));
    assert!(matches!(t.outcome, Outcome::Error { kind: AlarmKind::OutOfBound, .. }), "{:?}", t.outcome);
}

#[test]
fn dangling_pointer_becomes_invalid() {
    let src = "int *g; int r;
        void f(void){ int loc; loc = 1; g = &loc; }
        void main(void){ f(); r = *g; }";
    let cfg = cfg_of(src);
    let t = run(&cfg, &Abi::default(), &conf(0, &[]));
    assert!(matches!(t.outcome, Outcome::Error { kind: AlarmKind::InvalidPointer, .. }), "{:?}", t.outcome);
}

#[test]
fn uninitialized_read_is_reported() {
    let cfg = cfg_of("int r; void main(void){ int x; r = x + 1; }");
    let t = run(&cfg, &Abi::default(), &conf(0, &[]));
    assert!(matches!(t.outcome, Outcome::Error { kind: AlarmKind::UninitRead, .. }));
}

#[test]
fn byte_copy_preserves_pointer() {
    let src = "int a; int *p; int *q; int r;
        void memcopy(void* dst, void* src, unsigned sz) {
          unsigned char* s = (unsigned char*) src;
          unsigned char* d = (unsigned char*) dst;
          unsigned i;
          for (i=0;i<sz;i++) d[i] = s[i];
        }
        void main(void){ p = &a; memcopy(&q, &p, sizeof(p)); r = *q; }";
    let cfg = cfg_of(src);
    let abi = Abi::default();
    let t = run(&cfg, &abi, &conf(0, &[]));
    assert_eq!(t.outcome, Outcome::Finished);
    let q = cfg.var_by_name("q").unwrap();
    let a = cfg.var_by_name("a").unwrap();
    let set = cellscope_core::concrete::phi(cellscope_core::ScalarType::Ptr, t.memory.bytes(q), &abi);
    assert_eq!(set.singleton(), Some(Value::Ptr(PtrVal::Addr(Base::Var(a), 0))));
}

#[test]
fn runs_are_reproducible() {
    let cfg = cfg_of(&corpus("msgex.c"));
    let abi = Abi::default();
    for seed in 0..20 {
        let a = run(&cfg, &abi, &conf(seed, &[]));
        let b = run(&cfg, &abi, &conf(seed, &[]));
        assert_eq!(a.render(&cfg), b.render(&cfg));
        assert_eq!(a, b);
    }
}

#[test]
fn trace_format() {
    let cfg = cfg_of("int x; void main(void){ x = 258; }");
    let t = run(&cfg, &Abi::default(), &conf(0, &[]));
    let text = t.render(&cfg);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("point=0 inst=*int(&x + 0) <- 258"));
    assert_eq!(lines.next(), Some("  x[0]=(int,0,258)"));
}
