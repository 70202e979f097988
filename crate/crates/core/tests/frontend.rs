use cellscope_core::frontend::ctype::RecordKind;
use cellscope_core::frontend::{compile, layout, lower, parse_program, CType, LowerOptions};
use cellscope_core::ir::{CopyType, Inst};
use cellscope_core::{Abi, FrontendError, ScalarType};

fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(path).unwrap()
}

fn cfg_of(src: &str) -> cellscope_core::Cfg {
    compile(src, &Abi::default(), &LowerOptions::default()).unwrap()
}

fn dump_lines(src: &str) -> Vec<String> {
    let cfg = cfg_of(src);
    cfg.edges.iter().map(|e| cfg.fmt_inst(&e.inst)).collect()
}

#[test]
fn minimal_program() {
    let p = parse_program("int x; void main(void){ x = 5; }", &Abi::default()).unwrap();
    assert_eq!(p.globals.len(), 1);
    assert_eq!(p.functions.len(), 1);
    assert!(dump_lines("int x; void main(void){ x = 5; }").contains(&"*int(&x + 0) <- 5".to_string()));
}

#[test]
fn message_example_parses() {
    let abi = Abi::default();
    let p = parse_program(&corpus("msgex.c"), &abi).unwrap();
    let tags: Vec<_> = p.types.records.iter().filter_map(|r| r.tag.clone().map(|t| (t, r.kind))).collect();
    assert!(tags.contains(&("msg".into(), RecordKind::Union)));
    assert!(tags.contains(&("msgA".into(), RecordKind::Struct)));
    assert!(tags.contains(&("msgB".into(), RecordKind::Struct)));
    assert_eq!(p.functions.len(), 3);
    let msg = p.types.records.iter().position(|r| r.tag.as_deref() == Some("msg")).unwrap();
    // msgB is the largest alternative: int (4) + double (8, aligned 4).
    let l = layout(&CType::Record(cellscope_core::frontend::ctype::RecordId(msg)), &p.types, &abi);
    assert_eq!(l.size, 12);
    cfg_of(&corpus("msgex.c")).check_well_formed().unwrap();
}

#[test]
fn recursion_is_rejected() {
    let p = parse_program("void f(){ f(); }", &Abi::default()).unwrap();
    let err = lower(&p, &Abi::default(), &LowerOptions::default()).unwrap_err();
    assert!(matches!(err, FrontendError::Recursion(ref n) if n == "f"));
    let err = compile("void g(); void f(){ g(); } void g(){ f(); } void main(){ f(); }", &Abi::default(), &LowerOptions::default())
        .unwrap_err();
    assert!(matches!(err, FrontendError::Recursion(_)));
}

#[test]
fn field_store_uses_byte_offset() {
    let lines = dump_lines("struct { int a[3]; int b; } U; void main(void){ U.b = 1; }");
    assert!(lines.contains(&"*int(&U + 12) <- 1".to_string()), "{:?}", lines);
}

#[test]
fn register_overlay_store() {
    let lines = dump_lines(&corpus("emuex.c"));
    assert_eq!(lines[0], "*int(&X + 0) <- input(X)");
    assert_eq!(lines[1], "*ushort(&regs + 0) <- (ushort)*int(&X + 0)");
    assert!(lines.contains(&"*uchar(&regs + 2) <- *uchar(&regs + 0)".to_string()), "{:?}", lines);
    assert!(lines.contains(&"*uchar(&regs + 3) <- *uchar(&regs + 0)".to_string()));
}

#[test]
fn register_overlay_layout() {
    let abi = Abi::default();
    let p = parse_program(&corpus("emuex.c"), &abi).unwrap();
    let l = layout(&p.globals[0].ty, &p.types, &abi);
    let off = |path: &str| l.fields.iter().find(|(p, _)| p == path).unwrap().1;
    assert_eq!((off("b.al"), off("b.ah"), off("w.ax"), off("w.bx")), (0, 1, 0, 2));
}

#[test]
fn emulation_labels_are_points() {
    let cfg = cfg_of(&corpus("emuex.c"));
    for k in 1..=7 {
        assert!(cfg.point_by_label(&format!("p{}", k)).is_some());
    }
}

#[test]
fn pointer_condition_guards() {
    let cfg = cfg_of("int *p; int a; int b; void main(void){ if (p) a = 1; else b = 1; }");
    let guards: Vec<String> = cfg
        .edges
        .iter()
        .filter(|e| matches!(e.inst, Inst::Guard(_)) && !e.inst.is_nop())
        .map(|e| cfg.fmt_inst(&e.inst))
        .collect();
    assert_eq!(guards, vec!["*ptr(&p + 0) == (ptr)0 == 0 ?", "*ptr(&p + 0) != (ptr)0 == 0 ?"]);
}

#[test]
fn byte_copy_loop_is_unrolled() {
    let src = "int a; int b;
        void memcopy(void* dst, void* src, unsigned sz) {
          unsigned char* s = (unsigned char*) src;
          unsigned char* d = (unsigned char*) dst;
          unsigned i;
          for (i=0;i<sz;i++) d[i] = s[i];
        }
        void main(void){ memcopy(&a, &b, 4); }";
    let unrolled = compile(src, &Abi::default(), &LowerOptions { unroll: 8 }).unwrap();
    let plain = compile(src, &Abi::default(), &LowerOptions { unroll: 0 }).unwrap();
    let copies = |c: &cellscope_core::Cfg| {
        c.edges.iter().filter(|e| matches!(e.inst, Inst::Copy { ty: CopyType::Scalar(ScalarType::UChar), .. })).count()
    };
    assert_eq!(copies(&plain), 1);
    assert_eq!(copies(&unrolled), 9);
    assert!(unrolled.var_by_name("memcopy#1.i").is_some());
}

#[test]
fn aggregate_assignment_is_a_copy() {
    let lines = dump_lines("struct s { int a; char c; } x, y; void main(void){ x = y; }");
    assert!(lines.contains(&"*bytes8(&x + 0) <- *bytes8(&y + 0)".to_string()), "{:?}", lines);
}

#[test]
fn function_pointer_dispatch() {
    let src = "int r; int one(int x){ return 1; } int two(int x){ return 2; }
        void main(void){ int (*f)(int); f = &two; r = f(3); }";
    let cfg = cfg_of(src);
    let guards: Vec<String> =
        cfg.edges.iter().map(|e| cfg.fmt_inst(&e.inst)).filter(|s| s.contains("!= &")).collect();
    // Only functions whose address is taken are dispatch candidates.
    assert_eq!(guards, vec!["*ptr(&f + 0) != &two == 0 ?".to_string()]);
}

#[test]
fn excluded_features() {
    let abi = Abi::default();
    assert!(matches!(parse_program("void main(){ int *p = malloc(4); }", &abi), Err(FrontendError::Unsupported { .. })));
    assert!(matches!(parse_program("int f(int x, ...);", &abi), Err(FrontendError::Unsupported { .. })));
    assert!(matches!(
        compile("void main(){ y = 1; }", &abi, &LowerOptions::default()),
        Err(FrontendError::UnknownIdent { .. })
    ));
    let e = parse_program("void main(){ x = ; }", &abi).unwrap_err();
    assert_eq!(e.loc().map(|l| l.line), Some(1));
}

#[test]
fn every_dereference_is_scalar_and_lowering_is_deterministic() {
    for name in ["msgex.c", "emuex.c"] {
        let a = cfg_of(&corpus(name));
        let b = cfg_of(&corpus(name));
        a.check_well_formed().unwrap();
        assert_eq!(a.dump(), b.dump());
    }
}
