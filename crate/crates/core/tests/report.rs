use std::path::PathBuf;

use cellscope_core::analyzer::{analyze, Config};
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::report::AlarmReport;
use cellscope_core::{Abi, AlarmKind};
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn report(file: &str) -> AlarmReport {
    let abi = Abi::default();
    let src = std::fs::read_to_string(root().join("corpus").join(file)).unwrap();
    let cfg = compile(&src, &abi, &LowerOptions::default()).unwrap();
    AlarmReport::new(file, &abi, &analyze(&cfg, &abi, &Config::default()))
}

fn keys(v: &Value) -> Vec<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}

#[test]
fn report_follows_shipped_schema() {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(root().join("docs/report.schema.json")).unwrap()).unwrap();
    let r: Value = serde_json::from_str(&report("floatmix.c").to_json()).unwrap();
    let props = keys(&schema["properties"]);
    for k in strings(&schema["required"]) {
        assert!(r.get(&k).is_some(), "missing {}", k);
    }
    for k in keys(&r) {
        assert!(props.contains(&k), "unexpected {}", k);
    }
    assert_eq!(r["schema"], schema["properties"]["schema"]["const"]);
    let item = &schema["properties"]["alarms"]["items"];
    let alarms = r["alarms"].as_array().unwrap();
    assert!(!alarms.is_empty());
    for a in alarms {
        let mut want = strings(&item["required"]);
        let mut got = keys(a);
        want.sort();
        got.sort();
        assert_eq!(got, want);
    }
    let kinds = strings(&schema["$defs"]["kind"]["enum"]);
    let names: Vec<String> = AlarmKind::ALL.iter().map(|k| k.name().to_string()).collect();
    assert_eq!(kinds, names);
}

#[test]
fn counts_match_alarm_list() {
    for file in ["floatmix.c", "divzero.c", "oob.c", "msgex.c"] {
        let r = report(file);
        assert_eq!(r.counts.values().sum::<usize>(), r.alarms.len());
        for (k, n) in &r.counts {
            assert_eq!(*n, r.alarms.iter().filter(|a| &a.kind == k).count());
        }
        let mut sorted = r.alarms.clone();
        sorted.sort_by(|x, y| (&x.file, x.line, &x.kind).cmp(&(&y.file, y.line, &y.kind)));
        let order: Vec<_> = r.alarms.iter().map(|a| (a.line, a.kind.clone())).collect();
        let want: Vec<_> = sorted.iter().map(|a| (a.line, a.kind.clone())).collect();
        assert_eq!(order, want);
    }
}

#[test]
fn json_round_trips_without_timing() {
    let r = report("divzero.c");
    let text = r.to_json();
    assert!(!text.contains("wall_time_ms"));
    let back: AlarmReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(text, report("divzero.c").to_json());
}

#[test]
fn expectation_lists_alarms() {
    let r = report("oob.c");
    assert_eq!(r.expectation(), "6:5 out-of-bound *int(&r + 0) <- *int(&U + 16)\ntotal 1\n");
}
