//! Workloads shared by the benchmarks.

use std::path::PathBuf;

use cellscope_core::analyzer::{Analysis, Analyzer, Config};
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::{Abi, Cfg};

pub struct Workload {
    pub name: String,
    pub cfg: Cfg,
    pub abi: Abi,
    pub config: Config,
}

impl Workload {
    pub fn from_source(name: &str, src: &str) -> Workload {
        let abi = Abi::default();
        let cfg = compile(src, &abi, &LowerOptions::default()).expect("benchmark input compiles");
        let mut config = Config::default();
        if let Some(x) = cfg.var_by_name("X") {
            config.inputs.insert(x, (0, 65535));
        }
        Workload { name: name.to_string(), cfg, abi, config }
    }

    pub fn corpus(file: &str) -> Workload {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file);
        Workload::from_source(file, &std::fs::read_to_string(path).expect("corpus file"))
    }

    pub fn analyze(&self) -> Analysis {
        Analyzer { cfg: &self.cfg, abi: &self.abi, config: &self.config }.run()
    }
}
