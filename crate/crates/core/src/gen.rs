//! Seeded generator of small programs in the accepted C subset, used to
//! stress the analyzer against the concrete interpreter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gen {
    rng: ChaCha8Rng,
    out: String,
    indent: usize,
    loops: usize,
}

const INTS: [&str; 4] = ["a", "b", "c", "n"];
const SMALL: [&str; 3] = ["uc", "sh", "us"];

impl Gen {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).unwrap()
    }

    fn constant(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 => format!("{}", self.rng.gen_range(0..4)),
            1 => format!("{}", self.rng.gen_range(-20..20)),
            2 => format!("{}", self.rng.gen_range(0..256)),
            3 => "0xFF".into(),
            4 => format!("{}", self.rng.gen_range(1000..70000)),
            _ => format!("{}", self.rng.gen_range(0..10)),
        }
    }

    fn leaf(&mut self) -> String {
        match self.rng.gen_range(0..9) {
            0 | 1 => self.constant(),
            2 | 3 | 4 => self.pick(&INTS).to_string(),
            5 => self.pick(&SMALL).to_string(),
            6 => format!("arr[{}]", self.rng.gen_range(0..8)),
            7 => format!("u.b[{}]", self.rng.gen_range(0..4)),
            _ => ["u.i", "u.h[0]", "u.h[1]", "*p"].choose(&mut self.rng).unwrap().to_string(),
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf();
        }
        match self.rng.gen_range(0..10) {
            0..=5 => {
                let op = *["+", "-", "*", "/", "%", "&", "|", "^"].choose(&mut self.rng).unwrap();
                let (l, r) = (self.expr(depth - 1), self.expr(depth - 1));
                match op {
                    "/" | "%" if self.rng.gen_bool(0.9) => format!("({} {} ({} | 1))", l, op, r),
                    _ => format!("({} {} {})", l, op, r),
                }
            }
            6 => {
                let op = *["<<", ">>"].choose(&mut self.rng).unwrap();
                format!("({} {} {})", self.expr(depth - 1), op, self.rng.gen_range(0..12))
            }
            7 => {
                let t = *["unsigned char", "short", "unsigned", "signed char"].choose(&mut self.rng).unwrap();
                format!("(({}){})", t, self.expr(depth - 1))
            }
            8 => format!("(-({}))", self.expr(depth - 1)),
            _ => self.cond(depth - 1),
        }
    }

    fn cond(&mut self, depth: u32) -> String {
        let op = *["<", "<=", ">", ">=", "==", "!="].choose(&mut self.rng).unwrap();
        format!("({} {} {})", self.expr(depth), op, self.expr(depth.min(1)))
    }

    fn lvalue(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=3 => self.pick(&INTS).to_string(),
            4 => self.pick(&SMALL).to_string(),
            5 => format!("arr[{}]", self.rng.gen_range(0..8)),
            6 => format!("u.b[{}]", self.rng.gen_range(0..4)),
            7 => ["u.i", "u.h[0]", "u.h[1]"].choose(&mut self.rng).unwrap().to_string(),
            8 => "*p".into(),
            _ => format!("arr[{} & 7]", self.expr(1)),
        }
    }

    fn stmt(&mut self, depth: u32) {
        let k = self.rng.gen_range(0..14);
        match k {
            0..=4 => {
                let (l, e) = (self.lvalue(), self.expr(3));
                self.line(&format!("{} = {};", l, e));
            }
            5 => {
                let v = self.pick(&INTS);
                self.line(&format!("{} = in;", v));
                let lo = self.rng.gen_range(-100..50);
                let hi = lo + self.rng.gen_range(0..300);
                self.line(&format!("if ({} < {} || {} > {}) {} = 0;", v, lo, v, hi, v));
            }
            6 => {
                let idx = self.rng.gen_range(0..8);
                self.line(&format!("p = &arr[{}];", idx));
            }
            7 => self.line("if (p < &arr[7]) p = p + 1;"),
            8 | 9 if depth > 0 => {
                let c = self.cond(2);
                self.line(&format!("if {} {{", c));
                self.block(depth - 1);
                if self.rng.gen_bool(0.5) {
                    self.line("} else {");
                    self.block(depth - 1);
                }
                self.line("}");
            }
            10 if depth > 0 && self.loops < 2 => {
                self.loops += 1;
                let v = ["i", "k"][self.loops - 1];
                let bound = self.rng.gen_range(1..12);
                self.line(&format!("for ({v} = 0; {v} < {}; {v}++) {{", bound));
                self.block(depth - 1);
                self.line("}");
            }
            11 if depth > 0 && self.loops < 2 => {
                self.loops += 1;
                let v = ["i", "k"][self.loops - 1];
                self.line(&format!("{} = 0;", v));
                let bound = self.rng.gen_range(1..10);
                self.line(&format!("while ({} < {}) {{", v, bound));
                self.block(depth - 1);
                self.line(&format!("{v} = {v} + 1;"));
                self.line("}");
            }
            12 => {
                let (d, s) = (self.rng.gen_range(0..4), self.rng.gen_range(0..32));
                self.line(&format!("q = (unsigned char *)&u + {};", d));
                self.line(&format!("*q = ((unsigned char *)arr)[{}];", s));
            }
            _ => {
                let v = self.pick(&SMALL);
                let e = self.expr(2);
                self.line(&format!("{} = {};", v, e));
            }
        }
    }

    fn block(&mut self, depth: u32) {
        self.indent += 1;
        let n = self.rng.gen_range(1..4);
        for _ in 0..n {
            self.stmt(depth);
        }
        self.indent -= 1;
    }
}

/// A random, always-terminating program; equal seeds give equal text.
pub fn program(seed: u64) -> String {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), out: String::new(), indent: 0, loops: 0 };
    g.line(&format!("/* generated program, seed {} */", seed));
    g.line("volatile int in;");
    g.line("int a, b, c, n;");
    g.line("unsigned char uc;");
    g.line("short sh;");
    g.line("unsigned short us;");
    g.line("int arr[8];");
    g.line("union { int i; unsigned short h[2]; unsigned char b[4]; } u;");
    g.line("");
    g.line("void main(void) {");
    g.indent = 1;
    g.line("int i, k;");
    g.line("int *p = &arr[0];");
    g.line("unsigned char *q;");
    for v in INTS {
        let c = g.constant();
        g.line(&format!("{} = {};", v, c));
    }
    let n = g.rng.gen_range(4..10);
    for _ in 0..n {
        g.stmt(2);
    }
    g.indent = 0;
    g.line("}");
    g.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abi::Abi;
    use crate::frontend::{compile, LowerOptions};

    #[test]
    fn generated_programs_compile() {
        for seed in 0..40 {
            let src = program(seed);
            compile(&src, &Abi::default(), &LowerOptions { unroll: 4 }).unwrap_or_else(|e| panic!("{}\n{}", e, src));
        }
        assert_eq!(program(7), program(7));
    }
}
