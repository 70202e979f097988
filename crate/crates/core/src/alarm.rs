use std::fmt;

use serde::{Deserialize, Serialize};

/// Category of a run-time error, shared by concrete error events and
/// abstract alarms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlarmKind {
    Overflow,
    DivByZero,
    OutOfBound,
    Misaligned,
    InvalidPointer,
    NullDeref,
    CrossBaseArith,
    UninitRead,
}

impl AlarmKind {
    pub const ALL: [AlarmKind; 8] = [
        AlarmKind::Overflow,
        AlarmKind::DivByZero,
        AlarmKind::OutOfBound,
        AlarmKind::Misaligned,
        AlarmKind::InvalidPointer,
        AlarmKind::NullDeref,
        AlarmKind::CrossBaseArith,
        AlarmKind::UninitRead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlarmKind::Overflow => "overflow",
            AlarmKind::DivByZero => "div-by-zero",
            AlarmKind::OutOfBound => "out-of-bound",
            AlarmKind::Misaligned => "misaligned",
            AlarmKind::InvalidPointer => "invalid-pointer",
            AlarmKind::NullDeref => "null-deref",
            AlarmKind::CrossBaseArith => "cross-base-arith",
            AlarmKind::UninitRead => "uninit-read",
        }
    }

    pub fn from_name(s: &str) -> Option<AlarmKind> {
        AlarmKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for AlarmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of alarm kinds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlarmSet(u16);

impl AlarmSet {
    pub const EMPTY: AlarmSet = AlarmSet(0);

    pub fn single(k: AlarmKind) -> AlarmSet {
        AlarmSet(1 << k as u16)
    }

    pub fn add(&mut self, k: AlarmKind) {
        self.0 |= 1 << k as u16;
    }

    pub fn union(self, o: AlarmSet) -> AlarmSet {
        AlarmSet(self.0 | o.0)
    }

    pub fn extend(&mut self, o: AlarmSet) {
        self.0 |= o.0;
    }

    pub fn contains(self, k: AlarmKind) -> bool {
        self.0 & (1 << k as u16) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = AlarmKind> {
        AlarmKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}
