use std::fmt;

use serde::{Deserialize, Serialize};

/// The scalar types of the input language: ten integer types, three
/// floating-point types and a single untyped pointer type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScalarType {
    SChar,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Float,
    Double,
    LongDouble,
    Ptr,
}

impl ScalarType {
    pub const ALL: [ScalarType; 14] = [
        ScalarType::SChar,
        ScalarType::UChar,
        ScalarType::Short,
        ScalarType::UShort,
        ScalarType::Int,
        ScalarType::UInt,
        ScalarType::Long,
        ScalarType::ULong,
        ScalarType::LongLong,
        ScalarType::ULongLong,
        ScalarType::Float,
        ScalarType::Double,
        ScalarType::LongDouble,
        ScalarType::Ptr,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_integer(self) -> bool {
        !matches!(
            self,
            ScalarType::Float | ScalarType::Double | ScalarType::LongDouble | ScalarType::Ptr
        )
    }

    pub fn is_float(self) -> bool {
        matches!(self, ScalarType::Float | ScalarType::Double | ScalarType::LongDouble)
    }

    pub fn is_real(self) -> bool {
        self != ScalarType::Ptr
    }

    pub fn is_ptr(self) -> bool {
        self == ScalarType::Ptr
    }

    pub fn is_signed(self) -> bool {
        matches!(
            self,
            ScalarType::SChar
                | ScalarType::Short
                | ScalarType::Int
                | ScalarType::Long
                | ScalarType::LongLong
        )
    }

    pub fn is_unsigned(self) -> bool {
        self.is_integer() && !self.is_signed()
    }

    /// Integer conversion rank (0 for char up to 4 for long long).
    pub fn rank(self) -> u8 {
        match self {
            ScalarType::SChar | ScalarType::UChar => 0,
            ScalarType::Short | ScalarType::UShort => 1,
            ScalarType::Int | ScalarType::UInt => 2,
            ScalarType::Long | ScalarType::ULong => 3,
            ScalarType::LongLong | ScalarType::ULongLong => 4,
            ScalarType::Float => 5,
            ScalarType::Double => 6,
            ScalarType::LongDouble => 7,
            ScalarType::Ptr => 8,
        }
    }

    pub fn to_unsigned(self) -> ScalarType {
        match self {
            ScalarType::SChar => ScalarType::UChar,
            ScalarType::Short => ScalarType::UShort,
            ScalarType::Int => ScalarType::UInt,
            ScalarType::Long => ScalarType::ULong,
            ScalarType::LongLong => ScalarType::ULongLong,
            t => t,
        }
    }

    pub fn to_signed(self) -> ScalarType {
        match self {
            ScalarType::UChar => ScalarType::SChar,
            ScalarType::UShort => ScalarType::Short,
            ScalarType::UInt => ScalarType::Int,
            ScalarType::ULong => ScalarType::Long,
            ScalarType::ULongLong => ScalarType::LongLong,
            t => t,
        }
    }

    /// Short name used in dumps, traces and ABI configuration keys.
    pub fn name(self) -> &'static str {
        match self {
            ScalarType::SChar => "schar",
            ScalarType::UChar => "uchar",
            ScalarType::Short => "short",
            ScalarType::UShort => "ushort",
            ScalarType::Int => "int",
            ScalarType::UInt => "uint",
            ScalarType::Long => "long",
            ScalarType::ULong => "ulong",
            ScalarType::LongLong => "llong",
            ScalarType::ULongLong => "ullong",
            ScalarType::Float => "float",
            ScalarType::Double => "double",
            ScalarType::LongDouble => "ldouble",
            ScalarType::Ptr => "ptr",
        }
    }

    pub fn from_name(name: &str) -> Option<ScalarType> {
        ScalarType::ALL.iter().copied().find(|t| t.name() == name)
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
