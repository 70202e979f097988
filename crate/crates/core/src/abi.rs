//! Application binary interface parameters: scalar sizes, alignments and
//! byte order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AbiError;
use crate::scalar::ScalarType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endian {
    Little,
    Big,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Abi {
    sizes: [u64; 14],
    aligns: [u64; 14],
    pub endian: Endian,
}

impl Default for Abi {
    /// Little-endian x86 flavour: char=1, short=2, int=long=ptr=4,
    /// long long=8, float=4, double=long double=8, alignof = min(sizeof, 4).
    fn default() -> Self {
        let mut sizes = [0; 14];
        for t in ScalarType::ALL {
            sizes[t.index()] = match t {
                ScalarType::SChar | ScalarType::UChar => 1,
                ScalarType::Short | ScalarType::UShort => 2,
                ScalarType::Int | ScalarType::UInt | ScalarType::Long | ScalarType::ULong => 4,
                ScalarType::LongLong | ScalarType::ULongLong => 8,
                ScalarType::Float => 4,
                ScalarType::Double | ScalarType::LongDouble => 8,
                ScalarType::Ptr => 4,
            };
        }
        let mut aligns = [0; 14];
        for t in ScalarType::ALL {
            aligns[t.index()] = sizes[t.index()].min(4);
        }
        Abi { sizes, aligns, endian: Endian::Little }
    }
}

impl Abi {
    pub fn size(&self, t: ScalarType) -> u64 {
        self.sizes[t.index()]
    }

    pub fn align(&self, t: ScalarType) -> u64 {
        self.aligns[t.index()]
    }

    pub fn set_size(&mut self, t: ScalarType, size: u64) {
        self.sizes[t.index()] = size;
    }

    pub fn set_align(&mut self, t: ScalarType, align: u64) {
        self.aligns[t.index()] = align;
    }

    pub fn bits(&self, t: ScalarType) -> u32 {
        (self.size(t) * 8) as u32
    }

    /// Inclusive value range of an integer type.
    pub fn int_range(&self, t: ScalarType) -> (i128, i128) {
        debug_assert!(t.is_integer());
        let bits = self.bits(t).min(127);
        if t.is_signed() {
            (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1)
        } else {
            (0, (1i128 << bits) - 1)
        }
    }

    /// Largest finite magnitude of a floating-point type.
    pub fn float_max(&self, t: ScalarType) -> f64 {
        if self.size(t) <= 4 {
            f32::MAX as f64
        } else {
            f64::MAX
        }
    }

    /// Rounds a float to the precision of `t` (to nearest).
    pub fn round_float(&self, t: ScalarType, v: f64) -> f64 {
        if self.size(t) <= 4 {
            v as f32 as f64
        } else {
            v
        }
    }

    /// The unsigned integer type whose size equals the pointer size.
    pub fn address_type(&self) -> ScalarType {
        ScalarType::ULong
    }

    /// Maps the `b`-th byte of a value's representation to its significance
    /// (0 = least significant).
    pub fn byte_weight(&self, t: ScalarType, b: u64) -> u64 {
        match self.endian {
            Endian::Little => b,
            Endian::Big => self.size(t) - 1 - b,
        }
    }

    pub fn validate(&self) -> Result<(), AbiError> {
        for t in ScalarType::ALL {
            let s = self.size(t);
            let a = self.align(t);
            if s == 0 {
                return Err(AbiError::Invalid(format!("sizeof.{} must be at least 1", t)));
            }
            if a == 0 || !a.is_power_of_two() {
                return Err(AbiError::Invalid(format!("alignof.{} must be a power of two", t)));
            }
            if s % a != 0 && a % s != 0 {
                return Err(AbiError::Invalid(format!(
                    "alignof.{} must divide sizeof.{} or be a multiple of it",
                    t, t
                )));
            }
            if t.is_integer() && s > 8 {
                return Err(AbiError::Invalid(format!("sizeof.{} larger than 8 is unsupported", t)));
            }
        }
        if self.size(ScalarType::Ptr) != self.size(self.address_type()) {
            return Err(AbiError::Invalid("sizeof.ptr must equal sizeof.ulong".into()));
        }
        Ok(())
    }

    /// Parses a line-oriented `key = value` configuration. Keys not given
    /// keep their default value.
    pub fn parse_config(text: &str) -> Result<Abi, AbiError> {
        let mut abi = Abi::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AbiError::Syntax { line: lineno + 1, msg: "expected `key = value`".into() })?;
            let key = key.trim();
            let value = value.trim();
            if key == "endian" {
                abi.endian = match value {
                    "little" => Endian::Little,
                    "big" => Endian::Big,
                    _ => {
                        return Err(AbiError::Syntax {
                            line: lineno + 1,
                            msg: format!("unknown byte order `{}`", value),
                        })
                    }
                };
                continue;
            }
            let (kind, ty) = key
                .split_once('.')
                .ok_or_else(|| AbiError::UnknownKey(key.to_string()))?;
            let ty = ScalarType::from_name(ty).ok_or_else(|| AbiError::UnknownKey(key.to_string()))?;
            let n: u64 = value.parse().map_err(|_| AbiError::Syntax {
                line: lineno + 1,
                msg: format!("expected a number, found `{}`", value),
            })?;
            match kind {
                "sizeof" => abi.set_size(ty, n),
                "alignof" => abi.set_align(ty, n),
                _ => return Err(AbiError::UnknownKey(key.to_string())),
            }
        }
        abi.validate()?;
        Ok(abi)
    }
}

impl fmt::Display for Abi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let endian = match self.endian {
            Endian::Little => "little",
            Endian::Big => "big",
        };
        write!(f, "{}-endian", endian)?;
        for t in ScalarType::ALL {
            write!(f, " {}={}/{}", t, self.size(t), self.align(t))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_abi_is_valid() {
        let abi = Abi::default();
        abi.validate().unwrap();
        assert_eq!(abi.size(ScalarType::Int), 4);
        assert_eq!(abi.align(ScalarType::Double), 4);
        assert_eq!(abi.int_range(ScalarType::UShort), (0, 65535));
        assert_eq!(abi.int_range(ScalarType::SChar), (-128, 127));
        assert_eq!(abi.int_range(ScalarType::ULongLong).1, u64::MAX as i128);
    }

    #[test]
    fn parses_config() {
        let abi = Abi::parse_config("# comment\nendian = big\nsizeof.int = 2\nalignof.int = 2\n").unwrap();
        assert_eq!(abi.endian, Endian::Big);
        assert_eq!(abi.size(ScalarType::Int), 2);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(matches!(Abi::parse_config("sizeof.foo = 3"), Err(AbiError::UnknownKey(_))));
        assert!(matches!(Abi::parse_config("colour = red"), Err(AbiError::UnknownKey(_))));
        assert!(Abi::parse_config("sizeof.ptr = 8").is_err());
        assert!(Abi::parse_config("alignof.int = 3").is_err());
    }
}
