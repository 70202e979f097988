//! Surface C types and their ABI-driven layout.

use std::fmt;

use crate::abi::Abi;
use crate::scalar::ScalarType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordKind {
    Struct,
    /// An overlay: every alternative starts at offset 0 (`union`).
    Union,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordDef {
    pub kind: RecordKind,
    pub tag: Option<String>,
    pub fields: Vec<(String, CType)>,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncSig {
    pub ret: CType,
    pub params: Vec<CType>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CType {
    Void,
    /// A real scalar type (never `Ptr`; pointers keep their pointee).
    Scalar(ScalarType),
    Pointer(Box<CType>),
    Array(Box<CType>, u64),
    Record(RecordId),
    Function(Box<FuncSig>),
}

impl CType {
    pub fn scalar(&self) -> Option<ScalarType> {
        match self {
            CType::Scalar(t) => Some(*t),
            CType::Pointer(_) => Some(ScalarType::Ptr),
            _ => None,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.scalar().is_some()
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, CType::Scalar(t) if t.is_integer())
    }

    pub fn is_arith(&self) -> bool {
        matches!(self, CType::Scalar(_))
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self, CType::Pointer(_))
    }

    pub fn pointee(&self) -> Option<&CType> {
        match self {
            CType::Pointer(t) => Some(t),
            _ => None,
        }
    }
}

/// Record, overlay and typedef definitions of a program.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypeTable {
    pub records: Vec<RecordDef>,
}

impl TypeTable {
    pub fn record(&self, id: RecordId) -> &RecordDef {
        &self.records[id.0]
    }

    pub fn size_of(&self, t: &CType, abi: &Abi) -> u64 {
        self.size_align(t, abi).0
    }

    pub fn align_of(&self, t: &CType, abi: &Abi) -> u64 {
        self.size_align(t, abi).1
    }

    pub fn size_align(&self, t: &CType, abi: &Abi) -> (u64, u64) {
        match t {
            CType::Void => (1, 1),
            CType::Scalar(s) => (abi.size(*s), abi.align(*s)),
            CType::Pointer(_) => (abi.size(ScalarType::Ptr), abi.align(ScalarType::Ptr)),
            CType::Function(_) => (0, 1),
            CType::Array(e, n) => {
                let (s, a) = self.size_align(e, abi);
                (s * n, a)
            }
            CType::Record(id) => {
                let l = self.record_layout(*id, abi);
                (l.0, l.1)
            }
        }
    }

    /// (size, alignment, field offsets) of a record.
    pub fn record_layout(&self, id: RecordId, abi: &Abi) -> (u64, u64, Vec<u64>) {
        let def = self.record(id);
        let mut offsets = Vec::with_capacity(def.fields.len());
        let mut size = 0u64;
        let mut align = 1u64;
        for (_, ft) in &def.fields {
            let (fs, fa) = self.size_align(ft, abi);
            align = align.max(fa);
            match def.kind {
                RecordKind::Struct => {
                    let off = size.div_ceil(fa) * fa;
                    offsets.push(off);
                    size = off + fs;
                }
                RecordKind::Union => {
                    offsets.push(0);
                    size = size.max(fs);
                }
            }
        }
        let size = size.div_ceil(align) * align;
        (size, align, offsets)
    }

    pub fn field(&self, id: RecordId, name: &str, abi: &Abi) -> Option<(u64, CType)> {
        let def = self.record(id);
        let (_, _, offs) = self.record_layout(id, abi);
        def.fields
            .iter()
            .zip(offs)
            .find(|((n, _), _)| n == name)
            .map(|((_, t), o)| (o, t.clone()))
    }

    pub fn display(&self, t: &CType) -> String {
        match t {
            CType::Void => "void".into(),
            CType::Scalar(s) => s.to_string(),
            CType::Pointer(p) => format!("{}*", self.display(p)),
            CType::Array(e, n) => format!("{}[{}]", self.display(e), n),
            CType::Record(id) => {
                let d = self.record(*id);
                let kw = match d.kind {
                    RecordKind::Struct => "struct",
                    RecordKind::Union => "union",
                };
                match &d.tag {
                    Some(tag) => format!("{} {}", kw, tag),
                    None => format!("{} <anon#{}>", kw, id.0),
                }
            }
            CType::Function(sig) => {
                let ps: Vec<_> = sig.params.iter().map(|p| self.display(p)).collect();
                format!("{}({})", self.display(&sig.ret), ps.join(", "))
            }
        }
    }
}

/// Size and field map of a type: record fields are laid out in
/// declaration order with alignment padding, overlay alternatives all start
/// at offset 0, and the total size is padded to the type's alignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub size: u64,
    pub align: u64,
    /// Dotted field paths (`w.ax`) with their byte offsets, in declaration
    /// order.
    pub fields: Vec<(String, u64)>,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "size {} align {}", self.size, self.align)?;
        for (p, o) in &self.fields {
            write!(f, " {}@{}", p, o)?;
        }
        Ok(())
    }
}

pub fn layout(t: &CType, types: &TypeTable, abi: &Abi) -> Layout {
    fn collect(t: &CType, types: &TypeTable, abi: &Abi, prefix: &str, base: u64, out: &mut Vec<(String, u64)>) {
        if let CType::Record(id) = t {
            let (_, _, offs) = types.record_layout(*id, abi);
            for ((name, ft), off) in types.record(*id).fields.iter().zip(offs) {
                let path = if prefix.is_empty() { name.clone() } else { format!("{}.{}", prefix, name) };
                out.push((path.clone(), base + off));
                collect(ft, types, abi, &path, base + off, out);
            }
        }
    }
    let (size, align) = types.size_align(t, abi);
    let mut fields = Vec::new();
    collect(t, types, abi, "", 0, &mut fields);
    Layout { size, align, fields }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int() -> CType {
        CType::Scalar(ScalarType::Int)
    }

    #[test]
    fn struct_with_array_then_int() {
        // Hand layout: a occupies bytes 0..12 (3 x 4), b follows at 12.
        let mut types = TypeTable::default();
        types.records.push(RecordDef {
            kind: RecordKind::Struct,
            tag: None,
            fields: vec![("a".into(), CType::Array(Box::new(int()), 3)), ("b".into(), int())],
            complete: true,
        });
        let l = layout(&CType::Record(RecordId(0)), &types, &Abi::default());
        assert_eq!(l.size, 16);
        assert_eq!(l.fields, vec![("a".into(), 0), ("b".into(), 12)]);
    }

    #[test]
    fn padding_follows_alignment() {
        let mut types = TypeTable::default();
        types.records.push(RecordDef {
            kind: RecordKind::Struct,
            tag: None,
            fields: vec![
                ("c".into(), CType::Scalar(ScalarType::UChar)),
                ("d".into(), CType::Scalar(ScalarType::Double)),
                ("e".into(), CType::Scalar(ScalarType::UChar)),
            ],
            complete: true,
        });
        let l = layout(&CType::Record(RecordId(0)), &types, &Abi::default());
        // double aligns to 4 under the default ABI.
        assert_eq!(l.fields, vec![("c".into(), 0), ("d".into(), 4), ("e".into(), 12)]);
        assert_eq!(l.size, 16);
    }

    #[test]
    fn scalar_has_no_fields() {
        let l = layout(&CType::Scalar(ScalarType::UChar), &TypeTable::default(), &Abi::default());
        assert_eq!((l.size, l.fields.len()), (1, 0));
    }
}
