//! C scalar types and the fixed machine model used for range checks.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;

/// A position in a source file. Lines and columns start at 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceLoc {
    pub fn new(file: Arc<str>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceLoc { file, line, column }
    }

    /// Placeholder location for synthesized nodes in tests.
    pub fn synthetic() -> Self {
        SourceLoc {
            file: Arc::from("<synthetic>"),
            line: 1,
            column: 1,
        }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Char,
    Short,
    Int,
    Long,
    LongLong,
    Float,
    Double,
    LongDouble,
}

/// A scalar C type. Real kinds are always signed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CType {
    pub kind: TypeKind,
    pub signed: bool,
    pub is_const: bool,
}

impl CType {
    pub const fn new(kind: TypeKind, signed: bool) -> Self {
        CType {
            kind,
            signed,
            is_const: false,
        }
    }

    pub const INT: CType = CType::new(TypeKind::Int, true);
    pub const UINT: CType = CType::new(TypeKind::Int, false);
    pub const LONG: CType = CType::new(TypeKind::Long, true);
    pub const DOUBLE: CType = CType::new(TypeKind::Double, true);
    pub const FLOAT: CType = CType::new(TypeKind::Float, true);
    pub const CHAR: CType = CType::new(TypeKind::Char, true);

    pub fn is_integral(&self) -> bool {
        !self.is_real()
    }

    pub fn is_real(&self) -> bool {
        matches!(
            self.kind,
            TypeKind::Float | TypeKind::Double | TypeKind::LongDouble
        )
    }

    /// Same type with qualifiers dropped.
    pub fn unqualified(self) -> Self {
        CType {
            is_const: false,
            ..self
        }
    }

    /// Width in bits of an integral type (char 8, short 16, int 32, long 64, long long 64).
    pub fn bits(&self) -> Option<u32> {
        match self.kind {
            TypeKind::Char => Some(8),
            TypeKind::Short => Some(16),
            TypeKind::Int => Some(32),
            TypeKind::Long | TypeKind::LongLong => Some(64),
            _ => None,
        }
    }

    /// Inclusive machine range of an integral type as native integers.
    pub fn range_i128(&self) -> Option<(i128, i128)> {
        let bits = self.bits()?;
        if self.signed {
            let half = 1i128 << (bits - 1);
            Some((-half, half - 1))
        } else {
            Some((0, (1i128 << bits) - 1))
        }
    }

    /// Inclusive machine range of an integral type.
    pub fn range(&self) -> Option<(BigInt, BigInt)> {
        self.range_i128()
            .map(|(lo, hi)| (BigInt::from(lo), BigInt::from(hi)))
    }

    pub fn fits(&self, v: i128) -> bool {
        match self.range_i128() {
            Some((lo, hi)) => lo <= v && v <= hi,
            None => true,
        }
    }

    /// Two's-complement / modular conversion of `v` into this integral type.
    pub fn wrap(&self, v: i128) -> i128 {
        let Some(bits) = self.bits() else { return v };
        let modulus = 1i128 << bits;
        let mut r = v.rem_euclid(modulus);
        if self.signed && r >= modulus / 2 {
            r -= modulus;
        }
        r
    }

    fn int_rank(&self) -> u8 {
        match self.kind {
            TypeKind::Char => 1,
            TypeKind::Short => 2,
            TypeKind::Int => 3,
            TypeKind::Long => 4,
            TypeKind::LongLong => 5,
            _ => 0,
        }
    }

    fn real_rank(&self) -> u8 {
        match self.kind {
            TypeKind::Float => 1,
            TypeKind::Double => 2,
            TypeKind::LongDouble => 3,
            _ => 0,
        }
    }

    /// Integer promotion: char and short become int.
    pub fn promote(self) -> CType {
        let t = self.unqualified();
        if t.is_integral() && t.int_rank() < 3 {
            CType::INT
        } else {
            t
        }
    }

    /// C's usual arithmetic conversions for a binary operator.
    pub fn usual_conversion(a: CType, b: CType) -> CType {
        let (a, b) = (a.unqualified(), b.unqualified());
        if a.is_real() || b.is_real() {
            return if a.real_rank() >= b.real_rank() { a } else { b };
        }
        let (a, b) = (a.promote(), b.promote());
        if a == b {
            return a;
        }
        if a.signed == b.signed {
            return if a.int_rank() >= b.int_rank() { a } else { b };
        }
        let (u, s) = if a.signed { (b, a) } else { (a, b) };
        if u.int_rank() >= s.int_rank() {
            return u;
        }
        if s.bits() > u.bits() {
            return s;
        }
        CType::new(s.kind, false)
    }

    /// C spelling, e.g. `unsigned long`.
    pub fn spelling(&self) -> String {
        let base = match self.kind {
            TypeKind::Char => "char",
            TypeKind::Short => "short",
            TypeKind::Int => "int",
            TypeKind::Long => "long",
            TypeKind::LongLong => "long long",
            TypeKind::Float => "float",
            TypeKind::Double => "double",
            TypeKind::LongDouble => "long double",
        };
        let mut s = String::new();
        if self.is_const {
            s.push_str("const ");
        }
        if !self.signed {
            s.push_str("unsigned ");
        }
        s.push_str(base);
        s
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spelling())
    }
}
