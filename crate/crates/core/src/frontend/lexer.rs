use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::frontend::types::{CType, SourceLoc, TypeKind};
use crate::frontend::FrontendError;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Keyword(&'static str),
    IntLit(i128, CType),
    RealLit(Rational, String, CType),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: SourceLoc,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Keyword(k) => format!("`{k}`"),
            TokenKind::IntLit(v, _) => format!("integer literal {v}"),
            TokenKind::RealLit(_, s, _) => format!("real literal {s}"),
            TokenKind::Punct(p) => format!("`{p}`"),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "int", "char", "short", "long", "signed", "unsigned", "float", "double", "const", "void",
    "if", "else", "while", "do", "for", "break", "continue", "goto", "return", "switch", "case",
    "default", "struct", "union", "enum", "typedef", "sizeof", "static", "extern", "volatile",
    "register", "auto",
];

// Longest first so that maximal munch works by prefix search.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "+", "-", "*", "/", "%", "<", ">", "=", "!", "~",
    "&", "|", "^", "?", ":", ";", ",", "(", ")", "{", "}", "[", "]", ".",
];

/// Splits C source into tokens. Comments and whitespace are dropped; a `#`
/// anywhere outside a comment is rejected since there is no preprocessor.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file: Arc::from(file),
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl Lexer {
    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn loc(&self) -> SourceLoc {
        SourceLoc::new(self.file.clone(), self.line, self.col)
    }

    fn err(&self, loc: SourceLoc, message: impl Into<String>) -> FrontendError {
        FrontendError::Lex {
            loc,
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let loc = self.loc();
            let Some(c) = self.peek(0) else {
                out.push(Token {
                    kind: TokenKind::Eof,
                    loc,
                });
                return Ok(out);
            };
            let kind = if c.is_ascii_alphabetic() || c == '_' {
                self.ident()
            } else if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) {
                self.number(&loc)?
            } else if c == '\'' {
                self.char_lit(&loc)?
            } else if c == '#' {
                return Err(self.err(loc, "preprocessor directives are not supported"));
            } else {
                self.punct(&loc)?
            };
            out.push(Token { kind, loc });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let loc = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.err(loc, "unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn ident(&mut self) -> TokenKind {
        let mut s = String::new();
        // `$` is accepted after the first character so that flattened names
        // such as `x$1` in dumps can be read back.
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        match KEYWORDS.iter().find(|k| **k == s) {
            Some(k) => TokenKind::Keyword(k),
            None => TokenKind::Ident(s),
        }
    }

    fn punct(&mut self, loc: &SourceLoc) -> Result<TokenKind, FrontendError> {
        for p in PUNCTS {
            if p.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c)) {
                for _ in 0..p.len() {
                    self.bump();
                }
                return Ok(TokenKind::Punct(p));
            }
        }
        let c = self.peek(0).unwrap_or(' ');
        Err(self.err(loc.clone(), format!("illegal character `{c}`")))
    }

    fn char_lit(&mut self, loc: &SourceLoc) -> Result<TokenKind, FrontendError> {
        self.bump();
        let value = match self.bump() {
            Some('\\') => match self.bump() {
                Some('n') => 10,
                Some('t') => 9,
                Some('r') => 13,
                Some('0') => 0,
                Some('\\') => 92,
                Some('\'') => 39,
                Some('"') => 34,
                _ => return Err(self.err(loc.clone(), "unsupported escape in character literal")),
            },
            Some(c) if c != '\'' && c.is_ascii() => c as i128,
            _ => return Err(self.err(loc.clone(), "malformed character literal")),
        };
        if self.bump() != Some('\'') {
            return Err(self.err(loc.clone(), "unterminated character literal"));
        }
        Ok(TokenKind::IntLit(value, CType::INT))
    }

    fn number(&mut self, loc: &SourceLoc) -> Result<TokenKind, FrontendError> {
        let start = self.pos;
        let hex = self.peek(0) == Some('0') && matches!(self.peek(1), Some('x' | 'X'));
        if hex {
            self.bump();
            self.bump();
        }
        let mut is_real = false;
        while let Some(c) = self.peek(0) {
            let exp = if hex { false } else { matches!(c, 'e' | 'E') };
            if c.is_ascii_digit() || (hex && c.is_ascii_hexdigit()) {
                self.bump();
            } else if c == '.' && !hex {
                is_real = true;
                self.bump();
            } else if exp {
                is_real = true;
                self.bump();
                if matches!(self.peek(0), Some('+' | '-')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
        let body: String = self.chars[start..self.pos].iter().collect();
        let mut suffix = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' {
                suffix.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let bad = |l: &Self| l.err(loc.clone(), format!("malformed numeric literal `{text}`"));
        if is_real {
            let ty = match suffix.to_ascii_lowercase().as_str() {
                "" => CType::DOUBLE,
                "f" => CType::FLOAT,
                "l" => CType::new(TypeKind::LongDouble, true),
                _ => return Err(bad(self)),
            };
            let value = parse_decimal(&body).ok_or_else(|| bad(self))?;
            return Ok(TokenKind::RealLit(value, text, ty));
        }
        let (digits, radix) = if hex {
            (&body[2..], 16)
        } else if body.len() > 1 && body.starts_with('0') {
            (&body[1..], 8)
        } else {
            (body.as_str(), 10)
        };
        if digits.is_empty() {
            return Err(bad(self));
        }
        let value = i128::from_str_radix(digits, radix).map_err(|_| bad(self))?;
        let lower = suffix.to_ascii_lowercase();
        let unsigned = lower.contains('u');
        let longs = lower.matches('l').count();
        if lower.chars().any(|c| c != 'u' && c != 'l') || lower.matches('u').count() > 1 || longs > 2 {
            return Err(bad(self));
        }
        let ty = literal_type(value, unsigned, longs, radix != 10).ok_or_else(|| bad(self))?;
        Ok(TokenKind::IntLit(value, ty))
    }
}

/// First type in C's literal promotion list that can hold `value`.
fn literal_type(value: i128, unsigned: bool, longs: usize, non_decimal: bool) -> Option<CType> {
    let kinds: &[TypeKind] = match longs {
        0 => &[TypeKind::Int, TypeKind::Long, TypeKind::LongLong],
        1 => &[TypeKind::Long, TypeKind::LongLong],
        _ => &[TypeKind::LongLong],
    };
    for k in kinds {
        let signed_ty = CType::new(*k, true);
        let unsigned_ty = CType::new(*k, false);
        if !unsigned && signed_ty.fits(value) {
            return Some(signed_ty);
        }
        if (unsigned || non_decimal) && unsigned_ty.fits(value) {
            return Some(unsigned_ty);
        }
    }
    None
}

/// Exact rational value of a decimal floating literal such as `3.14` or `1e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let (n, d) = if scale >= 0 {
        (num * num_traits::pow(ten, scale as usize), BigInt::one())
    } else {
        (num, num_traits::pow(ten, (-scale) as usize))
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src, "t.c")
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn simple_assignment() {
        assert_eq!(
            kinds("x = 2;"),
            vec![
                TokenKind::Ident("x".into()),
                TokenKind::Punct("="),
                TokenKind::IntLit(2, CType::INT),
                TokenKind::Punct(";"),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn compound_shift_token() {
        assert_eq!(
            kinds("a >>= 1;"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Punct(">>="),
                TokenKind::IntLit(1, CType::INT),
                TokenKind::Punct(";"),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn float_suffix() {
        let k = kinds("3.14f");
        assert_eq!(
            k[0],
            TokenKind::RealLit(
                Rational::new(314.into(), 100.into()),
                "3.14f".into(),
                CType::FLOAT
            )
        );
    }

    #[test]
    fn integer_suffixes_and_promotion() {
        assert_eq!(kinds("1u")[0], TokenKind::IntLit(1, CType::UINT));
        assert_eq!(kinds("1ul")[0], TokenKind::IntLit(1, CType::new(TypeKind::Long, false)));
        assert_eq!(kinds("2147483648")[0], TokenKind::IntLit(2147483648, CType::LONG));
        assert_eq!(kinds("0xFFFFFFFF")[0], TokenKind::IntLit(4294967295, CType::UINT));
        assert_eq!(kinds("010")[0], TokenKind::IntLit(8, CType::INT));
        assert_eq!(kinds("'a'")[0], TokenKind::IntLit(97, CType::INT));
    }

    #[test]
    fn exponent_literals() {
        assert_eq!(parse_decimal("1e3"), Some(Rational::from_integer(1000.into())));
        assert_eq!(parse_decimal(".5"), Some(Rational::new(1.into(), 2.into())));
        assert_eq!(parse_decimal("2.5e-1"), Some(Rational::new(1.into(), 4.into())));
    }

    #[test]
    fn comments_are_dropped_and_locations_tracked() {
        let toks = tokenize("// c\n/* x\n y */  z", "f.c").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident("z".into()));
        assert_eq!((toks[0].loc.line, toks[0].loc.column), (3, 8));
    }

    #[test]
    fn rejects_illegal_input() {
        assert!(matches!(tokenize("#include <x>", "f.c"), Err(FrontendError::Lex { .. })));
        assert!(matches!(tokenize("x = @;", "f.c"), Err(FrontendError::Lex { .. })));
        assert!(matches!(tokenize("1.5q", "f.c"), Err(FrontendError::Lex { .. })));
        assert!(matches!(tokenize("0x", "f.c"), Err(FrontendError::Lex { .. })));
        assert!(matches!(tokenize("/* open", "f.c"), Err(FrontendError::Lex { .. })));
    }
}
