use crate::error::FrontendError;
use crate::ir::Loc;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i128, IntSuffix),
    Float(f64),
    Char(i128),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct IntSuffix {
    pub unsigned: bool,
    pub long: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "(", ")", "[", "]", "{", "}", ";", ",", ".", "&", "*", "+", "-",
    "~", "!", "/", "%", "<", ">", "^", "|", "?", ":", "=",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if bytes[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }
    while i < bytes.len() {
        let c = bytes[i];
        let loc = Loc { line, col };
        if c.is_ascii_whitespace() {
            advance!(1);
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                advance!(1);
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            advance!(2);
            loop {
                if i + 1 >= bytes.len() {
                    return Err(FrontendError::Syntax { loc, msg: "unterminated comment".into() });
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            continue;
        }
        if c == b'#' {
            return Err(FrontendError::Unsupported { loc, msg: "preprocessor directives".into() });
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                advance!(1);
            }
            toks.push(Token { tok: Tok::Ident(src[start..i].to_string()), loc });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let hex = c == b'0' && matches!(bytes.get(i + 1), Some(b'x') | Some(b'X'));
            if hex {
                advance!(2);
                while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                    advance!(1);
                }
            } else {
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || ((bytes[i] == b'e' || bytes[i] == b'E')
                            && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == b'-' || *d == b'+')))
                {
                    if bytes[i] == b'e' || bytes[i] == b'E' {
                        advance!(1);
                    }
                    advance!(1);
                }
            }
            let text = &src[start..i];
            let is_float = !hex && (text.contains('.') || text.contains('e') || text.contains('E'));
            if is_float {
                let v: f64 = text
                    .parse()
                    .map_err(|_| FrontendError::Syntax { loc, msg: format!("bad number `{}`", text) })?;
                if i < bytes.len() && matches!(bytes[i], b'f' | b'F' | b'l' | b'L') {
                    advance!(1);
                }
                toks.push(Token { tok: Tok::Float(v), loc });
                continue;
            }
            let v = if hex {
                i128::from_str_radix(&text[2..], 16)
            } else if text.len() > 1 && text.starts_with('0') {
                i128::from_str_radix(&text[1..], 8)
            } else {
                text.parse()
            }
            .map_err(|_| FrontendError::Syntax { loc, msg: format!("bad number `{}`", text) })?;
            let mut suffix = IntSuffix::default();
            while i < bytes.len() && matches!(bytes[i], b'u' | b'U' | b'l' | b'L') {
                if matches!(bytes[i], b'u' | b'U') {
                    suffix.unsigned = true;
                } else {
                    suffix.long += 1;
                }
                advance!(1);
            }
            toks.push(Token { tok: Tok::Int(v, suffix), loc });
            continue;
        }
        if c == b'\'' {
            advance!(1);
            let v = if i < bytes.len() && bytes[i] == b'\\' {
                advance!(1);
                let e = *bytes.get(i).ok_or(FrontendError::Syntax { loc, msg: "bad character".into() })?;
                advance!(1);
                match e {
                    b'n' => 10,
                    b't' => 9,
                    b'r' => 13,
                    b'0' => 0,
                    b'\\' => 92,
                    b'\'' => 39,
                    _ => return Err(FrontendError::Syntax { loc, msg: "unknown escape".into() }),
                }
            } else {
                let v = *bytes.get(i).ok_or(FrontendError::Syntax { loc, msg: "bad character".into() })? as i128;
                advance!(1);
                v
            };
            if i >= bytes.len() || bytes[i] != b'\'' {
                return Err(FrontendError::Syntax { loc, msg: "unterminated character constant".into() });
            }
            advance!(1);
            toks.push(Token { tok: Tok::Char(v), loc });
            continue;
        }
        if c == b'"' {
            return Err(FrontendError::Unsupported { loc, msg: "string literals".into() });
        }
        match PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                advance!(p.len());
                toks.push(Token { tok: Tok::Punct(p), loc });
            }
            None => {
                return Err(FrontendError::Syntax { loc, msg: format!("unexpected character `{}`", c as char) });
            }
        }
    }
    toks.push(Token { tok: Tok::Eof, loc: Loc { line, col } });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_basic_tokens() {
        let toks = tokenize("int x = 0x1F; /* c */ y->z <<= 3u; // end").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("int".into()));
        assert_eq!(kinds[3], Tok::Int(31, IntSuffix::default()));
        assert_eq!(kinds[6], Tok::Punct("->"));
        assert_eq!(kinds[8], Tok::Punct("<<="));
        assert_eq!(kinds[9], Tok::Int(3, IntSuffix { unsigned: true, long: 0 }));
        assert_eq!(toks[5].loc, Loc { line: 1, col: 23 });
    }

    #[test]
    fn rejects_preprocessor() {
        assert!(tokenize("#include <x.h>").is_err());
    }
}
