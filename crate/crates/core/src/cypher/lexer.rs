use super::diag::{DiagKind, Diagnostics};
use super::ast::Span;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Backtick-quoted identifier; never a keyword.
    Quoted(String),
    Str(String),
    /// Magnitude only; a leading `-` is handled by the parser.
    Int(u64),
    Float(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    Pipe,
    Minus,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Neq,
    Star,
    Semicolon,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Quoted(s) => format!("`{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Int(_) | Tok::Float(_) => "number".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Eq => "'='".into(),
            Tok::Neq => "'<>'".into(),
            Tok::Star => "'*'".into(),
            Tok::Semicolon => "';'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostics> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |at: usize, msg: String| Diagnostics::new(DiagKind::Lex, src, at, msg);
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(err(start, "unterminated block comment".into()));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        let single = |t: Tok| Some((t, 1));
        let simple = match c {
            b'(' => single(Tok::LParen),
            b')' => single(Tok::RParen),
            b'[' => single(Tok::LBracket),
            b']' => single(Tok::RBracket),
            b'{' => single(Tok::LBrace),
            b'}' => single(Tok::RBrace),
            b':' => single(Tok::Colon),
            b',' => single(Tok::Comma),
            b'|' => single(Tok::Pipe),
            b'-' => single(Tok::Minus),
            b'*' => single(Tok::Star),
            b';' => single(Tok::Semicolon),
            b'=' => single(Tok::Eq),
            b'>' if bytes.get(i + 1) == Some(&b'=') => Some((Tok::Ge, 2)),
            b'>' => single(Tok::Gt),
            b'<' if bytes.get(i + 1) == Some(&b'>') => Some((Tok::Neq, 2)),
            b'<' if bytes.get(i + 1) == Some(&b'=') => Some((Tok::Le, 2)),
            b'<' => single(Tok::Lt),
            b'.' if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => single(Tok::Dot),
            _ => None,
        };
        if let Some((tok, len)) = simple {
            i += len;
            out.push(Token { tok, span: Span::new(start, i) });
            continue;
        }
        if c == b'`' {
            let mut name = String::new();
            i += 1;
            loop {
                match src[i..].chars().next() {
                    None => return Err(err(start, "unterminated backtick identifier".into())),
                    Some('`') if bytes.get(i + 1) == Some(&b'`') => {
                        name.push('`');
                        i += 2;
                    }
                    Some('`') => {
                        i += 1;
                        break;
                    }
                    Some(ch) => {
                        name.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            if name.is_empty() {
                return Err(err(start, "empty backtick identifier".into()));
            }
            out.push(Token { tok: Tok::Quoted(name), span: Span::new(start, i) });
            continue;
        }
        if c == b'\'' || c == b'"' {
            let (s, end) = lex_string(src, i, c as char).map_err(|(at, m)| err(at, m))?;
            i = end;
            out.push(Token { tok: Tok::Str(s), span: Span::new(start, i) });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let (tok, end) = lex_number(src, i).map_err(|(at, m)| err(at, m))?;
            i = end;
            out.push(Token { tok, span: Span::new(start, i) });
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        if ch.is_alphabetic() || ch == '_' {
            while let Some(ch) = src[i..].chars().next() {
                if ch.is_alphanumeric() || ch == '_' {
                    i += ch.len_utf8();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), span: Span::new(start, i) });
            continue;
        }
        return Err(err(start, format!("unexpected character '{ch}'")));
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(src.len(), src.len()) });
    Ok(out)
}

fn lex_string(src: &str, start: usize, quote: char) -> Result<(String, usize), (usize, String)> {
    let mut s = String::new();
    let mut chars = src[start + 1..].char_indices();
    while let Some((off, ch)) = chars.next() {
        let at = start + 1 + off;
        if ch == quote {
            return Ok((s, at + 1));
        }
        if ch != '\\' {
            s.push(ch);
            continue;
        }
        let Some((_, esc)) = chars.next() else { break };
        match esc {
            'n' => s.push('\n'),
            't' => s.push('\t'),
            'r' => s.push('\r'),
            'b' => s.push('\u{8}'),
            'f' => s.push('\u{c}'),
            '\\' | '\'' | '"' => s.push(esc),
            'u' => {
                let hex: String = (0..4).filter_map(|_| chars.next().map(|(_, h)| h)).collect();
                let decoded = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32);
                match decoded {
                    Some(c) if hex.len() == 4 => s.push(c),
                    _ => return Err((at, format!("invalid unicode escape '\\u{hex}'"))),
                }
            }
            other => return Err((at, format!("unknown escape sequence '\\{other}'"))),
        }
    }
    Err((start, "unterminated string literal".into()))
}

fn lex_number(src: &str, start: usize) -> Result<(Tok, usize), (usize, String)> {
    let bytes = src.as_bytes();
    let mut i = start;
    let digits = |i: &mut usize| {
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    digits(&mut i);
    let mut is_float = false;
    if i < bytes.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
        is_float = true;
        i += 1;
        digits(&mut i);
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            is_float = true;
            i = j;
            digits(&mut i);
        }
    }
    if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
        return Err((start, format!("malformed number '{}'", &src[start..=i])));
    }
    let text = &src[start..i];
    let tok = if is_float {
        let v: f64 = text.parse().map_err(|_| (start, format!("malformed number '{text}'")))?;
        if !v.is_finite() {
            return Err((start, format!("number out of range '{text}'")));
        }
        Tok::Float(v)
    } else {
        Tok::Int(text.parse().map_err(|_| (start, format!("integer out of range '{text}'")))?)
    };
    Ok((tok, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn backtick_identifier_is_one_token() {
        let t = toks("-[:`-compound_classified_as_drug_class->`]->");
        assert_eq!(
            t,
            vec![
                Tok::Minus,
                Tok::LBracket,
                Tok::Colon,
                Tok::Quoted("-compound_classified_as_drug_class->".into()),
                Tok::RBracket,
                Tok::Minus,
                Tok::Gt,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("// Top Beta Blocker\nMATCH /* x */ (n)"), toks("MATCH (n)"));
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(toks("5 2.5 1e3 'a\\'b' \"c\""), vec![
            Tok::Int(5),
            Tok::Float(2.5),
            Tok::Float(1000.0),
            Tok::Str("a'b".into()),
            Tok::Str("c".into()),
            Tok::Eof
        ]);
    }

    #[test]
    fn errors_carry_offsets() {
        let e = tokenize("MATCH (n) WHERE n.name = 'open").unwrap_err();
        assert_eq!(e.offset, 25);
        let e = tokenize("RETURN 1 + 2").unwrap_err();
        assert_eq!(e.offset, 9);
    }
}
