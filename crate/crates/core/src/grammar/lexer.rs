use super::GrammarError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Lexeme {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: &[&str] = &[
    "++", "->", "=>", "{", "}", "(", ")", "[", "]", ";", ":", ",", "=", "!", ".", "|", "_",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Lexeme>, GrammarError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let err = |message: &str| GrammarError::Syntax {
            line: start_line,
            col: start_col,
            message: message.to_string(),
        };
        let tok = if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err("unterminated string literal")),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        match chars.get(i) {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                bump!();
                            }
                            _ => return Err(err("invalid escape in string literal")),
                        }
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            Tok::Str(s)
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut s = String::new();
            if c == '-' {
                s.push(c);
                bump!();
            }
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                s.push(chars[i]);
                bump!();
            }
            Tok::Num(s.parse().map_err(|_| err("malformed number"))?)
        } else if c.is_ascii_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_')) {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                bump!();
            }
            Tok::Ident(s)
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(err(&format!("unexpected character `{c}`")));
            };
            for _ in 0..sym.len() {
                bump!();
            }
            Tok::Sym(sym)
        };
        out.push(Lexeme {
            tok,
            line: start_line,
            col: start_col,
        });
    }
    out.push(Lexeme { tok: Tok::Eof, line, col });
    Ok(out)
}
