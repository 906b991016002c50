use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    At,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    DotDot,
    Colon,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Int(n) => n.to_string(),
            Tok::Eq => "=".into(),
            Tok::Ne => "!=".into(),
            Tok::Le => "<=".into(),
            Tok::Lt => "<".into(),
            Tok::Ge => ">=".into(),
            Tok::Gt => ">".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::At => "@".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::Comma => ",".into(),
            Tok::Dot => ".".into(),
            Tok::DotDot => "..".into(),
            Tok::Colon => ":".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits theory text into tokens. `%` starts a comment running to end of line.
///
/// Identifiers may embed template placeholders such as `x_{P}_1`; the braces
/// stay part of the identifier until template expansion replaces them.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n: i64 = s
                    .parse()
                    .map_err(|_| ParseError::new(tl, tc, format!("integer literal `{s}` out of range")))?;
                col += i - start;
                out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            }
            c if is_ident_start(c) || (c == '{' && placeholder_len(&chars, i).is_some()) => {
                let start = i;
                loop {
                    if i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    } else if let Some(n) = placeholder_len(&chars, i) {
                        i += n;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            }
            _ => {
                let next = chars.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    ('!', Some('=')) => (Tok::Ne, 2),
                    ('<', Some('>')) => (Tok::Ne, 2),
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    ('.', Some('.')) => (Tok::DotDot, 2),
                    ('=', _) => (Tok::Eq, 1),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', _) => (Tok::Gt, 1),
                    ('+', _) => (Tok::Plus, 1),
                    ('-', _) => (Tok::Minus, 1),
                    ('*', _) => (Tok::Star, 1),
                    ('/', _) => (Tok::Slash, 1),
                    ('@', _) => (Tok::At, 1),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    ('[', _) => (Tok::LBracket, 1),
                    (']', _) => (Tok::RBracket, 1),
                    ('{', _) => (Tok::LBrace, 1),
                    ('}', _) => (Tok::RBrace, 1),
                    (',', _) => (Tok::Comma, 1),
                    ('.', _) => (Tok::Dot, 1),
                    (':', _) => (Tok::Colon, 1),
                    _ => return Err(ParseError::new(tl, tc, format!("unexpected character `{c}`"))),
                };
                push(tok, len, &mut i, &mut col);
            }
        }
    }
    Ok(out)
}

/// Length of a `{NAME}` placeholder starting at `i`, if there is one.
fn placeholder_len(chars: &[char], i: usize) -> Option<usize> {
    if chars.get(i) != Some(&'{') {
        return None;
    }
    let mut j = i + 1;
    if !chars.get(j).is_some_and(|c| is_ident_start(*c)) {
        return None;
    }
    while chars.get(j).is_some_and(|c| is_ident_char(*c)) {
        j += 1;
    }
    (chars.get(j) == Some(&'}')).then_some(j + 1 - i)
}
