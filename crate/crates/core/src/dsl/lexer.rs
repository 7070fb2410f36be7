use super::{ParseError, SourceSpan};
use crate::formula::AGENT_PLACEHOLDER;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    And,
    Or,
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Semi,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("`{s}`"),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Not => "`!`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. `#` starts a comment running to the end of the
/// line. Unknown characters are reported and skipped so that lexing always
/// reaches the end of the input.
pub(crate) fn lex(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let placeholder: Vec<char> = AGENT_PLACEHOLDER.chars().collect();
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let span = |len: usize| SourceSpan::new(start.0, start.1, len);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let single = match c {
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '!' => Some(Tok::Not),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token { tok, span: span(1) });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            loop {
                if i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                } else if chars[i..].starts_with(&placeholder) {
                    s.push_str(AGENT_PLACEHOLDER);
                    i += placeholder.len();
                } else {
                    break;
                }
            }
            let len = s.chars().count();
            col += len;
            tokens.push(Token { tok: Tok::Ident(s), span: span(len) });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                s.push(chars[i]);
                i += 1;
            }
            let len = s.chars().count();
            col += len;
            tokens.push(Token { tok: Tok::Number(s), span: span(len) });
            continue;
        }
        errors.push(ParseError::new(span(1), "a token", format!("`{c}`")));
        i += 1;
        col += 1;
    }
    tokens.push(Token { tok: Tok::Eof, span: SourceSpan::new(line, col, 1) });
    (tokens, errors)
}
