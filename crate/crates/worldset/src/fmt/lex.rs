//! Tokenizer for the document, condition, and query grammars.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Quoted(String),
    Bottom,
    Question,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Eq,
    Neq,
    Amp,
    Pipe,
    Bang,
    Star,
    Plus,
    Minus,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Quoted(s) => write!(f, "string \"{s}\""),
            Tok::Bottom => write!(f, "`_|_`"),
            Tok::Question => write!(f, "`?`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Neq => write!(f, "`!=`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

pub fn lex(input: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if bytes[i] == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < bytes.len() {
        let pos = Pos { line, col };
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => bump!(),
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    bump!();
                }
            }
            b'_' if bytes.get(i + 1) == Some(&b'|') && bytes.get(i + 2) == Some(&b'_') => {
                bump!();
                bump!();
                bump!();
                out.push(Token { tok: Tok::Bottom, pos });
            }
            b'"' => {
                bump!();
                let start = i;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\n' {
                        return Err(LexError { pos, message: "unterminated string".into() });
                    }
                    bump!();
                }
                if i == bytes.len() {
                    return Err(LexError { pos, message: "unterminated string".into() });
                }
                let s = input[start..i].to_string();
                bump!();
                out.push(Token { tok: Tok::Quoted(s), pos });
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    bump!();
                }
                out.push(Token { tok: Tok::Number(input[start..i].to_string()), pos });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    bump!();
                }
                out.push(Token { tok: Tok::Ident(input[start..i].to_string()), pos });
            }
            b'?' => {
                bump!();
                out.push(Token { tok: Tok::Question, pos });
            }
            b'(' => {
                bump!();
                out.push(Token { tok: Tok::LParen, pos });
            }
            b')' => {
                bump!();
                out.push(Token { tok: Tok::RParen, pos });
            }
            b'{' => {
                bump!();
                out.push(Token { tok: Tok::LBrace, pos });
            }
            b'}' => {
                bump!();
                out.push(Token { tok: Tok::RBrace, pos });
            }
            b'[' => {
                bump!();
                out.push(Token { tok: Tok::LBracket, pos });
            }
            b']' => {
                bump!();
                out.push(Token { tok: Tok::RBracket, pos });
            }
            b',' => {
                bump!();
                out.push(Token { tok: Tok::Comma, pos });
            }
            b'.' => {
                bump!();
                out.push(Token { tok: Tok::Dot, pos });
            }
            b'=' => {
                bump!();
                out.push(Token { tok: Tok::Eq, pos });
            }
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                bump!();
                bump!();
                out.push(Token { tok: Tok::Neq, pos });
            }
            b'!' => {
                bump!();
                out.push(Token { tok: Tok::Bang, pos });
            }
            b'&' => {
                bump!();
                out.push(Token { tok: Tok::Amp, pos });
            }
            b'|' => {
                bump!();
                out.push(Token { tok: Tok::Pipe, pos });
            }
            b'*' => {
                bump!();
                out.push(Token { tok: Tok::Star, pos });
            }
            b'+' => {
                bump!();
                out.push(Token { tok: Tok::Plus, pos });
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                bump!();
                bump!();
                out.push(Token { tok: Tok::Arrow, pos });
            }
            b'-' => {
                bump!();
                out.push(Token { tok: Tok::Minus, pos });
            }
            other => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
