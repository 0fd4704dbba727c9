//! Longest-match lexer for MiniOO source text.

use std::fmt;

pub const KEYWORDS: &[&str] = &[
    "class", "extends", "public", "private", "var", "def", "if", "else", "while", "for", "return",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Punct,
    Integer,
    Eof,
}

/// Line and column of the first character of a token, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("illegal character `{ch}` at {pos}")]
pub struct LexError {
    pub ch: char,
    pub pos: Pos,
}

/// Tokenize one source file. Whitespace and `//` line comments are skipped;
/// the result always ends with an eof token.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            let mut ahead = chars.clone();
            ahead.next();
            if ahead.peek() == Some(&'/') {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            return Err(LexError { ch: c, pos });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    word.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            let kind = if KEYWORDS.contains(&word.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            tokens.push(Token { kind, text: word, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_digit() {
                    digits.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: TokenKind::Integer, text: digits, pos });
            continue;
        }
        match c {
            '{' | '}' | '(' | ')' | ';' | ':' | ',' | '.' | '>' | '<' => {
                bump!();
                tokens.push(Token { kind: TokenKind::Punct, text: c.to_string(), pos });
            }
            '=' => {
                bump!();
                // `==` before `=` (longest match)
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push(Token { kind: TokenKind::Punct, text: "==".to_string(), pos });
                } else {
                    tokens.push(Token { kind: TokenKind::Punct, text: "=".to_string(), pos });
                }
            }
            other => return Err(LexError { ch: other, pos }),
        }
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        pos: Pos { line, column },
    });
    Ok(tokens)
}
