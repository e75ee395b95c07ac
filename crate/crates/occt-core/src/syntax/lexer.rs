//! Hand-rolled lexer with `(* ... *)` comments (nesting allowed).

use crate::diag::{Span, TypeError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Char(char),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    DotDot,
    Arrow,
    Eq,
    EqQuestion,
    Bar,
    Amp,
    Tilde,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, TypeError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! err {
        ($span:expr, $($arg:tt)*) => {
            return Err(TypeError::Syntax { span: $span, message: format!($($arg)*) })
        };
    }
    while i < chars.len() {
        let start = Span::new(line, col, line, col + 1);
        let c = chars[i];
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => advance(&mut i, &mut line, &mut col),
            '(' if i + 1 < chars.len() && chars[i + 1] == '*' => {
                let mut depth = 0;
                loop {
                    if i + 1 >= chars.len() {
                        err!(start, "unterminated comment");
                    }
                    if chars[i] == '(' && chars[i + 1] == '*' {
                        depth += 1;
                        advance(&mut i, &mut line, &mut col);
                        advance(&mut i, &mut line, &mut col);
                    } else if chars[i] == '*' && chars[i + 1] == ')' {
                        depth -= 1;
                        advance(&mut i, &mut line, &mut col);
                        advance(&mut i, &mut line, &mut col);
                        if depth == 0 {
                            break;
                        }
                    } else {
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            '(' => {
                out.push(Token {
                    tok: Tok::LParen,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            ')' => {
                out.push(Token {
                    tok: Tok::RParen,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            '{' => {
                out.push(Token {
                    tok: Tok::LBrace,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            '}' => {
                out.push(Token {
                    tok: Tok::RBrace,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            ',' => {
                out.push(Token {
                    tok: Tok::Comma,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            ';' => {
                out.push(Token {
                    tok: Tok::Semi,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            ':' => {
                out.push(Token {
                    tok: Tok::Colon,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            '.' => {
                if i + 1 < chars.len() && chars[i + 1] == '.' {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    out.push(Token {
                        tok: Tok::DotDot,
                        span: Span::new(start.line, start.col, line, col),
                    });
                } else {
                    out.push(Token {
                        tok: Tok::Dot,
                        span: start,
                    });
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    out.push(Token {
                        tok: Tok::Arrow,
                        span: Span::new(start.line, start.col, line, col),
                    });
                } else if i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    advance(&mut i, &mut line, &mut col);
                    let mut n: i64 = 0;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        n = n * 10 + (chars[i] as i64 - '0' as i64);
                        advance(&mut i, &mut line, &mut col);
                    }
                    out.push(Token {
                        tok: Tok::Int(-n),
                        span: Span::new(start.line, start.col, line, col),
                    });
                } else {
                    err!(start, "unexpected character `-`");
                }
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '?' {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    out.push(Token {
                        tok: Tok::EqQuestion,
                        span: Span::new(start.line, start.col, line, col),
                    });
                } else {
                    out.push(Token {
                        tok: Tok::Eq,
                        span: start,
                    });
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '|' => {
                out.push(Token {
                    tok: Tok::Bar,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            '&' => {
                out.push(Token {
                    tok: Tok::Amp,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            '~' => {
                out.push(Token {
                    tok: Tok::Tilde,
                    span: start,
                });
                advance(&mut i, &mut line, &mut col);
            }
            '\'' => {
                advance(&mut i, &mut line, &mut col);
                if i >= chars.len() {
                    err!(start, "unterminated character literal");
                }
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col);
                if i >= chars.len() || chars[i] != '\'' {
                    err!(start, "unterminated character literal");
                }
                advance(&mut i, &mut line, &mut col);
                out.push(Token {
                    tok: Tok::Char(ch),
                    span: Span::new(start.line, start.col, line, col),
                });
            }
            '"' => {
                advance(&mut i, &mut line, &mut col);
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        err!(start, "unterminated string literal");
                    }
                    if chars[i] == '"' {
                        advance(&mut i, &mut line, &mut col);
                        break;
                    }
                    s.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    span: Span::new(start.line, start.col, line, col),
                });
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    n = n * 10 + (chars[i] as i64 - '0' as i64);
                    advance(&mut i, &mut line, &mut col);
                }
                out.push(Token {
                    tok: Tok::Int(n),
                    span: Span::new(start.line, start.col, line, col),
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
                out.push(Token {
                    tok: Tok::Ident(s),
                    span: Span::new(start.line, start.col, line, col),
                });
            }
            other => err!(start, "unexpected character `{other}`"),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col, line, col),
    });
    Ok(out)
}
