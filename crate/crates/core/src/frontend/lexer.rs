//! Tokenizer for `.alg` programs.

use std::fmt;

use super::{Diagnostic, Pos, SourceProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Bit,
    Int,
    Void,
    If,
    Else,
    For,
    Return,
    Assert,
    CoreVars,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        Some(match s {
            "bit" => Keyword::Bit,
            "int" => Keyword::Int,
            "void" => Keyword::Void,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "for" => Keyword::For,
            "return" => Keyword::Return,
            "assert" => Keyword::Assert,
            "core_vars" => Keyword::CoreVars,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attribute {
    In,
    Out,
    Mem,
}

impl Attribute {
    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::In => "__in",
            Attribute::Out => "__out",
            Attribute::Mem => "__mem",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Keyword(Keyword),
    Attribute(Attribute),
    /// Operators and punctuation share one variant; the lexeme identifies them.
    Op(&'static str),
    Punct(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub pos: Pos,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Int(v) => write!(f, "integer `{v}`"),
            TokenKind::Keyword(k) => write!(f, "keyword `{}`", format!("{k:?}").to_lowercase()),
            TokenKind::Attribute(a) => write!(f, "attribute `{}`", a.as_str()),
            TokenKind::Op(o) => write!(f, "`{o}`"),
            TokenKind::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

// Longest match first.
const OPERATORS: &[&str] = &[
    "<<=", ">>=", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++", "--", "^=", "&=", "|=",
    "+=", "-=", "!", "~", "&", "|", "^", "<", ">", "+", "-", "*", "/", "%", "=",
];

const PUNCT: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', ':'];

/// Splits the program text into tokens. Every lexical error is collected;
/// the token list is only returned when there are none.
pub fn tokenize(src: &SourceProgram) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lx = Lexer {
        chars: src.text.chars().collect(),
        idx: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    while let Some(res) = lx.next_token() {
        match res {
            Ok(t) => tokens.push(t),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(tokens)
    } else {
        Err(diags)
    }
}

struct Lexer {
    chars: Vec<char>,
    idx: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.idx + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.idx).copied()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    /// Skips whitespace and comments. An unterminated block comment is reported
    /// at its opening position.
    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
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
                    let start = self.pos();
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
                            (None, _) => {
                                return Err(Diagnostic::error("unterminated block comment", start));
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Option<Result<Token, Diagnostic>> {
        if let Err(d) = self.skip_trivia() {
            return Some(Err(d));
        }
        let start = self.pos();
        let c = self.peek(0)?;

        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = self.peek(0) {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            let kind = match s.as_str() {
                "__in" => TokenKind::Attribute(Attribute::In),
                "__out" => TokenKind::Attribute(Attribute::Out),
                "__mem" => TokenKind::Attribute(Attribute::Mem),
                _ => match Keyword::from_ident(&s) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(s.clone()),
                },
            };
            return Some(Ok(Token { kind, lexeme: s, pos: start }));
        }

        if c.is_ascii_digit() {
            return Some(self.number(start));
        }

        for op in OPERATORS {
            if op.chars().enumerate().all(|(i, oc)| self.peek(i) == Some(oc)) {
                for _ in 0..op.len() {
                    self.bump();
                }
                return Some(Ok(Token {
                    kind: TokenKind::Op(op),
                    lexeme: op.to_string(),
                    pos: start,
                }));
            }
        }

        if PUNCT.contains(&c) {
            self.bump();
            return Some(Ok(Token {
                kind: TokenKind::Punct(c),
                lexeme: c.to_string(),
                pos: start,
            }));
        }

        self.bump();
        Some(Err(Diagnostic::error(
            format!("illegal character {c:?}"),
            start,
        )))
    }

    fn number(&mut self, start: Pos) -> Result<Token, Diagnostic> {
        let mut lexeme = String::new();
        let radix = match (self.peek(0), self.peek(1)) {
            (Some('0'), Some('x' | 'X')) => 16,
            (Some('0'), Some('b' | 'B')) => 2,
            _ => 10,
        };
        if radix != 10 {
            lexeme.push(self.bump().unwrap());
            lexeme.push(self.bump().unwrap());
        }
        let mut digits = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' {
                lexeme.push(c);
                if c != '_' {
                    digits.push(c);
                }
                self.bump();
            } else {
                break;
            }
        }
        let value = u64::from_str_radix(&digits, radix)
            .ok()
            .and_then(|v| i64::try_from(v).ok())
            .ok_or_else(|| Diagnostic::error(format!("invalid integer literal `{lexeme}`"), start))?;
        Ok(Token {
            kind: TokenKind::Int(value),
            lexeme,
            pos: start,
        })
    }
}
