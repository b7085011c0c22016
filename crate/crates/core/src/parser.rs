//! Precedence-climbing parser for the ASCII formula syntax.
//!
//! Tightest first: prefixes (`~ G H F P [] <>`), `&`, `|`, `=>`, `->`, `<->`.
//! `&` and `|` associate left, the arrows right.

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub offset: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: found {}, expected one of: {}",
            self.offset,
            self.found,
            self.expected.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Meta(char),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Cf,
    G,
    H,
    F,
    P,
    Box,
    Diamond,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom `{s}`"),
            Tok::Meta(c) => format!("metavariable `{c}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Cf => "`=>`".into(),
            Tok::G => "`G`".into(),
            Tok::H => "`H`".into(),
            Tok::F => "`F`".into(),
            Tok::P => "`P`".into(),
            Tok::Box => "`[]`".into(),
            Tok::Diamond => "`<>`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    /// Binding power and right-associativity of binary operators.
    fn binary(&self) -> Option<(u8, bool)> {
        match self {
            Tok::Iff => Some((1, true)),
            Tok::Implies => Some((2, true)),
            Tok::Cf => Some((3, true)),
            Tok::Or => Some((4, false)),
            Tok::And => Some((5, false)),
            _ => None,
        }
    }
}

const EXPECT_OPERAND: &[&str] = &[
    "atom", "`~`", "`G`", "`H`", "`F`", "`P`", "`[]`", "`<>`", "`(`", "`true`", "`false`",
];
const EXPECT_OPERATOR: &[&str] = &["`&`", "`|`", "`=>`", "`->`", "`<->`"];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, found: String, expected: &[&'static str]| ParseError {
        offset,
        found,
        expected: expected.to_vec(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let rest = &text[i..];
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'-' if rest.starts_with("->") => Tok::Implies,
            b'=' if rest.starts_with("=>") => Tok::Cf,
            b'<' if rest.starts_with("<->") => Tok::Iff,
            b'<' if rest.starts_with("<>") => Tok::Diamond,
            b'[' if rest.starts_with("[]") => Tok::Box,
            b'-' => return Err(err(i, "`-`".into(), &["`->`"])),
            b'=' => return Err(err(i, "`=`".into(), &["`=>`"])),
            b'<' => return Err(err(i, "`<`".into(), &["`<->`", "`<>`"])),
            b'[' => return Err(err(i, "`[`".into(), &["`[]`"])),
            b'G' => Tok::G,
            b'H' => Tok::H,
            b'F' => Tok::F,
            b'P' => Tok::P,
            b'A' | b'B' | b'C' => Tok::Meta(c as char),
            b'a'..=b'z' => {
                let len = rest
                    .bytes()
                    .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                    .count();
                let word = &rest[..len];
                i += len;
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            _ => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(err(i, format!("`{ch}`"), EXPECT_OPERAND));
            }
        };
        i += match tok {
            Tok::Implies | Tok::Cf | Tok::Diamond | Tok::Box => 2,
            Tok::Iff => 3,
            _ => 1,
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            found: self.peek().describe(),
            expected,
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while let Some((bp, right)) = self.peek().binary() {
            if bp < min_bp {
                break;
            }
            let op = self.bump();
            let rhs = self.expr(if right { bp } else { bp + 1 })?;
            lhs = match op {
                Tok::And => Formula::and(lhs, rhs),
                Tok::Or => Formula::or(lhs, rhs),
                Tok::Cf => Formula::cf(lhs, rhs),
                Tok::Implies => Formula::implies(lhs, rhs),
                Tok::Iff => Formula::iff(lhs, rhs),
                _ => unreachable!("binary() only accepts binary operators"),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let ctor: fn(Formula) -> Formula = match self.peek() {
            Tok::Not => Formula::not,
            Tok::G => Formula::all_future,
            Tok::H => Formula::all_past,
            Tok::F => Formula::some_future,
            Tok::P => Formula::some_past,
            Tok::Box => Formula::nec,
            Tok::Diamond => Formula::poss,
            _ => return self.primary(),
        };
        self.bump();
        Ok(ctor(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::Meta(c) => {
                self.bump();
                Ok(Formula::Atom(c.to_string()))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::False => {
                self.bump();
                Ok(Formula::bot())
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(0)?;
                if *self.peek() != Tok::RParen {
                    let mut expected = EXPECT_OPERATOR.to_vec();
                    expected.push("`)`");
                    return Err(self.error(expected));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(EXPECT_OPERAND.to_vec())),
        }
    }
}

/// Parse a formula. Derived connectives are expanded into primitives.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = parser.expr(0)?;
    if *parser.peek() != Tok::Eof {
        let mut expected = EXPECT_OPERATOR.to_vec();
        expected.push("end of input");
        return Err(parser.error(expected));
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
