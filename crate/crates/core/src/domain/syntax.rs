//! Text grammar shared by domain files, scenario files and LLM answers.
//!
//! ```text
//! conjunction := literal ( '&' literal )*
//! literal     := [ '~' ] ident [ '(' [ term ( ',' term )* ] ')' ]
//! term        := ident | '?' ident
//! action      := ident '(' [ value ( ',' value )* ] ')'
//! value       := term | number unit
//! ```
//!
//! `any_object` is the wildcard term. Whitespace is allowed between tokens.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{BindingValue, Literal, Term, WILDCARD};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    /// 1-based character column.
    pub column: usize,
    pub expected: &'static str,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "column {}: expected {}, found {}",
            self.column, self.expected, self.found
        )
    }
}

/// One value inside an action call, before it is matched against a skill.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueToken {
    Symbol(String),
    Capture(String),
    Quantity { value: f64, unit: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionCall {
    pub skill: String,
    pub args: Vec<ValueToken>,
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.char_indices().collect(),
            pos: 0,
            text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn error(&self, expected: &'static str) -> SyntaxError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(_) => {
                let start = self.chars[self.pos].0;
                let token: String = self.text[start..]
                    .chars()
                    .take_while(|c| !c.is_whitespace() && !matches!(c, ',' | ')' | '(' | '&'))
                    .collect();
                if token.is_empty() {
                    let mut s = String::from("`");
                    s.push(self.peek().unwrap_or(' '));
                    s.push('`');
                    s
                } else {
                    let mut s = String::from("`");
                    s.push_str(&token);
                    s.push('`');
                    s
                }
            }
        };
        SyntaxError {
            column: self.pos + 1,
            expected,
            found,
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.error("identifier")),
        }
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        if self.eat('?') {
            return Ok(Term::Param(self.ident()?));
        }
        let name = self.ident()?;
        if name == WILDCARD {
            Ok(Term::Wildcard)
        } else {
            Ok(Term::Object(name))
        }
    }

    fn literal(&mut self) -> Result<Literal, SyntaxError> {
        self.skip_ws();
        let negated = self.eat('~');
        self.skip_ws();
        let predicate = self.ident()?;
        self.skip_ws();
        let mut args = Vec::new();
        if self.eat('(') {
            self.skip_ws();
            if !self.eat(')') {
                loop {
                    self.skip_ws();
                    args.push(self.term()?);
                    self.skip_ws();
                    if self.eat(',') {
                        continue;
                    }
                    if self.eat(')') {
                        break;
                    }
                    return Err(self.error("`,` or `)`"));
                }
            }
            self.skip_ws();
        }
        Ok(Literal {
            predicate,
            args,
            negated,
        })
    }

    fn number(&mut self) -> Option<f64> {
        let start = self.pos;
        let mut s = String::new();
        if matches!(self.peek(), Some('-' | '+')) {
            s.push(self.bump().unwrap_or('+'));
        }
        let mut digits = 0;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '.' {
                s.push(c);
                self.pos += 1;
                digits += usize::from(c.is_ascii_digit());
            } else {
                break;
            }
        }
        if digits == 0 {
            self.pos = start;
            return None;
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.pos = start;
                None
            }
        }
    }

    fn unit(&mut self) -> Result<String, SyntaxError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphabetic() || c == '/' || c == '%' || c == '°' {
                out.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if out.is_empty() {
            Err(self.error("unit"))
        } else {
            Ok(out)
        }
    }

    fn value(&mut self) -> Result<ValueToken, SyntaxError> {
        if let Some(value) = self.number() {
            self.skip_ws();
            let unit = self.unit()?;
            return Ok(ValueToken::Quantity { value, unit });
        }
        if self.eat('?') {
            return Ok(ValueToken::Capture(self.ident()?));
        }
        Ok(ValueToken::Symbol(self.ident()?))
    }
}

/// Parses a single literal; trailing input is an error.
pub fn parse_literal(text: &str) -> Result<Literal, SyntaxError> {
    let mut cur = Cursor::new(text);
    let lit = cur.literal()?;
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error("end of literal"));
    }
    Ok(lit)
}

/// Parses `lit & lit & ...`. An empty string is an error.
pub fn parse_conjunction(text: &str) -> Result<Vec<Literal>, SyntaxError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        out.push(cur.literal()?);
        cur.skip_ws();
        if cur.eat('&') {
            continue;
        }
        if cur.at_end() {
            return Ok(out);
        }
        return Err(cur.error("`&` or end of answer"));
    }
}

/// Parses a call such as `place(red_cube, table)` or `PickUp(Egg, 5.3 N)`.
pub fn parse_action_call(text: &str) -> Result<ActionCall, SyntaxError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    let skill = cur.ident()?;
    cur.skip_ws();
    let mut args = Vec::new();
    if cur.eat('(') {
        cur.skip_ws();
        if !cur.eat(')') {
            loop {
                cur.skip_ws();
                args.push(cur.value()?);
                cur.skip_ws();
                if cur.eat(',') {
                    continue;
                }
                if cur.eat(')') {
                    break;
                }
                return Err(cur.error("`,` or `)`"));
            }
        }
    }
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error("end of action"));
    }
    Ok(ActionCall { skill, args })
}

/// Parses a bare parameter value: `5.3 N`, `0.1 m/s` or `shovel`.
pub fn parse_value(text: &str) -> Result<BindingValue, SyntaxError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    let v = match cur.value()? {
        ValueToken::Symbol(s) => BindingValue::Symbol(s),
        ValueToken::Quantity { value, unit } => BindingValue::Quantity { value, unit },
        ValueToken::Capture(_) => return Err(SyntaxError {
            column: 1,
            expected: "number with unit or symbol",
            found: "`?`".to_string(),
        }),
    };
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error("end of value"));
    }
    Ok(v)
}
