//! Text format for ground programs.
//!
//! ```text
//! % comment
//! a.
//! b :- a, not c.
//! :- b, not a.
//! ```
//!
//! Atom names are `[a-z][A-Za-z0-9_]*`, optionally followed by a parenthesized argument list.
//! Arguments are constants such as `m1` or `42`, nested terms, or arithmetic relations such as
//! `x+2*y <= 3` (used by `required(...)` atoms). Whitespace inside arguments is dropped, so
//! `required(x > 1)` and `required(x>1)` name the same atom.

use thiserror::Error;

use super::{GroundProgram, Rule};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: disjunctive heads are not supported")]
    DisjunctiveHeadUnsupported { line: usize },
}

/// Parses a ground program.
pub fn parse_program(text: &str) -> Result<GroundProgram, ParseError> {
    let mut parser = Parser { chars: text.chars().collect(), pos: 0, line: 1 };
    let mut program = GroundProgram::new();
    loop {
        parser.skip_trivia();
        if parser.at_end() {
            break;
        }
        parser.statement(&mut program)?;
    }
    Ok(program)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

struct BodyLit {
    name: String,
    negated: bool,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError { line: self.line, message: message.into() })
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '%' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, expected: char) -> Result<(), ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c == expected => {
                self.bump();
                Ok(())
            }
            Some(c) => self.error(format!("expected `{expected}`, found `{c}`")),
            None => self.error(format!("expected `{expected}`, found end of input")),
        }
    }

    fn at_neck(&self) -> bool {
        self.peek() == Some(':') && self.peek_at(1) == Some('-')
    }

    fn statement(&mut self, program: &mut GroundProgram) -> Result<(), ParseError> {
        let start_line = self.line;
        let head = if self.at_neck() { None } else { Some(self.atom()?) };
        self.skip_trivia();
        if self.peek() == Some('|') || self.peek() == Some(';') {
            return Err(ParseError::DisjunctiveHeadUnsupported { line: start_line });
        }
        let mut body = Vec::new();
        if self.at_neck() {
            self.bump();
            self.bump();
            loop {
                body.push(self.body_literal()?);
                self.skip_trivia();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    Some('.') => break,
                    Some(c) => return self.error(format!("expected `,` or `.`, found `{c}`")),
                    None => return self.error("unterminated statement"),
                }
            }
        }
        self.expect('.')?;

        let head = head.map(|name| program.atoms_mut().intern(&name));
        let mut rule = Rule { head, positive: Vec::new(), negative: Vec::new() };
        for lit in body {
            let atom = program.atoms_mut().intern(&lit.name);
            if lit.negated {
                rule.negative.push(atom);
            } else {
                rule.positive.push(atom);
            }
        }
        program.add_rule(rule);
        Ok(())
    }

    fn body_literal(&mut self) -> Result<BodyLit, ParseError> {
        self.skip_trivia();
        let name = self.atom()?;
        if name == "not" {
            self.skip_trivia();
            if !self.peek().is_some_and(|c| c.is_ascii_lowercase()) {
                return self.error("expected an atom after `not`");
            }
            let inner = self.atom()?;
            return Ok(BodyLit { name: inner, negated: true });
        }
        Ok(BodyLit { name, negated: false })
    }

    fn identifier(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }

    fn atom(&mut self) -> Result<String, ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {}
            Some(c) => return self.error(format!("expected an atom, found `{c}`")),
            None => return self.error("expected an atom, found end of input"),
        }
        let mut name = self.identifier();
        if self.peek() == Some('(') {
            self.bump();
            let args = self.arguments()?;
            name.push('(');
            name.push_str(&args.join(","));
            name.push(')');
        }
        Ok(name)
    }

    /// Reads a comma-separated argument list up to the matching `)`.
    fn arguments(&mut self) -> Result<Vec<String>, ParseError> {
        let mut args = Vec::new();
        let mut current = String::new();
        let mut depth = 0usize;
        loop {
            let Some(c) = self.bump() else {
                return self.error("unbalanced parentheses");
            };
            match c {
                '(' => {
                    depth += 1;
                    current.push(c);
                }
                ')' if depth == 0 => {
                    args.push(self.check_argument(current)?);
                    return Ok(args);
                }
                ')' => {
                    depth -= 1;
                    current.push(c);
                }
                ',' if depth == 0 => {
                    args.push(self.check_argument(std::mem::take(&mut current))?);
                }
                c if c.is_whitespace() => {}
                c if c.is_ascii_alphanumeric() || "_,+-*<>=!".contains(c) => current.push(c),
                c => return self.error(format!("unexpected `{c}` in argument list")),
            }
        }
    }

    fn check_argument(&self, arg: String) -> Result<String, ParseError> {
        if arg.is_empty() {
            return self.error("empty argument");
        }
        Ok(arg)
    }
}
