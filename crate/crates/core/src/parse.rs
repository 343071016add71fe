//! Concrete syntax: parser and pretty-printer.
//!
//! ```text
//! P ::= 0 | check | tau . P | x!y . P | x! . P | x?(z) . P | x?() . P
//!     | P + P | P | P | new x,y . P | !P | (P)
//! ```
//!
//! The prefix dot binds tightest, then `+`, then `|`; `new` scopes as far right
//! as possible. A missing `. P` continuation means `. 0`. `#` starts a comment.

use std::fmt;

use crate::error::ParseError;
use crate::name::Name;
use crate::syntax::{check_hygiene, Branch, Prefix, Process};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Query,
    LParen,
    RParen,
    Lt,
    Gt,
    Dot,
    Plus,
    Bar,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Query => f.write_str("`?`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let bump = |line: &mut usize, column: &mut usize, c: char| {
            if c == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
        };
        if c.is_whitespace() {
            chars.next();
            bump(&mut line, &mut column, c);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                column += 1;
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Ident(s), line: l, column: col });
            continue;
        }
        let tok = match c {
            '!' => Tok::Bang,
            '?' => Tok::Query,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '|' => Tok::Bar,
            ',' => Tok::Comma,
            other => {
                return Err(ParseError {
                    line: l,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        column += 1;
        out.push(Spanned { tok, line: l, column: col });
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, column: s.column, message: message.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(Name::new(s))
            }
            other => Err(self.error(format!("expected a name, found {other}"))),
        }
    }

    fn par(&mut self) -> Result<Process, ParseError> {
        let mut parts = vec![self.sum()?];
        while *self.peek() == Tok::Bar {
            self.next();
            parts.push(self.sum()?);
        }
        Ok(Process::par(parts))
    }

    fn sum(&mut self) -> Result<Process, ParseError> {
        let first = self.unary()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut branches = Vec::new();
        let mut take = |p: Process, this: &Parser| -> Result<(), ParseError> {
            match p {
                Process::Sum(bs) if !bs.is_empty() => {
                    branches.extend(bs);
                    Ok(())
                }
                _ => Err(this.error("operands of `+` must be prefix-guarded")),
            }
        };
        take(first, self)?;
        while *self.peek() == Tok::Plus {
            self.next();
            let p = self.unary()?;
            take(p, self)?;
        }
        Ok(Process::Sum(branches))
    }

    fn continuation(&mut self) -> Result<Process, ParseError> {
        if *self.peek() == Tok::Dot {
            self.next();
            self.unary()
        } else {
            Ok(Process::nil())
        }
    }

    fn unary(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let p = self.par()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Bang => {
                self.next();
                Ok(Process::rep(self.unary()?))
            }
            Tok::Ident(s) => {
                let after = self.peek_at(1).clone();
                match (s.as_str(), &after) {
                    (_, Tok::Bang) => self.output(),
                    (_, Tok::Query) => self.input(),
                    ("0", _) => {
                        self.next();
                        Ok(Process::nil())
                    }
                    ("check", _) => {
                        self.next();
                        Ok(Process::Success)
                    }
                    ("tau", _) => {
                        self.next();
                        Ok(Process::tau(self.continuation()?))
                    }
                    ("new", _) => {
                        self.next();
                        let mut names = vec![self.name()?];
                        while *self.peek() == Tok::Comma {
                            self.next();
                            names.push(self.name()?);
                        }
                        self.expect(Tok::Dot)?;
                        let body = self.par()?;
                        Ok(Process::res_all(&names, body))
                    }
                    _ => Err(self.error(format!(
                        "expected a process, found name `{s}` without `!` or `?`"
                    ))),
                }
            }
            other => Err(self.error(format!("expected a process, found {other}"))),
        }
    }

    fn output(&mut self) -> Result<Process, ParseError> {
        let channel = self.name()?;
        self.expect(Tok::Bang)?;
        let datum = match self.peek() {
            Tok::Ident(_) => self.name()?,
            Tok::Lt => {
                self.next();
                self.expect(Tok::Gt)?;
                Name::unit()
            }
            _ => Name::unit(),
        };
        let body = self.continuation()?;
        Ok(Process::output(channel, datum, body))
    }

    fn input(&mut self) -> Result<Process, ParseError> {
        let channel = self.name()?;
        self.expect(Tok::Query)?;
        self.expect(Tok::LParen)?;
        let binder = if *self.peek() == Tok::RParen {
            Name::unit()
        } else {
            self.name()?
        };
        self.expect(Tok::RParen)?;
        let body = self.continuation()?;
        Ok(Process::input(channel, binder, body))
    }
}

/// Parses a term without checking the binding discipline.
pub fn parse_raw(src: &str) -> Result<Process, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let term = p.par()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek())));
    }
    Ok(term)
}

/// Parses a term and checks that no name is both bound and free and no binder
/// shadows another.
pub fn parse(src: &str) -> Result<Process, ParseError> {
    let term = parse_raw(src)?;
    check_hygiene(&term).map_err(|e| ParseError {
        line: 1,
        column: 1,
        message: e.to_string(),
    })?;
    Ok(term)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    ParOperand,
    Unary,
}

fn needs_parens(p: &Process, ctx: Ctx) -> bool {
    match (p, ctx) {
        (Process::Par(_) | Process::Res(..), _) => true,
        (Process::Sum(bs), Ctx::Unary) => bs.len() > 1,
        _ => false,
    }
}

fn write_in(f: &mut fmt::Formatter<'_>, p: &Process, ctx: Ctx) -> fmt::Result {
    if needs_parens(p, ctx) {
        f.write_str("(")?;
        write_term(f, p)?;
        f.write_str(")")
    } else {
        write_term(f, p)
    }
}

fn write_prefix(f: &mut fmt::Formatter<'_>, pre: &Prefix) -> fmt::Result {
    match pre {
        Prefix::Tau => f.write_str("tau"),
        Prefix::Output { channel, datum } if datum.is_unit() => write!(f, "{channel}!"),
        Prefix::Output { channel, datum } => write!(f, "{channel}!{datum}"),
        Prefix::Input { channel, binder } if binder.is_unit() => write!(f, "{channel}?()"),
        Prefix::Input { channel, binder } => write!(f, "{channel}?({binder})"),
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, p: &Process) -> fmt::Result {
    match p {
        Process::Sum(bs) if bs.is_empty() => f.write_str("0"),
        Process::Sum(bs) => {
            for (i, Branch { prefix, body }) in bs.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                write_prefix(f, prefix)?;
                f.write_str(" . ")?;
                write_in(f, body, Ctx::Unary)?;
            }
            Ok(())
        }
        Process::Par(ps) => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write_in(f, q, Ctx::ParOperand)?;
            }
            Ok(())
        }
        Process::Res(..) => {
            let (names, body) = p.strip_restrictions();
            let names: Vec<&str> = names.iter().map(Name::as_str).collect();
            write!(f, "new {} . ", names.join(","))?;
            write_term(f, body)
        }
        Process::Rep(q) => {
            f.write_str("!")?;
            write_in(f, q, Ctx::Unary)
        }
        Process::Success => f.write_str("check"),
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prefix(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(src: &str) {
        let p = parse_raw(src).unwrap();
        let printed = p.to_string();
        assert_eq!(parse_raw(&printed).unwrap(), p, "{src} printed as {printed}");
    }

    #[test]
    fn precedence() {
        let p = parse("a! . 0 + b! . 0 | c! . 0").unwrap();
        match &p {
            Process::Par(ps) => {
                assert_eq!(ps.len(), 2);
                assert!(matches!(&ps[0], Process::Sum(bs) if bs.len() == 2));
            }
            _ => panic!("{p:?}"),
        }
    }

    #[test]
    fn new_extends_right() {
        let p = parse("new x . a!x . 0 | x! . 0").unwrap();
        assert!(matches!(&p, Process::Res(_, body) if matches!(**body, Process::Par(_))));
    }

    #[test]
    fn flat_and_nested_par() {
        assert_eq!(parse("a! | b! | c!").unwrap().components().len(), 3);
        let nested = parse("(a! | b!) | c!").unwrap();
        assert_eq!(nested.components().len(), 2);
    }

    #[test]
    fn unit_sugar() {
        assert_eq!(parse("x! . 0").unwrap(), parse("x!<> . 0").unwrap());
        assert_eq!(parse("x! . 0").unwrap(), Process::output("x", Name::unit(), Process::nil()));
        assert_eq!(
            parse("x?() . check").unwrap(),
            Process::input("x", Name::unit(), Process::Success)
        );
    }

    #[test]
    fn rejects_unguarded_sum_operand() {
        assert!(parse("a! . 0 + (b! | c!)").is_err());
        assert!(parse("a! . 0 + 0").is_err());
    }

    #[test]
    fn errors_have_positions() {
        let e = parse("a! . 0 |\n  $").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(parse("a!").is_ok());
        assert!(parse("a").is_err());
        assert!(parse("(a!").is_err());
    }

    #[test]
    fn hygiene_enforced() {
        assert!(parse("x?(z) . 0 | z! . 0").is_err());
        assert!(parse_raw("x?(z) . 0 | z! . 0").is_ok());
    }

    #[test]
    fn round_trips() {
        for src in [
            "0",
            "check",
            "tau . tau . 0",
            "x!y . 0 | x?(z) . z! . 0",
            "new x,y . (a!x . 0 | b!y . 0)",
            "a! . (new x . x! . 0) | !b?(w) . (c!w . 0 + d!w . 0)",
            "(a! | b!) | (c! | new q . q!)",
            "!(a! | b!)",
            "!new x . a!x",
            "a?(u) . (b! | c!) + tau . check",
            "1!2 . 0",
            "new x . (new y . x!y) | z!",
        ] {
            rt(src);
        }
    }
}
