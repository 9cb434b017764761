//! Stable text rendering of space expressions and the matching parser.
//!
//! The grammar, in decreasing binding strength: atoms, the prefixes `Si`
//! (suspension) and `Om` (loop), smash `^`, product `x`, wedge `v`.
//! Atoms render as `*`, `S^7`, `P^4(9)`, `S^3{9}` (the fibre of the degree-9
//! map on S^3), `Om S^7`, and `Om V'` for opaque loop spaces. Canonical forms
//! render deterministically and parse back to themselves.

use std::fmt;

use crate::arith;

use super::{SpaceAtom, SpaceExpr};

const PREC_WEDGE: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_SMASH: u8 = 3;
const PREC_PREFIX: u8 = 4;

impl fmt::Display for SpaceAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(self, f)
    }
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, PREC_WEDGE, f)
    }
}

fn write_expr(e: &SpaceExpr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match e {
        SpaceExpr::Atom(SpaceAtom::LoopSphere { .. }) | SpaceExpr::Atom(SpaceAtom::OpaqueLoop { .. }) => PREC_PREFIX,
        SpaceExpr::Atom(_) => u8::MAX,
        SpaceExpr::Wedge(_) => PREC_WEDGE,
        SpaceExpr::Product(_) => PREC_PRODUCT,
        SpaceExpr::Smash(..) => PREC_SMASH,
        SpaceExpr::Susp(_) | SpaceExpr::Loop(_) => PREC_PREFIX,
    };
    let parens = prec < parent;
    if parens {
        write!(f, "(")?;
    }
    match e {
        SpaceExpr::Atom(a) => write_atom(a, f)?,
        SpaceExpr::Wedge(children) | SpaceExpr::Product(children) => {
            let sep = if matches!(e, SpaceExpr::Wedge(_)) { " v " } else { " x " };
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                // Composite children are parenthesized for readability even
                // where precedence alone would disambiguate.
                write_expr(c, PREC_PREFIX, f)?;
            }
        }
        SpaceExpr::Smash(a, b) => {
            write_expr(a, PREC_SMASH, f)?;
            write!(f, " ^ ")?;
            write_expr(b, PREC_PREFIX, f)?;
        }
        SpaceExpr::Susp(x) => {
            write!(f, "Si ")?;
            write_expr(x, PREC_PREFIX, f)?;
        }
        SpaceExpr::Loop(x) => {
            write!(f, "Om ")?;
            write_expr(x, PREC_PREFIX, f)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

fn write_atom(a: &SpaceAtom, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match a {
        SpaceAtom::Point => write!(f, "*"),
        SpaceAtom::Sphere { dim } => write!(f, "S^{dim}"),
        SpaceAtom::Moore { order, dim } => write!(f, "P^{dim}({order})"),
        SpaceAtom::FibSphere { dim, prime, exp } => write!(f, "S^{dim}{{{}}}", prime.pow(*exp)),
        SpaceAtom::LoopSphere { dim } => write!(f, "Om S^{dim}"),
        SpaceAtom::OpaqueLoop { tag } => write!(f, "Om {tag}"),
    }
}

/// Parse failure with a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Word(String),
}

fn lex(input: &str) -> Vec<(usize, Token)> {
    let mut tokens = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            tokens.push((i, Token::LParen));
            i += 1;
        } else if c == ')' {
            tokens.push((i, Token::RParen));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() {
                let c = bytes[i] as char;
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                i += 1;
            }
            tokens.push((start, Token::Word(input[start..i].to_string())));
        }
    }
    tokens
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    input_len: usize,
}

/// Parse the canonical text form back into an expression.
pub fn parse_expr(input: &str) -> Result<SpaceExpr, ParseError> {
    let mut parser = Parser { tokens: lex(input), pos: 0, input_len: input.len() };
    let expr = parser.wedge()?;
    if let Some((at, _)) = parser.peek() {
        return Err(ParseError { pos: at, msg: "unexpected trailing input".into() });
    }
    Ok(expr)
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(at, t)| (*at, t))
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|(at, _)| *at).unwrap_or(self.input_len)
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos, msg: msg.into() })
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if let Some((_, Token::Word(s))) = self.peek() {
            if s == w {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn wedge(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut parts = vec![self.product()?];
        while self.eat_word("v") {
            parts.push(self.product()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { SpaceExpr::Wedge(parts) })
    }

    fn product(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut parts = vec![self.smash()?];
        while self.eat_word("x") {
            parts.push(self.smash()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { SpaceExpr::Product(parts) })
    }

    fn smash(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut acc = self.prefix()?;
        while self.eat_word("^") {
            let rhs = self.prefix()?;
            acc = SpaceExpr::Smash(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<SpaceExpr, ParseError> {
        if self.eat_word("Si") {
            let child = self.prefix()?;
            return Ok(SpaceExpr::Susp(Box::new(child)));
        }
        if self.eat_word("Om") {
            // A following bare tag denotes an opaque loop space.
            if let Some((_, Token::Word(w))) = self.peek() {
                if !is_structural_word(w) {
                    let tag = w.clone();
                    self.pos += 1;
                    return Ok(SpaceExpr::opaque_loop(tag));
                }
            }
            let child = self.prefix()?;
            return Ok(match child {
                SpaceExpr::Atom(SpaceAtom::Sphere { dim }) if dim >= 3 && dim % 2 == 1 => {
                    SpaceExpr::loop_sphere(dim)
                }
                other => SpaceExpr::Loop(Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<SpaceExpr, ParseError> {
        let at = self.here();
        match self.next() {
            Some((_, Token::LParen)) => {
                let inner = self.wedge()?;
                match self.next() {
                    Some((_, Token::RParen)) => Ok(inner),
                    other => self.err(
                        other.map(|(p, _)| p).unwrap_or(self.input_len),
                        "expected `)`",
                    ),
                }
            }
            Some((pos, Token::Word(w))) => self.atom_word(pos, &w),
            Some((pos, Token::RParen)) => self.err(pos, "unexpected `)`"),
            None => self.err(at, "expected an expression"),
        }
    }

    fn atom_word(&mut self, pos: usize, word: &str) -> Result<SpaceExpr, ParseError> {
        if word == "*" {
            return Ok(SpaceExpr::point());
        }
        if let Some(rest) = word.strip_prefix("S^") {
            // S^d or S^d{q}
            if let Some(brace) = rest.find('{') {
                if !rest.ends_with('}') {
                    return self.err(pos, "expected `}` closing the torsion order");
                }
                let dim: u32 = self.parse_num(pos, &rest[..brace])?;
                let order: u64 = self.parse_num(pos, &rest[brace + 1..rest.len() - 1])?;
                if dim < 3 || dim % 2 == 0 {
                    return self.err(pos, format!("S^{dim}{{..}} needs an odd dimension >= 3"));
                }
                let Some((p, r)) = arith::prime_power(order) else {
                    return self.err(pos, format!("{order} is not a prime power"));
                };
                return Ok(SpaceExpr::fib_sphere(dim, p, r));
            }
            let dim: u32 = self.parse_num(pos, rest)?;
            if dim < 1 {
                return self.err(pos, "sphere dimension must be >= 1");
            }
            return Ok(SpaceExpr::sphere(dim));
        }
        if let Some(rest) = word.strip_prefix("P^") {
            let dim: u32 = self.parse_num(pos, rest)?;
            if dim < 3 {
                return self.err(pos, format!("Moore space dimension {dim} is below 3"));
            }
            if !matches!(self.next(), Some((_, Token::LParen))) {
                return self.err(pos, "expected `(` after Moore space dimension");
            }
            let order: u64 = match self.next() {
                Some((p, Token::Word(w))) => self.parse_num(p, &w)?,
                other => {
                    return self.err(
                        other.map(|(p, _)| p).unwrap_or(self.input_len),
                        "expected a Moore space order",
                    )
                }
            };
            if order < 2 {
                return self.err(pos, "Moore space order must be >= 2");
            }
            if !matches!(self.next(), Some((_, Token::RParen))) {
                return self.err(pos, "expected `)` after Moore space order");
            }
            return Ok(SpaceExpr::moore(order, dim));
        }
        self.err(pos, format!("unexpected token `{word}`"))
    }

    fn parse_num<T: std::str::FromStr>(&self, pos: usize, s: &str) -> Result<T, ParseError> {
        s.parse().map_err(|_| ParseError { pos, msg: format!("expected a number, got `{s}`") })
    }
}

fn is_structural_word(w: &str) -> bool {
    matches!(w, "v" | "x" | "^" | "Si" | "Om" | "*")
        || w.starts_with("S^")
        || w.starts_with("P^")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(e: &SpaceExpr) {
        let rendered = e.to_string();
        let parsed = parse_expr(&rendered).unwrap().canonicalize();
        assert_eq!(&parsed, e, "round trip failed for `{rendered}`");
    }

    #[test]
    fn renders_the_documented_example() {
        let e = SpaceExpr::wedge(vec![
            SpaceExpr::sphere(7),
            SpaceExpr::moore(9, 4),
            SpaceExpr::product(vec![SpaceExpr::fib_sphere(3, 3, 2), SpaceExpr::loop_sphere(7)]),
        ]);
        assert_eq!(e.to_string(), "(S^3{9} x Om S^7) v P^4(9) v S^7");
        round_trip(&e);
    }

    #[test]
    fn renders_atoms() {
        assert_eq!(SpaceExpr::point().to_string(), "*");
        assert_eq!(SpaceExpr::fib_sphere(3, 2, 3).to_string(), "S^3{8}");
        assert_eq!(SpaceExpr::opaque_loop("V'").to_string(), "Om V'");
    }

    #[test]
    fn parses_opaque_and_symbolic_shapes() {
        let w = parse_expr("(Si Om V' ^ P^3(3)) v P^4(3)").unwrap().canonicalize();
        let expected = SpaceExpr::wedge(vec![
            SpaceExpr::Smash(
                Box::new(SpaceExpr::moore(3, 3)),
                Box::new(SpaceExpr::Susp(Box::new(SpaceExpr::opaque_loop("V'")))),
            ),
            SpaceExpr::moore(3, 4),
        ]);
        assert_eq!(w, expected);
        round_trip(&expected);
    }

    #[test]
    fn loop_of_odd_sphere_parses_to_the_atom() {
        assert_eq!(parse_expr("Om S^7").unwrap(), SpaceExpr::loop_sphere(7));
        assert!(matches!(parse_expr("Om S^4").unwrap(), SpaceExpr::Loop(_)));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_expr("S^3 v S^0").unwrap_err();
        assert_eq!(e.pos, 6);
        assert!(parse_expr("S^4{9}").is_err());
        assert!(parse_expr("S^3{45}").is_err());
        assert!(parse_expr("P^2(3)").is_err());
        assert!(parse_expr("P^4(1)").is_err());
        assert!(parse_expr("S^3 )").is_err());
        assert!(parse_expr("(S^3").is_err());
    }

    #[test]
    fn smash_chain_is_left_associative() {
        let e = parse_expr("S^3 ^ S^4 ^ S^5").unwrap();
        assert_eq!(
            e,
            SpaceExpr::Smash(
                Box::new(SpaceExpr::Smash(
                    Box::new(SpaceExpr::sphere(3)),
                    Box::new(SpaceExpr::sphere(4)),
                )),
                Box::new(SpaceExpr::sphere(5)),
            )
        );
    }
}
