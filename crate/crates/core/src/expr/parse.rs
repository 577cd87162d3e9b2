//! Recursive-descent parser for queries and rendered formulas.
//!
//! ```text
//! expr   := prod ( '/' prod )?
//! prod   := factor+
//! factor := 'Σ_' var prod        -- the sum scopes over the rest of the product
//!         | term | '1' | '(' expr ')'
//! term   := 'P' '(' slot (',' slot)* ( '|' cond (',' cond)* )? ')'
//! cond   := slot | 'do' '(' slot ')'
//! slot   := var ( '=' digits )?
//! var    := [A-Za-z_][A-Za-z0-9_]* '\''*
//! ```
//!
//! A primed occurrence refers to the innermost enclosing binder with the same
//! name and prime count; an unprimed one with no such binder is a free value.

use super::{Condition, Expr, Slot, Term, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String, u32),
    Num(u32),
    Sigma,
    LParen,
    RParen,
    Comma,
    Bar,
    Slash,
    Eq,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut it = s.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Bar),
            '/' => Some(Tok::Slash),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(t) = single {
            it.next();
            out.push((pos, t));
        } else if c == 'Σ' || c == '∑' {
            it.next();
            match it.next() {
                Some((_, '_')) => out.push((pos, Tok::Sigma)),
                _ => return Err(Error::Syntax { pos, msg: "expected `_` after Σ".into() }),
            }
        } else if c.is_ascii_digit() {
            let mut n = String::new();
            while let Some(&(_, d)) = it.peek().filter(|(_, d)| d.is_ascii_digit()) {
                n.push(d);
                it.next();
            }
            let v = n.parse().map_err(|_| Error::Syntax { pos, msg: "number out of range".into() })?;
            out.push((pos, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&(_, d)) = it.peek().filter(|(_, d)| d.is_ascii_alphanumeric() || *d == '_') {
                name.push(d);
                it.next();
            }
            let mut primes = 0;
            while it.peek().map(|&(_, d)| d == '\'').unwrap_or(false) {
                primes += 1;
                it.next();
            }
            out.push((pos, Tok::Ident(name, primes)));
        } else {
            return Err(Error::Syntax { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    /// (name, primes, id) of enclosing binders, innermost last.
    scope: Vec<(String, u32, u32)>,
    next_id: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn starts_factor(&self) -> bool {
        match self.peek() {
            Some(Tok::Sigma) | Some(Tok::LParen) | Some(Tok::Num(1)) => true,
            Some(Tok::Ident(n, 0)) => n == "P" && self.peek2() == Some(&Tok::LParen),
            _ => false,
        }
    }

    fn expr(&mut self) -> Result<Expr<String>> {
        let num = self.prod()?;
        if self.peek() == Some(&Tok::Slash) {
            self.at += 1;
            let den = self.prod()?;
            return Ok(Expr::quotient(num, den));
        }
        Ok(num)
    }

    fn prod(&mut self) -> Result<Expr<String>> {
        let mut fs = vec![self.factor()?];
        while self.starts_factor() {
            fs.push(self.factor()?);
        }
        Ok(if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Product(fs) })
    }

    fn factor(&mut self) -> Result<Expr<String>> {
        match self.peek().cloned() {
            Some(Tok::Sigma) => {
                self.at += 1;
                let Some(Tok::Ident(name, primes)) = self.peek().cloned() else {
                    return self.err("expected a variable after Σ_");
                };
                self.at += 1;
                let id = self.next_id;
                self.next_id += 1;
                self.scope.push((name.clone(), primes, id));
                let body = self.prod();
                self.scope.pop();
                Ok(Expr::sum(name, id, body?))
            }
            Some(Tok::Num(1)) => {
                self.at += 1;
                Ok(Expr::One)
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(n, 0)) if n == "P" => Ok(Expr::Term(self.term()?)),
            _ => self.err("expected `P(`, `Σ_`, `1` or `(`"),
        }
    }

    fn term(&mut self) -> Result<Term<String>> {
        let start = self.pos();
        self.at += 1;
        self.expect(Tok::LParen, "`(`")?;
        let mut targets = vec![self.slot()?];
        while self.peek() == Some(&Tok::Comma) {
            self.at += 1;
            targets.push(self.slot()?);
        }
        let mut conds = Vec::new();
        if self.peek() == Some(&Tok::Bar) {
            self.at += 1;
            conds.push(self.cond()?);
            while self.peek() == Some(&Tok::Comma) {
                self.at += 1;
                conds.push(self.cond()?);
            }
        }
        self.expect(Tok::RParen, "`)` closing the term")?;
        Term::new(targets, conds).map_err(|e| Error::Syntax { pos: start, msg: e.to_string() })
    }

    fn cond(&mut self) -> Result<Condition<String>> {
        if matches!(self.peek(), Some(Tok::Ident(n, 0)) if n == "do") && self.peek2() == Some(&Tok::LParen) {
            self.at += 2;
            let s = self.slot()?;
            self.expect(Tok::RParen, "`)` closing do(")?;
            return Ok(Condition::intervene(s));
        }
        Ok(Condition::observe(self.slot()?))
    }

    fn slot(&mut self) -> Result<Slot<String>> {
        let Some(Tok::Ident(name, primes)) = self.peek().cloned() else {
            return self.err("expected a variable");
        };
        let pos = self.pos();
        self.at += 1;
        if self.peek() == Some(&Tok::Eq) {
            self.at += 1;
            let Some(Tok::Num(v)) = self.peek().cloned() else {
                return self.err("expected a value index after `=`");
            };
            self.at += 1;
            if primes > 0 {
                return Err(Error::Syntax { pos, msg: "a fixed value cannot be primed".into() });
            }
            return Ok(Slot { var: name, value: Value::Fixed(v) });
        }
        let bound = self.scope.iter().rev().find(|(n, p, _)| *n == name && *p == primes).map(|s| s.2);
        let value = match (bound, primes) {
            (Some(id), _) => Value::Bound(id),
            (None, 0) => Value::Free,
            (None, _) => return Err(Error::Syntax { pos, msg: format!("`{name}` with {primes} prime(s) is not bound by any Σ") }),
        };
        Ok(Slot { var: name, value })
    }
}

/// Parses a full formula (sums, products, quotients).
pub fn parse_expr(s: &str) -> Result<Expr<String>> {
    let mut p = Parser { toks: lex(s)?, at: 0, end: s.len(), scope: Vec::new(), next_id: 1 };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses a query, which must be a single `P(...)` term.
pub fn parse_query(s: &str) -> Result<Expr<String>> {
    let e = parse_expr(s)?;
    if e.as_term().is_none() {
        return Err(Error::Syntax { pos: 0, msg: "a query must be a single P(...) term".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::super::Mode;
    use super::*;

    #[test]
    fn query_forms() {
        let e = parse_query("P(y | do(x))").unwrap();
        let t = e.as_term().unwrap();
        assert_eq!(t.targets, vec![Slot::free("y".to_string())]);
        assert_eq!(t.conditions, vec![Condition::intervene(Slot::free("x".to_string()))]);

        let e = parse_query("P(y | do(x), z)").unwrap();
        let modes: Vec<Mode> = e.as_term().unwrap().conditions.iter().map(|c| c.mode).collect();
        assert_eq!(modes, vec![Mode::Intervention, Mode::Observation]);

        let e = parse_query("  P( y1 ,y2|do( x=1 ) )").unwrap();
        assert_eq!(e.as_term().unwrap().conditions[0].slot.value, Value::Fixed(1));
        assert!(parse_query("P(y)").is_ok());
    }

    #[test]
    fn sums_scope_over_the_rest_of_the_product() {
        let e = parse_expr("Σ_z P(z|x) Σ_x' P(y|x',z) P(x')").unwrap();
        let Expr::Sum { body, .. } = &e else { panic!("{e:?}") };
        let Expr::Product(fs) = body.as_ref() else { panic!() };
        assert_eq!(fs.len(), 2);
        assert!(matches!(fs[1], Expr::Sum { .. }));
        e.validate().unwrap();
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_query("P(y | do(x)") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 11),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_query("P(y|x'))"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_query("Q(y)"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_query("P(y,y)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_query("P(y) P(x)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_query("P(y|x) $"), Err(Error::Syntax { pos: 7, .. })));
    }
}
