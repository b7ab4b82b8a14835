//! Text grammar for terms and formulas.
//!
//! Terms: `0`, identifiers, `(t <| u)`.  Atoms: `t IN u`, `t = u`, and
//! the abbreviation `t SUBS u`.  Connectives `~`, `&`, `|`, `->`,
//! `<->` with precedence `~` > `&` > `|` > `->` > `<->` (the arrows
//! right-associative); binders `Ex x. A`, `All x. A`, `All2 x : t. A`
//! whose bodies extend as far right as possible.
//!
//! The printer emits only the kernel constructors (`~`, `|`, `IN`,
//! `=`, `Ex`, `<|`); abbreviations are expanded at parse time, so
//! parse-then-print is the identity on locally closed formulas.

use crate::syntax::{
    and, free_names, iff, imp, instantiate_fm, mk_all, mk_all2, mk_ex, mk_subs, neg, or,
    Formula, Name, Term,
};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        msg: msg.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Zero,
    LParen,
    RParen,
    Dot,
    Colon,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    EatsOp,
    EqOp,
    KwEx,
    KwAll,
    KwAll2,
    KwIn,
    KwSubs,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b':' => {
                i += 1;
                Tok::Colon
            }
            b'~' => {
                i += 1;
                Tok::Tilde
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'|' => {
                i += 1;
                Tok::Bar
            }
            b'=' => {
                i += 1;
                Tok::EqOp
            }
            b'-' => {
                if b.get(i + 1) == Some(&b'>') {
                    i += 2;
                    Tok::Arrow
                } else {
                    return err(i, "expected '->'");
                }
            }
            b'<' => {
                if b.get(i + 1) == Some(&b'|') {
                    i += 2;
                    Tok::EatsOp
                } else if b.get(i + 1) == Some(&b'-') && b.get(i + 2) == Some(&b'>') {
                    i += 3;
                    Tok::DArrow
                } else {
                    return err(i, "expected '<|' or '<->'");
                }
            }
            b'0' => {
                i += 1;
                if b.get(i).is_some_and(|c| c.is_ascii_alphanumeric()) {
                    return err(start, "malformed numeral (only '0' is a term)");
                }
                Tok::Zero
            }
            c if c == b'_' || c.is_ascii_alphabetic() => {
                while i < b.len()
                    && (b[i] == b'_' || b[i] == b'\'' || b[i].is_ascii_alphanumeric())
                {
                    i += 1;
                }
                let word = &text[start..i];
                match word {
                    "Ex" => Tok::KwEx,
                    "All" => Tok::KwAll,
                    "All2" => Tok::KwAll2,
                    "IN" => Tok::KwIn,
                    "SUBS" => Tok::KwSubs,
                    _ => Tok::Ident(word.to_string()),
                }
            }
            c => return err(i, format!("unexpected character {:?}", c as char)),
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.i += 1;
            Ok(())
        } else {
            err(self.pos(), format!("expected {what}"))
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(id)) => {
                Name::new(&id).map_err(|e| ParseError { pos, msg: e.to_string() })
            }
            _ => err(pos, "expected a variable name"),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Zero) => Ok(Term::Zero),
            Some(Tok::Ident(id)) => {
                let n = Name::new(&id).map_err(|e| ParseError { pos, msg: e.to_string() })?;
                Ok(Term::var(&n))
            }
            Some(Tok::LParen) => {
                let a = self.term()?;
                self.expect(Tok::EatsOp, "'<|'")?;
                let b = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Term::eats(a, b))
            }
            _ => err(pos, "expected a term"),
        }
    }

    // <-> (lowest, left-assoc is irrelevant: right-assoc chosen)
    fn formula(&mut self) -> Result<Formula, ParseError> {
        let a = self.imp_level()?;
        if self.peek() == Some(&Tok::DArrow) {
            self.i += 1;
            let b = self.formula()?;
            Ok(iff(a, b))
        } else {
            Ok(a)
        }
    }

    fn imp_level(&mut self) -> Result<Formula, ParseError> {
        let a = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.i += 1;
            let b = self.imp_level()?;
            Ok(imp(a, b))
        } else {
            Ok(a)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let a = self.and_level()?;
        if self.peek() == Some(&Tok::Bar) {
            self.i += 1;
            let b = self.or_level()?;
            Ok(or(a, b))
        } else {
            Ok(a)
        }
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let a = self.unary()?;
        if self.peek() == Some(&Tok::Amp) {
            self.i += 1;
            let b = self.and_level()?;
            Ok(and(a, b))
        } else {
            Ok(a)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.i += 1;
                Ok(neg(self.unary()?))
            }
            Some(Tok::KwEx) => {
                self.i += 1;
                let x = self.name()?;
                self.expect(Tok::Dot, "'.' after binder")?;
                let body = self.formula()?;
                Ok(mk_ex(&x, &body))
            }
            Some(Tok::KwAll) => {
                self.i += 1;
                let x = self.name()?;
                self.expect(Tok::Dot, "'.' after binder")?;
                let body = self.formula()?;
                Ok(mk_all(&x, &body))
            }
            Some(Tok::KwAll2) => {
                self.i += 1;
                let x = self.name()?;
                self.expect(Tok::Colon, "':' after All2 binder")?;
                let t = self.term()?;
                self.expect(Tok::Dot, "'.' after All2 bound")?;
                let body = self.formula()?;
                Ok(mk_all2(&x, &t, &body))
            }
            _ => self.atom_or_paren(),
        }
    }

    fn atom_or_paren(&mut self) -> Result<Formula, ParseError> {
        // '(' is ambiguous between a parenthesized formula and an eats
        // term; resolve by attempting the term first.
        if self.peek() == Some(&Tok::LParen) {
            let save = self.i;
            if let Ok(t) = self.term() {
                if matches!(self.peek(), Some(Tok::KwIn | Tok::EqOp | Tok::KwSubs)) {
                    return self.atom_rhs(t);
                }
            }
            self.i = save;
            self.expect(Tok::LParen, "'('").unwrap();
            let f = self.formula()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(f);
        }
        let t = self.term()?;
        self.atom_rhs(t)
    }

    fn atom_rhs(&mut self, t: Term) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::KwIn) => Ok(Formula::Mem(t, self.term()?)),
            Some(Tok::EqOp) => Ok(Formula::Eq(t, self.term()?)),
            Some(Tok::KwSubs) => {
                let u = self.term()?;
                Ok(mk_subs(&t, &u))
            }
            _ => err(pos, "expected 'IN', '=' or 'SUBS'"),
        }
    }
}

/// Parses a formula; abbreviations are expanded at construction.
pub fn parse_fm(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.i != p.toks.len() {
        return err(p.pos(), "trailing input");
    }
    Ok(f)
}

/// Parses a term.
pub fn parse_tm(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        end: text.len(),
    };
    let t = p.term()?;
    if p.i != p.toks.len() {
        return err(p.pos(), "trailing input");
    }
    Ok(t)
}

pub fn print_tm(t: &Term) -> String {
    let mut s = String::new();
    write_tm(&mut s, t);
    s
}

fn write_tm(out: &mut String, t: &Term) {
    match t {
        Term::Zero => out.push('0'),
        Term::Var(n) => out.push_str(n.as_str()),
        Term::Bound(k) => {
            // only reachable when printing open bodies for debugging
            let _ = write!(out, "?{k}");
        }
        Term::Eats(a, b) => {
            out.push('(');
            write_tm(out, a);
            out.push_str(" <| ");
            write_tm(out, b);
            out.push(')');
        }
    }
}

// printer precedence: 0 top, 2 '|' operand, 4 '~' operand
fn write_fm(out: &mut String, f: &Formula, prec: u8) {
    match f {
        Formula::Mem(t, u) => {
            write_tm(out, t);
            out.push_str(" IN ");
            write_tm(out, u);
        }
        Formula::Eq(t, u) => {
            write_tm(out, t);
            out.push_str(" = ");
            write_tm(out, u);
        }
        Formula::Disj(a, b) => {
            let need = prec > 2;
            if need {
                out.push('(');
            }
            write_fm(out, a, 3);
            out.push_str(" | ");
            write_fm(out, b, 2);
            if need {
                out.push(')');
            }
        }
        Formula::Neg(a) => {
            out.push('~');
            write_fm(out, a, 4);
        }
        Formula::Ex(body) => {
            let need = prec > 0;
            if need {
                out.push('(');
            }
            let avoid: BTreeSet<Name> = free_names(f).into_iter().collect();
            let x = crate::syntax::fresh_name(&avoid);
            let inst = instantiate_fm(body, &Term::var(&x));
            let _ = write!(out, "Ex {x}. ");
            write_fm(out, &inst, 0);
            if need {
                out.push(')');
            }
        }
    }
}

/// Prints a locally closed formula in the kernel-constructor fragment
/// of the grammar; `parse_fm` inverts it.
pub fn print_fm(f: &Formula) -> String {
    let mut s = String::new();
    write_fm(&mut s, f, 0);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Name;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn parse_atoms() {
        assert_eq!(parse_fm("0 IN 0").unwrap(), crate::syntax::fls());
        let f = parse_fm("Ex x. x IN (0 <| 0)").unwrap();
        let x = n("x");
        assert_eq!(
            f,
            mk_ex(
                &x,
                &Formula::Mem(Term::var(&x), Term::eats(Term::Zero, Term::Zero))
            )
        );
    }

    #[test]
    fn parse_precedence() {
        let a = parse_fm("~x IN y & y IN z | z IN w -> w = 0").unwrap();
        let expect = imp(
            or(
                and(
                    neg(parse_fm("x IN y").unwrap()),
                    parse_fm("y IN z").unwrap(),
                ),
                parse_fm("z IN w").unwrap(),
            ),
            parse_fm("w = 0").unwrap(),
        );
        assert_eq!(a, expect);
    }

    #[test]
    fn parse_binders_and_sugar() {
        let f = parse_fm("All2 z : x . z IN y").unwrap();
        assert_eq!(f, parse_fm("x SUBS y").unwrap());
        let g = parse_fm("All w. w IN x <-> w IN y").unwrap();
        assert_eq!(
            g,
            mk_all(
                &n("w"),
                &iff(parse_fm("w IN x").unwrap(), parse_fm("w IN y").unwrap())
            )
        );
    }

    #[test]
    fn print_parse_roundtrip() {
        let cases = [
            "0 IN 0",
            "Ex x. x IN (0 <| 0)",
            "x = y -> (y = z -> x = z)",
            "All2 z : x . z IN y",
            "~(x IN y | ~y IN z) & 0 = 0",
            "Ex x. Ex y. x IN y & ~y IN x",
        ];
        for c in cases {
            let f = parse_fm(c).unwrap();
            let printed = print_fm(&f);
            let reparsed = parse_fm(&printed).unwrap();
            assert_eq!(f, reparsed, "case {c} printed as {printed}");
        }
    }

    #[test]
    fn parenthesized_formula_vs_eats() {
        let f = parse_fm("(x IN y | y IN z)").unwrap();
        assert_eq!(f, parse_fm("x IN y | y IN z").unwrap());
        let g = parse_fm("(x <| y) IN z").unwrap();
        assert!(matches!(g, Formula::Mem(Term::Eats(_, _), _)));
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse_fm("x IN").unwrap_err();
        assert!(e.pos >= 4);
        assert!(parse_fm("Ex 0. x IN y").is_err());
        assert!(parse_fm("x IN y y").is_err());
    }
}
