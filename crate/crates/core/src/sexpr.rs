//! S-expression serialization of derivations, one derivation per file.
//!
//! Node forms: `(hyp F)`, `(extra)`, `(bool <id> F...)`,
//! `(eqax <id> T...)`, `(spec F name T)`, `(hfax <id> T...)`,
//! `(ind F name name)`, `(mp D D)`, `(exists D name)`.  Formulas and
//! terms appear as quoted strings in the text grammar; the HF schema
//! bound variables are written as variable terms.  The reader builds
//! nodes through the validating constructors, so loading doubles as
//! checking; conclusions are never stored.

use crate::calculus::{
    AxiomBase, BoolSchema, CalcError, Derivation, EqSchema, HfSchema, Rule,
};
use crate::parser::{parse_fm, parse_tm, print_fm, print_tm};
use crate::syntax::{Formula, Name, Term};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SexprError {
    #[error("s-expression syntax error at byte {0}: {1}")]
    Syntax(usize, String),
    #[error("malformed node {0:?}: {1}")]
    Node(String, String),
    #[error("inner parse error: {0}")]
    Inner(#[from] crate::parser::ParseError),
    #[error("rule rejected while loading: {0}")]
    Rule(#[from] CalcError),
    #[error("invalid name: {0}")]
    Name(#[from] crate::syntax::NameError),
}

#[derive(Debug, Clone, PartialEq)]
enum Sx {
    Sym(String),
    Str(String),
    List(Vec<Sx>),
}

fn lex_sexpr(text: &str) -> Result<Sx, SexprError> {
    let b = text.as_bytes();
    let mut i = 0usize;
    let mut stack: Vec<Vec<Sx>> = Vec::new();
    let mut top: Option<Sx> = None;
    let push = |stack: &mut Vec<Vec<Sx>>, top: &mut Option<Sx>, v: Sx, i: usize| {
        if let Some(frame) = stack.last_mut() {
            frame.push(v);
            Ok(())
        } else if top.is_none() {
            *top = Some(v);
            Ok(())
        } else {
            Err(SexprError::Syntax(i, "multiple top-level forms".into()))
        }
    };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        match c {
            b'(' => {
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                let frame = stack
                    .pop()
                    .ok_or_else(|| SexprError::Syntax(i, "unbalanced ')'".into()))?;
                push(&mut stack, &mut top, Sx::List(frame), i)?;
                i += 1;
            }
            b'"' => {
                let start = i + 1;
                let mut j = start;
                while j < b.len() && b[j] != b'"' {
                    j += 1;
                }
                if j >= b.len() {
                    return Err(SexprError::Syntax(i, "unterminated string".into()));
                }
                push(
                    &mut stack,
                    &mut top,
                    Sx::Str(text[start..j].to_string()),
                    i,
                )?;
                i = j + 1;
            }
            _ => {
                let start = i;
                while i < b.len()
                    && !b[i].is_ascii_whitespace()
                    && b[i] != b'('
                    && b[i] != b')'
                    && b[i] != b'"'
                {
                    i += 1;
                }
                push(
                    &mut stack,
                    &mut top,
                    Sx::Sym(text[start..i].to_string()),
                    start,
                )?;
            }
        }
    }
    if !stack.is_empty() {
        return Err(SexprError::Syntax(text.len(), "unbalanced '('".into()));
    }
    top.ok_or_else(|| SexprError::Syntax(0, "empty input".into()))
}

fn sx_fm(sx: &Sx) -> Result<Formula, SexprError> {
    match sx {
        Sx::Str(s) => Ok(parse_fm(s)?),
        _ => Err(SexprError::Node(format!("{sx:?}"), "expected a formula string".into())),
    }
}

fn sx_tm(sx: &Sx) -> Result<Term, SexprError> {
    match sx {
        Sx::Str(s) => Ok(parse_tm(s)?),
        _ => Err(SexprError::Node(format!("{sx:?}"), "expected a term string".into())),
    }
}

fn sx_name(sx: &Sx) -> Result<Name, SexprError> {
    match sx {
        Sx::Sym(s) => Ok(Name::new(s)?),
        _ => Err(SexprError::Node(format!("{sx:?}"), "expected a name".into())),
    }
}

fn sx_var_name(sx: &Sx) -> Result<Name, SexprError> {
    // HF schema bound variables travel as variable terms
    match sx_tm(sx)? {
        Term::Var(n) => Ok(n),
        t => Err(SexprError::Node(
            print_tm(&t),
            "expected a variable term".into(),
        )),
    }
}

fn build(sx: &Sx, base: &AxiomBase) -> Result<Derivation, SexprError> {
    let items = match sx {
        Sx::List(items) if !items.is_empty() => items,
        _ => {
            return Err(SexprError::Node(
                format!("{sx:?}"),
                "expected a nonempty list".into(),
            ))
        }
    };
    let head = match &items[0] {
        Sx::Sym(s) => s.as_str(),
        other => {
            return Err(SexprError::Node(
                format!("{other:?}"),
                "expected a rule symbol".into(),
            ))
        }
    };
    let arity = |n: usize| -> Result<(), SexprError> {
        if items.len() == n + 1 {
            Ok(())
        } else {
            Err(SexprError::Node(
                head.to_string(),
                format!("expected {n} arguments, found {}", items.len() - 1),
            ))
        }
    };
    match head {
        "hyp" => {
            arity(1)?;
            Ok(Derivation::hyp(&sx_fm(&items[1])?))
        }
        "extra" => {
            arity(0)?;
            Ok(Derivation::extra(base)?)
        }
        "bool" => {
            let id = match &items[1] {
                Sx::Sym(s) => s.as_str(),
                _ => return Err(SexprError::Node(head.into(), "missing schema id".into())),
            };
            let schema = match id {
                "b1" => BoolSchema::B1,
                "b2" => BoolSchema::B2,
                "b3" => BoolSchema::B3,
                "b4" => BoolSchema::B4,
                _ => return Err(SexprError::Node(head.into(), format!("unknown id {id}"))),
            };
            let parts: Result<Vec<Formula>, _> = items[2..].iter().map(sx_fm).collect();
            Ok(Derivation::bool_ax(schema, &parts?)?)
        }
        "eqax" => {
            let id = match &items[1] {
                Sx::Sym(s) => s.as_str(),
                _ => return Err(SexprError::Node(head.into(), "missing schema id".into())),
            };
            let schema = match id {
                "e1" => EqSchema::E1,
                "e2" => EqSchema::E2,
                "e3" => EqSchema::E3,
                "e4" => EqSchema::E4,
                "e5" => EqSchema::E5,
                _ => return Err(SexprError::Node(head.into(), format!("unknown id {id}"))),
            };
            let parts: Result<Vec<Term>, _> = items[2..].iter().map(sx_tm).collect();
            Ok(Derivation::eq_ax(schema, &parts?)?)
        }
        "spec" => {
            arity(3)?;
            let body = sx_fm(&items[1])?;
            let var = sx_name(&items[2])?;
            let witness = sx_tm(&items[3])?;
            Ok(Derivation::spec(&body, &var, &witness)?)
        }
        "hfax" => {
            let id = match &items[1] {
                Sx::Sym(s) => s.as_str(),
                _ => return Err(SexprError::Node(head.into(), "missing schema id".into())),
            };
            match id {
                "hf1" => {
                    if items.len() != 4 {
                        return Err(SexprError::Node(head.into(), "hf1 takes z and x".into()));
                    }
                    Ok(Derivation::hf_ax(HfSchema::Hf1 {
                        z: sx_tm(&items[2])?,
                        x: sx_var_name(&items[3])?,
                    })?)
                }
                "hf2" => {
                    if items.len() != 6 {
                        return Err(SexprError::Node(
                            head.into(),
                            "hf2 takes z, x, y and u".into(),
                        ));
                    }
                    Ok(Derivation::hf_ax(HfSchema::Hf2 {
                        z: sx_tm(&items[2])?,
                        x: sx_tm(&items[3])?,
                        y: sx_tm(&items[4])?,
                        u: sx_var_name(&items[5])?,
                    })?)
                }
                _ => Err(SexprError::Node(head.into(), format!("unknown id {id}"))),
            }
        }
        "ind" => {
            arity(3)?;
            let phi = sx_fm(&items[1])?;
            let var = sx_name(&items[2])?;
            let step = sx_name(&items[3])?;
            Ok(Derivation::ind_ax(&phi, &var, &step)?)
        }
        "mp" => {
            arity(2)?;
            let l = build(&items[1], base)?;
            let r = build(&items[2], base)?;
            Ok(Derivation::mp(l, r)?)
        }
        "exists" => {
            arity(2)?;
            let sub = build(&items[1], base)?;
            let i = sx_name(&items[2])?;
            Ok(Derivation::exists(sub, &i)?)
        }
        _ => Err(SexprError::Node(head.into(), "unknown rule".into())),
    }
}

/// Reads one derivation; construction validates every rule application.
pub fn read_derivation(text: &str, base: &AxiomBase) -> Result<Derivation, SexprError> {
    build(&lex_sexpr(text)?, base)
}

fn write_node(out: &mut String, d: &Derivation) {
    match d.rule() {
        Rule::Hyp(f) => {
            let _ = write!(out, "(hyp \"{}\")", print_fm(f));
        }
        Rule::Extra => out.push_str("(extra)"),
        Rule::Bool(s, parts) => {
            let id = match s {
                BoolSchema::B1 => "b1",
                BoolSchema::B2 => "b2",
                BoolSchema::B3 => "b3",
                BoolSchema::B4 => "b4",
            };
            let _ = write!(out, "(bool {id}");
            for p in parts {
                let _ = write!(out, " \"{}\"", print_fm(p));
            }
            out.push(')');
        }
        Rule::EqAx(s, parts) => {
            let id = match s {
                EqSchema::E1 => "e1",
                EqSchema::E2 => "e2",
                EqSchema::E3 => "e3",
                EqSchema::E4 => "e4",
                EqSchema::E5 => "e5",
            };
            let _ = write!(out, "(eqax {id}");
            for p in parts {
                let _ = write!(out, " \"{}\"", print_tm(p));
            }
            out.push(')');
        }
        Rule::Spec { body, var, witness } => {
            let _ = write!(
                out,
                "(spec \"{}\" {} \"{}\")",
                print_fm(body),
                var,
                print_tm(witness)
            );
        }
        Rule::HfAx(s) => match s {
            HfSchema::Hf1 { z, x } => {
                let _ = write!(out, "(hfax hf1 \"{}\" \"{}\")", print_tm(z), x);
            }
            HfSchema::Hf2 { z, x, y, u } => {
                let _ = write!(
                    out,
                    "(hfax hf2 \"{}\" \"{}\" \"{}\" \"{}\")",
                    print_tm(z),
                    print_tm(x),
                    print_tm(y),
                    u
                );
            }
        },
        Rule::Ind { phi, var, step } => {
            let _ = write!(out, "(ind \"{}\" {} {})", print_fm(phi), var, step);
        }
        Rule::Mp(l, r) => {
            out.push_str("(mp ");
            write_node(out, l);
            out.push(' ');
            write_node(out, r);
            out.push(')');
        }
        Rule::Exists(sub, i) => {
            out.push_str("(exists ");
            write_node(out, sub);
            let _ = write!(out, " {i})");
        }
    }
}

/// Serializes a derivation; `read_derivation` inverts it bit-exactly on
/// printer output.
pub fn write_derivation(d: &Derivation) -> String {
    let mut out = String::new();
    write_node(&mut out, d);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check;
    use crate::derive::{em, not_fls, prove_taut};
    use crate::syntax::{imp, or, neg};

    #[test]
    fn roundtrip_simple() {
        let base = AxiomBase::default();
        let a = parse_fm("x IN y").unwrap();
        let d = em(&a).unwrap();
        let txt = write_derivation(&d);
        let d2 = read_derivation(&txt, &base).unwrap();
        assert_eq!(d2.judgment(), d.judgment());
        assert_eq!(write_derivation(&d2), txt);
        check(&d2, &base).unwrap();
    }

    #[test]
    fn roundtrip_with_quantifiers() {
        let base = AxiomBase::default();
        let d = not_fls().unwrap();
        let txt = write_derivation(&d);
        let d2 = read_derivation(&txt, &base).unwrap();
        assert_eq!(d2.judgment(), d.judgment());
        assert_eq!(write_derivation(&d2), txt);
    }

    #[test]
    fn roundtrip_hyp_and_taut() {
        let base = AxiomBase::default();
        let a = parse_fm("x IN y").unwrap();
        let b = parse_fm("z = 0").unwrap();
        let t = prove_taut(&imp(a.clone(), or(b.clone(), neg(neg(a.clone())))), &[a, b]).unwrap();
        let txt = write_derivation(&t);
        let d2 = read_derivation(&txt, &base).unwrap();
        assert_eq!(d2.judgment(), t.judgment());
    }

    #[test]
    fn loader_rejects_bad_nodes() {
        let base = AxiomBase::default();
        assert!(read_derivation("(mp (hyp \"x IN y\") (hyp \"x IN y\"))", &base).is_err());
        assert!(read_derivation("(bool b9 \"x IN y\")", &base).is_err());
        assert!(read_derivation("(extra)", &base).is_err());
        assert!(read_derivation("(hyp \"x IN\")", &base).is_err());
        assert!(read_derivation("(hyp \"x IN y\"", &base).is_err());
        assert!(read_derivation("", &base).is_err());
        // exists freshness enforced at load
        assert!(read_derivation(
            "(exists (hyp \"x IN y -> y IN z\") y)",
            &base
        )
        .is_err());
    }

    #[test]
    fn extra_axiom_round() {
        let extra = parse_fm("0 IN (0 <| 0)").unwrap();
        let base = AxiomBase::with_extra(extra.clone());
        let d = read_derivation("(extra)", &base).unwrap();
        assert_eq!(*d.concl(), extra);
    }
}
