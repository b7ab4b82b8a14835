//! Object-level coding predicates: HF-calculus formulas that define the
//! coding relations, mirroring the executable meta-level functions.
//!
//! Every predicate is a strict Σ formula generated by a small
//! combinator layer (fresh-name supply, constant-shape formulas,
//! pair/tuple destructuring, bounded index quantifiers).  The witness
//! style follows the construction-sequence idea: an existential trace
//! set whose entries justify each other through ∈-smaller indices,
//! which foundation makes well-founded without any ordinality
//! requirement on the indices.  Variable numerals are witnessed by a
//! successor ladder inside the same trace.
//!
//! Unbounded existentials appear only on the outermost spine of each
//! predicate (the trace set and a few aliases); they carry hint slots
//! so that evaluation is witness-guided.  Every inner quantifier is
//! guarded by membership and evaluates definitely.

use crate::coding::{
    abst_code, canonical_term, code_vars, dec_fm, dec_tm, enc_tm, make_form, subst_code, Code,
    TAG_DISJ, TAG_EATS, TAG_EQ, TAG_EX, TAG_IND, TAG_MEM, TAG_NEG,
};
use crate::hf::HfSet;
use crate::semantics::{eval_fm, Environment, TruthOutcome, WitnessHints};
use crate::syntax::{mk_all2, mk_ex, Formula, FreshNames, Name, Term};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObjectError {
    #[error("parameter names must be pairwise distinct")]
    ParamsNotDistinct,
    #[error("fresh-name pool exhausted against the parameter set")]
    FreshnessExhausted,
}

type SlotId = u32;

/// Which executable meta predicate a formula mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaOracle {
    LstSeq,
    TermCode,
    AbstTerm,
    SubstTerm,
    AbstForm,
    SubstForm,
    MakeForm,
    Krp,
    Q,
}

/// An object-level coding predicate: the formula, its free-variable
/// interface, and the meta oracle it must agree with.
#[derive(Debug, Clone)]
pub struct PredicateFormula {
    pub formula: Formula,
    pub params: Vec<Name>,
    pub oracle: MetaOracle,
    slots: Vec<(SlotId, Vec<usize>)>,
}

// ---- strict-Σ skeleton ----

enum Sk {
    Mem(Name, Name),
    Conj(Vec<Sk>),
    Disj(Vec<Sk>),
    Ex(Name, Option<SlotId>, Box<Sk>),
    All2 {
        binder: Name,
        bound: Name,
        body: Box<Sk>,
    },
}

fn emit(sk: &Sk, path: &mut Vec<usize>, slots: &mut Vec<(SlotId, Vec<usize>)>) -> Formula {
    match sk {
        Sk::Mem(a, b) => Formula::Mem(Term::var(a), Term::var(b)),
        Sk::Conj(items) => {
            assert!(!items.is_empty());
            if items.len() == 1 {
                return emit(&items[0], path, slots);
            }
            let n = path.len();
            path.extend([0, 0, 0]);
            let head = emit(&items[0], path, slots);
            path.truncate(n);
            path.extend([0, 1, 0]);
            let rest = emit(&Sk::Conj(items[1..].iter().map(clone_sk).collect()), path, slots);
            path.truncate(n);
            crate::syntax::and(head, rest)
        }
        Sk::Disj(items) => {
            assert!(!items.is_empty());
            if items.len() == 1 {
                return emit(&items[0], path, slots);
            }
            let n = path.len();
            path.push(0);
            let head = emit(&items[0], path, slots);
            path.truncate(n);
            path.push(1);
            let rest = emit(&Sk::Disj(items[1..].iter().map(clone_sk).collect()), path, slots);
            path.truncate(n);
            crate::syntax::or(head, rest)
        }
        Sk::Ex(name, slot, body) => {
            if let Some(id) = slot {
                slots.push((*id, path.clone()));
            }
            path.push(0);
            let b = emit(body, path, slots);
            path.pop();
            mk_ex(name, &b)
        }
        Sk::All2 { binder, bound, body } => {
            let n = path.len();
            path.extend([0, 0, 0, 1]);
            let b = emit(body, path, slots);
            path.truncate(n);
            mk_all2(binder, &Term::var(bound), &b)
        }
    }
}

fn clone_sk(sk: &Sk) -> Sk {
    match sk {
        Sk::Mem(a, b) => Sk::Mem(a.clone(), b.clone()),
        Sk::Conj(v) => Sk::Conj(v.iter().map(clone_sk).collect()),
        Sk::Disj(v) => Sk::Disj(v.iter().map(clone_sk).collect()),
        Sk::Ex(n, s, b) => Sk::Ex(n.clone(), *s, Box::new(clone_sk(b))),
        Sk::All2 { binder, bound, body } => Sk::All2 {
            binder: binder.clone(),
            bound: bound.clone(),
            body: Box::new(clone_sk(body)),
        },
    }
}

fn mem(a: &Name, b: &Name) -> Sk {
    Sk::Mem(a.clone(), b.clone())
}

fn conj(items: Vec<Sk>) -> Sk {
    Sk::Conj(items)
}

fn disj(items: Vec<Sk>) -> Sk {
    Sk::Disj(items)
}

/// `Ex v (v ∈ container ∧ body(v))`: a guarded existential.
fn ex_in(fr: &mut FreshNames, container: &Name, body: impl FnOnce(&mut FreshNames, &Name) -> Sk) -> Sk {
    let v = fr.next();
    let inner = body(fr, &v);
    Sk::Ex(
        v.clone(),
        None,
        Box::new(conj(vec![mem(&v, container), inner])),
    )
}

/// `All2 z : a . z ∈ b`, requiring distinct names `a ≠ b`.
fn subs_vv(fr: &mut FreshNames, a: &Name, b: &Name) -> Sk {
    debug_assert_ne!(a, b);
    let z = fr.next();
    Sk::All2 {
        binder: z.clone(),
        bound: a.clone(),
        body: Box::new(mem(&z, b)),
    }
}

/// Extensional equality of two distinct variables.
fn eq_vv(fr: &mut FreshNames, a: &Name, b: &Name) -> Sk {
    conj(vec![subs_vv(fr, a, b), subs_vv(fr, b, a)])
}

/// `a = ∅`: every member satisfies the refutable `w ∈ w`.
fn is_empty(fr: &mut FreshNames, a: &Name) -> Sk {
    let w = fr.next();
    Sk::All2 {
        binder: w.clone(),
        bound: a.clone(),
        body: Box::new(mem(&w, &w)),
    }
}

/// `Var a` denotes exactly the constant set `k`, by structural
/// recursion on `k`.
fn is_const(fr: &mut FreshNames, a: &Name, k: &HfSet) -> Sk {
    if k.is_empty() {
        return is_empty(fr, a);
    }
    let w = fr.next();
    let cover = Sk::All2 {
        binder: w.clone(),
        bound: a.clone(),
        body: Box::new(disj(
            k.members().iter().map(|y| is_const(fr, &w, y)).collect(),
        )),
    };
    let mut items = vec![cover];
    for y in k.members() {
        items.push(ex_in(fr, a, |fr, m| is_const(fr, m, y)));
    }
    conj(items)
}

/// `p = {{a},{a,b}}`.
fn is_pair(fr: &mut FreshNames, p: &Name, a: &Name, b: &Name) -> Sk {
    ex_in(fr, p, |fr, s1| {
        let sing = {
            let c = fr.next();
            conj(vec![
                mem(a, s1),
                Sk::All2 {
                    binder: c.clone(),
                    bound: s1.clone(),
                    body: Box::new(eq_vv(fr, &c, a)),
                },
            ])
        };
        let s1c = s1.clone();
        ex_in(fr, p, move |fr, d| {
            let doub = {
                let c = fr.next();
                conj(vec![
                    mem(a, d),
                    mem(b, d),
                    Sk::All2 {
                        binder: c.clone(),
                        bound: d.clone(),
                        body: Box::new(disj(vec![eq_vv(fr, &c, a), eq_vv(fr, &c, b)])),
                    },
                ])
            };
            let only = {
                let c = fr.next();
                Sk::All2 {
                    binder: c.clone(),
                    bound: p.clone(),
                    body: Box::new(disj(vec![eq_vv(fr, &c, &s1c), eq_vv(fr, &c, d)])),
                }
            };
            conj(vec![sing, doub, only])
        })
    })
}

/// `p = ⟨k, a⟩` for a fixed constant first component `k`.
fn is_pair_const_fst(fr: &mut FreshNames, p: &Name, k: &HfSet, a: &Name) -> Sk {
    ex_in(fr, p, |fr, d| {
        let dc = d.clone();
        ex_in(fr, &dc, |fr, t| {
            conj(vec![is_const(fr, t, k), is_pair(fr, p, t, a)])
        })
    })
}

/// `p = ⟨k, a, b⟩ = ⟨k, ⟨a,b⟩⟩` for a fixed constant tag `k`.
fn is_triple_const_fst(fr: &mut FreshNames, p: &Name, k: &HfSet, a: &Name, b: &Name) -> Sk {
    ex_in(fr, p, |fr, d| {
        let dc = d.clone();
        ex_in(fr, &dc, |fr, q| {
            conj(vec![
                is_pair(fr, q, a, b),
                is_pair_const_fst(fr, p, k, q),
            ])
        })
    })
}

/// Destructure `p = ⟨a, b⟩` with both components guarded.
fn pair_split(
    fr: &mut FreshNames,
    p: &Name,
    body: impl FnOnce(&mut FreshNames, &Name, &Name) -> Sk,
) -> Sk {
    ex_in(fr, p, |fr, d1| {
        let d1c = d1.clone();
        ex_in(fr, &d1c, |fr, a| {
            let ac = a.clone();
            ex_in(fr, p, move |fr, d2| {
                let d2c = d2.clone();
                ex_in(fr, &d2c, move |fr, b| {
                    conj(vec![is_pair(fr, p, &ac, b), body(fr, &ac, b)])
                })
            })
        })
    })
}

/// `z = x ◁ y` for distinct variable names.
fn eats_vv(fr: &mut FreshNames, z: &Name, x: &Name, y: &Name) -> Sk {
    let w = fr.next();
    let w2 = fr.next();
    conj(vec![
        Sk::All2 {
            binder: w.clone(),
            bound: z.clone(),
            body: Box::new(disj(vec![mem(&w, x), eq_vv(fr, &w, y)])),
        },
        Sk::All2 {
            binder: w2.clone(),
            bound: x.clone(),
            body: Box::new(mem(&w2, z)),
        },
        mem(y, z),
    ])
}

/// `s = v ∪ {v}`.
fn succ_vv(fr: &mut FreshNames, s: &Name, v: &Name) -> Sk {
    let w = fr.next();
    let w2 = fr.next();
    conj(vec![
        mem(v, s),
        Sk::All2 {
            binder: w.clone(),
            bound: s.clone(),
            body: Box::new(disj(vec![mem(&w, v), eq_vv(fr, &w, v)])),
        },
        Sk::All2 {
            binder: w2.clone(),
            bound: v.clone(),
            body: Box::new(mem(&w2, s)),
        },
    ])
}

/// `k` is a von Neumann ordinal: transitive with ∈-trichotomous
/// members.  The bound-variable discipline of strict Σ forbids
/// mentioning `k` inside quantifiers bounded by `k`, so the body works
/// through an aliased copy, which carries a hint slot.
fn ord_p(fr: &mut FreshNames, k: &Name, slot: SlotId) -> Sk {
    let kk = fr.next();
    let p = fr.next();
    let z = fr.next();
    let p2 = fr.next();
    let q = fr.next();
    let trans = Sk::All2 {
        binder: p.clone(),
        bound: k.clone(),
        body: Box::new(Sk::All2 {
            binder: z.clone(),
            bound: p.clone(),
            body: Box::new(mem(&z, &kk)),
        }),
    };
    let trich_body = {
        let mut items = vec![mem(&p2, &q), mem(&q, &p2)];
        items.push(eq_vv(fr, &p2, &q));
        disj(items)
    };
    let trich = Sk::All2 {
        binder: p2.clone(),
        bound: k.clone(),
        body: Box::new(Sk::All2 {
            binder: q.clone(),
            bound: kk.clone(),
            body: Box::new(trich_body),
        }),
    };
    let eq = eq_vv(fr, &kk, k);
    Sk::Ex(kk, Some(slot), Box::new(conj(vec![eq, trans, trich])))
}

/// A trace entry `⟨l, pay⟩ ∈ s` satisfying `body(l, pay)`.
fn entry(
    fr: &mut FreshNames,
    s: &Name,
    body: impl FnOnce(&mut FreshNames, &Name, &Name) -> Sk,
) -> Sk {
    ex_in(fr, s, |fr, p| {
        let pc = p.clone();
        pair_split(fr, &pc, body)
    })
}

/// An entry strictly earlier than index `l`.
fn earlier(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    body: impl FnOnce(&mut FreshNames, &Name) -> Sk,
) -> Sk {
    let lc = l.clone();
    entry(fr, s, move |fr, l2, pay| {
        conj(vec![mem(l2, &lc), body(fr, pay)])
    })
}

// typed trace payloads: ⟨0, numeral⟩ for the successor ladder,
// ⟨1, value⟩ for the predicate's own data
fn typed(
    fr: &mut FreshNames,
    pay: &Name,
    ty: u64,
    body: impl FnOnce(&mut FreshNames, &Name) -> Sk,
) -> Sk {
    pair_split(fr, pay, move |fr, t, v| {
        conj(vec![is_const(fr, t, &HfSet::ord(ty)), body(fr, v)])
    })
}

/// An earlier numeral-ladder entry whose value satisfies `body`.
fn earlier_numeral(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    body: impl FnOnce(&mut FreshNames, &Name) -> Sk,
) -> Sk {
    earlier(fr, s, l, move |fr, pay| typed(fr, pay, 0, body))
}

fn earlier_data(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    body: impl FnOnce(&mut FreshNames, &Name) -> Sk,
) -> Sk {
    earlier(fr, s, l, move |fr, pay| typed(fr, pay, 1, body))
}

/// Ladder justification: the value is ∅ or the successor of an earlier
/// ladder value.
fn ladder_ok(fr: &mut FreshNames, s: &Name, l: &Name, v: &Name) -> Sk {
    let vc = v.clone();
    disj(vec![
        is_empty(fr, v),
        earlier_numeral(fr, s, l, move |fr, prev| succ_vv(fr, &vc, prev)),
    ])
}

fn fresh_pool(params: &[Name]) -> Result<FreshNames, ObjectError> {
    let set: BTreeSet<Name> = params.iter().cloned().collect();
    if set.len() != params.len() {
        return Err(ObjectError::ParamsNotDistinct);
    }
    Ok(FreshNames::avoiding(set))
}

// ---- the predicates ----

/// `s` is a `k`-element sequence: `k` is an ordinal, every member of
/// `s` is a pair indexed below `k`, and every index below `k` is
/// covered.
pub fn lstseq_p(s: &Name, k: &Name) -> Result<PredicateFormula, ObjectError> {
    let params = vec![s.clone(), k.clone()];
    let mut fr = fresh_pool(&params)?;
    let ordk = ord_p(&mut fr, k, 0);
    let shape = {
        let p = fr.next();
        let kc = k.clone();
        Sk::All2 {
            binder: p.clone(),
            bound: s.clone(),
            body: Box::new({
                let pc = p.clone();
                pair_split(&mut fr, &pc, move |_fr, l, _y| mem(l, &kc))
            }),
        }
    };
    let cover = {
        let l = fr.next();
        let lc = l.clone();
        let sc = s.clone();
        Sk::All2 {
            binder: l.clone(),
            bound: k.clone(),
            body: Box::new(entry(&mut fr, &sc, move |fr, l2, _pay| {
                eq_vv(fr, l2, &lc)
            })),
        }
    };
    let sk = conj(vec![ordk, shape, cover]);
    Ok(finish(sk, params, MetaOracle::LstSeq))
}

fn finish(sk: Sk, params: Vec<Name>, oracle: MetaOracle) -> PredicateFormula {
    let mut slots = Vec::new();
    let mut path = Vec::new();
    let formula = emit(&sk, &mut path, &mut slots);
    PredicateFormula {
        formula,
        params,
        oracle,
        slots,
    }
}

/// Justification disjunction for a term-code trace value `c` at index
/// `l`: an earlier numeral, a bound-index pair over an earlier numeral,
/// or an eats-triple over two earlier data entries.
fn term_entry_ok(fr: &mut FreshNames, s: &Name, l: &Name, c: &Name) -> Sk {
    let c1 = c.clone();
    let case_numeral = earlier_numeral(fr, s, l, move |fr, nv| eq_vv(fr, &c1, nv));
    let c2 = c.clone();
    let case_ind = earlier_numeral(fr, s, l, move |fr, m| {
        is_pair_const_fst(fr, &c2, &HfSet::ord(TAG_IND), m)
    });
    let c3 = c.clone();
    let (s2, l2) = (s.clone(), l.clone());
    let case_eats = earlier_data(fr, s, l, move |fr, a| {
        let ac = a.clone();
        earlier_data(fr, &s2, &l2, move |fr, b| {
            is_triple_const_fst(fr, &c3, &HfSet::ord(TAG_EATS), &ac, b)
        })
    });
    disj(vec![case_numeral, case_ind, case_eats])
}

/// The trace-set existential plus per-entry justification.
fn trace_predicate(
    params: Vec<Name>,
    oracle: MetaOracle,
    build: impl FnOnce(&mut FreshNames, &Name) -> Vec<Sk>,
) -> Result<PredicateFormula, ObjectError> {
    let mut fr = fresh_pool(&params)?;
    let s = fr.next();
    let conjuncts = build(&mut fr, &s);
    let sk = Sk::Ex(s, Some(0), Box::new(conj(conjuncts)));
    Ok(finish(sk, params, oracle))
}

/// Every entry of the trace is justified: ladder entries by the
/// successor rule, data entries by `data_ok`.
fn all_entries_ok(
    fr: &mut FreshNames,
    s: &Name,
    data_ok: impl Fn(&mut FreshNames, &Name, &Name, &Name) -> Sk + 'static + Clone,
) -> Sk {
    let p = fr.next();
    let sc = s.clone();
    Sk::All2 {
        binder: p.clone(),
        bound: s.clone(),
        body: Box::new({
            let pc = p.clone();
            pair_split(fr, &pc, move |fr, l, pay| {
                let (lc, sc2) = (l.clone(), sc.clone());
                let data = data_ok.clone();
                let lad = {
                    let (l2, s2) = (l.clone(), sc.clone());
                    typed(fr, pay, 0, move |fr, v| ladder_ok(fr, &s2, &l2, v))
                };
                let dat = typed(fr, pay, 1, move |fr, v| data(fr, &sc2, &lc, v));
                disj(vec![lad, dat])
            })
        }),
    }
}

/// `t` is (the code of) a de Bruijn term.
pub fn term_p(t: &Name) -> Result<PredicateFormula, ObjectError> {
    let tc = t.clone();
    trace_predicate(vec![t.clone()], MetaOracle::TermCode, move |fr, s| {
        let entries = all_entries_ok(fr, s, term_entry_ok);
        let final_cond = entry(fr, s, move |fr, _l, pay| {
            typed(fr, pay, 1, move |fr, v| eq_vv(fr, v, &tc))
        });
        vec![entries, final_cond]
    })
}

/// Data payload for substitution/abstraction traces over terms: a pair
/// `⟨input, output⟩` justified case by case.  `special` handles the
/// variable being replaced.
fn rewrite_term_cases(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    a: &Name,
    b: &Name,
    v: &Name,
    special: impl FnOnce(&mut FreshNames) -> Sk,
) -> Sk {
    // the target variable itself
    let case_var = special(fr);
    // an untouched numeral: equal to a ladder entry and apart from v
    let (ac, bc, vc) = (a.clone(), b.clone(), v.clone());
    let case_other = earlier_numeral(fr, s, l, move |fr, nv| {
        conj(vec![
            eq_vv(fr, &ac, nv),
            disj(vec![mem(&ac, &vc), mem(&vc, &ac)]),
            eq_vv(fr, &bc, &ac),
        ])
    });
    // an untouched bound index ⟨q_Ind, m⟩
    let (ac, bc) = (a.clone(), b.clone());
    let case_ind = earlier_numeral(fr, s, l, move |fr, m| {
        conj(vec![
            is_pair_const_fst(fr, &ac, &HfSet::ord(TAG_IND), m),
            eq_vv(fr, &bc, &ac),
        ])
    });
    // eats split over earlier rewrite pairs
    let (ac, bc) = (a.clone(), b.clone());
    let (s2, l2) = (s.clone(), l.clone());
    let case_eats = earlier_data(fr, s, l, move |fr, pr1| {
        pair_split(fr, pr1, move |fr, a1, b1| {
            let (a1c, b1c) = (a1.clone(), b1.clone());
            earlier_data(fr, &s2, &l2, move |fr, pr2| {
                pair_split(fr, pr2, move |fr, a2, b2| {
                    conj(vec![
                        is_triple_const_fst(fr, &ac, &HfSet::ord(TAG_EATS), &a1c, a2),
                        is_triple_const_fst(fr, &bc, &HfSet::ord(TAG_EATS), &b1c, b2),
                    ])
                })
            })
        })
    });
    disj(vec![case_var, case_other, case_ind, case_eats])
}

/// Both `v` and (when present) the depth parameter must appear in the
/// numeral ladder, so that apartness tests read ordinals.
fn param_is_numeral(fr: &mut FreshNames, s: &Name, pname: &Name) -> Sk {
    let pc = pname.clone();
    entry(fr, s, move |fr, _l, pay| {
        typed(fr, pay, 0, move |fr, nv| eq_vv(fr, nv, &pc))
    })
}

/// `r` is the result of abstracting the variable numeral `v` at depth
/// `k` in the term code `t`.
pub fn abst_term_p(
    v: &Name,
    k: &Name,
    t: &Name,
    r: &Name,
) -> Result<PredicateFormula, ObjectError> {
    let params = vec![v.clone(), k.clone(), t.clone(), r.clone()];
    let (vc, kc, tc, rc) = (v.clone(), k.clone(), t.clone(), r.clone());
    trace_predicate(params, MetaOracle::AbstTerm, move |fr, s| {
        let v2 = vc.clone();
        let k2 = kc.clone();
        let entries = all_entries_ok(fr, s, move |fr, s, l, pay| {
            let (v3, k3) = (v2.clone(), k2.clone());
            pair_split(fr, pay, move |fr, a, b| {
                let (a0, b0, v0, k0) = (a.clone(), b.clone(), v3.clone(), k3.clone());
                rewrite_term_cases(fr, s, l, a, b, &v3, move |fr| {
                    conj(vec![
                        eq_vv(fr, &a0, &v0),
                        is_pair_const_fst(fr, &b0, &HfSet::ord(TAG_IND), &k0),
                    ])
                })
            })
        });
        let final_cond = entry(fr, s, move |fr, _l, pay| {
            typed(fr, pay, 1, move |fr, pr| is_pair(fr, pr, &tc, &rc))
        });
        let vn = param_is_numeral(fr, s, &vc);
        let kn = param_is_numeral(fr, s, &kc);
        vec![entries, vn, kn, final_cond]
    })
}

/// `r` is the result of substituting the term code `x` for the
/// variable numeral `v` in the term code `t`.
pub fn subst_term_p(
    v: &Name,
    x: &Name,
    t: &Name,
    r: &Name,
) -> Result<PredicateFormula, ObjectError> {
    let params = vec![v.clone(), x.clone(), t.clone(), r.clone()];
    let (vc, xc, tc, rc) = (v.clone(), x.clone(), t.clone(), r.clone());
    trace_predicate(params, MetaOracle::SubstTerm, move |fr, s| {
        let v2 = vc.clone();
        let x2 = xc.clone();
        let entries = all_entries_ok(fr, s, move |fr, s, l, pay| {
            let (v3, x3) = (v2.clone(), x2.clone());
            pair_split(fr, pay, move |fr, a, b| {
                let (a0, b0) = (a.clone(), b.clone());
                let (v0, x0) = (v3.clone(), x3.clone());
                rewrite_term_cases(fr, s, l, a, b, &v3, move |fr| {
                    conj(vec![eq_vv(fr, &a0, &v0), eq_vv(fr, &b0, &x0)])
                })
            })
        });
        let final_cond = entry(fr, s, move |fr, _l, pay| {
            typed(fr, pay, 1, move |fr, pr| is_pair(fr, pr, &tc, &rc))
        });
        let vn = param_is_numeral(fr, s, &vc);
        vec![entries, vn, final_cond]
    })
}

/// Data payload for formula-level rewriting: triples `⟨⟨d, in⟩, out⟩`
/// when depth-tracking (abstraction) or pairs `⟨in, out⟩` otherwise.
/// `depth` controls which.
fn rewrite_form_conjuncts(
    fr: &mut FreshNames,
    s: &Name,
    v: &Name,
    with_depth: bool,
    special_out: impl Fn(&mut FreshNames, &Name, &Name) -> Sk + Clone + 'static,
    x_eq_out: Option<Name>,
) -> Sk {
    // entries: with_depth: pay = ⟨⟨d, in⟩, out⟩; else pay = ⟨in, out⟩.
    let v2 = v.clone();
    all_entries_ok(fr, s, move |fr, s, l, pay| {
        let v3 = v2.clone();
        let special = special_out.clone();
        let xeq = x_eq_out.clone();
        if with_depth {
            pair_split(fr, pay, move |fr, du, out| {
                let outc = out.clone();
                pair_split(fr, du, move |fr, d, inp| {
                    form_cases(fr, s, l, d, Some(d), inp, &outc, &v3, special, xeq)
                })
            })
        } else {
            pair_split(fr, pay, move |fr, inp, out| {
                let dummy = inp.clone();
                form_cases(fr, s, l, &dummy, None, inp, out, &v3, special, xeq)
            })
        }
    })
}

/// One justification disjunction shared by formula-level substitution
/// and abstraction.  `depth` is `Some(d)` when entries carry a depth
/// component (abstraction shifts it under `Ex`).
#[allow(clippy::too_many_arguments)]
fn form_cases(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    _anchor: &Name,
    depth: Option<&Name>,
    inp: &Name,
    out: &Name,
    v: &Name,
    special_out: impl Fn(&mut FreshNames, &Name, &Name) -> Sk + Clone + 'static,
    x_eq_out: Option<Name>,
) -> Sk {
    let _ = x_eq_out;
    let mut cases = Vec::new();
    // variable being rewritten
    {
        let (i0, o0, v0) = (inp.clone(), out.clone(), v.clone());
        let sp = special_out.clone();
        let mut items = vec![eq_vv(fr, &i0, &v0)];
        items.push(sp(fr, &i0, &o0));
        cases.push(conj(items));
        let _ = depth;
    }
    // untouched numeral apart from v
    {
        let (i0, o0, v0) = (inp.clone(), out.clone(), v.clone());
        cases.push(earlier_numeral(fr, s, l, move |fr, nv| {
            conj(vec![
                eq_vv(fr, &i0, nv),
                disj(vec![mem(&i0, &v0), mem(&v0, &i0)]),
                eq_vv(fr, &o0, &i0),
            ])
        }));
    }
    // untouched bound index
    {
        let (i0, o0) = (inp.clone(), out.clone());
        cases.push(earlier_numeral(fr, s, l, move |fr, m| {
            conj(vec![
                is_pair_const_fst(fr, &i0, &HfSet::ord(TAG_IND), m),
                eq_vv(fr, &o0, &i0),
            ])
        }));
    }
    // binary constructors: eats, mem, eq, disj
    for tag in [TAG_EATS, TAG_MEM, TAG_EQ, TAG_DISJ] {
        let (i0, o0) = (inp.clone(), out.clone());
        let (s2, l2) = (s.clone(), l.clone());
        let dref = depth.cloned();
        cases.push(earlier_same_depth(fr, s, l, dref.clone(), move |fr, a1, b1| {
            let (a1c, b1c) = (a1.clone(), b1.clone());
            let dref2 = dref.clone();
            let (i1, o1) = (i0.clone(), o0.clone());
            earlier_same_depth(fr, &s2, &l2, dref2, move |fr, a2, b2| {
                conj(vec![
                    is_triple_const_fst(fr, &i1, &HfSet::ord(tag), &a1c, a2),
                    is_triple_const_fst(fr, &o1, &HfSet::ord(tag), &b1c, b2),
                ])
            })
        }));
    }
    // negation
    {
        let (i0, o0) = (inp.clone(), out.clone());
        let dref = depth.cloned();
        cases.push(earlier_same_depth(fr, s, l, dref, move |fr, a1, b1| {
            conj(vec![
                is_pair_const_fst(fr, &i0, &HfSet::ord(TAG_NEG), a1),
                is_pair_const_fst(fr, &o0, &HfSet::ord(TAG_NEG), b1),
            ])
        }));
    }
    // existential: body rewritten at the successor depth
    {
        let (i0, o0) = (inp.clone(), out.clone());
        match depth {
            Some(d) => {
                let dc = d.clone();
                cases.push(earlier_at_succ_depth(fr, s, l, &dc, move |fr, a1, b1| {
                    conj(vec![
                        is_pair_const_fst(fr, &i0, &HfSet::ord(TAG_EX), a1),
                        is_pair_const_fst(fr, &o0, &HfSet::ord(TAG_EX), b1),
                    ])
                }));
            }
            None => {
                let (s2, l2) = (s.clone(), l.clone());
                let _ = (&s2, &l2);
                cases.push(earlier_data(fr, s, l, move |fr, pr| {
                    pair_split(fr, pr, move |fr, a1, b1| {
                        conj(vec![
                            is_pair_const_fst(fr, &i0, &HfSet::ord(TAG_EX), a1),
                            is_pair_const_fst(fr, &o0, &HfSet::ord(TAG_EX), b1),
                        ])
                    })
                }));
            }
        }
    }
    disj(cases)
}

/// An earlier data entry whose payload rewrites `(a → b)` at the same
/// depth as `d` (or depthless when `d` is `None`).
fn earlier_same_depth(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    d: Option<Name>,
    body: impl FnOnce(&mut FreshNames, &Name, &Name) -> Sk + 'static,
) -> Sk {
    match d {
        Some(d) => earlier_data(fr, s, l, move |fr, pr| {
            pair_split(fr, pr, move |fr, du, out| {
                let outc = out.clone();
                pair_split(fr, du, move |fr, d2, inp| {
                    conj(vec![eq_vv(fr, d2, &d), body(fr, inp, &outc)])
                })
            })
        }),
        None => earlier_data(fr, s, l, move |fr, pr| {
            pair_split(fr, pr, move |fr, inp, out| body(fr, inp, out))
        }),
    }
}

/// An earlier data entry at depth `succ(d)`.
fn earlier_at_succ_depth(
    fr: &mut FreshNames,
    s: &Name,
    l: &Name,
    d: &Name,
    body: impl FnOnce(&mut FreshNames, &Name, &Name) -> Sk + 'static,
) -> Sk {
    let dc = d.clone();
    earlier_data(fr, s, l, move |fr, pr| {
        pair_split(fr, pr, move |fr, du, out| {
            let outc = out.clone();
            pair_split(fr, du, move |fr, d2, inp| {
                conj(vec![succ_vv(fr, d2, &dc), body(fr, inp, &outc)])
            })
        })
    })
}

/// `r` abstracts the variable numeral `v` at depth `k` in the formula
/// code `a`.
pub fn abst_form_p(
    v: &Name,
    k: &Name,
    a: &Name,
    r: &Name,
) -> Result<PredicateFormula, ObjectError> {
    let params = vec![v.clone(), k.clone(), a.clone(), r.clone()];
    let (vc, kc, ac, rc) = (v.clone(), k.clone(), a.clone(), r.clone());
    trace_predicate(params, MetaOracle::AbstForm, move |fr, s| {
        abst_form_conjuncts(fr, s, &vc, &kc, &ac, &rc)
    })
}

/// The conjunct list of the abstraction-trace predicate, reusable
/// inline (make_form_p embeds it).
fn abst_form_conjuncts(
    fr: &mut FreshNames,
    s: &Name,
    v: &Name,
    k: &Name,
    a: &Name,
    r: &Name,
) -> Vec<Sk> {
    let entries = rewrite_form_conjuncts(
        fr,
        s,
        v,
        true,
        |fr, _inp, out| {
            // at the variable case, the output pairs the current depth:
            // handled by the caller closure below via the entry depth
            // component; out = ⟨q_Ind, d⟩ is asserted there
            let oc = out.clone();
            // placeholder; replaced in the entries builder
            is_empty(fr, &oc)
        },
        None,
    );
    // The generic builder cannot see the entry's depth component at the
    // special case, so rebuild entries explicitly here.
    let _ = entries;
    let v2 = v.clone();
    let entries = all_entries_ok(fr, s, move |fr, s, l, pay| {
        let v3 = v2.clone();
        pair_split(fr, pay, move |fr, du, out| {
            let outc = out.clone();
            pair_split(fr, du, move |fr, d, inp| {
                let (d0, o0) = (d.clone(), outc.clone());
                form_cases(
                    fr,
                    s,
                    l,
                    d,
                    Some(&d0.clone()),
                    inp,
                    &outc,
                    &v3,
                    move |fr, _i, o| {
                        debug_assert_eq!(*o, o0);
                        is_pair_const_fst(fr, o, &HfSet::ord(TAG_IND), &d0)
                    },
                    None,
                )
            })
        })
    });
    let (kc, ac, rc) = (k.clone(), a.clone(), r.clone());
    let final_cond = entry(fr, s, move |fr, _l, pay| {
        typed(fr, pay, 1, move |fr, pr| {
            pair_split(fr, pr, move |fr, du, out| {
                conj(vec![is_pair(fr, du, &kc, &ac), eq_vv(fr, out, &rc)])
            })
        })
    });
    let vn = param_is_numeral(fr, s, v);
    let kn = param_is_numeral(fr, s, k);
    vec![entries, vn, kn, final_cond]
}

/// `r` substitutes the term code `x` for the variable numeral `v` in
/// the formula code `a`.
pub fn subst_form_p(
    v: &Name,
    x: &Name,
    a: &Name,
    r: &Name,
) -> Result<PredicateFormula, ObjectError> {
    let params = vec![v.clone(), x.clone(), a.clone(), r.clone()];
    let (vc, xc, ac, rc) = (v.clone(), x.clone(), a.clone(), r.clone());
    trace_predicate(params, MetaOracle::SubstForm, move |fr, s| {
        subst_form_conjuncts(fr, s, &vc, &xc, &ac, &rc)
    })
}

fn subst_form_conjuncts(
    fr: &mut FreshNames,
    s: &Name,
    v: &Name,
    x: &Name,
    a: &Name,
    r: &Name,
) -> Vec<Sk> {
    let x2 = x.clone();
    let entries = rewrite_form_conjuncts(
        fr,
        s,
        v,
        false,
        move |fr, _inp, out| eq_vv(fr, out, &x2),
        None,
    );
    let (ac, rc) = (a.clone(), r.clone());
    let final_cond = entry(fr, s, move |fr, _l, pay| {
        typed(fr, pay, 1, move |fr, pr| is_pair(fr, pr, &ac, &rc))
    });
    let vn = param_is_numeral(fr, s, v);
    vec![entries, vn, final_cond]
}

/// `y` codes a formula built from `u` (and `w`): a disjunction, a
/// negation, or an existential over an abstraction of `u`.
pub fn make_form_p(y: &Name, u: &Name, w: &Name) -> Result<PredicateFormula, ObjectError> {
    let params = vec![y.clone(), u.clone(), w.clone()];
    let mut fr = fresh_pool(&params)?;
    let d1 = is_triple_const_fst(&mut fr, y, &HfSet::ord(TAG_DISJ), u, w);
    let d2 = is_pair_const_fst(&mut fr, y, &HfSet::ord(TAG_NEG), u);
    // ∃v ∃au ∃kz: AbstForm(v, kz, u, au) ∧ y = ⟨q_Ex, au⟩, kz = 0
    let vv = fr.next();
    let au = fr.next();
    let kz = fr.next();
    let s = fr.next();
    let mut inner = vec![is_empty(&mut fr, &kz)];
    inner.extend(abst_form_conjuncts(&mut fr, &s, &vv, &kz, u, &au));
    inner.push(is_pair_const_fst(&mut fr, y, &HfSet::ord(TAG_EX), &au));
    let d3 = Sk::Ex(
        vv,
        Some(1),
        Box::new(Sk::Ex(
            au,
            Some(2),
            Box::new(Sk::Ex(
                kz,
                Some(3),
                Box::new(Sk::Ex(s, Some(4), Box::new(conj(inner)))),
            )),
        )),
    );
    let sk = disj(vec![d1, d2, d3]);
    Ok(finish(sk, params, MetaOracle::MakeForm))
}

/// The Q relation: `r` codes a ground term denoting `x`, built by the
/// eats recursion.  Deliberately not single-valued.
pub fn q_p(x: &Name, r: &Name) -> Result<PredicateFormula, ObjectError> {
    let params = vec![x.clone(), r.clone()];
    let (xc, rc) = (x.clone(), r.clone());
    trace_predicate(params, MetaOracle::Q, move |fr, s| {
        vec![
            q_entries(fr, s),
            entry(fr, s, move |fr, _l, pay| {
                typed(fr, pay, 1, move |fr, pr| is_pair(fr, pr, &xc, &rc))
            }),
        ]
    })
}

fn q_entries(fr: &mut FreshNames, s: &Name) -> Sk {
    all_entries_ok(fr, s, |fr, s, l, pay| {
        pair_split(fr, pay, move |fr, xv, rv| {
            let zero_case = conj(vec![is_empty(fr, xv), is_empty(fr, rv)]);
            let (x0, r0) = (xv.clone(), rv.clone());
            let (s2, l2) = (s.clone(), l.clone());
            let eats_case = earlier_data(fr, s, l, move |fr, pr1| {
                pair_split(fr, pr1, move |fr, x1, r1| {
                    let (x1c, r1c) = (x1.clone(), r1.clone());
                    earlier_data(fr, &s2, &l2, move |fr, pr2| {
                        pair_split(fr, pr2, move |fr, y1, r2| {
                            conj(vec![
                                eats_vv(fr, &x0, &x1c, y1),
                                is_triple_const_fst(fr, &r0, &HfSet::ord(TAG_EATS), &r1c, r2),
                            ])
                        })
                    })
                })
            });
            disj(vec![zero_case, eats_case])
        })
    })
}

/// KRP: `y = K(x)` relative to the variable numeral `v`, composed from
/// the Q relation and formula-code substitution.
pub fn krp_p(v: &Name, x: &Name, y: &Name) -> Result<PredicateFormula, ObjectError> {
    let params = vec![v.clone(), x.clone(), y.clone()];
    let mut fr = fresh_pool(&params)?;
    let q = fr.next();
    let s1 = fr.next();
    let s2 = fr.next();
    // QR(x, q) inline: trace over s1 with final pair ⟨x, q⟩
    let mut body = vec![q_entries(&mut fr, &s1)];
    {
        let (xc, qc) = (x.clone(), q.clone());
        body.push(entry(&mut fr, &s1, move |fr, _l, pay| {
            typed(fr, pay, 1, move |fr, pr| is_pair(fr, pr, &xc, &qc))
        }));
    }
    // SubstForm(v, q, x, y) inline over s2
    body.extend(subst_form_conjuncts(&mut fr, &s2, v, &q, x, y));
    let sk = Sk::Ex(
        q,
        Some(0),
        Box::new(Sk::Ex(
            s1,
            Some(1),
            Box::new(Sk::Ex(s2, Some(2), Box::new(conj(body)))),
        )),
    );
    Ok(finish(sk, params, MetaOracle::Krp))
}

// ---- meta oracles and hint computation ----

fn num_ladder(upto: u64) -> Vec<HfSet> {
    (0..=upto)
        .map(|n| HfSet::pair(&HfSet::ord(0), &HfSet::ord(n)))
        .collect()
}

fn data_entry(v: &HfSet) -> HfSet {
    HfSet::pair(&HfSet::ord(1), v)
}

fn max_numeral_in_code(c: &HfSet) -> u64 {
    let mut best = 0;
    fn go(c: &HfSet, best: &mut u64) {
        if let Some(n) = c.to_ordinal() {
            *best = (*best).max(n);
            return;
        }
        if let Ok((tg, rest)) = c.unpair() {
            match tg.to_ordinal() {
                Some(TAG_IND) => {
                    if let Some(m) = rest.to_ordinal() {
                        *best = (*best).max(m);
                    }
                }
                Some(TAG_NEG) | Some(TAG_EX) => go(&rest, best),
                Some(TAG_EATS) | Some(TAG_MEM) | Some(TAG_EQ) | Some(TAG_DISJ) => {
                    if let Ok((a, b)) = rest.unpair() {
                        go(&a, best);
                        go(&b, best);
                    }
                }
                _ => {}
            }
        }
    }
    go(c, &mut best);
    best
}

fn is_term_code(c: &HfSet) -> bool {
    dec_tm(&Code(c.clone())).is_ok()
}

fn is_formula_code(c: &HfSet) -> bool {
    dec_fm(&Code(c.clone())).is_ok()
}

/// Subterm codes in postorder, children before parents, deduplicated.
fn term_subcodes(c: &HfSet, out: &mut Vec<HfSet>) {
    if out.contains(c) {
        return;
    }
    if let Ok((tg, rest)) = c.unpair() {
        if tg.to_ordinal() == Some(TAG_EATS) {
            if let Ok((a, b)) = rest.unpair() {
                term_subcodes(&a, out);
                term_subcodes(&b, out);
            }
        }
    }
    out.push(c.clone());
}

fn build_term_trace(t: &HfSet) -> HfSet {
    let mut subs = Vec::new();
    term_subcodes(t, &mut subs);
    let mut items = num_ladder(max_numeral_in_code(t));
    items.extend(subs.iter().map(data_entry));
    HfSet::seq_from_list(&items)
}

/// Rewrite-trace over term codes: postorder pairs (input, output).
fn rewrite_term_pairs(
    c: &HfSet,
    f: &impl Fn(&HfSet) -> HfSet,
    out: &mut Vec<(HfSet, HfSet)>,
) {
    if out.iter().any(|(a, _)| a == c) {
        return;
    }
    if let Ok((tg, rest)) = c.unpair() {
        if tg.to_ordinal() == Some(TAG_EATS) {
            if let Ok((a, b)) = rest.unpair() {
                rewrite_term_pairs(&a, f, out);
                rewrite_term_pairs(&b, f, out);
            }
        }
    }
    out.push((c.clone(), f(c)));
}

fn build_abst_term_trace(v: &HfSet, k: &HfSet, t: &HfSet) -> Option<HfSet> {
    let kd = k.to_ordinal()?;
    let mut pairs = Vec::new();
    let abst = |c: &HfSet| abst_code(&Code(v.clone()), kd, &Code(c.clone())).unwrap().0;
    rewrite_term_pairs(t, &abst, &mut pairs);
    let maxn = max_numeral_in_code(t)
        .max(v.to_ordinal().unwrap_or(0))
        .max(kd);
    let mut items = num_ladder(maxn);
    items.extend(
        pairs
            .iter()
            .map(|(a, b)| data_entry(&HfSet::pair(a, b))),
    );
    Some(HfSet::seq_from_list(&items))
}

fn build_subst_term_trace(v: &HfSet, x: &HfSet, t: &HfSet) -> HfSet {
    let mut pairs = Vec::new();
    let sub = |c: &HfSet| subst_code(&Code(v.clone()), &Code(x.clone()), &Code(c.clone()))
        .unwrap()
        .0;
    rewrite_term_pairs(t, &sub, &mut pairs);
    let maxn = max_numeral_in_code(t).max(v.to_ordinal().unwrap_or(0));
    let mut items = num_ladder(maxn);
    items.extend(pairs.iter().map(|(a, b)| data_entry(&HfSet::pair(a, b))));
    HfSet::seq_from_list(&items)
}

/// Depth-annotated rewrite pairs for formula abstraction, in
/// dependency order.
fn abst_form_pairs(
    v: &HfSet,
    d: u64,
    c: &HfSet,
    out: &mut Vec<(u64, HfSet, HfSet)>,
) -> HfSet {
    if let Some((_, _, r)) = out.iter().find(|(dd, cc, _)| *dd == d && cc == c) {
        return r.clone();
    }
    let result = abst_code(&Code(v.clone()), d, &Code(c.clone())).unwrap().0;
    if let Ok((tg, rest)) = c.unpair() {
        match tg.to_ordinal() {
            Some(TAG_NEG) => {
                abst_form_pairs(v, d, &rest, out);
            }
            Some(TAG_EX) => {
                abst_form_pairs(v, d + 1, &rest, out);
            }
            Some(TAG_EATS) | Some(TAG_MEM) | Some(TAG_EQ) | Some(TAG_DISJ) => {
                if let Ok((a, b)) = rest.unpair() {
                    abst_form_pairs(v, d, &a, out);
                    abst_form_pairs(v, d, &b, out);
                }
            }
            _ => {}
        }
    }
    out.push((d, c.clone(), result.clone()));
    result
}

fn build_abst_form_trace(v: &HfSet, k: &HfSet, a: &HfSet) -> Option<HfSet> {
    let kd = k.to_ordinal()?;
    let mut triples = Vec::new();
    abst_form_pairs(v, kd, a, &mut triples);
    let maxd = triples.iter().map(|(d, _, _)| *d).max().unwrap_or(0);
    let maxn = max_numeral_in_code(a)
        .max(v.to_ordinal().unwrap_or(0))
        .max(maxd);
    let mut items = num_ladder(maxn);
    items.extend(triples.iter().map(|(d, i, o)| {
        data_entry(&HfSet::pair(&HfSet::pair(&HfSet::ord(*d), i), o))
    }));
    Some(HfSet::seq_from_list(&items))
}

fn subst_form_pairs(
    v: &HfSet,
    x: &HfSet,
    c: &HfSet,
    out: &mut Vec<(HfSet, HfSet)>,
) -> HfSet {
    if let Some((_, r)) = out.iter().find(|(cc, _)| cc == c) {
        return r.clone();
    }
    let result = subst_code(&Code(v.clone()), &Code(x.clone()), &Code(c.clone()))
        .unwrap()
        .0;
    if let Ok((tg, rest)) = c.unpair() {
        match tg.to_ordinal() {
            Some(TAG_NEG) | Some(TAG_EX) => {
                subst_form_pairs(v, x, &rest, out);
            }
            Some(TAG_EATS) | Some(TAG_MEM) | Some(TAG_EQ) | Some(TAG_DISJ) => {
                if let Ok((a, b)) = rest.unpair() {
                    subst_form_pairs(v, x, &a, out);
                    subst_form_pairs(v, x, &b, out);
                }
            }
            _ => {}
        }
    }
    out.push((c.clone(), result.clone()));
    result
}

fn build_subst_form_trace(v: &HfSet, x: &HfSet, a: &HfSet) -> HfSet {
    let mut pairs = Vec::new();
    subst_form_pairs(v, x, a, &mut pairs);
    let maxn = max_numeral_in_code(a).max(v.to_ordinal().unwrap_or(0));
    let mut items = num_ladder(maxn);
    items.extend(pairs.iter().map(|(i, o)| data_entry(&HfSet::pair(i, o))));
    HfSet::seq_from_list(&items)
}

/// Q-trace for a ground term code build: stages of the eats recursion.
fn q_pairs(t: &Term, out: &mut Vec<(HfSet, HfSet)>) -> (HfSet, HfSet) {
    match t {
        Term::Zero => {
            let pair = (HfSet::empty(), HfSet::empty());
            if !out.contains(&pair) {
                out.push(pair.clone());
            }
            pair
        }
        Term::Eats(a, b) => {
            let (va, ra) = q_pairs(a, out);
            let (vb, rb) = q_pairs(b, out);
            let v = va.eats(&vb);
            let r = HfSet::pair(
                &HfSet::ord(TAG_EATS),
                &HfSet::pair(&ra, &rb),
            );
            let pair = (v, r);
            if !out.contains(&pair) {
                out.push(pair.clone());
            }
            pair
        }
        _ => unreachable!("q_pairs expects a ground term"),
    }
}

fn build_q_trace(x: &HfSet) -> HfSet {
    let t = canonical_term(x);
    let mut pairs = Vec::new();
    q_pairs(&t, &mut pairs);
    let items: Vec<HfSet> = pairs
        .iter()
        .map(|(a, b)| data_entry(&HfSet::pair(a, b)))
        .collect();
    HfSet::seq_from_list(&items)
}

/// Relaxed sequence-shape test matching `lstseq_p`'s semantics: `k` is
/// an ordinal, members of `s` are pairs with first component below `k`,
/// and every index below `k` is covered.
pub fn meta_lstseq(s: &HfSet, k: &HfSet) -> bool {
    let klen = match k.to_ordinal() {
        Some(n) => n,
        None => return false,
    };
    let mut covered = vec![false; klen as usize];
    for p in s.members() {
        match p.unpair() {
            Ok((l, _)) => match l.to_ordinal() {
                Some(i) if i < klen => covered[i as usize] = true,
                _ => return false,
            },
            Err(_) => return false,
        }
    }
    covered.into_iter().all(|b| b)
}

impl PredicateFormula {
    /// The executable meta predicate's verdict on concrete values.
    pub fn meta_truth(&self, args: &[HfSet]) -> bool {
        assert_eq!(args.len(), self.params.len());
        match self.oracle {
            MetaOracle::LstSeq => meta_lstseq(&args[0], &args[1]),
            MetaOracle::TermCode => is_term_code(&args[0]),
            MetaOracle::AbstTerm => {
                let (v, k, t, r) = (&args[0], &args[1], &args[2], &args[3]);
                if !is_var_numeral_set(v) || k.to_ordinal().is_none() || !is_term_code(t) {
                    return false;
                }
                abst_code(&Code(v.clone()), k.to_ordinal().unwrap(), &Code(t.clone()))
                    .map(|c| c.0 == *r)
                    .unwrap_or(false)
            }
            MetaOracle::SubstTerm => {
                let (v, x, t, r) = (&args[0], &args[1], &args[2], &args[3]);
                if !is_var_numeral_set(v) || !is_term_code(x) || !is_term_code(t) {
                    return false;
                }
                subst_code(&Code(v.clone()), &Code(x.clone()), &Code(t.clone()))
                    .map(|c| c.0 == *r)
                    .unwrap_or(false)
            }
            MetaOracle::AbstForm => {
                let (v, k, a, r) = (&args[0], &args[1], &args[2], &args[3]);
                if !is_var_numeral_set(v) || k.to_ordinal().is_none() || !is_formula_code(a) {
                    return false;
                }
                abst_code(&Code(v.clone()), k.to_ordinal().unwrap(), &Code(a.clone()))
                    .map(|c| c.0 == *r)
                    .unwrap_or(false)
            }
            MetaOracle::SubstForm => {
                let (v, x, a, r) = (&args[0], &args[1], &args[2], &args[3]);
                if !is_var_numeral_set(v) || !is_term_code(x) || !is_formula_code(a) {
                    return false;
                }
                subst_code(&Code(v.clone()), &Code(x.clone()), &Code(a.clone()))
                    .map(|c| c.0 == *r)
                    .unwrap_or(false)
            }
            MetaOracle::MakeForm => make_form(&args[0], &args[1], &args[2]),
            MetaOracle::Krp => {
                let (v, x, y) = (&args[0], &args[1], &args[2]);
                if !is_var_numeral_set(v) || !is_formula_code(x) {
                    return false;
                }
                let q = enc_tm(&canonical_term(x)).unwrap().0;
                subst_code(&Code(v.clone()), &Code(q), &Code(x.clone()))
                    .map(|c| c.0 == *y)
                    .unwrap_or(false)
            }
            MetaOracle::Q => {
                let (x, r) = (&args[0], &args[1]);
                enc_tm(&canonical_term(x)).map(|c| c.0 == *r).unwrap_or(false)
            }
        }
    }

    /// Witness hints for the outer spine, computed from the meta-level
    /// trace builders.  `None` when the meta predicate is false (the
    /// hints would not exist).
    pub fn meta_hints(&self, args: &[HfSet]) -> Option<WitnessHints> {
        if !self.meta_truth(args) {
            return None;
        }
        let values: Vec<(SlotId, HfSet)> = match self.oracle {
            MetaOracle::LstSeq => vec![(0, args[1].clone())],
            MetaOracle::TermCode => vec![(0, build_term_trace(&args[0]))],
            MetaOracle::AbstTerm => {
                vec![(0, build_abst_term_trace(&args[0], &args[1], &args[2])?)]
            }
            MetaOracle::SubstTerm => {
                vec![(0, build_subst_term_trace(&args[0], &args[1], &args[2]))]
            }
            MetaOracle::AbstForm => {
                vec![(0, build_abst_form_trace(&args[0], &args[1], &args[2])?)]
            }
            MetaOracle::SubstForm => {
                vec![(0, build_subst_form_trace(&args[0], &args[1], &args[2]))]
            }
            MetaOracle::MakeForm => {
                let (y, u, w) = (&args[0], &args[1], &args[2]);
                let disj_code = HfSet::pair(
                    &HfSet::ord(TAG_DISJ),
                    &HfSet::pair(u, w),
                );
                let neg_code = HfSet::pair(&HfSet::ord(TAG_NEG), u);
                if *y == disj_code || *y == neg_code {
                    // first disjuncts are hint-free
                    vec![]
                } else {
                    // find the abstraction witness
                    let (v, au) = find_make_form_witness(y, u)?;
                    let trace = build_abst_form_trace(&v, &HfSet::ord(0), u)?;
                    vec![
                        (1, v),
                        (2, au),
                        (3, HfSet::empty()),
                        (4, trace),
                    ]
                }
            }
            MetaOracle::Krp => {
                let (v, x, _) = (&args[0], &args[1], &args[2]);
                let q = enc_tm(&canonical_term(x)).ok()?.0;
                let s1 = build_q_trace(x);
                let s2 = build_subst_form_trace(v, &q, x);
                vec![(0, q), (1, s1), (2, s2)]
            }
            MetaOracle::Q => vec![(0, build_q_trace(&args[0]))],
        };
        let mut hints = WitnessHints::new();
        for (id, v) in values {
            if let Some((_, path)) = self.slots.iter().find(|(sid, _)| *sid == id) {
                hints.insert(path.clone(), v);
            }
        }
        Some(hints)
    }

    /// Binds the parameters and evaluates the formula under the given
    /// hints.
    pub fn eval_with(
        &self,
        args: &[HfSet],
        hints: &WitnessHints,
        budget: u64,
    ) -> TruthOutcome {
        let mut env = Environment::new();
        for (n, v) in self.params.iter().zip(args) {
            env.set(n, v.clone());
        }
        eval_fm(
            &env,
            &self.formula,
            &crate::hf::AckIndex::from_u64(budget),
            hints,
        )
    }

    /// Witness-guided evaluation against the meta hints.
    pub fn eval_guided(&self, args: &[HfSet], budget: u64) -> TruthOutcome {
        match self.meta_hints(args) {
            Some(h) => self.eval_with(args, &h, budget),
            None => self.eval_with(args, &WitnessHints::new(), budget),
        }
    }

    /// Hint slots re-addressed under a path prefix, for embedding the
    /// predicate's formula inside a larger one.
    pub fn hints_at(&self, prefix: &[usize], args: &[HfSet]) -> Option<WitnessHints> {
        Some(self.meta_hints(args)?.with_prefix(prefix))
    }
}

fn is_var_numeral_set(v: &HfSet) -> bool {
    matches!(v.to_ordinal(), Some(n) if n > 0)
}

fn find_make_form_witness(y: &HfSet, u: &HfSet) -> Option<(HfSet, HfSet)> {
    let (tg, au) = y.unpair().ok()?;
    if tg.to_ordinal() != Some(TAG_EX) {
        return None;
    }
    // vacuous case: a variable not occurring in u
    if au == *u {
        let used = code_vars(u);
        let mut n = 1u64;
        loop {
            let cand = HfSet::ord(n);
            if !used.contains(&cand) {
                return Some((cand, au));
            }
            n += 1;
        }
    }
    for v in code_vars(u) {
        if let Ok(a) = abst_code(&Code(v.clone()), 0, &Code(u.clone())) {
            if a.0 == au {
                return Some((v, au));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::enc_fm;
    use crate::parser::parse_fm;
    use crate::synthesis::strict_sigma_check;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    fn assert_strict(p: &PredicateFormula) {
        if let Err(e) = strict_sigma_check(&p.formula) {
            panic!("{:?} not strict: {e:?}", p.oracle);
        }
        let frees = crate::syntax::free_names(&p.formula);
        let params: BTreeSet<Name> = p.params.iter().cloned().collect();
        assert_eq!(frees, params, "{:?} interface hygiene", p.oracle);
    }

    #[test]
    fn predicates_are_strict_with_clean_interfaces() {
        assert_strict(&lstseq_p(&n("s"), &n("k")).unwrap());
        assert_strict(&term_p(&n("t")).unwrap());
        assert_strict(&abst_term_p(&n("v"), &n("k"), &n("t"), &n("r")).unwrap());
        assert_strict(&subst_term_p(&n("v"), &n("x"), &n("t"), &n("r")).unwrap());
        assert_strict(&abst_form_p(&n("v"), &n("k"), &n("a"), &n("r")).unwrap());
        assert_strict(&subst_form_p(&n("v"), &n("x"), &n("a"), &n("r")).unwrap());
        assert_strict(&make_form_p(&n("y"), &n("u"), &n("w")).unwrap());
        assert_strict(&krp_p(&n("v"), &n("x"), &n("y")).unwrap());
        assert_strict(&q_p(&n("x"), &n("r")).unwrap());
        assert!(matches!(
            lstseq_p(&n("s"), &n("s")),
            Err(ObjectError::ParamsNotDistinct)
        ));
    }

    #[test]
    fn lstseq_examples() {
        let p = lstseq_p(&n("s"), &n("k")).unwrap();
        let s = HfSet::seq_from_list(&[HfSet::empty(), HfSet::empty()]);
        let args = [s, HfSet::ord(2)];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        // s = ∅ with k = 1 is false, and refutably so
        let bad = [HfSet::empty(), HfSet::ord(1)];
        assert!(!p.meta_truth(&bad));
        assert!(p.eval_guided(&bad, 64).is_false());
        // the empty sequence of length 0
        let trivial = [HfSet::empty(), HfSet::ord(0)];
        assert!(p.meta_truth(&trivial));
        assert!(p.eval_guided(&trivial, 64).is_true());
    }

    #[test]
    fn term_code_examples() {
        let p = term_p(&n("t")).unwrap();
        let code = enc_fm(&parse_fm("x IN y").unwrap()).unwrap().0;
        // a formula code is not a term code
        assert!(!p.meta_truth(std::slice::from_ref(&code)));
        let tcode = crate::coding::enc_tm(&crate::parser::parse_tm("((x <| 0) <| y)").unwrap())
            .unwrap()
            .0;
        let args = [tcode];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        // mutate: not a code at all
        let bad = [HfSet::pair(&HfSet::ord(9), &HfSet::empty())];
        assert!(!p.meta_truth(&bad));
        assert!(p.eval_guided(&bad, 64).is_false());
    }

    #[test]
    fn make_form_examples() {
        let p = make_form_p(&n("y"), &n("u"), &n("w")).unwrap();
        let u = enc_fm(&parse_fm("x IN y").unwrap()).unwrap().0;
        let w = enc_fm(&parse_fm("0 = 0").unwrap()).unwrap().0;
        let disj_code = HfSet::pair(&HfSet::ord(TAG_DISJ), &HfSet::pair(&u, &w));
        let args = [disj_code, u.clone(), w.clone()];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        let neg_code = HfSet::pair(&HfSet::ord(TAG_NEG), &u);
        let args = [neg_code, u.clone(), w.clone()];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        let ex_code = enc_fm(&mk_ex(&n("x"), &parse_fm("x IN y").unwrap()))
            .unwrap()
            .0;
        let args = [ex_code, u.clone(), w.clone()];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        let args = [HfSet::empty(), u, w];
        assert!(!p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_false());
    }

    #[test]
    fn q_examples() {
        let p = q_p(&n("x"), &n("r")).unwrap();
        for i in [0u64, 1, 3, 5, 11] {
            let x = HfSet::from_index_u64(i);
            let r = enc_tm(&canonical_term(&x)).unwrap().0;
            let args = [x, r];
            assert!(p.meta_truth(&args));
            assert!(p.eval_guided(&args, 64).is_true(), "index {i}");
        }
        // Q(0) = ⌈0⌉ = 0
        let args = [HfSet::empty(), HfSet::empty()];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        // wrong code refuted under stale hints
        let x = HfSet::from_index_u64(3);
        let r = enc_tm(&canonical_term(&x)).unwrap().0;
        let hints = p.meta_hints(&[x.clone(), r]).unwrap();
        let bad_r = enc_tm(&canonical_term(&HfSet::from_index_u64(5))).unwrap().0;
        assert!(p.eval_with(&[x, bad_r], &hints, 64).is_false());
    }

    use crate::syntax::mk_ex;

    #[test]
    fn krp_examples() {
        let p = krp_p(&n("v"), &n("x"), &n("y")).unwrap();
        let i = n("x");
        let a = parse_fm("x IN w").unwrap();
        let v = HfSet::ord(u64::try_from(i.name_ord()).unwrap());
        let x = enc_fm(&a).unwrap().0;
        let y = crate::coding::k_apply(&i, &a).unwrap();
        let args = [v.clone(), x.clone(), y.clone()];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        // tampered result refuted under stale hints
        let hints = p.meta_hints(&args).unwrap();
        let bad = [v.clone(), x.clone(), y.eats(&HfSet::ord(4))];
        assert!(p.eval_with(&bad, &hints, 64).is_false());
        // vacuous substitution: y = x when the variable is not free
        let b = parse_fm("w = 0").unwrap();
        let xb = enc_fm(&b).unwrap().0;
        let args = [v, xb.clone(), xb];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
    }

    #[test]
    fn subst_term_examples() {
        let p = subst_term_p(&n("v"), &n("x"), &n("t"), &n("r")).unwrap();
        let tm = crate::parser::parse_tm("(y <| (0 <| y))").unwrap();
        let v = HfSet::ord(u64::try_from(n("y").name_ord()).unwrap());
        let x = crate::coding::enc_tm(&Term::Zero).unwrap().0;
        let t = crate::coding::enc_tm(&tm).unwrap().0;
        let r = subst_code(&Code(v.clone()), &Code(x.clone()), &Code(t.clone()))
            .unwrap()
            .0;
        let args = [v, x, t, r];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 64).is_true());
        // identity substitution on Zero
        let p2 = subst_term_p(&n("v"), &n("x"), &n("t"), &n("r")).unwrap();
        let zero = HfSet::empty();
        let args = [
            HfSet::ord(24),
            zero.clone(),
            zero.clone(),
            zero.clone(),
        ];
        assert!(p2.meta_truth(&args));
        assert!(p2.eval_guided(&args, 64).is_true());
    }

    #[test]
    fn abst_form_examples() {
        let p = abst_form_p(&n("v"), &n("k"), &n("a"), &n("r")).unwrap();
        let f = parse_fm("x IN y | Ex z. z = x").unwrap();
        let v = HfSet::ord(u64::try_from(n("x").name_ord()).unwrap());
        let a = enc_fm(&f).unwrap().0;
        let k = HfSet::ord(0);
        let r = abst_code(&Code(v.clone()), 0, &Code(a.clone())).unwrap().0;
        let args = [v, k, a, r];
        assert!(p.meta_truth(&args));
        assert!(p.eval_guided(&args, 256).is_true());
        // single-field mutation: result tampered
        let hints = p.meta_hints(&args).unwrap();
        let mut bad = args.clone();
        bad[3] = bad[3].eats(&HfSet::ord(2));
        assert!(p.eval_with(&bad, &hints, 256).is_false());
    }
}
