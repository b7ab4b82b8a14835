//! Proof synthesis: deciding and formally deriving ground atomic facts
//! through the elementary set-theoretic equivalences, synthesizing
//! kernel-checkable derivations of true ground strict Σ sentences,
//! checking Σ certificates, and constructing the diagonal fixpoint.
//!
//! The ground-atom prover realizes the mutual recursion connecting
//! `∈`, `⊆` and `=`:
//!
//! ```text
//! z ∈ ∅        ⟺ ⊥              ∅ ⊆ z       ⟺ ⊤
//! z ∈ x ◁ y    ⟺ z ∈ x ∨ z = y   x ◁ y ⊆ z  ⟺ x ⊆ z ∧ y ∈ z
//! x = y        ⟺ x ⊆ y ∧ y ⊆ x
//! ```
//!
//! with term size as the recursion measure; equalities between ground
//! terms with equal values go through HF1/HF2 and the membership
//! characterization, so no induction axiom is ever needed.

use crate::calculus::{check, AxiomBase, CalcError, Derivation, EqSchema, HfSchema};
use crate::coding::{enc_fm, quote_fm, CodingError};
use crate::derive::{
    all_elim, all_intro, by_taut, forall_not_in_zero, mem_char, prove_taut,
    subst_congruence,
};
use crate::hf::{AckIndex, HfSet};
use crate::object::{krp_p, ObjectError};
use crate::semantics::{eval_fm, eval_tm, Environment, TruthOutcome, WitnessHints};
use crate::syntax::{
    and, free_names, free_names_tm, iff, imp, instantiate_fm, is_ground, is_ground_tm,
    locally_closed, mk_subs, neg, or, subst_fm, Formula, Name, Term,
};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("formula is not ground")]
    NotGround,
    #[error("not a strict sigma formula at {path:?}: {reason}")]
    NotStrictSigma { path: Vec<usize>, reason: String },
    #[error("the evaluator refutes the formula")]
    NotTrue,
    #[error("witness search cap {0} exceeded")]
    CapExceeded(u64),
    #[error("provability formula must have exactly the diagonal variable free")]
    BadInterface,
    #[error("calculus error during synthesis: {0}")]
    Calc(#[from] CalcError),
    #[error("coding error during synthesis: {0}")]
    Coding(#[from] CodingError),
    #[error("object predicate error: {0}")]
    Object(#[from] ObjectError),
}

// ---- strict Σ recognition ----

/// Evidence trace for the strict Σ grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SsTrace {
    MemI,
    DisjI(Box<SsTrace>, Box<SsTrace>),
    ConjI(Box<SsTrace>, Box<SsTrace>),
    ExI(Box<SsTrace>),
    All2I(Box<SsTrace>),
}

#[derive(Debug, Clone)]
pub struct StrictSigma {
    pub formula: Formula,
    pub trace: SsTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsReject {
    pub path: Vec<usize>,
    pub reason: String,
}

fn is_variable(t: &Term) -> bool {
    matches!(t, Term::Var(_) | Term::Bound(_))
}

/// Does the formula mention the binder that `Bound(k)` refers to at
/// its root depth?
fn mentions_binder(f: &Formula, k: u32) -> bool {
    fn tm(t: &Term, k: u32) -> bool {
        match t {
            Term::Zero | Term::Var(_) => false,
            Term::Bound(j) => *j == k,
            Term::Eats(a, b) => tm(a, k) || tm(b, k),
        }
    }
    match f {
        Formula::Mem(a, b) | Formula::Eq(a, b) => tm(a, k) || tm(b, k),
        Formula::Disj(a, b) => mentions_binder(a, k) || mentions_binder(b, k),
        Formula::Neg(a) => mentions_binder(a, k),
        Formula::Ex(b) => mentions_binder(b, k + 1),
    }
}

/// Recognizes the strict Σ grammar on expanded formulas: atoms are
/// variable memberships; conjunction appears as `¬(¬A ∨ ¬B)`; the
/// bounded universal appears as `¬Ex¬(¬(• ∈ j) ∨ A)` with a variable
/// bound that does not occur in the body.
pub fn strict_sigma_check(f: &Formula) -> Result<StrictSigma, SsReject> {
    let trace = recog(f, &mut Vec::new())?;
    Ok(StrictSigma {
        formula: f.clone(),
        trace,
    })
}

fn recog(f: &Formula, path: &mut Vec<usize>) -> Result<SsTrace, SsReject> {
    match f {
        Formula::Mem(a, b) => {
            if is_variable(a) && is_variable(b) {
                Ok(SsTrace::MemI)
            } else {
                Err(SsReject {
                    path: path.clone(),
                    reason: "strict atoms relate variables only".into(),
                })
            }
        }
        Formula::Eq(_, _) => Err(SsReject {
            path: path.clone(),
            reason: "equality atoms are not strict".into(),
        }),
        Formula::Disj(a, b) => {
            path.push(0);
            let ta = recog(a, path)?;
            path.pop();
            path.push(1);
            let tb = recog(b, path)?;
            path.pop();
            Ok(SsTrace::DisjI(Box::new(ta), Box::new(tb)))
        }
        Formula::Ex(body) => {
            path.push(0);
            let t = recog(body, path)?;
            path.pop();
            Ok(SsTrace::ExI(Box::new(t)))
        }
        Formula::Neg(g) => {
            match g.as_ref() {
                // conjunction pattern ¬(¬A ∨ ¬B)
                Formula::Disj(l, r) => {
                    if let (Formula::Neg(a), Formula::Neg(b)) = (l.as_ref(), r.as_ref()) {
                        path.extend([0, 0, 0]);
                        let ta = recog(a, path)?;
                        path.truncate(path.len() - 3);
                        path.extend([0, 1, 0]);
                        let tb = recog(b, path)?;
                        path.truncate(path.len() - 3);
                        return Ok(SsTrace::ConjI(Box::new(ta), Box::new(tb)));
                    }
                    Err(SsReject {
                        path: path.clone(),
                        reason: "negation outside the conjunction pattern".into(),
                    })
                }
                // bounded universal ¬ Ex ¬(¬(b0 ∈ t) ∨ A)
                Formula::Ex(nb) => {
                    let inner = match nb.as_ref() {
                        Formula::Neg(inner) => inner.as_ref(),
                        _ => {
                            return Err(SsReject {
                                path: path.clone(),
                                reason: "negated existential is not a bounded universal".into(),
                            })
                        }
                    };
                    let (guard, body) = match inner {
                        Formula::Disj(g, body) => match g.as_ref() {
                            Formula::Neg(m) => (m.as_ref(), body.as_ref()),
                            _ => {
                                return Err(SsReject {
                                    path: path.clone(),
                                    reason: "bounded universal lacks its guard".into(),
                                })
                            }
                        },
                        _ => {
                            return Err(SsReject {
                                path: path.clone(),
                                reason: "bounded universal lacks its guard".into(),
                            })
                        }
                    };
                    let bound = match guard {
                        Formula::Mem(Term::Bound(0), bound) => bound,
                        _ => {
                            return Err(SsReject {
                                path: path.clone(),
                                reason: "guard must bound the quantified variable".into(),
                            })
                        }
                    };
                    // the bound is a variable distinct from the binder
                    // and absent from the body
                    match bound {
                        Term::Var(j) => {
                            if free_names(body).contains(j) {
                                return Err(SsReject {
                                    path: path.clone(),
                                    reason: format!("bound variable {j} occurs in the body"),
                                });
                            }
                        }
                        Term::Bound(k) if *k >= 1 => {
                            if mentions_binder(body, *k) {
                                return Err(SsReject {
                                    path: path.clone(),
                                    reason: "bound variable occurs in the body".into(),
                                });
                            }
                        }
                        _ => {
                            return Err(SsReject {
                                path: path.clone(),
                                reason: "bounded universal needs a variable bound".into(),
                            })
                        }
                    }
                    path.extend([0, 0, 0, 1]);
                    let t = recog(body, path)?;
                    path.truncate(path.len() - 4);
                    Ok(SsTrace::All2I(Box::new(t)))
                }
                _ => Err(SsReject {
                    path: path.clone(),
                    reason: "bare negation is not strict".into(),
                }),
            }
        }
    }
}

// ---- ground atoms ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundRel {
    Mem,
    Eq,
    Subs,
}

#[derive(Debug, Clone)]
pub struct GroundAtom {
    pub rel: GroundRel,
    pub left: Term,
    pub right: Term,
}

impl GroundAtom {
    pub fn formula(&self) -> Formula {
        match self.rel {
            GroundRel::Mem => Formula::Mem(self.left.clone(), self.right.clone()),
            GroundRel::Eq => Formula::Eq(self.left.clone(), self.right.clone()),
            GroundRel::Subs => mk_subs(&self.left, &self.right),
        }
    }
}

/// Decides a ground atom and produces a kernel derivation of it (when
/// true) or of its negation (when false).
pub fn prove_ground_atom(g: &GroundAtom) -> Result<(bool, Derivation), SynthError> {
    if !is_ground_tm(&g.left) || !is_ground_tm(&g.right) {
        return Err(SynthError::NotGround);
    }
    match g.rel {
        GroundRel::Mem => mem_proof(&g.left, &g.right),
        GroundRel::Eq => eq_proof(&g.left, &g.right),
        GroundRel::Subs => subs_proof(&g.left, &g.right),
    }
}

fn value(t: &Term) -> HfSet {
    eval_tm(&Environment::new(), t)
}

/// `z ∈ t`, by case analysis on the form of `t`.
fn mem_proof(z: &Term, t: &Term) -> Result<(bool, Derivation), SynthError> {
    match t {
        Term::Zero => {
            let d = all_elim(&forall_not_in_zero()?, z)?;
            Ok((false, d))
        }
        Term::Eats(x, y) => {
            let b = hf2_membership_term(z, x, y)?;
            let mem_t = Formula::Mem(z.clone(), t.clone());
            let mem_x = Formula::Mem(z.clone(), x.as_ref().clone());
            let eq_y = Formula::Eq(z.clone(), y.as_ref().clone());
            let atoms = [mem_t.clone(), mem_x.clone(), eq_y.clone()];
            let (eq_true, de) = eq_proof(z, y)?;
            if eq_true {
                let d = by_taut(&[&b, &de], &mem_t, &atoms)?;
                return Ok((true, d));
            }
            let (mem_true, dm) = mem_proof(z, x)?;
            if mem_true {
                let d = by_taut(&[&b, &dm], &mem_t, &atoms)?;
                return Ok((true, d));
            }
            // both disjuncts refuted
            let d = by_taut(&[&b, &dm, &de], &neg(mem_t.clone()), &atoms)?;
            Ok((false, d))
        }
        _ => Err(SynthError::NotGround),
    }
}

/// `⊢ z ∈ x ◁ y ↔ (z ∈ x ∨ z = y)` for ground terms, from HF2.
fn hf2_membership_term(z: &Term, x: &Term, y: &Term) -> Result<Derivation, SynthError> {
    let zt = Term::eats(x.clone(), y.clone());
    let mut avoid = free_names_tm(&zt);
    avoid.extend(free_names_tm(z));
    let u_name = crate::syntax::fresh_name(&avoid);
    let hf2 = Derivation::hf_ax(HfSchema::Hf2 {
        z: zt.clone(),
        x: x.clone(),
        y: y.clone(),
        u: u_name.clone(),
    })?;
    let e1 = Derivation::eq_ax(EqSchema::E1, &[zt.clone()])?;
    let ut = Term::var(&u_name);
    let allf = crate::syntax::mk_all(
        &u_name,
        &iff(
            Formula::Mem(ut.clone(), zt.clone()),
            or(
                Formula::Mem(ut.clone(), x.clone()),
                Formula::Eq(ut, y.clone()),
            ),
        ),
    );
    let eqf = Formula::Eq(zt.clone(), zt.clone());
    let d_all = by_taut(&[&hf2, &e1], &allf, &[eqf, allf.clone()])?;
    Ok(all_elim(&d_all, z)?)
}

/// `t ⊆ u`, by case analysis on the form of `t`.
fn subs_proof(t: &Term, u: &Term) -> Result<(bool, Derivation), SynthError> {
    match t {
        Term::Zero => {
            // ∅ ⊆ u is vacuous: ∀w (w ∈ 0 → w ∈ u)
            let mut avoid = free_names_tm(u);
            avoid.extend(free_names_tm(t));
            let w = crate::syntax::fresh_name(&avoid);
            let nm = all_elim(&forall_not_in_zero()?, &Term::var(&w))?;
            let mem0 = Formula::Mem(Term::var(&w), Term::Zero);
            let memu = Formula::Mem(Term::var(&w), u.clone());
            let step = by_taut(
                &[&nm],
                &imp(mem0.clone(), memu.clone()),
                &[mem0, memu],
            )?;
            let d = all_intro(&step, &w)?;
            debug_assert_eq!(*d.concl(), mk_subs(t, u));
            Ok((true, d))
        }
        Term::Eats(x, y) => {
            let equiv = subs_eats_iff(x, y, u)?;
            let subs_t = mk_subs(t, u);
            let subs_x = mk_subs(x, u);
            let mem_y = Formula::Mem(y.as_ref().clone(), u.clone());
            let rhs = and(subs_x.clone(), mem_y.clone());
            let atoms = [subs_t.clone(), subs_x.clone(), mem_y.clone(), rhs.clone()];
            let (sx, ds) = subs_proof(x, u)?;
            if sx {
                let (my, dm) = mem_proof(y, u)?;
                if my {
                    let d = by_taut(&[&equiv, &ds, &dm], &subs_t, &atoms)?;
                    return Ok((true, d));
                }
                let d = by_taut(&[&equiv, &dm], &neg(subs_t.clone()), &atoms)?;
                return Ok((false, d));
            }
            let d = by_taut(&[&equiv, &ds], &neg(subs_t.clone()), &atoms)?;
            Ok((false, d))
        }
        _ => Err(SynthError::NotGround),
    }
}

/// `⊢ x ◁ y ⊆ u ↔ (x ⊆ u ∧ y ∈ u)` for ground terms.
fn subs_eats_iff(x: &Term, y: &Term, u: &Term) -> Result<Derivation, SynthError> {
    let t = Term::eats(x.clone(), y.clone());
    let subs_t = mk_subs(&t, u);
    let subs_x = mk_subs(x, u);
    let mem_y = Formula::Mem(y.clone(), u.clone());
    let mut avoid = free_names_tm(&t);
    avoid.extend(free_names_tm(u));
    let w = crate::syntax::fresh_name(&avoid);
    let wt = Term::var(&w);
    let b = hf2_membership_term(&wt, x, y)?; // w∈t ↔ (w∈x ∨ w=y)

    // forward: assume t ⊆ u
    let fwd = {
        let hyp = Derivation::hyp(&subs_t);
        let at_w = all_elim(&hyp, &wt)?; // w∈t → w∈u
        let memt_w = Formula::Mem(wt.clone(), t.clone());
        let memx_w = Formula::Mem(wt.clone(), x.clone());
        let memu_w = Formula::Mem(wt.clone(), u.clone());
        let eqy_w = Formula::Eq(wt.clone(), y.clone());
        let x_part = {
            let step = by_taut(
                &[&at_w, &b],
                &imp(memx_w.clone(), memu_w.clone()),
                &[memt_w.clone(), memx_w.clone(), memu_w.clone(), eqy_w.clone()],
            )?;
            all_intro(&step, &w)?
        };
        let y_part = {
            let at_y = all_elim(&hyp, y)?; // y∈t → y∈u
            let by = hf2_membership_term(y, x, y)?; // y∈t ↔ (y∈x ∨ y=y)
            let e1 = Derivation::eq_ax(EqSchema::E1, &[y.clone()])?;
            let memt_y = Formula::Mem(y.clone(), t.clone());
            let memx_y = Formula::Mem(y.clone(), x.clone());
            let eq_yy = Formula::Eq(y.clone(), y.clone());
            by_taut(
                &[&at_y, &by, &e1],
                &mem_y,
                &[memt_y, memx_y, eq_yy, mem_y.clone()],
            )?
        };
        let both = by_taut(
            &[&x_part, &y_part],
            &and(subs_x.clone(), mem_y.clone()),
            &[subs_x.clone(), mem_y.clone()],
        )?;
        crate::derive::deduction(&both, &subs_t)?
    };

    // backward: assume x ⊆ u ∧ y ∈ u
    let bwd = {
        let rhs = and(subs_x.clone(), mem_y.clone());
        let hyp = Derivation::hyp(&rhs);
        let x_sub = by_taut(&[&hyp], &subs_x, &[subs_x.clone(), mem_y.clone()])?;
        let at_w = all_elim(&x_sub, &wt)?; // w∈x → w∈u
        let y_in = by_taut(&[&hyp], &mem_y, &[subs_x.clone(), mem_y.clone()])?;
        // w = y → (y ∈ u → w ∈ u)
        let e4 = Derivation::eq_ax(
            EqSchema::E4,
            &[y.clone(), wt.clone(), u.clone()],
        )?; // y=w → (y∈u → w∈u)
        let sym = crate::derive::eq_sym_imp(&wt, y)?; // w=y → y=w
        let memt_w = Formula::Mem(wt.clone(), t.clone());
        let memx_w = Formula::Mem(wt.clone(), x.clone());
        let memu_w = Formula::Mem(wt.clone(), u.clone());
        let eqy_w = Formula::Eq(wt.clone(), y.clone());
        let eqy_sym = Formula::Eq(y.clone(), wt.clone());
        let memu_y = Formula::Mem(y.clone(), u.clone());
        let step = by_taut(
            &[&b, &at_w, &y_in, &e4, &sym],
            &imp(memt_w.clone(), memu_w.clone()),
            &[memt_w, memx_w, memu_w, eqy_w, eqy_sym, memu_y],
        )?;
        let all_d = all_intro(&step, &w)?;
        crate::derive::deduction(&all_d, &rhs)?
    };

    let goal = iff(subs_t.clone(), and(subs_x.clone(), mem_y.clone()));
    Ok(by_taut(
        &[&fwd, &bwd],
        &goal,
        &[subs_t, and(subs_x, mem_y)],
    )?)
}

/// `t = u`, deciding by evaluation and deriving either the equality
/// (through HF1/HF2 and the membership characterization) or its
/// negation (through a separating member).
fn eq_proof(t: &Term, u: &Term) -> Result<(bool, Derivation), SynthError> {
    let vt = value(t);
    let vu = value(u);
    if vt == vu {
        Ok((true, ground_eq_derive(t, u)?))
    } else {
        // least separating value in ascending Ackermann order
        let mut witness = None;
        for m in vt.members() {
            if !vu.contains(m) {
                witness = Some((m.clone(), true));
                break;
            }
        }
        if witness.is_none() {
            for m in vu.members() {
                if !vt.contains(m) {
                    witness = Some((m.clone(), false));
                    break;
                }
            }
        }
        let (wv, in_t) = match (witness, vt.members().first(), vu.members().first()) {
            (Some(w), _, _) => w,
            _ => unreachable!("distinct sets have a separating member"),
        };
        let e = crate::coding::canonical_term(&wv);
        let eq_f = Formula::Eq(t.clone(), u.clone());
        if in_t {
            let (p1, dm1) = mem_proof(&e, t)?;
            let (p2, dm2) = mem_proof(&e, u)?;
            debug_assert!(p1 && !p2);
            let e3 = Derivation::eq_ax(
                EqSchema::E3,
                &[t.clone(), u.clone(), e.clone()],
            )?; // t=u → (e∈t → e∈u)
            let d = by_taut(
                &[&e3, &dm1, &dm2],
                &neg(eq_f.clone()),
                &[
                    eq_f,
                    Formula::Mem(e.clone(), t.clone()),
                    Formula::Mem(e, u.clone()),
                ],
            )?;
            Ok((false, d))
        } else {
            let (p1, dm1) = mem_proof(&e, u)?;
            let (p2, dm2) = mem_proof(&e, t)?;
            debug_assert!(p1 && !p2);
            let e3 = Derivation::eq_ax(
                EqSchema::E3,
                &[u.clone(), t.clone(), e.clone()],
            )?; // u=t → (e∈u → e∈t)
            let sym = crate::derive::eq_sym_imp(t, u)?;
            let d = by_taut(
                &[&sym, &e3, &dm1, &dm2],
                &neg(eq_f.clone()),
                &[
                    eq_f,
                    Formula::Eq(u.clone(), t.clone()),
                    Formula::Mem(e.clone(), u.clone()),
                    Formula::Mem(e, t.clone()),
                ],
            )?;
            Ok((false, d))
        }
    }
}

/// Syntactic members of a ground term's eats spine, left to right.
fn spine_members(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    fn go(t: &Term, out: &mut Vec<Term>) {
        if let Term::Eats(x, y) = t {
            go(x, out);
            out.push(y.as_ref().clone());
        }
    }
    go(t, &mut out);
    out
}

/// Derives `⊢ t = u` for ground terms with equal values.
fn ground_eq_derive(t: &Term, u: &Term) -> Result<Derivation, SynthError> {
    match u {
        Term::Zero => {
            // the only ground term denoting ∅ is 0 itself
            debug_assert_eq!(*t, Term::Zero);
            Ok(Derivation::eq_ax(EqSchema::E1, &[Term::Zero])?)
        }
        Term::Eats(c, d) => {
            let mut avoid = free_names_tm(t);
            avoid.extend(free_names_tm(u));
            let w = crate::syntax::fresh_name(&avoid);
            let wt = Term::var(&w);
            let (dt_f, mct) = mem_char(&w, t)?;
            let (dc_f, mcc) = mem_char(&w, c)?;
            let t_members = spine_members(t);
            let c_members = spine_members(c);
            // bridging implications between equal-valued members
            let mut premises: Vec<Derivation> = Vec::new();
            let mut atoms: Vec<Formula> = vec![
                Formula::Mem(wt.clone(), t.clone()),
                Formula::Mem(wt.clone(), c.as_ref().clone()),
                Formula::Eq(wt.clone(), d.as_ref().clone()),
                crate::syntax::fls(),
            ];
            for m in t_members.iter().chain(c_members.iter()) {
                let a = Formula::Eq(wt.clone(), m.clone());
                if !atoms.contains(&a) {
                    atoms.push(a);
                }
            }
            // each member of t matches a member of c or matches d
            for e in &t_members {
                let ve = value(e);
                let target = if ve == value(d) {
                    d.as_ref().clone()
                } else {
                    c_members
                        .iter()
                        .find(|f| value(f) == ve)
                        .cloned()
                        .expect("equal values must cover members")
                };
                premises.push(bridge(&wt, e, &target)?);
            }
            // each member of c, and d itself, matches a member of t
            for f in c_members.iter().chain(std::iter::once(d.as_ref())) {
                let vf = value(f);
                let target = t_members
                    .iter()
                    .find(|e| value(e) == vf)
                    .cloned()
                    .expect("equal values must cover members");
                premises.push(bridge(&wt, f, &target)?);
            }
            let goal_inner = iff(
                Formula::Mem(wt.clone(), t.clone()),
                or(
                    Formula::Mem(wt.clone(), c.as_ref().clone()),
                    Formula::Eq(wt.clone(), d.as_ref().clone()),
                ),
            );
            let mut refs: Vec<&Derivation> = vec![&mct, &mcc];
            refs.extend(premises.iter());
            // the membership characterizations decompose into the atoms
            let _ = (&dt_f, &dc_f);
            let inner = by_taut(&refs, &goal_inner, &atoms)?;
            let all_d = all_intro(&inner, &w)?;
            // HF2 right-to-left: the quantified equivalence gives t = c ◁ d
            let hf2 = Derivation::hf_ax(HfSchema::Hf2 {
                z: t.clone(),
                x: c.as_ref().clone(),
                y: d.as_ref().clone(),
                u: w.clone(),
            })?;
            let eq_goal = Formula::Eq(t.clone(), u.clone());
            let allf = all_d.concl().clone();
            Ok(by_taut(&[&hf2, &all_d], &eq_goal, &[eq_goal.clone(), allf])?)
        }
        _ => Err(SynthError::NotGround),
    }
}

/// `⊢ w = e → w = f` from the recursive ground equality `e = f`.
fn bridge(wt: &Term, e: &Term, f: &Term) -> Result<Derivation, SynthError> {
    if e == f {
        let eqf = Formula::Eq(wt.clone(), e.clone());
        return Ok(prove_taut(&imp(eqf.clone(), eqf.clone()), &[eqf])?);
    }
    let d_eq = ground_eq_derive(e, f)?;
    let tr = crate::derive::eq_trans_imp(wt, e, f)?;
    let goal = imp(
        Formula::Eq(wt.clone(), e.clone()),
        Formula::Eq(wt.clone(), f.clone()),
    );
    Ok(by_taut(
        &[&d_eq, &tr],
        &goal,
        &[
            Formula::Eq(e.clone(), f.clone()),
            Formula::Eq(wt.clone(), e.clone()),
            Formula::Eq(wt.clone(), f.clone()),
        ],
    )?)
}

// ---- constructive sigma theorem ----

pub const DEFAULT_WITNESS_CAP: u64 = 1 << 20;

/// Options for the Σ synthesizer.
#[derive(Debug, Clone)]
pub struct SynthOptions {
    /// Existential witnesses are searched below this Ackermann index.
    pub witness_cap: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            witness_cap: DEFAULT_WITNESS_CAP,
        }
    }
}

/// Synthesizes a kernel-checkable derivation of a true ground strict Σ
/// sentence.
pub fn prove_strict_sigma(a: &Formula) -> Result<Derivation, SynthError> {
    prove_strict_sigma_with(a, &SynthOptions::default())
}

pub fn prove_strict_sigma_with(
    a: &Formula,
    opts: &SynthOptions,
) -> Result<Derivation, SynthError> {
    if !is_ground(a) {
        return Err(SynthError::NotGround);
    }
    synth(a, opts)
}

fn decide(f: &Formula, opts: &SynthOptions) -> Result<bool, SynthError> {
    match eval_fm(
        &Environment::new(),
        f,
        &AckIndex::from_u64(opts.witness_cap),
        &WitnessHints::new(),
    ) {
        TruthOutcome::True => Ok(true),
        TruthOutcome::False => Ok(false),
        TruthOutcome::BudgetExhausted(_) => Err(SynthError::CapExceeded(opts.witness_cap)),
    }
}

fn synth(f: &Formula, opts: &SynthOptions) -> Result<Derivation, SynthError> {
    match f {
        Formula::Mem(t, u) => {
            let (truth, d) = mem_proof(t, u)?;
            if truth {
                Ok(d)
            } else {
                Err(SynthError::NotTrue)
            }
        }
        Formula::Disj(a, b) => {
            let ta = decide(a, opts)?;
            if ta {
                let da = synth(a, opts)?;
                Ok(by_taut(&[&da], f, &[a.as_ref().clone(), b.as_ref().clone()])?)
            } else if decide(b, opts)? {
                let db = synth(b, opts)?;
                Ok(by_taut(&[&db], f, &[a.as_ref().clone(), b.as_ref().clone()])?)
            } else {
                Err(SynthError::NotTrue)
            }
        }
        Formula::Neg(g) => match g.as_ref() {
            // conjunction ¬(¬A ∨ ¬B)
            Formula::Disj(l, r) => match (l.as_ref(), r.as_ref()) {
                (Formula::Neg(a), Formula::Neg(b)) => {
                    let da = synth(a, opts)?;
                    let db = synth(b, opts)?;
                    Ok(by_taut(
                        &[&da, &db],
                        f,
                        &[a.as_ref().clone(), b.as_ref().clone()],
                    )?)
                }
                _ => Err(SynthError::NotStrictSigma {
                    path: vec![],
                    reason: "negation outside the conjunction pattern".into(),
                }),
            },
            // bounded universal ¬Ex¬(¬(b0 ∈ bt) ∨ body)
            Formula::Ex(nb) => synth_bounded_forall(f, nb, opts),
            _ => Err(SynthError::NotStrictSigma {
                path: vec![],
                reason: "bare negation".into(),
            }),
        },
        Formula::Ex(body) => {
            for n in 0..opts.witness_cap {
                let v = HfSet::from_index_u64(n);
                let c = crate::coding::canonical_term(&v);
                let cand = instantiate_fm(body, &c);
                match eval_fm(
                    &Environment::new(),
                    &cand,
                    &AckIndex::from_u64(opts.witness_cap),
                    &WitnessHints::new(),
                ) {
                    TruthOutcome::True => {
                        let d = synth(&cand, opts)?;
                        let mut avoid = free_names(body);
                        let j = crate::syntax::fresh_name(&mut_avoid(&mut avoid));
                        let body_j = instantiate_fm(body, &Term::var(&j));
                        let sp = Derivation::spec(&body_j, &j, &c)?;
                        debug_assert_eq!(*sp.concl(), imp(cand.clone(), f.clone()));
                        return Ok(Derivation::mp(sp, d)?);
                    }
                    TruthOutcome::False => continue,
                    TruthOutcome::BudgetExhausted(_) => continue,
                }
            }
            Err(SynthError::CapExceeded(opts.witness_cap))
        }
        Formula::Eq(_, _) => Err(SynthError::NotStrictSigma {
            path: vec![],
            reason: "equality atoms are not strict".into(),
        }),
    }
}

fn mut_avoid(avoid: &mut BTreeSet<Name>) -> BTreeSet<Name> {
    std::mem::take(avoid)
}

/// The bounded-universal case: enumerate the syntactic members of the
/// bound, prove the body at each, then assemble the finite case split
/// from the membership characterization.
fn synth_bounded_forall(
    f: &Formula,
    nb: &Formula,
    opts: &SynthOptions,
) -> Result<Derivation, SynthError> {
    // destructure ¬(¬(b0 ∈ bt) ∨ body) after opening with a fresh name
    let mut avoid = free_names(nb);
    let probe = instantiate_fm(nb, &Term::Zero);
    avoid.extend(free_names(&probe));
    let w = crate::syntax::fresh_name(&avoid);
    let opened = instantiate_fm(nb, &Term::var(&w));
    let (bt, body_w) = match &opened {
        Formula::Neg(inner) => match inner.as_ref() {
            Formula::Disj(g, body) => match g.as_ref() {
                Formula::Neg(m) => match m.as_ref() {
                    Formula::Mem(Term::Var(ww), bt) if *ww == w => (bt.clone(), body.as_ref().clone()),
                    _ => {
                        return Err(SynthError::NotStrictSigma {
                            path: vec![],
                            reason: "bounded universal lacks its guard".into(),
                        })
                    }
                },
                _ => {
                    return Err(SynthError::NotStrictSigma {
                        path: vec![],
                        reason: "bounded universal lacks its guard".into(),
                    })
                }
            },
            _ => {
                return Err(SynthError::NotStrictSigma {
                    path: vec![],
                    reason: "bounded universal lacks its guard".into(),
                })
            }
        },
        _ => unreachable!("caller matched Neg(Ex(..))"),
    };
    if !is_ground_tm(&bt) {
        return Err(SynthError::NotGround);
    }
    let members = spine_members(&bt);
    let mut premises: Vec<Derivation> = Vec::new();
    let mut atoms: Vec<Formula> = vec![
        Formula::Mem(Term::var(&w), bt.clone()),
        body_w.clone(),
        crate::syntax::fls(),
    ];
    for e in &members {
        let cand = subst_fm(&body_w, &w, e);
        let d_e = synth(&cand, opts)?;
        // {w = e} ⊢ body(w) from the instance via congruence
        let cong = subst_congruence(&body_w, &w, &Term::var(&w), e)?;
        let with_hyp = by_taut(&[&cong, &d_e], &body_w, &[body_w.clone(), cand.clone()])?;
        let eq_f = Formula::Eq(Term::var(&w), e.clone());
        let impl_d = crate::derive::deduction(&with_hyp, &eq_f)?;
        let a = Formula::Eq(Term::var(&w), e.clone());
        if !atoms.contains(&a) {
            atoms.push(a);
        }
        premises.push(impl_d);
    }
    let (_df, mc) = mem_char(&w, &bt)?;
    let goal_w = imp(Formula::Mem(Term::var(&w), bt.clone()), body_w.clone());
    let mut refs: Vec<&Derivation> = vec![&mc];
    refs.extend(premises.iter());
    let step = by_taut(&refs, &goal_w, &atoms)?;
    let d = all_intro(&step, &w)?;
    debug_assert_eq!(d.concl(), f);
    Ok(d)
}

/// A Σ certificate: `B` strict, free names within those of `A`, and a
/// closed derivation of `A ↔ B`.
pub fn check_sigma_certificate(
    a: &Formula,
    b: &Formula,
    d: &Derivation,
    base: &AxiomBase,
) -> bool {
    if strict_sigma_check(b).is_err() {
        return false;
    }
    if !free_names(b).is_subset(&free_names(a)) {
        return false;
    }
    match check(d, base) {
        Ok(j) => j.hyps.is_empty() && j.concl == iff(a.clone(), b.clone()),
        Err(_) => false,
    }
}

// ---- diagonalization ----

/// The diagonal fixpoint: builds `δ` with `free_names(δ) =
/// free_names(alpha) − {i}` such that `δ` is semantically equivalent to
/// `alpha(i ::= ⌈δ⌉)`, composing the object-level KRP relation with
/// `alpha` and self-applying.
pub fn diag(alpha: &Formula, i: &Name) -> Result<Formula, SynthError> {
    Ok(diag_full(alpha, i)?.0)
}

/// Like `diag`, also returning the witness hints that make `δ`
/// evaluate under witness-guided evaluation, plus `⌈δ⌉`.
pub fn diag_full(alpha: &Formula, i: &Name) -> Result<(Formula, WitnessHints, Term), SynthError> {
    if !locally_closed(alpha) {
        return Err(SynthError::NotGround);
    }
    let mut avoid = free_names(alpha);
    avoid.insert(i.clone());
    let names = crate::syntax::fresh_names(&avoid, 3);
    let (vn, xn, yn) = (&names[0], &names[1], &names[2]);
    let krp = krp_p(vn, xn, yn)?;
    // specialize: v := the numeral term for i, x := Var i
    let v_ord = u64::try_from(i.name_ord()).map_err(|_| SynthError::BadInterface)?;
    let v_term = crate::coding::canonical_term(&HfSet::ord(v_ord));
    let krp_spec = subst_fm(
        &subst_fm(&krp.formula, vn, &v_term),
        xn,
        &Term::var(i),
    );
    let alpha_y = subst_fm(alpha, i, &Term::var(yn));
    let beta_body = and(krp_spec, alpha_y);
    let beta = crate::syntax::mk_ex(yn, &beta_body);
    let beta_quote = quote_fm(&beta)?;
    let delta = subst_fm(&beta, i, &beta_quote);
    // hints: the outer existential witnesses K(⌈β⌉) = ⌈δ⌉'s code, and
    // the KRP trace hints sit under the conjunction's first limb
    let beta_code = enc_fm(&beta)?.0;
    let delta_code = enc_fm(&delta)?.0;
    let mut hints = WitnessHints::new();
    hints.insert(vec![], delta_code);
    let krp_args = [HfSet::ord(v_ord), beta_code, enc_fm(&delta)?.0];
    if let Some(sub) = krp.hints_at(&[0, 0, 0, 0], &krp_args) {
        hints.merge(sub);
    }
    let delta_quote = quote_fm(&delta)?;
    Ok((delta, hints, delta_quote))
}

/// The Gödel-sentence shape for a supplied provability formula with one
/// free variable: `δ := diag(¬pfp, i)`, a ground formula.  Purely
/// syntactic; the semantic claims depend on the supplied formula.
pub fn godel_sentence(pfp: &Formula, i: &Name) -> Result<Formula, SynthError> {
    let frees = free_names(pfp);
    if frees.len() != 1 || !frees.contains(i) {
        return Err(SynthError::BadInterface);
    }
    let delta = diag(&neg(pfp.clone()), i)?;
    debug_assert!(is_ground(&delta));
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check;
    use crate::parser::{parse_fm, parse_tm};

    fn base() -> AxiomBase {
        AxiomBase::default()
    }

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    fn chk(d: &Derivation) {
        check(d, &base()).unwrap();
        assert!(d.hyps().is_empty());
    }

    #[test]
    fn strict_check_accepts_grammar() {
        let ok = [
            "i IN j",
            "i IN j | j IN i",
            "i IN j & j IN k",
            "Ex x. x IN j",
            "All2 z : j . z IN k",
            "Ex x. All2 z : x . Ex y. (y IN z | y IN x)",
        ];
        for c in ok {
            let f = parse_fm(c).unwrap();
            assert!(strict_sigma_check(&f).is_ok(), "case {c}");
        }
        let bad = [
            ("i = j", "equality"),
            ("~(i IN j)", "negation"),
            ("0 IN j", "constant term"),
            ("i IN j -> j IN i", "implication"),
            ("All2 z : j . z IN j", "bound occurs in body"),
        ];
        for (c, why) in bad {
            let f = parse_fm(c).unwrap();
            assert!(strict_sigma_check(&f).is_err(), "case {c} ({why})");
        }
    }

    #[test]
    fn ground_atoms_examples() {
        // 0 ∈ (0 ◁ 0)
        let g = GroundAtom {
            rel: GroundRel::Mem,
            left: Term::Zero,
            right: parse_tm("(0 <| 0)").unwrap(),
        };
        let (truth, d) = prove_ground_atom(&g).unwrap();
        assert!(truth);
        chk(&d);
        assert_eq!(*d.concl(), g.formula());
        // 0 ∈ 0 is refutable
        let g = GroundAtom {
            rel: GroundRel::Mem,
            left: Term::Zero,
            right: Term::Zero,
        };
        let (truth, d) = prove_ground_atom(&g).unwrap();
        assert!(!truth);
        chk(&d);
        assert_eq!(*d.concl(), neg(g.formula()));
        // non-ground atoms are rejected
        let g = GroundAtom {
            rel: GroundRel::Mem,
            left: parse_tm("x").unwrap(),
            right: Term::Zero,
        };
        assert!(matches!(prove_ground_atom(&g), Err(SynthError::NotGround)));
    }

    #[test]
    fn ground_eq_dup_absorption() {
        // (0◁0)◁0 = 0◁0 : duplicate insertion absorbed
        let t = parse_tm("((0 <| 0) <| 0)").unwrap();
        let u = parse_tm("(0 <| 0)").unwrap();
        let (truth, d) = prove_ground_atom(&GroundAtom {
            rel: GroundRel::Eq,
            left: t,
            right: u,
        })
        .unwrap();
        assert!(truth);
        chk(&d);
    }

    #[test]
    fn ground_subs_examples() {
        let t = parse_tm("(0 <| 0)").unwrap();
        let u = parse_tm("((0 <| 0) <| (0 <| 0))").unwrap();
        let (truth, d) = prove_ground_atom(&GroundAtom {
            rel: GroundRel::Subs,
            left: t.clone(),
            right: u.clone(),
        })
        .unwrap();
        assert!(truth);
        chk(&d);
        let (truth, d) = prove_ground_atom(&GroundAtom {
            rel: GroundRel::Subs,
            left: u,
            right: t,
        })
        .unwrap();
        assert!(!truth);
        chk(&d);
    }

    #[test]
    fn sigma_ex_witness() {
        // Ex x. x IN {∅}: witness ∅
        let f = parse_fm("Ex x. x IN (0 <| 0)").unwrap();
        let d = prove_strict_sigma(&f).unwrap();
        chk(&d);
        assert_eq!(*d.concl(), f);
    }

    #[test]
    fn sigma_bounded_forall() {
        // All2 over the two-element set {∅,{∅}} ⊆ its own superset
        let f = parse_fm("All2 z : ((0 <| 0) <| (0 <| 0)) . z IN (((0 <| 0) <| (0 <| 0)) <| 0)")
            .unwrap();
        let d = prove_strict_sigma(&f).unwrap();
        chk(&d);
        assert_eq!(*d.concl(), f);
        // vacuous case over the empty bound
        let g = parse_fm("All2 z : 0 . z IN 0").unwrap();
        let d = prove_strict_sigma(&g).unwrap();
        chk(&d);
    }

    #[test]
    fn sigma_rejects_false() {
        let f = parse_fm("Ex x. All2 z : x . 0 IN 0").unwrap();
        // ∃x ∀z∈x: ⊥ is true with witness ∅!
        let d = prove_strict_sigma(&f).unwrap();
        chk(&d);
        // genuinely false: 0 ∈ 0 as an atom
        assert!(matches!(
            prove_strict_sigma(&parse_fm("0 IN 0").unwrap()),
            Err(SynthError::NotTrue)
        ));
    }

    #[test]
    fn certificate_check() {
        let a = parse_fm("Ex x. x IN j").unwrap();
        let d = prove_taut(&iff(a.clone(), a.clone()), &[a.clone()]).unwrap();
        assert!(check_sigma_certificate(&a, &a, &d, &base()));
        // extra free name in B fails the support condition
        let b = parse_fm("Ex x. x IN k").unwrap();
        let d2 = prove_taut(&iff(a.clone(), b.clone()), &[a.clone(), b.clone()]).unwrap();
        assert!(!check_sigma_certificate(&a, &b, &d2, &base()));
        // wrong formula fails the kernel comparison
        assert!(!check_sigma_certificate(&b, &a, &d, &base()));
    }

    #[test]
    fn diag_free_names() {
        let i = n("i");
        let alpha = parse_fm("i = i | j IN i").unwrap();
        let delta = diag(&alpha, &i).unwrap();
        let mut expect = free_names(&alpha);
        expect.remove(&i);
        assert_eq!(free_names(&delta), expect);
        // alpha without i free: delta still drops only i
        let alpha2 = parse_fm("j IN j").unwrap();
        let delta2 = diag(&alpha2, &i).unwrap();
        assert_eq!(free_names(&delta2), free_names(&alpha2));
    }

    #[test]
    fn godel_sentence_shape() {
        let i = n("i");
        let pfp = parse_fm("Ex s. i IN s").unwrap();
        let d = godel_sentence(&pfp, &i).unwrap();
        assert!(is_ground(&d));
        assert!(matches!(
            godel_sentence(&parse_fm("i IN j").unwrap(), &i),
            Err(SynthError::BadInterface)
        ));
    }
}
