//! Godel coding of terms, formulas, and derivations into HF sets.
//!
//! Variables are coded as bare numerals (the von Neumann ordinal of the
//! name's rank), bound indices and compound constructors as tagged
//! tuples with right-nested pairing `⟨a,b,c⟩ = ⟨a,⟨b,c⟩⟩`.  Numerals
//! and pairs are disjoint: every nonzero ordinal contains ∅, while a
//! pair's members are nonempty singletons or doubletons, so variable
//! codes need no tag.
//!
//! Also here: the canonical-term map `Q` (a ground term denoting any
//! given set, built in ascending Ackermann order), quotation `⌈·⌉`,
//! pseudo-quotation with preserved variables, executable code-level
//! substitution and abstraction, the `MakeForm` recognizer, the `K`
//! map, and the meta-level proof-sequence checker.

use crate::calculus::{is_any_axiom, AxiomBase, Rule};
use crate::hf::{HfSet, HfError};
use crate::syntax::{Formula, Name, Term};
use std::collections::HashMap;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodingError {
    #[error("not a code at {path:?}: {reason}")]
    NotACode { path: Vec<usize>, reason: String },
    #[error("name rank {0} too large to materialize as an ordinal")]
    NameTooLarge(u128),
    #[error("derivation does not check with empty hypotheses")]
    NotClosedProof,
}

fn bad<T>(path: &[usize], reason: impl Into<String>) -> Result<T, CodingError> {
    Err(CodingError::NotACode {
        path: path.to_vec(),
        reason: reason.into(),
    })
}

/// An HF set in the image of the encoding functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code(pub HfSet);

impl std::fmt::Display for Code {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const TAG_IND: u64 = 1;
pub const TAG_EATS: u64 = 2;
pub const TAG_MEM: u64 = 3;
pub const TAG_EQ: u64 = 4;
pub const TAG_DISJ: u64 = 5;
pub const TAG_NEG: u64 = 6;
pub const TAG_EX: u64 = 7;

fn tag(n: u64) -> HfSet {
    HfSet::ord(n)
}

fn pair2(t: u64, a: &HfSet) -> HfSet {
    HfSet::pair(&tag(t), a)
}

fn pair3(t: u64, a: &HfSet, b: &HfSet) -> HfSet {
    HfSet::pair(&tag(t), &HfSet::pair(a, b))
}

fn name_numeral(n: &Name) -> Result<HfSet, CodingError> {
    let o = n.name_ord();
    let small = u64::try_from(o).map_err(|_| CodingError::NameTooLarge(o))?;
    if small > 1 << 20 {
        return Err(CodingError::NameTooLarge(o));
    }
    Ok(HfSet::ord(small))
}

/// Encodes a term; injective on terms with the same binding depth.
pub fn enc_tm(t: &Term) -> Result<Code, CodingError> {
    let mut cache = HashMap::new();
    enc_tm_cached(t, &mut cache).map(Code)
}

fn enc_tm_cached(
    t: &Term,
    cache: &mut HashMap<*const Term, HfSet>,
) -> Result<HfSet, CodingError> {
    match t {
        Term::Zero => Ok(HfSet::empty()),
        Term::Var(n) => name_numeral(n),
        Term::Bound(k) => Ok(pair2(TAG_IND, &HfSet::ord(*k as u64))),
        Term::Eats(a, b) => {
            let ka = Rc::as_ptr(a);
            let ea = if let Some(v) = cache.get(&ka) {
                v.clone()
            } else {
                let v = enc_tm_cached(a, cache)?;
                cache.insert(ka, v.clone());
                v
            };
            let kb = Rc::as_ptr(b);
            let eb = if let Some(v) = cache.get(&kb) {
                v.clone()
            } else {
                let v = enc_tm_cached(b, cache)?;
                cache.insert(kb, v.clone());
                v
            };
            Ok(pair3(TAG_EATS, &ea, &eb))
        }
    }
}

/// Encodes a formula.
pub fn enc_fm(f: &Formula) -> Result<Code, CodingError> {
    let mut cache = HashMap::new();
    enc_fm_inner(f, &mut cache).map(Code)
}

fn enc_fm_inner(
    f: &Formula,
    cache: &mut HashMap<*const Term, HfSet>,
) -> Result<HfSet, CodingError> {
    match f {
        Formula::Mem(t, u) => Ok(pair3(
            TAG_MEM,
            &enc_tm_cached(t, cache)?,
            &enc_tm_cached(u, cache)?,
        )),
        Formula::Eq(t, u) => Ok(pair3(
            TAG_EQ,
            &enc_tm_cached(t, cache)?,
            &enc_tm_cached(u, cache)?,
        )),
        Formula::Disj(a, b) => Ok(pair3(
            TAG_DISJ,
            &enc_fm_inner(a, cache)?,
            &enc_fm_inner(b, cache)?,
        )),
        Formula::Neg(a) => Ok(pair2(TAG_NEG, &enc_fm_inner(a, cache)?)),
        Formula::Ex(b) => Ok(pair2(TAG_EX, &enc_fm_inner(b, cache)?)),
    }
}

/// Decodes a term code.
pub fn dec_tm(c: &Code) -> Result<Term, CodingError> {
    let mut path = Vec::new();
    dec_tm_at(&c.0, &mut path)
}

fn dec_tm_at(s: &HfSet, path: &mut Vec<usize>) -> Result<Term, CodingError> {
    if let Some(n) = s.to_ordinal() {
        if n == 0 {
            return Ok(Term::Zero);
        }
        return match Name::from_name_ord(n as u128) {
            Some(name) => Ok(Term::Var(name)),
            None => bad(path, format!("ordinal {n} decodes to a reserved identifier")),
        };
    }
    let (t, rest) = match s.unpair() {
        Ok(p) => p,
        Err(_) => return bad(path, "neither an ordinal nor a pair"),
    };
    match t.to_ordinal() {
        Some(TAG_IND) => match rest.to_ordinal() {
            Some(k) => {
                let k32 = u32::try_from(k)
                    .map_err(|_| CodingError::NotACode {
                        path: path.clone(),
                        reason: "bound index too large".into(),
                    })?;
                Ok(Term::Bound(k32))
            }
            None => bad(path, "bound-variable payload is not an ordinal"),
        },
        Some(TAG_EATS) => {
            let (a, b) = match rest.unpair() {
                Ok(p) => p,
                Err(_) => return bad(path, "eats payload is not a pair"),
            };
            path.push(1);
            let ta = dec_tm_at(&a, path)?;
            path.pop();
            path.push(2);
            let tb = dec_tm_at(&b, path)?;
            path.pop();
            Ok(Term::eats(ta, tb))
        }
        _ => bad(path, "unknown term tag"),
    }
}

/// Decodes a formula code.
pub fn dec_fm(c: &Code) -> Result<Formula, CodingError> {
    let mut path = Vec::new();
    dec_fm_at(&c.0, &mut path)
}

fn dec_fm_at(s: &HfSet, path: &mut Vec<usize>) -> Result<Formula, CodingError> {
    let (t, rest) = match s.unpair() {
        Ok(p) => p,
        Err(_) => return bad(path, "formula code must be a tagged pair"),
    };
    match t.to_ordinal() {
        Some(TAG_MEM) | Some(TAG_EQ) => {
            let is_mem = t.to_ordinal() == Some(TAG_MEM);
            let (a, b) = match rest.unpair() {
                Ok(p) => p,
                Err(_) => return bad(path, "atom payload is not a pair"),
            };
            path.push(1);
            let ta = dec_tm_at(&a, path)?;
            path.pop();
            path.push(2);
            let tb = dec_tm_at(&b, path)?;
            path.pop();
            Ok(if is_mem {
                Formula::Mem(ta, tb)
            } else {
                Formula::Eq(ta, tb)
            })
        }
        Some(TAG_DISJ) => {
            let (a, b) = match rest.unpair() {
                Ok(p) => p,
                Err(_) => return bad(path, "disjunction payload is not a pair"),
            };
            path.push(1);
            let fa = dec_fm_at(&a, path)?;
            path.pop();
            path.push(2);
            let fb = dec_fm_at(&b, path)?;
            path.pop();
            Ok(crate::syntax::or(fa, fb))
        }
        Some(TAG_NEG) => {
            path.push(1);
            let fa = dec_fm_at(&rest, path)?;
            path.pop();
            Ok(crate::syntax::neg(fa))
        }
        Some(TAG_EX) => {
            path.push(1);
            let fa = dec_fm_at(&rest, path)?;
            path.pop();
            Ok(Formula::Ex(Box::new(fa)))
        }
        _ => bad(path, "unknown formula tag"),
    }
}

/// The canonical ground term denoting `x`: ∅ maps to `0`, otherwise `x`
/// is built by eating its members in ascending Ackermann order, each
/// member canonical recursively.
pub fn canonical_term(x: &HfSet) -> Term {
    let mut memo: HashMap<HfSet, Term> = HashMap::new();
    canonical_term_memo(x, &mut memo)
}

fn canonical_term_memo(x: &HfSet, memo: &mut HashMap<HfSet, Term>) -> Term {
    if let Some(t) = memo.get(x) {
        return t.clone();
    }
    let mut acc = Term::Zero;
    for m in x.members() {
        let mt = canonical_term_memo(m, memo);
        acc = Term::eats(acc, mt);
    }
    memo.insert(x.clone(), acc.clone());
    acc
}

/// `⌈t⌉`: the canonical ground term denoting the code of `t`.
pub fn quote_tm(t: &Term) -> Result<Term, CodingError> {
    Ok(canonical_term(&enc_tm(t)?.0))
}

/// `⌈A⌉`: the canonical ground term denoting the code of `A`.
pub fn quote_fm(f: &Formula) -> Result<Term, CodingError> {
    Ok(canonical_term(&enc_fm(f)?.0))
}

enum Pq {
    Const(HfSet),
    Open(Term),
}

impl Pq {
    fn term(self, memo: &mut HashMap<HfSet, Term>) -> Term {
        match self {
            Pq::Const(v) => canonical_term_memo(&v, memo),
            Pq::Open(t) => t,
        }
    }
}

fn pq_pair(tagv: u64, a: Pq, memo: &mut HashMap<HfSet, Term>) -> Pq {
    match a {
        Pq::Const(v) => Pq::Const(HfSet::pair(&tag(tagv), &v)),
        Pq::Open(t) => {
            let tg = canonical_term_memo(&tag(tagv), memo);
            Pq::Open(pair_term(tg, t))
        }
    }
}

fn pq_triple(tagv: u64, a: Pq, b: Pq, memo: &mut HashMap<HfSet, Term>) -> Pq {
    match (a, b) {
        (Pq::Const(va), Pq::Const(vb)) => {
            Pq::Const(HfSet::pair(&tag(tagv), &HfSet::pair(&va, &vb)))
        }
        (a, b) => {
            let ta = a.term(memo);
            let tb = b.term(memo);
            let tg = canonical_term_memo(&tag(tagv), memo);
            Pq::Open(pair_term(tg, pair_term(ta, tb)))
        }
    }
}

/// `{{a},{a,b}}` as a term; correct as a set whatever the insertion
/// order, so it need not match the canonical build.
fn pair_term(a: Term, b: Term) -> Term {
    let sing = Term::eats(Term::Zero, a.clone());
    let doub = Term::eats(Term::eats(Term::Zero, a), b);
    Term::eats(Term::eats(Term::Zero, sing), doub)
}

/// Pseudo-quotation `⌈A⌉_V`: like `quote_fm`, but free variables in `V`
/// are preserved as themselves instead of being coded by numerals.
/// `pseudo_quote(A, ∅) = quote_fm(A)` exactly.
pub fn pseudo_quote(
    f: &Formula,
    v: &std::collections::BTreeSet<Name>,
) -> Result<Term, CodingError> {
    let mut memo = HashMap::new();
    let pq = pq_fm(f, v, &mut memo)?;
    Ok(pq.term(&mut memo))
}

fn pq_tm(
    t: &Term,
    v: &std::collections::BTreeSet<Name>,
    memo: &mut HashMap<HfSet, Term>,
) -> Result<Pq, CodingError> {
    match t {
        Term::Zero => Ok(Pq::Const(HfSet::empty())),
        Term::Var(n) => {
            if v.contains(n) {
                Ok(Pq::Open(Term::var(n)))
            } else {
                Ok(Pq::Const(name_numeral(n)?))
            }
        }
        Term::Bound(k) => Ok(Pq::Const(pair2(TAG_IND, &HfSet::ord(*k as u64)))),
        Term::Eats(a, b) => {
            let pa = pq_tm(a, v, memo)?;
            let pb = pq_tm(b, v, memo)?;
            Ok(pq_triple(TAG_EATS, pa, pb, memo))
        }
    }
}

fn pq_fm(
    f: &Formula,
    v: &std::collections::BTreeSet<Name>,
    memo: &mut HashMap<HfSet, Term>,
) -> Result<Pq, CodingError> {
    match f {
        Formula::Mem(t, u) => {
            let pt = pq_tm(t, v, memo)?;
            let pu = pq_tm(u, v, memo)?;
            Ok(pq_triple(TAG_MEM, pt, pu, memo))
        }
        Formula::Eq(t, u) => {
            let pt = pq_tm(t, v, memo)?;
            let pu = pq_tm(u, v, memo)?;
            Ok(pq_triple(TAG_EQ, pt, pu, memo))
        }
        Formula::Disj(a, b) => {
            let pa = pq_fm(a, v, memo)?;
            let pb = pq_fm(b, v, memo)?;
            Ok(pq_triple(TAG_DISJ, pa, pb, memo))
        }
        Formula::Neg(a) => {
            let pa = pq_fm(a, v, memo)?;
            Ok(pq_pair(TAG_NEG, pa, memo))
        }
        Formula::Ex(b) => {
            let pb = pq_fm(b, v, memo)?;
            Ok(pq_pair(TAG_EX, pb, memo))
        }
    }
}

fn is_var_numeral(s: &HfSet) -> bool {
    matches!(s.to_ordinal(), Some(n) if n > 0)
}

/// Code-level substitution: replaces the variable numeral `vcode` by
/// the term code `tcode` throughout the term or formula code `c`.
/// Mirrors `subst_fm`/`subst_tm` through the encoding.
pub fn subst_code(vcode: &Code, tcode: &Code, c: &Code) -> Result<Code, CodingError> {
    if !is_var_numeral(&vcode.0) {
        return bad(&[], "substituted code is not a variable numeral");
    }
    let mut memo = HashMap::new();
    subst_code_inner(&vcode.0, &tcode.0, &c.0, &mut memo).map(Code)
}

fn subst_code_inner(
    v: &HfSet,
    t: &HfSet,
    c: &HfSet,
    memo: &mut HashMap<HfSet, HfSet>,
) -> Result<HfSet, CodingError> {
    if let Some(r) = memo.get(c) {
        return Ok(r.clone());
    }
    let out = if c == v {
        t.clone()
    } else if c.to_ordinal().is_some() {
        c.clone()
    } else {
        let (tg, rest) = c
            .unpair()
            .map_err(|_| CodingError::NotACode {
                path: vec![],
                reason: "not an ordinal or tagged pair".into(),
            })?;
        match tg.to_ordinal() {
            Some(TAG_IND) => c.clone(),
            Some(TAG_NEG) | Some(TAG_EX) => {
                let inner = subst_code_inner(v, t, &rest, memo)?;
                HfSet::pair(&tg, &inner)
            }
            Some(TAG_EATS) | Some(TAG_MEM) | Some(TAG_EQ) | Some(TAG_DISJ) => {
                let (a, b) = rest.unpair().map_err(|_| CodingError::NotACode {
                    path: vec![],
                    reason: "binary payload is not a pair".into(),
                })?;
                let sa = subst_code_inner(v, t, &a, memo)?;
                let sb = subst_code_inner(v, t, &b, memo)?;
                HfSet::pair(&tg, &HfSet::pair(&sa, &sb))
            }
            _ => return bad(&[], "unknown tag in code"),
        }
    };
    memo.insert(c.clone(), out.clone());
    Ok(out)
}

/// Code-level abstraction: replaces the variable numeral `vcode` by the
/// bound index `depth` (incremented under `Ex` tags).  Mirrors
/// `abstract_fm`.
pub fn abst_code(vcode: &Code, depth: u64, c: &Code) -> Result<Code, CodingError> {
    if !is_var_numeral(&vcode.0) {
        return bad(&[], "abstracted code is not a variable numeral");
    }
    let mut memo = HashMap::new();
    abst_code_inner(&vcode.0, depth, &c.0, &mut memo).map(Code)
}

fn abst_code_inner(
    v: &HfSet,
    depth: u64,
    c: &HfSet,
    memo: &mut HashMap<(HfSet, u64), HfSet>,
) -> Result<HfSet, CodingError> {
    let key = (c.clone(), depth);
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let out = if c == v {
        pair2(TAG_IND, &HfSet::ord(depth))
    } else if c.to_ordinal().is_some() {
        c.clone()
    } else {
        let (tg, rest) = c
            .unpair()
            .map_err(|_| CodingError::NotACode {
                path: vec![],
                reason: "not an ordinal or tagged pair".into(),
            })?;
        match tg.to_ordinal() {
            Some(TAG_IND) => c.clone(),
            Some(TAG_NEG) => {
                let inner = abst_code_inner(v, depth, &rest, memo)?;
                HfSet::pair(&tg, &inner)
            }
            Some(TAG_EX) => {
                let inner = abst_code_inner(v, depth + 1, &rest, memo)?;
                HfSet::pair(&tg, &inner)
            }
            Some(TAG_EATS) | Some(TAG_MEM) | Some(TAG_EQ) | Some(TAG_DISJ) => {
                let (a, b) = rest.unpair().map_err(|_| CodingError::NotACode {
                    path: vec![],
                    reason: "binary payload is not a pair".into(),
                })?;
                let sa = abst_code_inner(v, depth, &a, memo)?;
                let sb = abst_code_inner(v, depth, &b, memo)?;
                HfSet::pair(&tg, &HfSet::pair(&sa, &sb))
            }
            _ => return bad(&[], "unknown tag in code"),
        }
    };
    memo.insert(key, out.clone());
    Ok(out)
}

/// Variable numerals occurring in a term or formula code.
pub fn code_vars(c: &HfSet) -> Vec<HfSet> {
    let mut out = std::collections::BTreeSet::new();
    fn go(c: &HfSet, out: &mut std::collections::BTreeSet<HfSet>) {
        if let Some(n) = c.to_ordinal() {
            if n > 0 {
                out.insert(c.clone());
            }
            return;
        }
        if let Ok((tg, rest)) = c.unpair() {
            match tg.to_ordinal() {
                Some(TAG_IND) => {}
                Some(TAG_NEG) | Some(TAG_EX) => go(&rest, out),
                Some(TAG_EATS) | Some(TAG_MEM) | Some(TAG_EQ) | Some(TAG_DISJ) => {
                    if let Ok((a, b)) = rest.unpair() {
                        go(&a, out);
                        go(&b, out);
                    }
                }
                _ => {}
            }
        }
    }
    go(c, &mut out);
    out.into_iter().collect()
}

/// Decides whether `y` is the code of a formula built from `u` (and
/// `w`): a disjunction `u ∨ w`, a negation `¬u`, or an existential over
/// some abstraction of `u`.  The existential ranges over the variable
/// numerals occurring in `u`, plus the vacuous case.
pub fn make_form(y: &HfSet, u: &HfSet, w: &HfSet) -> bool {
    if *y == pair3(TAG_DISJ, u, w) || *y == pair2(TAG_NEG, u) {
        return true;
    }
    // vacuous abstraction: any variable not occurring in u
    if *y == pair2(TAG_EX, u) {
        return true;
    }
    for v in code_vars(u) {
        if let Ok(abst) = abst_code(&Code(v), 0, &Code(u.clone())) {
            if *y == pair2(TAG_EX, &abst.0) {
                return true;
            }
        }
    }
    false
}

/// The `K` map on codes: `K(⌈A⌉) = ⌈A(i ::= ⌈A⌉)⌉`, computed by
/// code-level substitution of the code of the quotation term.
pub fn k_apply(i: &Name, a: &Formula) -> Result<HfSet, CodingError> {
    let a_code = enc_fm(a)?;
    let quote = canonical_term(&a_code.0);
    let quote_code = enc_tm(&quote)?;
    let v = Code(name_numeral(i)?);
    Ok(subst_code(&v, &quote_code, &a_code)?.0)
}

// ---- proof-sequence coding ----

const STEP_BOOL: u64 = 1;
const STEP_EQ: u64 = 2;
const STEP_SPEC: u64 = 3;
const STEP_HF: u64 = 4;
const STEP_IND: u64 = 5;
const STEP_MP: u64 = 6;
const STEP_EXISTS: u64 = 7;
const STEP_EXTRA: u64 = 8;

/// Encodes a derivation with empty hypotheses as a proof sequence: a
/// `seq_from_list` of steps `⟨conclusion-code, rule-tag, payload⟩`,
/// with back-references as ordinals.  Shared subtrees encode once.
pub fn enc_derivation(
    d: &crate::calculus::Derivation,
    base: &AxiomBase,
) -> Result<Code, CodingError> {
    if !d.hyps().is_empty() || crate::calculus::check(d, base).is_err() {
        return Err(CodingError::NotClosedProof);
    }
    let mut steps: Vec<HfSet> = Vec::new();
    let mut index: HashMap<HfSet, u64> = HashMap::new();
    enc_steps(d, &mut steps, &mut index)?;
    Ok(Code(HfSet::seq_from_list(&steps)))
}

fn enc_steps(
    d: &crate::calculus::Derivation,
    steps: &mut Vec<HfSet>,
    index: &mut HashMap<HfSet, u64>,
) -> Result<u64, CodingError> {
    let concl_code = enc_fm(d.concl())?.0;
    if let Some(&i) = index.get(&concl_code) {
        return Ok(i);
    }
    let (tag_n, payload) = match d.rule() {
        Rule::Bool(_, _) => (STEP_BOOL, HfSet::empty()),
        Rule::EqAx(_, _) => (STEP_EQ, HfSet::empty()),
        Rule::Spec { .. } => (STEP_SPEC, HfSet::empty()),
        Rule::HfAx(_) => (STEP_HF, HfSet::empty()),
        Rule::Ind { .. } => (STEP_IND, HfSet::empty()),
        Rule::Extra => (STEP_EXTRA, HfSet::empty()),
        Rule::Mp(l, r) => {
            let li = enc_steps(l, steps, index)?;
            let ri = enc_steps(r, steps, index)?;
            (STEP_MP, HfSet::pair(&HfSet::ord(li), &HfSet::ord(ri)))
        }
        Rule::Exists(sub, i) => {
            let si = enc_steps(sub, steps, index)?;
            let v = name_numeral(i)?;
            (STEP_EXISTS, HfSet::pair(&HfSet::ord(si), &v))
        }
        Rule::Hyp(_) => return Err(CodingError::NotClosedProof),
    };
    let step = pair3_sets(&concl_code, &HfSet::ord(tag_n), &payload);
    let i = steps.len() as u64;
    steps.push(step);
    index.insert(concl_code, i);
    Ok(i)
}

fn pair3_sets(a: &HfSet, b: &HfSet, c: &HfSet) -> HfSet {
    HfSet::pair(a, &HfSet::pair(b, c))
}

/// Decodes a sequence set into its item list, or `None` when the set
/// is not in the image of `seq_from_list`.
pub fn seq_items(s: &HfSet) -> Option<Vec<HfSet>> {
    let len = s.len() as u64;
    let mut entries: Vec<Option<HfSet>> = vec![None; len as usize];
    for p in s.members() {
        let (idx, step) = p.unpair().ok()?;
        let i = match idx.to_ordinal() {
            Some(i) if i < len => i as usize,
            _ => return None,
        };
        match &entries[i] {
            None => entries[i] = Some(step),
            _ => return None,
        }
    }
    entries.into_iter().collect()
}

/// Validates a coded proof sequence: every step must be justified by
/// the axiom recognizers or by earlier steps under MP/Exists, and the
/// last step's conclusion must be `a`.
pub fn pf_meta_check(s: &HfSet, a: &HfSet) -> bool {
    pf_meta_check_in(s, a, &AxiomBase::default())
}

pub fn pf_meta_check_in(s: &HfSet, a: &HfSet, base: &AxiomBase) -> bool {
    if s.is_empty() {
        return false;
    }
    let entries = match seq_items(s) {
        Some(e) => e,
        None => return false,
    };
    let mut concls: Vec<HfSet> = Vec::with_capacity(entries.len());
    for step in &entries {
        let (concl, rest) = match step.unpair() {
            Ok(x) => x,
            Err(_) => return false,
        };
        let (tag_s, payload) = match rest.unpair() {
            Ok(x) => x,
            Err(_) => return false,
        };
        let ok = match tag_s.to_ordinal() {
            Some(STEP_BOOL) | Some(STEP_EQ) | Some(STEP_SPEC) | Some(STEP_HF)
            | Some(STEP_IND) | Some(STEP_EXTRA) => match dec_fm(&Code(concl.clone())) {
                Ok(f) => is_any_axiom(&f, base),
                Err(_) => false,
            },
            Some(STEP_MP) => {
                // payload ⟨i,j⟩: step_i concludes step_j IMP this
                match payload.unpair() {
                    Ok((li, ri)) => {
                        let (li, ri) = match (li.to_ordinal(), ri.to_ordinal()) {
                            (Some(a), Some(b)) => (a as usize, b as usize),
                            _ => return false,
                        };
                        li < concls.len()
                            && ri < concls.len()
                            && concls[li]
                                == pair3(
                                    TAG_DISJ,
                                    &pair2(TAG_NEG, &concls[ri]),
                                    &concl,
                                )
                    }
                    Err(_) => false,
                }
            }
            Some(STEP_EXISTS) => match payload.unpair() {
                Ok((si, v)) => {
                    let si = match si.to_ordinal() {
                        Some(x) => x as usize,
                        None => return false,
                    };
                    if si >= concls.len() || !is_var_numeral(&v) {
                        false
                    } else {
                        exists_step_ok(&concls[si], &v, &concl)
                    }
                }
                Err(_) => false,
            },
            _ => false,
        };
        if !ok {
            return false;
        }
        concls.push(concl);
    }
    concls.last() == Some(a)
}

/// Checks the Exists step on codes: from `A IMP B`, with the bound
/// variable `v` abstracted out of `A` and not occurring in `B`,
/// concluding `(Ex A') IMP B`.
fn exists_step_ok(child: &HfSet, v: &HfSet, concl: &HfSet) -> bool {
    let dest = |c: &HfSet| -> Option<(HfSet, HfSet)> {
        let (tg, rest) = c.unpair().ok()?;
        if tg.to_ordinal() != Some(TAG_DISJ) {
            return None;
        }
        let (na, b) = rest.unpair().ok()?;
        let (ntg, a) = na.unpair().ok()?;
        if ntg.to_ordinal() != Some(TAG_NEG) {
            return None;
        }
        Some((a, b))
    };
    let (a, b) = match dest(child) {
        Some(x) => x,
        None => return false,
    };
    let (ex_a, b2) = match dest(concl) {
        Some(x) => x,
        None => return false,
    };
    if b != b2 || code_vars(&b).contains(v) {
        return false;
    }
    let abst = match abst_code(&Code(v.clone()), 0, &Code(a)) {
        Ok(x) => x.0,
        Err(_) => return false,
    };
    ex_a == pair2(TAG_EX, &abst)
}

/// Error conversion helper for callers mixing set and coding errors.
impl From<HfError> for CodingError {
    fn from(e: HfError) -> Self {
        CodingError::NotACode {
            path: vec![],
            reason: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_fm, parse_tm};
    use crate::semantics::{eval_tm, Environment};
    use crate::syntax::{mk_ex, subst_fm, subst_tm};
    use std::collections::BTreeSet;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn enc_basic() {
        assert_eq!(enc_tm(&Term::Zero).unwrap().0, HfSet::empty());
        let e = enc_tm(&parse_tm("(0 <| 0)").unwrap()).unwrap().0;
        assert_eq!(
            e,
            HfSet::pair(&HfSet::ord(2), &HfSet::pair(&HfSet::empty(), &HfSet::empty()))
        );
        // a bare tag ordinal is not a formula code
        assert!(dec_fm(&Code(HfSet::ord(1))).is_err());
        assert_eq!(dec_tm(&Code(HfSet::empty())).unwrap(), Term::Zero);
        // numerals decode to the name of that rank
        let x = n("x");
        let c = enc_tm(&Term::var(&x)).unwrap();
        assert_eq!(c.0.to_ordinal(), Some(24));
        assert_eq!(dec_tm(&c).unwrap(), Term::var(&x));
    }

    #[test]
    fn dec_enc_roundtrip() {
        let cases = [
            "x IN y",
            "Ex x. x IN (0 <| y)",
            "~(x = 0) | Ex z. (z <| z) IN x & z = 0",
            "All2 z : x . z IN y",
        ];
        for c in cases {
            let f = parse_fm(c).unwrap();
            let code = enc_fm(&f).unwrap();
            assert_eq!(dec_fm(&code).unwrap(), f, "case {c}");
        }
    }

    #[test]
    fn canonical_term_examples() {
        assert_eq!(canonical_term(&HfSet::empty()), Term::Zero);
        let one = HfSet::empty().eats(&HfSet::empty());
        assert_eq!(canonical_term(&one), Term::eats(Term::Zero, Term::Zero));
        // denotation check over all sets of rank ≤ 3
        let e0 = Environment::new();
        for i in 0..16u64 {
            let x = HfSet::from_index_u64(i);
            assert_eq!(eval_tm(&e0, &canonical_term(&x)), x);
        }
    }

    #[test]
    fn q1_identity_on_canonical_builds() {
        // for nonempty x with maximal member y: the canonical term of x
        // is Eats(canonical(x − {y}), canonical(y))
        for i in 1..16u64 {
            let x = HfSet::from_index_u64(i);
            let members = x.members();
            let y = members.last().unwrap().clone();
            let rest: Vec<HfSet> = members[..members.len() - 1].to_vec();
            let x_rest = HfSet::from_elems(rest);
            assert_eq!(
                canonical_term(&x),
                Term::eats(canonical_term(&x_rest), canonical_term(&y))
            );
        }
    }

    #[test]
    fn quote_evaluates_to_code() {
        let e0 = Environment::new();
        for c in ["x IN y", "Ex x. x = (y <| 0)", "0 IN 0"] {
            let f = parse_fm(c).unwrap();
            let q = quote_fm(&f).unwrap();
            assert!(crate::syntax::is_ground_tm(&q));
            assert_eq!(eval_tm(&e0, &q), enc_fm(&f).unwrap().0, "case {c}");
        }
        assert_eq!(quote_tm(&Term::Zero).unwrap(), Term::Zero);
    }

    #[test]
    fn pseudo_quote_contract() {
        let f = parse_fm("x IN y").unwrap();
        let vs: BTreeSet<Name> = std::iter::once(n("x")).collect();
        let pq = pseudo_quote(&f, &vs).unwrap();
        let frees = crate::syntax::free_names_tm(&pq);
        assert_eq!(frees.into_iter().collect::<Vec<_>>(), vec![n("x")]);
        // empty V coincides with quotation, structurally
        let pq0 = pseudo_quote(&f, &BTreeSet::new()).unwrap();
        assert_eq!(pq0, quote_fm(&f).unwrap());
        // the replacement identity: substituting Q(v), the quotation of
        // the canonical term for v, realizes coded substitution
        let e0 = Environment::new();
        for i in 0..6u64 {
            let v = HfSet::from_index_u64(i);
            let t = canonical_term(&v);
            let q = quote_tm(&t).unwrap();
            let outcome = eval_tm(&e0, &subst_tm(&n("x"), &q, &pq));
            let expect = enc_fm(&subst_fm(&f, &n("x"), &t)).unwrap().0;
            assert_eq!(outcome, expect, "value {v}");
        }
    }

    #[test]
    fn subst_abst_code_commute() {
        let f = parse_fm("Ex z. (z IN x | x = w)").unwrap();
        let i = n("x");
        let t = parse_tm("(0 <| (0 <| 0))").unwrap();
        let fc = enc_fm(&f).unwrap();
        let v = Code(HfSet::ord(u64::try_from(i.name_ord()).unwrap()));
        let tc = enc_tm(&t).unwrap();
        let lhs = subst_code(&v, &tc, &fc).unwrap();
        let rhs = enc_fm(&subst_fm(&f, &i, &t)).unwrap();
        assert_eq!(lhs, rhs);
        let lhs2 = abst_code(&v, 0, &fc).unwrap();
        let rhs2 = enc_fm(&crate::syntax::abstract_fm(&i, &f)).unwrap();
        assert_eq!(lhs2, rhs2);
        // tagging the abstraction matches mk_ex
        let ex_code = pair2(TAG_EX, &lhs2.0);
        assert_eq!(ex_code, enc_fm(&mk_ex(&i, &f)).unwrap().0);
    }

    #[test]
    fn make_form_cases() {
        let u = enc_fm(&parse_fm("x IN y").unwrap()).unwrap().0;
        let w = enc_fm(&parse_fm("0 = 0").unwrap()).unwrap().0;
        assert!(make_form(&pair3(TAG_DISJ, &u, &w), &u, &w));
        assert!(make_form(&pair2(TAG_NEG, &u), &u, &w));
        let exd = enc_fm(&mk_ex(&n("x"), &parse_fm("x IN y").unwrap()))
            .unwrap()
            .0;
        assert!(make_form(&exd, &u, &w));
        // vacuous binder
        let exv = enc_fm(&mk_ex(&n("q"), &parse_fm("x IN y").unwrap()))
            .unwrap()
            .0;
        assert!(make_form(&exv, &u, &w));
        assert!(!make_form(&HfSet::empty(), &u, &w));
    }

    #[test]
    fn k_apply_agrees_with_syntax_route() {
        let i = n("x");
        for c in ["x IN y", "Ex z. z IN x", "0 = 0"] {
            let a = parse_fm(c).unwrap();
            let lhs = k_apply(&i, &a).unwrap();
            let rhs = enc_fm(&subst_fm(&a, &i, &quote_fm(&a).unwrap()))
                .unwrap()
                .0;
            assert_eq!(lhs, rhs, "case {c}");
            // determinism
            assert_eq!(k_apply(&i, &a).unwrap(), lhs);
        }
        // vacuous when i is not free
        let a = parse_fm("y = 0").unwrap();
        assert_eq!(k_apply(&i, &a).unwrap(), enc_fm(&a).unwrap().0);
    }

    #[test]
    fn numeral_pair_disjoint() {
        for i in 0..65536u64 {
            let x = HfSet::from_index_u64(i);
            let is_ord = x.to_ordinal().is_some();
            let is_pair_shape = x.unpair().is_ok();
            assert!(!(is_ord && is_pair_shape), "index {i}");
        }
    }

    #[test]
    fn proof_codes_check() {
        use crate::derive::{em, not_fls};
        let base = AxiomBase::default();
        let d = em(&parse_fm("x IN y").unwrap()).unwrap();
        let s = enc_derivation(&d, &base).unwrap();
        let a = enc_fm(d.concl()).unwrap();
        assert!(pf_meta_check(&s.0, &a.0));
        // wrong target rejected
        assert!(!pf_meta_check(&s.0, &HfSet::empty()));
        // the empty sequence proves nothing
        assert!(!pf_meta_check(&HfSet::empty(), &a.0));
        // tamper with each step's conclusion code
        let items = seq_items(&s.0).unwrap();
        for (i, step) in items.iter().enumerate() {
            let (concl, rest) = step.unpair().unwrap();
            let tampered_step = HfSet::pair(&concl.eats(&HfSet::ord(17)), &rest);
            let mut copy = items.clone();
            copy[i] = tampered_step;
            let s_bad = HfSet::seq_from_list(&copy);
            assert!(!pf_meta_check(&s_bad, &a.0), "tamper at {i}");
        }
        // a deeper proof with Exists and Spec nodes
        let d2 = not_fls().unwrap();
        let s2 = enc_derivation(&d2, &base).unwrap();
        let a2 = enc_fm(d2.concl()).unwrap();
        assert!(pf_meta_check(&s2.0, &a2.0));
    }
}
