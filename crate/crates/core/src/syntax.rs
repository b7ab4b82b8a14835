//! Terms and formulas of the HF calculus.
//!
//! Binding is locally nameless: free variables are names, bound
//! variables are de Bruijn indices, so structural equality is
//! alpha-equivalence and substitution is capture-free without any
//! renaming machinery.  The derived connectives (`AND`, `IMP`, `IFF`,
//! `All`, `All2`, `SUBS`, `Fls`) are abbreviations expanded at
//! construction; the kernel only ever sees `Mem`, `Eq`, `Disj`, `Neg`
//! and `Ex`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NameError {
    #[error("invalid identifier {0:?}")]
    Invalid(String),
    #[error("reserved word {0:?} cannot be a variable name")]
    Reserved(String),
}

pub const RESERVED: &[&str] = &["Ex", "All", "All2", "IN", "SUBS"];

/// A variable name: `[a-zA-Z_][a-zA-Z0-9_']*`, not a reserved word.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Rc<str>);

fn head_index(c: u8) -> Option<u64> {
    match c {
        b'a'..=b'z' => Some((c - b'a') as u64),
        b'A'..=b'Z' => Some((c - b'A') as u64 + 26),
        b'_' => Some(52),
        _ => None,
    }
}

fn tail_index(c: u8) -> Option<u64> {
    match c {
        b'a'..=b'z' => Some((c - b'a') as u64),
        b'A'..=b'Z' => Some((c - b'A') as u64 + 26),
        b'0'..=b'9' => Some((c - b'0') as u64 + 52),
        b'_' => Some(62),
        b'\'' => Some(63),
        _ => None,
    }
}

const HEAD_ALPHABET: &[u8; 53] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
const TAIL_ALPHABET: &[u8; 64] =
    b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'";

impl Name {
    pub fn new(id: &str) -> Result<Name, NameError> {
        let bytes = id.as_bytes();
        let ok = !bytes.is_empty()
            && head_index(bytes[0]).is_some()
            && bytes[1..].iter().all(|&c| tail_index(c).is_some());
        if !ok {
            return Err(NameError::Invalid(id.to_string()));
        }
        if RESERVED.contains(&id) {
            return Err(NameError::Reserved(id.to_string()));
        }
        Ok(Name(Rc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Shortlex enumeration rank of the identifier, shifted to start at
    /// 1.  A fixed injection of names into positive integers, used by
    /// the Godel coding of free variables.
    pub fn name_ord(&self) -> u128 {
        let bytes = self.0.as_bytes();
        let len = bytes.len() as u32;
        // identifiers shorter than this one
        let mut shorter: u128 = 0;
        let mut block: u128 = 53;
        for _ in 1..len {
            shorter += block;
            block *= 64;
        }
        // same-length identifiers lexicographically earlier
        let mut earlier: u128 = head_index(bytes[0]).unwrap() as u128;
        for &c in &bytes[1..] {
            earlier = earlier * 64 + tail_index(c).unwrap() as u128;
        }
        shorter + earlier + 1
    }

    /// Inverse of `name_ord`.
    pub fn from_name_ord(n: u128) -> Option<Name> {
        if n == 0 {
            return None;
        }
        let mut r = n - 1;
        let mut len = 1u32;
        let mut block: u128 = 53;
        while r >= block {
            r -= block;
            block *= 64;
            len += 1;
        }
        let mut tail = Vec::new();
        for _ in 1..len {
            tail.push(TAIL_ALPHABET[(r % 64) as usize]);
            r /= 64;
        }
        let mut s = vec![HEAD_ALPHABET[r as usize]];
        tail.reverse();
        s.extend(tail);
        let id = String::from_utf8(s).unwrap();
        // reserved words decode to valid identifier syntax but are not
        // constructible as names; shift is the caller's concern
        Name::new(&id).ok()
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// HF terms: `0`, free variables, bound variables (de Bruijn indices),
/// and `◁`-applications.
#[derive(Debug, Clone)]
pub enum Term {
    Zero,
    Var(Name),
    Bound(u32),
    Eats(Rc<Term>, Rc<Term>),
}

impl Term {
    pub fn var(n: &Name) -> Term {
        Term::Var(n.clone())
    }

    pub fn eats(a: Term, b: Term) -> Term {
        Term::Eats(Rc::new(a), Rc::new(b))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Zero, Term::Zero) => true,
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Bound(a), Term::Bound(b)) => a == b,
            (Term::Eats(a1, b1), Term::Eats(a2, b2)) => {
                (Rc::ptr_eq(a1, a2) || a1 == a2) && (Rc::ptr_eq(b1, b2) || b1 == b2)
            }
            _ => false,
        }
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(t: &Term) -> u8 {
            match t {
                Term::Zero => 0,
                Term::Var(_) => 1,
                Term::Bound(_) => 2,
                Term::Eats(_, _) => 3,
            }
        }
        match (self, other) {
            (Term::Zero, Term::Zero) => Ordering::Equal,
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Bound(a), Term::Bound(b)) => a.cmp(b),
            (Term::Eats(a1, b1), Term::Eats(a2, b2)) => {
                if Rc::ptr_eq(a1, a2) && Rc::ptr_eq(b1, b2) {
                    return Ordering::Equal;
                }
                a1.cmp(a2).then_with(|| b1.cmp(b2))
            }
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

/// HF formulas over the five kernel constructors.  `Ex` stores a body
/// in which `Bound(0)` refers to the binder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    Mem(Term, Term),
    Eq(Term, Term),
    Disj(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Ex(Box<Formula>),
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Disj(Box::new(a), Box::new(b))
}

pub fn neg(a: Formula) -> Formula {
    Formula::Neg(Box::new(a))
}

/// `A → B ≡ ¬A ∨ B`
pub fn imp(a: Formula, b: Formula) -> Formula {
    or(neg(a), b)
}

/// `A ∧ B ≡ ¬(¬A ∨ ¬B)`
pub fn and(a: Formula, b: Formula) -> Formula {
    neg(or(neg(a), neg(b)))
}

/// `A ↔ B ≡ (A → B) ∧ (B → A)`
pub fn iff(a: Formula, b: Formula) -> Formula {
    and(imp(a.clone(), b.clone()), imp(b, a))
}

/// `⊥ ≡ 0 ∈ 0`, refutable from HF1.
pub fn fls() -> Formula {
    Formula::Mem(Term::Zero, Term::Zero)
}

/// Right-folded conjunction of a nonempty list.
pub fn and_list(mut items: Vec<Formula>) -> Formula {
    let mut acc = items.pop().expect("and_list of empty list");
    while let Some(f) = items.pop() {
        acc = and(f, acc);
    }
    acc
}

/// Right-folded disjunction of a nonempty list.
pub fn or_list(mut items: Vec<Formula>) -> Formula {
    let mut acc = items.pop().expect("or_list of empty list");
    while let Some(f) = items.pop() {
        acc = or(f, acc);
    }
    acc
}

/// Substitutes `x` for every free occurrence of `i` in `t`.  `x` must
/// be locally closed, so no index adjustment is ever needed.
pub fn subst_tm(i: &Name, x: &Term, t: &Term) -> Term {
    let mut cache: HashMap<*const Term, Rc<Term>> = HashMap::new();
    fn go(i: &Name, x: &Term, t: &Term, cache: &mut HashMap<*const Term, Rc<Term>>) -> Term {
        match t {
            Term::Zero => Term::Zero,
            Term::Var(k) => {
                if k == i {
                    x.clone()
                } else {
                    t.clone()
                }
            }
            Term::Bound(_) => t.clone(),
            Term::Eats(a, b) => {
                let a2 = go_rc(i, x, a, cache);
                let b2 = go_rc(i, x, b, cache);
                Term::Eats(a2, b2)
            }
        }
    }
    fn go_rc(
        i: &Name,
        x: &Term,
        t: &Rc<Term>,
        cache: &mut HashMap<*const Term, Rc<Term>>,
    ) -> Rc<Term> {
        let key = Rc::as_ptr(t);
        if let Some(r) = cache.get(&key) {
            return r.clone();
        }
        let out = Rc::new(go(i, x, t, cache));
        cache.insert(key, out.clone());
        out
    }
    go(i, x, t, &mut cache)
}

fn map_terms_fm(a: &Formula, depth: u32, f: &mut impl FnMut(&Term, u32) -> Term) -> Formula {
    match a {
        Formula::Mem(t, u) => Formula::Mem(f(t, depth), f(u, depth)),
        Formula::Eq(t, u) => Formula::Eq(f(t, depth), f(u, depth)),
        Formula::Disj(x, y) => or(map_terms_fm(x, depth, f), map_terms_fm(y, depth, f)),
        Formula::Neg(x) => neg(map_terms_fm(x, depth, f)),
        Formula::Ex(b) => Formula::Ex(Box::new(map_terms_fm(b, depth + 1, f))),
    }
}

/// Capture-free substitution `A(i ::= x)` for locally closed `x`.
pub fn subst_fm(a: &Formula, i: &Name, x: &Term) -> Formula {
    let mut cache: HashMap<*const Term, Rc<Term>> = HashMap::new();
    map_terms_fm(a, 0, &mut |t, _| {
        // term-level caching shared across the whole formula
        fn go(
            i: &Name,
            x: &Term,
            t: &Term,
            cache: &mut HashMap<*const Term, Rc<Term>>,
        ) -> Term {
            match t {
                Term::Zero | Term::Bound(_) => t.clone(),
                Term::Var(k) => {
                    if k == i {
                        x.clone()
                    } else {
                        t.clone()
                    }
                }
                Term::Eats(a, b) => {
                    let ka = Rc::as_ptr(a);
                    let a2 = if let Some(r) = cache.get(&ka) {
                        r.clone()
                    } else {
                        let r = Rc::new(go(i, x, a, cache));
                        cache.insert(ka, r.clone());
                        r
                    };
                    let kb = Rc::as_ptr(b);
                    let b2 = if let Some(r) = cache.get(&kb) {
                        r.clone()
                    } else {
                        let r = Rc::new(go(i, x, b, cache));
                        cache.insert(kb, r.clone());
                        r
                    };
                    Term::Eats(a2, b2)
                }
            }
        }
        go(i, x, t, &mut cache)
    })
}

fn abstract_tm(i: &Name, depth: u32, t: &Term) -> Term {
    match t {
        Term::Zero | Term::Bound(_) => t.clone(),
        Term::Var(k) => {
            if k == i {
                Term::Bound(depth)
            } else {
                t.clone()
            }
        }
        Term::Eats(a, b) => Term::eats(abstract_tm(i, depth, a), abstract_tm(i, depth, b)),
    }
}

/// Turns free occurrences of `i` into references to a binder about to
/// be wrapped around the result.  The output is a body, locally closed
/// at depth 1.
pub fn abstract_fm(i: &Name, a: &Formula) -> Formula {
    map_terms_fm(a, 0, &mut |t, d| abstract_tm(i, d, t))
}

fn instantiate_tm(x: &Term, depth: u32, t: &Term) -> Term {
    match t {
        Term::Zero | Term::Var(_) => t.clone(),
        Term::Bound(k) => {
            if *k == depth {
                x.clone()
            } else {
                t.clone()
            }
        }
        Term::Eats(a, b) => Term::eats(instantiate_tm(x, depth, a), instantiate_tm(x, depth, b)),
    }
}

/// Opens a binder body: replaces `Bound(0)` (adjusted under nested
/// `Ex`) by the locally closed term `x`.
pub fn instantiate_fm(body: &Formula, x: &Term) -> Formula {
    map_terms_fm(body, 0, &mut |t, d| instantiate_tm(x, d, t))
}

/// `Ex i. A`, built by abstraction: `free_names(mk_ex(i,A)) = free_names(A) − {i}`.
pub fn mk_ex(i: &Name, a: &Formula) -> Formula {
    Formula::Ex(Box::new(abstract_fm(i, a)))
}

/// `All i. A ≡ ¬ Ex i. ¬A`
pub fn mk_all(i: &Name, a: &Formula) -> Formula {
    neg(mk_ex(i, &neg(a.clone())))
}

/// `All2 i : t. A ≡ All i. (i ∈ t → A)`
pub fn mk_all2(i: &Name, t: &Term, a: &Formula) -> Formula {
    mk_all(i, &imp(Formula::Mem(Term::var(i), t.clone()), a.clone()))
}

/// `t SUBS u ≡ All2 z : t. z ∈ u` for fresh `z`.
pub fn mk_subs(t: &Term, u: &Term) -> Formula {
    let mut avoid = BTreeSet::new();
    collect_names_tm(t, &mut avoid);
    collect_names_tm(u, &mut avoid);
    let z = fresh_name(&avoid);
    mk_all2(&z, t, &Formula::Mem(Term::var(&z), u.clone()))
}

fn collect_names_tm(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Zero | Term::Bound(_) => {}
        Term::Var(n) => {
            out.insert(n.clone());
        }
        Term::Eats(a, b) => {
            // shared subterms revisit cheaply through the set
            collect_names_tm(a, out);
            collect_names_tm(b, out);
        }
    }
}

/// Free names of a term.
pub fn free_names_tm(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut seen: std::collections::HashSet<*const Term> = std::collections::HashSet::new();
    fn go(
        t: &Term,
        out: &mut BTreeSet<Name>,
        seen: &mut std::collections::HashSet<*const Term>,
    ) {
        match t {
            Term::Zero | Term::Bound(_) => {}
            Term::Var(n) => {
                out.insert(n.clone());
            }
            Term::Eats(a, b) => {
                if seen.insert(Rc::as_ptr(a)) {
                    go(a, out, seen);
                }
                if seen.insert(Rc::as_ptr(b)) {
                    go(b, out, seen);
                }
            }
        }
    }
    go(t, &mut out, &mut seen);
    out
}

/// Exactly the names with free occurrences in `a`.
pub fn free_names(a: &Formula) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut seen: std::collections::HashSet<*const Term> = std::collections::HashSet::new();
    fn go_tm(
        t: &Term,
        out: &mut BTreeSet<Name>,
        seen: &mut std::collections::HashSet<*const Term>,
    ) {
        match t {
            Term::Zero | Term::Bound(_) => {}
            Term::Var(n) => {
                out.insert(n.clone());
            }
            Term::Eats(a, b) => {
                if seen.insert(Rc::as_ptr(a)) {
                    go_tm(a, out, seen);
                }
                if seen.insert(Rc::as_ptr(b)) {
                    go_tm(b, out, seen);
                }
            }
        }
    }
    fn go(
        a: &Formula,
        out: &mut BTreeSet<Name>,
        seen: &mut std::collections::HashSet<*const Term>,
    ) {
        match a {
            Formula::Mem(t, u) | Formula::Eq(t, u) => {
                go_tm(t, out, seen);
                go_tm(u, out, seen);
            }
            Formula::Disj(x, y) => {
                go(x, out, seen);
                go(y, out, seen);
            }
            Formula::Neg(x) => go(x, out, seen),
            Formula::Ex(b) => go(b, out, seen),
        }
    }
    go(a, &mut out, &mut seen);
    out
}

/// Smallest `d` such that the term is locally closed at depth `d`.
pub fn required_depth_tm(t: &Term) -> u32 {
    let mut memo: HashMap<*const Term, u32> = HashMap::new();
    fn go(t: &Term, memo: &mut HashMap<*const Term, u32>) -> u32 {
        match t {
            Term::Zero | Term::Var(_) => 0,
            Term::Bound(k) => k + 1,
            Term::Eats(a, b) => {
                let ka = Rc::as_ptr(a);
                let ra = if let Some(&v) = memo.get(&ka) {
                    v
                } else {
                    let v = go(a, memo);
                    memo.insert(ka, v);
                    v
                };
                let kb = Rc::as_ptr(b);
                let rb = if let Some(&v) = memo.get(&kb) {
                    v
                } else {
                    let v = go(b, memo);
                    memo.insert(kb, v);
                    v
                };
                ra.max(rb)
            }
        }
    }
    go(t, &mut memo)
}

/// Smallest `d` such that the formula is locally closed at depth `d`.
pub fn required_depth_fm(a: &Formula) -> u32 {
    match a {
        Formula::Mem(t, u) | Formula::Eq(t, u) => required_depth_tm(t).max(required_depth_tm(u)),
        Formula::Disj(x, y) => required_depth_fm(x).max(required_depth_fm(y)),
        Formula::Neg(x) => required_depth_fm(x),
        Formula::Ex(b) => required_depth_fm(b).saturating_sub(1),
    }
}

pub fn locally_closed_tm(t: &Term) -> bool {
    required_depth_tm(t) == 0
}

pub fn locally_closed(a: &Formula) -> bool {
    required_depth_fm(a) == 0
}

/// Ground: locally closed with no free names.
pub fn is_ground(a: &Formula) -> bool {
    locally_closed(a) && free_names(a).is_empty()
}

pub fn is_ground_tm(t: &Term) -> bool {
    locally_closed_tm(t) && free_names_tm(t).is_empty()
}

/// Number of constructors in a term, counting shared subterms once per
/// occurrence path is avoided by treating the term as a DAG.
pub fn term_size(t: &Term) -> usize {
    let mut memo: HashMap<*const Term, usize> = HashMap::new();
    fn go(t: &Term, memo: &mut HashMap<*const Term, usize>) -> usize {
        match t {
            Term::Zero | Term::Var(_) | Term::Bound(_) => 1,
            Term::Eats(a, b) => {
                let ka = Rc::as_ptr(a);
                let sa = if let Some(&v) = memo.get(&ka) {
                    v
                } else {
                    let v = go(a, memo);
                    memo.insert(ka, v);
                    v
                };
                let kb = Rc::as_ptr(b);
                let sb = if let Some(&v) = memo.get(&kb) {
                    v
                } else {
                    let v = go(b, memo);
                    memo.insert(kb, v);
                    v
                };
                1 + sa.saturating_add(sb)
            }
        }
    }
    go(t, &mut memo)
}

pub fn formula_size(a: &Formula) -> usize {
    match a {
        Formula::Mem(t, u) | Formula::Eq(t, u) => 1 + term_size(t) + term_size(u),
        Formula::Disj(x, y) => 1 + formula_size(x) + formula_size(y),
        Formula::Neg(x) => 1 + formula_size(x),
        Formula::Ex(b) => 1 + formula_size(b),
    }
}

const FRESH_BASES: &[&str] = &[
    "x", "y", "z", "u", "v", "w", "a", "b", "c", "d", "p", "q", "r", "s", "t", "k", "l", "m", "n",
];

/// First name not in `avoid`, drawn from a fixed pool extended with
/// primes.  Deterministic.
pub fn fresh_name(avoid: &BTreeSet<Name>) -> Name {
    fresh_names(avoid, 1).pop().unwrap()
}

/// `count` distinct fresh names avoiding `avoid` and each other.
pub fn fresh_names(avoid: &BTreeSet<Name>, count: usize) -> Vec<Name> {
    let mut out = Vec::with_capacity(count);
    let mut taken = avoid.clone();
    let mut primes = 0;
    loop {
        for base in FRESH_BASES {
            let id = format!("{}{}", base, "'".repeat(primes));
            let n = Name::new(&id).unwrap();
            if !taken.contains(&n) {
                taken.insert(n.clone());
                out.push(n);
                if out.len() == count {
                    return out;
                }
            }
        }
        primes += 1;
    }
}

/// A deterministic fresh-name supply.
pub struct FreshNames {
    avoid: BTreeSet<Name>,
}

impl FreshNames {
    pub fn avoiding(avoid: BTreeSet<Name>) -> Self {
        FreshNames { avoid }
    }

    pub fn next(&mut self) -> Name {
        let n = fresh_name(&self.avoid);
        self.avoid.insert(n.clone());
        n
    }

    pub fn reserve(&mut self, n: &Name) {
        self.avoid.insert(n.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn name_validation() {
        assert!(Name::new("x").is_ok());
        assert!(Name::new("x'").is_ok());
        assert!(Name::new("_a9").is_ok());
        assert!(Name::new("").is_err());
        assert!(Name::new("9x").is_err());
        assert!(Name::new("Ex").is_err());
        assert!(Name::new("a b").is_err());
    }

    #[test]
    fn name_ord_injective_and_invertible() {
        let samples = ["x", "y", "a", "z'", "_", "ab", "A", "x0", "foo'"];
        let mut seen = std::collections::HashSet::new();
        for s in samples {
            let o = n(s).name_ord();
            assert!(seen.insert(o), "collision at {s}");
            assert_eq!(Name::from_name_ord(o), Some(n(s)));
        }
        assert_eq!(n("x").name_ord(), 24);
    }

    #[test]
    fn subst_tm_cases() {
        let i = n("i");
        let j = n("j");
        assert_eq!(subst_tm(&i, &Term::Zero, &Term::Zero), Term::Zero);
        assert_eq!(subst_tm(&i, &Term::Zero, &Term::var(&i)), Term::Zero);
        let t = Term::eats(Term::var(&i), Term::var(&j));
        assert_eq!(
            subst_tm(&i, &Term::Zero, &t),
            Term::eats(Term::Zero, Term::var(&j))
        );
    }

    #[test]
    fn subst_fm_cases() {
        let i = n("i");
        let j = n("j");
        let a = Formula::Mem(Term::var(&i), Term::var(&j));
        assert_eq!(
            subst_fm(&a, &i, &Term::Zero),
            Formula::Mem(Term::Zero, Term::var(&j))
        );
        let exj = mk_ex(&j, &a);
        assert_eq!(
            subst_fm(&exj, &i, &Term::Zero),
            mk_ex(&j, &Formula::Mem(Term::Zero, Term::var(&j)))
        );
        // identity substitution
        assert_eq!(subst_fm(&a, &i, &Term::var(&i)), a);
    }

    #[test]
    fn abstraction_and_freeness() {
        let i = n("i");
        let a = Formula::Mem(Term::var(&i), Term::Zero);
        assert_eq!(
            abstract_fm(&i, &a),
            Formula::Mem(Term::Bound(0), Term::Zero)
        );
        let b = Formula::Mem(Term::Zero, Term::Zero);
        assert_eq!(abstract_fm(&i, &b), b);
        let e = mk_ex(&i, &a);
        assert!(free_names(&e).is_empty());
        assert!(is_ground(&e));
        assert!(!is_ground(&a));
        assert!(is_ground(&fls()));
    }

    #[test]
    fn mk_ex_alpha_invariance() {
        let i = n("i");
        let j = n("j");
        let k = n("k");
        let a_i = Formula::Mem(Term::var(&i), Term::var(&k));
        let a_j = Formula::Mem(Term::var(&j), Term::var(&k));
        assert_eq!(mk_ex(&i, &a_i), mk_ex(&j, &a_j));
        assert_eq!(
            free_names(&mk_ex(&i, &Formula::Mem(Term::var(&i), Term::var(&j))))
                .into_iter()
                .collect::<Vec<_>>(),
            vec![j.clone()]
        );
    }

    #[test]
    fn instantiate_inverts_abstraction() {
        let i = n("i");
        let a = or(
            Formula::Mem(Term::var(&i), Term::Zero),
            mk_ex(&n("w"), &Formula::Eq(Term::var(&i), Term::var(&n("w")))),
        );
        let body = abstract_fm(&i, &a);
        assert_eq!(instantiate_fm(&body, &Term::var(&i)), a);
    }

    #[test]
    fn depths() {
        let i = n("i");
        let a = mk_ex(&i, &Formula::Mem(Term::var(&i), Term::Zero));
        assert!(locally_closed(&a));
        let open = Formula::Mem(Term::Bound(0), Term::Zero);
        assert!(!locally_closed(&open));
        assert_eq!(required_depth_fm(&open), 1);
    }

    #[test]
    fn fresh_names_avoid() {
        let avoid: BTreeSet<Name> = [n("x"), n("y")].into_iter().collect();
        let f = fresh_names(&avoid, 3);
        assert_eq!(f, vec![n("z"), n("u"), n("v")]);
    }

    #[test]
    fn subst_capture_freedom() {
        // free_names(subst_fm(A,i,x)) = free_names(A) - {i} for ground x
        let i = n("i");
        let j = n("j");
        let a = and(
            Formula::Mem(Term::var(&i), Term::var(&j)),
            mk_ex(&i, &Formula::Eq(Term::var(&i), Term::var(&j))),
        );
        let r = subst_fm(&a, &i, &Term::Zero);
        let mut expect = free_names(&a);
        expect.remove(&i);
        assert_eq!(free_names(&r), expect);
    }
}
