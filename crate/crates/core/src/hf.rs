//! Executable model of the hereditarily finite universe.
//!
//! `HfSet` is a canonical finite set of `HfSet`s: elements are
//! duplicate-free and stored in ascending Ackermann-index order, so
//! structural equality coincides with extensional equality.  The module
//! also provides the eats operation `x ◁ y = x ∪ {y}`, Kuratowski
//! pairs, von Neumann ordinals, finite sequences, the Ackermann index
//! bijection `f(x) = Σ { 2^f(y) | y ∈ x }`, and the total order it
//! induces.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HfError {
    #[error("not an ordered pair: lacks the {{{{x}},{{x,y}}}} shape")]
    NotAPair,
    #[error("not a sequence: member is not an indexed pair")]
    NotASequence,
    #[error("sequence index out of range")]
    IndexOutOfRange,
    #[error("set notation parse error at byte {0}: {1}")]
    Parse(usize, String),
}

/// Arbitrary-precision Ackermann index.  `f` grows as a tower of
/// exponentials, so fixed-width integers overflow at rank 5.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AckIndex(pub BigUint);

impl AckIndex {
    pub fn from_u64(n: u64) -> Self {
        AckIndex(BigUint::from(n))
    }
}

impl fmt::Display for AckIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Node {
    elems: Vec<HfSet>,
    hash: u64,
}

/// A hereditarily finite set.
///
/// Values are immutable and cheaply cloneable; structure sharing via
/// `Arc` is never observable.  Construction interns nodes per thread,
/// so structurally equal sets built on the same thread are pointer
/// equal, which keeps comparisons cheap on the massively shared
/// structure of Godel codes.  The derived order (`Ord`) is the
/// Ackermann order `x < y ⟺ f(x) < f(y)`, computed structurally
/// without materializing the indices.
#[derive(Clone)]
pub struct HfSet(Arc<Node>);

fn hash_elems(elems: &[HfSet]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for e in elems {
        h ^= e.0.hash;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        h ^= h >> 29;
    }
    h
}

thread_local! {
    static INTERN: std::cell::RefCell<HashMap<u64, Vec<std::sync::Weak<Node>>>> =
        std::cell::RefCell::new(HashMap::new());
    static ORDINALS: std::cell::RefCell<Vec<HfSet>> = std::cell::RefCell::new(Vec::new());
}

impl HfSet {
    fn from_sorted(elems: Vec<HfSet>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        let hash = hash_elems(&elems);
        INTERN.with(|tbl| {
            let mut tbl = tbl.borrow_mut();
            let bucket = tbl.entry(hash).or_default();
            let mut alive = Vec::with_capacity(bucket.len());
            let mut found = None;
            for w in bucket.drain(..) {
                if let Some(node) = w.upgrade() {
                    if found.is_none()
                        && node.elems.len() == elems.len()
                        && node.elems.iter().zip(&elems).all(|(a, b)| a == b)
                    {
                        found = Some(HfSet(node.clone()));
                    }
                    alive.push(Arc::downgrade(&node));
                }
            }
            *bucket = alive;
            if let Some(s) = found {
                return s;
            }
            let node = Arc::new(Node { elems, hash });
            bucket.push(Arc::downgrade(&node));
            HfSet(node)
        })
    }

    /// The empty set.
    pub fn empty() -> Self {
        HfSet::from_sorted(Vec::new())
    }

    /// `x ◁ y = x ∪ {y}` with canonical ordering and dedup restored.
    pub fn eats(&self, y: &HfSet) -> Self {
        match self.0.elems.binary_search_by(|e| e.cmp(y)) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut elems = self.0.elems.clone();
                elems.insert(pos, y.clone());
                HfSet::from_sorted(elems)
            }
        }
    }

    /// Builds a set from arbitrary elements (sorted, deduplicated).
    pub fn from_elems(mut elems: Vec<HfSet>) -> Self {
        elems.sort();
        elems.dedup();
        HfSet::from_sorted(elems)
    }

    pub fn is_empty(&self) -> bool {
        self.0.elems.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.elems.len()
    }

    /// Elements in ascending Ackermann order.
    pub fn members(&self) -> &[HfSet] {
        &self.0.elems
    }

    /// Membership `u ∈ self`.
    pub fn contains(&self, u: &HfSet) -> bool {
        self.0.elems.binary_search_by(|e| e.cmp(u)).is_ok()
    }

    /// `self ⊆ z`.
    pub fn subset_of(&self, z: &HfSet) -> bool {
        // merge walk over two sorted element lists
        let mut zi = z.0.elems.iter();
        'outer: for x in &self.0.elems {
            for y in zi.by_ref() {
                match y.cmp(x) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// Kuratowski pair `⟨x,y⟩ = {{x},{x,y}}`.
    pub fn pair(x: &HfSet, y: &HfSet) -> Self {
        let sing = HfSet::empty().eats(x);
        let doub = sing.eats(y);
        HfSet::empty().eats(&sing).eats(&doub)
    }

    /// Inverse of `pair`.
    pub fn unpair(&self) -> Result<(HfSet, HfSet), HfError> {
        match self.0.elems.as_slice() {
            [s] => match s.0.elems.as_slice() {
                [x] => Ok((x.clone(), x.clone())),
                _ => Err(HfError::NotAPair),
            },
            [a, b] => {
                let (sing, doub) = if a.len() == 1 && b.len() == 2 {
                    (a, b)
                } else if b.len() == 1 && a.len() == 2 {
                    (b, a)
                } else {
                    return Err(HfError::NotAPair);
                };
                let x = &sing.0.elems[0];
                let (u, v) = (&doub.0.elems[0], &doub.0.elems[1]);
                if u == x {
                    Ok((x.clone(), v.clone()))
                } else if v == x {
                    Ok((x.clone(), u.clone()))
                } else {
                    Err(HfError::NotAPair)
                }
            }
            _ => Err(HfError::NotAPair),
        }
    }

    /// The von Neumann ordinal `n`: `ord(0) = ∅`, `ord(n+1) = ord(n) ◁ ord(n)`.
    /// Cached per thread; proof sequences index entries by ordinal.
    pub fn ord(n: u64) -> Self {
        ORDINALS.with(|c| {
            let mut c = c.borrow_mut();
            if c.is_empty() {
                c.push(HfSet::empty());
            }
            while (c.len() as u64) <= n {
                let prev = c.last().unwrap().clone();
                c.push(prev.eats(&prev));
            }
            c[n as usize].clone()
        })
    }

    /// Returns `Some(n)` when this set is the von Neumann ordinal `n`.
    pub fn to_ordinal(&self) -> Option<u64> {
        let elems = &self.0.elems;
        let n = elems.len() as u64;
        // cheap rejections before materializing the candidate ordinal
        if n > 0 && (!elems[0].is_empty() || elems[n as usize - 1].len() != n as usize - 1) {
            return None;
        }
        if *self == HfSet::ord(n) {
            Some(n)
        } else {
            None
        }
    }

    /// Rank: 0 for ∅, else 1 + max rank of members.
    pub fn rank(&self) -> u32 {
        self.0
            .elems
            .iter()
            .map(|e| e.rank() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Ackermann index `f(x) = Σ { 2^f(y) | y ∈ x }`.
    ///
    /// Materializes the index as a big integer; sizes explode beyond
    /// rank 5, so callers should keep inputs small.
    pub fn ack_index(&self) -> AckIndex {
        fn go(x: &HfSet, memo: &mut HashMap<HfSet, BigUint>) -> BigUint {
            if let Some(v) = memo.get(x) {
                return v.clone();
            }
            let mut sum = BigUint::zero();
            for y in x.members() {
                let e = go(y, memo);
                let shift =
                    u64::try_from(&e).expect("ack_index exponent too large to materialize");
                sum += BigUint::one() << shift;
            }
            memo.insert(x.clone(), sum.clone());
            sum
        }
        let mut memo = HashMap::new();
        AckIndex(go(self, &mut memo))
    }

    /// Inverse of `ack_index`, built from the binary expansion of `n`.
    pub fn from_ack_index(n: &AckIndex) -> Self {
        fn from_pos(p: u64, memo: &mut HashMap<u64, HfSet>) -> HfSet {
            if let Some(v) = memo.get(&p) {
                return v.clone();
            }
            // binary expansion of the position itself
            let mut elems = Vec::new();
            for b in 0..64 {
                if (p >> b) & 1 == 1 {
                    elems.push(from_pos(b, memo));
                }
            }
            let s = HfSet::from_sorted(elems);
            memo.insert(p, s.clone());
            s
        }
        let mut memo = HashMap::new();
        let mut elems = Vec::new();
        for b in 0..n.0.bits() {
            if n.0.bit(b) {
                elems.push(from_pos(b, &mut memo));
            }
        }
        HfSet::from_sorted(elems)
    }

    pub fn from_index_u64(n: u64) -> Self {
        HfSet::from_ack_index(&AckIndex::from_u64(n))
    }

    /// The set `{⟨ord(l), items[l]⟩ : 0 ≤ l < k}`: a function with
    /// ordinal domain, used for witness sequences.
    pub fn seq_from_list(items: &[HfSet]) -> Self {
        let mut elems: Vec<HfSet> = items
            .iter()
            .enumerate()
            .map(|(l, x)| HfSet::pair(&HfSet::ord(l as u64), x))
            .collect();
        elems.sort();
        elems.dedup();
        HfSet::from_sorted(elems)
    }

    /// The unique `y` with `⟨ord(l), y⟩ ∈ s`.
    pub fn seq_lookup(s: &HfSet, l: u64) -> Result<HfSet, HfError> {
        let idx = HfSet::ord(l);
        let mut found: Option<HfSet> = None;
        for p in s.members() {
            let (a, b) = p.unpair().map_err(|_| HfError::NotASequence)?;
            if a == idx {
                match found {
                    None => found = Some(b),
                    Some(ref prev) if *prev == b => {}
                    Some(_) => return Err(HfError::NotASequence),
                }
            }
        }
        found.ok_or(HfError::IndexOutOfRange)
    }

    /// Iterator over the whole universe in ascending Ackermann order.
    pub fn iter_all() -> impl Iterator<Item = HfSet> {
        (0u64..).map(HfSet::from_index_u64)
    }

    /// Braces notation with one level expanded, ordinal shorthand inside.
    pub fn to_braces_string(&self) -> String {
        if self.is_empty() {
            return "0".to_string();
        }
        let inner: Vec<String> = self.members().iter().map(|m| m.to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }
}

impl PartialEq for HfSet {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.elems.len() != other.0.elems.len() {
            return false;
        }
        self.0
            .elems
            .iter()
            .zip(other.0.elems.iter())
            .all(|(a, b)| a == b)
    }
}

impl Eq for HfSet {}

impl Hash for HfSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for HfSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HfSet {
    /// Ackermann order without materializing indices: compare element
    /// lists from the largest element down; the first difference is the
    /// highest differing binary digit of `f`.
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let a = &self.0.elems;
        let b = &other.0.elems;
        for (x, y) in a.iter().rev().zip(b.iter().rev()) {
            match x.cmp(y) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        a.len().cmp(&b.len())
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.to_ordinal() {
            return write!(f, "{}", n);
        }
        write!(f, "{{")?;
        for (i, m) in self.members().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parses the debugging notation: `0`, decimal ordinals, and braces
/// `{a,b,c}` in any order with duplicates tolerated.
pub fn parse_set(text: &str) -> Result<HfSet, HfError> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
    }
    impl<'a> P<'a> {
        fn skip_ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn parse(&mut self) -> Result<HfSet, HfError> {
            self.skip_ws();
            if self.i >= self.s.len() {
                return Err(HfError::Parse(self.i, "unexpected end of input".into()));
            }
            match self.s[self.i] {
                b'{' => {
                    self.i += 1;
                    let mut elems = Vec::new();
                    self.skip_ws();
                    if self.i < self.s.len() && self.s[self.i] == b'}' {
                        self.i += 1;
                        return Ok(HfSet::empty());
                    }
                    loop {
                        elems.push(self.parse()?);
                        self.skip_ws();
                        if self.i >= self.s.len() {
                            return Err(HfError::Parse(self.i, "expected ',' or '}'".into()));
                        }
                        match self.s[self.i] {
                            b',' => self.i += 1,
                            b'}' => {
                                self.i += 1;
                                return Ok(HfSet::from_elems(elems));
                            }
                            c => {
                                return Err(HfError::Parse(
                                    self.i,
                                    format!("expected ',' or '}}', found {:?}", c as char),
                                ))
                            }
                        }
                    }
                }
                c if c.is_ascii_digit() => {
                    let start = self.i;
                    while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                        self.i += 1;
                    }
                    let txt = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                    let n: u64 = txt
                        .parse()
                        .map_err(|_| HfError::Parse(start, "ordinal too large".into()))?;
                    Ok(HfSet::ord(n))
                }
                c => Err(HfError::Parse(
                    self.i,
                    format!("expected set, found {:?}", c as char),
                )),
            }
        }
    }
    let mut p = P {
        s: text.as_bytes(),
        i: 0,
    };
    let v = p.parse()?;
    p.skip_ws();
    if p.i != text.len() {
        return Err(HfError::Parse(p.i, "trailing input".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e() -> HfSet {
        HfSet::empty()
    }

    #[test]
    fn empty_has_no_members() {
        assert!(e().is_empty());
        assert!(!e().contains(&e()));
        assert_eq!(e().ack_index(), AckIndex::from_u64(0));
    }

    #[test]
    fn eats_models_hf2() {
        let s = e().eats(&e());
        assert!(s.contains(&e()));
        assert_eq!(s.eats(&e()), s); // idempotent insertion
        let two = e().eats(&s);
        assert_eq!(two.ack_index(), AckIndex::from_u64(2));
    }

    #[test]
    fn membership_examples() {
        let one = e().eats(&e());
        assert!(one.contains(&e()));
        assert!(!one.contains(&one));
        assert!(!e().contains(&e()));
    }

    #[test]
    fn subset_examples() {
        let one = e().eats(&e());
        let two = one.eats(&one); // {0,{0}}
        assert!(e().subset_of(&two));
        assert!(one.subset_of(&two));
        assert!(!e().eats(&one).subset_of(&one)); // {{0}} ⊄ {0}
    }

    #[test]
    fn pair_examples() {
        let one = e().eats(&e());
        assert_eq!(HfSet::pair(&e(), &e()), e().eats(&one)); // {{0}}
        let p = HfSet::pair(&e(), &one);
        assert_eq!(p.unpair().unwrap(), (e(), one.clone()));
        assert_eq!(HfSet::pair(&e(), &e()).unpair().unwrap(), (e(), e()));
        assert_eq!(e().unpair(), Err(HfError::NotAPair));
    }

    #[test]
    fn pair_roundtrip_rank3() {
        // all sets of rank <= 3 have index < 16
        let all: Vec<HfSet> = (0..16).map(HfSet::from_index_u64).collect();
        for x in &all {
            for y in &all {
                let p = HfSet::pair(x, y);
                let (a, b) = p.unpair().unwrap();
                assert_eq!((&a, &b), (x, y));
            }
        }
    }

    #[test]
    fn pair_injective_rank3() {
        let all: Vec<HfSet> = (0..16).map(HfSet::from_index_u64).collect();
        let mut seen = HashMap::new();
        for x in &all {
            for y in &all {
                let p = HfSet::pair(x, y);
                if let Some(prev) = seen.insert(p, (x.clone(), y.clone())) {
                    assert_eq!(prev, (x.clone(), y.clone()));
                }
            }
        }
    }

    #[test]
    fn ordinals() {
        assert_eq!(HfSet::ord(0), e());
        assert_eq!(HfSet::ord(1), e().eats(&e()));
        let three = HfSet::ord(3);
        assert_eq!(three.len(), 3);
        assert!(three.contains(&HfSet::ord(0)));
        assert!(three.contains(&HfSet::ord(1)));
        assert!(three.contains(&HfSet::ord(2)));
        for n in 0..12 {
            assert_eq!(HfSet::ord(n).to_ordinal(), Some(n));
        }
        assert_eq!(HfSet::pair(&e(), &e()).to_ordinal(), None);
    }

    #[test]
    fn ack_index_examples() {
        let one = e().eats(&e());
        let s = e().eats(&e()).eats(&one); // {0,{0}}
        assert_eq!(s.ack_index(), AckIndex::from_u64(3));
        // brute-force oracle: independent recursion over u64
        fn brute(x: &HfSet) -> u64 {
            x.members().iter().map(|y| 1u64 << brute(y)).sum()
        }
        for n in 0..=6 {
            let o = HfSet::ord(n);
            if o.rank() <= 4 {
                assert_eq!(o.ack_index().0, BigUint::from(brute(&o)));
            }
        }
    }

    #[test]
    fn from_ack_index_examples() {
        assert_eq!(HfSet::from_index_u64(0), e());
        let s = HfSet::from_index_u64(3);
        assert_eq!(s, e().eats(&e()).eats(&e().eats(&e())));
        for n in 0..16u64 {
            let x = HfSet::from_index_u64(n);
            assert_eq!(x.ack_index(), AckIndex::from_u64(n));
            assert_eq!(HfSet::from_ack_index(&x.ack_index()), x);
        }
    }

    #[test]
    fn eats_index_identity() {
        for xn in 0..64u64 {
            for yn in 0..8u64 {
                let x = HfSet::from_index_u64(xn);
                let y = HfSet::from_index_u64(yn);
                let z = x.eats(&y);
                let expect = if x.contains(&y) { xn } else { xn + (1 << yn) };
                assert_eq!(z.ack_index(), AckIndex::from_u64(expect));
            }
        }
    }

    #[test]
    fn order_matches_index() {
        let mut sets: Vec<HfSet> = (0..256).map(HfSet::from_index_u64).collect();
        let by_index = sets.clone();
        sets.sort();
        assert_eq!(sets, by_index);
        let x = HfSet::from_index_u64(77);
        assert_eq!(x.cmp(&x), Ordering::Equal);
        assert_eq!(e().cmp(&e().eats(&e())), Ordering::Less);
    }

    #[test]
    fn extensional_equality_is_structural() {
        // independent recursive comparison
        fn ext_eq(a: &HfSet, b: &HfSet) -> bool {
            a.members().iter().all(|x| b.members().iter().any(|y| ext_eq(x, y)))
                && b.members().iter().all(|y| a.members().iter().any(|x| ext_eq(x, y)))
        }
        let all: Vec<HfSet> = (0..64).map(HfSet::from_index_u64).collect();
        for x in &all {
            for y in &all {
                assert_eq!(x == y, ext_eq(x, y));
            }
        }
    }

    #[test]
    fn sequences() {
        assert_eq!(HfSet::seq_from_list(&[]), e());
        let one = e().eats(&e());
        let s = HfSet::seq_from_list(&[e()]);
        assert_eq!(s, e().eats(&HfSet::pair(&HfSet::ord(0), &e())));
        let s2 = HfSet::seq_from_list(&[e(), one.clone()]);
        assert_eq!(HfSet::seq_lookup(&s2, 1).unwrap(), one);
        assert_eq!(HfSet::seq_lookup(&s2, 0).unwrap(), e());
        assert_eq!(HfSet::seq_lookup(&s, 3), Err(HfError::IndexOutOfRange));
        assert_eq!(HfSet::seq_lookup(&e(), 0), Err(HfError::IndexOutOfRange));
        assert_eq!(HfSet::seq_lookup(&one, 0), Err(HfError::NotASequence));
    }

    #[test]
    fn seq_roundtrip() {
        let items: Vec<HfSet> = vec![
            HfSet::from_index_u64(5),
            HfSet::from_index_u64(0),
            HfSet::from_index_u64(5),
            HfSet::from_index_u64(11),
        ];
        let s = HfSet::seq_from_list(&items);
        for (l, x) in items.iter().enumerate() {
            assert_eq!(&HfSet::seq_lookup(&s, l as u64).unwrap(), x);
        }
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(e().to_string(), "0");
        let p = HfSet::pair(&e(), &e().eats(&e()));
        let txt = p.to_string();
        assert_eq!(parse_set(&txt).unwrap(), p);
        // parser accepts any order and duplicates, normalizing
        assert_eq!(parse_set("{1,0,0}").unwrap(), HfSet::ord(2));
        assert_eq!(parse_set("{}").unwrap(), e());
        assert_eq!(parse_set("3").unwrap(), HfSet::ord(3));
        assert!(parse_set("{0,").is_err());
    }
}
