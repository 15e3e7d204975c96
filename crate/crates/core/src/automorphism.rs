//! Tree automorphisms built from generator letters and grafted portraits.
//!
//! An element is a product `f_1 f_2 ⋯ f_m` (acting right to left) of factors,
//! each a generator letter or a graft `v@k`, which acts as `k` on the subtree
//! below `v` and trivially elsewhere. Products are kept in a normal form:
//! generator runs are reduced with the group's rules, and consecutive grafts
//! are merged when comparable and sorted otherwise (grafts at incomparable
//! vertices commute).

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_defs::{GenLetter, SelfSimilarGroup};
use crate::perm::Perm;
use crate::verdict::Verdict;
use crate::words::{Relation, Word};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum Factor {
    Gen(GenLetter),
    /// Nonempty vertex, nonempty normalized inner product.
    Graft(Word, Arc<[Factor]>),
}

/// Budget for the triviality search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EqBudget {
    pub max_depth: usize,
    pub max_states: usize,
}

impl Default for EqBudget {
    fn default() -> Self {
        EqBudget {
            max_depth: 64,
            max_states: 100_000,
        }
    }
}

#[derive(Clone)]
pub struct TreeAutomorphism {
    group: Arc<SelfSimilarGroup>,
    factors: Arc<[Factor]>,
}

impl PartialEq for TreeAutomorphism {
    /// Equality of normal forms, not of group elements; see [`TreeAutomorphism::equals`].
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for TreeAutomorphism {}

impl std::hash::Hash for TreeAutomorphism {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.factors.hash(state)
    }
}

impl TreeAutomorphism {
    pub fn identity(group: &Arc<SelfSimilarGroup>) -> TreeAutomorphism {
        TreeAutomorphism {
            group: group.clone(),
            factors: Arc::from(Vec::new()),
        }
    }

    pub fn generator(group: &Arc<SelfSimilarGroup>, gen: usize) -> TreeAutomorphism {
        TreeAutomorphism::from_word(group, &[GenLetter::new(gen)])
    }

    pub fn from_word(group: &Arc<SelfSimilarGroup>, word: &[GenLetter]) -> TreeAutomorphism {
        let factors = group.reduce(word).into_iter().map(Factor::Gen).collect::<Vec<_>>();
        TreeAutomorphism {
            group: group.clone(),
            factors: factors.into(),
        }
    }

    /// Parses an element: a generator word, where additionally `v@x` grafts the
    /// element `x` at the vertex `v` (digits), e.g. `"0@(a b a b) 1@(a b a b)"`.
    pub fn parse(group: &Arc<SelfSimilarGroup>, text: &str) -> Result<TreeAutomorphism> {
        let chars: Vec<char> = text.chars().collect();
        let mut p = ElementParser {
            group,
            chars: &chars,
            pos: 0,
            text,
        };
        let g = p.expr()?;
        p.skip_ws();
        if p.pos != chars.len() {
            return Err(p.fail());
        }
        Ok(g)
    }

    fn from_factors(group: &Arc<SelfSimilarGroup>, factors: Vec<Factor>) -> TreeAutomorphism {
        TreeAutomorphism {
            group: group.clone(),
            factors: factors.into(),
        }
    }

    pub fn group(&self) -> &Arc<SelfSimilarGroup> {
        &self.group
    }

    pub fn arity(&self) -> usize {
        self.group.arity()
    }

    /// True when the normal form is empty. A `false` answer does not mean the
    /// element is nontrivial.
    pub fn is_identity_form(&self) -> bool {
        self.factors.is_empty()
    }

    /// The generator word, when the element has no grafts.
    pub fn as_word(&self) -> Option<Vec<GenLetter>> {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Gen(l) => Some(*l),
                Factor::Graft(..) => None,
            })
            .collect()
    }

    pub fn has_grafts(&self) -> bool {
        self.factors.iter().any(|f| matches!(f, Factor::Graft(..)))
    }

    /// Number of factors in the normal form, counting graft interiors.
    pub fn size(&self) -> usize {
        fn size(fs: &[Factor]) -> usize {
            fs.iter()
                .map(|f| match f {
                    Factor::Gen(_) => 1,
                    Factor::Graft(_, k) => 1 + size(k),
                })
                .sum()
        }
        size(&self.factors)
    }

    /// `graft(v, k)`: acts as `k` below `v` and trivially elsewhere.
    pub fn graft(v: &Word, k: &TreeAutomorphism) -> TreeAutomorphism {
        assert_eq!(v.arity(), k.arity(), "alphabet mismatch");
        let mut n = Normalizer::new(&k.group);
        n.push_graft(v.clone(), k.factors.clone());
        TreeAutomorphism::from_factors(&k.group, n.finish())
    }

    /// `self · other`, acting as `other` first.
    pub fn compose(&self, other: &TreeAutomorphism) -> TreeAutomorphism {
        debug_assert!(Arc::ptr_eq(&self.group, &other.group) || *self.group == *other.group);
        if self.factors.is_empty() {
            return other.clone();
        }
        if other.factors.is_empty() {
            return self.clone();
        }
        let mut n = Normalizer::resume(&self.group, self.factors.to_vec());
        for f in other.factors.iter() {
            n.push(f.clone());
        }
        TreeAutomorphism::from_factors(&self.group, n.finish())
    }

    pub fn inverse(&self) -> TreeAutomorphism {
        TreeAutomorphism::from_factors(&self.group, invert_factors(&self.group, &self.factors))
    }

    pub fn pow(&self, k: i64) -> TreeAutomorphism {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = TreeAutomorphism::identity(&self.group);
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                out = out.compose(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq);
            }
        }
        out
    }

    /// `[g, h] = g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, other: &TreeAutomorphism) -> TreeAutomorphism {
        self.compose(other).compose(&self.inverse()).compose(&other.inverse())
    }

    /// `self · other · self⁻¹`.
    pub fn conjugate(&self, other: &TreeAutomorphism) -> TreeAutomorphism {
        self.compose(other).compose(&self.inverse())
    }

    pub fn root_perm(&self) -> Perm {
        let mut p = Perm::identity(self.arity());
        for f in self.factors.iter() {
            if let Factor::Gen(l) = f {
                p = p.compose(self.group.letter_perm(*l));
            }
        }
        p
    }

    /// The section at a single letter.
    pub fn section_letter(&self, x: u8) -> TreeAutomorphism {
        let parts = section_parts(&self.group, &self.factors, x as usize);
        let mut n = Normalizer::new(&self.group);
        for part in parts.into_iter().rev() {
            match part {
                Part::Word(w) => {
                    for &l in w {
                        n.push(Factor::Gen(l));
                    }
                }
                Part::Factors(fs) => {
                    for f in fs.iter() {
                        n.push(f.clone());
                    }
                }
                Part::Graft(v, k) => n.push_graft(v, k),
            }
        }
        TreeAutomorphism::from_factors(&self.group, n.finish())
    }

    /// The section `φ_v(g)`, defined by `g·(vw) = (g·v)(φ_v(g)·w)`.
    pub fn section(&self, v: &Word) -> TreeAutomorphism {
        assert_eq!(v.arity(), self.arity(), "alphabet mismatch");
        v.letters().iter().fold(self.clone(), |g, &x| g.section_letter(x))
    }

    pub fn act(&self, w: &Word) -> Word {
        assert_eq!(w.arity(), self.arity(), "alphabet mismatch");
        let mut letters = w.letters().to_vec();
        act_factors(&self.group, &self.factors, &mut letters);
        Word::from_letters_unchecked(self.arity(), letters)
    }

    /// Whether the element fixes every vertex up to the given length.
    pub fn fixes_level(&self, n: usize) -> bool {
        self.first_moved_up_to(n).is_none()
    }

    /// The shortest vertex of length at most `n` moved by the element, in
    /// breadth-first order, found by walking sections.
    pub fn first_moved_up_to(&self, n: usize) -> Option<Word> {
        let mut queue = VecDeque::from([(self.clone(), Word::empty(self.arity()))]);
        let mut seen = HashSet::new();
        while let Some((g, path)) = queue.pop_front() {
            let p = g.root_perm();
            if let Some(x) = p.first_moved() {
                return Some(path.child(x as u8));
            }
            if path.len() + 1 >= n {
                continue;
            }
            for x in 0..self.arity() as u8 {
                let s = g.section_letter(x);
                if !s.is_identity_form() && seen.insert((s.clone(), path.len() + 1)) {
                    queue.push_back((s, path.child(x)));
                }
            }
        }
        None
    }

    /// Decides `g = 1` by exploring the closure of sections.
    ///
    /// Proven: a finite set of elements containing `g`, closed under sections,
    /// all with trivial root permutation. Refuted: a moved vertex of minimal length.
    pub fn is_trivial(&self, budget: &EqBudget) -> Verdict {
        let mut queue = VecDeque::from([(self.clone(), Word::empty(self.arity()))]);
        let mut seen: HashSet<TreeAutomorphism> = HashSet::new();
        if !self.is_identity_form() {
            seen.insert(self.clone());
        }
        while let Some((g, path)) = queue.pop_front() {
            if g.is_identity_form() {
                continue;
            }
            if let Some(x) = g.root_perm().first_moved() {
                let w = path.child(x as u8);
                return Verdict::refuted(format!("moves vertex {w}")).at_vertex(w);
            }
            if path.len() >= budget.max_depth {
                return Verdict::unknown(format!(
                    "section depth {} reached with {} states",
                    budget.max_depth,
                    seen.len()
                ));
            }
            for x in 0..self.arity() as u8 {
                let s = g.section_letter(x);
                if s.is_identity_form() || seen.contains(&s) {
                    continue;
                }
                if seen.len() >= budget.max_states {
                    return Verdict::unknown(format!(
                        "state budget {} exhausted at depth {}",
                        budget.max_states,
                        path.len() + 1
                    ));
                }
                seen.insert(s.clone());
                queue.push_back((s, path.child(x)));
            }
        }
        Verdict::proven(format!(
            "section closure of {} states, all with trivial root permutation",
            seen.len()
        ))
    }

    /// Decides `self = other` as `self · other⁻¹ = 1`.
    pub fn equals(&self, other: &TreeAutomorphism, budget: &EqBudget) -> Verdict {
        self.compose(&other.inverse()).is_trivial(budget)
    }

    /// Depth-`k` portrait: root permutation then the sections in letter order.
    pub fn portrait(&self, depth: usize) -> String {
        if depth == 0 || self.is_identity_form() {
            return self.to_string();
        }
        let sections: Vec<String> = (0..self.arity() as u8)
            .map(|x| self.section_letter(x).portrait(depth - 1))
            .collect();
        format!("{}[{}]", self.root_perm(), sections.join(", "))
    }
}

impl fmt::Display for TreeAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("e");
        }
        f.write_str(&format_factors(&self.group, &self.factors))
    }
}

impl fmt::Debug for TreeAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{self}⟩")
    }
}

impl Serialize for TreeAutomorphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn format_factors(group: &SelfSimilarGroup, fs: &[Factor]) -> String {
    let parts: Vec<String> = fs
        .iter()
        .map(|f| match f {
            Factor::Gen(l) => group.format_word(&[*l]),
            Factor::Graft(v, k) => match &k[..] {
                [Factor::Gen(l)] if !l.inverse => format!("{v}@{}", group.format_word(&[*l])),
                _ => format!("{v}@({})", format_factors(group, k)),
            },
        })
        .collect();
    parts.join(" ")
}

enum Part<'a> {
    Word(&'a [GenLetter]),
    Factors(Arc<[Factor]>),
    Graft(Word, Arc<[Factor]>),
}

/// Right-to-left contributions to the section at letter `x`.
fn section_parts<'a>(group: &'a SelfSimilarGroup, fs: &[Factor], x: usize) -> Vec<Part<'a>> {
    let mut y = x;
    let mut parts = Vec::new();
    for f in fs.iter().rev() {
        match f {
            Factor::Gen(l) => {
                let w = group.letter_section(*l, y);
                if !w.is_empty() {
                    parts.push(Part::Word(w));
                }
                y = group.letter_perm(*l).apply(y);
            }
            Factor::Graft(v, k) => {
                if v.letters()[0] as usize == y {
                    if v.len() == 1 {
                        parts.push(Part::Factors(k.clone()));
                    } else {
                        parts.push(Part::Graft(v.suffix_from(1), k.clone()));
                    }
                }
            }
        }
    }
    parts
}

fn act_gen_word(group: &SelfSimilarGroup, word: &[GenLetter], w: &mut [u8]) {
    for &l in word.iter().rev() {
        act_letter(group, l, w);
    }
}

fn act_letter(group: &SelfSimilarGroup, l: GenLetter, w: &mut [u8]) {
    if w.is_empty() {
        return;
    }
    let x = w[0] as usize;
    w[0] = group.letter_perm(l).apply(x) as u8;
    let s = group.letter_section(l, x);
    if !s.is_empty() {
        act_gen_word(group, s, &mut w[1..]);
    }
}

fn act_factors(group: &SelfSimilarGroup, fs: &[Factor], w: &mut [u8]) {
    for f in fs.iter().rev() {
        match f {
            Factor::Gen(l) => act_letter(group, *l, w),
            Factor::Graft(v, k) => {
                if v.len() <= w.len() && &w[..v.len()] == v.letters() {
                    act_factors(group, k, &mut w[v.len()..]);
                }
            }
        }
    }
}

fn invert_factors(group: &Arc<SelfSimilarGroup>, fs: &[Factor]) -> Vec<Factor> {
    let mut n = Normalizer::new(group);
    for f in fs.iter().rev() {
        match f {
            Factor::Gen(l) => n.push(Factor::Gen(l.inv())),
            Factor::Graft(v, k) => n.push_graft(v.clone(), invert_factors(group, k).into()),
        }
    }
    n.finish()
}

/// Incremental builder of normal forms.
struct Normalizer<'a> {
    group: &'a Arc<SelfSimilarGroup>,
    out: Vec<Factor>,
}

impl<'a> Normalizer<'a> {
    fn new(group: &'a Arc<SelfSimilarGroup>) -> Self {
        Normalizer { group, out: Vec::new() }
    }

    /// Continue from an existing normal form.
    fn resume(group: &'a Arc<SelfSimilarGroup>, out: Vec<Factor>) -> Self {
        Normalizer { group, out }
    }

    fn push(&mut self, f: Factor) {
        match f {
            Factor::Gen(_) => self.out.push(f),
            Factor::Graft(v, k) => self.push_graft(v, k),
        }
    }

    /// Reduces the trailing run of generator letters.
    fn settle(&mut self) {
        let start = self
            .out
            .iter()
            .rposition(|f| !matches!(f, Factor::Gen(_)))
            .map_or(0, |i| i + 1);
        if self.out.len() - start < 2 {
            return;
        }
        let run: Vec<GenLetter> = self.out[start..]
            .iter()
            .map(|f| match f {
                Factor::Gen(l) => *l,
                Factor::Graft(..) => unreachable!(),
            })
            .collect();
        let reduced = self.group.reduce(&run);
        self.out.truncate(start);
        self.out.extend(reduced.into_iter().map(Factor::Gen));
    }

    fn push_graft(&mut self, v: Word, k: Arc<[Factor]>) {
        if k.is_empty() {
            return;
        }
        if v.is_empty() {
            for f in k.iter() {
                self.push(f.clone());
            }
            return;
        }
        if let [Factor::Graft(u, k2)] = &k[..] {
            self.push_graft(v.concat(u), k2.clone());
            return;
        }
        self.settle();
        let start = self
            .out
            .iter()
            .rposition(|f| !matches!(f, Factor::Graft(..)))
            .map_or(0, |i| i + 1);
        let mut ancestor = None;
        let mut descendants = Vec::new();
        for (i, f) in self.out[start..].iter().enumerate() {
            if let Factor::Graft(w, _) = f {
                match w.relation(&v) {
                    Relation::Equal | Relation::Ancestor => ancestor = Some(start + i),
                    Relation::Descendant => descendants.push(start + i),
                    Relation::Incomparable => {}
                }
            }
        }
        if let Some(i) = ancestor {
            let Factor::Graft(w, k1) = self.out.remove(i) else {
                unreachable!()
            };
            let mut inner = Normalizer::resume(self.group, k1.to_vec());
            inner.push_graft(v.suffix_from(w.len()), k);
            let merged = inner.finish();
            self.push_graft(w, merged.into());
            return;
        }
        if !descendants.is_empty() {
            let mut inner = Normalizer::new(self.group);
            for &i in &descendants {
                if let Factor::Graft(w, k1) = &self.out[i] {
                    inner.push_graft(w.suffix_from(v.len()), k1.clone());
                }
            }
            for f in k.iter() {
                inner.push(f.clone());
            }
            for &i in descendants.iter().rev() {
                self.out.remove(i);
            }
            let merged = inner.finish();
            self.push_graft(v, merged.into());
            return;
        }
        let pos = self.out[start..]
            .iter()
            .position(|f| matches!(f, Factor::Graft(w, _) if *w > v))
            .map_or(self.out.len(), |i| start + i);
        self.out.insert(pos, Factor::Graft(v, k));
    }

    fn finish(mut self) -> Vec<Factor> {
        self.settle();
        self.out
    }
}

struct ElementParser<'a> {
    group: &'a Arc<SelfSimilarGroup>,
    chars: &'a [char],
    pos: usize,
    text: &'a str,
}

impl ElementParser<'_> {
    fn fail(&self) -> Error {
        let rest: String = self.chars[self.pos.min(self.chars.len())..].iter().collect();
        let token: String = rest
            .trim_start()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if token.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            Error::UnknownGenerator(token)
        } else {
            Error::BadWord(self.text.to_string())
        }
    }

    fn bad(&self) -> Error {
        Error::BadWord(self.text.to_string())
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() != Some(c) {
            return Err(self.bad());
        }
        self.pos += 1;
        Ok(())
    }

    fn expr(&mut self) -> Result<TreeAutomorphism> {
        let mut g = TreeAutomorphism::identity(self.group);
        while let Some(c) = self.peek() {
            if c == ')' || c == ']' || c == ',' {
                break;
            }
            let item = self.item()?;
            g = g.compose(&item);
        }
        Ok(g)
    }

    fn item(&mut self) -> Result<TreeAutomorphism> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            if self.chars.get(self.pos) == Some(&'-') {
                self.pos += 1;
            }
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let exp: String = self.chars[start..self.pos].iter().collect();
            let exp: i64 = exp.parse().map_err(|_| self.bad())?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TreeAutomorphism> {
        let c = self.peek().ok_or_else(|| self.bad())?;
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(')')?;
            return Ok(inner);
        }
        if c == '[' {
            self.pos += 1;
            let x = self.expr()?;
            self.expect(',')?;
            let y = self.expr()?;
            self.expect(']')?;
            return Ok(x.commutator(&y));
        }
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.chars.get(self.pos) == Some(&'@') {
                let digits: String = self.chars[start..self.pos].iter().collect();
                let v = Word::parse(self.group.arity(), &digits)?;
                self.pos += 1;
                let k = self.item()?;
                return Ok(TreeAutomorphism::graft(&v, &k));
            }
            if self.pos - start == 1 && c == '1' {
                return Ok(TreeAutomorphism::identity(self.group));
            }
            return Err(self.bad());
        }
        let rest = &self.chars[self.pos..];
        let best = self
            .group
            .generators()
            .iter()
            .enumerate()
            .filter(|(_, g)| {
                let n: Vec<char> = g.name.chars().collect();
                rest.starts_with(&n)
            })
            .max_by_key(|(_, g)| g.name.len());
        if let Some((i, g)) = best {
            self.pos += g.name.chars().count();
            return Ok(TreeAutomorphism::generator(self.group, i));
        }
        if c == 'e' || c == 'ε' {
            self.pos += 1;
            return Ok(TreeAutomorphism::identity(self.group));
        }
        Err(self.fail())
    }
}
