//! Vertices of the rooted tree X*: finite words over `{0, .., d-1}`.
//!
//! Words are stored root letter first, so `v.concat(w)` is the vertex `vw`
//! reached from `v` by descending along `w`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest alphabet supported by the digit-string text format.
pub const MAX_ARITY: usize = 10;

pub(crate) fn check_arity(arity: usize) -> Result<()> {
    if arity < 2 {
        return Err(Error::AlphabetTooSmall(arity));
    }
    if arity > MAX_ARITY {
        return Err(Error::AlphabetTooLarge(arity));
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    arity: u8,
    letters: Vec<u8>,
}

/// Position of one vertex relative to another in the prefix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Equal,
    /// The first word is a proper prefix of the second.
    Ancestor,
    /// The second word is a proper prefix of the first.
    Descendant,
    Incomparable,
}

impl Word {
    pub fn empty(arity: usize) -> Word {
        Word {
            arity: arity as u8,
            letters: Vec::new(),
        }
    }

    pub fn new(arity: usize, letters: Vec<u8>) -> Result<Word> {
        check_arity(arity)?;
        if let Some(&bad) = letters.iter().find(|&&x| x as usize >= arity) {
            return Err(Error::LetterOutOfRange {
                letter: bad as usize,
                arity,
            });
        }
        Ok(Word {
            arity: arity as u8,
            letters,
        })
    }

    pub(crate) fn from_letters_unchecked(arity: usize, letters: Vec<u8>) -> Word {
        Word {
            arity: arity as u8,
            letters,
        }
    }

    /// Parses a digit string such as `"011"`; the literal `"e"` is the empty word.
    pub fn parse(arity: usize, text: &str) -> Result<Word> {
        check_arity(arity)?;
        let text = text.trim();
        if text == "e" || text == "ε" {
            return Ok(Word::empty(arity));
        }
        let mut letters = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let digit = ch.to_digit(10).ok_or_else(|| Error::BadWord(text.to_string()))?;
            letters.push(digit as u8);
        }
        Word::new(arity, letters)
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<u8> {
        self.letters.first().copied()
    }

    pub fn child(&self, x: u8) -> Word {
        debug_assert!((x as usize) < self.arity());
        let mut letters = self.letters.clone();
        letters.push(x);
        Word {
            arity: self.arity,
            letters,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.arity).map(move |x| self.child(x))
    }

    pub fn parent(&self) -> Option<Word> {
        if self.letters.is_empty() {
            return None;
        }
        Some(Word {
            arity: self.arity,
            letters: self.letters[..self.letters.len() - 1].to_vec(),
        })
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word {
            arity: self.arity,
            letters: self.letters[..len].to_vec(),
        }
    }

    /// The word with the first `len` letters removed.
    pub fn suffix_from(&self, len: usize) -> Word {
        Word {
            arity: self.arity,
            letters: self.letters[len..].to_vec(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word {
            arity: self.arity,
            letters,
        }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.letters.starts_with(&self.letters)
    }

    /// Returns `w` with `self = prefix · w`, if `prefix` is a prefix of `self`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.letters.strip_prefix(prefix.letters.as_slice()).map(|rest| Word {
            arity: self.arity,
            letters: rest.to_vec(),
        })
    }

    pub fn compare(&self, other: &Word) -> Result<Relation> {
        if self.arity != other.arity {
            return Err(Error::AlphabetMismatch(self.arity(), other.arity()));
        }
        Ok(self.relation(other))
    }

    pub(crate) fn relation(&self, other: &Word) -> Relation {
        let common = self
            .letters
            .iter()
            .zip(&other.letters)
            .take_while(|(a, b)| a == b)
            .count();
        match (common == self.len(), common == other.len()) {
            (true, true) => Relation::Equal,
            (true, false) => Relation::Ancestor,
            (false, true) => Relation::Descendant,
            (false, false) => Relation::Incomparable,
        }
    }

    pub fn is_comparable(&self, other: &Word) -> bool {
        self.relation(other) != Relation::Incomparable
    }

    /// Index of this word among the words of its length, in lexicographic order.
    pub fn level_index(&self) -> usize {
        self.letters
            .iter()
            .fold(0usize, |acc, &x| acc * self.arity() + x as usize)
    }

    pub fn from_level_index(arity: usize, level: usize, mut index: usize) -> Word {
        let mut letters = vec![0u8; level];
        for slot in letters.iter_mut().rev() {
            *slot = (index % arity) as u8;
            index /= arity;
        }
        Word {
            arity: arity as u8,
            letters,
        }
    }

    /// All words of length `level`, in lexicographic order.
    pub fn level(arity: usize, level: usize) -> impl Iterator<Item = Word> {
        let count = arity.pow(level as u32);
        (0..count).map(move |i| Word::from_level_index(arity, level, i))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on letters, i.e. the order of the digit strings.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.cmp(&other.letters).then(self.arity.cmp(&other.arity))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for &x in &self.letters {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A finite set of vertices, kept in lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct VertexSet(BTreeSet<Word>);

impl VertexSet {
    pub fn new() -> VertexSet {
        VertexSet(BTreeSet::new())
    }

    /// Parses `"{0, 10}"`, `"0,10"` or `"0 10"`.
    pub fn parse(arity: usize, text: &str) -> Result<VertexSet> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| Word::parse(arity, s))
            .collect()
    }

    pub fn insert(&mut self, w: Word) -> bool {
        self.0.insert(w)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.0.iter()
    }

    pub fn max_len(&self) -> usize {
        self.0.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_antichain(&self) -> bool {
        let words: Vec<&Word> = self.0.iter().collect();
        // In lexicographic order a word is immediately followed by its descendants.
        words.windows(2).all(|pair| !pair[0].is_prefix_of(pair[1]))
    }

    pub fn require_antichain(&self) -> Result<()> {
        if self.is_antichain() {
            Ok(())
        } else {
            Err(Error::NotAntichain(self.to_string()))
        }
    }

    /// The member that is comparable with `w`, if the set is an antichain and one exists.
    pub fn comparable_member(&self, w: &Word) -> Option<&Word> {
        self.0.iter().find(|t| t.is_comparable(w))
    }

    /// Whether `w` lies at or below some member.
    pub fn covers(&self, w: &Word) -> bool {
        self.0.iter().any(|t| t.is_prefix_of(w))
    }

    /// The smallest transversal containing this antichain: the members plus every
    /// sibling of an ancestor of a member that is itself not an ancestor of a member.
    pub fn complete_to_transversal(&self, arity: usize) -> VertexSet {
        let mut out = self.clone();
        if self.is_empty() {
            out.insert(Word::empty(arity));
            return out;
        }
        let ancestors: BTreeSet<Word> = self
            .0
            .iter()
            .flat_map(|w| (0..w.len()).map(move |k| w.prefix(k)))
            .collect();
        for a in &ancestors {
            for c in a.children() {
                if !ancestors.contains(&c) && !self.0.contains(&c) {
                    out.insert(c);
                }
            }
        }
        out
    }
}

impl FromIterator<Word> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Word>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a Word;
    type IntoIter = std::collections::btree_set::Iter<'a, Word>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VertexSet{self}")
    }
}

/// Whether `set` is a transversal of the `arity`-regular tree: an antichain that
/// every vertex is comparable with. Checked by expanding leaves from the root,
/// since a finite set is a transversal exactly when it is reached from `{ε}` by
/// repeatedly replacing a leaf with its children.
pub fn validate_transversal(set: &VertexSet, arity: usize) -> bool {
    if set.is_empty() || set.iter().any(|w| w.arity() != arity) || !set.is_antichain() {
        return false;
    }
    fn expand(node: &Word, set: &VertexSet) -> bool {
        if set.contains(node) {
            return true;
        }
        if !set.iter().any(|t| node.is_prefix_of(t)) {
            return false;
        }
        node.children().all(|c| expand(&c, set))
    }
    expand(&Word::empty(arity), set)
}
