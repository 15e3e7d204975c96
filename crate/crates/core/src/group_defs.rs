//! Self-similar groups given by a finite recursion table.
//!
//! A generator `s` is described by its action on the first letter (a root
//! permutation) and by its sections `s_x`, which are words in the generators:
//! `s·(xw) = π_s(x) (s_x·w)`.
//!
//! The line-based text format is:
//!
//! ```text
//! alphabet 2
//! gen a = (0 1)[e, e]
//! gen b = ()[a, c]
//! rewrite a a -> e
//! flag sip = true
//! branching a b a b
//! ```

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::words::check_arity;

/// A generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GenLetter {
    pub gen: u16,
    pub inverse: bool,
}

impl GenLetter {
    pub fn new(gen: usize) -> GenLetter {
        GenLetter {
            gen: gen as u16,
            inverse: false,
        }
    }

    pub fn inv(self) -> GenLetter {
        GenLetter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        2 * self.gen as usize + self.inverse as usize
    }
}

pub fn invert_word(word: &[GenLetter]) -> Vec<GenLetter> {
    word.iter().rev().map(|l| l.inv()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub perm: Perm,
    pub sections: Vec<Vec<GenLetter>>,
}

/// A length-non-increasing identity `lhs = rhs` used to shorten words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Vec<GenLetter>,
    pub rhs: Vec<GenLetter>,
}

/// Properties declared for a group rather than computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub self_replicating: bool,
    pub sip: bool,
    pub branch_kernel_trivial: bool,
}

impl Flags {
    pub fn all() -> Flags {
        Flags {
            self_replicating: true,
            sip: true,
            branch_kernel_trivial: true,
        }
    }

    /// Human-readable list of the assumptions that are switched on.
    pub fn assumptions(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.self_replicating {
            out.push("self-replicating (declared)".to_string());
        }
        if self.sip {
            out.push("subgroup induction property (declared)".to_string());
        }
        if self.branch_kernel_trivial {
            out.push("trivial branch kernel (declared)".to_string());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SelfSimilarGroup {
    arity: usize,
    generators: Vec<Generator>,
    rewrites: Vec<RewriteRule>,
    pub flags: Flags,
    /// Words whose normal closure is the declared maximal branching subgroup.
    branching: Vec<Vec<GenLetter>>,
    orders: Vec<Option<u32>>,
    letter_perms: Vec<Perm>,
    letter_sections: Vec<Vec<Vec<GenLetter>>>,
}

impl PartialEq for SelfSimilarGroup {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.generators == other.generators
            && self.rewrites == other.rewrites
            && self.flags == other.flags
            && self.branching == other.branching
    }
}

impl SelfSimilarGroup {
    pub fn new(
        arity: usize,
        generators: Vec<Generator>,
        rewrites: Vec<RewriteRule>,
        flags: Flags,
        branching: Vec<Vec<GenLetter>>,
    ) -> Result<SelfSimilarGroup> {
        check_arity(arity)?;
        for (i, g) in generators.iter().enumerate() {
            if g.name.is_empty() || g.name == "e" || !valid_name(&g.name) {
                return Err(Error::Invalid(format!("bad generator name `{}`", g.name)));
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Invalid(format!("duplicate generator `{}`", g.name)));
            }
            if g.perm.degree() != arity {
                return Err(Error::BadPermutation(g.perm.to_string()));
            }
            if g.sections.len() != arity {
                return Err(Error::Invalid(format!("generator `{}` needs {arity} sections", g.name)));
            }
        }
        let n = generators.len();
        let in_range = |w: &[GenLetter]| w.iter().all(|l| (l.gen as usize) < n);
        let all_words = generators
            .iter()
            .flat_map(|g| g.sections.iter())
            .chain(rewrites.iter().flat_map(|r| [&r.lhs, &r.rhs]))
            .chain(branching.iter());
        for w in all_words {
            if !in_range(w) {
                return Err(Error::UnknownGenerator(format!("#{w:?}")));
            }
        }
        for r in &rewrites {
            if r.rhs.len() > r.lhs.len() || r.lhs.is_empty() {
                return Err(Error::LengthIncreasingRule(format!("{:?} -> {:?}", r.lhs, r.rhs)));
            }
        }

        let mut orders = vec![None; n];
        for r in &rewrites {
            let first = r.lhs[0];
            if r.rhs.is_empty() && !first.inverse && r.lhs.len() >= 2 && r.lhs.iter().all(|&l| l == first) {
                let k = r.lhs.len() as u32;
                let slot = &mut orders[first.gen as usize];
                *slot = Some(slot.map_or(k, |old: u32| old.min(k)));
            }
        }

        let mut group = SelfSimilarGroup {
            arity,
            generators,
            rewrites,
            flags,
            branching,
            orders,
            letter_perms: Vec::new(),
            letter_sections: Vec::new(),
        };
        for g in 0..n {
            let perm = group.generators[g].perm.clone();
            let inv = perm.inverse();
            let plain: Vec<Vec<GenLetter>> = (0..arity)
                .map(|x| group.reduce(&group.generators[g].sections[x]))
                .collect();
            let inverse: Vec<Vec<GenLetter>> = (0..arity)
                .map(|x| group.reduce(&invert_word(&group.generators[g].sections[inv.apply(x)])))
                .collect();
            group.letter_perms.push(perm);
            group.letter_perms.push(inv);
            group.letter_sections.push(plain);
            group.letter_sections.push(inverse);
        }
        Ok(group)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn rewrites(&self) -> &[RewriteRule] {
        &self.rewrites
    }

    pub fn branching(&self) -> &[Vec<GenLetter>] {
        &self.branching
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    /// Order of a generator, when a rule `s^k -> e` declares one.
    pub fn generator_order(&self, gen: usize) -> Option<u32> {
        self.orders[gen]
    }

    #[inline]
    pub fn letter_perm(&self, l: GenLetter) -> &Perm {
        &self.letter_perms[l.code()]
    }

    #[inline]
    pub fn letter_section(&self, l: GenLetter, x: usize) -> &[GenLetter] {
        &self.letter_sections[l.code()][x]
    }

    /// Root permutation of a word; the rightmost letter acts first.
    pub fn word_perm(&self, word: &[GenLetter]) -> Perm {
        word.iter()
            .fold(Perm::identity(self.arity), |acc, &l| acc.compose(self.letter_perm(l)))
    }

    /// Canonical short form: free reduction, generator powers reduced modulo
    /// their declared order, then the rewrite rules until nothing applies.
    pub fn reduce(&self, word: &[GenLetter]) -> Vec<GenLetter> {
        let mut current = self.reduce_powers(word);
        // Length never grows, so a cap on equal-length rewrites is enough.
        for _ in 0..10_000 {
            match self.rewrite_once(&current) {
                Some(next) => current = self.reduce_powers(&next),
                None => break,
            }
        }
        current
    }

    fn reduce_powers(&self, word: &[GenLetter]) -> Vec<GenLetter> {
        let mut runs: Vec<(u16, i64)> = Vec::with_capacity(word.len());
        for &l in word {
            let step = if l.inverse { -1 } else { 1 };
            match runs.last_mut() {
                Some((g, e)) if *g == l.gen => {
                    *e = self.canonical_exponent(l.gen, *e + step);
                    if *e == 0 {
                        runs.pop();
                    }
                }
                _ => {
                    let e = self.canonical_exponent(l.gen, step);
                    if e != 0 {
                        runs.push((l.gen, e));
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(word.len());
        for (g, e) in runs {
            let letter = GenLetter { gen: g, inverse: e < 0 };
            out.extend(std::iter::repeat_n(letter, e.unsigned_abs() as usize));
        }
        out
    }

    fn canonical_exponent(&self, gen: u16, e: i64) -> i64 {
        match self.orders[gen as usize] {
            Some(k) => {
                let k = k as i64;
                let r = e.rem_euclid(k);
                if 2 * r > k {
                    r - k
                } else {
                    r
                }
            }
            None => e,
        }
    }

    fn rewrite_once(&self, word: &[GenLetter]) -> Option<Vec<GenLetter>> {
        for rule in &self.rewrites {
            let n = rule.lhs.len();
            if n > word.len() {
                continue;
            }
            if let Some(pos) = word.windows(n).position(|w| w == rule.lhs.as_slice()) {
                let mut out = Vec::with_capacity(word.len());
                out.extend_from_slice(&word[..pos]);
                out.extend_from_slice(&rule.rhs);
                out.extend_from_slice(&word[pos + n..]);
                return Some(out);
            }
        }
        None
    }

    /// Parses a word such as `"a b a d"`, `"abad"`, `"(a d)^4"`, `"b^-1"` or `"[a,b]"`.
    /// `e` and `1` denote the identity.
    pub fn parse_word(&self, text: &str) -> Result<Vec<GenLetter>> {
        let names: Vec<&str> = self.generators.iter().map(|g| g.name.as_str()).collect();
        parse_word_with(&names, text)
    }

    pub fn format_word(&self, word: &[GenLetter]) -> String {
        format_word_with(&self.generators, word)
    }

    /// The group-definition text, in the format accepted by [`parse_group`].
    pub fn to_text(&self) -> String {
        let mut out = format!("alphabet {}\n", self.arity);
        for g in &self.generators {
            let sections: Vec<String> = g.sections.iter().map(|w| self.format_word(w)).collect();
            out.push_str(&format!("gen {} = {}[{}]\n", g.name, g.perm, sections.join(", ")));
        }
        for r in &self.rewrites {
            out.push_str(&format!(
                "rewrite {} -> {}\n",
                self.format_word(&r.lhs),
                self.format_word(&r.rhs)
            ));
        }
        for (name, value) in [
            ("self_replicating", self.flags.self_replicating),
            ("sip", self.flags.sip),
            ("branch_kernel_trivial", self.flags.branch_kernel_trivial),
        ] {
            out.push_str(&format!("flag {name} = {value}\n"));
        }
        for w in &self.branching {
            out.push_str(&format!("branching {}\n", self.format_word(w)));
        }
        out
    }
}

impl fmt::Display for SelfSimilarGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn format_word_with(gens: &[Generator], word: &[GenLetter]) -> String {
    if word.is_empty() {
        return "e".to_string();
    }
    let parts: Vec<String> = word
        .iter()
        .map(|l| {
            let name = &gens[l.gen as usize].name;
            if l.inverse {
                format!("{name}^-1")
            } else {
                name.clone()
            }
        })
        .collect();
    parts.join(" ")
}

pub(crate) fn parse_word_with(names: &[&str], text: &str) -> Result<Vec<GenLetter>> {
    let chars: Vec<char> = text.chars().collect();
    let mut parser = WordParser {
        names,
        chars: &chars,
        pos: 0,
        text,
    };
    let word = parser.expr()?;
    parser.skip_ws();
    if parser.pos != chars.len() {
        return Err(parser.fail());
    }
    Ok(word)
}

struct WordParser<'a> {
    names: &'a [&'a str],
    chars: &'a [char],
    pos: usize,
    text: &'a str,
}

impl WordParser<'_> {
    fn fail(&self) -> Error {
        // Prefer naming the unknown generator when that is the problem.
        let rest: String = self.chars[self.pos.min(self.chars.len())..].iter().collect();
        let token: String = rest
            .trim_start()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if !token.is_empty() && token.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            Error::UnknownGenerator(token)
        } else {
            Error::BadWord(self.text.to_string())
        }
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

    fn expr(&mut self) -> Result<Vec<GenLetter>> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            if c == ')' || c == ']' || c == ',' {
                break;
            }
            let item = self.item()?;
            out.extend(item);
        }
        Ok(out)
    }

    fn item(&mut self) -> Result<Vec<GenLetter>> {
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
            let exp: i64 = exp.parse().map_err(|_| Error::BadWord(self.text.to_string()))?;
            let unit = if exp < 0 { invert_word(&base) } else { base };
            let mut out = Vec::with_capacity(unit.len() * exp.unsigned_abs() as usize);
            for _ in 0..exp.unsigned_abs() {
                out.extend_from_slice(&unit);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Vec<GenLetter>> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(Error::BadWord(self.text.to_string()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('[') => {
                self.pos += 1;
                let x = self.expr()?;
                if self.peek() != Some(',') {
                    return Err(Error::BadWord(self.text.to_string()));
                }
                self.pos += 1;
                let y = self.expr()?;
                if self.peek() != Some(']') {
                    return Err(Error::BadWord(self.text.to_string()));
                }
                self.pos += 1;
                let mut out = x.clone();
                out.extend_from_slice(&y);
                out.extend(invert_word(&x));
                out.extend(invert_word(&y));
                Ok(out)
            }
            Some(_) => {
                let rest = &self.chars[self.pos..];
                let best = self
                    .names
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| {
                        let n: Vec<char> = n.chars().collect();
                        rest.starts_with(&n)
                    })
                    .max_by_key(|(_, n)| n.len());
                if let Some((i, n)) = best {
                    self.pos += n.chars().count();
                    return Ok(vec![GenLetter::new(i)]);
                }
                if rest[0] == 'e' || rest[0] == '1' {
                    self.pos += 1;
                    return Ok(Vec::new());
                }
                Err(self.fail())
            }
            None => Err(Error::BadWord(self.text.to_string())),
        }
    }
}

/// Parses a group definition in the line-based text format.
pub fn parse_group(text: &str) -> Result<SelfSimilarGroup> {
    let parse_err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let (first_no, first) = *lines.first().ok_or_else(|| parse_err(1, "empty definition"))?;
    let arity: usize = first
        .strip_prefix("alphabet")
        .ok_or_else(|| parse_err(first_no, "expected `alphabet <d>`"))?
        .trim()
        .parse()
        .map_err(|_| parse_err(first_no, "bad alphabet size"))?;
    check_arity(arity)?;

    // First pass: generator names, so sections may refer to later generators.
    let mut names: Vec<String> = Vec::new();
    for &(no, line) in &lines[1..] {
        if let Some(rest) = line.strip_prefix("gen ") {
            let name = rest.split('=').next().unwrap_or("").trim();
            if !valid_name(name) || name == "e" {
                return Err(parse_err(no, &format!("bad generator name `{name}`")));
            }
            names.push(name.to_string());
        }
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let word = |w: &str| parse_word_with(&name_refs, w);

    let mut generators = Vec::new();
    let mut rewrites = Vec::new();
    let mut flags = Flags::default();
    let mut branching = Vec::new();
    for &(no, line) in &lines[1..] {
        if let Some(rest) = line.strip_prefix("gen ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(no, "expected `gen <name> = <perm>[...]`"))?;
            let body = body.trim();
            let open = body.find('[').ok_or_else(|| parse_err(no, "missing section list"))?;
            if !body.ends_with(']') {
                return Err(parse_err(no, "missing `]`"));
            }
            let perm = Perm::parse_cycles(arity, &body[..open])?;
            let sections = body[open + 1..body.len() - 1]
                .split(',')
                .map(|s| word(s.trim()))
                .collect::<Result<Vec<_>>>()?;
            if sections.len() != arity {
                return Err(parse_err(no, &format!("expected {arity} sections")));
            }
            generators.push(Generator {
                name: name.trim().to_string(),
                perm,
                sections,
            });
        } else if let Some(rest) = line.strip_prefix("rewrite ") {
            let (lhs, rhs) = rest
                .split_once("->")
                .ok_or_else(|| parse_err(no, "expected `rewrite <lhs> -> <rhs>`"))?;
            rewrites.push(RewriteRule {
                lhs: word(lhs)?,
                rhs: word(rhs)?,
            });
        } else if let Some(rest) = line.strip_prefix("flag ") {
            let (name, value) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(no, "expected `flag <name> = true|false`"))?;
            let value = match value.trim() {
                "true" => true,
                "false" => false,
                _ => return Err(parse_err(no, "flag value must be true or false")),
            };
            match name.trim() {
                "self_replicating" => flags.self_replicating = value,
                "sip" => flags.sip = value,
                "branch_kernel_trivial" => flags.branch_kernel_trivial = value,
                other => return Err(parse_err(no, &format!("unknown flag `{other}`"))),
            }
        } else if let Some(rest) = line.strip_prefix("branching ") {
            branching.push(word(rest)?);
        } else {
            return Err(parse_err(no, &format!("unrecognised line `{line}`")));
        }
    }
    SelfSimilarGroup::new(arity, generators, rewrites, flags, branching)
}

pub const GRIGORCHUK_TEXT: &str = "\
alphabet 2
gen a = (0 1)[e, e]
gen b = ()[a, c]
gen c = ()[a, d]
gen d = ()[e, b]
rewrite a a -> e
rewrite b b -> e
rewrite c c -> e
rewrite d d -> e
rewrite b c -> d
rewrite c b -> d
rewrite c d -> b
rewrite d c -> b
rewrite b d -> c
rewrite d b -> c
flag self_replicating = true
flag sip = true
flag branch_kernel_trivial = true
branching a b a b
branching b a d a b a d a
branching a b a d a b a d
";

/// The first Grigorchuk group `⟨a, b, c, d⟩` on the binary tree.
///
/// The declared branching subgroup is `K = ⟨[a,b]⟩^G`, generated as a subgroup by
/// `(ab)²`, `(bada)²` and `(abad)²`.
pub fn grigorchuk() -> SelfSimilarGroup {
    parse_group(GRIGORCHUK_TEXT).expect("preset parses")
}

/// Defining vector of a GGS group: `b = (a^{e_0}, …, a^{e_{d-2}}, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GgsSpec {
    arity: usize,
    exponents: Vec<u32>,
}

impl GgsSpec {
    pub fn new(arity: usize, exponents: &[i64]) -> Result<GgsSpec> {
        check_arity(arity)?;
        if exponents.len() != arity - 1 {
            return Err(Error::Invalid(format!(
                "GGS vector for d = {arity} needs {} entries",
                arity - 1
            )));
        }
        Ok(GgsSpec {
            arity,
            exponents: exponents.iter().map(|&e| e.rem_euclid(arity as i64) as u32).collect(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// `e_i = e_{d-2-i}` for all `i`.
    pub fn is_symmetric(&self) -> bool {
        let n = self.exponents.len();
        (0..n).all(|i| self.exponents[i] == self.exponents[n - 1 - i])
    }

    pub fn is_constant(&self) -> bool {
        self.exponents.windows(2).all(|w| w[0] == w[1])
    }

    /// Torsion criterion `Σ e_i ≡ 0 (mod p)`; `None` unless `d` is prime.
    pub fn torsion(&self) -> Option<bool> {
        if !is_prime(self.arity) {
            return None;
        }
        let sum: u64 = self.exponents.iter().map(|&e| e as u64).sum();
        Some(sum.is_multiple_of(self.arity as u64))
    }
}

pub(crate) fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// The GGS group `⟨a, b⟩` with `a` the cyclic shift `i ↦ i+1` and
/// `b = (a^{e_0}, …, a^{e_{d-2}}, b)`. Returns the group and the torsion flag
/// (reported only when `d` is prime).
///
/// For torsion GGS groups on a prime alphabet the SIP and trivial-branch-kernel
/// flags are set, and the branching declaration is `G′` (non-symmetric vector)
/// or `γ₃(G)` (symmetric vector), both given by normal generators.
pub fn ggs(spec: &GgsSpec) -> (SelfSimilarGroup, Option<bool>) {
    let d = spec.arity;
    let a = GenLetter::new(0);
    let b = GenLetter::new(1);
    let cycle: Vec<u32> = (0..d as u32).map(|i| (i + 1) % d as u32).collect();
    let mut b_sections: Vec<Vec<GenLetter>> = spec.exponents.iter().map(|&e| vec![a; e as usize]).collect();
    b_sections.push(vec![b]);
    let generators = vec![
        Generator {
            name: "a".into(),
            perm: Perm::from_images(cycle).expect("cyclic shift"),
            sections: vec![Vec::new(); d],
        },
        Generator {
            name: "b".into(),
            perm: Perm::identity(d),
            sections: b_sections,
        },
    ];
    // a^d = 1 by construction and b^d = 1 because b^d = (a^{d e_0}, …, b^d).
    let rewrites = vec![
        RewriteRule {
            lhs: vec![a; d],
            rhs: Vec::new(),
        },
        RewriteRule {
            lhs: vec![b; d],
            rhs: Vec::new(),
        },
    ];
    let torsion = spec.torsion();
    let sip = torsion == Some(true);
    let flags = Flags {
        self_replicating: true,
        sip,
        branch_kernel_trivial: sip,
    };
    let commutator = |x: &[GenLetter], y: &[GenLetter]| {
        let mut w = x.to_vec();
        w.extend_from_slice(y);
        w.extend(invert_word(x));
        w.extend(invert_word(y));
        w
    };
    let branching = if !sip {
        Vec::new()
    } else if spec.is_symmetric() {
        let ab = commutator(&[a], &[b]);
        vec![commutator(&ab, &[a]), commutator(&ab, &[b])]
    } else {
        // Schreier generators of G′ for the transversal {a^i b^j}: G/G′ = ⟨a⟩ × ⟨b⟩.
        let mut out = Vec::new();
        for i in 0..d {
            for j in 1..d {
                let mut w = vec![a; i];
                w.extend(std::iter::repeat_n(b, j));
                w.push(a);
                w.extend(std::iter::repeat_n(b.inv(), j));
                w.extend(std::iter::repeat_n(a.inv(), i + 1));
                out.push(w);
            }
        }
        out
    };
    let group = SelfSimilarGroup::new(d, generators, rewrites, flags, branching).expect("GGS preset is well formed");
    (group, torsion)
}

/// A group resolved from a preset name (`grigorchuk`, `ggs:3:1,2`) or definition text.
pub fn preset(name: &str) -> Result<Arc<SelfSimilarGroup>> {
    let name = name.trim();
    if name.eq_ignore_ascii_case("grigorchuk") {
        return Ok(Arc::new(grigorchuk()));
    }
    if let Some(rest) = name.strip_prefix("ggs:") {
        let (d, e) = rest
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("expected ggs:<d>:<e0,e1,..>, got `{name}`")))?;
        let d: usize = d
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad GGS alphabet `{d}`")))?;
        let e: Vec<i64> = e
            .split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Invalid(format!("bad GGS vector `{e}`")))?;
        return Ok(Arc::new(ggs(&GgsSpec::new(d, &e)?).0));
    }
    Err(Error::Invalid(format!("unknown preset `{name}`")))
}
