//! The finite permutation group induced on the first `n` levels of the tree.
//!
//! Points are the vertices of lengths `1..=n`, numbered level by level and
//! lexicographically within a level. The leaves `X^n` determine the action,
//! the inner vertices make stabilizers of shallow vertices point stabilizers.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use petgraph::unionfind::UnionFind;

use crate::automorphism::TreeAutomorphism;
use crate::error::{Error, Result};
use crate::group_defs::SelfSimilarGroup;
use crate::perm::Perm;
use crate::schreier_sims::StabChain;
use crate::slp::{Elt, Slp};
use crate::words::{VertexSet, Word};

pub const DEFAULT_POINT_CAP: usize = 4096;

struct Inner {
    group: Arc<SelfSimilarGroup>,
    level: usize,
    /// `offsets[k]` is the first point of level `k`, for `k = 1..=level+1`.
    offsets: Vec<usize>,
    generators: Vec<Elt>,
    whole: OnceLock<StabChain>,
}

/// `G_n`, the image of `G` in the symmetric group on `X^{≤n}`. Cheap to clone.
#[derive(Clone)]
pub struct LevelQuotient(Arc<Inner>);

impl LevelQuotient {
    pub fn build(group: &Arc<SelfSimilarGroup>, n: usize) -> Result<LevelQuotient> {
        LevelQuotient::build_with_cap(group, n, DEFAULT_POINT_CAP)
    }

    pub fn build_with_cap(group: &Arc<SelfSimilarGroup>, n: usize, cap: usize) -> Result<LevelQuotient> {
        if n == 0 {
            return Err(Error::Invalid("quotient level must be at least 1".into()));
        }
        let d = group.arity();
        let leaves = d.checked_pow(n as u32).unwrap_or(usize::MAX);
        if leaves > cap {
            return Err(Error::QuotientTooLarge {
                level: n,
                points: leaves,
                cap,
            });
        }
        let mut offsets = vec![0, 0];
        for k in 1..=n {
            offsets.push(offsets[k] + d.pow(k as u32));
        }
        let mut q = LevelQuotient(Arc::new(Inner {
            group: group.clone(),
            level: n,
            offsets,
            generators: Vec::new(),
            whole: OnceLock::new(),
        }));
        let generators = (0..group.generators().len())
            .map(|i| {
                let g = TreeAutomorphism::generator(group, i);
                Elt::new(q.perm_of(&g), Slp::leaf(g))
            })
            .collect();
        Arc::get_mut(&mut q.0).expect("unshared").generators = generators;
        Ok(q)
    }

    pub fn group(&self) -> &Arc<SelfSimilarGroup> {
        &self.0.group
    }

    pub fn level(&self) -> usize {
        self.0.level
    }

    pub fn arity(&self) -> usize {
        self.0.group.arity()
    }

    /// Number of points (all vertices of lengths `1..=n`).
    pub fn degree(&self) -> usize {
        self.0.offsets[self.0.level + 1]
    }

    /// Point indices of the vertices of length `k`.
    pub fn level_range(&self, k: usize) -> Range<usize> {
        assert!(
            (1..=self.level()).contains(&k),
            "level {k} outside 1..={}",
            self.level()
        );
        self.0.offsets[k]..self.0.offsets[k + 1]
    }

    pub fn point(&self, v: &Word) -> Result<usize> {
        if v.is_empty() {
            return Err(Error::Invalid("the root is not a point".into()));
        }
        if v.len() > self.level() {
            return Err(Error::VertexTooDeep {
                vertex: v.to_string(),
                level: self.level(),
            });
        }
        Ok(self.0.offsets[v.len()] + v.level_index())
    }

    pub fn vertex(&self, p: usize) -> Word {
        let k = (1..=self.level())
            .find(|&k| p < self.0.offsets[k + 1])
            .expect("point in range");
        Word::from_level_index(self.arity(), k, p - self.0.offsets[k])
    }

    /// Points strictly below `v`, down to the leaves.
    pub fn points_below(&self, v: &Word) -> Vec<usize> {
        let d = self.arity();
        let mut out = Vec::new();
        let base = v.level_index();
        for k in v.len() + 1..=self.level() {
            let width = d.pow((k - v.len()) as u32);
            let start = self.0.offsets[k] + base * width;
            out.extend(start..start + width);
        }
        out
    }

    /// The permutation induced by `g` on the points.
    pub fn perm_of(&self, g: &TreeAutomorphism) -> Perm {
        let n = self.level();
        let d = self.arity();
        let leaves: Vec<u32> = (0..d.pow(n as u32))
            .map(|i| g.act(&Word::from_level_index(d, n, i)).level_index() as u32)
            .collect();
        self.perm_from_leaves(&leaves)
    }

    /// Extends a permutation of the leaves (by level index) that preserves the
    /// tree structure to all points.
    pub fn perm_from_leaves(&self, leaf_images: &[u32]) -> Perm {
        let n = self.level();
        let d = self.arity();
        let mut images = vec![0u32; self.degree()];
        let leaves = self.level_range(n);
        for (i, &img) in leaf_images.iter().enumerate() {
            images[leaves.start + i] = leaves.start as u32 + img;
        }
        // A vertex goes where the prefixes of its leaves go.
        for k in (1..n).rev() {
            let r = self.level_range(k);
            let below = self.level_range(k + 1);
            for (i, p) in r.clone().enumerate() {
                let child = below.start + i * d;
                let img_child = images[child] as usize - below.start;
                images[p] = (r.start + img_child / d) as u32;
            }
        }
        Perm::from_images_unchecked(images)
    }

    pub fn generator_elts(&self) -> &[Elt] {
        &self.0.generators
    }

    /// The whole quotient as a subgroup image.
    pub fn whole(&self) -> SubgroupImage {
        let chain = self
            .0
            .whole
            .get_or_init(|| StabChain::new(self.degree(), &[], &self.0.generators))
            .clone();
        SubgroupImage {
            quotient: self.clone(),
            gens: self.0.generators.clone(),
            chain,
        }
    }

    pub fn order(&self) -> BigUint {
        self.whole().order()
    }

    /// The image of the subgroup generated by `elements`.
    pub fn image_of(&self, elements: &[TreeAutomorphism]) -> SubgroupImage {
        let gens = elements
            .iter()
            .map(|g| Elt::new(self.perm_of(g), Slp::leaf(g.clone())))
            .collect();
        SubgroupImage::new(self, gens)
    }

    /// Restriction of a permutation of this quotient to level `m ≤ n`.
    pub fn restrict(&self, p: &Perm, target: &LevelQuotient) -> Perm {
        assert!(target.level() <= self.level());
        Perm::from_images_unchecked(p.images()[..target.degree()].to_vec())
    }

    /// The section at `v` of a permutation fixing `v`, on a quotient of level
    /// at most `n - |v|`.
    pub fn section_perm(&self, p: &Perm, v: &Word, target: &LevelQuotient) -> Result<Perm> {
        if target.level() + v.len() > self.level() {
            return Err(Error::VertexTooDeep {
                vertex: v.to_string(),
                level: self.level() - target.level(),
            });
        }
        if !v.is_empty() {
            let pv = self.point(v)?;
            if p.apply(pv) != pv {
                return Err(Error::Invalid(format!("permutation moves {v}")));
            }
        }
        let d = self.arity();
        let mut images = vec![0u32; target.degree()];
        for k in 1..=target.level() {
            let width = d.pow(k as u32);
            let src = self.0.offsets[v.len() + k] + v.level_index() * width;
            let dst = target.0.offsets[k];
            for i in 0..width {
                images[dst + i] = (dst + p.apply(src + i) - src) as u32;
            }
        }
        Ok(Perm::from_images_unchecked(images))
    }

    /// Whether `partition` of `X^k` (given by local indices) is `{uX^{k-m}}` for some `m`.
    pub fn is_level_partition(&self, k: usize, partition: &[Vec<usize>]) -> bool {
        let d = self.arity();
        let size = partition[0].len();
        let total = d.pow(k as u32);
        let mut s = 1;
        while s < size {
            s *= d;
        }
        if s != size || partition.len() * size != total {
            return false;
        }
        partition.iter().all(|block| {
            let start = block[0] - block[0] % size;
            block.len() == size && block.iter().enumerate().all(|(i, &x)| x == start + i)
        })
    }
}

impl fmt::Debug for LevelQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelQuotient(level {}, {} points)", self.level(), self.degree())
    }
}

/// A subgroup of a level quotient, given by generators that remember preimages.
#[derive(Clone, Debug)]
pub struct SubgroupImage {
    quotient: LevelQuotient,
    gens: Vec<Elt>,
    chain: StabChain,
}

impl SubgroupImage {
    pub fn new(quotient: &LevelQuotient, gens: Vec<Elt>) -> SubgroupImage {
        let chain = StabChain::new(quotient.degree(), &[], &gens);
        SubgroupImage {
            quotient: quotient.clone(),
            gens,
            chain,
        }
    }

    pub fn trivial(quotient: &LevelQuotient) -> SubgroupImage {
        SubgroupImage::new(quotient, Vec::new())
    }

    pub fn quotient(&self) -> &LevelQuotient {
        &self.quotient
    }

    pub fn generators(&self) -> &[Elt] {
        &self.gens
    }

    pub fn chain(&self) -> &StabChain {
        &self.chain
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.chain.is_trivial()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.chain.contains(p)
    }

    pub fn is_subgroup_of(&self, other: &SubgroupImage) -> bool {
        self.gens.iter().all(|g| other.contains(&g.perm))
    }

    pub fn same_as(&self, other: &SubgroupImage) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    /// `[other : self]`, when `self ≤ other`.
    pub fn index_in(&self, other: &SubgroupImage) -> Option<BigUint> {
        self.is_subgroup_of(other).then(|| other.order() / self.order())
    }

    /// Preimages of the generators.
    pub fn lifted_generators(&self) -> Result<Vec<TreeAutomorphism>> {
        self.gens.iter().map(|g| g.lift(self.quotient.group())).collect()
    }

    /// Orbits on the points of level `k`, as sorted lists of local indices.
    pub fn orbits(&self, k: usize) -> Vec<Vec<usize>> {
        let r = self.quotient.level_range(k);
        let n = r.len();
        let mut uf = UnionFind::<usize>::new(n);
        for g in &self.gens {
            for i in 0..n {
                uf.union(i, g.perm.apply(r.start + i) - r.start);
            }
        }
        group_labels(&uf.into_labeling())
    }

    pub fn is_transitive(&self, k: usize) -> bool {
        self.orbits(k).len() == 1
    }

    /// The finest invariant partition of level `k` joining each given pair
    /// (local indices).
    pub fn congruence_closure(&self, k: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let r = self.quotient.level_range(k);
        let n = r.len();
        let mut uf = UnionFind::<usize>::new(n);
        let mut queue: Vec<(usize, usize)> = Vec::new();
        for &(a, b) in pairs {
            if uf.union(a, b) {
                queue.push((a, b));
            }
        }
        let local: Vec<Vec<usize>> = self
            .gens
            .iter()
            .map(|g| (0..n).map(|i| g.perm.apply(r.start + i) - r.start).collect())
            .collect();
        while let Some((a, b)) = queue.pop() {
            for g in &local {
                let (x, y) = (g[a], g[b]);
                if uf.union(x, y) {
                    queue.push((x, y));
                }
            }
        }
        group_labels(&uf.into_labeling())
    }

    /// The finest invariant partition of `X^k` with `α` and `β` in one part.
    pub fn minimal_congruence(&self, alpha: &Word, beta: &Word) -> Result<Vec<Vec<Word>>> {
        if alpha == beta {
            return Err(Error::EqualPoints);
        }
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(Error::Invalid("points must be on one nonzero level".into()));
        }
        let k = alpha.len();
        self.quotient.point(alpha)?;
        let blocks = self.congruence_closure(k, &[(alpha.level_index(), beta.level_index())]);
        let d = self.quotient.arity();
        Ok(blocks
            .into_iter()
            .map(|b| b.into_iter().map(|i| Word::from_level_index(d, k, i)).collect())
            .collect())
    }

    /// Pointwise stabilizer of the given points (a finite-quotient computation).
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> SubgroupImage {
        let chain = StabChain::new(self.quotient.degree(), points, &self.gens);
        let mut distinct = Vec::new();
        for &p in points {
            if !distinct.contains(&p) {
                distinct.push(p);
            }
        }
        let gens = chain.level_generators(distinct.len()).to_vec();
        SubgroupImage::new(&self.quotient, gens)
    }

    /// `St(V)` with Schreier generators over the orbit of the tuple `V`.
    ///
    /// The action on vertices of length at most `n` factors through this
    /// quotient, so when the generators' preimages generate a group `H`, the
    /// lifted Schreier generators generate `St_H(V)` exactly.
    pub fn stabilizer_subgroup(&self, vertices: &VertexSet) -> Result<SubgroupImage> {
        let pts: Vec<usize> = vertices.iter().map(|v| self.quotient.point(v)).collect::<Result<_>>()?;
        let gens: Vec<Elt> = self
            .gens
            .iter()
            .filter(|g| !g.is_identity() || !g.slp.is_identity())
            .cloned()
            .collect();
        let degree = self.quotient.degree();
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let start: Vec<u32> = pts.iter().map(|&p| p as u32).collect();
        let mut states = vec![start.clone()];
        let mut reps = vec![Elt::identity(degree)];
        let mut tree_edge: Vec<Option<(usize, usize)>> = vec![None];
        index.insert(start, 0);
        let mut k = 0;
        while k < states.len() {
            for (gi, g) in gens.iter().enumerate() {
                let img: Vec<u32> = states[k].iter().map(|&p| g.perm.apply(p as usize) as u32).collect();
                if !index.contains_key(&img) {
                    index.insert(img.clone(), states.len());
                    reps.push(g.mul(&reps[k]));
                    states.push(img);
                    tree_edge.push(Some((k, gi)));
                }
            }
            k += 1;
        }
        let group = self.quotient.group();
        let mut out = Vec::new();
        for (s, u) in reps.iter().enumerate() {
            for (gi, g) in gens.iter().enumerate() {
                let img: Vec<u32> = states[s].iter().map(|&p| g.perm.apply(p as usize) as u32).collect();
                let t = index[&img];
                if tree_edge[t] == Some((s, gi)) {
                    continue;
                }
                let sg = reps[t].inv().mul(&g.mul(u));
                if sg.slp.is_liftable() {
                    if let Ok(lift) = sg.lift(group) {
                        if lift.is_identity_form() {
                            continue;
                        }
                        out.push(Elt::new(sg.perm, Slp::leaf(lift)));
                        continue;
                    }
                }
                out.push(sg);
            }
        }
        Ok(SubgroupImage::new(&self.quotient, out))
    }

    /// Elements fixing every leaf outside `vX*`.
    pub fn rist(&self, v: &Word) -> Result<SubgroupImage> {
        let mut set = VertexSet::new();
        set.insert(v.clone());
        self.srist(&set)
    }

    /// Elements fixing `V` pointwise and every leaf not below `V`.
    pub fn srist(&self, vertices: &VertexSet) -> Result<SubgroupImage> {
        vertices.require_antichain()?;
        let n = self.quotient.level();
        let mut points = Vec::new();
        for v in vertices {
            if !v.is_empty() {
                points.push(self.quotient.point(v)?);
            }
        }
        if vertices.iter().any(|v| v.is_empty()) {
            return Ok(self.clone());
        }
        let d = self.quotient.arity();
        let leaves = self.quotient.level_range(n);
        for (i, p) in leaves.enumerate() {
            let w = Word::from_level_index(d, n, i);
            if !vertices.covers(&w) {
                points.push(p);
            }
        }
        Ok(self.pointwise_stabilizer(&points))
    }

    /// Normal closure of `seed` in this group.
    pub fn normal_closure(&self, seed: &[Elt]) -> SubgroupImage {
        let degree = self.quotient.degree();
        let mut gens: Vec<Elt> = seed.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut chain = StabChain::new(degree, &[], &gens);
        let conj: Vec<(Elt, Elt)> = self
            .gens
            .iter()
            .filter(|s| !s.is_identity())
            .map(|s| (s.clone(), s.inv()))
            .collect();
        let mut k = 0;
        while k < gens.len() {
            for (s, s_inv) in &conj {
                let c = s.mul(&gens[k]).mul(s_inv);
                if !chain.contains(&c.perm) {
                    let mut strong = chain.strong_generators().to_vec();
                    strong.push(c.clone());
                    chain = StabChain::new(degree, chain.base(), &strong);
                    gens.push(c);
                }
            }
            k += 1;
        }
        SubgroupImage {
            quotient: self.quotient.clone(),
            gens,
            chain,
        }
    }

    /// Normal closure in this group of the commutators `[a, s]`, `a ∈ other`,
    /// `s` a generator.
    fn commutators_with(&self, other: &[Elt]) -> SubgroupImage {
        let mut seeds = Vec::new();
        for a in other {
            for s in &self.gens {
                let c = a.mul(s).mul(&a.inv()).mul(&s.inv());
                if !c.is_identity() {
                    seeds.push(c);
                }
            }
        }
        self.normal_closure(&seeds)
    }

    pub fn derived_subgroup(&self) -> SubgroupImage {
        self.commutators_with(&self.gens)
    }

    /// `γ_k` of this group: `γ_1` is the group, `γ_{k+1} = [γ_k, G]`.
    pub fn lower_central_term(&self, k: usize) -> SubgroupImage {
        let mut term = self.clone();
        for _ in 1..k.max(1) {
            term = self.commutators_with(&term.gens);
        }
        term
    }

    /// Image in a lower-level quotient.
    pub fn restrict(&self, target: &LevelQuotient) -> SubgroupImage {
        let gens = self
            .gens
            .iter()
            .map(|g| Elt::new(self.quotient.restrict(&g.perm, target), g.slp.clone()))
            .collect();
        SubgroupImage::new(target, gens)
    }

    /// The sections at `v` of the generators (all of which must fix `v`), on a
    /// quotient of level at most `n - |v|`.
    pub fn section_image(&self, v: &Word, target: &LevelQuotient) -> Result<SubgroupImage> {
        let gens = self
            .gens
            .iter()
            .map(|g| Ok(Elt::new(self.quotient.section_perm(&g.perm, v, target)?, Slp::opaque())))
            .collect::<Result<_>>()?;
        Ok(SubgroupImage::new(target, gens))
    }
}

fn group_labels(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut by_root: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let slot = *by_root.entry(l).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[slot].push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_defs::{grigorchuk, parse_group};

    fn grig() -> Arc<SelfSimilarGroup> {
        Arc::new(grigorchuk())
    }

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    #[test]
    fn small_orders() {
        let g = grig();
        assert_eq!(LevelQuotient::build(&g, 1).unwrap().order(), BigUint::from(2u32));
        assert_eq!(LevelQuotient::build(&g, 2).unwrap().order(), BigUint::from(8u32));
        let trivial = Arc::new(parse_group("alphabet 2\ngen s = ()[e, e]\n").unwrap());
        assert_eq!(LevelQuotient::build(&trivial, 3).unwrap().order(), BigUint::from(1u32));
    }

    #[test]
    fn point_cap() {
        let g = grig();
        assert!(matches!(
            LevelQuotient::build(&g, 13),
            Err(Error::QuotientTooLarge { .. })
        ));
    }

    #[test]
    fn point_numbering() {
        let q = LevelQuotient::build(&grig(), 3).unwrap();
        assert_eq!(q.degree(), 14);
        for p in 0..q.degree() {
            assert_eq!(q.point(&q.vertex(p)).unwrap(), p);
        }
        assert_eq!(q.points_below(&w("1")), vec![4, 5, 10, 11, 12, 13]);
    }

    #[test]
    fn stabilizers() {
        let g = grig();
        let q1 = LevelQuotient::build(&g, 1).unwrap();
        let st = q1
            .whole()
            .stabilizer_subgroup(&VertexSet::parse(2, "{0}").unwrap())
            .unwrap();
        assert!(st.is_trivial());
        let q2 = LevelQuotient::build(&g, 2).unwrap();
        let whole = q2.whole();
        let st = whole
            .stabilizer_subgroup(&VertexSet::parse(2, "{00}").unwrap())
            .unwrap();
        assert_eq!(st.index_in(&whole), Some(BigUint::from(4u32)));
        let st = whole.stabilizer_subgroup(&VertexSet::new()).unwrap();
        assert!(st.same_as(&whole));
        // Schreier generators of St_G(X) lift to {b, c, d, aba, aca, ada}.
        let st = whole.stabilizer_subgroup(&VertexSet::parse(2, "{0}").unwrap()).unwrap();
        let mut words: Vec<String> = st.lifted_generators().unwrap().iter().map(|t| t.to_string()).collect();
        words.sort();
        assert_eq!(words, vec!["a b a", "a c a", "a d a", "b", "c", "d"]);
    }

    #[test]
    fn rigid_stabilizers() {
        let q2 = LevelQuotient::build(&grig(), 2).unwrap();
        let whole = q2.whole();
        assert!(whole.rist(&Word::empty(2)).unwrap().same_as(&whole));
        assert_eq!(whole.rist(&w("0")).unwrap().order(), BigUint::from(2u32));
        let s = whole.srist(&VertexSet::parse(2, "{0, 1}").unwrap()).unwrap();
        assert_eq!(s.order(), BigUint::from(4u32));
    }

    #[test]
    fn congruences() {
        let q2 = LevelQuotient::build(&grig(), 2).unwrap();
        let whole = q2.whole();
        let p = whole.minimal_congruence(&w("00"), &w("01")).unwrap();
        assert_eq!(p, vec![vec![w("00"), w("01")], vec![w("10"), w("11")]]);
        let p = whole.minimal_congruence(&w("00"), &w("10")).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(whole.minimal_congruence(&w("00"), &w("00")), Err(Error::EqualPoints));
        let trivial = SubgroupImage::trivial(&q2);
        let p = trivial.minimal_congruence(&w("00"), &w("11")).unwrap();
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn normal_closure_and_commutators() {
        let q3 = LevelQuotient::build(&grig(), 3).unwrap();
        let whole = q3.whole();
        assert!(whole.normal_closure(&[]).is_trivial());
        let derived = whole.derived_subgroup();
        assert!(derived.is_subgroup_of(&whole));
        // G/G' is elementary abelian of order 8.
        assert_eq!(derived.index_in(&whole), Some(BigUint::from(8u32)));
        let ab = whole.gens[0].mul(&whole.gens[1]);
        let c = ab.mul(&ab);
        let k = whole.normal_closure(&[c]);
        assert_eq!(k.index_in(&whole), Some(BigUint::from(16u32)));
        // Abelian quotient: level 1.
        let q1 = LevelQuotient::build(&grig(), 1).unwrap();
        assert!(q1.whole().derived_subgroup().is_trivial());
    }

    #[test]
    fn sections_and_restriction() {
        let g = grig();
        let q3 = LevelQuotient::build(&g, 3).unwrap();
        let q2 = LevelQuotient::build(&g, 2).unwrap();
        let b = TreeAutomorphism::parse(&g, "b").unwrap();
        let c = TreeAutomorphism::parse(&g, "c").unwrap();
        let s = q3.section_perm(&q3.perm_of(&b), &w("1"), &q2).unwrap();
        assert_eq!(s, q2.perm_of(&c));
        assert_eq!(q3.restrict(&q3.perm_of(&b), &q2), q2.perm_of(&b));
        let a = TreeAutomorphism::parse(&g, "a").unwrap();
        assert!(q3.section_perm(&q3.perm_of(&a), &w("1"), &q2).is_err());
    }

    #[test]
    fn level_partitions() {
        let q = LevelQuotient::build(&grig(), 2).unwrap();
        assert!(q.is_level_partition(2, &[vec![0, 1], vec![2, 3]]));
        assert!(q.is_level_partition(2, &[vec![0], vec![1], vec![2], vec![3]]));
        assert!(!q.is_level_partition(2, &[vec![0, 2], vec![1, 3]]));
        assert!(!q.is_level_partition(2, &[vec![0, 1], vec![2], vec![3]]));
    }
}
