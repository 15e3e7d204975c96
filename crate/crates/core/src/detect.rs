//! Detection of a block structure for a finitely generated subgroup `H ≤ G`:
//! a supporting set, the dependence function on it, and the resulting parts.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::{EqBudget, TreeAutomorphism};
use crate::blocks::{srist_membership, BlockStructure};
use crate::error::{Error, Result};
use crate::group_defs::SelfSimilarGroup;
use crate::level_quotient::{LevelQuotient, SubgroupImage, DEFAULT_POINT_CAP};
use crate::perm::Perm;
use crate::schreier_sims::StabChain;
use crate::slp::{Elt, Slp};
use crate::structure::{declared_branching, k_image, KGeneration, DESK_SCALE};
use crate::verdict::{Status, Verdict};
use crate::words::{VertexSet, Word};

/// Depth below the transversal used by the regular-block test.
const REGULAR_LEVELS: usize = 3;

/// Pool elements kept per support set.
const REPS: usize = 4;

#[derive(Clone, Debug)]
pub struct DetectBudget {
    /// Deepest vertex examined while refining the supporting set.
    pub depth: usize,
    /// Quotient level used to compare section groups with `G`.
    pub levels: usize,
    /// Longest product (in stabilizer generators) formed by the commutator search.
    pub srist_len: usize,
    /// Largest finite section group enumerated.
    pub finite_cap: usize,
    /// Largest search pool.
    pub pool_cap: usize,
    pub eq: EqBudget,
}

impl Default for DetectBudget {
    fn default() -> Self {
        DetectBudget {
            depth: 6,
            levels: 5,
            srist_len: 12,
            finite_cap: 512,
            pool_cap: 1000,
            eq: EqBudget::default(),
        }
    }
}

/// A subgroup given by generators, with cached level images.
pub struct SubgroupHandle {
    group: Arc<SelfSimilarGroup>,
    gens: Vec<TreeAutomorphism>,
    images: Mutex<HashMap<usize, SubgroupImage>>,
}

impl SubgroupHandle {
    pub fn new(group: &Arc<SelfSimilarGroup>, gens: Vec<TreeAutomorphism>) -> Result<SubgroupHandle> {
        if gens
            .iter()
            .any(|g| !Arc::ptr_eq(g.group(), group) && **g.group() != **group)
        {
            return Err(Error::Invalid("generators belong to another group".into()));
        }
        Ok(SubgroupHandle {
            group: group.clone(),
            gens,
            images: Mutex::new(HashMap::new()),
        })
    }

    pub fn group(&self) -> &Arc<SelfSimilarGroup> {
        &self.group
    }

    pub fn generators(&self) -> &[TreeAutomorphism] {
        &self.gens
    }

    pub fn image(&self, level: usize) -> Result<SubgroupImage> {
        if let Some(img) = self.images.lock().expect("poisoned").get(&level) {
            return Ok(img.clone());
        }
        let q = LevelQuotient::build(&self.group, level)?;
        let img = q.image_of(&self.gens);
        self.images.lock().expect("poisoned").insert(level, img.clone());
        Ok(img)
    }
}

/// Generators of `φ_v(St_H(v))`.
pub fn section_subgroup(h: &SubgroupHandle, v: &Word) -> Result<Vec<TreeAutomorphism>> {
    let lifted = if v.is_empty() {
        h.gens.clone()
    } else {
        let mut set = VertexSet::new();
        set.insert(v.clone());
        h.image(v.len())?.stabilizer_subgroup(&set)?.lifted_generators()?
    };
    let mut seen = HashSet::new();
    Ok(lifted
        .iter()
        .map(|g| g.section(v))
        .filter(|s| !s.is_identity_form() && seen.insert(s.clone()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SectionClass {
    /// The section group maps onto `G_m` for every tested level.
    EqualsG {
        levels: usize,
    },
    /// The section group is finite, of the given order.
    Finite {
        order: usize,
    },
    Unknown {
        reason: String,
    },
}

/// Classifies `φ_v(St_H(v))` as `G` (in the tested quotients), finite, or undecided.
pub fn classify_section(h: &SubgroupHandle, v: &Word, budget: &DetectBudget) -> Result<SectionClass> {
    let sec = section_subgroup(h, v)?;
    if sec.is_empty() {
        return Ok(SectionClass::Finite { order: 1 });
    }
    let q = LevelQuotient::build(&h.group, budget.levels)?;
    let img = q.image_of(&sec);
    let order = img.order();
    if order == q.order() {
        return Ok(SectionClass::EqualsG { levels: budget.levels });
    }
    if order > budget.finite_cap.into() {
        return Ok(SectionClass::Unknown {
            reason: format!("image of order {order} at level {}", budget.levels),
        });
    }
    // Elements are told apart by their action a few levels deeper.
    let mut deep = budget.levels + 3;
    while deep > budget.levels && h.group.arity().pow(deep as u32) > DEFAULT_POINT_CAP {
        deep -= 1;
    }
    let fine = LevelQuotient::build(&h.group, deep)?;
    Ok(finite_closure(&fine, &sec, budget))
}

/// Enumerates `⟨gens⟩`, telling elements apart by their quotient image first
/// and by the word problem on collisions.
fn finite_closure(q: &LevelQuotient, gens: &[TreeAutomorphism], budget: &DetectBudget) -> SectionClass {
    let group = gens[0].group().clone();
    let mut elements = vec![TreeAutomorphism::identity(&group)];
    let mut buckets: HashMap<Perm, Vec<usize>> = HashMap::new();
    buckets.insert(Perm::identity(q.degree()), vec![0]);
    let mut k = 0;
    while k < elements.len() {
        for s in gens {
            let y = elements[k].compose(s);
            let p = q.perm_of(&y);
            let mut duplicate = false;
            for &j in buckets.get(&p).map_or(&[][..], |b| &b[..]) {
                match y.equals(&elements[j], &budget.eq).status {
                    Status::Proven => {
                        duplicate = true;
                        break;
                    }
                    Status::Refuted => {}
                    Status::UnknownAtBudget => {
                        return SectionClass::Unknown {
                            reason: format!("undecided equality with {}", elements[j]),
                        }
                    }
                }
            }
            if duplicate {
                continue;
            }
            if elements.len() == budget.finite_cap {
                return SectionClass::Unknown {
                    reason: format!("more than {} elements", budget.finite_cap),
                };
            }
            buckets.entry(p).or_default().push(elements.len());
            elements.push(y);
        }
        k += 1;
    }
    SectionClass::Finite { order: elements.len() }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifiedVertex {
    pub vertex: Word,
    pub class: SectionClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportReport {
    /// A transversal, each member classified.
    pub transversal: Vec<ClassifiedVertex>,
    /// Members whose section group is `G`.
    pub supporting: VertexSet,
    /// Members left undecided at the depth budget.
    pub unresolved: VertexSet,
    pub verdict: Verdict,
}

impl SupportReport {
    fn finite_orders(&self) -> Vec<Option<usize>> {
        self.transversal
            .iter()
            .map(|c| match c.class {
                SectionClass::Finite { order } => Some(order),
                _ => None,
            })
            .collect()
    }
}

/// Refines the root until every vertex has section group `G` or finite, or
/// the depth budget is reached.
pub fn find_supporting_set(h: &SubgroupHandle, budget: &DetectBudget) -> Result<SupportReport> {
    let d = h.group.arity();
    let mut transversal = Vec::new();
    let mut supporting = VertexSet::new();
    let mut unresolved = VertexSet::new();
    let mut queue = std::collections::VecDeque::from([Word::empty(d)]);
    while let Some(v) = queue.pop_front() {
        let class = classify_section(h, &v, budget)?;
        match class {
            SectionClass::EqualsG { .. } => {
                supporting.insert(v.clone());
            }
            SectionClass::Finite { .. } => {}
            SectionClass::Unknown { .. } if v.len() < budget.depth => {
                queue.extend(v.children());
                continue;
            }
            SectionClass::Unknown { .. } => {
                unresolved.insert(v.clone());
            }
        }
        transversal.push(ClassifiedVertex { vertex: v, class });
    }
    transversal.sort_by(|a, b| a.vertex.cmp(&b.vertex));
    let verdict = if unresolved.is_empty() {
        Verdict::proven(format!(
            "every vertex of the transversal has section group G (levels 1..{}) or a finite one",
            budget.levels
        ))
        .levels(1, budget.levels)
    } else {
        Verdict::unknown(format!(
            "{} vertices undecided at depth {}",
            unresolved.len(),
            budget.depth
        ))
    };
    Ok(SupportReport {
        transversal,
        supporting,
        unresolved,
        verdict,
    })
}

/// An element of `St_H(T)` with its sections at the members of `T`.
#[derive(Clone, Debug)]
struct PoolElt {
    elt: TreeAutomorphism,
    sections: Vec<TreeAutomorphism>,
    support: BTreeSet<usize>,
    len: usize,
}

/// Elements of `St_H(T)` with known supports on `T`, from the lifted
/// stabilizer generators, their conjugates, powers clearing single sections,
/// and commutators. Members fix `T` pointwise, so sections multiply directly.
struct Pool {
    t: Vec<Word>,
    /// Generators of `St_H(T)`.
    base: Vec<TreeAutomorphism>,
    elts: Vec<PoolElt>,
    seen: HashMap<BTreeSet<usize>, usize>,
}

impl Pool {
    fn build(h: &SubgroupHandle, t: Vec<Word>, finite_orders: &[Option<usize>], budget: &DetectBudget) -> Result<Pool> {
        let depth = t.iter().map(Word::len).max().unwrap_or(0);
        let base: Vec<TreeAutomorphism> = if depth == 0 {
            h.gens.clone()
        } else {
            let set: VertexSet = t.iter().cloned().collect();
            h.image(depth)?.stabilizer_subgroup(&set)?.lifted_generators()?
        };
        let exponent = finite_orders.iter().flatten().fold(1usize, |acc, &o| acc.lcm(&o));
        let mut pool = Pool {
            t,
            base: base.clone(),
            elts: Vec::new(),
            seen: HashMap::new(),
        };
        let all: BTreeSet<usize> = (0..pool.t.len()).collect();
        for x in base {
            if pool.t.iter().any(|w| x.act(w) != *w) {
                continue;
            }
            let sections: Vec<TreeAutomorphism> = pool.t.iter().map(|w| x.section(w)).collect();
            if exponent > 1 {
                let powered = sections.iter().map(|s| s.pow(exponent as i64)).collect();
                pool.offer(|| x.pow(exponent as i64), powered, 1, &all, budget);
            }
            pool.offer(|| x.clone(), sections, 1, &all, budget);
        }
        let q = LevelQuotient::build(&h.group, budget.levels)?;
        // Generators permuting T move supports around by conjugation.
        let conjugators: Vec<(TreeAutomorphism, Vec<usize>, Vec<TreeAutomorphism>)> = h
            .gens
            .iter()
            .flat_map(|g| [g.clone(), g.inverse()])
            .filter_map(|g| {
                let map: Option<Vec<usize>> = pool
                    .t
                    .iter()
                    .map(|w| {
                        let img = g.act(w);
                        pool.t.iter().position(|u| *u == img)
                    })
                    .collect();
                let sections = pool.t.iter().map(|w| g.section(w)).collect();
                map.map(|m| (g, m, sections))
            })
            .collect();
        // Commutators narrow supports: supp [g, h] ⊆ supp g ∩ supp h.
        let mut start = 0;
        loop {
            let mut i = start;
            while i < pool.elts.len() && pool.elts.len() < budget.pool_cap {
                let x = pool.elts[i].clone();
                for (c, map, cs) in &conjugators {
                    let moved: BTreeSet<usize> = x.support.iter().map(|&j| map[j]).collect();
                    if pool.seen.get(&moved).is_some_and(|&n| n >= REPS) {
                        continue;
                    }
                    let mut sections = vec![TreeAutomorphism::identity(&h.group); pool.t.len()];
                    for &j in &x.support {
                        sections[map[j]] = cs[j].conjugate(&x.sections[j]);
                    }
                    pool.push(|| c.conjugate(&x.elt), sections, moved, x.len);
                }
                for &j in &x.support {
                    let o = q.perm_of(&x.sections[j]).order() as i64;
                    if o > 1 {
                        let sections = x.sections.iter().map(|s| s.pow(o)).collect();
                        pool.offer(|| x.elt.pow(o), sections, x.len, &x.support, budget);
                    }
                }
                i += 1;
            }
            let end = pool.elts.len();
            let mut fresh = Vec::new();
            for i in 0..end {
                for j in start.max(i + 1)..end {
                    let (a, b) = (&pool.elts[i], &pool.elts[j]);
                    let len = 2 * (a.len + b.len);
                    let meet: BTreeSet<usize> = a.support.intersection(&b.support).copied().collect();
                    if len > budget.srist_len
                        || meet.is_empty()
                        || (meet.len() == 1 && pool.seen.get(&meet).is_some_and(|&c| c >= REPS))
                    {
                        continue;
                    }
                    fresh.push((i, j, len, meet));
                }
            }
            fresh.sort_by_key(|f| f.3.len());
            for (i, j, len, meet) in fresh {
                if pool.elts.len() >= budget.pool_cap {
                    break;
                }
                let (a, b) = (&pool.elts[i], &pool.elts[j]);
                let sections = a
                    .sections
                    .iter()
                    .zip(&b.sections)
                    .map(|(x, y)| x.commutator(y))
                    .collect();
                let (ea, eb) = (a.elt.clone(), b.elt.clone());
                pool.offer(|| ea.commutator(&eb), sections, len, &meet, budget);
            }
            if pool.elts.len() == end || pool.elts.len() >= budget.pool_cap {
                break;
            }
            start = end;
        }
        Ok(pool)
    }

    /// Adds an element whose sections outside `within` are trivial, after
    /// deciding the others; skipped when a decision is out of budget.
    fn offer(
        &mut self,
        elt: impl FnOnce() -> TreeAutomorphism,
        sections: Vec<TreeAutomorphism>,
        len: usize,
        within: &BTreeSet<usize>,
        budget: &DetectBudget,
    ) {
        let mut support = BTreeSet::new();
        for &i in within {
            match sections[i].is_trivial(&budget.eq).status {
                Status::Proven => {}
                Status::Refuted => {
                    support.insert(i);
                }
                Status::UnknownAtBudget => return,
            }
        }
        self.push(elt, sections, support, len);
    }

    /// Keeps at most `REPS` elements per nonempty support.
    fn push(
        &mut self,
        elt: impl FnOnce() -> TreeAutomorphism,
        sections: Vec<TreeAutomorphism>,
        support: BTreeSet<usize>,
        len: usize,
    ) {
        if support.is_empty() {
            return;
        }
        let count = self.seen.entry(support.clone()).or_default();
        if *count >= REPS {
            return;
        }
        *count += 1;
        self.elts.push(PoolElt {
            elt: elt(),
            sections,
            support,
            len,
        });
    }
}

fn to_set(t: &[Word], idx: &BTreeSet<usize>) -> VertexSet {
    idx.iter().map(|&i| t[i].clone()).collect()
}

/// Members of `Srist_H(V)` found by the commutator search, each checked exactly.
pub fn srist_search(h: &SubgroupHandle, v: &VertexSet, budget: &DetectBudget) -> Result<Vec<TreeAutomorphism>> {
    v.require_antichain()?;
    let t: Vec<Word> = v.complete_to_transversal(h.group.arity()).iter().cloned().collect();
    let inside: BTreeSet<usize> = t
        .iter()
        .enumerate()
        .filter(|(_, w)| v.contains(w))
        .map(|(i, _)| i)
        .collect();
    let pool = Pool::build(h, t, &[], budget)?;
    Ok(pool
        .elts
        .into_iter()
        .filter(|p| p.support.is_subset(&inside))
        .map(|p| p.elt)
        .filter(|x| srist_membership(x, v, &budget.eq).is_proven())
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct DependenceReport {
    pub vertex: Word,
    /// `δ(v)`: the least size of a set `V ∋ v` with `φ_v(Srist_H(V)) ≠ 1`.
    pub delta: Option<usize>,
    pub set: Option<VertexSet>,
    pub witness: Option<TreeAutomorphism>,
    pub verdict: Verdict,
}

/// The dependence function at `v ∈ F`, from a fresh search pool.
pub fn dependence_function(
    h: &SubgroupHandle,
    report: &SupportReport,
    v: &Word,
    budget: &DetectBudget,
) -> Result<DependenceReport> {
    if !report.supporting.contains(v) {
        return Err(Error::NotInSupport(v.to_string()));
    }
    let t: Vec<Word> = report.transversal.iter().map(|c| c.vertex.clone()).collect();
    let pool = Pool::build(h, t, &report.finite_orders(), budget)?;
    Ok(dependence_in(&pool, &report.supporting, v, budget))
}

/// The dependence function at `v` over an arbitrary antichain `F`, from a
/// pool over `F` completed to a transversal.
pub fn dependence_on(h: &SubgroupHandle, f: &VertexSet, v: &Word, budget: &DetectBudget) -> Result<DependenceReport> {
    f.require_antichain()?;
    if !f.contains(v) {
        return Err(Error::NotInSupport(v.to_string()));
    }
    let t: Vec<Word> = f.complete_to_transversal(h.group.arity()).iter().cloned().collect();
    let pool = Pool::build(h, t, &[], budget)?;
    Ok(dependence_in(&pool, f, v, budget))
}

/// Scans candidate sets `V ∋ v`, `V ⊆ F`, by size then lexicographically,
/// taking the first one carrying a pool element nontrivial at `v`.
fn dependence_in(pool: &Pool, f: &VertexSet, v: &Word, budget: &DetectBudget) -> DependenceReport {
    let vi = pool.t.iter().position(|w| w == v);
    let best = vi.and_then(|vi| {
        pool.elts
            .iter()
            .filter(|p| p.support.contains(&vi) && p.support.iter().all(|&i| f.contains(&pool.t[i])))
            .min_by_key(|p| {
                (
                    p.support.len(),
                    to_set(&pool.t, &p.support).iter().cloned().collect::<Vec<_>>(),
                )
            })
    });
    match best {
        None => DependenceReport {
            vertex: v.clone(),
            delta: None,
            set: None,
            witness: None,
            verdict: Verdict::unknown(format!("no element of Srist_H(V) nontrivial at {v} found")),
        },
        Some(p) => {
            let set = to_set(&pool.t, &p.support);
            let membership = srist_membership(&p.elt, &set, &budget.eq);
            let verdict = if membership.is_proven() {
                Verdict::proven(format!("witness lies in Srist_H({set}) and is nontrivial at {v}"))
                    .witness(p.elt.to_string())
                    .note("minimality is an upper bound from the search")
            } else {
                Verdict::unknown(format!("witness for {v} failed the membership replay"))
            };
            DependenceReport {
                vertex: v.clone(),
                delta: Some(set.len()),
                set: Some(set),
                witness: Some(p.elt.clone()),
                verdict,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub support: SupportReport,
    pub dependence: Vec<DependenceReport>,
    /// Recovered parts over the supporting set.
    pub structure: Option<BlockStructure>,
    /// The structure after merging sibling parts; differs from `structure`
    /// when the recovery is a descendant refinement.
    pub coarsened: Option<BlockStructure>,
    pub regular: Option<Verdict>,
    pub verdict: Verdict,
}

/// Full pipeline: supporting set, dependence sets, partition, refinement of
/// each part, and the regular-block test against the declared `K`.
pub fn block_detect(h: &SubgroupHandle, budget: &DetectBudget) -> Result<DetectionReport> {
    let assumptions = h.group.flags.assumptions();
    let support = find_supporting_set(h, budget)?;
    if !support.unresolved.is_empty() {
        let verdict = support.verdict.clone();
        return Ok(DetectionReport {
            support,
            dependence: Vec::new(),
            structure: None,
            coarsened: None,
            regular: None,
            verdict,
        });
    }
    if support.supporting.is_empty() {
        let verdict =
            Verdict::proven("every section group on the transversal is finite, so H is finite").assume(assumptions);
        return Ok(DetectionReport {
            support,
            dependence: Vec::new(),
            structure: Some(BlockStructure {
                parts: Vec::new(),
                regular_over: None,
            }),
            coarsened: None,
            regular: None,
            verdict,
        });
    }

    let t: Vec<Word> = support.transversal.iter().map(|c| c.vertex.clone()).collect();
    let pool = Pool::build(h, t, &support.finite_orders(), budget)?;
    let f = &support.supporting;
    let vertices: Vec<&Word> = f.iter().collect();
    let dependence: Vec<DependenceReport> = vertices
        .par_iter()
        .map(|v| dependence_in(&pool, f, v, budget))
        .collect();

    let unknown = |support: SupportReport, dependence: Vec<DependenceReport>, why: String| DetectionReport {
        support,
        dependence,
        structure: None,
        coarsened: None,
        regular: None,
        verdict: Verdict::unknown(why),
    };
    if let Some(d) = dependence.iter().find(|d| !d.verdict.is_proven()) {
        let why = d.verdict.to_string();
        return Ok(unknown(support, dependence, why));
    }
    // The dependence sets must partition F.
    let by_vertex: HashMap<&Word, &VertexSet> = dependence
        .iter()
        .map(|d| (&d.vertex, d.set.as_ref().expect("proven")))
        .collect();
    let mut parts: Vec<VertexSet> = Vec::new();
    for d in &dependence {
        let set = d.set.as_ref().expect("proven");
        if set.iter().any(|w| by_vertex.get(w) != Some(&set)) {
            let why = format!("dependence sets are not symmetric at {}", d.vertex);
            return Ok(unknown(support, dependence, why));
        }
        if !parts.contains(set) {
            parts.push(set.clone());
        }
    }

    let mut structure = BlockStructure::new(parts)?;

    let regular = if h.group.branching().is_empty() {
        None
    } else {
        Some(regular_test(h, &structure, &pool, budget)?)
    };
    if regular.as_ref().is_some_and(Verdict::is_proven) {
        structure.regular_over = Some("K".into());
    }
    let verdict = Verdict::proven(format!(
        "block structure with {} parts; witnesses replayed exactly, section groups checked to level {}",
        structure.parts.len(),
        budget.levels
    ))
    .levels(1, budget.levels)
    .assume(assumptions);
    Ok(DetectionReport {
        support,
        dependence,
        coarsened: Some(coarsen(&structure, h.group.arity())),
        structure: Some(structure),
        regular,
        verdict,
    })
}

/// Repeatedly replaces a family of parts by `P` when together they are
/// exactly the children of `P`, one child of each member per part. Merges
/// into the root are not made: `{ε}` supports every finite-index subgroup.
pub fn coarsen(structure: &BlockStructure, d: usize) -> BlockStructure {
    let mut parts = structure.parts.clone();
    loop {
        let mut groups: Vec<(VertexSet, Vec<usize>)> = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            if p.iter().any(Word::is_empty) {
                continue;
            }
            let parents: VertexSet = p.iter().map(|v| v.parent().expect("nonempty")).collect();
            let letter = p.iter().next().and_then(|v| v.letters().last().copied());
            if parents.len() != p.len()
                || parents.iter().any(Word::is_empty)
                || p.iter().any(|v| v.letters().last().copied() != letter)
            {
                continue;
            }
            match groups.iter_mut().find(|(k, _)| *k == parents) {
                Some((_, members)) => members.push(i),
                None => groups.push((parents, vec![i])),
            }
        }
        let Some((parents, members)) = groups.into_iter().find(|(_, m)| m.len() == d) else {
            break;
        };
        let mut next: Vec<VertexSet> = parts
            .iter()
            .enumerate()
            .filter(|(i, _)| !members.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        next.push(parents);
        next.sort_by(|a, b| a.iter().cmp(b.iter()));
        parts = next;
    }
    BlockStructure {
        parts,
        regular_over: None,
    }
}

/// For each part `P` and `u ∈ P`, checks `K_m ≤ φ_u(Srist(P))`, where the
/// rigid stabilizer is taken in the action of `St_H(T)` on the leaves at
/// depth `m` below the transversal. This truncation can only enlarge it.
fn regular_test(h: &SubgroupHandle, structure: &BlockStructure, pool: &Pool, budget: &DetectBudget) -> Result<Verdict> {
    let d = h.group.arity();
    let m = budget.levels.min(REGULAR_LEVELS);
    let q = LevelQuotient::build(&h.group, m)?;
    let k = k_image(&q, &declared_branching(&h.group), KGeneration::NormalClosure);
    let width = d.pow(m as u32);
    let leaves: Vec<Word> = Word::level(d, m).collect();
    let degree = pool.t.len() * width;
    let mut seen = HashSet::new();
    let gens: Vec<Elt> = pool
        .base
        .iter()
        .map(|x| {
            let mut images = Vec::with_capacity(degree);
            for (b, t) in pool.t.iter().enumerate() {
                let s = x.section(t);
                images.extend(leaves.iter().map(|w| (b * width + s.act(w).level_index()) as u32));
            }
            Perm::from_images_unchecked(images)
        })
        .filter(|p| !p.is_identity() && seen.insert(p.clone()))
        .map(|p| Elt::new(p, Slp::opaque()))
        .collect();
    for part in &structure.parts {
        let outside: Vec<usize> = (0..pool.t.len())
            .filter(|&b| !part.contains(&pool.t[b]))
            .flat_map(|b| b * width..(b + 1) * width)
            .collect();
        let chain = StabChain::new(degree, &outside, &gens);
        let srist = chain.level_generators(outside.len());
        for u in part {
            let b = pool.t.iter().position(|t| t == u).expect("part lies in T");
            let sections: Vec<Elt> = srist
                .iter()
                .map(|g| {
                    let local: Vec<u32> = (0..width)
                        .map(|i| (g.perm.apply(b * width + i) - b * width) as u32)
                        .collect();
                    Elt::new(q.perm_from_leaves(&local), Slp::opaque())
                })
                .collect();
            if !k.is_subgroup_of(&SubgroupImage::new(&q, sections)) {
                return Ok(Verdict::unknown(format!(
                    "sections at {u} of the rigid stabilizer do not contain K at level {m}"
                ))
                .at_vertex(u.clone()));
            }
        }
    }
    Ok(Verdict::proven(format!(
        "{DESK_SCALE}: at every support vertex the sections of the rigid stabilizer contain K"
    ))
    .levels(1, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{build_block, DiagonalSpec};
    use crate::group_defs::grigorchuk;

    fn grig() -> Arc<SelfSimilarGroup> {
        Arc::new(grigorchuk())
    }

    fn vs(s: &str) -> VertexSet {
        VertexSet::parse(2, s).unwrap()
    }

    fn handle(g: &Arc<SelfSimilarGroup>, words: &[&str]) -> SubgroupHandle {
        let gens = words.iter().map(|w| TreeAutomorphism::parse(g, w).unwrap()).collect();
        SubgroupHandle::new(g, gens).unwrap()
    }

    #[test]
    fn classification_examples() {
        let g = grig();
        let budget = DetectBudget {
            levels: 4,
            ..DetectBudget::default()
        };
        let whole = handle(&g, &["a", "b", "c", "d"]);
        let root = Word::empty(2);
        assert_eq!(
            classify_section(&whole, &root, &budget).unwrap(),
            SectionClass::EqualsG { levels: 4 }
        );
        let finite = handle(&g, &["a", "d"]);
        assert_eq!(
            classify_section(&finite, &root, &budget).unwrap(),
            SectionClass::Finite { order: 8 }
        );
        let st = handle(&g, &["b", "c", "d", "a b a", "a c a", "a d a"]);
        assert!(matches!(
            classify_section(&st, &root, &budget).unwrap(),
            SectionClass::Unknown { .. }
        ));
        let zero = Word::parse(2, "0").unwrap();
        assert_eq!(
            classify_section(&st, &zero, &budget).unwrap(),
            SectionClass::EqualsG { levels: 4 }
        );
    }

    #[test]
    fn supporting_set_of_level_stabilizer() {
        let g = grig();
        let budget = DetectBudget {
            levels: 4,
            ..DetectBudget::default()
        };
        let st = handle(&g, &["b", "c", "d", "a b a", "a c a", "a d a"]);
        let r = find_supporting_set(&st, &budget).unwrap();
        assert!(r.verdict.is_proven());
        assert_eq!(r.supporting, vs("{0, 1}"));
    }

    #[test]
    fn srist_search_finds_rigid_elements() {
        let g = grig();
        let budget = DetectBudget::default();
        let k = declared_branching(&g);
        let (gens, _) = build_block(&[
            DiagonalSpec {
                support: vs("{0}"),
                generators: k.clone(),
            },
            DiagonalSpec {
                support: vs("{1}"),
                generators: k.clone(),
            },
        ])
        .unwrap();
        let h = SubgroupHandle::new(&g, gens).unwrap();
        let found = srist_search(&h, &vs("{0}"), &budget).unwrap();
        assert!(!found.is_empty());
        let (diag, _) = build_block(&[DiagonalSpec {
            support: vs("{0, 1}"),
            generators: k,
        }])
        .unwrap();
        let h = SubgroupHandle::new(&g, diag).unwrap();
        assert!(srist_search(&h, &vs("{0}"), &budget).unwrap().is_empty());
    }

    #[test]
    fn detects_whole_group_and_finite_groups() {
        let g = grig();
        let budget = DetectBudget {
            levels: 4,
            ..DetectBudget::default()
        };
        let r = block_detect(&handle(&g, &["a", "b", "c", "d"]), &budget).unwrap();
        assert!(r.verdict.is_proven(), "{}", r.verdict);
        let s = r.structure.unwrap();
        assert_eq!(s.parts, vec![vs("{e}")]);
        assert_eq!(s.regular_over.as_deref(), Some("K"));
        let r = block_detect(&handle(&g, &["a", "d"]), &budget).unwrap();
        assert!(r.verdict.is_proven());
        assert!(r.structure.unwrap().parts.is_empty());
    }

    #[test]
    fn coarsen_merges_sibling_parts() {
        let fine =
            BlockStructure::parse(2, "part: {0000, 0010}\npart: {0001, 0011}\npart: {10}\npart: {11}\n").unwrap();
        let coarse = coarsen(&fine, 2);
        let want = BlockStructure::parse(2, "part: {000, 001}\npart: {1}\n").unwrap();
        assert_eq!(coarse.parts.len(), 2);
        assert!(want.parts.iter().all(|p| coarse.parts.contains(p)));
        assert!(fine.is_descendant_refinement_of(&coarse));
        let mixed = BlockStructure::parse(2, "part: {00, 11}\npart: {01, 10}\n").unwrap();
        assert_eq!(coarsen(&mixed, 2).parts, mixed.parts);
        let product = BlockStructure::parse(2, "part: {00}\npart: {01}\npart: {10}\npart: {11}\n").unwrap();
        let coarse = coarsen(&product, 2);
        assert_eq!(coarse.parts.len(), 2);
        assert!(coarse
            .parts
            .iter()
            .all(|p| p.len() == 1 && p.iter().all(|v| v.len() == 1)));
    }

    #[test]
    fn section_classes_serialize_with_a_tag() {
        let v = serde_json::to_value(SectionClass::Finite { order: 4 }).unwrap();
        assert_eq!(v, serde_json::json!({"class": "finite", "order": 4}));
        let v = serde_json::to_value(SectionClass::EqualsG { levels: 5 }).unwrap();
        assert_eq!(v["class"], "equals_g");
    }
}
