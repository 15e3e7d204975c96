//! Diagonal, block and regular block subgroups: construction and verification
//! in level quotients.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::automorphism::{EqBudget, TreeAutomorphism};
use crate::error::{Error, Result};
use crate::group_defs::SelfSimilarGroup;
use crate::level_quotient::LevelQuotient;
use crate::structure::{k_image, KGeneration};
use crate::verdict::{Status, Verdict};
use crate::words::{VertexSet, Word};

/// Support and section generators of a diagonal block: the `i`-th generator
/// of the block has section `generators[i]` at every vertex of `support`.
#[derive(Clone, Debug)]
pub struct DiagonalSpec {
    pub support: VertexSet,
    pub generators: Vec<TreeAutomorphism>,
}

/// Supporting partition of a block subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    pub parts: Vec<VertexSet>,
    pub regular_over: Option<String>,
}

impl BlockStructure {
    pub fn new(parts: Vec<VertexSet>) -> Result<BlockStructure> {
        let s = BlockStructure {
            parts,
            regular_over: None,
        };
        s.support().require_antichain()?;
        let total: usize = s.parts.iter().map(|p| p.len()).sum();
        if total != s.support().len() {
            return Err(Error::NotAntichain(s.to_string()));
        }
        Ok(s)
    }

    /// Union of the parts.
    pub fn support(&self) -> VertexSet {
        self.parts.iter().flat_map(|p| p.iter().cloned()).collect()
    }

    /// Parses `part: {..}` lines and an optional `regular-over: <name>` line.
    pub fn parse(arity: usize, text: &str) -> Result<BlockStructure> {
        let mut parts = Vec::new();
        let mut regular_over = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("part:") {
                parts.push(VertexSet::parse(arity, rest.trim())?);
            } else if let Some(rest) = line.strip_prefix("regular-over:") {
                regular_over = Some(rest.trim().to_string());
            } else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("unrecognised line `{line}`"),
                });
            }
        }
        let mut s = BlockStructure::new(parts)?;
        s.regular_over = regular_over;
        Ok(s)
    }

    /// Whether `self` refines `coarser` downwards: each part of `self` has exactly
    /// one vertex at or below each member of a single part of `coarser`.
    pub fn is_descendant_refinement_of(&self, coarser: &BlockStructure) -> bool {
        let covered_parts = self.parts.iter().all(|p| {
            coarser
                .parts
                .iter()
                .any(|c| p.len() == c.len() && c.iter().all(|u| p.iter().filter(|v| u.is_prefix_of(v)).count() == 1))
        });
        let touched = coarser
            .parts
            .iter()
            .all(|c| c.iter().all(|u| self.support().iter().any(|v| u.is_prefix_of(v))));
        covered_parts && touched
    }
}

impl fmt::Display for BlockStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.parts {
            writeln!(f, "part: {p}")?;
        }
        if let Some(k) = &self.regular_over {
            writeln!(f, "regular-over: {k}")?;
        }
        Ok(())
    }
}

/// For each `k_i`, the product over `v ∈ V` of `graft(v, k_i)`.
pub fn build_diagonal(k_gens: &[TreeAutomorphism], support: &VertexSet) -> Result<Vec<TreeAutomorphism>> {
    support.require_antichain()?;
    if k_gens.is_empty() {
        return Err(Error::Invalid("no section generators".into()));
    }
    if support.is_empty() {
        return Err(Error::Invalid("empty support".into()));
    }
    Ok(k_gens
        .iter()
        .map(|k| {
            support.iter().fold(TreeAutomorphism::identity(k.group()), |acc, v| {
                acc.compose(&TreeAutomorphism::graft(v, k))
            })
        })
        .collect())
}

/// Generators of the product of the diagonal blocks, and their structure.
pub fn build_block(parts: &[DiagonalSpec]) -> Result<(Vec<TreeAutomorphism>, BlockStructure)> {
    let structure = BlockStructure::new(parts.iter().map(|p| p.support.clone()).collect())?;
    let mut gens = Vec::new();
    for p in parts {
        gens.extend(build_diagonal(&p.generators, &p.support)?);
    }
    Ok((gens, structure))
}

/// Decides `h ∈ Srist_G(V)`: `h` fixes `V` pointwise, fixes every vertex of
/// length `ℓ = max |v|` not below `V`, and has trivial sections there.
pub fn srist_membership(h: &TreeAutomorphism, support: &VertexSet, budget: &EqBudget) -> Verdict {
    if let Err(e) = support.require_antichain() {
        return Verdict::unknown(e.to_string());
    }
    for v in support {
        let img = h.act(v);
        if img != *v {
            return Verdict::refuted(format!("moves {v} to {img}")).at_vertex(v.clone());
        }
    }
    let d = h.arity();
    let l = support.max_len();
    let mut pending_unknown = None;
    for u in Word::level(d, l) {
        if support.covers(&u) {
            continue;
        }
        let img = h.act(&u);
        if img != u {
            return Verdict::refuted(format!("moves {u} to {img}")).at_vertex(u);
        }
        let s = h.section(&u);
        let t = s.is_trivial(budget);
        match t.status {
            Status::Proven => {}
            Status::Refuted => {
                let w = t.certificate.witness_vertex.expect("refutation carries a vertex");
                let at = u.concat(&w);
                return Verdict::refuted(format!("section at {u} is nontrivial; moves {at}")).at_vertex(at);
            }
            Status::UnknownAtBudget => pending_unknown = Some(u),
        }
    }
    match pending_unknown {
        Some(u) => Verdict::unknown(format!("triviality of the section at {u} is undecided")).at_vertex(u),
        None => Verdict::proven(format!(
            "fixes {support} and every vertex of length {l} outside it, with trivial sections"
        )),
    }
}

#[derive(Clone, Debug)]
pub struct VerifyBudget {
    /// Highest quotient level used.
    pub levels: usize,
    pub eq: EqBudget,
    /// Longest word searched for kernel elements.
    pub kernel_len: usize,
}

impl Default for VerifyBudget {
    fn default() -> Self {
        VerifyBudget {
            levels: 5,
            eq: EqBudget::default(),
            kernel_len: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionIndex {
    pub vertex: Word,
    /// `[G_m : φ_v(H)_m]` for `m = 1..`.
    pub indices: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartVerification {
    pub support: VertexSet,
    pub srist: Verdict,
    pub finite_index: Verdict,
    pub injective: Verdict,
    pub regular: Option<Verdict>,
    pub index_chains: Vec<SectionIndex>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockVerification {
    pub parts: Vec<PartVerification>,
    pub verdict: Verdict,
}

/// Checks the block clauses for `H = ⟨h_gens⟩` against a claimed structure.
/// With `k` given, also checks that the sections equal `K` in each quotient.
pub fn verify_block(
    group: &Arc<SelfSimilarGroup>,
    h_gens: &[TreeAutomorphism],
    structure: &BlockStructure,
    k: Option<(&[TreeAutomorphism], KGeneration)>,
    budget: &VerifyBudget,
) -> Result<BlockVerification> {
    let support = structure.support();
    support.require_antichain()?;
    let membership: Vec<Verdict> = h_gens
        .iter()
        .map(|g| srist_membership(g, &support, &budget.eq))
        .collect();

    let quotients: Vec<LevelQuotient> = (1..=budget.levels)
        .map(|m| LevelQuotient::build(group, m))
        .collect::<Result<_>>()?;
    let k_images = k.map(|(gens, mode)| {
        let top = k_image(&quotients[budget.levels - 1], gens, mode);
        quotients.iter().map(|q| top.restrict(q)).collect::<Vec<_>>()
    });

    let mut parts = Vec::new();
    for part in &structure.parts {
        // Generators touching this part, projected onto it.
        let mut projections = Vec::new();
        let mut touches_other = false;
        for g in h_gens {
            let here: Vec<(Word, TreeAutomorphism)> = part.iter().map(|v| (v.clone(), g.section(v))).collect();
            if here.iter().all(|(_, s)| s.is_identity_form()) {
                continue;
            }
            if support
                .iter()
                .any(|u| !part.contains(u) && !g.section(u).is_identity_form())
            {
                touches_other = true;
            }
            let proj = here.iter().fold(TreeAutomorphism::identity(group), |acc, (v, s)| {
                acc.compose(&TreeAutomorphism::graft(v, s))
            });
            projections.push(proj);
        }

        let mut srist = Verdict::all(
            membership.iter().cloned(),
            &format!("generators lie in Srist_G({support})"),
        );
        if srist.is_proven() && touches_other {
            srist = Verdict::unknown("a generator acts on several parts; the product decomposition is not certified");
        }

        let mut index_chains = Vec::new();
        let mut finite = Vec::new();
        let mut regular = Vec::new();
        for v in part {
            let sections: Vec<TreeAutomorphism> = projections.iter().map(|p| p.section(v)).collect();
            let mut indices = Vec::new();
            let mut verdict = None;
            let mut reg = Verdict::proven(format!("section image at {v} equals K")).levels(1, budget.levels);
            for (m, q) in quotients.iter().enumerate() {
                let img = q.image_of(&sections);
                let whole = q.whole();
                match img.index_in(&whole) {
                    Some(i) => indices.push(i.to_string()),
                    None => {
                        verdict = Some(
                            Verdict::refuted(format!("a section at {v} is not in G (level {})", m + 1))
                                .at_vertex(v.clone())
                                .levels(m + 1, m + 1),
                        );
                        break;
                    }
                }
                if let Some(ks) = &k_images {
                    if reg.is_proven() && !img.same_as(&ks[m]) {
                        reg = Verdict::refuted(format!("section image at {v} differs from K at level {}", m + 1))
                            .at_vertex(v.clone())
                            .levels(m + 1, m + 1);
                    }
                }
            }
            let verdict = verdict.unwrap_or_else(|| {
                let n = indices.len();
                if n >= 2 && indices[n - 1] == indices[n - 2] {
                    Verdict::proven(format!("index chain at {v} is stable at {}", indices[n - 1]))
                        .levels(1, budget.levels)
                } else {
                    Verdict::unknown(format!("index chain at {v} has not stabilized")).levels(1, budget.levels)
                }
            });
            finite.push(verdict);
            regular.push(reg);
            index_chains.push(SectionIndex {
                vertex: v.clone(),
                indices,
            });
        }
        let finite_index = Verdict::all(finite, "sections have stable finite index in every tested quotient");
        let injective = injectivity(group, part, &projections, budget);
        let regular = k_images
            .as_ref()
            .map(|_| Verdict::all(regular, "sections equal K in every tested quotient"));
        parts.push(PartVerification {
            support: part.clone(),
            srist,
            finite_index,
            injective,
            regular,
            index_chains,
        });
    }
    let verdict = Verdict::all(
        parts.iter().flat_map(|p| {
            [p.srist.clone(), p.finite_index.clone(), p.injective.clone()]
                .into_iter()
                .chain(p.regular.clone())
        }),
        "block clauses",
    );
    Ok(BlockVerification { parts, verdict })
}

/// Injectivity of `φ_v` on the part. Exact when every generator has one and
/// the same section at all support vertices; otherwise a bounded kernel search.
fn injectivity(
    group: &Arc<SelfSimilarGroup>,
    part: &VertexSet,
    projections: &[TreeAutomorphism],
    budget: &VerifyBudget,
) -> Verdict {
    if projections.is_empty() {
        return Verdict::proven("the projection is trivial");
    }
    let first = part.iter().next().expect("nonempty part").clone();
    let mut coupled = true;
    for p in projections {
        let s0 = p.section(&first);
        for v in part.iter().skip(1) {
            match p.section(v).equals(&s0, &budget.eq).status {
                Status::Proven => {}
                _ => coupled = false,
            }
        }
    }
    if coupled {
        return Verdict::proven(format!(
            "every generator has equal sections at all of {part}, so each section map is injective"
        ));
    }
    // Bounded search for a nontrivial element with a trivial section.
    let letters: Vec<TreeAutomorphism> = projections.iter().flat_map(|p| [p.clone(), p.inverse()]).collect();
    let mut frontier: Vec<(TreeAutomorphism, Option<usize>)> = vec![(TreeAutomorphism::identity(group), None)];
    let mut undecided = false;
    for len in 1..=budget.kernel_len {
        let mut next = Vec::new();
        for (w, last) in &frontier {
            for (i, l) in letters.iter().enumerate() {
                if last.is_some_and(|j| j ^ 1 == i) {
                    continue;
                }
                let x = w.compose(l);
                for v in part {
                    let s = x.section(v);
                    if s.is_trivial(&budget.eq).is_proven() {
                        match x.is_trivial(&budget.eq).status {
                            Status::Refuted => {
                                return Verdict::refuted(format!("nontrivial element with trivial section at {v}"))
                                    .witness(x.to_string())
                                    .at_vertex(v.clone());
                            }
                            Status::UnknownAtBudget => undecided = true,
                            Status::Proven => {}
                        }
                    }
                }
                next.push((x, Some(i)));
            }
        }
        frontier = next;
        let _ = len;
    }
    let note = format!("no kernel element among words of length <= {}", budget.kernel_len);
    if undecided {
        Verdict::unknown(note)
    } else {
        Verdict::unknown(note).note("injectivity is only semi-decidable here")
    }
}
