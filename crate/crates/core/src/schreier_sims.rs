//! Deterministic incremental Schreier–Sims.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::perm::Perm;
use crate::slp::Elt;

#[derive(Clone, Debug)]
struct ChainLevel {
    gens: Vec<Elt>,
    orbit: Vec<u32>,
    transversal: HashMap<u32, Elt>,
}

/// Base and strong generating set, with a transversal per base point.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    base: Vec<usize>,
    levels: Vec<ChainLevel>,
    strong: Vec<Elt>,
}

enum Strip {
    Identity,
    /// The residue leaves the orbit at this level.
    Fails(Elt, usize),
    /// The residue fixes every base point but is not the identity.
    FixesBase(Elt),
}

impl StabChain {
    /// Builds a chain whose base starts with `base_prefix` (duplicates removed).
    pub fn new(degree: usize, base_prefix: &[usize], gens: &[Elt]) -> StabChain {
        let mut base: Vec<usize> = Vec::new();
        for &b in base_prefix {
            if !base.contains(&b) {
                base.push(b);
            }
        }
        let gens: Vec<Elt> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        for g in &gens {
            if base.iter().all(|&b| g.perm.apply(b) == b) {
                base.push(g.perm.first_moved().expect("non-identity"));
            }
        }

        let mut distr: Vec<Vec<Elt>> = vec![Vec::new(); base.len()];
        for g in &gens {
            let mut j = 0;
            while j + 1 < base.len() && g.perm.apply(base[j]) == base[j] {
                j += 1;
            }
            for slot in distr.iter_mut().take(j + 1) {
                slot.push(g.clone());
            }
        }
        let mut levels: Vec<ChainLevel> = base
            .iter()
            .zip(&distr)
            .map(|(&b, gs)| orbit_transversal(degree, gs, b))
            .collect();

        let mut i = base.len() as isize - 1;
        'main: while i >= 0 {
            let iu = i as usize;
            let orbit = levels[iu].orbit.clone();
            let level_gens = levels[iu].gens.clone();
            for &beta in &orbit {
                let u_beta = levels[iu].transversal[&beta].clone();
                for gen in &level_gens {
                    let gb = gen.perm.apply(beta as usize) as u32;
                    let u1 = &levels[iu].transversal[&gb];
                    let g1_perm = gen.perm.compose(&u_beta.perm);
                    if g1_perm == u1.perm {
                        continue;
                    }
                    let schreier = u1.inv().mul(&gen.mul(&u_beta));
                    let (h, target) = match strip(&base, &levels, schreier, iu + 1) {
                        Strip::Identity => continue,
                        Strip::Fails(h, j) => (h, j),
                        Strip::FixesBase(h) => {
                            base.push(h.perm.first_moved().expect("non-identity"));
                            levels.push(ChainLevel {
                                gens: Vec::new(),
                                orbit: Vec::new(),
                                transversal: HashMap::new(),
                            });
                            (h, base.len() - 1)
                        }
                    };
                    for l in iu + 1..=target {
                        let mut gs = std::mem::take(&mut levels[l].gens);
                        gs.push(h.clone());
                        levels[l] = orbit_transversal(degree, &gs, base[l]);
                    }
                    i = target as isize;
                    continue 'main;
                }
            }
            i -= 1;
        }

        let mut strong: Vec<Elt> = Vec::new();
        for l in &levels {
            for g in &l.gens {
                if !strong.iter().any(|s| s.perm == g.perm) {
                    strong.push(g.clone());
                }
            }
        }
        StabChain {
            degree,
            base,
            levels,
            strong,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> &[usize] {
        &self.base
    }

    pub fn strong_generators(&self) -> &[Elt] {
        &self.strong
    }

    /// Generators of the pointwise stabilizer of the first `i` base points.
    pub fn level_generators(&self, i: usize) -> &[Elt] {
        self.levels.get(i).map_or(&[], |l| &l.gens)
    }

    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.iter().all(|l| l.orbit.len() == 1)
    }

    /// Sifts `p` through the chain; membership holds iff the residue is the identity.
    pub fn contains(&self, p: &Perm) -> bool {
        let mut h = p.clone();
        for (l, &b) in self.levels.iter().zip(&self.base) {
            let beta = h.apply(b) as u32;
            if beta as usize == b {
                continue;
            }
            match l.transversal.get(&beta) {
                Some(u) => h = u.perm.inverse().compose(&h),
                None => return false,
            }
        }
        h.is_identity()
    }

    /// Writes a member as a product of transversal elements, carrying programs.
    pub fn express(&self, p: &Perm) -> Option<Elt> {
        let mut h = p.clone();
        let mut acc = Elt::identity(self.degree);
        for (l, &b) in self.levels.iter().zip(&self.base) {
            let beta = h.apply(b) as u32;
            let u = l.transversal.get(&beta)?;
            h = u.perm.inverse().compose(&h);
            acc = acc.mul(u);
        }
        h.is_identity().then_some(acc)
    }

    /// Re-sifts every strong generator; a consistency check.
    pub fn verify(&self) -> bool {
        self.strong.iter().all(|g| self.contains(&g.perm))
            && self
                .levels
                .iter()
                .zip(&self.base)
                .all(|(l, &b)| l.orbit.iter().all(|&x| l.transversal[&x].perm.apply(b) == x as usize))
    }
}

fn orbit_transversal(degree: usize, gens: &[Elt], alpha: usize) -> ChainLevel {
    let mut orbit = vec![alpha as u32];
    let mut transversal = HashMap::new();
    transversal.insert(alpha as u32, Elt::identity(degree));
    let mut k = 0;
    while k < orbit.len() {
        let x = orbit[k];
        let px = transversal[&x].clone();
        for g in gens {
            let y = g.perm.apply(x as usize) as u32;
            if let std::collections::hash_map::Entry::Vacant(e) = transversal.entry(y) {
                e.insert(g.mul(&px));
                orbit.push(y);
            }
        }
        k += 1;
    }
    ChainLevel {
        gens: gens.to_vec(),
        orbit,
        transversal,
    }
}

fn strip(base: &[usize], levels: &[ChainLevel], mut h: Elt, start: usize) -> Strip {
    for i in start..base.len() {
        let beta = h.perm.apply(base[i]) as u32;
        if beta as usize == base[i] {
            continue;
        }
        let Some(u) = levels[i].transversal.get(&beta) else {
            return Strip::Fails(h, i);
        };
        if u.perm == h.perm {
            return Strip::Identity;
        }
        h = u.inv().mul(&h);
    }
    if h.is_identity() {
        Strip::Identity
    } else {
        Strip::FixesBase(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::Slp;

    fn elt(images: &[u32]) -> Elt {
        Elt::new(Perm::from_images(images.to_vec()).unwrap(), Slp::opaque())
    }

    #[test]
    fn symmetric_group_order() {
        // S_5 from a transposition and a 5-cycle.
        let chain = StabChain::new(5, &[], &[elt(&[1, 0, 2, 3, 4]), elt(&[1, 2, 3, 4, 0])]);
        assert_eq!(chain.order(), BigUint::from(120u32));
        assert!(chain.verify());
        assert!(chain.contains(&Perm::parse_cycles(5, "(0 2)(1 4)").unwrap()));
    }

    #[test]
    fn dihedral_membership() {
        // D_4 on the square's vertices.
        let r = elt(&[1, 2, 3, 0]);
        let s = elt(&[0, 3, 2, 1]);
        let chain = StabChain::new(4, &[], &[r, s]);
        assert_eq!(chain.order(), BigUint::from(8u32));
        assert!(!chain.contains(&Perm::parse_cycles(4, "(0 1)").unwrap()));
        assert!(chain.contains(&Perm::parse_cycles(4, "(0 2)").unwrap()));
    }

    #[test]
    fn base_prefix_gives_stabilizers() {
        let chain = StabChain::new(5, &[3, 4], &[elt(&[1, 0, 2, 3, 4]), elt(&[1, 2, 3, 4, 0])]);
        assert_eq!(&chain.base()[..2], &[3, 4]);
        let stab = StabChain::new(5, &[], chain.level_generators(2));
        assert_eq!(stab.order(), BigUint::from(6u32));
    }

    #[test]
    fn trivial_group() {
        let chain = StabChain::new(3, &[], &[elt(&[0, 1, 2])]);
        assert_eq!(chain.order(), BigUint::from(1u32));
        assert!(chain.contains(&Perm::identity(3)));
        assert!(!chain.contains(&Perm::parse_cycles(3, "(0 1)").unwrap()));
    }

    #[test]
    fn orders_match_brute_force_closure() {
        use rand::{Rng, SeedableRng};
        use std::collections::HashSet;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(2..7);
            let gens: Vec<Elt> = (0..rng.gen_range(1..3))
                .map(|_| {
                    let mut v: Vec<u32> = (0..n as u32).collect();
                    for i in (1..n).rev() {
                        v.swap(i, rng.gen_range(0..=i));
                    }
                    elt(&v)
                })
                .collect();
            let mut seen: HashSet<Perm> = HashSet::from([Perm::identity(n)]);
            let mut frontier = vec![Perm::identity(n)];
            while let Some(p) = frontier.pop() {
                for g in &gens {
                    let q = g.perm.compose(&p);
                    if seen.insert(q.clone()) {
                        frontier.push(q);
                    }
                }
            }
            let chain = StabChain::new(n, &[], &gens);
            assert_eq!(chain.order(), BigUint::from(seen.len()));
            assert!(seen.iter().all(|p| chain.contains(p)));
        }
    }
}
