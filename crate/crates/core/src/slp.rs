//! Straight-line programs recording how permutations were built, so that any
//! element of a level quotient can be lifted back to a tree automorphism.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::automorphism::TreeAutomorphism;
use crate::error::{Error, Result};
use crate::perm::Perm;

/// Cap on the size of a lifted element, in normal-form factors.
pub const MAX_LIFT_LEN: usize = 1_000_000;

#[derive(Clone)]
pub struct Slp(Arc<Node>);

struct Node {
    kind: Kind,
    liftable: bool,
    cache: OnceLock<Result<TreeAutomorphism>>,
}

enum Kind {
    Identity,
    Leaf(TreeAutomorphism),
    /// A permutation with no recorded preimage (e.g. a projected section).
    Opaque,
    Mul(Slp, Slp),
    Inv(Slp),
}

impl Slp {
    fn make(kind: Kind) -> Slp {
        let liftable = match &kind {
            Kind::Identity | Kind::Leaf(_) => true,
            Kind::Opaque => false,
            Kind::Mul(a, b) => a.0.liftable && b.0.liftable,
            Kind::Inv(a) => a.0.liftable,
        };
        Slp(Arc::new(Node {
            kind,
            liftable,
            cache: OnceLock::new(),
        }))
    }

    pub fn identity() -> Slp {
        Slp::make(Kind::Identity)
    }

    pub fn leaf(t: TreeAutomorphism) -> Slp {
        Slp::make(Kind::Leaf(t))
    }

    pub fn opaque() -> Slp {
        Slp::make(Kind::Opaque)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.0.kind, Kind::Identity)
    }

    pub fn is_liftable(&self) -> bool {
        self.0.liftable
    }

    pub fn mul(&self, other: &Slp) -> Slp {
        if self.is_identity() {
            return other.clone();
        }
        if other.is_identity() {
            return self.clone();
        }
        Slp::make(Kind::Mul(self.clone(), other.clone()))
    }

    pub fn inv(&self) -> Slp {
        match &self.0.kind {
            Kind::Identity => self.clone(),
            Kind::Inv(a) => a.clone(),
            _ => Slp::make(Kind::Inv(self.clone())),
        }
    }

    /// Evaluates the program to a tree automorphism. Results are cached per node.
    pub fn lift(&self) -> Result<TreeAutomorphism> {
        if !self.0.liftable {
            return Err(Error::Invalid("element has no recorded preimage".into()));
        }
        // Post-order walk with an explicit stack; programs can be deep.
        let mut stack: Vec<(Slp, bool)> = vec![(self.clone(), false)];
        while let Some((s, expanded)) = stack.pop() {
            if s.0.cache.get().is_some() {
                continue;
            }
            let children: Vec<&Slp> = match &s.0.kind {
                Kind::Mul(a, b) => vec![a, b],
                Kind::Inv(a) => vec![a],
                _ => Vec::new(),
            };
            if !expanded && children.iter().any(|c| c.0.cache.get().is_none()) {
                stack.push((s.clone(), true));
                for c in children {
                    stack.push((c.clone(), false));
                }
                continue;
            }
            let value = match &s.0.kind {
                Kind::Identity => Err(Error::Invalid("identity has no group".into())),
                Kind::Leaf(t) => Ok(t.clone()),
                Kind::Opaque => unreachable!(),
                Kind::Mul(a, b) => match (a.cached(), b.cached()) {
                    (Ok(x), Ok(y)) => {
                        let z = x.compose(&y);
                        if z.size() > MAX_LIFT_LEN {
                            Err(Error::WordOverflow(MAX_LIFT_LEN as u64))
                        } else {
                            Ok(z)
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => Err(e),
                },
                Kind::Inv(a) => a.cached().map(|x| x.inverse()),
            };
            let _ = s.0.cache.set(value);
        }
        self.cached()
    }

    fn cached(&self) -> Result<TreeAutomorphism> {
        self.0.cache.get().expect("evaluated").clone()
    }
}

impl Drop for Node {
    // Iterative teardown so long chains do not exhaust the stack.
    fn drop(&mut self) {
        let mut pending = Vec::new();
        take_children(&mut self.kind, &mut pending);
        while let Some(s) = pending.pop() {
            if let Ok(mut node) = Arc::try_unwrap(s.0) {
                take_children(&mut node.kind, &mut pending);
            }
        }
    }
}

fn take_children(kind: &mut Kind, out: &mut Vec<Slp>) {
    match std::mem::replace(kind, Kind::Identity) {
        Kind::Mul(a, b) => {
            out.push(a);
            out.push(b);
        }
        Kind::Inv(a) => out.push(a),
        _ => {}
    }
}

impl fmt::Debug for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Identity => f.write_str("1"),
            Kind::Leaf(t) => write!(f, "{t}"),
            Kind::Opaque => f.write_str("?"),
            Kind::Mul(a, b) => write!(f, "({a:?} {b:?})"),
            Kind::Inv(a) => write!(f, "({a:?})^-1"),
        }
    }
}

/// A permutation together with a program for a preimage.
#[derive(Clone, Debug)]
pub struct Elt {
    pub perm: Perm,
    pub slp: Slp,
}

impl Elt {
    pub fn identity(degree: usize) -> Elt {
        Elt {
            perm: Perm::identity(degree),
            slp: Slp::identity(),
        }
    }

    pub fn new(perm: Perm, slp: Slp) -> Elt {
        Elt { perm, slp }
    }

    /// `self · other`, acting as `other` first.
    pub fn mul(&self, other: &Elt) -> Elt {
        Elt {
            perm: self.perm.compose(&other.perm),
            slp: self.slp.mul(&other.slp),
        }
    }

    pub fn inv(&self) -> Elt {
        Elt {
            perm: self.perm.inverse(),
            slp: self.slp.inv(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.is_identity()
    }

    /// The preimage; the identity program lifts to the identity of `group`.
    pub fn lift(&self, group: &Arc<crate::group_defs::SelfSimilarGroup>) -> Result<TreeAutomorphism> {
        if self.slp.is_identity() {
            return Ok(TreeAutomorphism::identity(group));
        }
        self.slp.lift()
    }
}
