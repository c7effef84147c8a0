//! Kinematic skeleton definitions.
//!
//! A [`SkeletonDef`] is plain data (usually loaded from a config file) and
//! [`build_skeleton`] validates it into a [`KinematicTree`] holding the
//! order-1 / order-2 parent tables every other module works with.
//!
//! The root is its own parent in both tables, so encodings relative to a
//! parent never need a sentinel index.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// One joint of a skeleton definition. `parent` indexes into the joint list;
/// the root points at itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDef {
    pub name: String,
    pub parent: usize,
}

/// Named list of left/right joint pairs (e.g. "ankles").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGroup {
    pub name: String,
    pub pairs: Vec<(usize, usize)>,
}

impl SymmetryGroup {
    /// Joint indices of the group, pair by pair.
    pub fn joints(&self) -> Vec<usize> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

/// Skeleton definition. Units are always millimeters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonDef {
    pub name: String,
    pub joints: Vec<JointDef>,
    pub root: usize,
    pub eval_subset: Vec<usize>,
    pub symmetry: Vec<SymmetryGroup>,
}

impl SkeletonDef {
    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Stable identity derived from the name and the joint topology.
    pub fn id(&self) -> SkeletonId {
        let mut h = Fnv1a::new();
        h.write(self.name.as_bytes());
        h.write(&[0xff]);
        for j in &self.joints {
            h.write(j.name.as_bytes());
            h.write(&[0xfe]);
            h.write(&(j.parent as u64).to_le_bytes());
        }
        h.write(&(self.root as u64).to_le_bytes());
        SkeletonId(h.finish())
    }
}

/// Identity tag carried by poses so mismatched skeletons are caught early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkeletonId(pub u64);

impl fmt::Display for SkeletonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Validated parent tables of a skeleton. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KinematicTree {
    id: SkeletonId,
    root: usize,
    parent1: Vec<usize>,
    parent2: Vec<usize>,
    depth: Vec<usize>,
    topological_order: Vec<usize>,
}

impl KinematicTree {
    pub fn id(&self) -> SkeletonId {
        self.id
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent1.is_empty()
    }

    pub fn parent1(&self) -> &[usize] {
        &self.parent1
    }

    /// Parent of the parent, clamped at the root.
    pub fn parent2(&self) -> &[usize] {
        &self.parent2
    }

    pub fn depth(&self) -> &[usize] {
        &self.depth
    }

    /// Joints ordered by increasing depth (ties by index).
    pub fn topological_order(&self) -> &[usize] {
        &self.topological_order
    }

    /// Parent table for an encoding order (1 or 2).
    pub fn parents(&self, order: RelOrder) -> &[usize] {
        match order {
            RelOrder::First => &self.parent1,
            RelOrder::Second => &self.parent2,
        }
    }
}

/// Which ancestor a relative encoding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelOrder {
    First,
    Second,
}

impl RelOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            RelOrder::First => 1,
            RelOrder::Second => 2,
        }
    }
}

/// Validates `def` and derives its parent tables.
pub fn build_skeleton(def: &SkeletonDef) -> Result<KinematicTree> {
    let n = def.joints.len();
    if n < 2 {
        return Err(Error::TooFewJoints(n));
    }
    if def.root >= n {
        return Err(Error::IndexOutOfRange {
            index: def.root,
            len: n,
            context: "root",
        });
    }
    for j in &def.joints {
        if j.parent >= n {
            return Err(Error::IndexOutOfRange {
                index: j.parent,
                len: n,
                context: "parent",
            });
        }
    }
    for (i, a) in def.joints.iter().enumerate() {
        if def.joints[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::DuplicateJointName(a.name.clone()));
        }
    }
    if def.joints[def.root].parent != def.root {
        return Err(Error::InvalidRoot(def.root));
    }
    if let Some(other) = (0..n).find(|&j| j != def.root && def.joints[j].parent == j) {
        return Err(Error::MultipleRoots(def.root, other));
    }

    let parent1: Vec<usize> = def.joints.iter().map(|j| j.parent).collect();

    // Depth by walking up; a walk longer than n steps means a cycle.
    let mut depth = vec![usize::MAX; n];
    depth[def.root] = 0;
    let mut path = Vec::with_capacity(n);
    for start in 0..n {
        path.clear();
        let mut j = start;
        while depth[j] == usize::MAX {
            if path.len() > n {
                return Err(Error::CycleDetected(start));
            }
            path.push(j);
            j = parent1[j];
        }
        let mut d = depth[j];
        for &p in path.iter().rev() {
            d += 1;
            depth[p] = d;
        }
    }

    let parent2: Vec<usize> = parent1.iter().map(|&p| parent1[p]).collect();
    let mut topological_order: Vec<usize> = (0..n).collect();
    topological_order.sort_by_key(|&j| (depth[j], j));

    validate_eval_subset(def)?;
    validate_symmetry(def)?;

    Ok(KinematicTree {
        id: def.id(),
        root: def.root,
        parent1,
        parent2,
        depth,
        topological_order,
    })
}

fn validate_eval_subset(def: &SkeletonDef) -> Result<()> {
    let n = def.joints.len();
    if def.eval_subset.is_empty() {
        return Err(Error::InvalidEvalSubset("empty"));
    }
    let mut seen = vec![false; n];
    for &j in &def.eval_subset {
        if j >= n {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: n,
                context: "eval_subset",
            });
        }
        if core::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidEvalSubset("duplicate joint"));
        }
    }
    Ok(())
}

fn validate_symmetry(def: &SkeletonDef) -> Result<()> {
    let n = def.joints.len();
    let mut used = vec![false; n];
    for g in &def.symmetry {
        let bad = |reason| Error::InvalidSymmetry {
            group: g.name.clone(),
            reason,
        };
        if g.pairs.is_empty() {
            return Err(bad("no pairs"));
        }
        for &(a, b) in &g.pairs {
            if a >= n || b >= n {
                return Err(bad("joint index out of range"));
            }
            if a == b {
                return Err(bad("pair joins a joint with itself"));
            }
            if !def.eval_subset.contains(&a) || !def.eval_subset.contains(&b) {
                return Err(bad("joint outside the evaluation subset"));
            }
            for j in [a, b] {
                if core::mem::replace(&mut used[j], true) {
                    return Err(bad("joint used by more than one pair"));
                }
            }
        }
    }
    Ok(())
}
