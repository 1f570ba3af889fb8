//! Finite permutation groups, their breadth-first enumeration, subgroup
//! utilities and lazily represented direct powers.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{PermError, Permutation};

const STACK_DEGREE: usize = 32;

pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("group order exceeds the cap of {cap} elements")]
    OverCap { cap: usize },
    #[error("subset is not a normal subgroup: {0}")]
    NotNormal(String),
    #[error("element index {index} out of range for a group of order {order}")]
    OutOfRange { index: usize, order: usize },
}

/// A permutation group given by generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationGroup {
    pub degree: usize,
    pub generators: Vec<Permutation>,
}

impl PermutationGroup {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self, GroupError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch(degree, g.degree()).into());
            }
        }
        Ok(PermutationGroup { degree, generators })
    }

    pub fn trivial() -> Self {
        PermutationGroup { degree: 1, generators: Vec::new() }
    }

    pub fn cyclic(n: usize) -> Self {
        PermutationGroup { degree: n, generators: vec![Permutation::rotation(n)] }
    }

    pub fn symmetric(n: usize) -> Self {
        if n < 2 {
            return PermutationGroup { degree: n.max(1), generators: Vec::new() };
        }
        let swap = Permutation::from_cycles(n, &[&[0, 1]]).expect("valid cycle");
        PermutationGroup { degree: n, generators: vec![swap, Permutation::rotation(n)] }
    }

    pub fn dihedral(n: usize) -> Self {
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        PermutationGroup {
            degree: n,
            generators: vec![Permutation::rotation(n), Permutation::from_usize(&refl).expect("valid reflection")],
        }
    }

    /// Direct product acting on the disjoint union of the two point sets.
    pub fn product(&self, other: &PermutationGroup) -> Self {
        let total = self.degree + other.degree;
        let mut generators: Vec<Permutation> = self.generators.iter().map(|g| g.embed(total, 0)).collect();
        generators.extend(other.generators.iter().map(|g| g.embed(total, self.degree)));
        PermutationGroup { degree: total, generators }
    }

    pub fn enumerate(&self, cap: usize) -> Result<EnumeratedGroup, GroupError> {
        EnumeratedGroup::enumerate(self, cap)
    }
}

/// A finite group with every element listed; element 0 is the identity.
#[derive(Debug, Clone)]
pub struct EnumeratedGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    index: FxHashMap<Permutation, usize>,
    /// `(generator, parent)` with `element = generator ∘ parent`.
    parent: Vec<Option<(usize, usize)>>,
}

impl EnumeratedGroup {
    /// Breadth-first closure from the identity, multiplying by generators on
    /// the left.
    pub fn enumerate(group: &PermutationGroup, cap: usize) -> Result<Self, GroupError> {
        let id = Permutation::identity(group.degree);
        let mut elements = vec![id.clone()];
        let mut index = FxHashMap::default();
        index.insert(id, 0);
        let mut parent = vec![None];
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (k, g) in group.generators.iter().enumerate() {
                let y = g.compose(&elements[x]);
                if index.contains_key(&y) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(GroupError::OverCap { cap });
                }
                index.insert(y.clone(), elements.len());
                elements.push(y);
                parent.push(Some((k, x)));
                queue.push_back(elements.len() - 1);
            }
        }
        Ok(EnumeratedGroup { degree: group.degree, generators: group.generators.clone(), elements, index, parent })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn as_group(&self) -> PermutationGroup {
        PermutationGroup { degree: self.degree, generators: self.generators.clone() }
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let (p, q) = (self.elements[a].images(), self.elements[b].images());
        if q.len() <= STACK_DEGREE {
            let mut buf = [0u32; STACK_DEGREE];
            for (slot, &x) in buf.iter_mut().zip(q) {
                *slot = p[x as usize];
            }
            self.index[&buf[..q.len()]]
        } else {
            self.index[&self.elements[a].compose(&self.elements[b])]
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        self.index[&self.elements[a].inverse()]
    }

    pub fn generator_indices(&self) -> Vec<usize> {
        self.generators.iter().map(|g| self.index[g]).collect()
    }

    /// Generator indices whose left-to-right product is element `x`.
    pub fn word_for(&self, mut x: usize) -> Vec<usize> {
        let mut word = Vec::new();
        while let Some((g, p)) = self.parent[x] {
            word.push(g);
            x = p;
        }
        word
    }

    /// Full multiplication table, `table[a * n + b] = a·b`.
    pub fn multiplication_table(&self) -> Vec<usize> {
        let n = self.order();
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                out.push(self.mul(a, b));
            }
        }
        out
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([0usize]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(g, x);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Smallest normal subgroup containing `gens`.
    pub fn normal_closure(&self, gens: &[usize]) -> Vec<usize> {
        let n = self.order();
        let mut conj: BTreeSet<usize> = BTreeSet::new();
        for &g in gens {
            for x in 0..n {
                conj.insert(self.mul(self.mul(x, g), self.inv(x)));
            }
        }
        self.subgroup(&conj.into_iter().collect::<Vec<_>>())
    }

    /// Checks that `h` is a subgroup closed under conjugation by generators.
    pub fn check_normal(&self, h: &[usize]) -> Result<(), GroupError> {
        let set: BTreeSet<usize> = h.iter().copied().collect();
        for &x in h {
            if x >= self.order() {
                return Err(GroupError::OutOfRange { index: x, order: self.order() });
            }
        }
        if !set.contains(&0) {
            return Err(GroupError::NotNormal("identity missing".into()));
        }
        for &a in h {
            for &b in h {
                if !set.contains(&self.mul(a, self.inv(b))) {
                    return Err(GroupError::NotNormal(format!("not closed: {a}·{b}⁻¹")));
                }
            }
        }
        for g in self.generator_indices() {
            let gi = self.inv(g);
            for &a in h {
                let c = self.mul(self.mul(g, a), gi);
                if !set.contains(&c) {
                    return Err(GroupError::NotNormal(format!("conjugate of element {a} by generator {g} leaves the subset")));
                }
            }
        }
        Ok(())
    }

    /// Every normal subgroup, each sorted, listed in increasing order of size.
    pub fn normal_subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut found: BTreeSet<Vec<usize>> = (0..n).map(|g| self.normal_closure(&[g])).collect();
        loop {
            let current: Vec<Vec<usize>> = found.iter().cloned().collect();
            let mut grew = false;
            for (i, a) in current.iter().enumerate() {
                for b in &current[i + 1..] {
                    let mut gens = a.clone();
                    gens.extend(b);
                    let join = self.subgroup(&gens);
                    if found.insert(join) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by_key(|h| (h.len(), h.clone()));
        out
    }

    /// Left cosets `xH` as sorted element lists, with the coset index of every element.
    pub fn left_cosets(&self, h: &[usize]) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = self.order();
        let mut label = vec![usize::MAX; n];
        let mut cosets = Vec::new();
        for x in 0..n {
            if label[x] != usize::MAX {
                continue;
            }
            let mut c: Vec<usize> = h.iter().map(|&k| self.mul(x, k)).collect();
            c.sort_unstable();
            for &y in &c {
                label[y] = cosets.len();
            }
            cosets.push(c);
        }
        (cosets, label)
    }
}

/// `G^m` with elements as `m`-tuples, never enumerated.
#[derive(Debug, Clone)]
pub struct DirectPower {
    pub group: Arc<EnumeratedGroup>,
    pub m: usize,
}

impl DirectPower {
    pub fn new(group: Arc<EnumeratedGroup>, m: usize) -> Self {
        DirectPower { group, m }
    }

    pub fn identity(&self) -> Vec<usize> {
        vec![0; self.m]
    }

    pub fn mul(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        a.iter().zip(b).map(|(&x, &y)| self.group.mul(x, y)).collect()
    }

    pub fn inv(&self, a: &[usize]) -> Vec<usize> {
        a.iter().map(|&x| self.group.inv(x)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        (0..self.m).map(|_| rng.gen_range(0..self.group.order())).collect()
    }

    /// Coordinatewise action on tuples of points, given the action of `G` on points.
    pub fn act(&self, g: &[usize], point: &[usize], action: impl Fn(usize, usize) -> usize) -> Vec<usize> {
        g.iter().zip(point).map(|(&h, &x)| action(h, x)).collect()
    }
}
