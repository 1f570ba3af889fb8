//! Permutations of `{0, .., degree - 1}`.
//!
//! Composition follows function notation: `p.compose(&q)` applies `q` first,
//! so the action of a product on a point is `(pq)(x) = p(q(x))`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("image list is not a bijection on 0..{degree}: {reason}")]
    NotBijective { degree: usize, reason: String },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("cycle entry {point} out of range for degree {degree}")]
    CycleOutOfRange { point: usize, degree: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    images: Vec<u32>,
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = PermError;
    fn try_from(images: Vec<u32>) -> Result<Self, PermError> {
        Permutation::new(images)
    }
}

impl std::borrow::Borrow<[u32]> for Permutation {
    fn borrow(&self) -> &[u32] {
        &self.images
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.images
    }
}

impl Permutation {
    pub fn new(images: Vec<u32>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n {
                return Err(PermError::NotBijective { degree: n, reason: format!("image {x} out of range") });
            }
            if seen[x] {
                return Err(PermError::NotBijective { degree: n, reason: format!("image {x} repeated") });
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub fn from_usize(images: &[usize]) -> Result<Self, PermError> {
        Permutation::new(images.iter().map(|&x| x as u32).collect())
    }

    pub fn identity(degree: usize) -> Self {
        Permutation { images: (0..degree as u32).collect() }
    }

    /// Product of the given cycles, each written as a list of points.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self, PermError> {
        let mut out = Permutation::identity(degree);
        for cycle in cycles {
            for &p in *cycle {
                if p >= degree {
                    return Err(PermError::CycleOutOfRange { point: p, degree });
                }
            }
            let mut c = Permutation::identity(degree);
            for (k, &p) in cycle.iter().enumerate() {
                c.images[p] = cycle[(k + 1) % cycle.len()] as u32;
            }
            out = Permutation::new(c.images.clone())?.compose(&out);
        }
        Ok(out)
    }

    /// The cycle `0 -> 1 -> ... -> k-1 -> 0`.
    pub fn rotation(k: usize) -> Self {
        Permutation { images: (0..k as u32).map(|i| (i + 1) % k as u32).collect() }
    }

    pub fn random<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> Self {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        images.shuffle(rng);
        Permutation { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: other.images.iter().map(|&x| self.images[x as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        Permutation { images }
    }

    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Permutation::identity(self.degree());
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                out = out.compose(&sq);
            }
            sq = sq.compose(&sq);
            k >>= 1;
        }
        out
    }

    /// Permutation of `degree + shift` points acting as `self` on the block
    /// `shift..shift + degree` and fixing everything else.
    pub fn embed(&self, total: usize, shift: usize) -> Permutation {
        let mut images: Vec<u32> = (0..total as u32).collect();
        for (i, &x) in self.images.iter().enumerate() {
            images[shift + i] = shift as u32 + x;
        }
        Permutation { images }
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.apply(s) == s {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.apply(s);
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.apply(x);
            }
            out.push(c);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(usize::to_string).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
