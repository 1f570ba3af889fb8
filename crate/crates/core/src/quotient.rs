//! Search for finite quotients of `G ∗ F_n ∗ ℤ` that keep `G` intact and kill
//! no short nontrivial word.
//!
//! Candidates are permutation representations in which `G` acts regularly on
//! its own block of `|G|` points. The letters and `t` act by seeded random
//! permutations either on a separate block of extra points ([`Shape::Split`],
//! giving a quotient `G × K`) or on all points ([`Shape::Mixed`]). Shapes are
//! tried in a fixed ladder of increasing size and each candidate is certified
//! before it is returned.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{EnumeratedGroup, GroupError, PermutationGroup};
use crate::perm::Permutation;
use crate::seeds::derive_seed;
use crate::word::{Ball, FreeProduct, Homomorphism, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuotientParams {
    /// Largest number of points added beyond `G`'s regular block.
    pub max_extra: usize,
    pub max_attempts: usize,
    pub seed: u64,
    pub ball_cap: usize,
    pub group_cap: usize,
}

impl Default for QuotientParams {
    fn default() -> Self {
        QuotientParams { max_extra: 8, max_attempts: 12, seed: 0, ball_cap: 1_000_000, group_cap: 400_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Split { extra: usize },
    Mixed { extra: usize },
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Split { extra } => write!(f, "split+{extra}"),
            Shape::Mixed { extra } => write!(f, "mixed+{extra}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub radius: usize,
    pub half_radius: usize,
    pub ball_growth: Vec<usize>,
    pub attempts: usize,
    pub kernel_hits: usize,
    pub over_cap: usize,
}

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("no certified quotient after {} attempts (ball growth {:?}, kernel hits {}, group cap hits {})",
        .0.attempts, .0.ball_growth, .0.kernel_hits, .0.over_cap)]
    Fail(SearchStats),
}

/// A certified quotient `π : G ∗ F_n ∗ ℤ → Q`.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub hom: Homomorphism,
    pub q: EnumeratedGroup,
    pub shape: Shape,
    /// Index in the ladder of the attempt that succeeded.
    pub attempt: usize,
    /// `Q`-index of `π(g)` for every element `g` of `G`.
    pub g_images: Vec<usize>,
    /// `Q`-index of `π(v)` for every `v` in the input set.
    pub v_images: Vec<usize>,
    pub stats: SearchStats,
}

/// A nontrivial word of length at most `N` killed by a candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelHit {
    pub word: Word,
    pub length: usize,
}

/// Searches for a homomorphism onto a finite permutation group that is
/// injective on `G` and has no nontrivial word of `V`-length `≤ n` in its kernel.
pub fn finite_quotient_search(
    fp: &FreeProduct,
    v: &[Word],
    n: usize,
    params: &QuotientParams,
) -> Result<Quotient, QuotientError> {
    for w in v {
        fp.check(w)?;
    }
    let half = n.div_ceil(2);
    let ball = fp.ball(v, half, params.ball_cap)?;
    let mut stats = SearchStats {
        radius: n,
        half_radius: half,
        ball_growth: ball.growth.clone(),
        attempts: 0,
        kernel_hits: 0,
        over_cap: 0,
    };
    let g = fp.g();
    for (step, shape) in ladder(params, g.order()).into_iter().enumerate() {
        let attempts = match shape {
            Shape::Split { extra: 0 } => 1,
            _ => params.max_attempts,
        };
        let outcomes: Vec<Attempt> = (0..attempts)
            .into_par_iter()
            .map(|a| {
                let seed = derive_seed(params.seed, &[step as u64, a as u64]);
                try_candidate(fp, &ball, n, shape, seed, params.group_cap)
            })
            .collect();
        for (a, outcome) in outcomes.into_iter().enumerate() {
            stats.attempts += 1;
            match outcome {
                Attempt::KernelHit => stats.kernel_hits += 1,
                Attempt::OverCap => stats.over_cap += 1,
                Attempt::Found(hom, q) => {
                    let g_images = (0..g.order())
                        .map(|x| q.index_of(&hom.g_images[x]).expect("image lies in Q"))
                        .collect();
                    let v_images = v
                        .iter()
                        .map(|w| q.index_of(&hom.evaluate(w)).expect("image lies in Q"))
                        .collect();
                    return Ok(Quotient {
                        hom: *hom,
                        q: *q,
                        shape,
                        attempt: step * params.max_attempts + a,
                        g_images,
                        v_images,
                        stats,
                    });
                }
            }
        }
    }
    Err(QuotientError::Fail(stats))
}

fn ladder(params: &QuotientParams, g_order: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    for extra in 0..=params.max_extra {
        if factorial_at_most(extra, params.group_cap / g_order.max(1)) {
            out.push(Shape::Split { extra });
        }
        if extra > 0 && factorial_at_most(g_order + extra, params.group_cap) {
            out.push(Shape::Mixed { extra });
        }
    }
    out
}

fn factorial_at_most(k: usize, cap: usize) -> bool {
    let mut f: usize = 1;
    for i in 2..=k {
        f = match f.checked_mul(i) {
            Some(x) => x,
            None => return false,
        };
        if f > cap {
            return false;
        }
    }
    true
}

enum Attempt {
    KernelHit,
    OverCap,
    Found(Box<Homomorphism>, Box<EnumeratedGroup>),
}

fn try_candidate(fp: &FreeProduct, ball: &Ball, n: usize, shape: Shape, seed: u64, group_cap: usize) -> Attempt {
    let hom = candidate(fp, shape, seed);
    if find_kernel_hit(ball, &hom, n).is_some() {
        return Attempt::KernelHit;
    }
    let group = PermutationGroup { degree: hom.degree, generators: hom.generator_images(fp.g()) };
    match group.enumerate(group_cap) {
        Ok(q) => {
            if injective_on_g(&hom) {
                Attempt::Found(Box::new(hom), Box::new(q))
            } else {
                Attempt::KernelHit
            }
        }
        Err(_) => Attempt::OverCap,
    }
}

/// The candidate homomorphism of the given shape drawn from `seed`.
pub fn candidate(fp: &FreeProduct, shape: Shape, seed: u64) -> Homomorphism {
    let g = fp.g();
    let order = g.order();
    let (extra, mixed) = match shape {
        Shape::Split { extra } => (extra, false),
        Shape::Mixed { extra } => (extra, true),
    };
    let degree = order + extra;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_gen_images: Vec<Permutation> = g
        .generator_indices()
        .iter()
        .map(|&s| regular(g, s).embed(degree, 0))
        .collect();
    let mut draw = || {
        if mixed {
            Permutation::random(degree, &mut rng)
        } else {
            Permutation::random(extra, &mut rng).embed(degree, order)
        }
    };
    let letters: Vec<Permutation> = (0..fp.letters()).map(|_| draw()).collect();
    let t = fp.has_z().then(&mut draw);
    Homomorphism::from_generators(g, &g_gen_images, letters, t).expect("regular representation is a homomorphism")
}

/// Left multiplication by `s` as a permutation of `G`'s element indices.
pub fn regular(g: &EnumeratedGroup, s: usize) -> Permutation {
    Permutation::from_usize(&(0..g.order()).map(|x| g.mul(s, x)).collect::<Vec<_>>()).expect("group multiplication is bijective")
}

fn injective_on_g(hom: &Homomorphism) -> bool {
    hom.g_images.iter().skip(1).all(|p| !p.is_identity())
}

/// Finds a nontrivial word of `V`-length `≤ n` killed by `hom`, using the ball
/// of radius `⌈n/2⌉` only.
///
/// Such a word exists exactly when two distinct ball elements `u ≠ w` with
/// `|u| + |w| ≤ n` share an image, since then `u w⁻¹` is a witness, and every
/// witness splits this way.
pub fn find_kernel_hit(ball: &Ball, hom: &Homomorphism, n: usize) -> Option<(usize, usize)> {
    let mut first: HashMap<u64, Vec<usize>> = HashMap::with_capacity(ball.len());
    let mut hit = None;
    ball.for_each_image(hom, |i, img| {
        let key = fingerprint(img);
        let bucket = first.entry(key).or_default();
        for &j in bucket.iter() {
            if hom.evaluate(&ball.words[j]) == *img {
                if ball.lengths[i] + ball.lengths[j] <= n {
                    hit = Some((j, i));
                    return false;
                }
                return true;
            }
        }
        bucket.push(i);
        true
    });
    hit
}

fn fingerprint(p: &Permutation) -> u64 {
    let mut h = DefaultHasher::new();
    p.images().hash(&mut h);
    h.finish()
}

/// Re-checks a homomorphism against the full ball of radius `n`.
pub fn verify_by_full_ball(
    fp: &FreeProduct,
    v: &[Word],
    n: usize,
    hom: &Homomorphism,
    ball_cap: usize,
) -> Result<Option<KernelHit>, WordError> {
    let ball = fp.ball(v, n, ball_cap)?;
    let images = ball.images(hom);
    for (i, img) in images.iter().enumerate().skip(1) {
        if img.is_identity() {
            return Ok(Some(KernelHit { word: ball.words[i].clone(), length: ball.lengths[i] }));
        }
    }
    Ok(None)
}
