//! Mass of the `ε`-neighbourhood of the identity acting on a set of measure
//! at least one half in a finite power `G^m`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concentration::ratio_f64;
use crate::group::DirectPower;
use crate::levy::action::IsometricAction;
use crate::rational::Rational;
use crate::seeds::derive_seed;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MassError {
    #[error("witness set has mass {0}, below one half")]
    LightWitness(String),
    #[error("cylinder coordinate value {0} is not a group element")]
    OutOfRange(usize),
    #[error("diameter and epsilon must be positive")]
    NonPositive,
    #[error("the exponent m must be positive")]
    ZeroExponent,
    #[error("containment failed: v = {v:?} moves basepoint {x} by {moved}, not below {eps}")]
    Containment { v: Vec<usize>, x: usize, moved: Rational, eps: Rational },
}

/// Sets `A ⊆ G^m` with `μ(A) ≥ 1/2` whose neighbourhoods have closed-form membership.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessSet {
    Whole,
    /// Tuples whose first coordinate lies in `allowed`.
    Cylinder { allowed: Vec<usize> },
    /// Tuples with at most `radius` non-identity coordinates.
    Ball { radius: usize },
}

impl WitnessSet {
    /// Exact mass under the uniform measure on `G^m`.
    pub fn mass(&self, k: usize, m: usize) -> (BigUint, BigUint) {
        match self {
            WitnessSet::Whole => (BigUint::one(), BigUint::one()),
            WitnessSet::Cylinder { allowed } => (BigUint::from(allowed.len()), BigUint::from(k)),
            WitnessSet::Ball { radius } => {
                let mut num = BigUint::zero();
                let mut binom = BigUint::one();
                let mut pow = BigUint::one();
                for j in 0..=(*radius).min(m) {
                    num += &binom * &pow;
                    binom = binom * BigUint::from(m - j) / BigUint::from(j + 1);
                    pow *= BigUint::from(k - 1);
                }
                (num, BigUint::from(k).pow(m as u32))
            }
        }
    }

    /// Number of coordinates that must change to reach the set, times `m` for the Hamming distance.
    fn distance_numerator(&self, g: &[usize]) -> usize {
        match self {
            WitnessSet::Whole => 0,
            WitnessSet::Cylinder { allowed } => usize::from(!allowed.contains(&g[0])),
            WitnessSet::Ball { radius } => g.iter().filter(|&&x| x != 0).count().saturating_sub(*radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassParams {
    pub samples: usize,
    pub seed: u64,
    /// Failure probability of the reported Hoeffding interval.
    pub confidence_delta: f64,
}

impl Default for MassParams {
    fn default() -> Self {
        MassParams { samples: 20_000, seed: 0, confidence_delta: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub m: usize,
    pub epsilon: Rational,
    pub diameter: Rational,
    pub witness: WitnessSet,
    pub witness_mass: f64,
    pub samples: usize,
    pub hits: usize,
    pub estimate: f64,
    pub radius: f64,
    pub lower_bound: f64,
    pub containment_checks: usize,
}

/// Hoeffding half-width for `samples` draws at failure probability `delta`.
pub fn hoeffding_radius(samples: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

/// `1 − 2·exp(−m ε² / (8 a²))`.
pub fn mass_lower_bound(m: usize, a: f64, eps: f64) -> f64 {
    1.0 - 2.0 * (-(m as f64) * eps * eps / (8.0 * a * a)).exp()
}

/// Estimates `μ(V·A)` where `V` is the set of `v ∈ G^m` moving every basepoint
/// by less than `ε`, realised as the Hamming ball `d_H(v, e) < ε/a`.
///
/// When `basepoints` is given, sampled elements of `V` are checked to move
/// each constant tuple `(x, …, x)` by less than `ε` in the normalised `ℓ¹`
/// metric of `X^m`.
pub fn neighborhood_mass(
    power: &DirectPower,
    diameter: Rational,
    eps: Rational,
    witness: &WitnessSet,
    params: &MassParams,
    basepoints: Option<(&IsometricAction, &[usize])>,
) -> Result<MassEstimate, MassError> {
    let m = power.m;
    let k = power.group.order();
    if m == 0 {
        return Err(MassError::ZeroExponent);
    }
    if !diameter.is_positive() || !eps.is_positive() {
        return Err(MassError::NonPositive);
    }
    if let WitnessSet::Cylinder { allowed } = witness {
        if let Some(&bad) = allowed.iter().find(|&&x| x >= k) {
            return Err(MassError::OutOfRange(bad));
        }
    }
    let (num, den) = witness.mass(k, m);
    if &num * 2u32 < den {
        return Err(MassError::LightWitness(format!("{num}/{den}")));
    }
    let scaled = eps / diameter;
    let limit = scaled * Rational::from(m as i128);
    let inside = |g: &[usize]| Rational::from(witness.distance_numerator(g) as i128) < limit;

    let chunks = params.samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[c as u64]));
            let n = CHUNK.min(params.samples - c * CHUNK);
            (0..n).filter(|_| inside(&power.sample(&mut rng))).count()
        })
        .sum();

    let mut containment_checks = 0;
    if let Some((act, points)) = basepoints {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[u64::MAX]));
        let max_moved = (limit.ceil() - 1).max(0) as usize;
        for _ in 0..64 {
            let t = rng.gen_range(0..=max_moved.min(m));
            let mut v = power.identity();
            if k > 1 {
                for pos in sample(&mut rng, m, t) {
                    v[pos] = rng.gen_range(1..k);
                }
            }
            for &x in points {
                let total: Rational = v.iter().map(|&h| act.space.dist(act.act(h, x), x)).sum();
                let moved = total / Rational::from(m as i128);
                containment_checks += 1;
                if moved >= eps {
                    return Err(MassError::Containment { v, x, moved, eps });
                }
            }
        }
    }

    let estimate = hits as f64 / params.samples.max(1) as f64;
    Ok(MassEstimate {
        m,
        epsilon: eps,
        diameter,
        witness: witness.clone(),
        witness_mass: ratio_f64(&num, &den),
        samples: params.samples,
        hits,
        estimate,
        radius: hoeffding_radius(params.samples.max(1), params.confidence_delta),
        lower_bound: mass_lower_bound(m, diameter.to_f64(), eps.to_f64()),
        containment_checks,
    })
}
