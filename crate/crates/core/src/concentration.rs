//! Metric measure spaces and concentration of measure.
//!
//! The concentration function is `α(ε) = 1 − inf{μ(B_ε) : μ(B) ≥ 1/2}` with
//! `α(0) = 1/2`. Exact values come from enumerating every subset of a small
//! space. Larger spaces and implicit Hamming powers get certified lower bounds
//! from witness sets whose neighbourhood masses are computed exactly.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamming::HammingPower;
use crate::metric::{FiniteMetricSpace, MetricSpace, Neighborhood};
use crate::rational::{common_denominator, Rational};

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcentrationError {
    #[error("weights sum to {0}, not 1")]
    WeightSum(Rational),
    #[error("negative weight {value} at point {index}")]
    NegativeWeight { index: usize, value: Rational },
    #[error("{weights} weights for {points} points")]
    Arity { weights: usize, points: usize },
    #[error("{points} points exceed the exhaustive cap of {cap}; use the witness estimator")]
    OverCap { points: usize, cap: usize },
    #[error("no witness set of mass at least 1/2 was produced")]
    NoWitness,
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(Rational),
}

/// A finite metric space with a probability measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::MMSpaceJson", into = "crate::io::MMSpaceJson")]
pub struct MMSpace {
    pub space: FiniteMetricSpace,
    pub weights: Vec<Rational>,
}

impl MMSpace {
    pub fn new(space: FiniteMetricSpace, weights: Vec<Rational>) -> Result<Self, ConcentrationError> {
        if weights.len() != space.len() {
            return Err(ConcentrationError::Arity { weights: weights.len(), points: space.len() });
        }
        for (index, &value) in weights.iter().enumerate() {
            if value.is_negative() {
                return Err(ConcentrationError::NegativeWeight { index, value });
            }
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(ConcentrationError::WeightSum(total));
        }
        Ok(MMSpace { space, weights })
    }

    pub fn uniform(space: FiniteMetricSpace) -> Self {
        let n = space.len() as i128;
        let weights = vec![Rational::new(1, n); space.len()];
        MMSpace { space, weights }
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn mass(&self, subset: &[usize]) -> Rational {
        subset.iter().map(|&i| self.weights[i]).sum()
    }

    /// Weights as integers over their common denominator.
    fn integer_weights(&self) -> (Vec<i128>, i128) {
        let den = common_denominator(self.weights.iter());
        (self.weights.iter().map(|w| w.scaled_to(den).expect("common denominator")).collect(), den)
    }
}

/// Which kind of value a concentration entry holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaKind {
    Exact,
    WitnessLowerBound,
}

impl AlphaKind {
    pub fn label(self) -> &'static str {
        match self {
            AlphaKind::Exact => "exact",
            AlphaKind::WitnessLowerBound => "witness-lower-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAlpha {
    pub alpha: Rational,
    /// A minimizing set `B` (lowest bitmask among minimizers).
    pub witness: Vec<usize>,
}

/// Lookup tables for fast subset masses over a bitmask split in two halves.
struct MaskMass {
    lo_bits: usize,
    lo: Vec<i128>,
    hi: Vec<i128>,
}

impl MaskMass {
    fn new(weights: &[i128]) -> Self {
        let n = weights.len();
        let lo_bits = n / 2;
        let table = |ws: &[i128]| {
            let mut t = vec![0i128; 1 << ws.len()];
            for mask in 1..t.len() {
                let low = mask.trailing_zeros() as usize;
                t[mask] = t[mask & (mask - 1)] + ws[low];
            }
            t
        };
        MaskMass { lo_bits, lo: table(&weights[..lo_bits]), hi: table(&weights[lo_bits..]) }
    }

    fn mass(&self, mask: u32) -> i128 {
        let lo_mask = (1u32 << self.lo_bits) - 1;
        self.lo[(mask & lo_mask) as usize] + self.hi[(mask >> self.lo_bits) as usize]
    }
}

fn mask_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Exact `α(ε)` by enumerating every subset; refuses spaces above `cap` points.
pub fn concentration_exact(
    mm: &MMSpace,
    eps: Rational,
    kind: Neighborhood,
    cap: usize,
) -> Result<ExactAlpha, ConcentrationError> {
    let n = mm.len();
    if n > cap.min(30) {
        return Err(ConcentrationError::OverCap { points: n, cap: cap.min(30) });
    }
    if eps.is_negative() {
        return Err(ConcentrationError::NegativeEpsilon(eps));
    }
    if eps.is_zero() {
        return Ok(ExactAlpha { alpha: Rational::half(), witness: Vec::new() });
    }
    let (w, den) = mm.integer_weights();
    let masses = MaskMass::new(&w);
    let near: Vec<u32> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| kind.contains(mm.space.dist(x, y), eps))
                .fold(0u32, |m, y| m | (1 << y))
        })
        .collect();
    let total: u64 = 1u64 << n;
    let chunk = 1u64 << 12;
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best: Option<(i128, u32)> = None;
            for mask in (c * chunk).max(1)..((c + 1) * chunk).min(total) {
                let mask = mask as u32;
                if 2 * masses.mass(mask) < den {
                    continue;
                }
                let mut nb = 0u32;
                let mut rest = mask;
                while rest != 0 {
                    nb |= near[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                let m = masses.mass(nb);
                if best.is_none_or(|(bm, _)| m < bm) {
                    best = Some((m, mask));
                }
            }
            best
        })
        .reduce(|| None, |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        });
    let (m, mask) = best.expect("the whole space has mass 1");
    Ok(ExactAlpha { alpha: Rational::one() - Rational::new(m, den), witness: mask_members(mask) })
}

/// `1 − μ(B_ε)` for a set with `μ(B) ≥ 1/2`, or `None` when `B` is too light.
pub fn witness_value(mm: &MMSpace, subset: &[usize], eps: Rational, kind: Neighborhood) -> Option<Rational> {
    if Rational::from(2) * mm.mass(subset) < Rational::one() {
        return None;
    }
    if eps.is_zero() {
        return Some(Rational::half());
    }
    let nb = crate::metric::epsilon_neighborhood(&mm.space, subset, eps, kind);
    Some(Rational::one() - mm.mass(&nb))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessAlpha {
    pub alpha_lower: Rational,
    pub witness: Vec<usize>,
    pub candidates: usize,
}

/// Seeded witness sets: for every point, the smallest ball of mass at least
/// one half, plus `samples` random sets grown point by point until they reach
/// half the mass.
pub fn witness_candidates(mm: &MMSpace, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = mm.len();
    let mut out = Vec::new();
    for c in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&y| (mm.space.dist(c, y), y));
        out.push(grow_to_half(mm, &order));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        out.push(grow_to_half(mm, &order));
    }
    out
}

fn grow_to_half(mm: &MMSpace, order: &[usize]) -> Vec<usize> {
    let mut set = Vec::new();
    let mut mass = Rational::zero();
    for &y in order {
        if Rational::from(2) * mass >= Rational::one() {
            break;
        }
        set.push(y);
        mass += mm.weights[y];
    }
    set.sort_unstable();
    set
}

/// The largest `1 − μ(B_ε)` over the given candidate sets of mass at least 1/2.
pub fn concentration_witness(
    mm: &MMSpace,
    eps: Rational,
    kind: Neighborhood,
    candidates: &[Vec<usize>],
) -> Result<WitnessAlpha, ConcentrationError> {
    let mut best: Option<(Rational, &Vec<usize>)> = None;
    let mut valid = 0;
    for b in candidates {
        if let Some(v) = witness_value(mm, b, eps, kind) {
            valid += 1;
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, b));
            }
        }
    }
    let (alpha_lower, witness) = best.ok_or(ConcentrationError::NoWitness)?;
    Ok(WitnessAlpha { alpha_lower, witness: witness.clone(), candidates: valid })
}

/// An exact probability `num / den` with arbitrary precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigMass {
    pub num: BigUint,
    pub den: BigUint,
}

impl BigMass {
    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.num, &self.den)
    }

    pub fn complement(&self) -> BigMass {
        BigMass { num: &self.den - &self.num, den: self.den.clone() }
    }

    pub fn at_least_half(&self) -> bool {
        &self.num * 2u32 >= self.den
    }
}

pub(crate) fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits().saturating_sub(60);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// A witness-based lower bound on `α` of a weighted Hamming power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerWitness {
    pub alpha_lower: f64,
    /// Human-readable description of the winning witness family.
    pub family: String,
}

/// Lower bound on `α_{X^m}(ε)` for the product measure `μ^m`, from
/// first-coordinate cylinders `{f : f₁ ∈ S}` and from balls around constant
/// tuples. Ball neighbourhoods are over-approximated by the ball of radius
/// `r + ε`, so the bound stays certified for any base space.
pub fn concentration_power_witness(
    power: &HammingPower,
    weights: &[Rational],
    eps: Rational,
) -> Result<PowerWitness, ConcentrationError> {
    let base = power.base();
    let k = base.len();
    if weights.len() != k {
        return Err(ConcentrationError::Arity { weights: weights.len(), points: k });
    }
    if eps.is_zero() {
        return Ok(PowerWitness { alpha_lower: 0.5, family: "definition at zero".into() });
    }
    let mm = MMSpace::new(base.clone(), weights.to_vec())?;
    let m = Rational::from(power.exponent() as i128);
    let mut best: Option<(f64, String)> = None;
    let mut consider = |value: f64, family: String| {
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, family));
        }
    };
    if k <= 16 {
        for mask in 1u32..(1 << k) {
            let s = mask_members(mask);
            if let Some(v) = witness_value(&mm, &s, eps * m, Neighborhood::Closed) {
                consider(v.to_f64(), format!("cylinder f1 in {s:?}"));
            }
        }
    }
    for c in 0..k {
        if let Some((v, r)) = ball_witness(power, &mm, c, eps) {
            consider(v, format!("ball around constant tuple {c} of radius {r}"));
        }
    }
    let (alpha_lower, family) = best.ok_or(ConcentrationError::NoWitness)?;
    Ok(PowerWitness { alpha_lower: alpha_lower.max(0.0), family })
}

/// Distribution of `Σ d(f_i, c)` (scaled to integers) under `μ^m`, as counts
/// over a total of `W^m` where `W` is the weight denominator.
pub fn constant_center_distribution(power: &HammingPower, mm: &MMSpace, c: usize, max_support: usize) -> Option<(Vec<BigUint>, i128)> {
    let base = power.base();
    let k = base.len();
    let dden = common_denominator((0..k).map(|x| base.dist(x, c)).collect::<Vec<_>>().iter());
    let steps: Vec<usize> = (0..k)
        .map(|x| base.dist(x, c).scaled_to(dden).and_then(|v| usize::try_from(v).ok()))
        .collect::<Option<Vec<_>>>()?;
    let (w, _) = mm.integer_weights();
    let max_step = *steps.iter().max().unwrap_or(&0);
    if max_step.checked_mul(power.exponent())? > max_support {
        return None;
    }
    let mut dist: Vec<BigUint> = vec![BigUint::from(1u32)];
    for _ in 0..power.exponent() {
        let mut next = vec![BigUint::zero(); dist.len() + max_step];
        for (s, count) in dist.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            for x in 0..k {
                if w[x] != 0 {
                    next[s + steps[x]] += count * BigUint::from(w[x] as u128);
                }
            }
        }
        dist = next;
    }
    Some((dist, dden))
}

fn ball_witness(power: &HammingPower, mm: &MMSpace, c: usize, eps: Rational) -> Option<(f64, Rational)> {
    let (dist, dden) = constant_center_distribution(power, mm, c, 1 << 20)?;
    let total: BigUint = dist.iter().sum();
    let mut cum = Vec::with_capacity(dist.len());
    let mut acc = BigUint::zero();
    for d in &dist {
        acc += d;
        cum.push(acc.clone());
    }
    let r = cum.iter().position(|x| x * 2u32 >= total)?;
    let grow = (eps * Rational::from(power.exponent() as i128) * Rational::from(dden)).floor();
    let t = (r as i128 + grow).min(cum.len() as i128 - 1) as usize;
    let nb = BigMass { num: cum[t].clone(), den: total };
    let radius = Rational::new(r as i128, dden) / Rational::from(power.exponent() as i128);
    Some((nb.complement().to_f64(), radius))
}

/// `Sep(X; κ₀, κ₁)`: the largest `δ` for which disjoint sets of masses at least
/// `κ₀`, `κ₁` lie at mutual distance at least `δ`, or 0 if none exist.
///
/// For each candidate `A` the best partner is `{y : d(y, A) ≥ δ}`, so it is
/// enough to enumerate `A`.
pub fn separation_distance(
    mm: &MMSpace,
    k0: Rational,
    k1: Rational,
    cap: usize,
) -> Result<Rational, ConcentrationError> {
    let n = mm.len();
    if n > cap.min(30) {
        return Err(ConcentrationError::OverCap { points: n, cap: cap.min(30) });
    }
    if k0 > Rational::one() || k1 > Rational::one() {
        return Ok(Rational::zero());
    }
    let (w, den) = mm.integer_weights();
    let need0 = scaled_threshold(k0, den);
    let need1 = scaled_threshold(k1, den);
    let masses = MaskMass::new(&w);
    let best = (1u64..(1u64 << n))
        .into_par_iter()
        .filter(|&mask| masses.mass(mask as u32) >= need0)
        .map(|mask| {
            let a = mask_members(mask as u32);
            let mut far: Vec<(Rational, usize)> = (0..n)
                .filter(|y| mask >> y & 1 == 0)
                .map(|y| (a.iter().map(|&x| mm.space.dist(x, y)).min().expect("nonempty"), y))
                .collect();
            far.sort_by(|p, q| q.cmp(p));
            let mut acc = 0i128;
            for (d, y) in far {
                if !d.is_positive() {
                    break;
                }
                acc += w[y];
                if acc >= need1 {
                    return d;
                }
            }
            Rational::zero()
        })
        .max()
        .unwrap_or_default();
    Ok(best)
}

/// Smallest integer mass (over `den`) that is at least `kappa`.
fn scaled_threshold(kappa: Rational, den: i128) -> i128 {
    (kappa * Rational::from(den)).ceil().max(0)
}

/// `2 exp(−ε² / (8 Σ a_i²))` for a product of spaces with diameters `a_i`.
pub fn product_bound(diameters: &[f64], eps: f64) -> f64 {
    let s: f64 = diameters.iter().map(|a| a * a).sum();
    if s == 0.0 {
        return if eps > 0.0 { 0.0 } else { 2.0 };
    }
    2.0 * (-eps * eps / (8.0 * s)).exp()
}

/// `2 exp(−n ε² / (8 a²))` for the normalized Hamming power `X^n`, `a = diam X`.
pub fn hamming_bound(n: usize, a: f64, eps: f64) -> f64 {
    if a == 0.0 {
        return if eps > 0.0 { 0.0 } else { 2.0 };
    }
    2.0 * (-(n as f64) * eps * eps / (8.0 * a * a)).exp()
}

/// A member of a family whose concentration is tracked.
#[derive(Debug, Clone)]
pub enum FamilyMember {
    Explicit { n: usize, mm: MMSpace },
    Power { power: HammingPower, weights: Vec<Rational> },
}

impl FamilyMember {
    pub fn index(&self) -> usize {
        match self {
            FamilyMember::Explicit { n, .. } => *n,
            FamilyMember::Power { power, .. } => power.exponent(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyRow {
    pub n: usize,
    pub epsilon: Rational,
    pub alpha_kind: AlphaKind,
    pub alpha: f64,
    /// `Sep(X_n; ε, ε)` when the space is small enough to compute it.
    pub sep: Option<Rational>,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyReport {
    pub rows: Vec<LevyRow>,
    /// Least-squares fit `log α ≈ log C₁ − C₂ ε² n` over rows with `α > 0`.
    pub fit: Option<(f64, f64)>,
    /// Per-ε slope of `log α` against `n`, `None` when fewer than two rows have `α > 0`.
    pub slopes: Vec<(Rational, Option<f64>)>,
    pub consistent: bool,
    pub footnotes: Vec<String>,
}

/// Computes `α` (exact when possible) and `Sep` along a family and judges
/// whether the values fit a normal Lévy envelope `C₁ e^{−C₂ ε² n}`.
pub fn levy_check(family: &[FamilyMember], grid: &[Rational], cap: usize) -> Result<LevyReport, ConcentrationError> {
    let mut rows = Vec::new();
    for member in family {
        for &eps in grid {
            rows.push(member_row(member, eps, cap)?);
        }
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.alpha > 0.0 && r.epsilon.is_positive())
        .map(|r| (r.epsilon.to_f64().powi(2) * r.n as f64, r.alpha.ln()))
        .collect();
    let fit = least_squares(&pts).map(|(a, b)| (a.exp(), -b));
    let mut slopes = Vec::new();
    let mut consistent = true;
    for &eps in grid.iter().filter(|e| e.is_positive()) {
        let series: Vec<&LevyRow> = rows.iter().filter(|r| r.epsilon == eps).collect();
        let positive: Vec<(f64, f64)> = series.iter().filter(|r| r.alpha > 0.0).map(|r| (r.n as f64, r.alpha.ln())).collect();
        let last_zero = series.last().is_some_and(|r| r.alpha <= 0.0);
        let slope = least_squares(&positive).map(|(_, b)| b);
        if !last_zero && !slope.is_some_and(|b| b < -FLOAT_TOLERANCE) {
            consistent = false;
        }
        slopes.push((eps, slope));
    }
    if let Some((_, c2)) = fit {
        if c2 <= 0.0 {
            consistent = false;
        }
    }
    Ok(LevyReport {
        rows,
        fit,
        slopes,
        consistent,
        footnotes: vec![exponent_footnote().to_string()],
    })
}

/// The bound column uses the exponent `ε²`; a growth-rule estimate elsewhere
/// in the literature is written with `ε` in place of `ε²`.
pub fn exponent_footnote() -> &'static str {
    "bound = 2 exp(-n eps^2 / 8 a^2) with squared epsilon; some statements of the growth-rule estimate write eps instead of eps^2"
}

pub fn member_row(member: &FamilyMember, eps: Rational, cap: usize) -> Result<LevyRow, ConcentrationError> {
    match member {
        FamilyMember::Explicit { n, mm } => {
            let a = mm.space.diameter().to_f64();
            let (alpha, kind) = if mm.len() <= cap {
                (concentration_exact(mm, eps, Neighborhood::Closed, cap)?.alpha.to_f64(), AlphaKind::Exact)
            } else {
                let cands = witness_candidates(mm, 16, *n as u64);
                (concentration_witness(mm, eps, Neighborhood::Closed, &cands)?.alpha_lower.to_f64(), AlphaKind::WitnessLowerBound)
            };
            let sep = if mm.len() <= cap.min(16) { Some(separation_distance(mm, eps, eps, cap)?) } else { None };
            Ok(LevyRow { n: *n, epsilon: eps, alpha_kind: kind, alpha, sep, bound: Some(hamming_bound(1, a, eps.to_f64())) })
        }
        FamilyMember::Power { power, weights } => {
            let n = power.exponent();
            let a = power.diameter().to_f64();
            let bound = Some(hamming_bound(n, a, eps.to_f64()));
            let explicit = power.cardinality().filter(|&c| c <= cap);
            if explicit.is_some() {
                let space = power.materialize(cap).expect("within cap");
                let w = product_weights(power, weights);
                let mm = MMSpace::new(space, w)?;
                let alpha = concentration_exact(&mm, eps, Neighborhood::Closed, cap)?.alpha.to_f64();
                let sep = if mm.len() <= cap.min(16) { Some(separation_distance(&mm, eps, eps, cap)?) } else { None };
                Ok(LevyRow { n, epsilon: eps, alpha_kind: AlphaKind::Exact, alpha, sep, bound })
            } else {
                let w = concentration_power_witness(power, weights, eps)?;
                Ok(LevyRow { n, epsilon: eps, alpha_kind: AlphaKind::WitnessLowerBound, alpha: w.alpha_lower, sep: None, bound })
            }
        }
    }
}

/// Product weights of every tuple of a materializable power.
pub fn product_weights(power: &HammingPower, weights: &[Rational]) -> Vec<Rational> {
    let n = power.cardinality().expect("materializable power");
    (0..n)
        .map(|i| power.decode(i).iter().map(|&x| weights[x]).fold(Rational::one(), |a, b| a * b))
        .collect()
}

/// Returns `(intercept, slope)`.
fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamming::{discrete_pair, hamming_power};

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn two_point_space() {
        let mm = MMSpace::uniform(discrete_pair());
        let a = concentration_exact(&mm, r(1, 2), Neighborhood::Closed, 20).unwrap();
        assert_eq!(a.alpha, r(1, 2));
        assert_eq!(a.witness.len(), 1);
        assert_eq!(concentration_exact(&mm, r(0, 1), Neighborhood::Closed, 20).unwrap().alpha, r(1, 2));
        assert_eq!(concentration_exact(&mm, r(1, 1), Neighborhood::Closed, 20).unwrap().alpha, r(0, 1));
    }

    #[test]
    fn cube_cylinder_saturates() {
        let mm = MMSpace::uniform(hamming_power(&discrete_pair(), 4, 100).unwrap());
        let cylinder: Vec<usize> = (0..16).filter(|&i| i < 8).collect();
        assert_eq!(witness_value(&mm, &cylinder, r(1, 4), Neighborhood::Closed), Some(r(0, 1)));
        assert_eq!(witness_value(&mm, &(0..16).collect::<Vec<_>>(), r(1, 4), Neighborhood::Closed), Some(r(0, 1)));
    }

    #[test]
    fn separation_examples() {
        let mm = MMSpace::uniform(discrete_pair());
        assert_eq!(separation_distance(&mm, r(1, 2), r(1, 2), 20).unwrap(), r(1, 1));
        assert_eq!(separation_distance(&mm, r(3, 2), r(1, 2), 20).unwrap(), r(0, 1));
    }

    #[test]
    fn bound_values() {
        assert!((hamming_bound(8, 1.0, 1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(hamming_bound(5, 1.0, 0.0), 2.0);
        assert_eq!(product_bound(&[0.0, 0.0], 0.5), 0.0);
        assert!((product_bound(&[1.0; 8], 1.0) - 2.0 * (-1.0f64 / 64.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn power_witness_matches_exact_on_small_cube() {
        let p = HammingPower::new(discrete_pair(), 4).unwrap();
        let w = vec![r(1, 2); 2];
        let mm = MMSpace::uniform(p.materialize(100).unwrap());
        for eps in [r(1, 8), r(1, 4), r(1, 2)] {
            let exact = concentration_exact(&mm, eps, Neighborhood::Closed, 20).unwrap().alpha.to_f64();
            let lower = concentration_power_witness(&p, &w, eps).unwrap().alpha_lower;
            assert!(lower <= exact + 1e-12, "eps {eps}: {lower} > {exact}");
        }
    }

    #[test]
    fn constant_family_is_not_levy() {
        let mm = MMSpace::uniform(discrete_pair());
        let fam: Vec<FamilyMember> = (1..=3).map(|n| FamilyMember::Explicit { n, mm: mm.clone() }).collect();
        let rep = levy_check(&fam, &[r(1, 2)], 20).unwrap();
        assert!(!rep.consistent);
    }

    #[test]
    fn singleton_family_is_levy() {
        let mm = MMSpace::uniform(FiniteMetricSpace::singleton("x"));
        let fam: Vec<FamilyMember> = (1..=3).map(|n| FamilyMember::Explicit { n, mm: mm.clone() }).collect();
        let rep = levy_check(&fam, &[r(1, 4), r(1, 2)], 20).unwrap();
        assert!(rep.rows.iter().all(|row| row.alpha == 0.0));
        assert!(rep.consistent);
    }
}
