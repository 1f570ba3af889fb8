//! Left-invariant (pseudo)metrics on finite groups.
//!
//! A left-invariant pseudometric is stored as its distances from the identity,
//! `d(x, y) = dist(x⁻¹y)`. The maximal one with prescribed values on a set `V`
//! is a shortest-path computation on the Cayley graph whose connectors are
//! `V⁻¹V`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{EnumeratedGroup, GroupError};
use crate::metric::MetricSpace;
use crate::rational::{common_denominator, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("V-values are not a square symmetric matrix over {0} elements")]
    BadValues(usize),
    #[error("V-value d({i}, {j}) = {value} is negative")]
    Negative { i: usize, j: usize, value: Rational },
    #[error("bounded metric needs V-values at most 1, got d({i}, {j}) = {value}")]
    AboveOne { i: usize, j: usize, value: Rational },
    #[error("only {reached} of {order} elements are reachable through V⁻¹V; use the bounded variant")]
    Disconnected { reached: usize, order: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Prescribed pairwise values on a finite subset `V` of a group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VValues {
    /// Group element index of each member of `V`.
    pub elements: Vec<usize>,
    pub dist: Vec<Vec<Rational>>,
}

impl VValues {
    pub fn new(elements: Vec<usize>, dist: Vec<Vec<Rational>>) -> Result<Self, InvariantError> {
        let n = elements.len();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(InvariantError::BadValues(n));
        }
        for i in 0..n {
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(InvariantError::BadValues(n));
                }
                if dist[i][j].is_negative() {
                    return Err(InvariantError::Negative { i, j, value: dist[i][j] });
                }
            }
        }
        Ok(VValues { elements, dist })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Values of a left-invariant pseudometric restricted to `elements`.
    pub fn restrict(group: &EnumeratedGroup, metric: &InvariantMetric, elements: Vec<usize>) -> Self {
        let dist = elements
            .iter()
            .map(|&a| elements.iter().map(|&b| metric.dist(group, a, b)).collect())
            .collect();
        VValues { elements, dist }
    }
}

/// Edges `x → x·c` of weight `w(c)` for every connector `c ∈ V⁻¹V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedCayleyGraph {
    /// `(element, weight)`, sorted by element, identity excluded.
    pub connectors: Vec<(usize, Rational)>,
}

impl WeightedCayleyGraph {
    /// Connector `v_i⁻¹ v_j` with weight `d(v_i, v_j)`; duplicates keep the
    /// smallest weight.
    pub fn from_values(group: &EnumeratedGroup, values: &VValues) -> Self {
        let mut best: HashMap<usize, Rational> = HashMap::new();
        for (i, &a) in values.elements.iter().enumerate() {
            let ai = group.inv(a);
            for (j, &b) in values.elements.iter().enumerate() {
                let c = group.mul(ai, b);
                if c == group.identity() {
                    continue;
                }
                let w = values.dist[i][j];
                best.entry(c).and_modify(|x| *x = (*x).min(w)).or_insert(w);
            }
        }
        let mut connectors: Vec<(usize, Rational)> = best.into_iter().collect();
        connectors.sort();
        WeightedCayleyGraph { connectors }
    }

    pub fn from_connectors(group: &EnumeratedGroup, connectors: &[(usize, Rational)]) -> Self {
        let mut best: HashMap<usize, Rational> = HashMap::new();
        for &(c, w) in connectors {
            for x in [c, group.inv(c)] {
                if x != group.identity() {
                    best.entry(x).and_modify(|v| *v = (*v).min(w)).or_insert(w);
                }
            }
        }
        let mut connectors: Vec<(usize, Rational)> = best.into_iter().collect();
        connectors.sort();
        WeightedCayleyGraph { connectors }
    }

    /// Single-source shortest paths from the identity, over integer weights on
    /// a common denominator. With `cap`, any value reaching `cap` (and every
    /// unreachable element) is reported as `cap`.
    fn shortest_from_identity(&self, group: &EnumeratedGroup, cap: Option<Rational>) -> Vec<Option<Rational>> {
        let den = common_denominator(self.connectors.iter().map(|(_, w)| w).chain(cap.iter()));
        let scaled: Vec<(usize, i128)> = self
            .connectors
            .iter()
            .map(|&(c, w)| (c, w.scaled_to(den).expect("common denominator")))
            .collect();
        let limit = cap.map(|c| c.scaled_to(den).expect("common denominator"));
        let n = group.order();
        let mut dist: Vec<Option<i128>> = vec![None; n];
        let mut heap = BinaryHeap::from([Reverse((0i128, group.identity()))]);
        dist[group.identity()] = Some(0);
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist[x].is_some_and(|cur| d > cur) {
                continue;
            }
            for &(c, w) in &scaled {
                let nd = d + w;
                if limit.is_some_and(|l| nd >= l) {
                    continue;
                }
                let y = group.mul(x, c);
                if dist[y].is_none_or(|cur| nd < cur) {
                    dist[y] = Some(nd);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        dist.into_iter()
            .map(|d| match (d, cap) {
                (Some(v), _) => Some(Rational::new(v, den)),
                (None, Some(c)) => Some(c),
                (None, None) => None,
            })
            .collect()
    }
}

/// A left-invariant pseudometric, stored as distances from the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantMetric {
    pub from_identity: Vec<Rational>,
}

impl InvariantMetric {
    pub fn dist(&self, group: &EnumeratedGroup, x: usize, y: usize) -> Rational {
        self.from_identity[group.mul(group.inv(x), y)]
    }

    /// Whether distinct elements are always at positive distance.
    pub fn is_metric(&self) -> bool {
        self.from_identity.iter().skip(1).all(Rational::is_positive)
    }

    pub fn scaled(&self, factor: Rational) -> InvariantMetric {
        InvariantMetric { from_identity: self.from_identity.iter().map(|&v| v * factor).collect() }
    }

    /// The full distance matrix.
    pub fn matrix(&self, group: &EnumeratedGroup) -> Vec<Vec<Rational>> {
        let n = group.order();
        (0..n).map(|x| (0..n).map(|y| self.dist(group, x, y)).collect()).collect()
    }

    /// Checks symmetry `dist(c) = dist(c⁻¹)`, `dist(e) = 0` and the triangle
    /// inequality `dist(ab) ≤ dist(a) + dist(b)` over all pairs.
    pub fn check(&self, group: &EnumeratedGroup) -> Result<(), String> {
        if !self.from_identity[group.identity()].is_zero() {
            return Err("nonzero value at the identity".into());
        }
        let n = group.order();
        for a in 0..n {
            if self.from_identity[a] != self.from_identity[group.inv(a)] || self.from_identity[a].is_negative() {
                return Err(format!("asymmetric or negative at element {a}"));
            }
            for b in 0..n {
                if self.from_identity[group.mul(a, b)] > self.from_identity[a] + self.from_identity[b] {
                    return Err(format!("triangle fails at elements {a}, {b}"));
                }
            }
        }
        Ok(())
    }
}

/// The largest left-invariant pseudometric `ρ` with `ρ(x, y) ≤ d(x, y)` on `V`.
pub fn max_invariant_pseudometric(group: &EnumeratedGroup, values: &VValues) -> Result<InvariantMetric, InvariantError> {
    let graph = WeightedCayleyGraph::from_values(group, values);
    let dist = graph.shortest_from_identity(group, None);
    let reached = dist.iter().filter(|d| d.is_some()).count();
    if reached < group.order() {
        return Err(InvariantError::Disconnected { reached, order: group.order() });
    }
    Ok(InvariantMetric { from_identity: dist.into_iter().map(|d| d.expect("reached")).collect() })
}

/// The largest left-invariant pseudometric bounded by one whose values on `V`
/// are at most `d`; elements not joined by `V⁻¹V`-paths are at distance 1.
pub fn max_bounded_metric(group: &EnumeratedGroup, values: &VValues) -> Result<InvariantMetric, InvariantError> {
    for (i, row) in values.dist.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if value > Rational::one() {
                return Err(InvariantError::AboveOne { i, j, value });
            }
        }
    }
    let graph = WeightedCayleyGraph::from_values(group, values);
    Ok(bounded_path_metric(group, &graph))
}

/// `min(1, path metric)` of a weighted Cayley graph.
pub fn bounded_path_metric(group: &EnumeratedGroup, graph: &WeightedCayleyGraph) -> InvariantMetric {
    let dist = graph.shortest_from_identity(group, Some(Rational::one()));
    InvariantMetric { from_identity: dist.into_iter().map(|d| d.expect("capped")).collect() }
}

/// A left-invariant pseudometric on `Q/H`, indexed by cosets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMetric {
    /// Left cosets `xH`, the first one being `H`.
    pub cosets: Vec<Vec<usize>>,
    /// Coset index of every element.
    pub label: Vec<usize>,
    /// `\barρ(H, C)` for every coset `C`.
    pub from_identity: Vec<Rational>,
}

impl QuotientMetric {
    pub fn dist(&self, group: &EnumeratedGroup, a: usize, b: usize) -> Rational {
        let (x, y) = (self.cosets[a][0], self.cosets[b][0]);
        self.from_identity[self.label[group.mul(group.inv(x), y)]]
    }

    /// `\barρ(π x, π y)` for group elements `x`, `y`.
    pub fn dist_of_elements(&self, group: &EnumeratedGroup, x: usize, y: usize) -> Rational {
        self.from_identity[self.label[group.mul(group.inv(x), y)]]
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }
}

/// `\barρ(xH, yH) = min over h₁, h₂ ∈ H of ρ(xh₁, yh₂)`; `H` must be normal.
pub fn quotient_pseudometric(
    group: &EnumeratedGroup,
    rho: &InvariantMetric,
    h: &[usize],
) -> Result<QuotientMetric, InvariantError> {
    group.check_normal(h)?;
    let (cosets, label) = group.left_cosets(h);
    let mut from_identity = vec![None::<Rational>; cosets.len()];
    for (x, &c) in label.iter().enumerate() {
        let v = rho.from_identity[x];
        if from_identity[c].is_none_or(|cur| v < cur) {
            from_identity[c] = Some(v);
        }
    }
    Ok(QuotientMetric {
        cosets,
        label,
        from_identity: from_identity.into_iter().map(|v| v.expect("nonempty coset")).collect(),
    })
}

/// Outcome of comparing distances on `V` before and after a quotient map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VIsometry {
    Certified { pairs: usize },
    Counterexample { i: usize, j: usize, upstairs: Rational, downstairs: Rational },
}

impl VIsometry {
    pub fn is_certified(&self) -> bool {
        matches!(self, VIsometry::Certified { .. })
    }
}

/// Checks `ρ_Q(π v_i, π v_j) = d(v_i, v_j)` for every pair, where `images[i] = π v_i`.
pub fn certify_v_isometry(
    group: &EnumeratedGroup,
    metric: &InvariantMetric,
    images: &[usize],
    upstairs: &[Vec<Rational>],
) -> VIsometry {
    let n = images.len();
    for i in 0..n {
        for j in 0..n {
            let down = metric.dist(group, images[i], images[j]);
            if down != upstairs[i][j] {
                return VIsometry::Counterexample { i, j, upstairs: upstairs[i][j], downstairs: down };
            }
        }
    }
    VIsometry::Certified { pairs: n * n }
}

/// A finite group with a left-invariant metric, scaled by a positive factor.
#[derive(Debug, Clone)]
pub struct GroupSpace {
    pub group: Arc<EnumeratedGroup>,
    pub metric: Arc<InvariantMetric>,
    pub scale: Rational,
    inverse: Arc<Vec<usize>>,
    scaled: Arc<Vec<Rational>>,
}

impl GroupSpace {
    pub fn new(group: Arc<EnumeratedGroup>, metric: Arc<InvariantMetric>, scale: Rational) -> Self {
        let inverse = Arc::new((0..group.order()).map(|x| group.inv(x)).collect());
        let scaled = Arc::new(metric.from_identity.iter().map(|v| *v * scale).collect());
        GroupSpace { group, metric, scale, inverse, scaled }
    }
}

impl MetricSpace for GroupSpace {
    fn len(&self) -> usize {
        self.group.order()
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        self.scaled[self.group.mul(self.inverse[i], j)]
    }

    fn is_pseudometric(&self) -> bool {
        !self.metric.is_metric()
    }

    fn diameter(&self) -> Rational {
        self.metric.from_identity.iter().copied().max().unwrap_or_default() * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::PermutationGroup;

    fn z4() -> EnumeratedGroup {
        PermutationGroup::cyclic(4).enumerate(10).unwrap()
    }

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    /// Element of Z/4 acting as rotation by `k`.
    fn rot(g: &EnumeratedGroup, k: usize) -> usize {
        (0..4).find(|&x| g.element(x).apply(0) == k).unwrap()
    }

    fn by_rotation(g: &EnumeratedGroup, m: &InvariantMetric) -> Vec<Rational> {
        (0..4).map(|k| m.from_identity[rot(g, k)]).collect()
    }

    fn z4_values(g: &EnumeratedGroup) -> VValues {
        VValues::new(vec![rot(g, 0), rot(g, 1)], vec![vec![r(0), r(1)], vec![r(1), r(0)]]).unwrap()
    }

    #[test]
    fn z4_word_metric() {
        let g = z4();
        let rho = max_invariant_pseudometric(&g, &z4_values(&g)).unwrap();
        assert_eq!(by_rotation(&g, &rho), vec![r(0), r(1), r(2), r(1)]);
        let bounded = max_bounded_metric(&g, &z4_values(&g)).unwrap();
        assert_eq!(by_rotation(&g, &bounded), vec![r(0), r(1), r(1), r(1)]);
    }

    #[test]
    fn discrete_values_on_whole_group() {
        let g = PermutationGroup::symmetric(3).enumerate(10).unwrap();
        let n = g.order();
        let dist = (0..n).map(|i| (0..n).map(|j| if i == j { r(0) } else { r(1) }).collect()).collect();
        let rho = max_invariant_pseudometric(&g, &VValues::new((0..n).collect(), dist).unwrap()).unwrap();
        assert!(rho.from_identity.iter().skip(1).all(|&v| v == r(1)));
    }

    #[test]
    fn trivial_v_is_disconnected_but_bounded_is_discrete() {
        let g = z4();
        let v = VValues::new(vec![0], vec![vec![r(0)]]).unwrap();
        assert!(matches!(max_invariant_pseudometric(&g, &v), Err(InvariantError::Disconnected { .. })));
        let b = max_bounded_metric(&g, &v).unwrap();
        assert_eq!(b.from_identity, vec![r(0), r(1), r(1), r(1)]);
        assert!(b.is_metric());
    }

    #[test]
    fn z4_quotient() {
        let g = z4();
        let rho = max_invariant_pseudometric(&g, &z4_values(&g)).unwrap();
        let h = g.subgroup(&[rot(&g, 2)]);
        let q = quotient_pseudometric(&g, &rho, &h).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.dist_of_elements(&g, rot(&g, 0), rot(&g, 1)), r(1));
        let same = quotient_pseudometric(&g, &rho, &[0]).unwrap();
        for x in 0..4 {
            assert_eq!(same.dist_of_elements(&g, 0, x), rho.from_identity[x]);
        }
        let all = quotient_pseudometric(&g, &rho, &(0..4).collect::<Vec<_>>()).unwrap();
        assert_eq!(all.from_identity, vec![r(0)]);
    }

    #[test]
    fn coarse_quotient_gives_counterexample() {
        let g = z4();
        let values = z4_values(&g);
        let rho = max_invariant_pseudometric(&g, &values).unwrap();
        assert!(certify_v_isometry(&g, &rho, &values.elements, &values.dist).is_certified());
        let collapsed = vec![values.elements[0], values.elements[0]];
        assert!(matches!(
            certify_v_isometry(&g, &rho, &collapsed, &values.dist),
            VIsometry::Counterexample { i: 0, j: 1, .. }
        ));
    }

    #[test]
    fn group_space_matches_matrix() {
        let g = Arc::new(z4());
        let rho = Arc::new(max_invariant_pseudometric(&g, &z4_values(&g)).unwrap());
        let space = GroupSpace::new(g.clone(), rho.clone(), Rational::new(1, 2));
        let m = rho.matrix(&g);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(space.dist(x, y), m[x][y] * Rational::new(1, 2));
            }
        }
        assert!(crate::metric::validate(&space).is_empty());
    }
}
