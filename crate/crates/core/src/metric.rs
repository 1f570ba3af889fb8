//! Finite metric and pseudometric spaces with exact rational distances.
//!
//! Everything geometric in the crate bottoms out here: validation of the
//! metric axioms, path (pseudo)metrics of weighted graphs, closed and open
//! neighbourhoods, one-point Katetov extensions, free amalgams, displaced
//! copies and rescaling.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// Read access to a finite (pseudo)metric space whose points are `0..len()`.
///
/// Implemented by the explicit [`FiniteMetricSpace`] and by the implicit
/// spaces built elsewhere in the crate (groups with an invariant metric,
/// glued spaces).
pub trait MetricSpace {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> Rational;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether distinct points may sit at distance zero.
    fn is_pseudometric(&self) -> bool {
        false
    }

    fn diameter(&self) -> Rational {
        let n = self.len();
        let mut best = Rational::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Smallest strictly positive distance, if any.
    fn min_positive_distance(&self) -> Option<Rational> {
        let n = self.len();
        let mut best: Option<Rational> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                if d.is_positive() && best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("distance matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("{ids} point ids for {points} points")]
    IdCount { ids: usize, points: usize },
    #[error("duplicate point id {0:?}")]
    DuplicateId(String),
    #[error("graph is disconnected; components: {components:?}")]
    Disconnected { components: Vec<Vec<String>> },
    #[error("negative edge weight {weight} on edge ({u}, {v})")]
    NegativeWeight { u: usize, v: usize, weight: Rational },
    #[error("Katetov condition fails on pair ({i}, {j}): f = ({fi}, {fj}), d = {d}")]
    Katetov { i: usize, j: usize, fi: Rational, fj: Rational, d: Rational },
    #[error("Katetov function has {values} values for a space of {points} points")]
    KatetovArity { values: usize, points: usize },
    #[error("embedding is not distance-preserving on ({i}, {j}): {source_dist} vs {target_dist}")]
    NotDistancePreserving { i: usize, j: usize, source_dist: Rational, target_dist: Rational },
    #[error("embedding is not injective: points {0} and {1} share an image")]
    NotInjective(usize, usize),
    #[error("point index {index} out of range for a space of {len} points")]
    OutOfRange { index: usize, len: usize },
    #[error("cannot glue over an empty subspace")]
    EmptyGlue,
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: Rational },
}

/// Points with string ids and a dense symmetric matrix of distances.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::SpaceJson", into = "crate::io::SpaceJson")]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    dist: Vec<Rational>,
    pseudometric: bool,
}

impl std::fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteMetricSpace")
            .field("ids", &self.ids)
            .field("pseudometric", &self.pseudometric)
            .field("dist", &self.matrix())
            .finish()
    }
}

impl FiniteMetricSpace {
    /// Builds a space from a square matrix; the axioms are not checked here,
    /// see [`validate`].
    pub fn new(ids: Vec<String>, matrix: Vec<Vec<Rational>>, pseudometric: bool) -> Result<Self, MetricError> {
        let n = matrix.len();
        if ids.len() != n {
            return Err(MetricError::IdCount { ids: ids.len(), points: n });
        }
        check_unique(&ids)?;
        let mut dist = Vec::with_capacity(n * n);
        for (row, r) in matrix.into_iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { rows: n, row, len: r.len() });
            }
            dist.extend(r);
        }
        Ok(FiniteMetricSpace { ids, dist, pseudometric })
    }

    /// Builds a space of `ids.len()` points from a distance function.
    pub fn from_fn(ids: Vec<String>, pseudometric: bool, f: impl Fn(usize, usize) -> Rational) -> Self {
        let n = ids.len();
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(if i == j { Rational::zero() } else { f(i, j) });
            }
        }
        FiniteMetricSpace { ids, dist, pseudometric }
    }

    /// Materializes any [`MetricSpace`], naming points `p0, p1, ...`.
    pub fn from_space<M: MetricSpace + ?Sized>(space: &M) -> Self {
        let ids = (0..space.len()).map(|i| format!("p{i}")).collect();
        FiniteMetricSpace::from_fn(ids, space.is_pseudometric(), |i, j| space.dist(i, j))
    }

    pub fn singleton(id: impl Into<String>) -> Self {
        FiniteMetricSpace { ids: vec![id.into()], dist: vec![Rational::zero()], pseudometric: false }
    }

    /// All distinct points at the same distance `d`.
    pub fn equilateral(n: usize, d: Rational) -> Self {
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        FiniteMetricSpace::from_fn(ids, false, |_, _| d)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|p| p == id)
    }

    pub fn set_pseudometric(&mut self, flag: bool) {
        self.pseudometric = flag;
    }

    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.ids.len();
        (0..n).map(|i| self.dist[i * n..(i + 1) * n].to_vec()).collect()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        let n = self.ids.len();
        &self.dist[i * n..(i + 1) * n]
    }

    /// Subspace on `points`, in the given order.
    pub fn restrict(&self, points: &[usize]) -> FiniteMetricSpace {
        let ids = points.iter().map(|&p| self.ids[p].clone()).collect();
        FiniteMetricSpace::from_fn(ids, self.pseudometric, |i, j| self.dist(points[i], points[j]))
    }

    /// Multiplies every distance by `factor > 0`.
    pub fn rescaled(&self, factor: Rational) -> Result<FiniteMetricSpace, MetricError> {
        if !factor.is_positive() {
            return Err(MetricError::NonPositive { what: "scale factor", value: factor });
        }
        Ok(FiniteMetricSpace {
            ids: self.ids.clone(),
            dist: self.dist.iter().map(|&d| d * factor).collect(),
            pseudometric: self.pseudometric,
        })
    }

    /// Appends points with the given distances to existing points and among themselves.
    pub(crate) fn extended(
        &self,
        new_ids: Vec<String>,
        to_old: impl Fn(usize, usize) -> Rational,
        among_new: impl Fn(usize, usize) -> Rational,
        pseudometric: bool,
    ) -> FiniteMetricSpace {
        let old = self.len();
        let mut ids = self.ids.clone();
        ids.extend(new_ids);
        FiniteMetricSpace::from_fn(ids, pseudometric, |i, j| match (i < old, j < old) {
            (true, true) => self.dist(i, j),
            (false, true) => to_old(i - old, j),
            (true, false) => to_old(j - old, i),
            (false, false) => among_new(i - old, j - old),
        })
    }
}

impl MetricSpace for FiniteMetricSpace {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        self.dist[i * self.ids.len() + j]
    }

    fn is_pseudometric(&self) -> bool {
        self.pseudometric
    }
}

fn check_unique(ids: &[String]) -> Result<(), MetricError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(MetricError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn fresh_id(taken: &HashSet<&str>, base: &str) -> String {
    let mut id = format!("{base}'");
    while taken.contains(id.as_str()) {
        id.push('\'');
    }
    id
}

/// A failure of one of the (pseudo)metric axioms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal { i: usize, value: Rational },
    Negative { i: usize, j: usize, value: Rational },
    Asymmetric { i: usize, j: usize, forward: Rational, backward: Rational },
    /// `d(i, k) > d(i, j) + d(j, k)`.
    Triangle { i: usize, j: usize, k: usize },
    /// Distinct points at distance zero in a space flagged as a metric.
    ZeroDistance { i: usize, j: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonzeroDiagonal { i, value } => write!(f, "d({i}, {i}) = {value} is not zero"),
            Violation::Negative { i, j, value } => write!(f, "d({i}, {j}) = {value} is negative"),
            Violation::Asymmetric { i, j, forward, backward } => {
                write!(f, "d({i}, {j}) = {forward} but d({j}, {i}) = {backward}")
            }
            Violation::Triangle { i, j, k } => write!(f, "triangle ({i}, {j}, {k}): d({i}, {k}) > d({i}, {j}) + d({j}, {k})"),
            Violation::ZeroDistance { i, j } => write!(f, "distinct points {i} and {j} at distance zero"),
        }
    }
}

/// Lists every axiom violation; an empty result means the space is valid.
pub fn validate<M: MetricSpace + ?Sized>(space: &M) -> Vec<Violation> {
    let n = space.len();
    let mut out = Vec::new();
    for i in 0..n {
        let d = space.dist(i, i);
        if !d.is_zero() {
            out.push(Violation::NonzeroDiagonal { i, value: d });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (space.dist(i, j), space.dist(j, i));
            if a.is_negative() {
                out.push(Violation::Negative { i, j, value: a });
            }
            if b.is_negative() {
                out.push(Violation::Negative { i: j, j: i, value: b });
            }
            if a != b {
                out.push(Violation::Asymmetric { i, j, forward: a, backward: b });
            }
            if a.is_zero() && !space.is_pseudometric() {
                out.push(Violation::ZeroDistance { i, j });
            }
        }
    }
    let dist: Vec<Rational> = (0..n * n).map(|t| space.dist(t / n, t % n)).collect();
    out.extend(triangle_violations(&dist, n));
    out
}

/// Violations `d(i, k) > d(i, j) + d(j, k)` with `i < k`, in lexicographic order.
fn triangle_violations(dist: &[Rational], n: usize) -> Vec<Violation> {
    let scaled = integer_matrix(dist);
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut found = Vec::new();
            for k in (i + 1)..n {
                for j in (0..n).filter(|&j| j != i && j != k) {
                    let broken = match &scaled {
                        Some(m) => m[i * n + k] > m[i * n + j] + m[j * n + k],
                        None => dist[i * n + k] > dist[i * n + j] + dist[j * n + k],
                    };
                    if broken {
                        found.push(Violation::Triangle { i, j, k });
                    }
                }
            }
            found
        })
        .collect()
}

/// The matrix over a common denominator, when every entry fits in 64 bits.
fn integer_matrix(dist: &[Rational]) -> Option<Vec<i128>> {
    let mut den: i128 = 1;
    for d in dist {
        let g = num_integer::Integer::gcd(&den, &d.denom());
        den = den.checked_mul(d.denom() / g)?;
    }
    dist.iter()
        .map(|d| d.numer().checked_mul(den / d.denom()).filter(|v| v.unsigned_abs() < 1 << 62))
        .collect()
}

/// An undirected graph with nonnegative rational edge weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub ids: Vec<String>,
    pub edges: Vec<(usize, usize, Rational)>,
}

impl WeightedGraph {
    pub fn new(ids: Vec<String>) -> Self {
        WeightedGraph { ids, edges: Vec::new() }
    }

    pub fn with_vertices(n: usize) -> Self {
        WeightedGraph::new((0..n).map(|i| format!("v{i}")).collect())
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: Rational) -> &mut Self {
        self.edges.push((u, v, w));
        self
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.ids.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, _) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut stack = vec![s];
            let mut members = Vec::new();
            comp[s] = c;
            while let Some(x) = stack.pop() {
                members.push(x);
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = c;
                        stack.push(y);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Shortest-path (pseudo)metric of a connected weighted graph.
///
/// The empty path gives distance zero from a vertex to itself. The result is
/// flagged as a pseudometric when some edge between distinct vertices has
/// weight zero.
pub fn path_metric(graph: &WeightedGraph) -> Result<FiniteMetricSpace, MetricError> {
    let n = graph.ids.len();
    check_unique(&graph.ids)?;
    for &(u, v, w) in &graph.edges {
        for x in [u, v] {
            if x >= n {
                return Err(MetricError::OutOfRange { index: x, len: n });
            }
        }
        if w.is_negative() {
            return Err(MetricError::NegativeWeight { u, v, weight: w });
        }
    }
    let comps = graph.components();
    if comps.len() > 1 {
        return Err(MetricError::Disconnected {
            components: comps
                .iter()
                .map(|c| c.iter().map(|&i| graph.ids[i].clone()).collect())
                .collect(),
        });
    }
    // Floyd-Warshall over Option<Rational>; None is infinity.
    let mut d: Vec<Option<Rational>> = vec![None; n * n];
    for i in 0..n {
        d[i * n + i] = Some(Rational::zero());
    }
    let mut pseudo = false;
    for &(u, v, w) in &graph.edges {
        if u == v {
            continue;
        }
        if w.is_zero() {
            pseudo = true;
        }
        for (a, b) in [(u, v), (v, u)] {
            let slot = &mut d[a * n + b];
            if slot.is_none_or(|cur| w < cur) {
                *slot = Some(w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i * n + k] else { continue };
            for j in 0..n {
                if let Some(dkj) = d[k * n + j] {
                    let via = dik + dkj;
                    let slot = &mut d[i * n + j];
                    if slot.is_none_or(|cur| via < cur) {
                        *slot = Some(via);
                    }
                }
            }
        }
    }
    Ok(FiniteMetricSpace::from_fn(graph.ids.clone(), pseudo, |i, j| {
        d[i * n + j].expect("connected graph")
    }))
}

/// Whether `A_ε` is `{x : d(x, A) ≤ ε}` or `{x : d(x, A) < ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    #[default]
    Closed,
    Open,
}

impl Neighborhood {
    pub fn contains(self, distance: Rational, eps: Rational) -> bool {
        match self {
            Neighborhood::Closed => distance <= eps,
            Neighborhood::Open => distance < eps,
        }
    }
}

/// Distance from point `x` to a subset (`None` for the empty subset).
pub fn distance_to_set<M: MetricSpace + ?Sized>(space: &M, x: usize, subset: &[usize]) -> Option<Rational> {
    subset.iter().map(|&a| space.dist(x, a)).min()
}

/// The ε-neighbourhood of `subset`, as sorted point indices.
pub fn epsilon_neighborhood<M: MetricSpace + ?Sized>(
    space: &M,
    subset: &[usize],
    eps: Rational,
    kind: Neighborhood,
) -> Vec<usize> {
    if subset.is_empty() {
        return Vec::new();
    }
    (0..space.len())
        .filter(|&x| kind.contains(distance_to_set(space, x, subset).expect("nonempty"), eps))
        .collect()
}

/// Prescribed distances from one new point to every point of a base space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KatetovFunction {
    pub values: Vec<Rational>,
}

impl KatetovFunction {
    pub fn new(values: Vec<Rational>) -> Self {
        KatetovFunction { values }
    }

    pub fn constant(n: usize, value: Rational) -> Self {
        KatetovFunction { values: vec![value; n] }
    }

    /// `f(x) = d(x, p) + offset`.
    pub fn distance_from<M: MetricSpace + ?Sized>(space: &M, p: usize, offset: Rational) -> Self {
        KatetovFunction { values: (0..space.len()).map(|x| space.dist(x, p) + offset).collect() }
    }

    /// Checks `|f(x) - f(y)| ≤ d(x, y) ≤ f(x) + f(y)` for every pair and `f ≥ 0`.
    pub fn check<M: MetricSpace + ?Sized>(&self, space: &M) -> Result<(), MetricError> {
        let n = space.len();
        if self.values.len() != n {
            return Err(MetricError::KatetovArity { values: self.values.len(), points: n });
        }
        for i in 0..n {
            let fi = self.values[i];
            if fi.is_negative() {
                return Err(MetricError::Katetov { i, j: i, fi, fj: fi, d: Rational::zero() });
            }
            for j in (i + 1)..n {
                let (fj, d) = (self.values[j], space.dist(i, j));
                if (fi - fj).abs() > d || d > fi + fj {
                    return Err(MetricError::Katetov { i, j, fi, fj, d });
                }
            }
        }
        Ok(())
    }
}

/// Adds one point at distance `f(x)` from each `x`.
///
/// A zero value makes the new point a twin of an existing one; the result is
/// then flagged as a pseudometric.
pub fn katetov_extend(
    space: &FiniteMetricSpace,
    f: &KatetovFunction,
    new_id: impl Into<String>,
) -> Result<FiniteMetricSpace, MetricError> {
    f.check(space)?;
    let new_id = new_id.into();
    if space.index_of(&new_id).is_some() {
        return Err(MetricError::DuplicateId(new_id));
    }
    let pseudo = space.is_pseudometric() || f.values.iter().any(Rational::is_zero);
    Ok(space.extended(vec![new_id], |_, x| f.values[x], |_, _| Rational::zero(), pseudo))
}

/// An injective point map `source → target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointedEmbedding {
    pub map: Vec<usize>,
}

impl PointedEmbedding {
    pub fn new(map: Vec<usize>) -> Self {
        PointedEmbedding { map }
    }

    pub fn identity(n: usize) -> Self {
        PointedEmbedding { map: (0..n).collect() }
    }

    /// Checks injectivity and exact preservation of every distance.
    pub fn check<S, T>(&self, source: &S, target: &T) -> Result<(), MetricError>
    where
        S: MetricSpace + ?Sized,
        T: MetricSpace + ?Sized,
    {
        let n = source.len();
        if self.map.len() != n {
            return Err(MetricError::IdCount { ids: self.map.len(), points: n });
        }
        for &m in &self.map {
            if m >= target.len() {
                return Err(MetricError::OutOfRange { index: m, len: target.len() });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.map[i] == self.map[j] {
                    return Err(MetricError::NotInjective(i, j));
                }
                let (s, t) = (source.dist(i, j), target.dist(self.map[i], self.map[j]));
                if s != t {
                    return Err(MetricError::NotDistancePreserving { i, j, source_dist: s, target_dist: t });
                }
            }
        }
        Ok(())
    }

    pub fn compose(&self, then: &PointedEmbedding) -> PointedEmbedding {
        PointedEmbedding { map: self.map.iter().map(|&i| then.map[i]).collect() }
    }
}

/// Result of gluing two spaces along a common subspace.
#[derive(Debug, Clone)]
pub struct Amalgam {
    pub space: FiniteMetricSpace,
    /// Index in `space` of each point of the first input.
    pub from_y: Vec<usize>,
    /// Index in `space` of each point of the second input.
    pub from_z: Vec<usize>,
}

/// Free amalgam of `y` and `z` over a common subspace `x`.
///
/// Points of `z` hit by `into_z` are identified with their partners in `y`;
/// the remaining cross distances are `min over x of d(y, x) + d(x, z)`.
pub fn amalgamate(
    y: &FiniteMetricSpace,
    z: &FiniteMetricSpace,
    x: &FiniteMetricSpace,
    into_y: &PointedEmbedding,
    into_z: &PointedEmbedding,
) -> Result<Amalgam, MetricError> {
    if x.is_empty() {
        return Err(MetricError::EmptyGlue);
    }
    into_y.check(x, y)?;
    into_z.check(x, z)?;
    let ny = y.len();
    let mut from_z = vec![usize::MAX; z.len()];
    for (k, &zi) in into_z.map.iter().enumerate() {
        from_z[zi] = into_y.map[k];
    }
    let taken: HashSet<&str> = y.ids().iter().map(String::as_str).collect();
    let mut new_ids = Vec::new();
    let mut new_of_z = Vec::new();
    for (zi, slot) in from_z.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = ny + new_ids.len();
            let id = z.id(zi);
            let id = if taken.contains(id) || new_ids.iter().any(|s: &String| s == id) {
                let mut all = taken.clone();
                all.extend(new_ids.iter().map(String::as_str));
                fresh_id(&all, id)
            } else {
                id.to_string()
            };
            new_ids.push(id);
            new_of_z.push(zi);
        }
    }
    let cross = |yi: usize, zi: usize| -> Rational {
        (0..x.len())
            .map(|k| y.dist(yi, into_y.map[k]) + z.dist(into_z.map[k], zi))
            .min()
            .expect("nonempty glue")
    };
    let pseudo = y.is_pseudometric() || z.is_pseudometric();
    let space = y.extended(
        new_ids,
        |a, yi| cross(yi, new_of_z[a]),
        |a, b| z.dist(new_of_z[a], new_of_z[b]),
        pseudo,
    );
    Ok(Amalgam { space, from_y: (0..ny).collect(), from_z })
}

/// Adds a copy `s'` of every `s` in `subset`, keeping distances inside the
/// copy and pushing every copy `delta` further from the original points.
///
/// Returns the enlarged space and the index of each copy.
pub fn displaced_copy(
    space: &FiniteMetricSpace,
    subset: &[usize],
    delta: Rational,
) -> Result<(FiniteMetricSpace, Vec<usize>), MetricError> {
    if !delta.is_positive() {
        return Err(MetricError::NonPositive { what: "displacement", value: delta });
    }
    if subset.is_empty() {
        return Err(MetricError::EmptySubset);
    }
    let n = space.len();
    for &s in subset {
        if s >= n {
            return Err(MetricError::OutOfRange { index: s, len: n });
        }
    }
    let mut new_ids: Vec<String> = Vec::with_capacity(subset.len());
    for &s in subset {
        let mut taken: HashSet<&str> = space.ids().iter().map(String::as_str).collect();
        taken.extend(new_ids.iter().map(String::as_str));
        let id = fresh_id(&taken, space.id(s));
        new_ids.push(id);
    }
    let out = space.extended(
        new_ids,
        |a, z| space.dist(subset[a], z) + delta,
        |a, b| space.dist(subset[a], subset[b]),
        space.is_pseudometric(),
    );
    Ok((out, (n..n + subset.len()).collect()))
}
