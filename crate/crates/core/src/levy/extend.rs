//! Extending a free isometric action of a finite group so that one new group
//! element approximates a prescribed partial isometry.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::EnumeratedGroup;
use crate::invariant::{certify_v_isometry, max_bounded_metric, GroupSpace, InvariantError, InvariantMetric, VIsometry, VValues};
use crate::levy::action::{ActionCertificate, ActionError, IsometricAction, PointAction, DEFAULT_EXHAUSTIVE_POINTS};
use crate::metric::{displaced_copy, katetov_extend, FiniteMetricSpace, KatetovFunction, MetricError, MetricSpace};
use crate::quotient::{finite_quotient_search, QuotientError, QuotientParams, SearchStats, Shape};
use crate::rational::Rational;
use crate::word::{FreeProduct, Homomorphism, Syllable, Word, WordError};

#[derive(Debug, Error)]
pub enum ExtendError {
    #[error("epsilon must be positive, got {0}")]
    Epsilon(Rational),
    #[error(transparent)]
    Metric(Box<MetricError>),
    #[error("input action: {0}")]
    Action(#[from] ActionError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("quotient search: {0}")]
    Quotient(#[from] QuotientError),
    #[error("target: {0}")]
    Target(String),
    #[error("space of {points} points exceeds the materialization cap {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("V elements {i} and {j} evaluate to points at distance zero; the action is not free")]
    Degenerate { i: usize, j: usize },
    #[error("pairs ({0}, {1}) and ({2}, {3}) of V share a connector but carry different values")]
    ConnectorConflict(usize, usize, usize, usize),
    #[error("least positive value {delta} needs radius {radius}, above the cap {cap}")]
    RadiusCap { delta: Rational, radius: usize, cap: usize },
    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

impl From<MetricError> for ExtendError {
    fn from(e: MetricError) -> Self {
        ExtendError::Metric(Box::new(e))
    }
}

/// `f` restricted to `X`: the ambient holds `X` as its first points and the
/// images `f(x_i)` at the listed indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialIsometry {
    pub ambient: FiniteMetricSpace,
    pub image: Vec<usize>,
}

impl PartialIsometry {
    pub fn check(&self, x: &FiniteMetricSpace) -> Result<(), ExtendError> {
        let n = x.len();
        if self.image.len() != n {
            return Err(ExtendError::Target(format!("{} images for {n} points", self.image.len())));
        }
        if self.ambient.len() < n {
            return Err(ExtendError::Target("ambient is smaller than the base space".into()));
        }
        let violations = crate::metric::validate(&self.ambient);
        if let Some(v) = violations.first() {
            return Err(ExtendError::Target(format!("ambient is not a (pseudo)metric: {v:?}")));
        }
        for i in 0..n {
            for j in 0..n {
                if self.ambient.dist(i, j) != x.dist(i, j) {
                    return Err(ExtendError::Target(format!("ambient disagrees with the base space at ({i}, {j})")));
                }
            }
        }
        crate::metric::PointedEmbedding::new(self.image.clone()).check(x, &self.ambient)?;
        Ok(())
    }
}

/// Recipes for targets built from the base space alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// A fresh isometric copy with every cross distance equal to `c`.
    Equilateral { c: Rational },
    /// A fresh copy with `d(x, f(y)) = d(x, y) + delta`.
    Offset { delta: Rational },
    /// `f(x_i) = x_{images[i]}`, which must be an isometry of the base space.
    Permutation { images: Vec<usize> },
    Explicit { ambient: FiniteMetricSpace, image: Vec<usize> },
}

impl TargetSpec {
    pub fn build(&self, x: &FiniteMetricSpace) -> Result<PartialIsometry, ExtendError> {
        let n = x.len();
        let copy_ids = |x: &FiniteMetricSpace| -> Vec<String> { (0..n).map(|i| format!("f({})", x.id(i))).collect() };
        let target = match self {
            TargetSpec::Equilateral { c } => {
                if !c.is_positive() || Rational::from(2) * *c < x.diameter() {
                    return Err(ExtendError::Target(format!("cross distance {c} must be positive and at least half the diameter")));
                }
                let ambient = x.extended(copy_ids(x), |_, _| *c, |a, b| x.dist(a, b), x.is_pseudometric());
                PartialIsometry { ambient, image: (n..2 * n).collect() }
            }
            TargetSpec::Offset { delta } => {
                let (ambient, image) = displaced_copy(x, &(0..n).collect::<Vec<_>>(), *delta)?;
                PartialIsometry { ambient, image }
            }
            TargetSpec::Permutation { images } => PartialIsometry { ambient: x.clone(), image: images.clone() },
            TargetSpec::Explicit { ambient, image } => PartialIsometry { ambient: ambient.clone(), image: image.clone() },
        };
        target.check(x)?;
        Ok(target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtendParams {
    pub quotient: QuotientParams,
    /// Largest radius `N` the quotient search may be asked for.
    pub radius_cap: usize,
    pub exhaustive_points: usize,
    pub materialize_cap: usize,
}

impl Default for ExtendParams {
    fn default() -> Self {
        ExtendParams {
            quotient: QuotientParams::default(),
            radius_cap: 12,
            exhaustive_points: DEFAULT_EXHAUSTIVE_POINTS,
            materialize_cap: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSummary {
    pub shape: Shape,
    pub attempt: usize,
    pub order: usize,
    pub degree: usize,
    pub stats: SearchStats,
}

/// Everything checked along the way, in serializable form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub epsilon: Rational,
    pub displacement: Option<Rational>,
    /// Factor applied to `X ∪ f'(X)` to bring its diameter to 1.
    pub rescale: Rational,
    pub orbits: usize,
    pub v_words: Vec<String>,
    pub delta: Rational,
    pub radius: usize,
    pub quotient: QuotientSummary,
    pub v_isometry: VIsometry,
    pub input_action: ActionCertificate,
    pub output_action: ActionCertificate,
    pub g_injective: bool,
    pub extension_checks: u64,
    pub embedding_checks: u64,
    /// `d(f̃ x, f x)` for each `x`, measured in the amalgam of `Y` and the ambient.
    pub approximation: Vec<Rational>,
}

/// The extended action of `G̃ = Q` on `Y = (Q, scale · ρ)` by left translation.
#[derive(Debug, Clone)]
pub struct Extension {
    pub group: Arc<EnumeratedGroup>,
    pub metric: Arc<InvariantMetric>,
    pub scale: Rational,
    pub hom: Homomorphism,
    /// `Q`-index of each element of the old group.
    pub g_embedding: Vec<usize>,
    /// `Q`-index of each point of the old space.
    pub x_embedding: Vec<usize>,
    pub f_tilde: usize,
    /// The ambient after displacement, holding `X`, `f(X)` and `f'(X)`.
    pub ambient: FiniteMetricSpace,
    pub report: ExtensionReport,
}

impl Extension {
    pub fn space(&self) -> GroupSpace {
        GroupSpace::new(self.group.clone(), self.metric.clone(), self.scale)
    }

    pub fn action(&self) -> IsometricAction {
        IsometricAction::new(self.group.clone(), Arc::new(self.space()), PointAction::LeftRegular).expect("regular action")
    }
}

/// Runs the extension pipeline and checks every postcondition exactly.
pub fn extend_action_approximating(
    act: &IsometricAction,
    target: &PartialIsometry,
    eps: Rational,
    params: &ExtendParams,
) -> Result<Extension, ExtendError> {
    if !eps.is_positive() {
        return Err(ExtendError::Epsilon(eps));
    }
    let nx = act.points();
    if nx > params.materialize_cap {
        return Err(ExtendError::TooLarge { points: nx, cap: params.materialize_cap });
    }
    let x = FiniteMetricSpace::from_space(&*act.space);
    target.check(&x)?;
    let input_action = act.certify(true, params.exhaustive_points)?;
    let g = act.group.clone();

    let z = &target.ambient;
    let meets = target.image.iter().any(|&fx| (0..nx).any(|y| z.dist(fx, y).is_zero()));
    let (ambient, fprime, displacement) = if meets {
        let pts: Vec<usize> = (0..nx).chain(target.image.iter().copied()).collect();
        let minpos = z.restrict(&pts).min_positive_distance().unwrap_or(Rational::one());
        let delta = (eps / Rational::from(2)).min(minpos / Rational::from(2)).min(Rational::new(1, 4));
        let (amb, idx) = displaced_copy(z, &target.image, delta)?;
        (amb, idx, Some(delta))
    } else {
        (z.clone(), target.image.clone(), None)
    };

    let w_idx: Vec<usize> = (0..nx).chain(fprime.iter().copied()).collect();
    let w = ambient.restrict(&w_idx);
    let diam = w.diameter();
    let rescale = diam.recip();
    let ws = w.rescaled(rescale)?;
    let with_xi = katetov_extend(&ws, &KatetovFunction::constant(ws.len(), Rational::one()), "xi")?;
    debug_assert_eq!(with_xi.len(), ws.len() + 1);

    let orbits = act.orbits();
    let mut decomposition: Vec<Option<(usize, usize)>> = vec![None; nx];
    for (theta, orbit) in orbits.iter().enumerate() {
        let rep = orbit[0];
        for h in 0..g.order() {
            let y = act.act(h, rep);
            if decomposition[y].is_some() {
                return Err(ActionError::NotFree { g: h, x: rep }.into());
            }
            decomposition[y] = Some((h, theta));
        }
    }
    let fp = FreeProduct::new(g.clone(), orbits.len(), true);
    let mut v = Vec::with_capacity(2 * nx);
    for prefix in [None, Some(Syllable::Z(1))] {
        for d in &decomposition {
            let (h, theta) = d.expect("every point lies in an orbit");
            let mut raw: Vec<Syllable> = prefix.iter().cloned().collect();
            raw.push(Syllable::G(h));
            raw.push(Syllable::Free(vec![(theta as u32, 1)]));
            v.push(fp.normal_form(&Word(raw)));
        }
    }

    let n_v = v.len();
    let d_xi: Vec<Vec<Rational>> = (0..n_v)
        .map(|i| (0..n_v).map(|j| ws.dist(i, j).min(Rational::one())).collect())
        .collect();
    for i in 0..n_v {
        for j in (i + 1)..n_v {
            if d_xi[i][j].is_zero() {
                return Err(ExtendError::Degenerate { i, j });
            }
        }
    }
    let mut connectors: HashMap<Word, (usize, usize)> = HashMap::new();
    for i in 0..n_v {
        let vi = fp.inverse(&v[i]);
        for j in 0..n_v {
            let c = fp.mul(&vi, &v[j]);
            match connectors.get(&c) {
                Some(&(k, l)) if d_xi[k][l] != d_xi[i][j] => return Err(ExtendError::ConnectorConflict(k, l, i, j)),
                Some(_) => {}
                None => {
                    connectors.insert(c, (i, j));
                }
            }
        }
    }

    let delta = (0..n_v)
        .flat_map(|i| (0..n_v).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| d_xi[i][j])
        .min()
        .unwrap_or(Rational::one());
    let radius = 2 + delta.recip().ceil() as usize;
    if radius > params.radius_cap {
        return Err(ExtendError::RadiusCap { delta, radius, cap: params.radius_cap });
    }

    let quotient = finite_quotient_search(&fp, &v, radius, &params.quotient)?;
    let q = Arc::new(quotient.q);
    let values = VValues::new(quotient.v_images.clone(), d_xi.clone())?;
    let rho = Arc::new(max_bounded_metric(&q, &values)?);
    let v_isometry = certify_v_isometry(&q, &rho, &quotient.v_images, &d_xi);
    if !v_isometry.is_certified() {
        return Err(ExtendError::Postcondition(format!("V-isometry fails: {v_isometry:?}")));
    }

    let g_embedding = quotient.g_images.clone();
    let mut sorted = g_embedding.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let g_injective = sorted.len() == g_embedding.len();
    if !g_injective {
        return Err(ExtendError::Postcondition("G does not embed in the quotient".into()));
    }
    let x_embedding: Vec<usize> = quotient.v_images[..nx].to_vec();
    let f_tilde = q.index_of(&quotient.hom.evaluate(&Word::t(1))).expect("t maps into Q");

    let y = GroupSpace::new(q.clone(), rho.clone(), diam);
    let mut embedding_checks = 0u64;
    for i in 0..n_v {
        for j in 0..n_v {
            embedding_checks += 1;
            let (a, b) = (quotient.v_images[i], quotient.v_images[j]);
            if y.dist(a, b) != w.dist(i, j) {
                return Err(ExtendError::Postcondition(format!("embedding of X ∪ f'(X) distorts pair ({i}, {j})")));
            }
        }
    }
    let mut extension_checks = 0u64;
    for h in 0..g.order() {
        for p in 0..nx {
            extension_checks += 1;
            if q.mul(g_embedding[h], x_embedding[p]) != x_embedding[act.act(h, p)] {
                return Err(ExtendError::Postcondition(format!("extended action differs on element {h}, point {p}")));
            }
        }
    }
    let mut approximation = Vec::with_capacity(nx);
    for p in 0..nx {
        let moved = q.mul(f_tilde, x_embedding[p]);
        if moved != quotient.v_images[nx + p] {
            return Err(ExtendError::Postcondition(format!("f̃ does not send point {p} to the image of f'({p})")));
        }
        let d = (0..n_v)
            .map(|k| y.dist(moved, quotient.v_images[k]) + ambient.dist(w_idx[k], target.image[p]))
            .min()
            .expect("nonempty glue");
        if d >= eps {
            return Err(ExtendError::Postcondition(format!("d(f̃x, fx) = {d} is not below {eps} at point {p}")));
        }
        approximation.push(d);
    }

    let out_action = IsometricAction::new(q.clone(), Arc::new(y), PointAction::LeftRegular)?;
    let output_action = out_action
        .certify(true, params.exhaustive_points)
        .map_err(|e| ExtendError::Postcondition(format!("extended action: {e}")))?;

    let report = ExtensionReport {
        epsilon: eps,
        displacement,
        rescale,
        orbits: orbits.len(),
        v_words: v.iter().map(Word::to_string).collect(),
        delta,
        radius,
        quotient: QuotientSummary {
            shape: quotient.shape,
            attempt: quotient.attempt,
            order: q.order(),
            degree: q.degree(),
            stats: quotient.stats.clone(),
        },
        v_isometry,
        input_action,
        output_action,
        g_injective,
        extension_checks,
        embedding_checks,
        approximation,
    };
    Ok(Extension {
        group: q,
        metric: rho,
        scale: diam,
        hom: quotient.hom,
        g_embedding,
        x_embedding,
        f_tilde,
        ambient,
        report,
    })
}
