//! Stage-by-stage construction of a chain `G_1 ≤ G_2 ≤ …` of finite groups
//! acting freely by isometries on growing finite spaces `X_1 ⊆ X_2 ⊆ …`.
//!
//! Each stage records the growth exponent `m_n`, the extension certificates,
//! the embeddings into the next stage and concentration rows for the implicit
//! power `X_n^{m_n}`. A bundle of stage records is enough to resume a run.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concentration::{exponent_footnote, member_row, ConcentrationError, FamilyMember, LevyRow};
use crate::group::{GroupError, PermutationGroup};
use crate::hamming::HammingPower;
use crate::invariant::{GroupSpace, InvariantMetric};
use crate::levy::action::{ActionError, IsometricAction, PointAction};
use crate::levy::extend::{extend_action_approximating, ExtendError, ExtendParams, ExtensionReport, TargetSpec};
use crate::metric::{FiniteMetricSpace, MetricSpace};
use crate::perm::Permutation;
use crate::rational::Rational;
use crate::seeds::derive_seed;

pub const BUNDLE_FORMAT: &str = "urysohn-chain/1";

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("stage {stage}: {source}")]
    Extend { stage: usize, source: ExtendError },
    #[error(transparent)]
    Concentration(#[from] ConcentrationError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("truncation of {points} points exceeds the cap {cap}")]
    TruncationCap { points: usize, cap: usize },
    #[error("invalid bundle: {0}")]
    Bundle(String),
    #[error("invariant violated at stage {stage}: {what}")]
    Invariant { stage: usize, what: String },
}

impl ChainError {
    /// Whether the failure is a quotient search that found nothing within its caps.
    pub fn is_search_failure(&self) -> bool {
        matches!(self, ChainError::Extend { source: ExtendError::Quotient(_) | ExtendError::RadiusCap { .. }, .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainMode {
    /// Extend the current space directly.
    Dense,
    /// Pass through the power `X_n^{m_n}` with `m_n ≥ 8 a_n² n` before extending.
    Levy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub seed: u64,
    pub stages: usize,
    pub mode: ChainMode,
    /// Tuples of `X_n^{m_n}` within this many coordinates of a constant tuple are materialized.
    pub truncation_radius: usize,
    pub truncation_cap: usize,
    /// Cross distance of the first target; drawn from the seed when absent.
    pub first_target: Option<Rational>,
    pub extend: ExtendParams,
    pub eps_grid: Vec<Rational>,
    pub exhaustive_cap: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            seed: 0,
            stages: 2,
            mode: ChainMode::Levy,
            truncation_radius: 0,
            truncation_cap: 4096,
            first_target: None,
            extend: ExtendParams::default(),
            eps_grid: vec![Rational::new(1, 4), Rational::half()],
            exhaustive_cap: 16,
        }
    }
}

/// The space of a stage: either explicit with the group's natural action, or
/// the group itself with a scaled left-invariant metric and left translations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceRecord {
    Explicit { space: FiniteMetricSpace },
    Group { scale: Rational, from_identity: Vec<Rational> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRecord {
    pub group: PermutationGroup,
    pub order: usize,
    pub points: usize,
    pub space: SpaceRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub n: usize,
    pub epsilon: Rational,
    pub a_n: Rational,
    pub m_n: usize,
    pub growth_rule: bool,
    pub truncation_radius: usize,
    pub truncation_points: usize,
    pub target: TargetSpec,
    pub extension: ExtensionReport,
    /// Image in `G_{n+1}` of each element of `G_n`.
    pub g_embedding: Vec<usize>,
    /// Image in `X_{n+1}` of each point of `X_n`.
    pub x_embedding: Vec<usize>,
    pub f_tilde: usize,
    pub concentration: Vec<LevyRow>,
    pub result: StateRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainStatus {
    Complete,
    Partial { failed_stage: usize, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBundle {
    pub format: String,
    pub config: ChainConfig,
    pub notes: Vec<String>,
    pub initial: StateRecord,
    pub stages: Vec<StageRecord>,
    pub status: ChainStatus,
}

/// A live stage: the group, its action and the serializable description.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub n: usize,
    pub action: IsometricAction,
    pub record: StateRecord,
}

impl ChainState {
    /// `G_1 = {e}` acting on the single point `x_1`.
    pub fn initial() -> Self {
        let record = StateRecord {
            group: PermutationGroup::trivial(),
            order: 1,
            points: 1,
            space: SpaceRecord::Explicit { space: FiniteMetricSpace::singleton("x1") },
        };
        ChainState::from_record(1, &record, usize::MAX).expect("trivial state")
    }

    pub fn from_record(n: usize, record: &StateRecord, group_cap: usize) -> Result<Self, ChainError> {
        let group = PermutationGroup::new(record.group.degree, record.group.generators.clone())?;
        let g = Arc::new(group.enumerate(group_cap)?);
        if g.order() != record.order {
            return Err(ChainError::Bundle(format!("stage {n} group has order {}, recorded {}", g.order(), record.order)));
        }
        let action = match &record.space {
            SpaceRecord::Explicit { space } => IsometricAction::new(g, Arc::new(space.clone()), PointAction::Natural)?,
            SpaceRecord::Group { scale, from_identity } => {
                if from_identity.len() != g.order() {
                    return Err(ChainError::Bundle(format!("stage {n} metric has {} values", from_identity.len())));
                }
                let metric = Arc::new(InvariantMetric { from_identity: from_identity.clone() });
                let space = GroupSpace::new(g.clone(), metric, *scale);
                IsometricAction::new(g, Arc::new(space), PointAction::LeftRegular)?
            }
        };
        if action.points() != record.points {
            return Err(ChainError::Bundle(format!("stage {n} has {} points, recorded {}", action.points(), record.points)));
        }
        Ok(ChainState { n, action, record: record.clone() })
    }

    pub fn diameter(&self) -> Rational {
        self.action.space.diameter()
    }
}

/// Smallest `m ≥ 1` with `m ≥ 8 a² n`.
pub fn growth_exponent(a: Rational, n: usize) -> usize {
    let bound = Rational::from(8) * a * a * Rational::from(n as i128);
    bound.ceil().max(1) as usize
}

pub fn stage_epsilon(n: usize) -> Rational {
    Rational::new(1, 1i128 << n)
}

/// Tuples of `X^m` within `r` coordinates of some constant tuple, with the
/// diagonal action of `G` and the normalised `ℓ¹` metric.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub action: IsometricAction,
    /// Index of the constant tuple `(x, …, x)` for each point `x`.
    pub diagonal: Vec<usize>,
}

pub fn truncate(base: &IsometricAction, m: usize, r: usize, cap: usize) -> Result<Truncation, ChainError> {
    let nx = base.points();
    if r == 0 || m == 1 {
        return Ok(Truncation { action: base.clone(), diagonal: (0..nx).collect() });
    }
    let r = r.min(m);
    let mut tuples = BTreeSet::new();
    for c in 0..nx {
        let mut stack = vec![(vec![c; m], 0usize, 0usize)];
        while let Some((t, pos, changed)) = stack.pop() {
            if tuples.len() > cap {
                return Err(ChainError::TruncationCap { points: tuples.len(), cap });
            }
            if pos == m {
                tuples.insert(t);
                continue;
            }
            stack.push((t.clone(), pos + 1, changed));
            if changed < r {
                for y in (0..nx).filter(|&y| y != c) {
                    let mut u = t.clone();
                    u[pos] = y;
                    stack.push((u, pos + 1, changed + 1));
                }
            }
        }
    }
    if tuples.len() > cap {
        return Err(ChainError::TruncationCap { points: tuples.len(), cap });
    }
    let tuples: Vec<Vec<usize>> = tuples.into_iter().collect();
    let index = |t: &[usize]| tuples.binary_search_by(|u| u.as_slice().cmp(t)).expect("closed under the diagonal action");
    let ids = tuples.iter().map(|t| format!("({})", t.iter().map(usize::to_string).collect::<Vec<_>>().join(","))).collect();
    let mf = Rational::from(m as i128);
    let space = FiniteMetricSpace::from_fn(ids, base.space.is_pseudometric(), |i, j| {
        tuples[i].iter().zip(&tuples[j]).map(|(&a, &b)| base.space.dist(a, b)).sum::<Rational>() / mf
    });
    let g = &base.group;
    let table = (0..g.order())
        .map(|h| {
            let images: Vec<usize> = tuples.iter().map(|t| index(&t.iter().map(|&x| base.act(h, x)).collect::<Vec<_>>())).collect();
            Permutation::from_usize(&images).expect("bijection")
        })
        .collect();
    let diagonal = (0..nx).map(|x| index(&vec![x; m])).collect();
    let action = IsometricAction::new(g.clone(), Arc::new(space), PointAction::Table(table))?;
    Ok(Truncation { action, diagonal })
}

fn stage_target(n: usize, x: &FiniteMetricSpace, config: &ChainConfig) -> TargetSpec {
    if n == 1 {
        let choices = [Rational::half(), Rational::new(2, 3), Rational::new(3, 4), Rational::one()];
        let c = config
            .first_target
            .unwrap_or(choices[(derive_seed(config.seed, &[n as u64, 1]) % choices.len() as u64) as usize]);
        return TargetSpec::Equilateral { c: c.max(x.diameter() / Rational::from(2)) };
    }
    TargetSpec::Equilateral { c: x.diameter() }
}

/// Runs one stage. In dense mode the growth exponent is recorded but the
/// current space is extended directly.
pub fn chain_step(state: &ChainState, config: &ChainConfig) -> Result<(StageRecord, ChainState), ChainError> {
    let n = state.n;
    let eps = stage_epsilon(n);
    let a_n = state.diameter();
    let m_n = growth_exponent(a_n, n);
    let growth_rule = Rational::from(m_n as i128) >= Rational::from(8) * a_n * a_n * Rational::from(n as i128);
    if !growth_rule {
        return Err(ChainError::Invariant { stage: n, what: format!("m_n = {m_n} below 8 a_n² n") });
    }

    let concentration = match config.mode {
        ChainMode::Levy => {
            let base = FiniteMetricSpace::from_space(&*state.action.space);
            let k = base.len() as i128;
            let power = HammingPower::new(base, m_n).expect("positive exponent");
            let member = FamilyMember::Power { power, weights: vec![Rational::new(1, k); k as usize] };
            let mut rows = Vec::with_capacity(config.eps_grid.len());
            for &e in &config.eps_grid {
                let mut row = member_row(&member, e, config.exhaustive_cap)?;
                row.n = n;
                rows.push(row);
            }
            rows
        }
        ChainMode::Dense => Vec::new(),
    };

    let radius = match config.mode {
        ChainMode::Levy => config.truncation_radius,
        ChainMode::Dense => 0,
    };
    let trunc = truncate(&state.action, m_n, radius, config.truncation_cap)?;
    let x = FiniteMetricSpace::from_space(&*trunc.action.space);
    let target_spec = stage_target(n, &x, config);
    let target = target_spec.build(&x).map_err(|source| ChainError::Extend { stage: n, source })?;
    let mut params = config.extend.clone();
    params.quotient.seed = derive_seed(config.seed, &[n as u64]);
    let ext = extend_action_approximating(&trunc.action, &target, eps, &params)
        .map_err(|source| ChainError::Extend { stage: n, source })?;

    let x_embedding: Vec<usize> = trunc.diagonal.iter().map(|&p| ext.x_embedding[p]).collect();
    let result = StateRecord {
        group: ext.group.as_group(),
        order: ext.group.order(),
        points: ext.group.order(),
        space: SpaceRecord::Group { scale: ext.scale, from_identity: ext.metric.from_identity.clone() },
    };
    let next = ChainState { n: n + 1, action: ext.action(), record: result.clone() };
    let record = StageRecord {
        n,
        epsilon: eps,
        a_n,
        m_n,
        growth_rule,
        truncation_radius: radius,
        truncation_points: x.len(),
        target: target_spec,
        extension: ext.report,
        g_embedding: ext.g_embedding,
        x_embedding,
        f_tilde: ext.f_tilde,
        concentration,
        result,
    };
    Ok((record, next))
}

pub fn chain_notes(config: &ChainConfig) -> Vec<String> {
    let mut notes = vec![
        format!(
            "Group extension runs on the tuples of X_n^m_n within {} coordinates of a constant tuple, acted on diagonally; radius 0 is the diagonal copy of X_n.",
            config.truncation_radius
        ),
        "Concentration rows describe the full implicit power X_n^m_n with the uniform measure.".to_string(),
        "m_n is the least integer at least max(1, 8 a_n^2 n).".to_string(),
    ];
    notes.push(exponent_footnote().to_string());
    notes
}

fn fresh_bundle(config: &ChainConfig) -> ChainBundle {
    ChainBundle {
        format: BUNDLE_FORMAT.to_string(),
        config: config.clone(),
        notes: chain_notes(config),
        initial: ChainState::initial().record,
        stages: Vec::new(),
        status: ChainStatus::Complete,
    }
}

/// Runs `config.stages` stages, continuing `resume` when given. A stage that
/// fails leaves a partial bundle with the error recorded; the error is
/// returned alongside.
pub fn run_chain(config: &ChainConfig, resume: Option<ChainBundle>) -> Result<(ChainBundle, Option<ChainError>), ChainError> {
    let mut bundle = match resume {
        None => fresh_bundle(config),
        Some(b) => {
            if b.format != BUNDLE_FORMAT {
                return Err(ChainError::Bundle(format!("unknown format {}", b.format)));
            }
            let mut same = b.config.clone();
            same.stages = config.stages;
            if &same != config {
                return Err(ChainError::Bundle("resume configuration differs from the bundle's".into()));
            }
            if b.stages.len() > config.stages {
                return Err(ChainError::Bundle(format!("bundle already has {} stages", b.stages.len())));
            }
            let mut b = b;
            b.config = config.clone();
            b.status = ChainStatus::Complete;
            b
        }
    };
    let group_cap = config.extend.quotient.group_cap;
    let mut state = match bundle.stages.last() {
        None => ChainState::from_record(1, &bundle.initial, group_cap)?,
        Some(s) => ChainState::from_record(s.n + 1, &s.result, group_cap)?,
    };
    while bundle.stages.len() < config.stages {
        match chain_step(&state, config) {
            Ok((record, next)) => {
                bundle.stages.push(record);
                state = next;
            }
            Err(e) => {
                bundle.status = ChainStatus::Partial { failed_stage: state.n, error: e.to_string() };
                return Ok((bundle, Some(e)));
            }
        }
    }
    Ok((bundle, None))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainAudit {
    pub growth_rule: u64,
    pub group_embedding: u64,
    pub coherence: u64,
    pub isometric_embedding: u64,
    pub density: u64,
    pub action_certificates: u64,
}

/// Re-checks every chain invariant from the bundle alone.
pub fn audit_chain(bundle: &ChainBundle) -> Result<ChainAudit, ChainError> {
    let cfg = &bundle.config;
    let cap = cfg.extend.quotient.group_cap;
    let mut audit = ChainAudit::default();
    let mut states = vec![ChainState::from_record(1, &bundle.initial, cap)?];
    for s in &bundle.stages {
        states.push(ChainState::from_record(s.n + 1, &s.result, cap)?);
    }
    let fail = |stage: usize, what: String| ChainError::Invariant { stage, what };
    for state in &states {
        state.action.certify(true, cfg.extend.exhaustive_points)?;
        audit.action_certificates += 1;
    }
    // composite embedding of X_1 into the current stage
    let mut from_first: Vec<usize> = vec![0];
    let first = &states[0].action;
    for (i, s) in bundle.stages.iter().enumerate() {
        let n = s.n;
        let (cur, next) = (&states[i].action, &states[i + 1].action);
        if n != i + 1 || s.epsilon != stage_epsilon(n) {
            return Err(fail(n, "stage numbering or epsilon schedule".into()));
        }
        if s.a_n != cur.space.diameter() {
            return Err(fail(n, format!("recorded a_n = {} differs from the diameter", s.a_n)));
        }
        let need = Rational::from(8) * s.a_n * s.a_n * Rational::from(n as i128);
        if Rational::from(s.m_n as i128) < need || s.m_n == 0 {
            return Err(fail(n, format!("m_n = {} below {need}", s.m_n)));
        }
        audit.growth_rule += 1;

        let (g, h) = (&cur.group, &next.group);
        if s.g_embedding.len() != g.order() || s.x_embedding.len() != cur.points() {
            return Err(fail(n, "embedding lengths".into()));
        }
        let mut seen = BTreeSet::new();
        for a in 0..g.order() {
            if !seen.insert(s.g_embedding[a]) {
                return Err(fail(n, format!("G_n → G_n+1 not injective at {a}")));
            }
            for b in g.generator_indices() {
                audit.group_embedding += 1;
                if s.g_embedding[g.mul(b, a)] != h.mul(s.g_embedding[b], s.g_embedding[a]) {
                    return Err(fail(n, format!("G_n → G_n+1 not a homomorphism at ({b}, {a})")));
                }
            }
        }
        for a in 0..g.order() {
            for x in 0..cur.points() {
                audit.coherence += 1;
                if next.act(s.g_embedding[a], s.x_embedding[x]) != s.x_embedding[cur.act(a, x)] {
                    return Err(fail(n, format!("actions disagree at element {a}, point {x}")));
                }
            }
        }
        for x in 0..cur.points() {
            for y in 0..cur.points() {
                audit.isometric_embedding += 1;
                if next.space.dist(s.x_embedding[x], s.x_embedding[y]) != cur.space.dist(x, y) {
                    return Err(fail(n, format!("X_n → X_n+1 distorts ({x}, {y})")));
                }
            }
        }
        from_first = from_first.iter().map(|&p| s.x_embedding[p]).collect();
        for x in 0..first.points() {
            for y in 0..first.points() {
                audit.isometric_embedding += 1;
                if next.space.dist(from_first[x], from_first[y]) != first.space.dist(x, y) {
                    return Err(fail(n, format!("X_1 → X_{} distorts ({x}, {y})", n + 1)));
                }
            }
        }

        let eps = s.epsilon;
        if s.truncation_radius == 0 {
            let x = FiniteMetricSpace::from_space(&*cur.space);
            let target = s.target.build(&x).map_err(|source| ChainError::Extend { stage: n, source })?;
            for p in 0..cur.points() {
                audit.density += 1;
                let moved = next.space.dist(next.act(s.f_tilde, s.x_embedding[p]), s.x_embedding[p]);
                let wanted = target.ambient.dist(target.image[p], p);
                if (moved - wanted).abs() >= eps {
                    return Err(fail(n, format!("f̃ moves point {p} by {moved}, target by {wanted}")));
                }
            }
        }
        for (p, d) in s.extension.approximation.iter().enumerate() {
            audit.density += 1;
            if *d >= eps {
                return Err(fail(n, format!("recorded d(f̃x, fx) = {d} at point {p}")));
            }
        }
    }
    Ok(audit)
}
