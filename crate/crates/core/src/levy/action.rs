use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::EnumeratedGroup;
use crate::metric::MetricSpace;
use crate::perm::Permutation;

/// Above this many points the quadratic scans give way to exact structural
/// arguments.
pub const DEFAULT_EXHAUSTIVE_POINTS: usize = 5040;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("element {g} does not act as a bijection")]
    NotBijective { g: usize },
    #[error("element {g} moves the pair ({x}, {y}) to a pair at a different distance")]
    NotIsometric { g: usize, x: usize, y: usize },
    #[error("element {g} fixes point {x}")]
    NotFree { g: usize, x: usize },
    #[error("identity moves point {0}")]
    IdentityMoves(usize),
    #[error("action of generator {generator} times element {element} disagrees on point {point}")]
    NotAction { generator: usize, element: usize, point: usize },
    #[error("action table has {got} entries for a group of order {order}")]
    TableSize { got: usize, order: usize },
    #[error("left-regular action needs as many points as group elements ({points} vs {order})")]
    RegularSize { points: usize, order: usize },
}

/// How group elements move points.
#[derive(Debug, Clone)]
pub enum PointAction {
    /// Each element acts through its own permutation; degree equals the number of points.
    Natural,
    /// One permutation of the points per group element.
    Table(Vec<Permutation>),
    /// Points are the group elements and `g·x = gx`.
    LeftRegular,
}

/// A finite group acting on a finite metric space.
#[derive(Clone)]
pub struct IsometricAction {
    pub group: Arc<EnumeratedGroup>,
    pub space: Arc<dyn MetricSpace + Send + Sync>,
    pub action: PointAction,
}

impl std::fmt::Debug for IsometricAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IsometricAction")
            .field("order", &self.group.order())
            .field("points", &self.space.len())
            .field("action", &self.action)
            .finish()
    }
}

/// How a property was established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Every relevant instance was tested; `checks` counts them.
    Exhaustive { checks: u64 },
    /// Exact argument valid for every instance, with the finite checks it rests on.
    Structural { argument: String, checks: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCertificate {
    pub identity: Check,
    pub action_law: Check,
    pub isometry: Check,
    pub freeness: Option<Check>,
}

impl IsometricAction {
    pub fn new(
        group: Arc<EnumeratedGroup>,
        space: Arc<dyn MetricSpace + Send + Sync>,
        action: PointAction,
    ) -> Result<Self, ActionError> {
        match &action {
            PointAction::Table(t) if t.len() != group.order() => {
                return Err(ActionError::TableSize { got: t.len(), order: group.order() })
            }
            PointAction::LeftRegular if space.len() != group.order() => {
                return Err(ActionError::RegularSize { points: space.len(), order: group.order() })
            }
            _ => {}
        }
        Ok(IsometricAction { group, space, action })
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        match &self.action {
            PointAction::Natural => self.group.element(g).apply(x),
            PointAction::Table(t) => t[g].apply(x),
            PointAction::LeftRegular => self.group.mul(g, x),
        }
    }

    /// Orbits under the generators, each sorted, ordered by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.points();
        let gens = self.group.generator_indices();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let mut orbit = vec![s];
            label[s] = out.len();
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &g in &gens {
                    let y = self.act(g, x);
                    if label[y] == usize::MAX {
                        label[y] = out.len();
                        orbit.push(y);
                        queue.push_back(y);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    /// Checks the action axioms, isometry and (optionally) freeness. Scans
    /// are exhaustive up to `exhaustive_points` points.
    pub fn certify(&self, require_free: bool, exhaustive_points: usize) -> Result<ActionCertificate, ActionError> {
        let n = self.points();
        let order = self.group.order();
        for x in 0..n {
            if self.act(0, x) != x {
                return Err(ActionError::IdentityMoves(x));
            }
        }
        let identity = Check::Exhaustive { checks: n as u64 };
        let gens = self.group.generator_indices();
        let small = n <= exhaustive_points;

        let action_law = if let PointAction::LeftRegular = self.action {
            Check::Structural { argument: "left multiplication in an enumerated group".into(), checks: 0 }
        } else {
            let mut checks = 0u64;
            for (k, &s) in gens.iter().enumerate() {
                for g in 0..order {
                    let sg = self.group.mul(s, g);
                    for x in 0..n {
                        checks += 1;
                        if self.act(sg, x) != self.act(s, self.act(g, x)) {
                            return Err(ActionError::NotAction { generator: k, element: g, point: x });
                        }
                    }
                }
            }
            Check::Exhaustive { checks }
        };

        let check_bijective = |g: usize| -> Result<(), ActionError> {
            let mut seen = vec![false; n];
            for x in 0..n {
                let y = self.act(g, x);
                if seen[y] {
                    return Err(ActionError::NotBijective { g });
                }
                seen[y] = true;
            }
            Ok(())
        };
        let isometry = if small || !matches!(self.action, PointAction::LeftRegular) {
            let mut checks = 0u64;
            for &g in &gens {
                check_bijective(g)?;
                let moved: Vec<usize> = (0..n).map(|x| self.act(g, x)).collect();
                for x in 0..n {
                    for y in (x + 1)..n {
                        checks += 1;
                        if self.space.dist(moved[x], moved[y]) != self.space.dist(x, y) {
                            return Err(ActionError::NotIsometric { g, x, y });
                        }
                    }
                }
            }
            Check::Exhaustive { checks }
        } else {
            for &g in &gens {
                check_bijective(g)?;
            }
            Check::Structural {
                argument: "distances are d(x, y) = rho(x^-1 y), invariant under left multiplication".into(),
                checks: gens.len() as u64 * n as u64,
            }
        };

        let freeness = if !require_free {
            None
        } else if small {
            let mut checks = 0u64;
            for g in 1..order {
                for x in 0..n {
                    checks += 1;
                    if self.act(g, x) == x {
                        return Err(ActionError::NotFree { g, x });
                    }
                }
            }
            Some(Check::Exhaustive { checks })
        } else {
            Some(self.free_by_orbit_stabilizer()?)
        };
        Ok(ActionCertificate { identity, action_law, isometry, freeness })
    }

    /// Freeness from trivial stabilizers of one point per orbit; stabilizers
    /// along an orbit are conjugate.
    fn free_by_orbit_stabilizer(&self) -> Result<Check, ActionError> {
        let orbits = self.orbits();
        let mut checks = 0u64;
        for orbit in &orbits {
            let x = orbit[0];
            for g in 1..self.group.order() {
                checks += 1;
                if self.act(g, x) == x {
                    return Err(ActionError::NotFree { g, x });
                }
            }
        }
        Ok(Check::Structural {
            argument: format!("trivial stabilizer at one point of each of {} orbits", orbits.len()),
            checks,
        })
    }
}
