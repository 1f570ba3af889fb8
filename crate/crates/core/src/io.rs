//! JSON file formats. Distances and weights are stored as integers over a
//! shared denominator so every value round-trips exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concentration::MMSpace;
use crate::group::{EnumeratedGroup, GroupError, PermutationGroup};
use crate::metric::FiniteMetricSpace;
use crate::perm::Permutation;
use crate::rational::{common_denominator, Rational};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed JSON in {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid content: {0}")]
    Invalid(String),
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.display().to_string(), source })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    fs::write(path, to_json(value)).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

fn scale_all(values: &[Rational], den: i128) -> Vec<i128> {
    values.iter().map(|v| v.scaled_to(den).expect("common denominator")).collect()
}

fn check_den(den: i128) -> Result<(), String> {
    if den <= 0 {
        return Err(format!("denominator must be positive, got {den}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub points: Vec<String>,
    pub den: i128,
    pub dist: Vec<Vec<i128>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pseudometric: bool,
}

impl From<FiniteMetricSpace> for SpaceJson {
    fn from(space: FiniteMetricSpace) -> Self {
        let matrix = space.matrix();
        let den = common_denominator(matrix.iter().flatten());
        SpaceJson {
            points: space.ids().to_vec(),
            den,
            dist: matrix.iter().map(|row| scale_all(row, den)).collect(),
            pseudometric: crate::metric::MetricSpace::is_pseudometric(&space),
        }
    }
}

impl TryFrom<SpaceJson> for FiniteMetricSpace {
    type Error = String;

    fn try_from(j: SpaceJson) -> Result<Self, String> {
        check_den(j.den)?;
        let matrix = j.dist.iter().map(|row| row.iter().map(|&v| Rational::new(v, j.den)).collect()).collect();
        FiniteMetricSpace::new(j.points, matrix, j.pseudometric).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MMSpaceJson {
    pub points: Vec<String>,
    pub den: i128,
    pub dist: Vec<Vec<i128>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pseudometric: bool,
    pub weights: Vec<i128>,
    pub weight_den: i128,
}

impl From<MMSpace> for MMSpaceJson {
    fn from(mm: MMSpace) -> Self {
        let den = common_denominator(mm.weights.iter());
        let space = SpaceJson::from(mm.space);
        MMSpaceJson {
            points: space.points,
            den: space.den,
            dist: space.dist,
            pseudometric: space.pseudometric,
            weights: scale_all(&mm.weights, den),
            weight_den: den,
        }
    }
}

impl TryFrom<MMSpaceJson> for MMSpace {
    type Error = String;

    fn try_from(j: MMSpaceJson) -> Result<Self, String> {
        check_den(j.weight_den)?;
        let space = FiniteMetricSpace::try_from(SpaceJson { points: j.points, den: j.den, dist: j.dist, pseudometric: j.pseudometric })?;
        let weights = j.weights.iter().map(|&w| Rational::new(w, j.weight_den)).collect();
        MMSpace::new(space, weights).map_err(|e| e.to_string())
    }
}

/// `{"degree": k, "generators": [[images]]}`, validated on load.
pub fn parse_group(value: serde_json::Value) -> Result<PermutationGroup, IoError> {
    #[derive(Deserialize)]
    struct Raw {
        degree: usize,
        generators: Vec<Vec<u32>>,
    }
    let raw: Raw = serde_json::from_value(value).map_err(|e| IoError::Invalid(e.to_string()))?;
    let gens = raw
        .generators
        .into_iter()
        .map(Permutation::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IoError::Invalid(e.to_string()))?;
    PermutationGroup::new(raw.degree, gens).map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn read_group(path: &Path) -> Result<PermutationGroup, IoError> {
    parse_group(read_json(path)?)
}

/// A group element given by enumeration index or by its permutation images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Images(Vec<u32>),
}

impl ElementRef {
    pub fn resolve(&self, group: &EnumeratedGroup) -> Result<usize, IoError> {
        match self {
            ElementRef::Index(i) if *i < group.order() => Ok(*i),
            ElementRef::Index(i) => Err(IoError::Invalid(format!("element index {i} out of range for order {}", group.order()))),
            ElementRef::Images(images) => {
                let p = Permutation::new(images.clone()).map_err(|e| IoError::Invalid(e.to_string()))?;
                group.index_of(&p).ok_or_else(|| IoError::Invalid(format!("{p} is not in the group")))
            }
        }
    }
}

/// Values of a function on `V × V`: `dist[i][j] / den` at `(elements[i], elements[j])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VValuesJson {
    pub elements: Vec<ElementRef>,
    pub den: i128,
    pub dist: Vec<Vec<i128>>,
}

impl VValuesJson {
    pub fn resolve(&self, group: &EnumeratedGroup) -> Result<crate::invariant::VValues, IoError> {
        check_den(self.den).map_err(IoError::Invalid)?;
        let elements = self.elements.iter().map(|e| e.resolve(group)).collect::<Result<Vec<_>, _>>()?;
        let dist = self.dist.iter().map(|row| row.iter().map(|&v| Rational::new(v, self.den)).collect()).collect();
        crate::invariant::VValues::new(elements, dist).map_err(|e| IoError::Invalid(e.to_string()))
    }
}

/// How the group of an action file moves points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    /// The group's own permutations act on the points.
    Natural,
    /// Points are the group elements in enumeration order.
    LeftRegular,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionJson {
    pub group: serde_json::Value,
    pub space: FiniteMetricSpace,
    #[serde(default = "natural")]
    pub action: ActionKind,
}

fn natural() -> ActionKind {
    ActionKind::Natural
}

impl ActionJson {
    pub fn build(&self, cap: usize) -> Result<crate::levy::action::IsometricAction, IoError> {
        use crate::levy::action::{IsometricAction, PointAction};
        use crate::metric::MetricSpace;
        let group = parse_group(self.group.clone())?;
        let g = group.enumerate(cap).map_err(|e: GroupError| IoError::Invalid(e.to_string()))?;
        let action = match self.action {
            ActionKind::Natural => {
                if g.degree() != self.space.len() {
                    return Err(IoError::Invalid(format!("degree {} differs from {} points", g.degree(), self.space.len())));
                }
                PointAction::Natural
            }
            ActionKind::LeftRegular => PointAction::LeftRegular,
        };
        IsometricAction::new(std::sync::Arc::new(g), std::sync::Arc::new(self.space.clone()), action)
            .map_err(|e| IoError::Invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_round_trip() {
        let s = FiniteMetricSpace::from_fn(vec!["a".into(), "b".into(), "c".into()], false, |i, j| {
            Rational::new((i + j) as i128, 3)
        });
        let text = to_json(&s);
        let back: FiniteMetricSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["den"], 3);
        assert!(v.get("pseudometric").is_none());
    }

    #[test]
    fn mm_round_trip() {
        let mm = MMSpace::new(
            FiniteMetricSpace::equilateral(2, Rational::one()),
            vec![Rational::new(1, 3), Rational::new(2, 3)],
        )
        .unwrap();
        let back: MMSpace = serde_json::from_str(&to_json(&mm)).unwrap();
        assert_eq!(mm, back);
    }

    #[test]
    fn bad_weights_rejected() {
        let text = r#"{"points":["a"],"den":1,"dist":[[0]],"weights":[2],"weight_den":1}"#;
        assert!(serde_json::from_str::<MMSpace>(text).is_err());
    }

    #[test]
    fn group_with_bad_generator() {
        let v = serde_json::json!({"degree": 3, "generators": [[0, 0, 1]]});
        assert!(parse_group(v).is_err());
    }
}
