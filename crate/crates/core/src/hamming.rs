use thiserror::Error;

use crate::metric::{FiniteMetricSpace, MetricSpace};
use crate::rational::Rational;

pub const DEFAULT_EXPLICIT_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HammingError {
    #[error("power exponent must be positive")]
    ZeroExponent,
    #[error("{base}^{m} points exceed the explicit cap of {cap}; use the implicit power instead")]
    OverCap { base: usize, m: usize, cap: usize },
}

/// The normalized Hamming power `X^m` kept as a handle on the base space.
///
/// Points are `m`-tuples of base indices; `d(f, g) = (1/m) Σ d(f_i, g_i)`.
#[derive(Debug, Clone)]
pub struct HammingPower {
    base: FiniteMetricSpace,
    m: usize,
}

impl HammingPower {
    pub fn new(base: FiniteMetricSpace, m: usize) -> Result<Self, HammingError> {
        if m == 0 {
            return Err(HammingError::ZeroExponent);
        }
        Ok(HammingPower { base, m })
    }

    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn exponent(&self) -> usize {
        self.m
    }

    /// Number of points, or `None` when it overflows `usize`.
    pub fn cardinality(&self) -> Option<usize> {
        let mut total: usize = 1;
        for _ in 0..self.m {
            total = total.checked_mul(self.base.len())?;
        }
        Some(total)
    }

    pub fn tuple_dist(&self, f: &[usize], g: &[usize]) -> Rational {
        let sum: Rational = f.iter().zip(g).map(|(&a, &b)| self.base.dist(a, b)).sum();
        sum / Rational::from(self.m as i128)
    }

    pub fn constant(&self, x: usize) -> Vec<usize> {
        vec![x; self.m]
    }

    /// Mixed-radix decoding, first coordinate most significant.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let k = self.base.len();
        let mut out = vec![0; self.m];
        for slot in out.iter_mut().rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        let k = self.base.len();
        tuple.iter().fold(0, |acc, &x| acc * k + x)
    }

    pub fn diameter(&self) -> Rational {
        self.base.diameter()
    }

    pub fn materialize(&self, cap: usize) -> Result<FiniteMetricSpace, HammingError> {
        let over = HammingError::OverCap { base: self.base.len(), m: self.m, cap };
        let n = self.cardinality().ok_or(over.clone())?;
        if n > cap {
            return Err(over);
        }
        let tuples: Vec<Vec<usize>> = (0..n).map(|i| self.decode(i)).collect();
        let ids = tuples
            .iter()
            .map(|t| t.iter().map(|&x| self.base.id(x)).collect::<Vec<_>>().join(","))
            .map(|s| format!("({s})"))
            .collect();
        let pseudo = self.base.is_pseudometric();
        Ok(FiniteMetricSpace::from_fn(ids, pseudo, |i, j| self.tuple_dist(&tuples[i], &tuples[j])))
    }
}

/// Explicit normalized Hamming power, refusing more than `cap` points.
pub fn hamming_power(space: &FiniteMetricSpace, m: usize, cap: usize) -> Result<FiniteMetricSpace, HammingError> {
    HammingPower::new(space.clone(), m)?.materialize(cap)
}

/// `{0, 1}` with distance 1, the usual base of the Hamming cube.
pub fn discrete_pair() -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(vec!["0".into(), "1".into()], false, |_, _| Rational::one())
}
