//! Parameter matrices ρ_{jk} = e^{2πiθ_{jk}}, stored by their angles.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{lcm, Angle};

/// Self-adjoint unimodular matrix with unit diagonal, stored as angles θ_{jk}.
///
/// Indices are zero-based internally; generator `z1` is index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterMatrix {
    n: usize,
    angles: Vec<Vec<Angle>>,
}

#[derive(Serialize, Deserialize)]
struct ParameterMatrixJson {
    n: usize,
    angles: Vec<Vec<Value>>,
}

impl ParameterMatrix {
    pub fn new(angles: Vec<Vec<Angle>>) -> Result<Self> {
        let n = angles.len();
        if n == 0 {
            return Err(Error::InvalidParameterMatrix("empty matrix".into()));
        }
        for (j, row) in angles.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameterMatrix(format!("row {} has length {}", j + 1, row.len())));
            }
            if !row[j].is_zero() {
                return Err(Error::InvalidParameterMatrix(format!("diagonal entry ({0}, {0}) is not 1", j + 1)));
            }
        }
        for j in 0..n {
            for k in (j + 1)..n {
                if !angles[j][k].add(&angles[k][j]).is_zero() {
                    return Err(Error::InvalidParameterMatrix(format!(
                        "entries ({}, {}) and ({}, {}) are not conjugate",
                        j + 1,
                        k + 1,
                        k + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(ParameterMatrix { n, angles })
    }

    /// Builds the matrix from the strictly upper angles θ_{jk}, j < k.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> Angle) -> Self {
        let mut angles = vec![vec![Angle::zero(); n]; n];
        for j in 0..n {
            for k in (j + 1)..n {
                let a = upper(j, k);
                angles[k][j] = a.neg();
                angles[j][k] = a;
            }
        }
        ParameterMatrix { n, angles }
    }

    /// All entries 1: the commutative sphere.
    pub fn commutative(n: usize) -> Self {
        Self::from_upper(n, |_, _| Angle::zero())
    }

    /// Random exact matrix; each upper angle is p/q with q drawn from `denominators`.
    pub fn random_exact<R: Rng>(n: usize, denominators: &[i64], rng: &mut R) -> Self {
        Self::from_upper(n, |_, _| {
            let q = denominators[rng.gen_range(0..denominators.len())];
            Angle::exact(rng.gen_range(0..q), q).expect("positive denominator")
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// θ_{jk}, zero-based.
    pub fn angle(&self, j: usize, k: usize) -> Angle {
        self.angles[j][k]
    }

    pub fn angles(&self) -> &[Vec<Angle>] {
        &self.angles
    }

    pub fn is_exact(&self) -> bool {
        self.angles.iter().flatten().all(Angle::is_exact)
    }

    pub fn is_commutative(&self) -> bool {
        self.angles.iter().flatten().all(Angle::is_zero)
    }

    /// lcm of all angle denominators, or `None` when some angle is a float.
    pub fn conductor(&self) -> Option<u64> {
        let mut acc = 1;
        for a in self.angles.iter().flatten() {
            acc = lcm(acc, a.denominator()?);
        }
        Some(acc)
    }

    /// The upper-left k×k block.
    pub fn upper_left(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::IndexOutOfRange { index: k, n: self.n });
        }
        Ok(ParameterMatrix {
            n: k,
            angles: self.angles[..k].iter().map(|r| r[..k].to_vec()).collect(),
        })
    }

    /// Removes row and column `idx`.
    pub fn minor(&self, idx: usize) -> Result<Self> {
        if idx >= self.n || self.n == 1 {
            return Err(Error::IndexOutOfRange { index: idx + 1, n: self.n });
        }
        let angles = self
            .angles
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, r)| r.iter().enumerate().filter(|(k, _)| *k != idx).map(|(_, a)| *a).collect())
            .collect();
        Ok(ParameterMatrix { n: self.n - 1, angles })
    }

    /// An n×n matrix with `self` in the upper left and every other entry 1.
    pub fn embed_corner(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::DimensionMismatch(format!("cannot embed {0}×{0} into {n}×{n}", self.n)));
        }
        Ok(Self::from_upper(n, |j, k| if k < self.n { self.angles[j][k] } else { Angle::zero() }))
    }

    /// ω with ω_{σ(j)σ(k)} = ρ_{jk}.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.n {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let mut seen = vec![false; self.n];
        for &s in sigma {
            if s >= self.n || seen[s] {
                return Err(Error::Invalid("not a permutation".into()));
            }
            seen[s] = true;
        }
        let mut angles = vec![vec![Angle::zero(); self.n]; self.n];
        for j in 0..self.n {
            for k in 0..self.n {
                angles[sigma[j]][sigma[k]] = self.angles[j][k];
            }
        }
        Ok(ParameterMatrix { n: self.n, angles })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let raw: ParameterMatrixJson = serde_json::from_value(v.clone())?;
        if raw.angles.len() != raw.n {
            return Err(Error::InvalidParameterMatrix(format!(
                "n = {} but {} rows given",
                raw.n,
                raw.angles.len()
            )));
        }
        let angles = raw
            .angles
            .iter()
            .map(|row| row.iter().map(angle_from_json).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(angles)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }

    pub fn to_json_value(&self) -> Value {
        let angles = self
            .angles
            .iter()
            .map(|r| r.iter().map(|a| Value::String(a.to_string())).collect())
            .collect();
        serde_json::to_value(ParameterMatrixJson { n: self.n, angles }).expect("serializable")
    }
}

pub(crate) fn angle_from_json(v: &Value) -> Result<Angle> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(x) => {
            if let Some(i) = x.as_i64() {
                Angle::exact(i, 1)
            } else {
                Angle::float(x.as_f64().unwrap_or(f64::NAN))
            }
        }
        other => Err(Error::InvalidAngle(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_self_adjoint() {
        let a = |p, q| Angle::exact(p, q).unwrap();
        let bad = vec![vec![a(0, 1), a(1, 3)], vec![a(1, 3), a(0, 1)]];
        assert!(ParameterMatrix::new(bad).is_err());
        let good = vec![vec![a(0, 1), a(1, 3)], vec![a(2, 3), a(0, 1)]];
        assert!(ParameterMatrix::new(good).is_ok());
        let diag = vec![vec![a(1, 2), a(0, 1)], vec![a(0, 1), a(0, 1)]];
        assert!(ParameterMatrix::new(diag).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"n":3,"angles":[["0","1/3","1/5"],["2/3","0","1/7"],["4/5","6/7","0"]]}"#;
        let p = ParameterMatrix::from_json(s).unwrap();
        assert_eq!(p.conductor(), Some(105));
        let back = ParameterMatrix::from_json_value(&p.to_json_value()).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"n":2,"angles":[["0","1/3"],["1/3","0"]]}"#;
        assert!(ParameterMatrix::from_json(bad).is_err());
    }

    #[test]
    fn corner_minor_and_permutation() {
        let p = ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap());
        let big = p.embed_corner(3).unwrap();
        assert_eq!(big.upper_left(2).unwrap(), p);
        assert!(big.angle(0, 2).is_zero() && big.angle(2, 1).is_zero());
        assert_eq!(big.minor(2).unwrap(), p);
        let sw = p.permuted(&[1, 0]).unwrap();
        assert_eq!(sw.angle(1, 0), p.angle(0, 1));
    }
}
