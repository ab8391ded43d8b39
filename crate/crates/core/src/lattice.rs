//! Integer vectors: primitive directions and unimodular completions.

use crate::rational::{common_denominator, Rational};
use num::{BigInt, Integer, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("direction must be nonzero")]
    Zero,
    #[error("direction {0:?} is not primitive (gcd {1})")]
    NotPrimitive(Vec<i64>, i64),
    #[error("integer overflow in lattice computation")]
    Overflow,
    #[error("invalid direction text {0:?}")]
    Parse(String),
}

/// Primitive nonzero integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Direction(Vec<i64>);

impl Direction {
    pub fn new(coords: Vec<i64>) -> Result<Self, LatticeError> {
        let g = gcd_all(&coords);
        if g == 0 {
            return Err(LatticeError::Zero);
        }
        if g != 1 {
            return Err(LatticeError::NotPrimitive(coords, g));
        }
        Ok(Direction(coords))
    }

    /// Divides out the gcd.
    pub fn primitive(coords: &[i64]) -> Result<Self, LatticeError> {
        let g = gcd_all(coords);
        if g == 0 {
            return Err(LatticeError::Zero);
        }
        Ok(Direction(coords.iter().map(|c| c / g).collect()))
    }

    /// Primitive integer vector positively proportional to a rational one.
    pub fn from_rational(v: &[Rational]) -> Result<Self, LatticeError> {
        let den = common_denominator(v);
        let ints: Vec<BigInt> = v.iter().map(|q| (q * &den).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return Err(LatticeError::Zero);
        }
        ints.iter()
            .map(|x| (x / &g).to_i64().ok_or(LatticeError::Overflow))
            .collect::<Result<Vec<_>, _>>()
            .map(Direction)
    }

    pub fn parse(text: &str) -> Result<Self, LatticeError> {
        let coords = text
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| LatticeError::Parse(text.to_string()))?;
        Direction::new(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.0.iter().map(|&c| crate::rational::int(c)).collect()
    }

    pub fn pair(&self, p: &[Rational]) -> Rational {
        crate::linalg::dot(&self.to_rational(), p)
    }

    pub fn pair_int(&self, v: &[i64]) -> i64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

impl TryFrom<Vec<i64>> for Direction {
    type Error = LatticeError;

    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<i64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |acc, &x| acc.gcd(&x))
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Integer vectors `c_1, ..., c_{n-1}` such that the matrix with columns
/// `c_1, ..., c_{n-1}, k` has determinant `+-1`.
///
/// When `k` has a unit coordinate the remaining standard basis vectors are
/// returned, so coordinate directions complete to the identity.
pub fn unimodular_completion(k: &Direction) -> Result<Vec<Vec<i64>>, LatticeError> {
    let n = k.dim();
    if let Some(i) = k.coords().iter().position(|c| c.abs() == 1) {
        return Ok((0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let mut e = vec![0; n];
                e[j] = 1;
                e
            })
            .collect());
    }
    // Reduce v to e_1 by unimodular row operations E while keeping
    // U v = k, i.e. U <- U E^{-1}.
    let mut v: Vec<i128> = k.coords().iter().map(|&c| c as i128).collect();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|r| (0..n).map(|c| i128::from(r == c)).collect())
        .collect();
    for j in 1..n {
        let (a, b) = (v[0], v[j]);
        if b == 0 {
            continue;
        }
        let (g, x, y) = ext_gcd(a, b);
        v[0] = g;
        v[j] = 0;
        for row in u.iter_mut() {
            let (c0, cj) = (row[0], row[j]);
            row[0] = (a / g)
                .checked_mul(c0)
                .zip((b / g).checked_mul(cj))
                .and_then(|(p, q)| p.checked_add(q))
                .ok_or(LatticeError::Overflow)?;
            row[j] = (-y)
                .checked_mul(c0)
                .zip(x.checked_mul(cj))
                .and_then(|(p, q)| p.checked_add(q))
                .ok_or(LatticeError::Overflow)?;
        }
    }
    debug_assert_eq!(v[0], 1);
    (1..n)
        .map(|c| {
            (0..n)
                .map(|r| i64::try_from(u[r][c]).map_err(|_| LatticeError::Overflow))
                .collect()
        })
        .collect()
}

/// Determinant of a small integer matrix given by rows.
pub fn det_i64(rows: &[Vec<i64>]) -> i64 {
    let q: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| crate::rational::int(x)).collect())
        .collect();
    crate::linalg::det(&q)
        .to_integer()
        .to_i64()
        .expect("determinant fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn columns_det(complement: &[Vec<i64>], k: &Direction) -> i64 {
        let n = k.dim();
        let mut cols = complement.to_vec();
        cols.push(k.coords().to_vec());
        let rows: Vec<Vec<i64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        det_i64(&rows)
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(vec![0, 0]).is_err());
        assert!(Direction::new(vec![2, 4]).is_err());
        assert_eq!(Direction::primitive(&[2, -4]).unwrap().coords(), &[1, -2]);
        let d = Direction::from_rational(&[crate::rational::ratio(1, 2), crate::rational::ratio(-3, 4)])
            .unwrap();
        assert_eq!(d.coords(), &[2, -3]);
        assert_eq!(Direction::parse("1, -1").unwrap().coords(), &[1, -1]);
        assert!(Direction::parse("1,x").is_err());
    }

    #[test]
    fn completions_of_examples() {
        let k = Direction::new(vec![1, 0]).unwrap();
        assert_eq!(unimodular_completion(&k).unwrap(), vec![vec![0, 1]]);
        let k = Direction::new(vec![1, 1, 1]).unwrap();
        assert_eq!(
            unimodular_completion(&k).unwrap(),
            vec![vec![0, 1, 0], vec![0, 0, 1]]
        );
        let k = Direction::new(vec![2, 3]).unwrap();
        let c = unimodular_completion(&k).unwrap();
        assert_eq!(columns_det(&c, &k).abs(), 1);
    }

    proptest! {
        #[test]
        fn completion_is_unimodular(coords in proptest::collection::vec(-40i64..40, 2..5)) {
            prop_assume!(gcd_all(&coords) != 0);
            let k = Direction::primitive(&coords).unwrap();
            let c = unimodular_completion(&k).unwrap();
            prop_assert_eq!(c.len(), k.dim() - 1);
            prop_assert_eq!(columns_det(&c, &k).abs(), 1);
        }
    }
}
