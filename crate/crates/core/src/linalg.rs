//! Small dense exact linear algebra over the rationals.

use crate::rational::Rational;
use num::{One, Zero};

pub type Vector = Vec<Rational>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn is_zero(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row.
fn rref(m: &mut [Vector], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = Rational::one() / &m[row][col];
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..m[r].len() {
                    let delta = &f * &m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(rows: &[Vector]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let cols = first.len();
    let mut m = rows.to_vec();
    rref(&mut m, cols).len()
}

/// Basis of `{x : rows · x = 0}`.
pub fn nullspace(rows: &[Vector], cols: usize) -> Vec<Vector> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Inconsistent,
    Unique(Vector),
    /// A particular solution plus a basis of the homogeneous solutions.
    Family(Vector, Vec<Vector>),
}

/// Solves `a · x = b` where `a` has `cols` columns.
pub fn solve(a: &[Vector], b: &[Rational], cols: usize) -> Solution {
    let mut m: Vec<Vector> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, cols + 1);
    if pivots.last() == Some(&cols) {
        return Solution::Inconsistent;
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = m[r][cols].clone();
    }
    if pivots.len() == cols {
        Solution::Unique(x)
    } else {
        Solution::Family(x, nullspace(a, cols))
    }
}

pub fn det(rows: &[Vector]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut d = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        d *= &m[col][col];
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let rows = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        assert_eq!(rank(&rows), 2);
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 1);
        for r in &rows {
            assert!(dot(r, &ns[0]).is_zero());
        }
    }

    #[test]
    fn solves_unique_and_families() {
        let a = vec![v(&[2, 0]), v(&[0, 4])];
        assert_eq!(
            solve(&a, &v(&[1, 1]), 2),
            Solution::Unique(vec![ratio(1, 2), ratio(1, 4)])
        );
        let a = vec![v(&[1, 1])];
        match solve(&a, &v(&[3]), 2) {
            Solution::Family(x, k) => {
                assert_eq!(dot(&a[0], &x), int(3));
                assert_eq!(k.len(), 1);
            }
            other => panic!("{other:?}"),
        }
        let a = vec![v(&[1, 1]), v(&[2, 2])];
        assert_eq!(solve(&a, &v(&[1, 3]), 2), Solution::Inconsistent);
    }

    #[test]
    fn determinant() {
        assert_eq!(det(&[v(&[2, 3]), v(&[1, 1])]), int(-1));
        assert_eq!(det(&[v(&[0, 1, 0]), v(&[1, 0, 0]), v(&[0, 0, 5])]), int(-5));
        assert_eq!(det(&[v(&[1, 2]), v(&[2, 4])]), int(0));
    }
}
