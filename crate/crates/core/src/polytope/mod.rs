//! Exact rational convex polytopes (dimension 2 to 4) and the toric model
//! of DH densities: push-forwards of Lebesgue measure under linear maps.

mod montecarlo;
mod slice;
mod toric;

pub use montecarlo::{mc_pushforward, sup_distance, Histogram};
pub use slice::{composed_slice_density, projected_slice_density, slice_density};
pub use toric::{delzant_to_s1data, is_delzant, vertex_orders};

use crate::lattice::{Direction, LatticeError};
use crate::linalg::{self, Vector};
use crate::orbifold::OrbifoldError;
use crate::pwlinear::DensityError;
use crate::rational::{common_denominator, format_rational, int, serde_q, Rational};
use num::{BigInt, Integer, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("polytope dimension {0} outside 2..=4")]
    DimensionOutOfRange(usize),
    #[error("point {index} has {got} coordinates, expected {expected}")]
    CoordinateCount {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("vertices span an affine space of dimension {rank}, expected {dim}")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error("direction has {got} coordinates, expected {expected}")]
    DirectionDimension { expected: usize, got: usize },
    #[error("plane spanning vectors are linearly dependent")]
    DependentSpan,
    #[error("degenerate section")]
    DegenerateSection,
    #[error("operation needs a polygon, got a {0}-dimensional polytope")]
    NotPolygon(usize),
    #[error("vertex {0} is not a lattice point")]
    NonLatticeVertex(String),
    #[error("non-generic direction: edge {0} -> {1} has constant level {2}")]
    NonGenericDirection(String, String, String),
    #[error("samples must be at least 10000 and bins at least 10")]
    SamplingParameters,
    #[error("degenerate polytope for sampling (acceptance rate {0})")]
    DegenerateSampling(String),
    #[error("vertex coordinates too large for exact grid sampling")]
    SamplingOverflow,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Orbifold(#[from] OrbifoldError),
}

/// Half-space `normal · x <= offset` with a primitive integer normal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vector,
    pub offset: Rational,
}

impl Facet {
    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.offset - linalg::dot(&self.normal, x)
    }
}

/// Full-dimensional convex polytope with an irredundant vertex list.
///
/// Polygons keep their vertices in counter-clockwise order starting at the
/// lexicographically smallest one; higher dimensions keep them sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRecord", into = "PolytopeRecord")]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vector>,
    #[serde(skip)]
    facets: Vec<Facet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeRecord {
    pub dimension: usize,
    #[serde(with = "serde_q::vecvec")]
    pub vertices: Vec<Vector>,
}

impl TryFrom<PolytopeRecord> for Polytope {
    type Error = PolytopeError;

    fn try_from(r: PolytopeRecord) -> Result<Self, Self::Error> {
        Polytope::new(r.dimension, r.vertices)
    }
}

impl From<Polytope> for PolytopeRecord {
    fn from(p: Polytope) -> Self {
        PolytopeRecord {
            dimension: p.dim,
            vertices: p.vertices,
        }
    }
}

/// Scales a rational vector to a primitive integer one (positive multiple).
fn primitive_normal(v: &[Rational]) -> (Vector, Rational) {
    let den = common_denominator(v);
    let ints: Vec<BigInt> = v.iter().map(|q| (q * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let factor = Rational::new(den, g);
    (v.iter().map(|q| q * &factor).collect(), factor)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

pub(crate) fn affine_rank(points: &[Vector]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let diffs: Vec<Vector> = points[1..].iter().map(|p| linalg::sub(p, first)).collect();
    linalg::rank(&diffs)
}

/// Facets of the convex hull of full-dimensional `points` by enumerating
/// affinely independent `dim`-subsets.
fn hull_facets(points: &[Vector], dim: usize) -> Vec<Facet> {
    let mut facets: Vec<Facet> = Vec::new();
    for subset in combinations(points.len(), dim) {
        let base = &points[subset[0]];
        let rows: Vec<Vector> = subset[1..]
            .iter()
            .map(|&i| linalg::sub(&points[i], base))
            .collect();
        let ns = linalg::nullspace(&rows, dim);
        if ns.len() != 1 {
            continue;
        }
        let (mut normal, _) = primitive_normal(&ns[0]);
        let mut offset = linalg::dot(&normal, base);
        let mut above = false;
        let mut below = false;
        for p in points {
            match linalg::dot(&normal, p).cmp(&offset) {
                Ordering::Greater => above = true,
                Ordering::Less => below = true,
                Ordering::Equal => {}
            }
            if above && below {
                break;
            }
        }
        if above && below {
            continue;
        }
        if above {
            normal = normal.iter().map(|x| -x).collect();
            offset = -offset;
        }
        let facet = Facet { normal, offset };
        if !facets.contains(&facet) {
            facets.push(facet);
        }
    }
    facets
}

fn cross2(o: &[Rational], a: &[Rational], b: &[Rational]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Counter-clockwise hull of planar points without collinear vertices,
/// starting at the lexicographic minimum.
fn ccw_hull(points: &[Vector]) -> Vec<Vector> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vector> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vector> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl Polytope {
    pub fn new(dim: usize, points: Vec<Vector>) -> Result<Self, PolytopeError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(PolytopeError::DimensionOutOfRange(dim));
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(PolytopeError::CoordinateCount {
                    index,
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        let mut pts = points;
        pts.sort();
        pts.dedup();
        let rank = affine_rank(&pts);
        if rank != dim {
            return Err(PolytopeError::NotFullDimensional { rank, dim });
        }
        let vertices = if dim == 2 {
            ccw_hull(&pts)
        } else {
            let facets = hull_facets(&pts, dim);
            pts.into_iter()
                .filter(|p| {
                    let active: Vec<Vector> = facets
                        .iter()
                        .filter(|f| f.slack(p).is_zero())
                        .map(|f| f.normal.clone())
                        .collect();
                    linalg::rank(&active) == dim
                })
                .collect()
        };
        let facets = hull_facets(&vertices, dim);
        Ok(Polytope {
            dim,
            vertices,
            facets,
        })
    }

    pub fn from_ints(dim: usize, points: &[&[i64]]) -> Result<Self, PolytopeError> {
        Self::new(
            dim,
            points
                .iter()
                .map(|p| p.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|f| !f.slack(x).is_negative())
    }

    pub fn contains_interior(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|f| f.slack(x).is_positive())
    }

    /// Vertex average; always an interior point.
    pub fn vertex_centroid(&self) -> Vector {
        let n = int(self.vertices.len() as i64);
        (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| &v[i]).sum::<Rational>() / &n)
            .collect()
    }

    pub fn bounding_box(&self) -> (Vector, Vector) {
        let lo = (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| &v[i]).min().unwrap().clone())
            .collect();
        let hi = (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| &v[i]).max().unwrap().clone())
            .collect();
        (lo, hi)
    }

    pub fn check_direction(&self, x: &Direction) -> Result<(), PolytopeError> {
        if x.dim() != self.dim {
            return Err(PolytopeError::DirectionDimension {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// `(min, max)` of `⟨v, X⟩` over the vertices.
    pub fn level_range(&self, x: &Direction) -> (Rational, Rational) {
        let levels: Vec<Rational> = self.vertices.iter().map(|v| x.pair(v)).collect();
        (
            levels.iter().min().unwrap().clone(),
            levels.iter().max().unwrap().clone(),
        )
    }

    /// Euclidean area of a polygon.
    pub fn area(&self) -> Result<Rational, PolytopeError> {
        if self.dim != 2 {
            return Err(PolytopeError::NotPolygon(self.dim));
        }
        let n = self.vertices.len();
        let twice: Rational = (0..n)
            .map(|i| {
                let (a, b) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
                &a[0] * &b[1] - &a[1] * &b[0]
            })
            .sum();
        Ok(twice.abs() / int(2))
    }

    pub fn to_record(&self) -> PolytopeRecord {
        self.clone().into()
    }

    pub fn describe(&self) -> String {
        let vs: Vec<String> = self
            .vertices
            .iter()
            .map(|v| format!("({})", v.iter().map(format_rational).collect::<Vec<_>>().join(",")))
            .collect();
        vs.join(" ")
    }
}

/// Intersection of `P` with the affine plane `base + u·span1 + v·span2`,
/// as a polygon in the exact `(u, v)` coordinates.
pub fn plane_section(
    p: &Polytope,
    base: &[Rational],
    span1: &Direction,
    span2: &Direction,
) -> Result<Polytope, PolytopeError> {
    for d in [span1, span2] {
        p.check_direction(d)?;
    }
    if base.len() != p.dim() {
        return Err(PolytopeError::CoordinateCount {
            index: 0,
            expected: p.dim(),
            got: base.len(),
        });
    }
    let (s1, s2) = (span1.to_rational(), span2.to_rational());
    if linalg::rank(&[s1.clone(), s2.clone()]) != 2 {
        return Err(PolytopeError::DependentSpan);
    }
    // a·(base + u s1 + v s2) <= b  <=>  (a·s1) u + (a·s2) v <= b - a·base
    let mut lines: Vec<(Rational, Rational, Rational)> = Vec::new();
    for f in p.facets() {
        let (cu, cv, rhs) = (linalg::dot(&f.normal, &s1), linalg::dot(&f.normal, &s2), f.slack(base));
        if cu.is_zero() && cv.is_zero() {
            if rhs.is_negative() {
                return Err(PolytopeError::DegenerateSection);
            }
            continue;
        }
        lines.push((cu, cv, rhs));
    }
    let feasible = |u: &Rational, v: &Rational| {
        lines
            .iter()
            .all(|(a, b, c)| a * u + b * v <= *c)
    };
    let mut corners: Vec<Vector> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = &lines[i];
            let (a2, b2, c2) = &lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let u = (c1 * b2 - c2 * b1) / &det;
            let v = (a1 * c2 - a2 * c1) / &det;
            if feasible(&u, &v) {
                corners.push(vec![u, v]);
            }
        }
    }
    let section = Polytope::new(2, corners).map_err(|_| PolytopeError::DegenerateSection)?;
    let c = section.vertex_centroid();
    let x = linalg::add(&linalg::add(base, &linalg::scale(&s1, &c[0])), &linalg::scale(&s2, &c[1]));
    if !p.contains_interior(&x) {
        return Err(PolytopeError::DegenerateSection);
    }
    Ok(section)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cube() -> Polytope {
        let mut pts = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    pts.push(vec![int(x), int(y), int(z)]);
                }
            }
        }
        Polytope::new(3, pts).unwrap()
    }

    fn dir(c: &[i64]) -> Direction {
        Direction::new(c.to_vec()).unwrap()
    }

    #[test]
    fn hull_drops_redundant_points() {
        let p = Polytope::from_ints(2, &[&[0, 0], &[2, 0], &[1, 0], &[1, 1], &[0, 2], &[2, 2]]).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert_eq!(p.area().unwrap(), int(4));
        assert_eq!(p.vertices()[0], vec![int(0), int(0)]);
        assert_eq!(p.vertices()[1], vec![int(2), int(0)]);

        let c = cube();
        assert_eq!(c.facets().len(), 6);
        let mut with_inner = c.vertices().to_vec();
        with_inner.push(vec![ratio(1, 2), ratio(1, 2), ratio(1, 2)]);
        with_inner.push(vec![ratio(1, 2), int(0), int(0)]);
        with_inner.push(vec![ratio(1, 2), ratio(1, 3), int(0)]);
        assert_eq!(Polytope::new(3, with_inner).unwrap(), c);
    }

    #[test]
    fn simplex_in_four_dimensions() {
        let p = Polytope::from_ints(
            4,
            &[&[0, 0, 0, 0], &[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1], &[0, 0, 0, 0]],
        )
        .unwrap();
        assert_eq!(p.vertices().len(), 5);
        assert_eq!(p.facets().len(), 5);
        assert!(p.contains_interior(&[ratio(1, 10), ratio(1, 10), ratio(1, 10), ratio(1, 10)]));
        assert!(!p.contains(&[ratio(1, 2), ratio(1, 2), ratio(1, 10), int(0)]));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            Polytope::from_ints(2, &[&[0, 0], &[1, 1], &[2, 2]]),
            Err(PolytopeError::NotFullDimensional { rank: 1, dim: 2 })
        ));
        assert!(matches!(
            Polytope::from_ints(5, &[&[0, 0, 0, 0, 0]]),
            Err(PolytopeError::DimensionOutOfRange(5))
        ));
        assert!(matches!(
            Polytope::from_ints(2, &[&[0, 0], &[1, 1, 1]]),
            Err(PolytopeError::CoordinateCount { index: 1, .. })
        ));
    }

    #[test]
    fn axis_aligned_cube_section() {
        let s = plane_section(&cube(), &[int(0), int(0), ratio(1, 2)], &dir(&[1, 0, 0]), &dir(&[0, 1, 0]))
            .unwrap();
        assert_eq!(s, Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]).unwrap());
    }

    #[test]
    fn simplex_section() {
        let p = Polytope::from_ints(3, &[&[0, 0, 0], &[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]).unwrap();
        let s = plane_section(&p, &[ratio(1, 2), int(0), int(0)], &dir(&[0, 1, 0]), &dir(&[0, 0, 1]))
            .unwrap();
        let expected = Polytope::new(
            2,
            vec![
                vec![int(0), int(0)],
                vec![ratio(3, 2), int(0)],
                vec![int(0), ratio(3, 2)],
            ],
        )
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn section_errors() {
        let c = cube();
        assert_eq!(
            plane_section(&c, &[int(0), int(0), int(3)], &dir(&[1, 0, 0]), &dir(&[0, 1, 0])),
            Err(PolytopeError::DegenerateSection)
        );
        // plane containing a facet meets no interior point
        assert_eq!(
            plane_section(&c, &[int(0), int(0), int(1)], &dir(&[1, 0, 0]), &dir(&[0, 1, 0])),
            Err(PolytopeError::DegenerateSection)
        );
        assert_eq!(
            plane_section(&c, &[int(0), int(0), int(0)], &dir(&[1, 0, 0]), &dir(&[-1, 0, 0])),
            Err(PolytopeError::DependentSpan)
        );
    }

    #[test]
    fn record_round_trip() {
        let json = r#"{"dimension":2,"vertices":[["0","0"],["2","0"],["1","1"],["0","1"]]}"#;
        let p: Polytope = serde_json::from_str(json).unwrap();
        assert_eq!(p.vertices().len(), 4);
        let back: Polytope = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Polytope>(r#"{"dimension":2,"vertices":[["0","0"],["1","1"]]}"#).is_err());
    }
}
