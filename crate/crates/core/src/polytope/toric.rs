use super::{Polytope, PolytopeError};
use crate::lattice::{det_i64, Direction};
use crate::orbifold::{ExtremalSet, InteriorFixedPoint, S1FixedPointData};
use crate::rational::{format_point, int, Rational};
use num::{One, Signed, ToPrimitive};

fn lattice_vertices(p: &Polytope) -> Result<Vec<Vec<i64>>, PolytopeError> {
    if p.dim() != 2 {
        return Err(PolytopeError::NotPolygon(p.dim()));
    }
    p.vertices()
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| {
                    c.denom()
                        .is_one()
                        .then(|| c.numer().to_i64())
                        .flatten()
                        .ok_or_else(|| PolytopeError::NonLatticeVertex(format_point(v).join(",")))
                })
                .collect()
        })
        .collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn primitive(v: &[i64]) -> Vec<i64> {
    Direction::primitive(v)
        .expect("polygon edges are nonzero")
        .coords()
        .to_vec()
}

/// Primitive edge vectors leaving vertex `i` towards its two neighbours
/// (previous, next in counter-clockwise order).
fn edge_pair(verts: &[Vec<i64>], i: usize) -> (Vec<i64>, Vec<i64>) {
    let n = verts.len();
    let prev = &verts[(i + n - 1) % n];
    let next = &verts[(i + 1) % n];
    (
        primitive(&sub(prev, &verts[i])),
        primitive(&sub(next, &verts[i])),
    )
}

/// `|det(u_1, u_2)|` of the primitive edge vectors at each vertex; 1 at
/// every vertex means the polygon is Delzant.
pub fn vertex_orders(p: &Polytope) -> Result<Vec<u32>, PolytopeError> {
    let verts = lattice_vertices(p)?;
    Ok((0..verts.len())
        .map(|i| {
            let (u1, u2) = edge_pair(&verts, i);
            det_i64(&[u1, u2]).unsigned_abs() as u32
        })
        .collect())
}

pub fn is_delzant(p: &Polytope) -> Result<bool, PolytopeError> {
    Ok(vertex_orders(p)?.iter().all(|&d| d == 1))
}

/// Fixed surface for the edge `verts[i] -> verts[i+1]` lying on the
/// extremal level: area is the lattice length; the Euler integral comes
/// from how fast the level-set segment grows as it leaves the edge.
fn edge_surface(verts: &[Vec<i64>], i: usize, x: &Direction, at_min: bool) -> ExtremalSet {
    let n = verts.len();
    let a = &verts[i];
    let b = &verts[(i + 1) % n];
    let level = int(x.pair_int(a));
    let delta = sub(b, a);
    let area = int(crate::lattice::gcd_all(&delta));
    // neighbouring edges away from the extremal one
    let wa = primitive(&sub(&verts[(i + n - 1) % n], a));
    let wb = primitive(&sub(&verts[(i + 2) % n], b));
    let (qa, qb) = (int(x.pair_int(&wa)), int(x.pair_int(&wb)));
    // push-forward density of a level segment q - p is |(q - p)·JX| / |X|^2
    let jx = [-x.coords()[1], x.coords()[0]];
    let norm2 = int(x.pair_int(x.coords()));
    let cross = |v: &[i64]| int(v[0] * jx[0] + v[1] * jx[1]);
    let lambda0 = cross(&delta) / &norm2;
    let rate = (cross(&wb) / &qb - cross(&wa) / &qa) / &norm2;
    let slope: Rational = if lambda0.is_negative() { -rate } else { rate };
    let euler_integral = if at_min { -slope } else { slope };
    ExtremalSet::surface(level, area, euler_integral)
}

/// Reads the circle-action fixed-point data of the toric model: the level
/// of the circle generated by `X` is `⟨·, X⟩`, vertices are fixed points
/// whose weights pair the primitive edge vectors with `X`, and an edge on
/// the minimum or maximum level is a fixed surface.
///
/// Orders are `|det(u_1, u_2)|` of the edge vectors. For Delzant polygons
/// (all orders 1) building the DH function from this data reproduces
/// [`super::slice_density`] exactly.
pub fn delzant_to_s1data(p: &Polytope, x: &Direction) -> Result<S1FixedPointData, PolytopeError> {
    p.check_direction(x)?;
    let verts = lattice_vertices(p)?;
    let n = verts.len();
    let levels: Vec<i64> = verts.iter().map(|v| x.pair_int(v)).collect();
    let lo = *levels.iter().min().unwrap();
    let hi = *levels.iter().max().unwrap();

    let mut min_set = None;
    let mut max_set = None;
    for i in 0..n {
        let j = (i + 1) % n;
        if levels[i] != levels[j] {
            continue;
        }
        if levels[i] == lo {
            min_set = Some(edge_surface(&verts, i, x, true));
        } else if levels[i] == hi {
            max_set = Some(edge_surface(&verts, i, x, false));
        } else {
            return Err(PolytopeError::NonGenericDirection(
                format!("{:?}", verts[i]),
                format!("{:?}", verts[j]),
                levels[i].to_string(),
            ));
        }
    }

    let mut interior = Vec::new();
    for i in 0..n {
        let (u1, u2) = edge_pair(&verts, i);
        let (w1, w2) = (x.pair_int(&u1), x.pair_int(&u2));
        let order = det_i64(&[u1, u2]).unsigned_abs() as u32;
        let level = int(levels[i]);
        if levels[i] == lo {
            min_set.get_or_insert_with(|| ExtremalSet::isolated(level, w1, w2, order));
        } else if levels[i] == hi {
            max_set.get_or_insert_with(|| ExtremalSet::isolated(level, w1, w2, order));
        } else {
            interior.push(InteriorFixedPoint::new(level, w1, w2, order)?);
        }
    }
    Ok(S1FixedPointData::new(
        min_set.expect("polygon has a lowest vertex"),
        max_set.expect("polygon has a highest vertex"),
        interior,
    )?)
}
