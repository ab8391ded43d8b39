//! Random valid inputs for property and acceptance tests.

use crate::lattice::{unimodular_completion, Direction};
use crate::linalg::{self, Solution, Vector};
use crate::orbifold::{ExtremalSet, InteriorFixedPoint, S1FixedPointData};
use crate::polytope::{delzant_to_s1data, plane_section, Polytope, PolytopeError};
use crate::rational::{int, ratio, Rational};
use crate::xray::{Face, XRay};
use num::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub const MAX_WEIGHT: i64 = 9;
pub const MAX_ORDER: u32 = 4;

fn small_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    ratio(rng.gen_range(lo * d..=hi * d), d)
}

pub fn random_interior_point<R: Rng>(rng: &mut R, level: Rational) -> InteriorFixedPoint {
    let p1 = -rng.gen_range(1..=MAX_WEIGHT);
    let p2 = rng.gen_range(1..=MAX_WEIGHT);
    let (w1, w2) = if rng.gen() { (p1, p2) } else { (p2, p1) };
    InteriorFixedPoint::new(level, w1, w2, rng.gen_range(1..=MAX_ORDER)).expect("valid by construction")
}

/// One to six interior points sharing a random level.
pub fn random_point_list<R: Rng>(rng: &mut R) -> Vec<InteriorFixedPoint> {
    let level = small_rational(rng, -20, 20, 6);
    let n = rng.gen_range(1..=6);
    (0..n).map(|_| random_interior_point(rng, level.clone())).collect()
}

/// Weights `(a, b)` with `a, b` of the given sign and an order `d` so that
/// `d·a·b = k`, if any exist within the generator bounds.
fn factor_isolated(k: i64, sign: i64) -> Option<(i64, i64, u32)> {
    for d in 1..=MAX_ORDER {
        for a in 1..=MAX_WEIGHT {
            let rest = k / (i64::from(d) * a);
            if rest * i64::from(d) * a == k && (1..=MAX_WEIGHT).contains(&rest) {
                return Some((sign * a, sign * rest, d));
            }
        }
    }
    None
}

/// Random closure-consistent fixed-point data.
///
/// Interior points get random levels and weights. The minimum is a fixed
/// surface (or sometimes an isolated point) and the maximum is placed so the
/// telescoped density closes there, as an isolated point when the final
/// slope factors within the weight bounds and as a fixed surface otherwise.
pub fn random_s1_data<R: Rng>(rng: &mut R) -> S1FixedPointData {
    loop {
        if let Some(d) = try_random_s1_data(rng) {
            return d;
        }
    }
}

fn try_random_s1_data<R: Rng>(rng: &mut R) -> Option<S1FixedPointData> {
    let n = rng.gen_range(0..=6);
    let mut levels: Vec<Rational> = (0..n).map(|_| small_rational(rng, 1, 8, 4)).collect();
    levels.sort();
    // let some points share a wall
    for i in 1..levels.len() {
        if rng.gen_ratio(1, 4) {
            levels[i] = levels[i - 1].clone();
        }
    }
    let interior: Vec<InteriorFixedPoint> =
        levels.into_iter().map(|l| random_interior_point(rng, l)).collect();

    let isolated_min = rng.gen_bool(0.3);
    let (a, b, d) = (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=2u32));
    let start_slope = if isolated_min {
        ratio(1, i64::from(d) * a * b)
    } else {
        small_rational(rng, -2, 2, 3)
    };

    // telescope from value 0 at level 0
    let mut t = Rational::zero();
    let mut value = Rational::zero();
    let mut slope = start_slope.clone();
    let mut lowest: Option<Rational> = None;
    for p in &interior {
        if p.level != t {
            value += &slope * (&p.level - &t);
            t = p.level.clone();
            lowest = Some(lowest.map_or(value.clone(), |l| l.min(value.clone())));
        }
        slope += p.localization_term();
    }

    let min = if isolated_min {
        if lowest.as_ref().is_some_and(|l| !l.is_positive()) {
            return None;
        }
        ExtremalSet::isolated(Rational::zero(), a, b, d)
    } else {
        let lift = lowest.map_or(Rational::zero(), |l| (-l).max(Rational::zero())) + small_rational(rng, 1, 6, 4);
        value += &lift;
        ExtremalSet::surface(Rational::zero(), lift, -start_slope)
    };

    if slope.is_negative() && value.is_positive() && rng.gen_bool(0.5) {
        let k = -slope.recip();
        if let Some((w1, w2, order)) = k
            .is_integer()
            .then(|| i64::try_from(k.to_integer()).ok())
            .flatten()
            .and_then(|k| factor_isolated(k, -1))
        {
            let max = ExtremalSet::isolated(&t + &value / -&slope, w1, w2, order);
            return S1FixedPointData::new(min, max, interior).ok();
        }
    }
    let gap = if slope.is_negative() {
        // stop before the density reaches zero
        &value / -&slope * ratio(rng.gen_range(1..=7), 8)
    } else {
        small_rational(rng, 1, 3, 4)
    };
    let end_value = &value + &slope * &gap;
    let max = ExtremalSet::surface(&t + gap, end_value, slope);
    S1FixedPointData::new(min, max, interior).ok()
}

/// Delzant base shapes: rectangles, scaled triangles and Hirzebruch
/// trapezoids.
fn delzant_base<R: Rng>(rng: &mut R) -> Vec<[i64; 2]> {
    match rng.gen_range(0..3) {
        0 => {
            let (a, b) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
            vec![[0, 0], [a, 0], [a, b], [0, b]]
        }
        1 => {
            let k = rng.gen_range(2..=6);
            vec![[0, 0], [k, 0], [0, k]]
        }
        _ => {
            let (a, b, k) = (rng.gen_range(2..=4), rng.gen_range(2..=4), rng.gen_range(0..=2));
            vec![[0, 0], [a + k * b, 0], [a, b], [0, b]]
        }
    }
}

fn lattice_length(v: [i64; 2]) -> i64 {
    crate::lattice::gcd_all(&v)
}

/// Cuts the corner at vertex `i` by one lattice step along both edges,
/// which keeps the polygon Delzant when both edges are long enough.
fn blow_up(verts: &mut Vec<[i64; 2]>, i: usize) -> bool {
    let n = verts.len();
    let v = verts[i];
    let (prev, next) = (verts[(i + n - 1) % n], verts[(i + 1) % n]);
    let e1 = [prev[0] - v[0], prev[1] - v[1]];
    let e2 = [next[0] - v[0], next[1] - v[1]];
    let (l1, l2) = (lattice_length(e1), lattice_length(e2));
    if l1 < 2 || l2 < 2 {
        return false;
    }
    let a = [v[0] + e1[0] / l1, v[1] + e1[1] / l1];
    let b = [v[0] + e2[0] / l2, v[1] + e2[1] / l2];
    verts.splice(i..=i, [a, b]);
    true
}

/// A random matrix in `SL(2, Z)` with small entries.
fn random_sl2<R: Rng>(rng: &mut R) -> [[i64; 2]; 2] {
    let mut m = [[1, 0], [0, 1]];
    for _ in 0..rng.gen_range(0..=3) {
        let k = rng.gen_range(-2..=2);
        let e = if rng.gen() { [[1, k], [0, 1]] } else { [[1, 0], [k, 1]] };
        m = [
            [m[0][0] * e[0][0] + m[0][1] * e[1][0], m[0][0] * e[0][1] + m[0][1] * e[1][1]],
            [m[1][0] * e[0][0] + m[1][1] * e[1][0], m[1][0] * e[0][1] + m[1][1] * e[1][1]],
        ];
    }
    m
}

/// Random Delzant polygon: a base shape, a few corner blow-ups, then an
/// integral unimodular change of coordinates and a lattice translation.
pub fn random_delzant_polygon<R: Rng>(rng: &mut R) -> Polytope {
    let mut verts = delzant_base(rng);
    for _ in 0..rng.gen_range(0..=3) {
        let i = rng.gen_range(0..verts.len());
        blow_up(&mut verts, i);
    }
    let m = random_sl2(rng);
    let shift = [rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
    let points: Vec<Vector> = verts
        .iter()
        .map(|v| {
            vec![
                int(m[0][0] * v[0] + m[0][1] * v[1] + shift[0]),
                int(m[1][0] * v[0] + m[1][1] * v[1] + shift[1]),
            ]
        })
        .collect();
    Polytope::new(2, points).expect("unimodular image of a polygon")
}

pub fn random_direction<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> Direction {
    loop {
        let v: Vec<i64> = (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        if let Ok(d) = Direction::primitive(&v) {
            return d;
        }
    }
}

/// Random Delzant polygon with a direction for which the fixed-point data
/// exists (no constant level along a non-extremal edge).
pub fn random_delzant_case<R: Rng>(rng: &mut R) -> (Polytope, Direction) {
    loop {
        let p = random_delzant_polygon(rng);
        let x = random_direction(rng, 2, 3);
        match delzant_to_s1data(&p, &x) {
            Ok(_) => return (p, x),
            Err(PolytopeError::NonGenericDirection(..)) => continue,
            Err(e) => panic!("generator produced invalid polygon: {e}"),
        }
    }
}

/// Convex hull of 3 to 10 random rational points.
pub fn random_convex_polygon<R: Rng>(rng: &mut R) -> Polytope {
    loop {
        let n = rng.gen_range(3..=10);
        let pts: Vec<Vector> = (0..n)
            .map(|_| vec![small_rational(rng, -6, 6, 3), small_rational(rng, -6, 6, 3)])
            .collect();
        if let Ok(p) = Polytope::new(2, pts) {
            return p;
        }
    }
}

pub fn random_polytope<R: Rng>(rng: &mut R, dim: usize) -> Polytope {
    loop {
        let n = rng.gen_range(dim + 2..=dim + 6);
        let pts: Vec<Vector> = (0..n)
            .map(|_| (0..dim).map(|_| small_rational(rng, -4, 4, 2)).collect())
            .collect();
        if let Ok(p) = Polytope::new(dim, pts) {
            return p;
        }
    }
}

/// Projection kernel and line data for a polytope.
#[derive(Debug, Clone)]
pub struct PlaneCase {
    pub polytope: Polytope,
    pub kernel: Direction,
    pub line_base: Vector,
    pub line_dir: Direction,
}

/// Random 3- or 4-dimensional polytope with a projection kernel and a line
/// through the projected vertex centroid, so the plane over the line meets
/// the interior.
pub fn random_plane_case<R: Rng>(rng: &mut R) -> PlaneCase {
    let dim = *[3usize, 4].choose(rng).unwrap();
    let polytope = random_polytope(rng, dim);
    let kernel = random_direction(rng, dim, 2);
    let mut cols = unimodular_completion(&kernel).expect("small kernel");
    cols.push(kernel.coords().to_vec());
    let rows: Vec<Vector> = (0..dim)
        .map(|r| cols.iter().map(|c| int(c[r])).collect())
        .collect();
    let coords = match linalg::solve(&rows, &polytope.vertex_centroid(), dim) {
        Solution::Unique(y) => y,
        _ => unreachable!("unimodular frame"),
    };
    PlaneCase {
        polytope,
        kernel,
        line_base: coords[..dim - 1].to_vec(),
        line_dir: random_direction(rng, dim - 1, 3),
    }
}

/// An x-ray with random walls, low-dimensional faces and two endpoints.
#[derive(Debug, Clone)]
pub struct XRayCase {
    pub xray: XRay,
    pub x0: Vector,
    pub x1: Vector,
}

const BOX: i64 = 4;

fn box_polytope(dim: usize) -> Polytope {
    let corners: Vec<Vector> = (0..1usize << dim)
        .map(|m| (0..dim).map(|i| int(BOX * ((m >> i) & 1) as i64)).collect())
        .collect();
    Polytope::new(dim, corners).expect("box")
}

fn identity(dim: usize) -> Vec<Vector> {
    (0..dim)
        .map(|i| (0..dim).map(|j| int((i == j) as i64)).collect())
        .collect()
}

fn interior_point<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    (0..dim).map(|_| small_rational(rng, 1, BOX - 1, 8)).collect()
}

/// Random chord of the box through an interior point, as a wall face in
/// the plane.
fn planar_wall<R: Rng>(rng: &mut R, boxp: &Polytope, label: String) -> Face {
    loop {
        let through = interior_point(rng, 2);
        let d = random_direction(rng, 2, 3);
        // chord endpoints: intersect the line with the box
        let section_end = |sign: i64| {
            let dq: Vector = d.to_rational().iter().map(|c| c * int(sign)).collect();
            let mut s_max: Option<Rational> = None;
            for f in boxp.facets() {
                let rate = linalg::dot(&f.normal, &dq);
                if rate.is_positive() {
                    let s = f.slack(&through) / rate;
                    s_max = Some(s_max.map_or(s.clone(), |m| m.min(s)));
                }
            }
            linalg::add(&through, &linalg::scale(&dq, &s_max.unwrap()))
        };
        let (a, b) = (section_end(-1), section_end(1));
        if let Ok(f) = Face::new(2, 1, vec![d.to_rational()], vec![a, b], label.clone()) {
            return f;
        }
    }
}

/// Random plane section of the cube as a wall face in space.
fn spatial_wall<R: Rng>(rng: &mut R, cube: &Polytope, label: String) -> Face {
    loop {
        let through = interior_point(rng, 3);
        let normal = random_direction(rng, 3, 2).to_rational();
        let span = linalg::nullspace(&[normal], 3);
        let (Ok(s1), Ok(s2)) = (Direction::from_rational(&span[0]), Direction::from_rational(&span[1])) else {
            continue;
        };
        let Ok(section) = plane_section(cube, &through, &s1, &s2) else {
            continue;
        };
        let (q1, q2) = (s1.to_rational(), s2.to_rational());
        let verts: Vec<Vector> = section
            .vertices()
            .iter()
            .map(|uv| linalg::add(&linalg::add(&through, &linalg::scale(&q1, &uv[0])), &linalg::scale(&q2, &uv[1])))
            .collect();
        if let Ok(f) = Face::new(3, 2, vec![q1, q2], verts, label.clone()) {
            return f;
        }
    }
}

fn segment_face<R: Rng>(rng: &mut R, dim: usize, label: String) -> Face {
    loop {
        let (a, b) = (interior_point(rng, dim), interior_point(rng, dim));
        if a != b {
            let d = linalg::sub(&b, &a);
            return Face::new(dim, 1, vec![d], vec![a, b], label).expect("segment");
        }
    }
}

/// Random x-ray in a box of side 4 (ambient dimension 2 or 3): one to four
/// walls, a few faces of codimension at least two, and endpoints at least
/// distance 1 from the boundary.
pub fn random_xray_case<R: Rng>(rng: &mut R, dim: usize) -> XRayCase {
    assert!(dim == 2 || dim == 3, "x-ray cases exist in dimensions 2 and 3");
    let image = box_polytope(dim);
    let mut faces = vec![Face::new(dim, dim, identity(dim), image.vertices().to_vec(), "image").unwrap()];
    for i in 0..rng.gen_range(1..=4) {
        let label = format!("wall{i}");
        faces.push(if dim == 2 {
            planar_wall(rng, &image, label)
        } else {
            spatial_wall(rng, &image, label)
        });
    }
    for i in 0..rng.gen_range(1..=3) {
        let point = interior_point(rng, dim);
        faces.push(Face::new(dim, 0, vec![], vec![point], format!("point{i}")).unwrap());
    }
    if dim == 3 {
        for i in 0..rng.gen_range(1..=2) {
            faces.push(segment_face(rng, 3, format!("edge{i}")));
        }
    }
    let x0 = interior_point(rng, dim);
    let x1 = loop {
        let x = interior_point(rng, dim);
        if x != x0 {
            break x;
        }
    };
    XRayCase {
        xray: XRay::new(dim, image, faces).expect("synthetic x-ray is valid"),
        x0,
        x1,
    }
}

/// Mutable scalar fields of fixed-point data: levels of every set plus the
/// weights and order of every isolated point. Surface areas and Euler
/// integrals are not included.
pub fn mutable_fields(data: &S1FixedPointData) -> Vec<String> {
    let mut fields = vec!["min.level".to_string()];
    if matches!(data.min(), ExtremalSet::IsolatedPoint { .. }) {
        fields.extend(["min.weight1", "min.weight2", "min.order"].map(String::from));
    }
    fields.push("max.level".into());
    if matches!(data.max(), ExtremalSet::IsolatedPoint { .. }) {
        fields.extend(["max.weight1", "max.weight2", "max.order"].map(String::from));
    }
    for i in 0..data.interior().len() {
        fields.extend(["level", "weight1", "weight2", "order"].map(|f| format!("interior[{i}].{f}")));
    }
    fields
}

fn other_magnitude<R: Rng>(rng: &mut R, old: i64) -> i64 {
    loop {
        let m = rng.gen_range(1..=MAX_WEIGHT);
        if m != old.abs() {
            return old.signum() * m;
        }
    }
}

fn other_order<R: Rng>(rng: &mut R, old: u32) -> u32 {
    loop {
        let d = rng.gen_range(1..=MAX_ORDER);
        if d != old {
            return d;
        }
    }
}

/// Random rational strictly between `lo` and `hi`, different from `old`.
fn other_level<R: Rng>(rng: &mut R, lo: &Rational, hi: &Rational, old: &Rational) -> Rational {
    loop {
        let t = lo + (hi - lo) * ratio(rng.gen_range(1..64), 64);
        if &t != old {
            return t;
        }
    }
}

fn mutate_extremal<R: Rng>(rng: &mut R, set: &ExtremalSet, field: &str, lo: &Rational, hi: &Rational) -> ExtremalSet {
    let mut set = set.clone();
    match (&mut set, field) {
        (ExtremalSet::IsolatedPoint { level, .. } | ExtremalSet::FixedSurface { level, .. }, "level") => {
            *level = other_level(rng, lo, hi, level);
        }
        (ExtremalSet::IsolatedPoint { weight1, .. }, "weight1") => *weight1 = other_magnitude(rng, *weight1),
        (ExtremalSet::IsolatedPoint { weight2, .. }, "weight2") => *weight2 = other_magnitude(rng, *weight2),
        (ExtremalSet::IsolatedPoint { order, .. }, "order") => *order = other_order(rng, *order),
        _ => unreachable!("field {field} listed by mutable_fields"),
    }
    set
}

/// Changes one field chosen uniformly from [`mutable_fields`], keeping the
/// data valid: weights keep their sign, orders stay in `1..=4`, and levels
/// stay ordered (the minimum below every interior level, the maximum above).
pub fn mutate_one_field<R: Rng>(rng: &mut R, data: &S1FixedPointData) -> (String, S1FixedPointData) {
    let fields = mutable_fields(data);
    let field = fields.choose(rng).unwrap().clone();
    let (min, max) = (data.min().clone(), data.max().clone());
    let mut interior = data.interior().to_vec();
    let lowest = interior.first().map_or(max.level().clone(), |p| p.level.clone());
    let highest = interior.last().map_or(min.level().clone(), |p| p.level.clone());
    let span = max.level() - min.level();
    let (min, max) = match field.split_once('.').unwrap() {
        ("min", f) => (mutate_extremal(rng, &min, f, &(min.level() - &span), &lowest), max),
        ("max", f) => {
            let m = mutate_extremal(rng, &max, f, &highest, &(max.level() + &span));
            (min, m)
        }
        (slot, f) => {
            let i: usize = slot.trim_start_matches("interior[").trim_end_matches(']').parse().unwrap();
            let p = &mut interior[i];
            match f {
                "level" => p.level = other_level(rng, min.level(), max.level(), &p.level),
                "weight1" => p.weight1 = other_magnitude(rng, p.weight1),
                "weight2" => p.weight2 = other_magnitude(rng, p.weight2),
                _ => p.order = other_order(rng, p.order),
            }
            (min, max)
        }
    };
    let mutated = S1FixedPointData::new(min, max, interior).expect("mutation keeps data valid");
    (field, mutated)
}
