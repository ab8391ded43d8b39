//! Face stratifications of a moment image and transversal line selection.
//!
//! A face of dimension `m` is stored by an affine basis (its direction
//! space) and a vertex list whose convex hull is the closed carrier. Lines
//! are tested against faces by solving for the intersection with the affine
//! hull and then locating the solution in local carrier coordinates.

use crate::lattice::{det_i64, unimodular_completion, Direction, LatticeError};
use crate::linalg::{self, Solution, Vector};
use crate::polytope::{Polytope, PolytopeError, PolytopeRecord};
use crate::rational::{format_point, format_rational, int, serde_q, Rational};
use num::{BigInt, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XRayError {
    #[error("x-ray ambient dimension {0} outside 2..=3")]
    AmbientDimension(usize),
    #[error("face {label}: {reason}")]
    InvalidFace { label: String, reason: String },
    #[error("face {0} is not contained in the moment image")]
    FaceOutsideImage(String),
    #[error("expected exactly one top-dimensional face equal to the moment image, found {0}")]
    TopFace(usize),
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("point {0} lies outside the moment image")]
    OutsideMomentImage(String),
    #[error("coincident endpoints")]
    CoincidentEndpoints,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("max_attempts must be at least 1")]
    NoAttempts,
    #[error("selection failed after {attempts} attempts (finest grid 1/2^{finest_exponent})")]
    SelectionFailed { attempts: usize, finest_exponent: u32 },
    #[error("subtorus splitting needs dimension at least 2, got {0}")]
    SplitDimension(usize),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Closed carrier in the face's local affine coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Carrier {
    Point,
    Segment(Rational, Rational),
    Region(Polytope),
}

impl Carrier {
    fn contains(&self, c: &[Rational], relative_interior: bool) -> bool {
        match self {
            Carrier::Point => true,
            Carrier::Segment(lo, hi) if relative_interior => lo < &c[0] && &c[0] < hi,
            Carrier::Segment(lo, hi) => lo <= &c[0] && &c[0] <= hi,
            Carrier::Region(p) if relative_interior => p.contains_interior(c),
            Carrier::Region(p) => p.contains(c),
        }
    }

    /// Whether the local line `c + s·d` meets the closed carrier.
    fn meets_line(&self, c: &[Rational], d: &[Rational]) -> bool {
        match self {
            Carrier::Point => linalg::is_zero(d),
            Carrier::Segment(..) if !d[0].is_zero() => true,
            Carrier::Segment(..) => self.contains(c, false),
            Carrier::Region(p) => {
                let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = (None, None);
                for f in p.facets() {
                    let rate = linalg::dot(&f.normal, d);
                    let slack = f.slack(c);
                    if rate.is_zero() {
                        if slack.is_negative() {
                            return false;
                        }
                        continue;
                    }
                    let bound = slack / &rate;
                    if rate.is_positive() {
                        hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
                    } else {
                        lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
                    }
                }
                match (lo, hi) {
                    (Some(l), Some(h)) => l <= h,
                    _ => true,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceRecord {
    pub dim: usize,
    #[serde(with = "serde_q::vecvec")]
    pub basis: Vec<Vector>,
    #[serde(with = "serde_q::vecvec")]
    pub vertices: Vec<Vector>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FaceRecord", into = "FaceRecord")]
pub struct Face {
    dim: usize,
    basis: Vec<Vector>,
    vertices: Vec<Vector>,
    label: String,
    #[serde(skip)]
    carrier: Carrier,
}

impl TryFrom<FaceRecord> for Face {
    type Error = XRayError;

    fn try_from(r: FaceRecord) -> Result<Self, Self::Error> {
        let ambient = r.vertices.first().map_or(0, Vec::len);
        Face::new(ambient, r.dim, r.basis, r.vertices, r.label)
    }
}

impl From<Face> for FaceRecord {
    fn from(f: Face) -> Self {
        FaceRecord {
            dim: f.dim,
            basis: f.basis,
            vertices: f.vertices,
            label: f.label,
        }
    }
}

/// Rows of the `ambient x m` matrix whose columns are the basis vectors.
fn columns(basis: &[Vector], ambient: usize) -> Vec<Vector> {
    (0..ambient)
        .map(|i| basis.iter().map(|b| b[i].clone()).collect())
        .collect()
}

impl Face {
    pub fn new(
        ambient: usize,
        dim: usize,
        basis: Vec<Vector>,
        vertices: Vec<Vector>,
        label: impl Into<String>,
    ) -> Result<Self, XRayError> {
        let label = label.into();
        let invalid = |reason: String| XRayError::InvalidFace {
            label: label.clone(),
            reason,
        };
        if vertices.is_empty() {
            return Err(invalid("no vertices".into()));
        }
        if dim > ambient {
            return Err(invalid(format!("dimension {dim} exceeds ambient {ambient}")));
        }
        if basis.len() != dim || linalg::rank(&basis) != dim {
            return Err(invalid(format!("basis must have {dim} independent vectors")));
        }
        if basis.iter().chain(&vertices).any(|v| v.len() != ambient) {
            return Err(invalid(format!("coordinates must have length {ambient}")));
        }
        let rows = columns(&basis, ambient);
        let mut local = Vec::with_capacity(vertices.len());
        for v in &vertices {
            match linalg::solve(&rows, &linalg::sub(v, &vertices[0]), dim) {
                Solution::Unique(c) => local.push(c),
                _ => return Err(invalid("vertex outside the affine span of the basis".into())),
            }
        }
        let carrier = match dim {
            0 => Carrier::Point,
            1 => {
                let lo = local.iter().map(|c| &c[0]).min().unwrap().clone();
                let hi = local.iter().map(|c| &c[0]).max().unwrap().clone();
                if lo == hi {
                    return Err(invalid("vertices do not span a segment".into()));
                }
                Carrier::Segment(lo, hi)
            }
            _ => Carrier::Region(
                Polytope::new(dim, local).map_err(|e| invalid(e.to_string()))?,
            ),
        };
        Ok(Face {
            dim,
            basis,
            vertices,
            label,
            carrier,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn ambient(&self) -> usize {
        self.vertices[0].len()
    }

    fn local_coords(&self, x: &[Rational]) -> Option<Vector> {
        let rows = columns(&self.basis, self.ambient());
        match linalg::solve(&rows, &linalg::sub(x, &self.vertices[0]), self.dim) {
            Solution::Unique(c) => Some(c),
            _ => None,
        }
    }

    /// Closed-carrier membership.
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.local_coords(x).is_some_and(|c| self.carrier.contains(&c, false))
    }

    /// Whether `v` lies in the face's direction space.
    pub fn is_parallel(&self, v: &[Rational]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        linalg::rank(&rows) == self.dim
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XRayRecord {
    pub ambient_dim: usize,
    pub moment_image: PolytopeRecord,
    pub faces: Vec<Face>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "XRayRecord", into = "XRayRecord")]
pub struct XRay {
    ambient_dim: usize,
    moment_image: Polytope,
    faces: Vec<Face>,
}

impl TryFrom<XRayRecord> for XRay {
    type Error = XRayError;

    fn try_from(r: XRayRecord) -> Result<Self, Self::Error> {
        XRay::new(r.ambient_dim, Polytope::try_from(r.moment_image)?, r.faces)
    }
}

impl From<XRay> for XRayRecord {
    fn from(x: XRay) -> Self {
        XRayRecord {
            ambient_dim: x.ambient_dim,
            moment_image: x.moment_image.into(),
            faces: x.faces,
        }
    }
}

impl XRay {
    pub fn new(ambient_dim: usize, moment_image: Polytope, faces: Vec<Face>) -> Result<Self, XRayError> {
        if !(2..=3).contains(&ambient_dim) {
            return Err(XRayError::AmbientDimension(ambient_dim));
        }
        if moment_image.dim() != ambient_dim {
            return Err(XRayError::AmbientDimension(moment_image.dim()));
        }
        for f in &faces {
            if f.ambient() != ambient_dim {
                return Err(XRayError::InvalidFace {
                    label: f.label.clone(),
                    reason: format!("coordinates must have length {ambient_dim}"),
                });
            }
            if !f.vertices.iter().all(|v| moment_image.contains(v)) {
                return Err(XRayError::FaceOutsideImage(f.label.clone()));
            }
        }
        let tops: Vec<&Face> = faces.iter().filter(|f| f.dim == ambient_dim).collect();
        // both carriers are convex and already contain each other's vertices one way
        let top_is_image = tops.len() == 1
            && tops[0].dim == ambient_dim
            && moment_image.vertices().iter().all(|v| tops[0].contains(v));
        if !top_is_image {
            return Err(XRayError::TopFace(tops.len()));
        }
        Ok(XRay {
            ambient_dim,
            moment_image,
            faces,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn moment_image(&self) -> &Polytope {
        &self.moment_image
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, label: &str) -> Option<&Face> {
        self.faces.iter().find(|f| f.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Disjoint,
    TransversalCrossing {
        #[serde(with = "serde_q::vec")]
        point: Vector,
    },
    NonTransversal,
}

/// Where the line `base + s·dir` meets a face.
///
/// A crossing counts as transversal only when the line meets the closed
/// carrier in a single point of its relative interior; touching the
/// relative boundary or running inside the affine hull is non-transversal.
pub fn classify_line_vs_face(base: &[Rational], dir: &Direction, face: &Face) -> Classification {
    let ambient = face.ambient();
    let d = dir.to_rational();
    // unknowns (c_1..c_m, s): Σ c_j b_j - s·dir = base - v_0
    let rows: Vec<Vector> = (0..ambient)
        .map(|i| {
            let mut r: Vector = face.basis.iter().map(|b| b[i].clone()).collect();
            r.push(-&d[i]);
            r
        })
        .collect();
    let rhs = linalg::sub(base, &face.vertices[0]);
    match linalg::solve(&rows, &rhs, face.dim + 1) {
        Solution::Inconsistent => Classification::Disjoint,
        Solution::Unique(sol) => {
            let (c, s) = sol.split_at(face.dim);
            if face.carrier.contains(c, true) {
                Classification::TransversalCrossing {
                    point: linalg::add(base, &linalg::scale(&d, &s[0])),
                }
            } else if face.carrier.contains(c, false) {
                Classification::NonTransversal
            } else {
                Classification::Disjoint
            }
        }
        Solution::Family(sol, _) => {
            let c = &sol[..face.dim];
            let local_dir = match linalg::solve(&columns(&face.basis, ambient), &d, face.dim) {
                Solution::Unique(v) => v,
                _ => unreachable!("a solution family means dir lies in the direction space"),
            };
            if face.carrier.meets_line(c, &local_dir) {
                Classification::NonTransversal
            } else {
                Classification::Disjoint
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub label: String,
    #[serde(with = "serde_q::vec")]
    pub point: Vector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub label: String,
    pub dim: usize,
    pub classification: Classification,
}

/// A rational line through two perturbed endpoints with its per-face
/// certificate. The top-dimensional face is left out of the certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSelection {
    #[serde(with = "serde_q::vec")]
    pub xi0: Vector,
    #[serde(with = "serde_q::vec")]
    pub xi1: Vector,
    pub direction: Direction,
    pub crossings: Vec<Crossing>,
    pub certificate: Vec<CertificateEntry>,
    pub attempts: usize,
    /// Perturbations of the accepted attempt lie on the grid `2^-grid_exponent`.
    pub grid_exponent: u32,
}

fn check_point(xray: &XRay, x: &[Rational]) -> Result<(), XRayError> {
    if x.len() != xray.ambient_dim {
        return Err(XRayError::PointDimension {
            expected: xray.ambient_dim,
            got: x.len(),
        });
    }
    if !xray.moment_image.contains(x) {
        return Err(XRayError::OutsideMomentImage(format_point(x).join(",")));
    }
    Ok(())
}

/// Smallest `k` with `2^k >= 1/epsilon`.
fn log2_ceil_inverse(epsilon: &Rational) -> u32 {
    let mut k = 0u32;
    let mut scaled = epsilon.clone();
    while scaled < int(1) {
        scaled *= int(2);
        k += 1;
    }
    k
}

fn is_regular(xray: &XRay, xi: &[Rational]) -> bool {
    xray.moment_image.contains_interior(xi)
        && xray
            .faces
            .iter()
            .filter(|f| f.dim + 2 <= xray.ambient_dim)
            .all(|f| !f.contains(xi))
}

fn certify(xray: &XRay, xi0: &[Rational], dir: &Direction) -> Option<(Vec<Crossing>, Vec<CertificateEntry>)> {
    let mut crossings = Vec::new();
    let mut certificate = Vec::new();
    for f in xray.faces.iter().filter(|f| f.dim < xray.ambient_dim) {
        let class = classify_line_vs_face(xi0, dir, f);
        match (&class, f.dim + 1 == xray.ambient_dim) {
            (Classification::Disjoint, _) => {}
            (Classification::TransversalCrossing { point }, true) => crossings.push(Crossing {
                label: f.label.clone(),
                point: point.clone(),
            }),
            _ => return None,
        }
        certificate.push(CertificateEntry {
            label: f.label.clone(),
            dim: f.dim,
            classification: class,
        });
    }
    Some((crossings, certificate))
}

/// Perturbs `x0` and `x1` inside max-norm `epsilon`-balls on a dyadic grid
/// until the line through the perturbed points avoids every face of
/// codimension at least two, crosses walls transversally, and both points
/// are regular values. The grid refines by one bit per attempt.
pub fn select_line(
    xray: &XRay,
    x0: &[Rational],
    x1: &[Rational],
    epsilon: &Rational,
    max_attempts: usize,
    seed: u64,
) -> Result<LineSelection, XRayError> {
    check_point(xray, x0)?;
    check_point(xray, x1)?;
    if x0 == x1 {
        return Err(XRayError::CoincidentEndpoints);
    }
    if !epsilon.is_positive() {
        return Err(XRayError::NonPositiveEpsilon);
    }
    if max_attempts == 0 {
        return Err(XRayError::NoAttempts);
    }
    let k0 = log2_ceil_inverse(epsilon) + 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = k0;
    for attempt in 1..=max_attempts {
        k = k0 + (attempt as u32 - 1).min(32);
        let scale = Rational::from_integer(BigInt::from(1u64) << k);
        // |m| / 2^k < epsilon
        let bound: BigInt = (epsilon * &scale).ceil().to_integer() - 1;
        let bound = bound.to_i64().unwrap_or(i64::MAX / 2).max(0);
        let mut perturb = |x: &[Rational]| -> Vector {
            x.iter()
                .map(|c| c + int(rng.gen_range(-bound..=bound)) / &scale)
                .collect()
        };
        let xi0 = perturb(x0);
        let xi1 = perturb(x1);
        if xi0 == xi1 || !is_regular(xray, &xi0) || !is_regular(xray, &xi1) {
            continue;
        }
        let direction = Direction::from_rational(&linalg::sub(&xi1, &xi0))?;
        if let Some((crossings, certificate)) = certify(xray, &xi0, &direction) {
            return Ok(LineSelection {
                xi0,
                xi1,
                direction,
                crossings,
                certificate,
                attempts: attempt,
                grid_exponent: k,
            });
        }
    }
    Err(XRayError::SelectionFailed {
        attempts: max_attempts,
        finest_exponent: k,
    })
}

/// Re-checks a selection: the direction is parallel to `xi1 - xi0`, and for
/// every crossed face the face is a wall whose direction space does not
/// contain the line direction.
pub fn regularity_check(selection: &LineSelection, xray: &XRay) -> bool {
    let d = selection.direction.to_rational();
    let diff = linalg::sub(&selection.xi1, &selection.xi0);
    if linalg::is_zero(&diff) || linalg::rank(&[diff, d.clone()]) != 1 {
        return false;
    }
    selection.crossings.iter().all(|c| {
        xray.face(&c.label).is_some_and(|f| {
            f.dim + 1 == xray.ambient_dim && !f.is_parallel(&d)
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtorusSplit {
    pub kernel: Direction,
    pub complement: Vec<Direction>,
    /// Determinant of the matrix with rows `complement..., kernel`; always +-1.
    pub determinant: i64,
}

/// Splits the lattice into the line spanned by `direction` and an integer
/// complement, certified unimodular.
pub fn split_subtorus(direction: &Direction) -> Result<SubtorusSplit, XRayError> {
    if direction.dim() < 2 {
        return Err(XRayError::SplitDimension(direction.dim()));
    }
    let mut rows = unimodular_completion(direction)?;
    let complement = rows
        .iter()
        .map(|c| Direction::new(c.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    rows.push(direction.coords().to_vec());
    Ok(SubtorusSplit {
        kernel: direction.clone(),
        complement,
        determinant: det_i64(&rows),
    })
}

/// One-line summary used in reports.
pub fn describe_selection(s: &LineSelection) -> String {
    format!(
        "xi0=({}) xi1=({}) direction={} crossings={}",
        format_point(&s.xi0).join(","),
        format_point(&s.xi1).join(","),
        s.direction,
        s.crossings
            .iter()
            .map(|c| format!("{}@({})", c.label, c.point.iter().map(format_rational).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(";")
    )
}
