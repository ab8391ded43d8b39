use super::{plane_section, Polytope, PolytopeError};
use crate::lattice::{unimodular_completion, Direction};
use crate::linalg::{self, Vector};
use crate::pwlinear::PLDensity;
use crate::rational::{int, Rational};
use num::{Signed, Zero};

/// Push-forward of a triangle's area under a linear level map: a tent on
/// `[lo, hi]` peaking at `mid` with height `2·area / (hi - lo)`.
struct Tent {
    lo: Rational,
    mid: Rational,
    hi: Rational,
    peak: Rational,
}

impl Tent {
    fn new(levels: [Rational; 3], area: Rational) -> Tent {
        let mut l = levels;
        l.sort();
        let [lo, mid, hi] = l;
        let peak = int(2) * area / (&hi - &lo);
        Tent { lo, mid, hi, peak }
    }

    /// One-sided limits `(g(a+), g(b-))` on an interval `[a, b]` between
    /// consecutive merged breakpoints, or `None` outside the support.
    fn limits(&self, a: &Rational, b: &Rational) -> Option<(Rational, Rational)> {
        if a < &self.lo || b > &self.hi {
            return None;
        }
        let rising = b <= &self.mid;
        let at = |t: &Rational| {
            if rising {
                &self.peak * (t - &self.lo) / (&self.mid - &self.lo)
            } else {
                &self.peak * (&self.hi - t) / (&self.hi - &self.mid)
            }
        };
        Some((at(a), at(b)))
    }
}

/// Exact density of the push-forward of planar Lebesgue measure under
/// `x ↦ ⟨x, X⟩`, normalized so it integrates to the polygon's area.
///
/// The polygon is fan-triangulated from its lowest vertex; each triangle
/// contributes a tent and the tents are summed on the merged breakpoints.
pub fn slice_density(p: &Polytope, x: &Direction) -> Result<PLDensity, PolytopeError> {
    if p.dim() != 2 {
        return Err(PolytopeError::NotPolygon(p.dim()));
    }
    p.check_direction(x)?;
    let verts = p.vertices();
    let levels: Vec<Rational> = verts.iter().map(|v| x.pair(v)).collect();
    let start = (0..verts.len()).min_by(|&i, &j| levels[i].cmp(&levels[j])).unwrap();
    let n = verts.len();
    let idx = |k: usize| (start + k) % n;
    let tents: Vec<Tent> = (1..n - 1)
        .map(|k| {
            let (a, b, c) = (idx(0), idx(k), idx(k + 1));
            let tri = Polytope::new(2, vec![verts[a].clone(), verts[b].clone(), verts[c].clone()])
                .expect("fan triangles of a convex polygon are nondegenerate");
            Tent::new(
                [levels[a].clone(), levels[b].clone(), levels[c].clone()],
                tri.area().unwrap(),
            )
        })
        .collect();

    let mut knots: Vec<Rational> = levels.clone();
    knots.sort();
    knots.dedup();
    let mut values = vec![Rational::zero(); knots.len()];
    for (j, w) in knots.windows(2).enumerate() {
        let (mut right_of_a, mut left_of_b) = (Rational::zero(), Rational::zero());
        for tent in &tents {
            if let Some((ga, gb)) = tent.limits(&w[0], &w[1]) {
                right_of_a += ga;
                left_of_b += gb;
            }
        }
        if j > 0 {
            debug_assert_eq!(values[j], right_of_a, "slice density is continuous");
        }
        values[j] = right_of_a;
        values[j + 1] = left_of_b;
    }
    Ok(PLDensity::new(knots, values)?.canonical())
}

/// Coordinates splitting `R^n` as (complement of the kernel) x (kernel):
/// the columns of a unimodular matrix whose last column is `kernel`.
fn kernel_frame(kernel: &Direction) -> Result<Vec<Vec<i64>>, PolytopeError> {
    let mut cols = unimodular_completion(kernel)?;
    cols.push(kernel.coords().to_vec());
    Ok(cols)
}

fn frame_apply(cols: &[Vec<i64>], y: &[Rational]) -> Vector {
    let n = cols.len();
    (0..n)
        .map(|r| cols.iter().zip(y).map(|(c, yi)| int(c[r]) * yi).sum())
        .collect()
}

fn check_line_data(
    p: &Polytope,
    kernel: &Direction,
    line_base: &[Rational],
    line_dir: &Direction,
) -> Result<(), PolytopeError> {
    p.check_direction(kernel)?;
    let m = p.dim() - 1;
    if line_dir.dim() != m {
        return Err(PolytopeError::DirectionDimension {
            expected: m,
            got: line_dir.dim(),
        });
    }
    if line_base.len() != m {
        return Err(PolytopeError::CoordinateCount {
            index: 0,
            expected: m,
            got: line_base.len(),
        });
    }
    Ok(())
}

/// An affine function `c0 + c1·s` of the line parameter.
#[derive(Clone)]
struct Affine {
    c0: Rational,
    c1: Rational,
}

impl Affine {
    fn at(&self, s: &Rational) -> Rational {
        &self.c0 + &self.c1 * s
    }

    fn crossing(&self, other: &Affine) -> Option<Rational> {
        let dc = &self.c1 - &other.c1;
        (!dc.is_zero()).then(|| (&other.c0 - &self.c0) / dc)
    }
}

/// Density along a line in the quotient `R^n / ⟨kernel⟩` of the fiber
/// length of `P` over each point of the line.
///
/// The quotient is identified with `R^{n-1}` through the unimodular frame
/// of [`unimodular_completion`]: `x = Σ y_i c_i + w·kernel`, and the line
/// is `y = line_base + s·line_dir`. The fiber over `y(s)` is an interval in
/// `w` cut out by the facets; its length is a concave piecewise-linear
/// function of `s`, computed here directly from the facet inequalities.
pub fn projected_slice_density(
    p: &Polytope,
    kernel: &Direction,
    line_base: &[Rational],
    line_dir: &Direction,
) -> Result<PLDensity, PolytopeError> {
    check_line_data(p, kernel, line_base, line_dir)?;
    let frame = kernel_frame(kernel)?;
    let m = p.dim() - 1;
    let dir = line_dir.to_rational();

    let mut uppers: Vec<Affine> = Vec::new();
    let mut lowers: Vec<Affine> = Vec::new();
    let mut guards: Vec<Affine> = Vec::new();
    for f in p.facets() {
        // a·x = (a U)·y
        let alpha: Vec<Rational> = frame
            .iter()
            .map(|c| linalg::dot(&f.normal, &c.iter().map(|&x| int(x)).collect::<Vec<_>>()))
            .collect();
        let (head, aw) = alpha.split_at(m);
        let aw = &aw[0];
        // aw·w <= offset - head·base - s·head·dir
        let rhs = Affine {
            c0: &f.offset - linalg::dot(head, line_base),
            c1: -linalg::dot(head, &dir),
        };
        if aw.is_zero() {
            guards.push(rhs);
        } else {
            let scaled = Affine {
                c0: &rhs.c0 / aw,
                c1: &rhs.c1 / aw,
            };
            if aw.is_positive() {
                uppers.push(scaled);
            } else {
                lowers.push(scaled);
            }
        }
    }
    let length = |s: &Rational| {
        let top = uppers.iter().map(|u| u.at(s)).min().unwrap();
        let bottom = lowers.iter().map(|l| l.at(s)).max().unwrap();
        top - bottom
    };
    let feasible = |s: &Rational| {
        guards.iter().all(|g| !g.at(s).is_negative()) && !length(s).is_negative()
    };

    let mut candidates: Vec<Rational> = Vec::new();
    let all: Vec<&Affine> = uppers.iter().chain(&lowers).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            candidates.extend(all[i].crossing(all[j]));
        }
    }
    let zero = Affine {
        c0: Rational::zero(),
        c1: Rational::zero(),
    };
    candidates.extend(guards.iter().filter_map(|g| g.crossing(&zero)));
    candidates.retain(|s| feasible(s));
    candidates.sort();
    candidates.dedup();
    if candidates.len() < 2 {
        return Err(PolytopeError::DegenerateSection);
    }
    let values: Vec<Rational> = candidates.iter().map(length).collect();

    // the plane must pass through the interior of P
    let s_mid = (&candidates[0] + candidates.last().unwrap()) / int(2);
    let top = uppers.iter().map(|u| u.at(&s_mid)).min().unwrap();
    let bottom = lowers.iter().map(|l| l.at(&s_mid)).max().unwrap();
    let mut y: Vector = linalg::add(line_base, &linalg::scale(&dir, &s_mid));
    y.push((top + bottom) / int(2));
    if !p.contains_interior(&frame_apply(&frame, &y)) {
        return Err(PolytopeError::DegenerateSection);
    }
    PLDensity::new(candidates, values)
        .map(|f| f.canonical())
        .map_err(|_| PolytopeError::DegenerateSection)
}

/// The same density computed in two stages: cut `P` with the 2-plane over
/// the line, then slice the resulting polygon along the line parameter.
pub fn composed_slice_density(
    p: &Polytope,
    kernel: &Direction,
    line_base: &[Rational],
    line_dir: &Direction,
) -> Result<PLDensity, PolytopeError> {
    check_line_data(p, kernel, line_base, line_dir)?;
    let frame = kernel_frame(kernel)?;
    let mut base: Vector = line_base.to_vec();
    base.push(Rational::zero());
    let mut along: Vector = line_dir.to_rational();
    along.push(Rational::zero());
    let span1 = Direction::from_rational(&frame_apply(&frame, &along))?;
    let section = plane_section(p, &frame_apply(&frame, &base), &span1, kernel)?;
    slice_density(&section, &Direction::new(vec![1, 0])?)
}
