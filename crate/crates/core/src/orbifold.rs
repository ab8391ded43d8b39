//! Fixed-point data of a closed 4-dimensional Hamiltonian circle orbifold
//! and the piecewise-linear DH function it determines.
//!
//! On a regular interval of the moment map the reduced spaces are surfaces
//! whose symplectic area varies linearly with slope `-∫e` (the Euler class of
//! the level-set circle bundle), so the DH function is affine there. Across
//! an interior critical level `c`, equivariant localization on a symplectic
//! cut around `φ^{-1}(c)` relates the Euler classes on both sides to the
//! isolated fixed points at that level. Each such point contributes
//! `1/(d_p p_1 p_2 λ²)` to the localization sum; only the `λ^{-2}`
//! coefficient is needed, which gives the slope jump
//!
//! ```text
//! DH'(c+) - DH'(c-) = Σ_p 1 / (d_p p_1 p_2)
//! ```
//!
//! The equivariant parameter never appears at runtime. Since `p_1 p_2 < 0`
//! at every interior point, each jump is negative, and a positive
//! piecewise-linear function with only negative slope jumps is log-concave.
//!
//! At an isolated extremum with weights `p_1, p_2` (equal signs) and local
//! group order `d`, the density leaves or reaches zero with slope
//! `±1/(d p_1 p_2)`. A fixed surface at an extremum contributes its area as
//! the boundary value and its Euler integral as the boundary slope
//! (`-∫e` at the minimum, `+∫e` at the maximum).

use crate::pwlinear::{DensityError, LogConcavityVerdict, PLDensity};
use crate::rational::{format_rational, int, serde_q, Rational};
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbifoldError {
    #[error("fixed point at level {level}: weights must be nonzero")]
    ZeroWeight { level: String },
    #[error("interior fixed point at level {level}: weights {weight1}, {weight2} must have opposite signs")]
    InteriorWeightSigns {
        level: String,
        weight1: i64,
        weight2: i64,
    },
    #[error("fixed point at level {level}: local group order must be at least 1")]
    ZeroOrder { level: String },
    #[error("isolated {which} at level {level}: weights must both be {sign}")]
    ExtremalWeightSigns {
        which: &'static str,
        level: String,
        sign: &'static str,
    },
    #[error("fixed surface at level {level}: area must be positive")]
    NonPositiveArea { level: String },
    #[error("minimum level {min} must lie below maximum level {max}")]
    LevelsOutOfOrder { min: String, max: String },
    #[error("interior level {level} outside ({min}, {max})")]
    InteriorOutOfRange {
        level: String,
        min: String,
        max: String,
    },
    #[error("wall crossing needs at least one fixed point")]
    EmptyPointList,
    #[error("wall crossing points lie on different levels ({0} and {1})")]
    MixedLevels(String, String),
    #[error("inconsistent data — negative density {value} at level {level}")]
    NegativeDensity { level: String, value: String },
    #[error("localization closure violated: slope (expected {expected}, computed {computed}; residual {residual})")]
    SlopeMismatch {
        expected: String,
        computed: String,
        residual: String,
    },
    #[error("closure residual {residual} is nonzero")]
    NotClosed { residual: String },
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteriorFixedPoint {
    #[serde(with = "serde_q")]
    pub level: Rational,
    pub weight1: i64,
    pub weight2: i64,
    pub order: u32,
}

impl InteriorFixedPoint {
    pub fn new(level: Rational, weight1: i64, weight2: i64, order: u32) -> Result<Self, OrbifoldError> {
        let p = InteriorFixedPoint {
            level,
            weight1,
            weight2,
            order,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), OrbifoldError> {
        let level = format_rational(&self.level);
        if self.weight1 == 0 || self.weight2 == 0 {
            return Err(OrbifoldError::ZeroWeight { level });
        }
        if self.weight1.signum() == self.weight2.signum() {
            return Err(OrbifoldError::InteriorWeightSigns {
                level,
                weight1: self.weight1,
                weight2: self.weight2,
            });
        }
        if self.order == 0 {
            return Err(OrbifoldError::ZeroOrder { level });
        }
        Ok(())
    }

    /// `1 / (d p_1 p_2)`, this point's share of the slope jump.
    pub fn localization_term(&self) -> Rational {
        let den = i128::from(self.order) * i128::from(self.weight1) * i128::from(self.weight2);
        Rational::new(1.into(), den.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtremalSet {
    IsolatedPoint {
        #[serde(with = "serde_q")]
        level: Rational,
        weight1: i64,
        weight2: i64,
        order: u32,
    },
    FixedSurface {
        #[serde(with = "serde_q")]
        level: Rational,
        #[serde(with = "serde_q")]
        area: Rational,
        #[serde(with = "serde_q")]
        euler_integral: Rational,
    },
}

impl ExtremalSet {
    pub fn isolated(level: Rational, weight1: i64, weight2: i64, order: u32) -> Self {
        ExtremalSet::IsolatedPoint {
            level,
            weight1,
            weight2,
            order,
        }
    }

    pub fn surface(level: Rational, area: Rational, euler_integral: Rational) -> Self {
        ExtremalSet::FixedSurface {
            level,
            area,
            euler_integral,
        }
    }

    pub fn level(&self) -> &Rational {
        match self {
            ExtremalSet::IsolatedPoint { level, .. } | ExtremalSet::FixedSurface { level, .. } => level,
        }
    }

    fn validate(&self, is_min: bool) -> Result<(), OrbifoldError> {
        let which = if is_min { "minimum" } else { "maximum" };
        match self {
            ExtremalSet::IsolatedPoint {
                level,
                weight1,
                weight2,
                order,
            } => {
                let level = format_rational(level);
                if *weight1 == 0 || *weight2 == 0 {
                    return Err(OrbifoldError::ZeroWeight { level });
                }
                let want = if is_min { 1 } else { -1 };
                if weight1.signum() != want || weight2.signum() != want {
                    return Err(OrbifoldError::ExtremalWeightSigns {
                        which,
                        level,
                        sign: if is_min { "positive" } else { "negative" },
                    });
                }
                if *order == 0 {
                    return Err(OrbifoldError::ZeroOrder { level });
                }
            }
            ExtremalSet::FixedSurface { level, area, .. } => {
                if !area.is_positive() {
                    return Err(OrbifoldError::NonPositiveArea {
                        level: format_rational(level),
                    });
                }
            }
        }
        Ok(())
    }

    /// Density value at this extremum.
    fn boundary_value(&self) -> Rational {
        match self {
            ExtremalSet::IsolatedPoint { .. } => Rational::zero(),
            ExtremalSet::FixedSurface { area, .. } => area.clone(),
        }
    }

    /// Slope of the density on the regular interval adjacent to this
    /// extremum, as seen from inside the image.
    fn boundary_slope(&self, is_min: bool) -> Rational {
        let sign = if is_min { int(1) } else { int(-1) };
        match self {
            ExtremalSet::IsolatedPoint {
                weight1,
                weight2,
                order,
                ..
            } => {
                let den = i128::from(*order) * i128::from(*weight1) * i128::from(*weight2);
                sign * Rational::new(1.into(), den.into())
            }
            ExtremalSet::FixedSurface { euler_integral, .. } => -sign * euler_integral,
        }
    }
}

/// Record form used by input files: `min`, `max`, `interior`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct S1FixedPointRecord {
    pub min: ExtremalSet,
    pub max: ExtremalSet,
    #[serde(default)]
    pub interior: Vec<InteriorFixedPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "S1FixedPointRecord", into = "S1FixedPointRecord")]
pub struct S1FixedPointData {
    min: ExtremalSet,
    max: ExtremalSet,
    interior: Vec<InteriorFixedPoint>,
}

impl TryFrom<S1FixedPointRecord> for S1FixedPointData {
    type Error = OrbifoldError;

    fn try_from(r: S1FixedPointRecord) -> Result<Self, Self::Error> {
        S1FixedPointData::new(r.min, r.max, r.interior)
    }
}

impl From<S1FixedPointData> for S1FixedPointRecord {
    fn from(d: S1FixedPointData) -> Self {
        S1FixedPointRecord {
            min: d.min,
            max: d.max,
            interior: d.interior,
        }
    }
}

/// Slope jump at one critical level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalLevel {
    #[serde(with = "serde_q")]
    pub level: Rational,
    pub points: usize,
    #[serde(with = "serde_q")]
    pub jump: Rational,
}

impl S1FixedPointData {
    /// Validates every invariant; interior points are sorted by level.
    pub fn new(
        min: ExtremalSet,
        max: ExtremalSet,
        mut interior: Vec<InteriorFixedPoint>,
    ) -> Result<Self, OrbifoldError> {
        min.validate(true)?;
        max.validate(false)?;
        if min.level() >= max.level() {
            return Err(OrbifoldError::LevelsOutOfOrder {
                min: format_rational(min.level()),
                max: format_rational(max.level()),
            });
        }
        for p in &interior {
            p.validate()?;
            if &p.level <= min.level() || &p.level >= max.level() {
                return Err(OrbifoldError::InteriorOutOfRange {
                    level: format_rational(&p.level),
                    min: format_rational(min.level()),
                    max: format_rational(max.level()),
                });
            }
        }
        interior.sort_by(|a, b| a.level.cmp(&b.level));
        Ok(S1FixedPointData { min, max, interior })
    }

    pub fn min(&self) -> &ExtremalSet {
        &self.min
    }

    pub fn max(&self) -> &ExtremalSet {
        &self.max
    }

    pub fn interior(&self) -> &[InteriorFixedPoint] {
        &self.interior
    }

    /// Interior points grouped by level, in increasing order.
    pub fn levels(&self) -> Vec<&[InteriorFixedPoint]> {
        self.interior
            .chunk_by(|a, b| a.level == b.level)
            .collect()
    }

    pub fn critical_levels(&self) -> Vec<CriticalLevel> {
        self.levels()
            .into_iter()
            .map(|pts| CriticalLevel {
                level: pts[0].level.clone(),
                points: pts.len(),
                jump: pts.iter().map(InteriorFixedPoint::localization_term).sum(),
            })
            .collect()
    }
}

/// Exact jump of `DH'` across a critical level: `Σ_p 1/(d_p p_1 p_2)`.
pub fn wall_crossing_jump(points: &[InteriorFixedPoint]) -> Result<Rational, OrbifoldError> {
    let first = points.first().ok_or(OrbifoldError::EmptyPointList)?;
    for p in points {
        if p.level != first.level {
            return Err(OrbifoldError::MixedLevels(
                format_rational(&first.level),
                format_rational(&p.level),
            ));
        }
        p.validate()?;
    }
    Ok(points.iter().map(InteriorFixedPoint::localization_term).sum())
}

/// Breakpoints, telescoped values and the slope entering the maximum.
struct Telescope {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
    final_slope: Rational,
}

fn telescope(data: &S1FixedPointData) -> Telescope {
    let mut breakpoints = vec![data.min.level().clone()];
    let mut values = vec![data.min.boundary_value()];
    let mut slope = data.min.boundary_slope(true);
    for level in data.critical_levels() {
        let prev = breakpoints.last().unwrap();
        let v = values.last().unwrap() + &slope * (&level.level - prev);
        breakpoints.push(level.level);
        values.push(v);
        slope += level.jump;
    }
    let prev = breakpoints.last().unwrap();
    let v = values.last().unwrap() + &slope * (data.max.level() - prev);
    breakpoints.push(data.max.level().clone());
    values.push(v);
    Telescope {
        breakpoints,
        values,
        final_slope: slope,
    }
}

/// Builds the DH function on `[min.level, max.level]`, with one breakpoint
/// per distinct interior critical level.
pub fn build_dh(data: &S1FixedPointData) -> Result<PLDensity, OrbifoldError> {
    let Telescope {
        breakpoints,
        values,
        ..
    } = telescope(data);
    let last = values.len() - 1;
    for (i, (t, v)) in breakpoints.iter().zip(&values).enumerate() {
        let bad = if i == 0 || i == last {
            v.is_negative()
        } else {
            !v.is_positive()
        };
        if bad {
            return Err(OrbifoldError::NegativeDensity {
                level: format_rational(t),
                value: format_rational(v),
            });
        }
    }
    Ok(PLDensity::new(breakpoints, values)?)
}

/// Residual between the telescoped density value at the maximum and the
/// value the maximum declares (`0` for an isolated point, its area for a
/// surface). The incoming slope must also match the maximum's local model;
/// a mismatch is reported as [`OrbifoldError::SlopeMismatch`].
pub fn closure_check(data: &S1FixedPointData) -> Result<Rational, OrbifoldError> {
    let t = telescope(data);
    let residual = t.values.last().unwrap() - data.max.boundary_value();
    let expected = data.max.boundary_slope(false);
    if t.final_slope != expected {
        return Err(OrbifoldError::SlopeMismatch {
            expected: format_rational(&expected),
            computed: format_rational(&t.final_slope),
            residual: format_rational(&residual),
        });
    }
    Ok(residual)
}

/// Builds the DH function of closure-consistent data and returns its
/// log-concavity verdict, which must be positive for valid data.
pub fn is_log_concave_theorem_check(
    data: &S1FixedPointData,
) -> Result<LogConcavityVerdict, OrbifoldError> {
    let residual = closure_check(data)?;
    if !residual.is_zero() {
        return Err(OrbifoldError::NotClosed {
            residual: format_rational(&residual),
        });
    }
    Ok(build_dh(data)?.is_log_concave())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn pt(level: i64, w1: i64, w2: i64, d: u32) -> InteriorFixedPoint {
        InteriorFixedPoint::new(int(level), w1, w2, d).unwrap()
    }

    pub(crate) fn hirzebruch() -> S1FixedPointData {
        S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(0)),
            ExtremalSet::isolated(int(2), -1, -1, 1),
            vec![pt(1, -1, 1, 1)],
        )
        .unwrap()
    }

    fn projective_plane() -> S1FixedPointData {
        S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(1)),
            ExtremalSet::isolated(int(1), -1, -1, 1),
            vec![],
        )
        .unwrap()
    }

    fn sphere_product() -> S1FixedPointData {
        S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(0)),
            ExtremalSet::surface(int(1), int(1), int(0)),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn jump_examples() {
        assert_eq!(wall_crossing_jump(&[pt(0, -1, 1, 1)]), Ok(int(-1)));
        assert_eq!(
            wall_crossing_jump(&[pt(0, -1, 1, 1), pt(0, -1, 2, 1)]),
            Ok(ratio(-3, 2))
        );
        assert_eq!(wall_crossing_jump(&[pt(0, -1, 1, 2)]), Ok(ratio(-1, 2)));
    }

    #[test]
    fn jump_errors() {
        assert_eq!(wall_crossing_jump(&[]), Err(OrbifoldError::EmptyPointList));
        assert!(matches!(
            wall_crossing_jump(&[pt(0, -1, 1, 1), pt(1, -1, 1, 1)]),
            Err(OrbifoldError::MixedLevels(..))
        ));
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(matches!(
            InteriorFixedPoint::new(int(1), 1, 2, 1),
            Err(OrbifoldError::InteriorWeightSigns { .. })
        ));
        assert!(matches!(
            InteriorFixedPoint::new(int(1), 0, 2, 1),
            Err(OrbifoldError::ZeroWeight { .. })
        ));
        assert!(matches!(
            InteriorFixedPoint::new(int(1), -1, 2, 0),
            Err(OrbifoldError::ZeroOrder { .. })
        ));
        let bad_min = S1FixedPointData::new(
            ExtremalSet::isolated(int(0), 1, -1, 1),
            ExtremalSet::isolated(int(1), -1, -1, 1),
            vec![],
        );
        assert!(matches!(bad_min, Err(OrbifoldError::ExtremalWeightSigns { .. })));
        let bad_area = S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(0), int(0)),
            ExtremalSet::isolated(int(1), -1, -1, 1),
            vec![],
        );
        assert!(matches!(bad_area, Err(OrbifoldError::NonPositiveArea { .. })));
        let out_of_range = S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(0)),
            ExtremalSet::isolated(int(2), -1, -1, 1),
            vec![pt(2, -1, 1, 1)],
        );
        assert!(matches!(out_of_range, Err(OrbifoldError::InteriorOutOfRange { .. })));
        let reversed = S1FixedPointData::new(
            ExtremalSet::surface(int(1), int(1), int(0)),
            ExtremalSet::isolated(int(1), -1, -1, 1),
            vec![],
        );
        assert!(matches!(reversed, Err(OrbifoldError::LevelsOutOfOrder { .. })));
    }

    #[test]
    fn build_examples() {
        assert_eq!(
            build_dh(&hirzebruch()).unwrap(),
            PLDensity::from_ints(&[0, 1, 2], &[1, 1, 0]).unwrap()
        );
        assert_eq!(
            build_dh(&projective_plane()).unwrap(),
            PLDensity::from_ints(&[0, 1], &[1, 0]).unwrap()
        );
        assert_eq!(
            build_dh(&sphere_product()).unwrap(),
            PLDensity::from_ints(&[0, 1], &[1, 1]).unwrap()
        );
    }

    #[test]
    fn breakpoints_are_critical_levels() {
        let data = S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(5), int(-1)),
            ExtremalSet::surface(int(4), int(5), int(-1)),
            vec![pt(3, -1, 1, 1), pt(1, -1, 2, 1), pt(1, -2, 1, 1)],
        )
        .unwrap();
        let f = build_dh(&data).unwrap();
        assert_eq!(f.breakpoints(), &[int(0), int(1), int(3), int(4)]);
        assert_eq!(closure_check(&data), Ok(int(0)));
    }

    #[test]
    fn negative_density_is_rejected() {
        let data = S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(1)),
            ExtremalSet::isolated(int(3), -1, -1, 1),
            vec![],
        )
        .unwrap();
        assert!(matches!(build_dh(&data), Err(OrbifoldError::NegativeDensity { .. })));
    }

    #[test]
    fn closure_examples() {
        assert_eq!(closure_check(&hirzebruch()), Ok(int(0)));
        assert_eq!(closure_check(&sphere_product()), Ok(int(0)));
        assert_eq!(closure_check(&projective_plane()), Ok(int(0)));
        // weight2 1 -> 2: jump -1/2, value 1/2 left over at the maximum and
        // an incoming slope of -1/2 against the expected -1
        let corrupted = S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(0)),
            ExtremalSet::isolated(int(2), -1, -1, 1),
            vec![pt(1, -1, 2, 1)],
        )
        .unwrap();
        assert_eq!(
            closure_check(&corrupted),
            Err(OrbifoldError::SlopeMismatch {
                expected: "-1".into(),
                computed: "-1/2".into(),
                residual: "1/2".into()
            })
        );
        // value mismatch with a matching slope
        let shifted = S1FixedPointData::new(
            ExtremalSet::surface(int(0), int(1), int(0)),
            ExtremalSet::isolated(int(3), -1, -1, 1),
            vec![pt(1, -1, 1, 1)],
        )
        .unwrap();
        assert_eq!(closure_check(&shifted), Ok(int(-1)));
    }

    #[test]
    fn log_concave_check_examples() {
        let v = is_log_concave_theorem_check(&hirzebruch()).unwrap();
        assert!(v.is_log_concave);
        assert_eq!(v.jumps.len(), 1);
        assert_eq!(v.jumps[0].jump, int(-1));
        assert!(is_log_concave_theorem_check(&sphere_product()).unwrap().is_log_concave);
    }

    #[test]
    fn level_reparametrization_is_covariant() {
        let f = build_dh(&hirzebruch()).unwrap();
        for factor in [int(2), ratio(1, 3)] {
            let g = f.reparametrize_levels(&factor);
            for (a, b) in g.slopes().iter().zip(f.slopes()) {
                assert_eq!(a, &(b / &factor));
            }
            assert_eq!(g.is_log_concave().is_log_concave, f.is_log_concave().is_log_concave);
            let signs = |h: &PLDensity| h.slope_jumps().iter().map(|j| j.jump.signum()).collect::<Vec<_>>();
            assert_eq!(signs(&g), signs(&f));
        }
    }

    #[test]
    fn symplectic_rescaling_scales_density() {
        // levels and areas scale together; slopes are unchanged
        let data = hirzebruch();
        for factor in [int(2), ratio(1, 3)] {
            let scaled = S1FixedPointData::new(
                ExtremalSet::surface(int(0), factor.clone(), int(0)),
                ExtremalSet::isolated(int(2) * &factor, -1, -1, 1),
                vec![InteriorFixedPoint::new(factor.clone(), -1, 1, 1).unwrap()],
            )
            .unwrap();
            let f = build_dh(&data).unwrap();
            let g = build_dh(&scaled).unwrap();
            assert_eq!(g.slopes(), f.slopes());
            for t in f.breakpoints() {
                assert_eq!(g.evaluate(&(t * &factor)), f.evaluate(t) * &factor);
            }
        }
    }

    fn arb_point(level: Rational) -> impl Strategy<Value = InteriorFixedPoint> {
        (1i64..10, 1i64..10, 1u32..5, any::<bool>()).prop_map(move |(a, b, d, flip)| {
            let (w1, w2) = if flip { (a, -b) } else { (-a, b) };
            InteriorFixedPoint::new(level.clone(), w1, w2, d).unwrap()
        })
    }

    proptest! {
        #[test]
        fn jumps_are_negative(pts in proptest::collection::vec(arb_point(int(3)), 1..8)) {
            prop_assert!(wall_crossing_jump(&pts).unwrap().is_negative());
        }

        #[test]
        fn doubling_orders_halves_jumps(pts in proptest::collection::vec(arb_point(int(3)), 1..8)) {
            let doubled: Vec<_> = pts.iter().map(|p| InteriorFixedPoint { order: 2 * p.order, ..p.clone() }).collect();
            prop_assert_eq!(
                wall_crossing_jump(&doubled).unwrap() * int(2),
                wall_crossing_jump(&pts).unwrap()
            );
        }
    }
}
