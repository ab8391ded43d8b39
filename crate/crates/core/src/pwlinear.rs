//! Continuous piecewise-linear densities on a closed interval.
//!
//! A [`PLDensity`] is stored as breakpoints `t_0 < ... < t_k` and the value
//! at each breakpoint; between breakpoints it interpolates linearly and it
//! vanishes outside `[t_0, t_k]`. Values must be positive at every interior
//! breakpoint and non-negative at the two ends.
//!
//! # Log-concavity of positive piecewise-linear functions
//!
//! On an open piece where `f` is affine and positive, `f'' = 0`, so
//! `(log f)'' = (f f'' - f'^2) / f^2 = -(f'/f)^2 <= 0`: every piece is
//! automatically log-concave. At an interior breakpoint `c`, `f` is
//! continuous and positive, so the jump of `(log f)' = f'/f` at `c` is
//! `(f'(c+) - f'(c-)) / f(c)`, which has the sign of the slope jump.
//! Hence `f` is log-concave on its support iff every interior slope jump
//! is `<= 0`, which for such `f` is the same as concavity on the support.
//! [`PLDensity::is_log_concave`] applies exactly this test;
//! [`pointwise_midpoint_check`] tests the defining inequality directly.

use crate::rational::{format_rational, serde_q, Rational};
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("breakpoints and values differ in length ({breakpoints} vs {values})")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("a density needs at least two breakpoints")]
    TooFewBreakpoints,
    #[error("breakpoints must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
    #[error("negative density value {value} at breakpoint {index}")]
    NegativeValue { index: usize, value: String },
    #[error("density vanishes at interior breakpoint {index}")]
    ZeroInterior { index: usize },
    #[error("empty interior")]
    EmptyInterior,
    #[error("trials must be at least 1")]
    NoTrials,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DensityRecord", into = "DensityRecord")]
pub struct PLDensity {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

/// Canonical serialized form of a density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityRecord {
    #[serde(with = "serde_q::vec")]
    pub breakpoints: Vec<Rational>,
    #[serde(with = "serde_q::vec")]
    pub values: Vec<Rational>,
}

impl TryFrom<DensityRecord> for PLDensity {
    type Error = DensityError;

    fn try_from(r: DensityRecord) -> Result<Self, Self::Error> {
        PLDensity::new(r.breakpoints, r.values)
    }
}

impl From<PLDensity> for DensityRecord {
    fn from(f: PLDensity) -> Self {
        DensityRecord {
            breakpoints: f.breakpoints,
            values: f.values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeJump {
    #[serde(with = "serde_q")]
    pub location: Rational,
    #[serde(with = "serde_q")]
    pub left_slope: Rational,
    #[serde(with = "serde_q")]
    pub right_slope: Rational,
    #[serde(with = "serde_q")]
    pub jump: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogConcavityVerdict {
    pub is_log_concave: bool,
    /// First interior breakpoint with a positive slope jump.
    pub witness: Option<SlopeJump>,
    pub jumps: Vec<SlopeJump>,
}

impl PLDensity {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self, DensityError> {
        if breakpoints.len() != values.len() {
            return Err(DensityError::LengthMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        if breakpoints.len() < 2 {
            return Err(DensityError::TooFewBreakpoints);
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(DensityError::NotIncreasing { index: i + 1 });
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return Err(DensityError::NegativeValue {
                index: i,
                value: format_rational(&values[i]),
            });
        }
        let k = values.len() - 1;
        if let Some(i) = (1..k).find(|&i| values[i].is_zero()) {
            return Err(DensityError::ZeroInterior { index: i });
        }
        Ok(PLDensity {
            breakpoints,
            values,
        })
    }

    pub fn from_ints(breakpoints: &[i64], values: &[i64]) -> Result<Self, DensityError> {
        Self::new(
            breakpoints.iter().map(|&b| crate::rational::int(b)).collect(),
            values.iter().map(|&v| crate::rational::int(v)).collect(),
        )
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn support(&self) -> (&Rational, &Rational) {
        (&self.breakpoints[0], self.breakpoints.last().unwrap())
    }

    pub fn pieces(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Slope of each affine piece, left to right.
    pub fn slopes(&self) -> Vec<Rational> {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| (&v[1] - &v[0]) / (&t[1] - &t[0]))
            .collect()
    }

    pub fn evaluate(&self, t: &Rational) -> Rational {
        let (lo, hi) = self.support();
        if less(t, lo) || less(hi, t) {
            return Rational::zero();
        }
        // first breakpoint >= t
        let i = self.breakpoints.partition_point(|b| less(b, t));
        if &self.breakpoints[i] == t {
            return self.values[i].clone();
        }
        let (t0, t1) = (&self.breakpoints[i - 1], &self.breakpoints[i]);
        let (v0, v1) = (&self.values[i - 1], &self.values[i]);
        // v0 + (v1 - v0)(t - t0)/(t1 - t0) over one common denominator
        let (a, b) = (v0.numer() * v1.denom(), v1.numer() * v0.denom());
        let vd = v0.denom() * v1.denom();
        let dt = t.numer() * t0.denom() - t0.numer() * t.denom();
        let span = t1.numer() * t0.denom() - t0.numer() * t1.denom();
        let num = &a * &span * t.denom() + (b - &a) * dt * t1.denom();
        let den = vd * span * t.denom();
        Rational::new(num, den)
    }

    pub fn slope_jumps(&self) -> Vec<SlopeJump> {
        let slopes = self.slopes();
        slopes
            .windows(2)
            .enumerate()
            .map(|(i, s)| SlopeJump {
                location: self.breakpoints[i + 1].clone(),
                left_slope: s[0].clone(),
                right_slope: s[1].clone(),
                jump: &s[1] - &s[0],
            })
            .collect()
    }

    /// Log-concavity verdict via slope jumps (see module docs for the
    /// equivalence with the defining inequality).
    pub fn is_log_concave(&self) -> LogConcavityVerdict {
        let jumps = self.slope_jumps();
        let witness = jumps
            .iter()
            .find(|j| j.jump.is_positive() && self.evaluate(&j.location).is_positive())
            .cloned();
        LogConcavityVerdict {
            is_log_concave: witness.is_none(),
            witness,
            jumps,
        }
    }

    /// Drops breakpoints whose neighbours are collinear with them.
    pub fn canonical(&self) -> PLDensity {
        let mut bp = vec![self.breakpoints[0].clone()];
        let mut vals = vec![self.values[0].clone()];
        let k = self.breakpoints.len() - 1;
        for i in 1..k {
            let (ta, va) = (bp.last().unwrap(), vals.last().unwrap());
            let (tb, vb) = (&self.breakpoints[i], &self.values[i]);
            let (tc, vc) = (&self.breakpoints[i + 1], &self.values[i + 1]);
            let left = (vb - va) / (tb - ta);
            let right = (vc - vb) / (tc - tb);
            if left != right {
                bp.push(tb.clone());
                vals.push(vb.clone());
            }
        }
        bp.push(self.breakpoints[k].clone());
        vals.push(self.values[k].clone());
        PLDensity {
            breakpoints: bp,
            values: vals,
        }
    }

    pub fn integral(&self) -> Rational {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| (&t[1] - &t[0]) * (&v[0] + &v[1]) / Rational::from_integer(2.into()))
            .sum()
    }

    /// Exact integral over `[a, b]` (clipped to the support).
    pub fn integral_between(&self, a: &Rational, b: &Rational) -> Rational {
        let (lo, hi) = self.support();
        let a = a.max(lo).clone();
        let b = b.min(hi).clone();
        if a >= b {
            return Rational::zero();
        }
        let mut knots = vec![a.clone()];
        knots.extend(self.breakpoints.iter().filter(|t| **t > a && **t < b).cloned());
        knots.push(b);
        let two = Rational::from_integer(2.into());
        knots
            .windows(2)
            .map(|w| (&w[1] - &w[0]) * (self.evaluate(&w[0]) + self.evaluate(&w[1])) / &two)
            .sum()
    }

    /// `g(t) = f(t / factor)` for `factor > 0`: breakpoints stretch, values
    /// stay, slopes divide by `factor`.
    pub fn reparametrize_levels(&self, factor: &Rational) -> PLDensity {
        assert!(factor.is_positive(), "reparametrization factor must be positive");
        PLDensity {
            breakpoints: self.breakpoints.iter().map(|t| t * factor).collect(),
            values: self.values.clone(),
        }
    }

    /// CSV rows `t,value,right_slope`; the last breakpoint has slope 0
    /// (the density is zero to its right).
    pub fn to_csv(&self) -> String {
        let slopes = self.slopes();
        let mut out = String::from("t,value,right_slope\n");
        for (i, (t, v)) in self.breakpoints.iter().zip(&self.values).enumerate() {
            let s = slopes.get(i).cloned().unwrap_or_else(Rational::zero);
            out.push_str(&format!(
                "{},{},{}\n",
                format_rational(t),
                format_rational(v),
                format_rational(&s)
            ));
        }
        out
    }

    pub fn to_record(&self) -> DensityRecord {
        self.clone().into()
    }
}

// Ratio's Ord walks continued fractions; denominators are positive, so
// cross-multiplying is much cheaper.
fn less(a: &Rational, b: &Rational) -> bool {
    a.numer() * b.denom() < b.numer() * a.denom()
}

impl PartialEq for PLDensity {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.breakpoints == b.breakpoints && a.values == b.values
    }
}

impl Eq for PLDensity {}

/// Multiplicative form of `t log f(x1) + (1-t) log f(x0) <= log f(t x1 + (1-t) x0)`
/// for `t = a/q` in `[0, 1]`: `f(m)^q >= f(x1)^a * f(x0)^(q-a)`.
pub fn midpoint_inequality_holds(
    f: &PLDensity,
    x0: &Rational,
    x1: &Rational,
    t: &Rational,
) -> bool {
    assert!(!t.is_negative() && *t <= Rational::one(), "t must lie in [0, 1]");
    let q = t.denom().to_u32().expect("denominator of t too large");
    let a = t.numer().to_u32().expect("numerator of t too large");
    let m = t * x1 + (Rational::one() - t) * x0;
    // values are reduced and non-negative, so powers of numerator and
    // denominator stay coprime and the comparison can cross-multiply
    let (fm, f1, f0) = (f.evaluate(&m), f.evaluate(x1), f.evaluate(x0));
    let power = |v: &Rational, e: u32| (v.numer().pow(e), v.denom().pow(e));
    let (ln, ld) = power(&fm, q);
    let (an, ad) = power(&f1, a);
    let (bn, bd) = power(&f0, q - a);
    ln * ad * bd >= an * bn * ld
}

/// Checks the defining log-concavity inequality on `trials` random
/// rational triples `(x0, x1, t)`. Deterministic per `seed`.
pub fn pointwise_midpoint_check(
    f: &PLDensity,
    trials: usize,
    seed: u64,
) -> Result<bool, DensityError> {
    if trials == 0 {
        return Err(DensityError::NoTrials);
    }
    let (lo, hi) = f.support();
    if lo == hi {
        return Err(DensityError::EmptyInterior);
    }
    const GRID: i64 = 1 << 12;
    let width = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        let j = rng.gen_range(0..=GRID);
        lo + &width * Rational::new(BigInt::from(j), BigInt::from(GRID))
    };
    for _ in 0..trials {
        let x0 = point(&mut rng);
        let x1 = point(&mut rng);
        let q: i64 = rng.gen_range(1..=12);
        let a: i64 = rng.gen_range(0..=q);
        let t = Rational::new(a.into(), q.into());
        if !midpoint_inequality_holds(f, &x0, &x1, &t) {
            return Ok(false);
        }
    }
    Ok(true)
}
