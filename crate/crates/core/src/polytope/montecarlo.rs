use super::{Polytope, PolytopeError};
use crate::lattice::Direction;
use crate::pwlinear::PLDensity;
use crate::rational::{common_denominator, from_f64, to_f64, Rational};
use num::{BigInt, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const GRID_BITS: u32 = 32;
const CHUNK: usize = 1 << 16;

/// Histogram of `⟨x, X⟩` over uniform samples of a polytope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Accepted samples; equals the sum of `counts`.
    pub total_samples: u64,
    /// Samples drawn from the bounding box, accepted or not.
    pub drawn: u64,
    pub box_volume: f64,
}

impl Histogram {
    /// Per-bin estimate of the push-forward density: the fraction of box
    /// samples landing in the bin, times the box volume, over the bin width.
    pub fn density_estimates(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, e)| c as f64 / self.drawn as f64 * self.box_volume / (e[1] - e[0]))
            .collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.total_samples as f64 / self.drawn as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count,density_estimate\n");
        for ((e, c), d) in self
            .bin_edges
            .windows(2)
            .zip(&self.counts)
            .zip(self.density_estimates())
        {
            out.push_str(&format!("{},{},{},{}\n", e[0], e[1], c, d));
        }
        out
    }
}

/// Facet inequality `Σ coeff_i k_i <= rhs` in integer grid coordinates
/// `x_i = lo_i + width_i · k_i / 2^GRID_BITS`.
struct GridFacet {
    coeffs: Vec<i128>,
    rhs: i128,
}

fn grid_facets(p: &Polytope, lo: &[Rational], width: &[Rational]) -> Option<Vec<GridFacet>> {
    let scale = Rational::from_integer(BigInt::from(1u64 << GRID_BITS));
    p.facets()
        .iter()
        .map(|f| {
            let coeffs: Vec<Rational> = f.normal.iter().zip(width).map(|(a, w)| a * w).collect();
            let rhs = f.slack(lo) * &scale;
            let den = common_denominator(coeffs.iter().chain(std::iter::once(&rhs)));
            let den = Rational::from_integer(den);
            let to_int = |q: &Rational| (q * &den).to_integer().to_i128();
            let coeffs = coeffs.iter().map(to_int).collect::<Option<Vec<i128>>>()?;
            // |Σ c_i k_i| < Σ |c_i| 2^32 must not overflow
            let bound: i128 = coeffs.iter().map(|c| c.abs()).sum();
            bound.checked_mul(1i128 << GRID_BITS)?;
            Some(GridFacet {
                coeffs,
                rhs: to_int(&rhs)?,
            })
        })
        .collect()
}

/// Rejection-samples the bounding box of `P` and histograms `⟨x, X⟩` of the
/// accepted points over `bins` equal bins spanning the level range.
///
/// Sample coordinates live on a `2^32` grid per axis so membership is an
/// exact integer test. Work is split into fixed-size chunks, each with its
/// own ChaCha stream, so the result depends only on `seed`.
pub fn mc_pushforward(
    p: &Polytope,
    x: &Direction,
    samples: usize,
    bins: usize,
    seed: u64,
) -> Result<Histogram, PolytopeError> {
    if samples < 10_000 || bins < 10 {
        return Err(PolytopeError::SamplingParameters);
    }
    p.check_direction(x)?;
    let (lo, hi) = p.bounding_box();
    let width: Vec<Rational> = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
    let facets = grid_facets(p, &lo, &width).ok_or(PolytopeError::SamplingOverflow)?;
    let (lmin, lmax) = p.level_range(x);
    let (lmin, lmax) = (to_f64(&lmin), to_f64(&lmax));
    let lo_f: Vec<f64> = lo.iter().map(to_f64).collect();
    let step: Vec<f64> = width
        .iter()
        .map(|w| to_f64(w) / (1u64 << GRID_BITS) as f64)
        .collect();
    let xf: Vec<f64> = x.coords().iter().map(|&c| c as f64).collect();
    let dim = p.dim();
    let bin_width = (lmax - lmin) / bins as f64;

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut counts = vec![0u64; bins];
            let mut k = vec![0i128; dim];
            for _ in 0..n {
                for ki in k.iter_mut() {
                    *ki = i128::from(rng.gen::<u32>());
                }
                let inside = facets.iter().all(|f| {
                    f.coeffs.iter().zip(&k).map(|(a, b)| a * b).sum::<i128>() <= f.rhs
                });
                if !inside {
                    continue;
                }
                let level: f64 = (0..dim)
                    .map(|i| xf[i] * (lo_f[i] + step[i] * k[i] as f64))
                    .sum();
                let b = (((level - lmin) / bin_width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; bins];
    for part in partial {
        for (c, v) in counts.iter_mut().zip(part) {
            *c += v;
        }
    }
    let accepted: u64 = counts.iter().sum();
    let rate = accepted as f64 / samples as f64;
    if rate < 1e-3 {
        return Err(PolytopeError::DegenerateSampling(format!("{rate:.3e}")));
    }
    let bin_edges = (0..=bins)
        .map(|i| if i == bins { lmax } else { lmin + bin_width * i as f64 })
        .collect();
    Ok(Histogram {
        bin_edges,
        counts,
        total_samples: accepted,
        drawn: samples as u64,
        box_volume: width.iter().map(to_f64).product(),
    })
}

/// Largest gap between a histogram's density estimates and the exact bin
/// averages of `f`.
pub fn sup_distance(h: &Histogram, f: &PLDensity) -> f64 {
    h.bin_edges
        .windows(2)
        .zip(h.density_estimates())
        .map(|(e, est)| {
            let (a, b) = (from_f64(e[0]).unwrap(), from_f64(e[1]).unwrap());
            let mean = f.integral_between(&a, &b) / (&b - &a);
            (to_f64(&mean) - est).abs()
        })
        .fold(0.0, f64::max)
}
