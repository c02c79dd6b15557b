//! Poisson draws for means from 10⁻¹⁰ up to ~10³⁰⁰.
//!
//! The mean is split into an exact integer part and a fractional part, and
//! the draw is returned the same way, so huge counts stay exact and the
//! centred value Y − λ keeps full f64 precision.

use crate::error::{Error, Result};
use crate::rng::{unit, unit_open_closed};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

/// Means below this use sequential-search inversion.
pub const INVERSION_MAX_MEAN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonMean {
    pub floor: BigUint,
    pub frac: f64,
    pub value: f64,
}

impl PoissonMean {
    pub fn from_rational(lambda: &BigRational) -> Result<Self> {
        if lambda.is_negative() {
            return Err(Error::Parameter(format!("negative Poisson mean {lambda}")));
        }
        let (q, r) = lambda.numer().div_rem(lambda.denom());
        let frac = BigRational::new(r, lambda.denom().clone()).to_f64().unwrap_or(0.0);
        let value = lambda.to_f64().filter(|v| v.is_finite() && *v < 1e300).ok_or_else(|| {
            Error::Parameter("Poisson mean exceeds 1e300; lower the truncation length".into())
        })?;
        Ok(PoissonMean { floor: q.to_biguint().expect("nonnegative"), frac, value })
    }
}

/// A draw Y together with Y − λ.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonDraw {
    pub count: BigUint,
    pub deviation: f64,
}

pub fn draw<R: rand::RngCore>(mean: &PoissonMean, rng: &mut R) -> PoissonDraw {
    if mean.value < INVERSION_MAX_MEAN {
        let k = inversion(mean.value, rng);
        return PoissonDraw { count: BigUint::from(k), deviation: k as f64 - mean.value };
    }
    let m = ptrs_offset(mean, rng);
    let offset = BigInt::from_f64(m).expect("finite integer-valued offset");
    let count = (BigInt::from(mean.floor.clone()) + offset).to_biguint().expect("PTRS rejects negative counts");
    PoissonDraw { count, deviation: m - mean.frac }
}

fn inversion<R: rand::RngCore>(lambda: f64, rng: &mut R) -> u64 {
    if lambda == 0.0 {
        return 0;
    }
    let u = unit_open_closed(rng);
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The cdf can stall a few ulps below 1; 200 is far beyond any mean < 10.
    while u > cdf && k < 200 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// (1 + t) log(1 + t) − t, accurate for small |t|.
fn h(t: f64) -> f64 {
    if t.abs() < 1e-2 {
        // Σ_{n≥2} (−1)^n t^n / (n(n−1))
        let mut sum = 0.0;
        let mut power = t * t;
        for n in 2..14 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * power / (n * (n - 1)) as f64;
            power *= t;
        }
        sum
    } else {
        (1.0 + t) * t.ln_1p() - t
    }
}

/// log P(Y = λ + δ) for Y ~ Poisson(λ), λ ≥ 10 and λ + δ a nonnegative integer.
fn log_pmf_centred(mean: &PoissonMean, delta: f64) -> f64 {
    let lambda = mean.value;
    let k = lambda + delta;
    if lambda < 1e7 {
        let k = k.round();
        return -lambda + k * lambda.ln() - ln_gamma(k + 1.0);
    }
    let t = delta / lambda;
    if t <= -1.0 {
        return f64::NEG_INFINITY;
    }
    // Stirling: ln k! = k ln k − k + ½ ln(2πk) + 1/(12k) − 1/(360k³) + …
    let stirling = 1.0 / (12.0 * k) - 1.0 / (360.0 * k * k * k);
    -lambda * h(t) - 0.5 * (std::f64::consts::TAU * k).ln() - stirling
}

/// Transformed rejection with squeeze (Hörmann's PTRS), returning Y − ⌊λ⌋ as an
/// integer-valued f64. Above λ ≈ 2^106 the offsets live on the f64 grid, a
/// resolution of 2^−52 standard deviations.
fn ptrs_offset<R: rand::RngCore>(mean: &PoissonMean, rng: &mut R) -> f64 {
    let lambda = mean.value;
    let slam = lambda.sqrt();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let floor_f = mean.floor.to_f64().unwrap_or(f64::INFINITY);
    loop {
        let u = unit(rng) - 0.5;
        let v = unit(rng);
        let us = 0.5 - u.abs();
        let w = (2.0 * a / us + b) * u + mean.frac + 0.43;
        let m = w.floor();
        if us >= 0.07 && v <= vr {
            return m;
        }
        if !m.is_finite() || m + floor_f < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= log_pmf_centred(mean, m - mean.frac) {
            return m;
        }
    }
}

/// Draw from a Poisson law with a plain f64 mean.
pub fn draw_f64<R: rand::RngCore>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !(0.0..1e15).contains(&lambda) {
        return Err(Error::Parameter(format!("Poisson mean {lambda} outside [0, 1e15)")));
    }
    let r = BigRational::from_float(lambda).unwrap_or_else(BigRational::zero);
    let d = draw(&PoissonMean::from_rational(&r)?, rng);
    Ok(d.count.to_u64().expect("count below 2^64"))
}
