//! Evaluation of F = e^{−f} and of L = E f.
//!
//! All forms target the same function of the sampled field,
//! F_L(z) = ∏_{ℓ ≤ L} (1 − z^ℓ)^{Y_ℓ} · ∏_{ℓ > L} (1 − z^ℓ)^{d^ℓ/ℓ},
//! i.e. unsampled counts are replaced by their means (continued analytically
//! past |z| = 1/d through the centred product). Each returned bound
//! covers the truncations of that form plus floating-point rounding, so two
//! forms must agree within the sum of their bounds.

use super::field::PoissonCycleField;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default total truncation budget for eval_F.
pub const DEFAULT_EVAL_BUDGET: f64 = 1e-12;
/// Series lengths searched up to this before giving up.
pub const MAX_SERIES_TERMS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FForm {
    /// ∏_{ℓ ≤ L} (1 − z^ℓ)^{Y_ℓ}; |z| < min(1, 1/d).
    Product,
    /// exp(Σ_{k ≤ K} (τ_k − X_k) z^k/k) (1 − dz) exp(Σ_{2 ≤ j ≤ J} log(1 − dz^j)/j); |z| < min(1, d^{−1/2}).
    Centered,
    /// exp(Σ_{ℓ ≤ L} (Y_ℓ − d^ℓ/ℓ) log(1 − z^ℓ)) (1 − dz) exp(Σ_{2 ≤ j ≤ J} log(1 − dz^j)/j); |z| < min(1, d^{−1/2}).
    CenteredProduct,
    /// exp(−Σ_{k ≤ K} X_k z^k/k); |z| < min(1, 1/d).
    Traces,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FValue {
    pub re: f64,
    pub im: f64,
    /// Bound on |value − F_L(z)|.
    pub bound: f64,
    /// K for the series forms, L for the product forms.
    pub terms: usize,
    /// J for the forms with a deterministic product, else 0.
    pub log_terms: usize,
}

impl FValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn radius_limit(d: f64, form: FForm) -> f64 {
    match form {
        FForm::Product | FForm::Traces => 1f64.min(1.0 / d),
        FForm::Centered | FForm::CenteredProduct => 1f64.min(1.0 / d.sqrt()),
    }
}

/// Σ_{ℓ > L} λ_ℓ |log(1 − z^ℓ)| ≤ (dr)^{L+1} / ((L+1)(1 − dr)(1 − r^{L+1})).
fn mean_tail(d: f64, r: f64, l: usize) -> f64 {
    let q = d * r;
    let rl = r.powi(l as i32 + 1);
    q.powi(l as i32 + 1) / ((l + 1) as f64 * (1.0 - q) * (1.0 - rl))
}

/// Σ_{j > J} |log(1 − dz^j)|/j ≤ d r^{J+1} / ((J+1)(1 − r)(1 − d r^{J+1})).
fn log_product_tail(d: f64, r: f64, j: usize) -> f64 {
    let x = d * r.powi(j as i32 + 1);
    if x >= 1.0 {
        return f64::INFINITY;
    }
    x / ((j + 1) as f64 * (1.0 - r) * (1.0 - x))
}

/// Σ_{k > K} |a_k| r^k / k for a_k = Σ_{ℓ | k, ℓ ≤ L} ℓ w_ℓ, bounded by
/// Σ_ℓ |w_ℓ| r^{ℓ i₀} / (i₀ (1 − r^ℓ)) with i₀ = ⌊K/ℓ⌋ + 1.
fn divisor_series_tail(weights: &[f64], r: f64, k: usize) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(idx, w)| {
            let l = idx + 1;
            let i0 = k / l + 1;
            let rl = r.powi(l as i32);
            w.abs() * rl.powi(i0 as i32) / (i0 as f64 * (1.0 - rl))
        })
        .sum()
}

/// a_k = Σ_{ℓ | k, ℓ ≤ L} ℓ w_ℓ for k = 1..=K (index 0 unused).
fn divisor_sums(weights: &[f64], k: usize) -> Vec<f64> {
    let mut a = vec![0.0; k + 1];
    for (idx, w) in weights.iter().enumerate().take(k) {
        let l = idx + 1;
        for m in (l..=k).step_by(l) {
            a[m] += l as f64 * w;
        }
    }
    a
}

fn least_terms(target: f64, mut tail: impl FnMut(usize) -> f64) -> Result<usize> {
    let mut hi = 1;
    while tail(hi) > target {
        hi *= 2;
        if hi > MAX_SERIES_TERMS {
            return Err(Error::NonConvergence {
                context: "series truncation".into(),
                detail: format!("tail above {target:e} after {MAX_SERIES_TERMS} terms"),
            });
        }
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.max(1))
}

/// log(1 − x), by its series when |x| is small so that huge multipliers
/// (Y_ℓ or Y_ℓ − λ_ℓ) do not amplify the rounding of 1 − x.
pub(crate) fn log_one_minus(x: Complex64) -> Complex64 {
    let r = x.norm();
    if r >= 0.125 {
        return (Complex64::new(1.0, 0.0) - x).ln();
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p = x;
    let mut n = 1.0;
    loop {
        let t = p / n;
        sum -= t;
        if t.norm() <= 1e-18 * r {
            return sum;
        }
        p *= x;
        n += 1.0;
    }
}

fn principal_log_one_minus(x: Complex64) -> Result<Complex64> {
    let w = Complex64::new(1.0, 0.0) - x;
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(Error::Domain(format!("1 − {x} lies on the branch cut of the principal logarithm")));
    }
    Ok(log_one_minus(x))
}

/// Σ_{2 ≤ j ≤ J} log(1 − dz^j)/j together with Σ |terms|.
fn log_product(d: f64, z: Complex64, j_max: usize) -> Result<(Complex64, f64)> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let mut zj = z;
    for j in 2..=j_max {
        zj *= z;
        let t = principal_log_one_minus(zj * d)? / j as f64;
        mag += t.norm();
        sum += t;
    }
    Ok((sum, mag))
}

fn finish(log: Complex64, prefactor: Complex64, mag: f64, trunc: f64, terms: usize, log_terms: usize) -> FValue {
    let value = prefactor * log.exp();
    let rounding = 8.0 * f64::EPSILON * (mag + 1.0);
    FValue { re: value.re, im: value.im, bound: value.norm() * (trunc + rounding).exp_m1(), terms, log_terms }
}

#[allow(non_snake_case)]
pub fn eval_F(field: &PoissonCycleField, z: Complex64, form: FForm) -> Result<FValue> {
    eval_F_with(field, z, form, DEFAULT_EVAL_BUDGET)
}

/// `eps` is split evenly between the P-series (K), log-product (J) and
/// Y-product (L) truncations; the L share is reported, not tuned, since L is
/// fixed by the field.
#[allow(non_snake_case)]
pub fn eval_F_with(field: &PoissonCycleField, z: Complex64, form: FForm, eps: f64) -> Result<FValue> {
    let d = field.d;
    let r = z.norm();
    let limit = radius_limit(d, form);
    if r >= limit {
        return Err(Error::Domain(format!("|z| = {r} outside the {form:?} disk of radius {limit}")));
    }
    let share = eps / 3.0;
    let one = Complex64::new(1.0, 0.0);
    let l = field.len();
    match form {
        FForm::Product => {
            let mut log = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            let mut zl = one;
            for ell in 1..=l {
                zl *= z;
                let y = field.y_f64(ell);
                if y == 0.0 {
                    continue;
                }
                let t = principal_log_one_minus(zl)? * y;
                mag += t.norm();
                log += t;
            }
            Ok(finish(log, one, mag, mean_tail(d, r, l), l, 0))
        }
        FForm::Traces => {
            let weights: Vec<f64> = (1..=l).map(|ell| field.y_f64(ell)).collect();
            let k = least_terms(share, |k| divisor_series_tail(&weights, r, k))?;
            let mut log = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            let x = divisor_sums(&weights, k);
            let mut zk = one;
            for kk in 1..=k {
                zk *= z;
                let t = -zk * x[kk] / kk as f64;
                mag += t.norm();
                log += t;
            }
            let trunc = divisor_series_tail(&weights, r, k) + mean_tail(d, r, l);
            Ok(finish(log, one, mag, trunc, k, 0))
        }
        FForm::Centered => {
            let weights: Vec<f64> = (1..=l).map(|ell| field.deviation(ell)).collect();
            let k = least_terms(share, |k| divisor_series_tail(&weights, r, k))?;
            let j = least_terms(share, |j| log_product_tail(d, r, j))?;
            let mut log = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            let x = divisor_sums(&weights, k);
            let mut zk = one;
            for kk in 1..=k {
                zk *= z;
                let t = -zk * x[kk] / kk as f64;
                mag += t.norm();
                log += t;
            }
            let (lp, lp_mag) = log_product(d, z, j)?;
            let trunc = divisor_series_tail(&weights, r, k) + log_product_tail(d, r, j);
            Ok(finish(log + lp, one - z * d, mag + lp_mag, trunc, k, j))
        }
        FForm::CenteredProduct => {
            let j = least_terms(share, |j| log_product_tail(d, r, j))?;
            let mut log = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            let mut zl = one;
            for ell in 1..=l {
                zl *= z;
                let t = principal_log_one_minus(zl)? * field.deviation(ell);
                mag += t.norm();
                log += t;
            }
            let (lp, lp_mag) = log_product(d, z, j)?;
            Ok(finish(log + lp, one - z * d, mag + lp_mag, log_product_tail(d, r, j), l, j))
        }
    }
}

/// Σ_{k ≤ K} X_k z^k / k with X_k taken from the field (ℓ ≤ L); this is f(z)
/// truncated, used by the covariance experiments.
pub fn log_trace_series(field: &PoissonCycleField, z: Complex64, k: usize) -> Complex64 {
    let weights: Vec<f64> = (1..=field.len()).map(|e| field.y_f64(e)).collect();
    let x = divisor_sums(&weights, k);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    for kk in 1..=k {
        zk *= z;
        sum += zk * x[kk] / kk as f64;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LValue {
    pub re: f64,
    pub im: f64,
    /// Bound on the omitted terms; infinite if J is too small for the bound to apply.
    pub bound: f64,
}

impl LValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// L(z) = −Σ_{j ≤ J} log(1 − dz^j)/j with the tail bound
/// d r^{J+1} / ((J+1)(1 − r)(1 − d r^{J+1})), r = |z|.
#[allow(non_snake_case)]
pub fn eval_L(d: f64, z: Complex64, j_max: usize) -> Result<LValue> {
    let r = z.norm();
    let limit = radius_limit(d, FForm::Centered);
    if r >= limit {
        return Err(Error::Domain(format!("|z| = {r} outside the disk of radius {limit}")));
    }
    if j_max == 0 {
        return Err(Error::Parameter("J must be at least 1".into()));
    }
    let first = principal_log_one_minus(z * d)?;
    let (rest, _) = log_product(d, z, j_max)?;
    let v = -(first + rest);
    Ok(LValue { re: v.re, im: v.im, bound: log_product_tail(d, r, j_max) })
}

/// L(z) = Σ_{k ≤ K} τ_k z^k / k, only valid for |z| < min(1, 1/d) where the
/// series converges; tail bound q^{K+1}/(1 − q), q = max(1, d)|z|.
#[allow(non_snake_case)]
pub fn eval_L_series(d: f64, z: Complex64, k: usize) -> Result<LValue> {
    let r = z.norm();
    let limit = radius_limit(d, FForm::Traces);
    if r >= limit {
        return Err(Error::Domain(format!(
            "Σ τ_k z^k/k diverges at |z| = {r} (radius {limit}); use the log-product form"
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    for kk in 1..=k {
        zk *= z;
        sum += zk * super::field::tau(d, kk) / kk as f64;
    }
    let q = d.max(1.0) * r;
    Ok(LValue { re: sum.re, im: sum.im, bound: q.powi(k as i32 + 1) / (1.0 - q) })
}
