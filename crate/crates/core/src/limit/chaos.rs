//! Poisson holomorphic chaos norms, the covariance kernel of f, and the
//! Gaussian-regime limit.

use super::field::SecularLimitSeries;
use crate::error::{Error, Result};
use crate::rng::{standard_normal, stream};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevReport {
    pub d: f64,
    pub s: f64,
    pub order: usize,
    /// d^{−m/2} c_m for m = 0..=N.
    pub fourier: Vec<f64>,
    /// Σ_{m ≤ N} (1 + m²)^s d^{−m} |c_m|².
    pub norm_sq: f64,
}

pub fn phc_sobolev(c: &SecularLimitSeries, d: f64, s: f64, order: usize) -> Result<SobolevReport> {
    if !(d > 1.0) {
        return Err(Error::Parameter(format!("the chaos is defined for d > 1, got {d}")));
    }
    if order > c.order() {
        return Err(Error::Truncation(format!("N = {order} above the series order {}", c.order())));
    }
    if (c.d - d).abs() > 0.0 {
        return Err(Error::Parameter(format!("series was built for d = {}, not {d}", c.d)));
    }
    let fourier: Vec<f64> = (0..=order as i64).map(|m| c.fourier(m)).collect();
    let norm_sq = fourier.iter().enumerate().map(|(m, a)| (1.0 + (m * m) as f64).powf(s) * a * a).sum();
    Ok(SobolevReport { d, s, order, fourier, norm_sq })
}

/// 1 + (1 + d) Σ_{1 ≤ m ≤ N} (1 + m²)^s, the mean of `norm_sq` (c_0 = 1 always,
/// E c_m² = d^m + d^{m+1} for m ≥ 1).
pub fn sobolev_mean(d: f64, s: f64, order: usize) -> f64 {
    1.0 + (1.0 + d) * (1..=order).map(|m| (1.0 + (m * m) as f64).powf(s)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovValue {
    pub re: f64,
    pub im: f64,
    pub bound: f64,
    /// α, β ≤ terms in the double sum.
    pub terms: usize,
}

impl CovValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub const COV_MAX_TERMS: usize = 1 << 14;

/// Cov(f(z), f(w)) = Σ_{α, β ≥ 1} −log(1 − d z^α w̄^β) / (αβ).
///
/// The double sum over α, β ≤ A omits at most
/// d/(1 − q) · [t(|z|, A) ℓ(|w|) + ℓ(|z|) t(|w|, A)] with q = d|z||w|,
/// ℓ(x) = −log(1 − x) and t(x, A) = x^{A+1}/((A+1)(1 − x)).
pub fn cov_f(d: f64, z: Complex64, w: Complex64, tol: f64) -> Result<CovValue> {
    let (rz, rw) = (z.norm(), w.norm());
    let limit = 1f64.min(1.0 / d.sqrt());
    if !(d > 0.0) || rz >= limit || rw >= limit {
        return Err(Error::Domain(format!("|z|, |w| must be below {limit}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tol must be positive".into()));
    }
    let q = d * rz * rw;
    let ell = |x: f64| -(-x).ln_1p();
    let t = |x: f64, a: usize| x.powi(a as i32 + 1) / ((a + 1) as f64 * (1.0 - x));
    let bound_at = |a: usize| d / (1.0 - q) * (t(rz, a) * ell(rw) + ell(rz) * t(rw, a));
    let mut a = 4;
    while bound_at(a) >= tol {
        a *= 2;
        if a > COV_MAX_TERMS {
            return Err(Error::NonConvergence {
                context: "cov_f".into(),
                detail: format!("tail {:e} above {tol:e} with {COV_MAX_TERMS} terms; points too close to the boundary", bound_at(a / 2)),
            });
        }
    }
    let wc = w.conj();
    let z_pows: Vec<Complex64> = (1..=a).scan(Complex64::new(1.0, 0.0), |p, _| { *p *= z; Some(*p) }).collect();
    let w_pows: Vec<Complex64> = (1..=a).scan(Complex64::new(1.0, 0.0), |p, _| { *p *= wc; Some(*p) }).collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, za) in z_pows.iter().enumerate() {
        for (j, wb) in w_pows.iter().enumerate() {
            let x = za * wb * d;
            if x.norm() < 1e-300 {
                break;
            }
            sum -= super::eval::log_one_minus(x) / ((i + 1) * (j + 1)) as f64;
        }
    }
    Ok(CovValue { re: sum.re, im: sum.im, bound: bound_at(a), terms: a })
}

/// Confidence level for the recorded bound on unsampled |N_k|.
pub const GAUSSIAN_TAIL_CONFIDENCE: f64 = 1e-12;
/// Required accuracy of the truncated log-series in gaussian_limit.
pub const GAUSSIAN_TAIL_TARGET: f64 = 1e-8;

/// N_1, …, N_K iid standard normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianChaos {
    pub k: usize,
    pub n: Vec<f64>,
    pub seed: Option<u64>,
}

impl GaussianChaos {
    pub fn from_values(n: Vec<f64>) -> Self {
        GaussianChaos { k: n.len(), n, seed: None }
    }
}

#[allow(non_snake_case)]
pub fn sample_G(seed: u64, k: usize) -> GaussianChaos {
    let mut rng = stream(seed);
    GaussianChaos { k, n: (0..k).map(|_| standard_normal(&mut rng)).collect(), seed: Some(seed) }
}

/// B_k = (2 log(k² / δ))^{1/2}: every unsampled |N_k| stays below B_k except
/// with probability at most δ Σ_{k > K} k^{−2}.
fn normal_envelope(k: usize) -> f64 {
    (2.0 * ((k * k) as f64 / GAUSSIAN_TAIL_CONFIDENCE).ln()).sqrt()
}

/// Σ_{k > K} B_k r^k / √k, the recorded tail of Σ N_k z^k/√k on |z| ≤ r.
pub fn gaussian_tail_bound(k: usize, r: f64) -> f64 {
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    let mut m = k + 1;
    loop {
        let term = normal_envelope(m) * r.powi(m as i32) / (m as f64).sqrt();
        sum += term;
        if term < 1e-30 || m > k + 100_000 {
            break;
        }
        m += 1;
    }
    // B_j ≤ B_m j/m for j ≥ m, so the rest is at most B_m/m Σ_{j>m} j r^j.
    let rest = normal_envelope(m) / m as f64 * r.powi(m as i32 + 1) * ((m + 1) as f64 - m as f64 * r) / ((1.0 - r) * (1.0 - r));
    sum + rest
}

/// Least K whose recorded tail at radius r is below GAUSSIAN_TAIL_TARGET.
pub fn gaussian_order_for(r: f64) -> Result<usize> {
    if r >= 1.0 {
        return Err(Error::Domain(format!("radius {r} not below 1")));
    }
    // The bound decreases in K: double, then bisect.
    let ok = |k: usize| gaussian_tail_bound(k, r) <= GAUSSIAN_TAIL_TARGET;
    let mut hi = 1;
    while !ok(hi) {
        hi *= 2;
        if hi > 1 << 20 {
            return Err(Error::Budget(format!("radius {r} needs more than 10^6 terms")));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if lo >= 1 && ok(lo) { lo } else { hi })
}

/// g(z) = Σ_{k ≤ K} N_k z^k / √k.
pub fn gaussian_log_field(chaos: &GaussianChaos, z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    for (i, nk) in chaos.n.iter().enumerate() {
        zk *= z;
        sum += zk * (*nk / ((i + 1) as f64).sqrt());
    }
    sum
}

/// −z √(1 − z²) exp(g(z)). Chaos drawn by `sample_G` must have K large enough
/// that the recorded tail at |z| is below GAUSSIAN_TAIL_TARGET; forced
/// values (`from_values`) are taken as the whole series.
pub fn gaussian_limit(chaos: &GaussianChaos, z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if r >= 1.0 {
        return Err(Error::Domain(format!("|z| = {r} not below 1")));
    }
    if chaos.seed.is_some() {
        let tail = gaussian_tail_bound(chaos.k, r);
        if tail > GAUSSIAN_TAIL_TARGET {
            return Err(Error::Truncation(format!(
                "K = {} leaves tail {tail:e} at |z| = {r}; need K ≥ {}",
                chaos.k,
                gaussian_order_for(r)?
            )));
        }
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(-z * (one - z * z).sqrt() * gaussian_log_field(chaos, z).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::field::{FieldSampler, LimitCoefficients};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_series_norm() {
        let mut coeffs = vec![0.0; 11];
        coeffs[0] = 1.0;
        let series = SecularLimitSeries { d: 2.0, coeffs: LimitCoefficients::Scaled(coeffs) };
        let r = phc_sobolev(&series, 2.0, -1.0, 10).unwrap();
        assert_eq!(r.norm_sq, 1.0);
        assert_eq!(series.fourier(-3), 0.0);
        assert!(phc_sobolev(&series, 0.5, -1.0, 10).is_err());
        assert!(phc_sobolev(&series, 2.0, -1.0, 11).is_err());
    }

    #[test]
    fn sobolev_norm_from_exact_series() {
        let f = FieldSampler::new(2.0, 0.5, Some(20)).unwrap().sample(1);
        let exact = super::super::field::secular_limit_coefficients(&f, 20).unwrap();
        let r = phc_sobolev(&exact, 2.0, -0.6, 20).unwrap();
        let manual: f64 = (0..=20)
            .map(|m| (1.0 + (m * m) as f64).powf(-0.6) * exact.c_f64(m).powi(2) / 2f64.powi(m as i32))
            .sum();
        assert!((r.norm_sq - manual).abs() < 1e-12 * manual);
    }

    #[test]
    fn covariance_basics() {
        assert_eq!(cov_f(1.5, c(0.0, 0.0), c(0.3, 0.1), 1e-14).unwrap().value(), c(0.0, 0.0));
        let (z, w) = (c(0.3, 0.2), c(-0.1, 0.5));
        let a = cov_f(1.5, z, w, 1e-14).unwrap().value();
        let b = cov_f(1.5, w, z, 1e-14).unwrap().value();
        assert!((a - b.conj()).norm() < 1e-12);
        // Variance-of-f cross-check through the divisor form Σ_k Σ_{k'} Σ_{ℓ | k, k'} ℓ d^ℓ z^k w̄^k' / (k k').
        let (z, w): (f64, f64) = (0.3, 0.2);
        let mut direct = 0.0;
        for k in 1..80usize {
            for kp in 1..80usize {
                let s: f64 = (1..=k.min(kp)).filter(|l| k % l == 0 && kp % l == 0).map(|l| l as f64 * 1.5f64.powi(l as i32)).sum();
                direct += s * z.powi(k as i32) * w.powi(kp as i32) / (k * kp) as f64;
            }
        }
        let v = cov_f(1.5, c(z, 0.0), c(w, 0.0), 1e-14).unwrap();
        assert!((v.re - direct).abs() < 1e-12 && v.im.abs() < 1e-15);
        assert!(cov_f(2.0, c(0.71, 0.0), c(0.1, 0.0), 1e-10).is_err());
    }

    #[test]
    fn gaussian_examples() {
        let g = sample_G(3, 60);
        assert_eq!(gaussian_limit(&g, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let zero = GaussianChaos::from_values(vec![0.0; 10]);
        let v = gaussian_limit(&zero, c(0.6, 0.0)).unwrap();
        assert!((v - c(-0.48, 0.0)).norm() < 1e-15);
        assert!(gaussian_limit(&g, c(1.0, 0.0)).is_err());
        assert!(gaussian_limit(&sample_G(3, 5), c(0.9, 0.0)).is_err());
        let k = gaussian_order_for(0.5).unwrap();
        assert!(gaussian_tail_bound(k, 0.5) <= GAUSSIAN_TAIL_TARGET);
        assert!(gaussian_tail_bound(k - 1, 0.5) > GAUSSIAN_TAIL_TARGET);
        assert!(gaussian_limit(&sample_G(9, k), c(0.5, 0.0)).is_ok());
    }
}
