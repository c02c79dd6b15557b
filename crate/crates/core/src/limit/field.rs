use super::poisson::{draw, PoissonMean};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::spectra::RootLabel;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Hard cap on the truncation length of a field.
pub const FIELD_MAX_LENGTH: usize = 100_000;
/// Radius factor (times d^{−1/2}) at which the d ≥ 1 tail figure is computed.
pub const TAIL_RADIUS_FACTOR: f64 = 0.95;
/// Largest order for the exact coefficient expansion.
pub const LIMIT_SERIES_MAX_ORDER: usize = 4096;

/// A realisation of (Y_1, …, Y_L), Y_ℓ ~ Poisson(d^ℓ/ℓ) independent.
///
/// `tail_prob` is Σ_{ℓ>L} d^ℓ/ℓ bounded by d^{L+1}/((L+1)(1−d)) when d < 1, an
/// upper bound on P(some Y_ℓ > 0 with ℓ > L). When d ≥ 1 it is
/// (Σ_{ℓ>L} λ_ℓ (r^ℓ/(1−r^ℓ))²)^{1/2} at r = 0.95 d^{−1/2}: a bound on the standard
/// deviation of the omitted centred terms Σ_{ℓ>L} (Y_ℓ − λ_ℓ) log(1 − z^ℓ) on |z| ≤ r.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonCycleField {
    pub d: f64,
    pub seed: u64,
    pub tail_prob: f64,
    y: Vec<BigUint>,
    deviation: Vec<f64>,
}

fn exact_mean(d: &BigRational, l: usize) -> BigRational {
    num_traits::pow(d.clone(), l) / BigRational::from_integer(BigInt::from(l))
}

fn exact_d(d: f64) -> Result<BigRational> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Parameter(format!("d = {d} must be positive")));
    }
    Ok(BigRational::from_float(d).expect("finite"))
}

fn tail_figure(d: f64, l: usize) -> f64 {
    if d < 1.0 {
        d.powi(l as i32 + 1) / ((l + 1) as f64 * (1.0 - d))
    } else {
        let r = TAIL_RADIUS_FACTOR / d.sqrt();
        let q = TAIL_RADIUS_FACTOR * TAIL_RADIUS_FACTOR;
        let rl = r.powi(l as i32 + 1);
        (q.powi(l as i32 + 1) / ((l + 1) as f64 * (1.0 - q) * (1.0 - rl) * (1.0 - rl))).sqrt()
    }
}

impl PoissonCycleField {
    /// Field with given counts; deviations Y_ℓ − d^ℓ/ℓ are computed exactly.
    pub fn from_counts(d: f64, y: Vec<BigUint>, seed: u64, tail_prob: f64) -> Result<Self> {
        let dq = exact_d(d)?;
        let deviation = y
            .iter()
            .enumerate()
            .map(|(i, count)| {
                let dev = BigRational::from_integer(BigInt::from(count.clone())) - exact_mean(&dq, i + 1);
                dev.to_f64().unwrap_or(f64::NAN)
            })
            .collect();
        Ok(PoissonCycleField { d, seed, tail_prob, y, deviation })
    }

    pub fn from_small_counts(d: f64, y: &[u64]) -> Result<Self> {
        let tail = tail_figure(d, y.len());
        Self::from_counts(d, y.iter().map(|&v| BigUint::from(v)).collect(), 0, tail)
    }

    /// Truncation length L.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Y_ℓ, 1-based.
    pub fn y(&self, l: usize) -> &BigUint {
        &self.y[l - 1]
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.y
    }

    /// Y_ℓ − d^ℓ/ℓ, 1-based.
    pub fn deviation(&self, l: usize) -> f64 {
        self.deviation[l - 1]
    }

    pub fn is_all_zero(&self) -> bool {
        self.y.iter().all(Zero::is_zero)
    }

    /// Y_ℓ as f64, 1-based.
    pub fn y_f64(&self, l: usize) -> f64 {
        self.y[l - 1].to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_json(&self) -> Value {
        let y: Vec<Value> = self
            .y
            .iter()
            .map(|v| match v.to_u64() {
                Some(small) => json!(small),
                None => json!(v.to_string()),
            })
            .collect();
        json!({ "d": self.d, "L": self.len(), "Y": y, "seed": self.seed, "tail_prob": self.tail_prob })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("field JSON: {m}"));
        let d = value["d"].as_f64().ok_or_else(|| bad("missing d"))?;
        let y: Vec<BigUint> = value["Y"]
            .as_array()
            .ok_or_else(|| bad("missing Y"))?
            .iter()
            .map(|v| match v {
                Value::Number(n) => n.as_u64().map(BigUint::from).ok_or_else(|| bad("Y entries must be nonnegative integers")),
                Value::String(s) => s.parse().map_err(|_| bad("unparseable Y entry")),
                _ => Err(bad("Y entries must be integers")),
            })
            .collect::<Result<_>>()?;
        if value["L"].as_u64() != Some(y.len() as u64) {
            return Err(bad("L does not match the length of Y"));
        }
        let seed = value["seed"].as_u64().unwrap_or(0);
        let tail_prob = value["tail_prob"].as_f64().unwrap_or_else(|| tail_figure(d, y.len()));
        Self::from_counts(d, y, seed, tail_prob)
    }
}

/// Precomputed means for repeated sampling at fixed (d, L).
#[derive(Debug, Clone)]
pub struct FieldSampler {
    d: f64,
    means: Vec<PoissonMean>,
    tail_prob: f64,
}

impl FieldSampler {
    /// For d < 1, L is the least length with d^{L+1}/((L+1)(1−d)) ≤ eps_tail and
    /// `l_max` (if given) only caps it. For d ≥ 1, `l_max` is required and used as L.
    pub fn new(d: f64, eps_tail: f64, l_max: Option<usize>) -> Result<Self> {
        let dq = exact_d(d)?;
        if !(eps_tail > 0.0 && eps_tail < 1.0) {
            return Err(Error::Parameter(format!("eps_tail = {eps_tail} outside (0, 1)")));
        }
        let l = if d < 1.0 {
            let mut l = 1;
            while tail_figure(d, l) > eps_tail {
                l += 1;
            }
            if let Some(cap) = l_max {
                if l > cap {
                    return Err(Error::Budget(format!(
                        "d = {d} needs L = {l} for tail {eps_tail}, above L_max = {cap}"
                    )));
                }
            }
            l
        } else {
            l_max.ok_or_else(|| Error::Parameter(format!("d = {d} ≥ 1 requires an explicit L_max")))?
        };
        if l == 0 || l > FIELD_MAX_LENGTH {
            return Err(Error::Parameter(format!("truncation length {l} outside [1, {FIELD_MAX_LENGTH}]")));
        }
        let means = (1..=l).map(|ell| PoissonMean::from_rational(&exact_mean(&dq, ell))).collect::<Result<_>>()?;
        Ok(FieldSampler { d, means, tail_prob: tail_figure(d, l) })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// Y_1, …, Y_L drawn in order from one stream keyed by `seed`.
    pub fn sample(&self, seed: u64) -> PoissonCycleField {
        let mut rng = stream(seed);
        let (y, deviation) = self
            .means
            .iter()
            .map(|m| {
                let dr = draw(m, &mut rng);
                (dr.count, dr.deviation)
            })
            .unzip();
        PoissonCycleField { d: self.d, seed, tail_prob: self.tail_prob, y, deviation }
    }
}

#[allow(non_snake_case)]
pub fn sample_Y(d: f64, eps_tail: f64, l_max: Option<usize>, seed: u64) -> Result<PoissonCycleField> {
    Ok(FieldSampler::new(d, eps_tail, l_max)?.sample(seed))
}

/// X_k = Σ_{ℓ | k} ℓ Y_ℓ.
pub fn limit_traces(field: &PoissonCycleField, k: usize) -> Result<BigUint> {
    if k == 0 || k > field.len() {
        return Err(Error::Truncation(format!("X_{k} needs 1 ≤ k ≤ L = {}", field.len())));
    }
    Ok((1..=k).filter(|l| k.is_multiple_of(*l)).map(|l| field.y(l) * BigUint::from(l)).sum())
}

/// τ_k = Σ_{ℓ | k} d^ℓ.
pub fn tau(d: f64, k: usize) -> f64 {
    (1..=k).filter(|l| k.is_multiple_of(*l)).map(|l| d.powi(l as i32)).sum()
}

/// X_k − τ_k restricted to ℓ ≤ L, from the stored deviations; defined for every k ≥ 1.
pub fn centred_trace(field: &PoissonCycleField, k: usize) -> f64 {
    (1..=k.min(field.len())).filter(|l| k.is_multiple_of(*l)).map(|l| l as f64 * field.deviation(l)).sum()
}

/// Zeros of the product ∏(1 − z^ℓ)^{Y_ℓ}: each ℓ-th root of unity Y_ℓ times.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZdMultiset {
    pub entries: BTreeMap<RootLabel, u64>,
}

#[derive(Serialize)]
struct ZdEntry {
    l: usize,
    j: usize,
    multiplicity: u64,
}

impl ZdMultiset {
    pub fn multiplicity(&self, label: RootLabel) -> u64 {
        self.entries.get(&label).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn to_json(&self) -> Value {
        let v: Vec<ZdEntry> =
            self.entries.iter().map(|(k, &m)| ZdEntry { l: k.l, j: k.j, multiplicity: m }).collect();
        serde_json::to_value(v).expect("plain data")
    }
}

#[allow(non_snake_case)]
pub fn sample_Zd(field: &PoissonCycleField) -> Result<ZdMultiset> {
    if field.d >= 1.0 {
        return Err(Error::Parameter(format!("Z_d is a finite multiset only for d < 1, got {}", field.d)));
    }
    let mut entries = BTreeMap::new();
    for l in 1..=field.len() {
        let y = field.y(l).to_u64().ok_or_else(|| Error::Budget("Y_ℓ above 2^64".into()))?;
        if y == 0 {
            continue;
        }
        for j in 0..l {
            *entries.entry(RootLabel::reduced(l, j)).or_insert(0) += y;
        }
    }
    Ok(ZdMultiset { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimitCoefficients {
    /// c_0, …, c_N.
    Exact(Vec<BigInt>),
    /// d^{−m/2} c_m for m = 0, …, N.
    Scaled(Vec<f64>),
}

/// F(z) = Σ_{n ≤ N} c_n z^n + O(z^{N+1}).
#[derive(Debug, Clone, PartialEq)]
pub struct SecularLimitSeries {
    pub d: f64,
    pub coeffs: LimitCoefficients,
}

impl SecularLimitSeries {
    pub fn order(&self) -> usize {
        match &self.coeffs {
            LimitCoefficients::Exact(c) => c.len() - 1,
            LimitCoefficients::Scaled(c) => c.len() - 1,
        }
    }

    pub fn exact(&self) -> Option<&[BigInt]> {
        match &self.coeffs {
            LimitCoefficients::Exact(c) => Some(c),
            LimitCoefficients::Scaled(_) => None,
        }
    }

    pub fn c_f64(&self, m: usize) -> f64 {
        match &self.coeffs {
            LimitCoefficients::Exact(c) => c[m].to_f64().unwrap_or(f64::NAN),
            LimitCoefficients::Scaled(c) => c[m] * self.d.powf(m as f64 / 2.0),
        }
    }

    /// d^{−m/2} c_m; zero for negative m.
    pub fn fourier(&self, m: i64) -> f64 {
        if m < 0 {
            return 0.0;
        }
        let m = m as usize;
        match &self.coeffs {
            LimitCoefficients::Exact(c) => c[m].to_f64().unwrap_or(f64::NAN) * self.d.powf(-(m as f64) / 2.0),
            LimitCoefficients::Scaled(c) => c[m],
        }
    }

    pub fn eval(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        (0..=self.order()).rev().fold(num_complex::Complex64::new(0.0, 0.0), |acc, m| acc * z + self.c_f64(m))
    }

    /// The polynomial schema of `SecularPolynomial::to_json`, with trailing zeros kept.
    pub fn to_json(&self) -> Value {
        let (coeffs, scaled): (Vec<String>, bool) = match &self.coeffs {
            LimitCoefficients::Exact(c) => (c.iter().map(|x| x.to_string()).collect(), false),
            LimitCoefficients::Scaled(c) => (c.iter().map(|x| format!("{x:?}")).collect(), true),
        };
        json!({ "degree": self.order(), "coeffs": coeffs, "d": self.d, "scaled": scaled })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("limit series JSON: {m}"));
        let d = value["d"].as_f64().ok_or_else(|| bad("missing d"))?;
        let raw: Vec<&str> = value["coeffs"]
            .as_array()
            .ok_or_else(|| bad("missing coeffs"))?
            .iter()
            .map(|v| v.as_str().ok_or_else(|| bad("coefficients must be strings")))
            .collect::<Result<_>>()?;
        if raw.is_empty() || value["degree"].as_u64() != Some(raw.len() as u64 - 1) {
            return Err(bad("degree does not match coefficient count"));
        }
        let coeffs = if value["scaled"].as_bool().unwrap_or(false) {
            LimitCoefficients::Scaled(raw.iter().map(|s| s.parse().map_err(|_| bad("bad float"))).collect::<Result<_>>()?)
        } else {
            LimitCoefficients::Exact(raw.iter().map(|s| s.parse().map_err(|_| bad("bad integer"))).collect::<Result<_>>()?)
        };
        Ok(SecularLimitSeries { d, coeffs })
    }
}

/// Exact expansion of ∏_{ℓ ≤ L} (1 − z^ℓ)^{Y_ℓ} up to z^N. For d ≥ 1 this needs
/// N ≤ L; for d < 1 the sampled product is the whole function.
pub fn secular_limit_coefficients(field: &PoissonCycleField, order: usize) -> Result<SecularLimitSeries> {
    if order > LIMIT_SERIES_MAX_ORDER {
        return Err(Error::Budget(format!("order {order} above {LIMIT_SERIES_MAX_ORDER}")));
    }
    if field.d >= 1.0 && order > field.len() {
        return Err(Error::Truncation(format!("c_{order} needs Y_ℓ for ℓ ≤ {order}, field has L = {}", field.len())));
    }
    let mut c = vec![BigInt::zero(); order + 1];
    c[0] = BigInt::one();
    for l in 1..=field.len().min(order) {
        let y = BigInt::from(field.y(l).clone());
        if y.is_zero() {
            continue;
        }
        // (1 − z^ℓ)^Y = Σ_i (−1)^i C(Y, i) z^{ℓi}
        let mut factor = vec![BigInt::one()];
        let mut binom = BigInt::one();
        for i in 1..=order / l {
            binom = binom * (&y - (i - 1)) / i;
            if binom.is_zero() {
                break;
            }
            factor.push(if i % 2 == 0 { binom.clone() } else { -binom.clone() });
        }
        let mut next = vec![BigInt::zero(); order + 1];
        for (m, cm) in c.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (i, f) in factor.iter().enumerate() {
                let idx = m + i * l;
                if idx > order {
                    break;
                }
                next[idx] += cm * f;
            }
        }
        c = next;
    }
    Ok(SecularLimitSeries { d: field.d, coeffs: LimitCoefficients::Exact(c) })
}

/// d^{−m/2} c_m in floating point, as the coefficients of
/// F(u/√d) = (1 − √d u) exp(Σ_k b_k u^k), where
/// b_k = −(X_k − τ_k) d^{−k/2}/k − Σ_{j ≥ 2, j | k} d^{k/j − k/2}/k.
/// Every b_k is O(1), so no large cancellation occurs. Needs N ≤ L.
pub fn secular_limit_scaled(field: &PoissonCycleField, order: usize) -> Result<SecularLimitSeries> {
    if order > field.len() {
        return Err(Error::Truncation(format!("scaled c_{order} needs L ≥ {order}, field has L = {}", field.len())));
    }
    let d = field.d;
    let sd = d.sqrt();
    let mut b = vec![0.0; order + 1];
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let mut v = -centred_trace(field, k) * d.powf(-kf / 2.0) / kf;
        for j in (2..=k).filter(|j| k % j == 0) {
            v -= d.powf(kf / j as f64 - kf / 2.0) / kf;
        }
        *bk = v;
    }
    // g = exp(Σ b_k u^k) via m g_m = Σ_{k=1}^{m} k b_k g_{m−k}
    let mut g = vec![0.0; order + 1];
    g[0] = 1.0;
    for m in 1..=order {
        let s: f64 = (1..=m).map(|k| k as f64 * b[k] * g[m - k]).sum();
        g[m] = s / m as f64;
    }
    let mut scaled = vec![0.0; order + 1];
    for m in 0..=order {
        scaled[m] = g[m] - if m > 0 { sd * g[m - 1] } else { 0.0 };
    }
    Ok(SecularLimitSeries { d, coeffs: LimitCoefficients::Scaled(scaled) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_d_gives_empty_fields() {
        let sampler = FieldSampler::new(1e-9, 1e-3, None).unwrap();
        assert!(!sampler.is_empty());
        assert!((0..1000).all(|s| sampler.sample(s).is_all_zero()));
    }

    #[test]
    fn subcritical_length_meets_tail() {
        let sampler = FieldSampler::new(0.5, 1e-12, None).unwrap();
        let exact_tail: f64 = (sampler.len() + 1..2000).map(|l| 0.5f64.powi(l as i32) / l as f64).sum();
        assert!(exact_tail <= sampler.tail_prob && sampler.tail_prob <= 1e-12);
        assert!(FieldSampler::new(0.5, 1e-12, Some(5)).is_err());
        assert!(FieldSampler::new(2.0, 1e-3, None).is_err());
    }

    #[test]
    fn traces_and_tau() {
        let f = PoissonCycleField::from_small_counts(2.0, &[1, 2, 0, 1, 0, 0]).unwrap();
        assert_eq!(limit_traces(&f, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(limit_traces(&f, 4).unwrap(), BigUint::from(9u32));
        assert!(limit_traces(&f, 7).is_err());
        assert_eq!(tau(2.0, 6), 78.0);
        let x4 = 9.0 - tau(2.0, 4);
        assert!((centred_trace(&f, 4) - x4).abs() < 1e-12);
    }

    #[test]
    fn zd_examples() {
        let f = PoissonCycleField::from_small_counts(0.5, &[0, 0, 0]).unwrap();
        assert_eq!(sample_Zd(&f).unwrap().total(), 0);
        let f = PoissonCycleField::from_small_counts(0.5, &[0, 1, 0]).unwrap();
        let z = sample_Zd(&f).unwrap();
        assert_eq!(z.multiplicity(RootLabel { l: 1, j: 0 }), 1);
        assert_eq!(z.multiplicity(RootLabel { l: 2, j: 1 }), 1);
        assert_eq!(z.total(), 2);
        let f = PoissonCycleField::from_small_counts(0.5, &[1, 0, 0, 2]).unwrap();
        let z = sample_Zd(&f).unwrap();
        assert_eq!(z.multiplicity(RootLabel { l: 1, j: 0 }), 3);
        assert_eq!(z.multiplicity(RootLabel { l: 4, j: 1 }), 2);
        assert_eq!(z.total(), 9);
        assert!(sample_Zd(&PoissonCycleField::from_small_counts(1.5, &[1]).unwrap()).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let f = PoissonCycleField::from_small_counts(0.5, &[0, 0]).unwrap();
        let c = secular_limit_coefficients(&f, 4).unwrap();
        assert_eq!(c.exact().unwrap(), &[1, 0, 0, 0, 0].map(BigInt::from));
        let f = PoissonCycleField::from_small_counts(0.5, &[1, 1]).unwrap();
        let c = secular_limit_coefficients(&f, 5).unwrap();
        assert_eq!(c.exact().unwrap(), &[1, -1, -1, 1, 0, 0].map(BigInt::from));
        let f = PoissonCycleField::from_small_counts(2.0, &[1, 1]).unwrap();
        assert!(secular_limit_coefficients(&f, 3).is_err());
    }

    #[test]
    fn scaled_path_matches_exact() {
        for (d, l) in [(1.5, 30), (2.0, 40), (4.0, 25)] {
            let sampler = FieldSampler::new(d, 0.5, Some(l)).unwrap();
            for seed in 0..5 {
                let f = sampler.sample(seed);
                let exact = secular_limit_coefficients(&f, l).unwrap();
                let scaled = secular_limit_scaled(&f, l).unwrap();
                for m in 0..=l as i64 {
                    let (a, b) = (exact.fourier(m), scaled.fourier(m));
                    assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()), "d={d} m={m}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = sample_Y(3.0, 0.1, Some(60), 4).unwrap();
        assert!(f.y(60).to_u64().is_none());
        let back = PoissonCycleField::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let c = secular_limit_coefficients(&f, 10).unwrap();
        assert_eq!(SecularLimitSeries::from_json(&c.to_json()).unwrap(), c);
        let s = secular_limit_scaled(&f, 10).unwrap();
        assert_eq!(SecularLimitSeries::from_json(&s.to_json()).unwrap(), s);
    }
}
