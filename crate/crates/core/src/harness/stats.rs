use crate::error::{Error, Result};
use crate::rng::stream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Sample law of one measured column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmpiricalDist {
    Discrete { counts: BTreeMap<i64, u64>, size: u64 },
    Continuous { sorted: Vec<f64> },
}

impl EmpiricalDist {
    /// Integer-valued samples become a count table, anything else a sorted sample.
    pub fn from_samples(values: &[f64]) -> Self {
        if values.iter().all(|x| x.fract() == 0.0 && x.abs() < 9e15) {
            let mut counts = BTreeMap::new();
            for &x in values {
                *counts.entry(x as i64).or_insert(0) += 1;
            }
            EmpiricalDist::Discrete { counts, size: values.len() as u64 }
        } else {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            EmpiricalDist::Continuous { sorted }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            EmpiricalDist::Discrete { size, .. } => *size as usize,
            EmpiricalDist::Continuous { sorted } => sorted.len(),
        }
    }

    pub fn frequency(&self, value: i64) -> f64 {
        match self {
            EmpiricalDist::Discrete { counts, size } => {
                counts.get(&value).copied().unwrap_or(0) as f64 / (*size).max(1) as f64
            }
            EmpiricalDist::Continuous { sorted } => {
                sorted.iter().filter(|&&x| x == value as f64).count() as f64 / sorted.len().max(1) as f64
            }
        }
    }

    fn samples(&self) -> Vec<f64> {
        match self {
            EmpiricalDist::Discrete { counts, .. } => {
                counts.iter().flat_map(|(&v, &c)| std::iter::repeat_n(v as f64, c as usize)).collect()
            }
            EmpiricalDist::Continuous { sorted } => sorted.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    TotalVariation,
    Kolmogorov,
    Mean,
    Variance,
    Fraction,
    Count,
    RelativeError,
}

/// Pass rule of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Threshold {
    /// estimate < limit
    Below { limit: f64 },
    /// |estimate − target| ≤ bands · standard_error
    WithinSe { bands: f64 },
    /// lo ≤ estimate ≤ hi
    Interval { lo: f64, hi: f64 },
    /// estimate ≥ min
    AtLeast { min: f64 },
    /// Reported only.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub name: String,
    pub statistic: Statistic,
    pub estimate: f64,
    pub target: f64,
    pub standard_error: Option<f64>,
    pub samples: usize,
    pub threshold: Threshold,
    pub pass: bool,
}

impl StatReport {
    pub fn new(
        name: impl Into<String>,
        statistic: Statistic,
        estimate: f64,
        target: f64,
        standard_error: Option<f64>,
        samples: usize,
        threshold: Threshold,
    ) -> Self {
        let pass = match threshold {
            Threshold::Below { limit } => estimate < limit,
            Threshold::WithinSe { bands } => {
                (estimate - target).abs() <= bands * standard_error.unwrap_or(0.0)
            }
            Threshold::Interval { lo, hi } => lo <= estimate && estimate <= hi,
            Threshold::AtLeast { min } => estimate >= min,
            Threshold::Informational => true,
        };
        StatReport { name: name.into(), statistic, estimate, target, standard_error, samples, threshold, pass }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Sample mean against `target` with standard error sd/√N.
pub fn mean_check(name: &str, x: &[f64], target: f64, bands: f64) -> StatReport {
    let se = (variance(x) / x.len() as f64).sqrt();
    StatReport::new(name, Statistic::Mean, mean(x), target, Some(se), x.len(), Threshold::WithinSe { bands })
}

/// Sample variance against `target` with standard error √((m₄ − s⁴)/N).
pub fn variance_check(name: &str, x: &[f64], target: f64, bands: f64) -> StatReport {
    let m = mean(x);
    let n = x.len() as f64;
    let s2 = variance(x);
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    let se = ((m4 - s2 * s2).max(0.0) / n).sqrt();
    StatReport::new(name, Statistic::Variance, s2, target, Some(se), x.len(), Threshold::WithinSe { bands })
}

/// Difference of two independent sample means against `target`, with the combined standard error.
pub fn two_sample_mean_check(name: &str, x: &[f64], y: &[f64], bands: f64) -> StatReport {
    let se = (variance(x) / x.len() as f64 + variance(y) / y.len() as f64).sqrt();
    StatReport::new(
        name,
        Statistic::Mean,
        mean(x),
        mean(y),
        Some(se),
        x.len(),
        Threshold::WithinSe { bands },
    )
}

/// Reference law for [`compare_distributions`].
pub enum Reference<'a> {
    /// Probabilities of 0, 1, 2, …; mass beyond the vector counts as unmatched.
    Pmf(&'a [f64]),
    Cdf(&'a dyn Fn(f64) -> f64),
    Empirical(&'a EmpiricalDist),
}

/// Total variation for discrete laws, Kolmogorov–Smirnov distance otherwise.
pub fn compare_distributions(name: &str, sample: &EmpiricalDist, reference: Reference<'_>, limit: f64) -> Result<StatReport> {
    if sample.size() == 0 {
        return Err(Error::Parameter("empty sample".into()));
    }
    let n = sample.size();
    let (statistic, distance) = match (sample, reference) {
        (EmpiricalDist::Discrete { counts, size }, Reference::Pmf(pmf)) => {
            let mut tv = 0.0;
            for (j, q) in pmf.iter().enumerate() {
                tv += (counts.get(&(j as i64)).copied().unwrap_or(0) as f64 / *size as f64 - q).abs();
            }
            let outside: u64 = counts.iter().filter(|(&v, _)| v < 0 || v as usize >= pmf.len()).map(|(_, &c)| c).sum();
            tv += outside as f64 / *size as f64;
            tv += (1.0 - pmf.iter().sum::<f64>()).max(0.0);
            (Statistic::TotalVariation, tv / 2.0)
        }
        (EmpiricalDist::Continuous { .. }, Reference::Pmf(_)) => {
            return Err(Error::Parameter("a pmf reference needs an integer-valued sample".into()))
        }
        (EmpiricalDist::Discrete { counts: a, size: na }, Reference::Empirical(EmpiricalDist::Discrete { counts: b, size: nb })) => {
            let keys: std::collections::BTreeSet<i64> = a.keys().chain(b.keys()).copied().collect();
            let tv: f64 = keys
                .iter()
                .map(|k| {
                    let pa = a.get(k).copied().unwrap_or(0) as f64 / *na as f64;
                    let pb = b.get(k).copied().unwrap_or(0) as f64 / *nb as f64;
                    (pa - pb).abs()
                })
                .sum();
            (Statistic::TotalVariation, tv / 2.0)
        }
        (s, Reference::Empirical(other)) => {
            if other.size() == 0 {
                return Err(Error::Parameter("empty reference sample".into()));
            }
            (Statistic::Kolmogorov, ks_two_sample(&s.samples(), &other.samples()))
        }
        (s, Reference::Cdf(cdf)) => (Statistic::Kolmogorov, ks_one_sample(&s.samples(), cdf)),
    };
    Ok(StatReport::new(name, statistic, distance, 0.0, None, n, Threshold::Below { limit }))
}

/// sup |F_n − F| over a sorted sample.
pub fn ks_one_sample(sorted: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    d
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Bootstrap standard error of the TV distance between a discrete sample and `pmf`.
pub fn bootstrap_tv_se(sample: &EmpiricalDist, pmf: &[f64], reps: usize, seed: u64) -> Result<f64> {
    let values = sample.samples();
    if values.is_empty() || reps < 2 {
        return Err(Error::Parameter("bootstrap needs a sample and at least two replicates".into()));
    }
    let mut rng = stream(seed);
    let mut tvs = Vec::with_capacity(reps);
    let mut resample = vec![0.0; values.len()];
    for _ in 0..reps {
        for r in resample.iter_mut() {
            *r = values[rng.random_range(0..values.len())];
        }
        let e = EmpiricalDist::from_samples(&resample);
        tvs.push(compare_distributions("bootstrap", &e, Reference::Pmf(pmf), 1.0)?.estimate);
    }
    Ok(variance(&tvs).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::standard_normal;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn tv_of_identical_and_disjoint_laws() {
        let a = EmpiricalDist::from_samples(&[0.0, 1.0, 1.0, 2.0]);
        let same = compare_distributions("same", &a, Reference::Empirical(&a), 0.1).unwrap();
        assert_eq!(same.estimate, 0.0);
        assert!(same.pass);
        let b = EmpiricalDist::from_samples(&[5.0, 6.0]);
        let apart = compare_distributions("apart", &a, Reference::Empirical(&b), 0.1).unwrap();
        assert_eq!(apart.estimate, 1.0);
        assert!(!apart.pass);
        let exact = compare_distributions("pmf", &a, Reference::Pmf(&[0.25, 0.5, 0.25]), 0.1).unwrap();
        assert!(exact.estimate.abs() < 1e-15);
        let short = compare_distributions("short", &a, Reference::Pmf(&[0.25, 0.5]), 0.1).unwrap();
        assert!((short.estimate - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ks_of_normal_sample() {
        let mut rng = stream(3);
        let x: Vec<f64> = (0..100_000).map(|_| standard_normal(&mut rng)).collect();
        let e = EmpiricalDist::from_samples(&x);
        let normal = Normal::standard();
        let cdf = |t: f64| normal.cdf(t);
        let r = compare_distributions("ks", &e, Reference::Cdf(&cdf), 0.006).unwrap();
        assert_eq!(r.statistic, Statistic::Kolmogorov);
        assert!(r.pass, "{r:?}");
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.5).collect();
        let r = compare_distributions("shift", &EmpiricalDist::from_samples(&shifted), Reference::Cdf(&cdf), 0.006).unwrap();
        assert!(r.estimate > 0.15);
        assert!((ks_two_sample(&e.samples(), &e.samples())).abs() < 1e-15);
    }

    #[test]
    fn checks_apply_their_rules() {
        let x: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let m = mean_check("m", &x, 0.5, 3.0);
        assert!(m.pass && (m.estimate - 0.5).abs() < 1e-12);
        assert!(!mean_check("m", &x, 0.6, 3.0).pass);
        let y: Vec<f64> = (0..999).map(|i| (i % 3) as f64).collect();
        let v = variance_check("v", &y, 2.0 / 3.0, 3.0);
        assert!(v.pass, "{v:?}");
        let r = StatReport::new("f", Statistic::Fraction, 0.5, 0.5, None, 10, Threshold::Interval { lo: 0.47, hi: 0.53 });
        assert!(r.pass);
        let line = r.to_json_line();
        let back: StatReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bootstrap_se_is_small_for_large_samples() {
        let x: Vec<f64> = (0..4000).map(|i| (i % 4) as f64).collect();
        let e = EmpiricalDist::from_samples(&x);
        let se = bootstrap_tv_se(&e, &[0.25; 4], 50, 1).unwrap();
        assert!(se > 0.0 && se < 0.02, "{se}");
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn distances_are_symmetric_and_bounded(
            a in prop::collection::vec(0i64..6, 1..60),
            b in prop::collection::vec(0i64..6, 1..60),
        ) {
            let a: Vec<f64> = a.into_iter().map(|x| x as f64).collect();
            let b: Vec<f64> = b.into_iter().map(|x| x as f64).collect();
            let (ea, eb) = (EmpiricalDist::from_samples(&a), EmpiricalDist::from_samples(&b));
            let ab = compare_distributions("ab", &ea, Reference::Empirical(&eb), 1.0).unwrap().estimate;
            let ba = compare_distributions("ba", &eb, Reference::Empirical(&ea), 1.0).unwrap().estimate;
            prop_assert!((ab - ba).abs() < 1e-12 && (0.0..=1.0).contains(&ab));
            let (mut sa, mut sb) = (a.clone(), b.clone());
            sa.sort_by(f64::total_cmp);
            sb.sort_by(f64::total_cmp);
            let ks = ks_two_sample(&sa, &sb);
            prop_assert!((ks - ks_two_sample(&sb, &sa)).abs() < 1e-12 && (0.0..=1.0).contains(&ks));
            prop_assert!(ks <= ab + 1e-12);
        }
    }
}
