use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A cycle type of permutations of k points: `parts` holds (cycle length,
/// multiplicity) pairs, `count` the number of permutations with that type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleType {
    pub parts: Vec<(usize, u32)>,
    pub count: BigInt,
}

impl CycleType {
    pub fn cycles(&self) -> u32 {
        self.parts.iter().map(|&(_, m)| m).sum()
    }

    /// Contribution sign (−1)^{number of cycles}.
    pub fn sign(&self) -> i32 {
        if self.cycles().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// All cycle types of S_k with counts k!/∏(l^{m_l} m_l!).
pub fn pk_terms(k: usize) -> Vec<CycleType> {
    let mut out = Vec::new();
    let mut parts = Vec::new();
    partitions(k, k, &mut parts, &mut out);
    let k_fact = factorial(k);
    out.into_iter()
        .map(|parts| {
            let mut denom = BigInt::one();
            for &(l, m) in &parts {
                denom *= BigInt::from(l).pow(m) * factorial(m as usize);
            }
            CycleType {
                count: &k_fact / denom,
                parts,
            }
        })
        .collect()
}

fn partitions(
    rest: usize,
    max: usize,
    parts: &mut Vec<(usize, u32)>,
    out: &mut Vec<Vec<(usize, u32)>>,
) {
    if rest == 0 {
        out.push(parts.clone());
        return;
    }
    for l in (1..=max.min(rest)).rev() {
        for m in 1..=(rest / l) as u32 {
            parts.push((l, m));
            partitions(rest - l * m as usize, l - 1, parts, out);
            parts.pop();
        }
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

/// P_k(x_1, …, x_k) = Σ_σ (−1)^{#cycles(σ)} ∏_{cycles c} x_{|c|}.
pub fn eval_pk(x: &[f64]) -> f64 {
    pk_terms(x.len())
        .iter()
        .map(|t| {
            let prod: f64 = t
                .parts
                .iter()
                .map(|&(l, m)| x[l - 1].powi(m as i32))
                .product();
            t.sign() as f64 * t.count.to_f64().unwrap_or(f64::INFINITY) * prod
        })
        .sum()
}

pub fn eval_pk_rational(x: &[BigRational]) -> BigRational {
    let mut total = BigRational::zero();
    for t in pk_terms(x.len()) {
        let mut prod = BigRational::from_integer(t.count.clone());
        for &(l, m) in &t.parts {
            prod *= num_traits::pow(x[l - 1].clone(), m as usize);
        }
        if t.sign() < 0 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_sum_to_factorial() {
        for k in 1..=9 {
            let total: BigInt = pk_terms(k).iter().map(|t| t.count.clone()).sum();
            assert_eq!(total, factorial(k));
        }
        // Number of partitions of 8.
        assert_eq!(pk_terms(8).len(), 22);
    }

    #[test]
    fn small_values() {
        assert_eq!(eval_pk(&[5.0]), -5.0);
        assert_eq!(eval_pk(&[2.0, 2.0]), 2.0);
        assert_eq!(eval_pk(&[3.0, 3.0, 3.0]), -6.0);
    }
}
