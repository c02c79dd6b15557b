use super::partitions::for_each_partition;
use super::MultiSeries;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

pub const GF_MAX_DEGREE: u32 = 24;

/// E[F(z_1)⋯F(z_r)] = ∏_{|S| odd}(1 − d z^S) / ∏_{|S| even}(1 − d z^S) over
/// nonempty S ⊆ {1, …, r}, with z^S = ∏_{s∈S} z_s, expanded through total
/// degree `cap`. The coefficient of z^n is E[c_{n_1}⋯c_{n_r}].
pub fn gf_secular_moments(d: &BigRational, r: usize, cap: u32) -> Result<MultiSeries> {
    if r == 0 || r > 4 {
        return Err(Error::Parameter(format!(
            "number of points r = {r} must be in 1..=4"
        )));
    }
    if cap > GF_MAX_DEGREE {
        return Err(Error::Budget(format!(
            "total degree {cap} above cap {GF_MAX_DEGREE}"
        )));
    }
    let mut out = MultiSeries::one(r, cap);
    for subset in 1u32..(1 << r) {
        let size = subset.count_ones();
        let base: Vec<u32> = (0..r).map(|i| subset >> i & 1).collect();
        let factor = if size % 2 == 1 {
            MultiSeries::one(r, cap).add(&MultiSeries::monomial(r, cap, base, -d.clone()))
        } else {
            let mut geometric = MultiSeries::zero(r, cap);
            let mut dk = BigRational::one();
            let mut k = 0u32;
            while k * size <= cap {
                let e = base.iter().map(|b| b * k).collect();
                geometric = geometric.add(&MultiSeries::monomial(r, cap, e, dk.clone()));
                dk *= d;
                k += 1;
            }
            geometric
        };
        out = out.mul(&factor);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GfPartitionReport {
    pub r: usize,
    pub cap: u32,
    pub checked: usize,
    /// Exponent vectors where the two sides differ, with (series, partition sum) as strings.
    pub mismatches: Vec<(Vec<u32>, String, String)>,
    pub ok: bool,
}

/// Compares every coefficient of [`gf_secular_moments`] with the weighted
/// count Σ_B (−1)^{#odd blocks} d^{|B|} over set-partitions B of the
/// exponent multiset whose odd-size blocks are pairwise distinct.
pub fn gf_partition_check(d: &BigRational, r: usize, cap: u32) -> Result<GfPartitionReport> {
    if r == 0 || r > 3 || cap > 8 {
        return Err(Error::Parameter(
            "partition check runs for r ≤ 3 and total degree ≤ 8".into(),
        ));
    }
    let series = gf_secular_moments(d, r, cap)?;
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for exponents in exponent_vectors(r, cap) {
        let mut by_sign_and_size: Vec<BigInt> = vec![BigInt::zero(); cap as usize + 1];
        for_each_partition(&exponents, |blocks| {
            let odd: Vec<u32> = blocks
                .iter()
                .copied()
                .filter(|b| b.count_ones() % 2 == 1)
                .collect();
            // Blocks arrive sorted, so equal blocks are adjacent.
            if odd.windows(2).any(|w| w[0] == w[1]) {
                return;
            }
            let sign = if odd.len().is_multiple_of(2) { 1 } else { -1 };
            by_sign_and_size[blocks.len()] += sign;
        });
        let mut total = BigRational::zero();
        let mut dk = BigRational::one();
        for c in &by_sign_and_size {
            total += BigRational::from_integer(c.clone()) * &dk;
            dk *= d;
        }
        let expected = series.coeff(&exponents);
        if expected != total {
            mismatches.push((exponents.clone(), expected.to_string(), total.to_string()));
        }
        checked += 1;
    }
    Ok(GfPartitionReport {
        r,
        cap,
        checked,
        ok: mismatches.is_empty(),
        mismatches,
    })
}

/// All exponent vectors of length r with total degree ≤ cap.
pub(crate) fn exponent_vectors(r: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; r];
    fn go(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            go(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    go(0, cap, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rational;

    #[test]
    fn one_point_is_linear() {
        let d = rational(3, 2);
        let s = gf_secular_moments(&d, 1, 10).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coeff(&[0]), rational(1, 1));
        assert_eq!(s.coeff(&[1]), -d);
    }

    #[test]
    fn exponent_vector_count() {
        // C(cap + r, r)
        assert_eq!(exponent_vectors(2, 6).len(), 28);
        assert_eq!(exponent_vectors(3, 8).len(), 165);
    }

    #[test]
    fn small_partition_weights() {
        let d = rational(3, 2);
        let report = gf_partition_check(&d, 2, 2).unwrap();
        assert!(report.ok, "{:?}", report.mismatches);
        let s = gf_secular_moments(&d, 2, 2).unwrap();
        // {1},{2} gives +d², {1,2} gives d.
        assert_eq!(s.coeff(&[1, 1]), &d * &d + &d);
        assert_eq!(s.coeff(&[1, 0]), -d);
    }

    #[test]
    fn parameter_limits() {
        let d = rational(1, 1);
        assert!(gf_secular_moments(&d, 5, 4).is_err());
        assert!(gf_secular_moments(&d, 2, GF_MAX_DEGREE + 1).is_err());
        assert!(gf_partition_check(&d, 4, 4).is_err());
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn two_point_moments_are_symmetric(num in 1i64..8, den in 1i64..4) {
            let d = BigRational::new(BigInt::from(num), BigInt::from(den));
            let s = gf_secular_moments(&d, 2, 8).unwrap();
            for a in 0..=8u32 {
                for b in 0..=(8 - a) {
                    prop_assert_eq!(s.coeff(&[a, b]), s.coeff(&[b, a]));
                }
            }
        }
    }
}
