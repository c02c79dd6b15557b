use super::PolynomialInP;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

pub const BRUTEFORCE_MAX_SIZE: usize = 7;
pub const DISTRIBUTION_MAX_N: usize = 4;

/// Two nonempty subsets of [n], stored sorted and 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SubsetPair {
    pub n: usize,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl SubsetPair {
    pub fn new(n: usize, i: &[usize], j: &[usize]) -> Result<Self> {
        let i = normalise(n, i)?;
        let j = normalise(n, j)?;
        Ok(SubsetPair { n, i, j })
    }

    fn from_masks(n: usize, a: u32, b: u32) -> Self {
        let members = |m: u32| (0..n).filter(|v| m >> v & 1 == 1).map(|v| v + 1).collect();
        SubsetPair {
            n,
            i: members(a),
            j: members(b),
        }
    }

    /// Every ordered pair of nonempty subsets of [n].
    pub fn all(n: usize) -> Vec<SubsetPair> {
        let mut out = Vec::new();
        for a in 1..1u32 << n {
            for b in 1..1u32 << n {
                out.push(Self::from_masks(n, a, b));
            }
        }
        out
    }

    /// Ordered pairs with |I| = |J| = k.
    pub fn with_size(n: usize, k: usize) -> Vec<SubsetPair> {
        let sized: Vec<u32> = (1..1u32 << n)
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        let mut out = Vec::new();
        for &a in &sized {
            for &b in &sized {
                out.push(Self::from_masks(n, a, b));
            }
        }
        out
    }
}

fn normalise(n: usize, s: &[usize]) -> Result<Vec<usize>> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return Err(Error::Parameter("subsets must be nonempty".into()));
    }
    if v[0] == 0 || *v.last().unwrap() > n {
        return Err(Error::Parameter(format!(
            "subset elements must lie in 1..={n}"
        )));
    }
    Ok(v)
}

/// Which branch of the case analysis a pair falls in, after ordering so that |I| ≤ |J|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaCase {
    Vanishing,
    Equal,
    Nested,
    SwapOne,
}

pub fn delta_case(pair: &SubsetPair) -> DeltaCase {
    let (small, large) = if pair.i.len() <= pair.j.len() {
        (&pair.i, &pair.j)
    } else {
        (&pair.j, &pair.i)
    };
    let extra = large
        .iter()
        .filter(|v| small.binary_search(v).is_err())
        .count();
    match (large.len() - small.len(), extra) {
        (0, 0) => DeltaCase::Equal,
        (0, 1) => DeltaCase::SwapOne,
        (1, 1) => DeltaCase::Nested,
        _ => DeltaCase::Vanishing,
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * i)
}

/// δ(I,J) = E[det A(I) det A(J)] for iid Bernoulli(p) entries.
pub fn delta_closed_form(pair: &SubsetPair) -> PolynomialInP {
    let small = pair.i.len().min(pair.j.len());
    let large = pair.i.len().max(pair.j.len());
    match delta_case(pair) {
        DeltaCase::Vanishing => PolynomialInP::zero(),
        DeltaCase::Equal => {
            // k! p^k (1−p)^{k−1} (1 − p + kp)
            let k = small;
            let bracket = PolynomialInP::from_ints(&[1, k as i64 - 1]);
            PolynomialInP::monomial_binomial(k, k - 1)
                .mul(&bracket)
                .scale_int(&factorial(k))
        }
        DeltaCase::Nested => {
            PolynomialInP::monomial_binomial(small + 1, large - 1).scale_int(&factorial(small))
        }
        DeltaCase::SwapOne => {
            let k = small;
            PolynomialInP::monomial_binomial(k + 1, k - 1).scale_int(&factorial(k - 1))
        }
    }
}

/// Heap's algorithm; yields each permutation of `items` with its sign.
fn permutations_with_sign(items: &[usize], mut visit: impl FnMut(&[usize], i64)) {
    let mut a = items.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    let mut sign = 1i64;
    visit(&a, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            visit(&a, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

type EdgeMask = [u64; 4];

/// δ(I,J) = Σ_{σ,τ} ε(σ)ε(τ) p^{|E(σ) ∪ E(τ)|} over bijections σ of I and τ of J.
pub fn delta_bruteforce(pair: &SubsetPair) -> Result<PolynomialInP> {
    if pair.i.len() > BRUTEFORCE_MAX_SIZE || pair.j.len() > BRUTEFORCE_MAX_SIZE {
        return Err(Error::Budget(format!(
            "permutation enumeration is capped at |I|, |J| <= {BRUTEFORCE_MAX_SIZE}"
        )));
    }
    // Relabel I ∪ J to 0..m so edges fit in a 256-bit mask.
    let mut union: Vec<usize> = pair.i.iter().chain(&pair.j).copied().collect();
    union.sort_unstable();
    union.dedup();
    let m = union.len();
    let local = |v: usize| union.binary_search(&v).unwrap();
    let masks = |set: &[usize]| {
        let items: Vec<usize> = set.iter().map(|&v| local(v)).collect();
        let mut out: Vec<(EdgeMask, i64)> = Vec::new();
        permutations_with_sign(&items, |perm, sign| {
            let mut mask = [0u64; 4];
            for (&src, &dst) in items.iter().zip(perm) {
                let e = src * m + dst;
                mask[e / 64] |= 1 << (e % 64);
            }
            out.push((mask, sign));
        });
        out
    };
    let left = masks(&pair.i);
    let right = masks(&pair.j);
    let mut by_edges = vec![0i64; pair.i.len() + pair.j.len() + 1];
    for (a, sa) in &left {
        for (b, sb) in &right {
            let e: u32 = (0..4).map(|w| (a[w] | b[w]).count_ones()).sum();
            by_edges[e as usize] += sa * sb;
        }
    }
    Ok(PolynomialInP::from_ints(&by_edges))
}

/// δ(I,J) for every ordered pair of nonempty subsets of [n], by weighting all
/// 2^{n²} 0/1 matrices with p^{#ones}(1−p)^{n²−#ones}.
pub fn delta_by_distribution(n: usize) -> Result<Vec<(SubsetPair, PolynomialInP)>> {
    if n == 0 || n > DISTRIBUTION_MAX_N {
        return Err(Error::Budget(format!(
            "full-distribution oracle needs 1 <= n <= {DISTRIBUTION_MAX_N}"
        )));
    }
    let subsets: Vec<u32> = (1..1u32 << n).collect();
    let s = subsets.len();
    let cells = n * n;
    // acc[pair][ones]
    let mut acc = vec![vec![0i64; cells + 1]; s * s];
    let mut dets = vec![0i64; s];
    for m in 0u32..1 << cells {
        let ones = m.count_ones() as usize;
        let entry = |r: usize, c: usize| i64::from(m >> (r * n + c) & 1);
        for (idx, &sub) in subsets.iter().enumerate() {
            let rows: Vec<usize> = (0..n).filter(|v| sub >> v & 1 == 1).collect();
            let matrix: Vec<Vec<i64>> = rows
                .iter()
                .map(|&r| rows.iter().map(|&c| entry(r, c)).collect())
                .collect();
            dets[idx] = small_det(&matrix);
        }
        for a in 0..s {
            if dets[a] == 0 {
                continue;
            }
            for b in 0..s {
                acc[a * s + b][ones] += dets[a] * dets[b];
            }
        }
    }
    let mut out = Vec::with_capacity(s * s);
    for (a, &sa) in subsets.iter().enumerate() {
        for (b, &sb) in subsets.iter().enumerate() {
            let mut poly = PolynomialInP::zero();
            for (ones, &c) in acc[a * s + b].iter().enumerate() {
                if c != 0 {
                    let term = PolynomialInP::monomial_binomial(ones, cells - ones);
                    poly = poly.add(&term.scale(&BigRational::from_integer(c.into())));
                }
            }
            out.push((SubsetPair::from_masks(n, sa, sb), poly));
        }
    }
    Ok(out)
}

/// Cofactor expansion; only used on matrices of size at most 4.
fn small_det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        k => {
            let mut total = 0;
            for c in 0..k {
                if m[0][c] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != c)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                total += sign * m[0][c] * small_det(&minor);
            }
            total
        }
    }
}

/// One line of a δ suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub case: DeltaCase,
    pub inputs: SubsetPair,
    pub closed_form: Vec<String>,
    pub bruteforce: Vec<String>,
    pub equal: bool,
}

/// Closed form against permutation brute force for every pair of nonempty subsets of [n].
pub fn delta_suite(n: usize) -> Result<Vec<DeltaReport>> {
    if n > BRUTEFORCE_MAX_SIZE {
        return Err(Error::Budget(format!(
            "subset suite is capped at n <= {BRUTEFORCE_MAX_SIZE}"
        )));
    }
    SubsetPair::all(n)
        .into_iter()
        .map(|pair| {
            let closed = delta_closed_form(&pair);
            let brute = delta_bruteforce(&pair)?;
            Ok(DeltaReport {
                case: delta_case(&pair),
                closed_form: closed.coeff_strings(),
                bruteforce: brute.coeff_strings(),
                equal: closed == brute,
                inputs: pair,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(i: &[usize], j: &[usize]) -> SubsetPair {
        SubsetPair::new(3, i, j).unwrap()
    }

    #[test]
    fn worked_three_by_three_values() {
        assert!(delta_closed_form(&pair(&[1], &[1, 2, 3])).is_zero());
        assert_eq!(
            delta_closed_form(&pair(&[1, 2], &[1, 2])),
            PolynomialInP::from_ints(&[0, 0, 2, 0, -2])
        );
        assert_eq!(
            delta_closed_form(&pair(&[1, 2], &[1, 2, 3])),
            PolynomialInP::from_ints(&[0, 0, 0, 2, -4, 2])
        );
        // a11a22a33 − a11a22a23a32 − a12a21a22a33 + a12a21a23a32 → p³ − p⁴ − p⁴ + p⁴
        assert_eq!(
            delta_closed_form(&pair(&[1, 2], &[2, 3])),
            PolynomialInP::from_ints(&[0, 0, 0, 1, -1])
        );
    }

    #[test]
    fn single_entry() {
        let p = delta_bruteforce(&pair(&[1], &[1])).unwrap();
        assert_eq!(p, PolynomialInP::from_ints(&[0, 1]));
    }

    #[test]
    fn closed_form_matches_bruteforce_up_to_four() {
        for n in 1..=4 {
            for row in delta_suite(n).unwrap() {
                assert!(row.equal, "{:?}", row);
            }
        }
    }

    #[test]
    fn distribution_oracle_matches_for_three() {
        for (pair, poly) in delta_by_distribution(3).unwrap() {
            assert_eq!(poly, delta_bruteforce(&pair).unwrap(), "{pair:?}");
        }
    }

    #[test]
    fn divisible_by_p_to_the_larger_size() {
        for pair in SubsetPair::all(4) {
            let poly = delta_bruteforce(&pair).unwrap();
            if let Some(v) = poly.valuation() {
                assert!(v >= pair.i.len().max(pair.j.len()));
            }
        }
    }

    #[test]
    fn heap_signs_sum_to_zero() {
        let mut total = 0;
        let mut count = 0;
        permutations_with_sign(&[0, 1, 2, 3, 4], |_, s| {
            total += s;
            count += 1;
        });
        assert_eq!((count, total), (120, 0));
    }

    #[test]
    fn rejects_bad_subsets() {
        assert!(SubsetPair::new(3, &[], &[1]).is_err());
        assert!(SubsetPair::new(3, &[4], &[1]).is_err());
        let big: Vec<usize> = (1..=8).collect();
        let p = SubsetPair::new(8, &big, &big).unwrap();
        assert!(matches!(delta_bruteforce(&p), Err(Error::Budget(_))));
    }
}
