use super::delta::{delta_bruteforce, delta_closed_form, SubsetPair, BRUTEFORCE_MAX_SIZE};
use super::PolynomialInP;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

/// Bracket in the single-product form (n)_k p^k (1−p)^{k−1}·bracket of E|Δ_k|².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketVariant {
    /// 1 + (n−1)p; agrees with the subset assembly.
    #[default]
    Exact,
    /// (1 − p + kp + nkp − k²p): the collapse of the two-term sum when the
    /// swapped pairs carry k!·p^{k+1}(1−p)^{k−1} instead of (k−1)!·p^{k+1}(1−p)^{k−1}.
    PrintedTwoTerm,
    /// (1 − kp − p + nkp − k²p): the same with the sign of kp flipped as well.
    PrintedFinalLine,
}

fn falling(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n as i64 - i as i64)
    })
}

fn binom(n: usize, k: usize) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Parameter(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// E|Δ_k|² = C(n,k)·δ(I,I) + C(n,k+1)(k+1)k·δ(I,J) with |I ∩ J| = k − 1,
/// both δ taken from [`delta_closed_form`]. Equals
/// (n)_k p^k (1−p)^{k−1}(1−p+kp) + (n)_{k+1} p^{k+1}(1−p)^{k−1}.
pub fn expected_sq_secular(n: usize, k: usize) -> Result<PolynomialInP> {
    check_nk(n, k)?;
    let first: Vec<usize> = (1..=k).collect();
    let shifted: Vec<usize> = (2..=k + 1).collect();
    let equal = delta_closed_form(&SubsetPair::new(k + 1, &first, &first)?);
    let swapped = delta_closed_form(&SubsetPair::new(k + 1, &first, &shifted)?);
    let pairs = binom(n, k + 1) * BigInt::from((k + 1) * k);
    Ok(equal.scale_int(&binom(n, k)).add(&swapped.scale_int(&pairs)))
}

/// (n)_k p^k (1−p)^{k−1} · bracket.
pub fn expected_sq_collapsed(n: usize, k: usize, variant: BracketVariant) -> Result<PolynomialInP> {
    check_nk(n, k)?;
    let (n_i, k_i) = (n as i64, k as i64);
    let linear = match variant {
        BracketVariant::Exact => n_i - 1,
        BracketVariant::PrintedTwoTerm => -1 + k_i + n_i * k_i - k_i * k_i,
        BracketVariant::PrintedFinalLine => -k_i - 1 + n_i * k_i - k_i * k_i,
    };
    let bracket = PolynomialInP::from_ints(&[1, linear]);
    Ok(PolynomialInP::monomial_binomial(k, k - 1)
        .mul(&bracket)
        .scale_int(&falling(n, k)))
}

/// Σ_{|I|=|J|=k} δ(I,J) with every term from the permutation oracle.
pub fn expected_sq_bruteforce(n: usize, k: usize) -> Result<PolynomialInP> {
    check_nk(n, k)?;
    if n > BRUTEFORCE_MAX_SIZE {
        return Err(Error::Budget(format!(
            "subset assembly is capped at n <= {BRUTEFORCE_MAX_SIZE}"
        )));
    }
    SubsetPair::with_size(n, k)
        .iter()
        .try_fold(PolynomialInP::zero(), |acc, pair| {
            Ok(acc.add(&delta_bruteforce(pair)?))
        })
}

/// E|Δ_k|² at a given p, without expanding in p.
pub fn expected_sq_secular_at(n: usize, k: usize, p: &BigRational) -> Result<BigRational> {
    check_nk(n, k)?;
    let one = BigRational::one();
    let q = &one - p;
    let kk = BigRational::from_integer(BigInt::from(k));
    let common = num_traits::pow(p.clone(), k) * num_traits::pow(q.clone(), k - 1);
    let diagonal = BigRational::from_integer(falling(n, k)) * (&q + &kk * p);
    let swapped = BigRational::from_integer(falling(n, k + 1)) * p;
    Ok(common * (diagonal + swapped))
}

/// Comparison of one symbolic identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub case: String,
    pub inputs: serde_json::Value,
    pub closed_form: Vec<String>,
    pub bruteforce: Vec<String>,
    pub equal: bool,
}

impl IdentityReport {
    pub fn new(
        case: &str,
        inputs: serde_json::Value,
        closed: &PolynomialInP,
        other: &PolynomialInP,
    ) -> Self {
        IdentityReport {
            case: case.to_string(),
            inputs,
            closed_form: closed.coeff_strings(),
            bruteforce: other.coeff_strings(),
            equal: closed == other,
        }
    }
}

/// Two-term form against the subset assembly for 1 ≤ k ≤ n ≤ `max_n_assembly`,
/// then the collapsed bracket against the two-term form for n ≤ `max_n_collapsed`.
pub fn deltak_suite(max_n_assembly: usize, max_n_collapsed: usize) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for n in 1..=max_n_assembly {
        for k in 1..=n {
            let two_term = expected_sq_secular(n, k)?;
            let brute = expected_sq_bruteforce(n, k)?;
            out.push(IdentityReport::new(
                "two_term_vs_assembly",
                serde_json::json!({"n": n, "k": k}),
                &two_term,
                &brute,
            ));
        }
    }
    for n in 1..=max_n_collapsed {
        for k in 1..=n {
            let two_term = expected_sq_secular(n, k)?;
            let collapsed = expected_sq_collapsed(n, k, BracketVariant::Exact)?;
            out.push(IdentityReport::new(
                "collapsed_vs_two_term",
                serde_json::json!({"n": n, "k": k}),
                &collapsed,
                &two_term,
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessRow {
    pub n: usize,
    pub k: usize,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub d: f64,
    pub k_max: usize,
    pub rows: Vec<TightnessRow>,
    pub bounds_hold: bool,
    /// a_k^{1/(2k)} for k = 1..=k_max with a_k = d^k(2 + d + kd).
    pub roots: Vec<f64>,
    pub sqrt_d: f64,
    pub gap_at_k_max: f64,
    /// Roots are nonincreasing and stay above √d.
    pub monotone_tail: bool,
    pub ok: bool,
}

/// Checks E|Δ_k|² ≤ d^k(2 + d + kd) at p = d/n, exactly in rationals.
pub fn tightness_bound_check(d: f64, k_max: usize, n_grid: &[usize]) -> Result<TightnessReport> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Parameter(format!("d must be positive, got {d}")));
    }
    let d_exact = BigRational::from_float(d).expect("finite d");
    let mut rows = Vec::new();
    for &n in n_grid {
        if (n as f64) < d {
            return Err(Error::Parameter(format!("n = {n} below d = {d}")));
        }
        let p = &d_exact / BigRational::from_integer(BigInt::from(n));
        for k in 1..=k_max.min(n) {
            let value = expected_sq_secular_at(n, k, &p)?;
            let kd = BigRational::from_integer(BigInt::from(k)) * &d_exact;
            let bound = num_traits::pow(d_exact.clone(), k)
                * (BigRational::from_integer(BigInt::from(2)) + &d_exact + kd);
            rows.push(TightnessRow {
                n,
                k,
                value: value.to_f64().unwrap_or(f64::INFINITY),
                bound: bound.to_f64().unwrap_or(f64::INFINITY),
                holds: value <= bound,
            });
        }
    }
    let roots: Vec<f64> = (1..=k_max)
        .map(|k| {
            let k = k as f64;
            ((k * d.ln() + (2.0 + d + k * d).ln()) / (2.0 * k)).exp()
        })
        .collect();
    let sqrt_d = d.sqrt();
    let monotone_tail =
        roots.windows(2).all(|w| w[1] <= w[0]) && roots.iter().all(|&r| r >= sqrt_d);
    let gap_at_k_max = roots.last().map_or(f64::NAN, |r| r - sqrt_d);
    let bounds_hold = rows.iter().all(|r| r.holds);
    Ok(TightnessReport {
        d,
        k_max,
        rows,
        bounds_hold,
        roots,
        sqrt_d,
        gap_at_k_max,
        monotone_tail,
        ok: bounds_hold && monotone_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(
            expected_sq_secular(2, 1).unwrap(),
            PolynomialInP::from_ints(&[0, 2, 2])
        );
        // 6p³(1−p)²(1+2p)
        let expected =
            PolynomialInP::monomial_binomial(3, 2).mul(&PolynomialInP::from_ints(&[6, 12]));
        assert_eq!(expected_sq_secular(3, 3).unwrap(), expected);
    }

    #[test]
    fn printed_brackets_disagree() {
        let final_line = expected_sq_collapsed(2, 1, BracketVariant::PrintedFinalLine).unwrap();
        assert_eq!(final_line, PolynomialInP::from_ints(&[0, 2, -2]));
        assert_ne!(final_line, expected_sq_secular(2, 1).unwrap());

        for n in 2..=10 {
            for k in 1..=n {
                // (n)_k p^k (1−p)^{k−1}(1−p+kp) + k·(n)_{k+1} p^{k+1}(1−p)^{k−1}
                let two_term = PolynomialInP::monomial_binomial(k, k - 1)
                    .mul(&PolynomialInP::from_ints(&[1, k as i64 - 1]))
                    .scale_int(&falling(n, k))
                    .add(
                        &PolynomialInP::monomial_binomial(k + 1, k - 1)
                            .scale_int(&(falling(n, k + 1) * BigInt::from(k))),
                    );
                let collapsed = expected_sq_collapsed(n, k, BracketVariant::PrintedTwoTerm).unwrap();
                assert_eq!(collapsed, two_term);
                let exact = expected_sq_secular(n, k).unwrap();
                assert_eq!(collapsed == exact, k == 1 || k == n, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn assembly_and_collapse() {
        let suite = deltak_suite(4, 12).unwrap();
        assert!(suite.iter().all(|r| r.equal));
        assert_eq!(suite.len(), 10 + 78);
    }

    #[test]
    fn pointwise_matches_polynomial() {
        let p = BigRational::new(2.into(), 7.into());
        for k in 1..=5 {
            assert_eq!(
                expected_sq_secular_at(5, k, &p).unwrap(),
                expected_sq_secular(5, k).unwrap().eval(&p)
            );
        }
    }

    #[test]
    fn first_coefficient_by_hand() {
        // E|Δ₁|² = np + n(n−1)p² = d + d²(1 − 1/n)
        let (d, n) = (2.0, 10);
        let report = tightness_bound_check(d, 1, &[n]).unwrap();
        let expected = d + d * d * (1.0 - 1.0 / n as f64);
        assert!((report.rows[0].value - expected).abs() < 1e-12);
        assert!(report.rows[0].value <= d * (2.0 + 2.0 * d));
    }

    #[test]
    fn bound_holds_on_grid() {
        let report = tightness_bound_check(2.0, 20, &[10, 100, 1000]).unwrap();
        assert!(report.bounds_hold);
        assert!(report.monotone_tail);
        assert_eq!(report.rows.len(), 10 + 20 + 20);
        // a_20^{1/40} = √2 · 44^{1/40}
        let expected_gap = 2f64.sqrt() * (44f64.powf(1.0 / 40.0) - 1.0);
        assert!((report.gap_at_k_max - expected_gap).abs() < 1e-12);
        let long = tightness_bound_check(2.0, 400, &[]).unwrap();
        assert!(long.gap_at_k_max < 0.02);
    }
}
