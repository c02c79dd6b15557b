use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Polynomial in the edge probability p with rational coefficients,
/// `coeffs[i]` multiplying p^i. No trailing zeros are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PolynomialInP {
    coeffs: Vec<BigRational>,
}

impl PolynomialInP {
    pub fn zero() -> Self {
        PolynomialInP { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PolynomialInP { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// p^a (1 − p)^b.
    pub fn monomial_binomial(a: usize, b: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); a + b + 1];
        let mut binom = BigInt::one();
        for j in 0..=b {
            let sign = if j % 2 == 0 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            coeffs[a + j] = BigRational::from_integer(&binom * sign);
            binom = binom * (b - j) / (j + 1);
        }
        Self::from_coeffs(coeffs)
    }

    pub fn p_power(a: usize) -> Self {
        Self::monomial_binomial(a, 0)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest power of p with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self
                    .coeffs
                    .get(i)
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
                let b = other
                    .coeffs
                    .get(i)
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
                a + b
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        self.scale(&BigRational::from_integer(c.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn eval(&self, p: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * p + c)
    }

    pub fn eval_f64(&self, p: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * p + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Coefficients as strings, lowest power first.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for PolynomialInP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "p")?,
                _ => write!(f, "p^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_expansion() {
        // p (1 − p)^2 = p − 2p² + p³
        assert_eq!(
            PolynomialInP::monomial_binomial(1, 2),
            PolynomialInP::from_ints(&[0, 1, -2, 1])
        );
        assert_eq!(PolynomialInP::p_power(3).valuation(), Some(3));
    }

    #[test]
    fn arithmetic_and_display() {
        let a = PolynomialInP::from_ints(&[0, 0, 2, 0, -2]);
        assert_eq!(a.to_string(), "-2p^4 + 2p^2");
        assert_eq!(a.sub(&a), PolynomialInP::zero());
        assert_eq!(PolynomialInP::zero().to_string(), "0");
        let one_minus_p = PolynomialInP::from_ints(&[1, -1]);
        assert_eq!(
            one_minus_p.mul(&one_minus_p),
            PolynomialInP::monomial_binomial(0, 2)
        );
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(a.eval(&half), BigRational::new(3.into(), 8.into()));
        assert!((a.eval_f64(0.5) - 0.375).abs() < 1e-15);
    }
}
