//! Truncated formal power series.

mod gf;
mod multi;
mod partitions;

pub use gf::{gf_partition_check, gf_secular_moments, GfPartitionReport, GF_MAX_DEGREE};
pub use multi::MultiSeries;
pub use partitions::{par_multiset, MultisetPartitionTable, PARTITION_MAX_SIZE};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One};
use std::fmt::Debug;
use std::ops::Neg;

/// Coefficient field for [`UniSeries`].
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    fn from_int(k: i64) -> Self;
}

impl Scalar for BigRational {
    fn from_int(k: i64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
}

impl Scalar for f64 {
    fn from_int(k: i64) -> Self {
        k as f64
    }
}

impl Scalar for Complex64 {
    fn from_int(k: i64) -> Self {
        Complex64::new(k as f64, 0.0)
    }
}

pub type RationalSeries = UniSeries<BigRational>;

/// Power series truncated after z^N; every operation is exact through degree N.
#[derive(Debug, Clone, PartialEq)]
pub struct UniSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UniSeries<T> {
    pub fn zero(order: usize) -> Self {
        UniSeries {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Pads with zeros or truncates to the requested order.
    pub fn from_coeffs(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        UniSeries { coeffs }
    }

    /// 1 + a·z^k.
    pub fn binomial(a: T, k: usize, order: usize) -> Self {
        let mut s = Self::one(order);
        if k <= order {
            s.coeffs[k] = s.coeffs[k].clone() + a;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    fn check_order(&self, other: &Self) {
        assert_eq!(self.order(), other.order(), "series orders differ");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        UniSeries { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        UniSeries {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_order(other);
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        UniSeries { coeffs: out }
    }

    /// exp(f) for f(0) = 0, from b' = f'·b.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Domain(
                "exp needs a series with zero constant term".into(),
            ));
        }
        let n = self.order();
        let mut b = vec![T::zero(); n + 1];
        b[0] = T::one();
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc = acc + T::from_int(k as i64) * self.coeffs[k].clone() * b[m - k].clone();
                }
            }
            b[m] = acc / T::from_int(m as i64);
        }
        Ok(UniSeries { coeffs: b })
    }

    /// log(f) for f(0) = 1, from f·(log f)' = f'.
    pub fn log(&self) -> Result<Self> {
        if self.coeffs[0] != T::one() {
            return Err(Error::Domain(
                "log needs a series with constant term 1".into(),
            ));
        }
        let n = self.order();
        let mut g = vec![T::zero(); n + 1];
        for m in 1..=n {
            // m·g_m = m·f_m − Σ_{k=1}^{m−1} k·g_k·f_{m−k}
            let mut acc = T::from_int(m as i64) * self.coeffs[m].clone();
            for k in 1..m {
                if !g[k].is_zero() {
                    acc = acc - T::from_int(k as i64) * g[k].clone() * self.coeffs[m - k].clone();
                }
            }
            g[m] = acc / T::from_int(m as i64);
        }
        Ok(UniSeries { coeffs: g })
    }

    /// f^α = exp(α·log f) for f(0) = 1.
    pub fn pow(&self, alpha: &T) -> Result<Self> {
        self.log()?.scale(alpha).exp()
    }

    /// 1/f for f(0) ≠ 0.
    pub fn inv(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::Domain(
                "inverse needs a nonzero constant term".into(),
            ));
        }
        let n = self.order();
        let c0 = self.coeffs[0].clone();
        let mut b = vec![T::zero(); n + 1];
        b[0] = T::one() / c0.clone();
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc = acc + self.coeffs[k].clone() * b[m - k].clone();
                }
            }
            b[m] = -acc / c0.clone();
        }
        Ok(UniSeries { coeffs: b })
    }
}

impl UniSeries<Complex64> {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

impl UniSeries<f64> {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_one() -> BigRational {
    BigRational::one()
}
