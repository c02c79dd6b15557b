use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::json;
use std::collections::BTreeMap;

/// Multivariate series over the rationals, truncated at total degree `cap`.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    vars: usize,
    cap: u32,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiSeries {
    pub fn zero(vars: usize, cap: u32) -> Self {
        MultiSeries {
            vars,
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: usize, cap: u32) -> Self {
        Self::monomial(vars, cap, vec![0; vars], BigRational::one())
    }

    pub fn monomial(vars: usize, cap: u32, exponents: Vec<u32>, c: BigRational) -> Self {
        assert_eq!(exponents.len(), vars, "exponent vector length");
        let mut s = Self::zero(vars, cap);
        if exponents.iter().sum::<u32>() <= cap && !c.is_zero() {
            s.terms.insert(exponents, c);
        }
        s
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn coeff(&self, exponents: &[u32]) -> BigRational {
        self.terms
            .get(exponents)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.vars])
    }

    fn same_shape(&self, other: &Self) {
        assert!(
            self.vars == other.vars && self.cap == other.cap,
            "series shapes differ"
        );
    }

    fn insert_add(terms: &mut BTreeMap<Vec<u32>, BigRational>, e: Vec<u32>, c: BigRational) {
        match terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            Self::insert_add(&mut terms, e.clone(), c.clone());
        }
        MultiSeries {
            vars: self.vars,
            cap: self.cap,
            terms,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars, self.cap);
        }
        let terms = self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect();
        MultiSeries {
            vars: self.vars,
            cap: self.cap,
            terms,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut terms = BTreeMap::new();
        for (ea, a) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, b) in &other.terms {
                if da + eb.iter().sum::<u32>() > self.cap {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                Self::insert_add(&mut terms, e, a * b);
            }
        }
        MultiSeries {
            vars: self.vars,
            cap: self.cap,
            terms,
        }
    }

    fn min_degree_of_nonconstant(&self) -> bool {
        self.constant_term().is_zero()
    }

    /// Σ_{k≤cap} c_k g^k for g without constant term.
    fn compose(g: &Self, coeffs: impl Fn(u32) -> BigRational) -> Self {
        let mut out = Self::zero(g.vars, g.cap);
        let mut power = Self::one(g.vars, g.cap);
        for k in 0..=g.cap {
            out = out.add(&power.scale(&coeffs(k)));
            power = power.mul(g);
            if power.is_empty() {
                break;
            }
        }
        out
    }

    pub fn exp(&self) -> Result<Self> {
        if !self.min_degree_of_nonconstant() {
            return Err(Error::Domain(
                "exp needs a series with zero constant term".into(),
            ));
        }
        let mut fact = BigInt::one();
        let inv_fact: Vec<BigRational> = (0..=self.cap)
            .map(|k| {
                if k > 0 {
                    fact *= k;
                }
                BigRational::new(BigInt::one(), fact.clone())
            })
            .collect();
        Ok(Self::compose(self, |k| inv_fact[k as usize].clone()))
    }

    pub fn log(&self) -> Result<Self> {
        if self.constant_term() != BigRational::one() {
            return Err(Error::Domain(
                "log needs a series with constant term 1".into(),
            ));
        }
        let g = self.add(&Self::one(self.vars, self.cap).scale(&-BigRational::one()));
        Ok(Self::compose(&g, |k| {
            if k == 0 {
                BigRational::zero()
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                BigRational::new(BigInt::from(sign), BigInt::from(k))
            }
        }))
    }

    pub fn pow(&self, alpha: &BigRational) -> Result<Self> {
        self.log()?.scale(alpha).exp()
    }

    pub fn inv(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::Domain(
                "inverse needs a nonzero constant term".into(),
            ));
        }
        let unit = self.scale(&c0.recip());
        let g = unit.add(&Self::one(self.vars, self.cap).scale(&-BigRational::one()));
        let geometric = Self::compose(&g, |k| {
            if k % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            }
        });
        Ok(geometric.scale(&c0.recip()))
    }

    /// `[{"exponents": [...], "num": "..", "den": ".."}, ...]` in exponent order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| json!({"exponents": e, "num": c.numer().to_string(), "den": c.denom().to_string()}))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value, cap: u32) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("series JSON: {m}"));
        let items = value.as_array().ok_or_else(|| bad("expected a list"))?;
        let mut vars = None;
        let mut terms = BTreeMap::new();
        for item in items {
            let e: Vec<u32> =
                serde_json::from_value(item["exponents"].clone()).map_err(|_| bad("exponents"))?;
            if *vars.get_or_insert(e.len()) != e.len() {
                return Err(bad("inconsistent variable count"));
            }
            let num: BigInt = item["num"]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("num"))?;
            let den: BigInt = item["den"]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("den"))?;
            if den.is_zero() || num.is_zero() || e.iter().sum::<u32>() > cap {
                return Err(bad(
                    "zero denominator, zero coefficient or degree above cap",
                ));
            }
            Self::insert_add(&mut terms, e, BigRational::new(num, den));
        }
        Ok(MultiSeries {
            vars: vars.unwrap_or(0),
            cap,
            terms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rational;

    fn var(vars: usize, cap: u32, i: usize) -> MultiSeries {
        let mut e = vec![0; vars];
        e[i] = 1;
        MultiSeries::monomial(vars, cap, e, rational(1, 1))
    }

    #[test]
    fn cap_truncates_products() {
        let x = var(2, 3, 0);
        let y = var(2, 3, 1);
        let p = x.add(&y);
        let p4 = p.mul(&p).mul(&p).mul(&p);
        assert!(p4.is_empty());
        let p3 = p.mul(&p).mul(&p);
        assert_eq!(p3.coeff(&[2, 1]), rational(3, 1));
    }

    #[test]
    fn exp_log_inverse() {
        let x = var(2, 6, 0);
        let y = var(2, 6, 1);
        let f = MultiSeries::one(2, 6)
            .add(&x.scale(&rational(2, 3)))
            .add(&x.mul(&y));
        assert_eq!(f.log().unwrap().exp().unwrap(), f);
        assert_eq!(f.mul(&f.inv().unwrap()), MultiSeries::one(2, 6));
        let h = f.pow(&rational(1, 3)).unwrap();
        assert_eq!(h.mul(&h).mul(&h), f);
    }

    #[test]
    fn no_zero_terms_stored() {
        let x = var(1, 4, 0);
        let s = x.add(&x.scale(&rational(-1, 1)));
        assert!(s.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let f = MultiSeries::one(3, 5).add(&var(3, 5, 2).scale(&rational(-3, 2)));
        let v = f.to_json();
        assert_eq!(v[1]["exponents"], json!([0, 0, 1]));
        assert_eq!(v[1]["num"], json!("-3"));
        assert_eq!(MultiSeries::from_json(&v, 5).unwrap(), f);
    }
}
