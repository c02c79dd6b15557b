//! Traces of adjacency powers and the reverse characteristic polynomial
//! q(z) = det(I − zA).

mod minors;
mod permutations;
mod traces;

pub use minors::{minor_sum_secular, minor_sum_secular_matrix, MINOR_SUM_MAX_N};
pub use permutations::{eval_pk, eval_pk_rational, pk_terms, CycleType};
pub use traces::{traces, traces_exact, traces_float, TRACE_WORK_LIMIT};

use crate::error::{Error, Result};
use crate::graph::{scc_decompose, Digraph};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArithmeticMode {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceValues {
    Exact(Vec<BigInt>),
    Float(Vec<f64>),
}

/// tr(A¹), …, tr(A^K).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector {
    pub values: TraceValues,
}

impl TraceVector {
    pub fn exact(values: Vec<BigInt>) -> Self {
        TraceVector {
            values: TraceValues::Exact(values),
        }
    }

    pub fn float(values: Vec<f64>) -> Self {
        TraceVector {
            values: TraceValues::Float(values),
        }
    }

    pub fn order(&self) -> usize {
        match &self.values {
            TraceValues::Exact(v) => v.len(),
            TraceValues::Float(v) => v.len(),
        }
    }

    pub fn mode(&self) -> ArithmeticMode {
        match self.values {
            TraceValues::Exact(_) => ArithmeticMode::Exact,
            TraceValues::Float(_) => ArithmeticMode::Float,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match &self.values {
            TraceValues::Exact(v) => v
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::INFINITY))
                .collect(),
            TraceValues::Float(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Exact(Vec<BigInt>),
    Float(Vec<f64>),
}

/// Coefficients of q(z) = Σ c[k] z^k with c[k] = (−1)^k Δ_k, Δ_k the sum of
/// the k×k principal minors. Trailing zeros are never stored, so the
/// degree is the index of the last nonzero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularPolynomial {
    coeffs: Coefficients,
}

impl SecularPolynomial {
    pub fn one() -> Self {
        SecularPolynomial {
            coeffs: Coefficients::Exact(vec![BigInt::one()]),
        }
    }

    pub fn from_exact(mut c: Vec<BigInt>) -> Result<Self> {
        if c.first() != Some(&BigInt::one()) {
            return Err(Error::Parameter("constant coefficient must be 1".into()));
        }
        while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Ok(SecularPolynomial {
            coeffs: Coefficients::Exact(c),
        })
    }

    pub fn from_float(mut c: Vec<f64>) -> Result<Self> {
        if c.first() != Some(&1.0) {
            return Err(Error::Parameter("constant coefficient must be 1".into()));
        }
        while c.len() > 1 && c.last() == Some(&0.0) {
            c.pop();
        }
        Ok(SecularPolynomial {
            coeffs: Coefficients::Float(c),
        })
    }

    pub fn degree(&self) -> usize {
        match &self.coeffs {
            Coefficients::Exact(c) => c.len() - 1,
            Coefficients::Float(c) => c.len() - 1,
        }
    }

    pub fn mode(&self) -> ArithmeticMode {
        match self.coeffs {
            Coefficients::Exact(_) => ArithmeticMode::Exact,
            Coefficients::Float(_) => ArithmeticMode::Float,
        }
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn exact_coeffs(&self) -> Option<&[BigInt]> {
        match &self.coeffs {
            Coefficients::Exact(c) => Some(c),
            Coefficients::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match &self.coeffs {
            Coefficients::Exact(c) => c.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            Coefficients::Float(c) => c.clone(),
        }
    }

    /// Signed minor sums Δ_k = (−1)^k c[k] in exact mode.
    pub fn minor_sums(&self) -> Option<Vec<BigInt>> {
        self.exact_coeffs().map(|c| {
            c.iter()
                .enumerate()
                .map(|(k, x)| if k % 2 == 0 { x.clone() } else { -x })
                .collect()
        })
    }

    pub fn eval(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        self.to_f64()
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `{"degree": D, "coeffs": [decimal strings]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<String> = match &self.coeffs {
            Coefficients::Exact(c) => c.iter().map(|x| x.to_string()).collect(),
            Coefficients::Float(c) => c.iter().map(|x| format!("{x:?}")).collect(),
        };
        json!({ "degree": self.degree(), "coeffs": coeffs })
    }

    /// Integer strings give an exact polynomial; anything else is read as floats.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("secular polynomial JSON: {m}"));
        let degree = value["degree"]
            .as_u64()
            .ok_or_else(|| bad("missing degree"))? as usize;
        let raw: Vec<&str> = value["coeffs"]
            .as_array()
            .ok_or_else(|| bad("missing coeffs"))?
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| bad("coefficients must be strings"))
            })
            .collect::<Result<_>>()?;
        if raw.len() != degree + 1 {
            return Err(bad("degree does not match coefficient count"));
        }
        let exact: Option<Vec<BigInt>> = raw.iter().map(|s| s.parse().ok()).collect();
        let poly = match exact {
            Some(c) => Self::from_exact(c)?,
            None => Self::from_float(
                raw.iter()
                    .map(|s| s.parse::<f64>().map_err(|_| bad("unparseable coefficient")))
                    .collect::<Result<_>>()?,
            )?,
        };
        if poly.degree() != degree {
            return Err(bad("trailing zero coefficient"));
        }
        Ok(poly)
    }
}

/// Newton's identities k·e_k = Σ_{i=1}^{k} (−1)^{i−1} tr(A^i) e_{k−i},
/// computed up to degree min(K, n). In exact mode every division must be exact.
pub fn newton_secular(t: &TraceVector, n: usize) -> Result<SecularPolynomial> {
    let top = t.order().min(n);
    match &t.values {
        TraceValues::Exact(p) => {
            let mut e: Vec<BigInt> = vec![BigInt::one()];
            for k in 1..=top {
                let mut s = BigInt::zero();
                for i in 1..=k {
                    let term = &p[i - 1] * &e[k - i];
                    if i % 2 == 1 {
                        s += term;
                    } else {
                        s -= term;
                    }
                }
                let (q, r) = s.div_rem(&BigInt::from(k));
                if !r.is_zero() {
                    return Err(Error::Consistency(format!(
                        "Newton step {k} leaves remainder {r}; traces are not those of an integer matrix"
                    )));
                }
                e.push(q);
            }
            let c = e
                .into_iter()
                .enumerate()
                .map(|(k, x)| if k % 2 == 0 { x } else { -x })
                .collect();
            SecularPolynomial::from_exact(c)
        }
        TraceValues::Float(p) => {
            let mut e = vec![1.0f64];
            for k in 1..=top {
                let mut s = 0.0;
                let mut comp = 0.0;
                for i in 1..=k {
                    let term = p[i - 1] * e[k - i] * if i % 2 == 1 { 1.0 } else { -1.0 };
                    let t = s + term;
                    comp += if s.abs() >= term.abs() {
                        (s - t) + term
                    } else {
                        (term - t) + s
                    };
                    s = t;
                }
                e.push((s + comp) / k as f64);
            }
            let c = e
                .into_iter()
                .enumerate()
                .map(|(k, x)| if k % 2 == 0 { x } else { -x })
                .collect();
            SecularPolynomial::from_float(c)
        }
    }
}

/// Full secular polynomial of a digraph. Only vertices in cyclic strongly
/// connected components carry nonzero eigenvalues, so traces are needed up
/// to that count only.
pub fn secular_polynomial(g: &Digraph, mode: ArithmeticMode) -> Result<SecularPolynomial> {
    let order = scc_decompose(g).cyclic_vertex_count();
    if order == 0 {
        return Ok(match mode {
            ArithmeticMode::Exact => SecularPolynomial::one(),
            ArithmeticMode::Float => SecularPolynomial::from_float(vec![1.0])?,
        });
    }
    newton_secular(&traces(g, order, mode)?, g.n())
}

/// Sign-free magnitude bound used by callers that need scale information.
pub fn max_abs_coefficient(p: &SecularPolynomial) -> f64 {
    match p.coefficients() {
        Coefficients::Exact(c) => c
            .iter()
            .map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max),
        Coefficients::Float(c) => c.iter().map(|x| x.abs()).fold(0.0, f64::max),
    }
}
