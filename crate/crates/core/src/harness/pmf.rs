use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    /// P(X = j) for j = 0..=cutoff.
    pub probabilities: Vec<f64>,
    /// 1 − Σ probabilities.
    pub tail_mass: f64,
}

/// Poisson(λ) probabilities on 0..=cutoff by the stable recursion in log space.
pub fn poisson_pmf(lambda: f64, cutoff: usize) -> Vec<f64> {
    if lambda == 0.0 {
        let mut p = vec![0.0; cutoff + 1];
        p[0] = 1.0;
        return p;
    }
    let ln_lambda = lambda.ln();
    let mut log_p = -lambda;
    (0..=cutoff)
        .map(|j| {
            if j > 0 {
                log_p += ln_lambda - (j as f64).ln();
            }
            log_p.exp()
        })
        .collect()
}

/// Law of X_k = Σ_{ℓ | k} ℓ Y_ℓ, Y_ℓ ~ Poisson(d^ℓ/ℓ) independent, up to `cutoff`.
#[allow(non_snake_case)]
pub fn pmf_X(d: f64, k: usize, cutoff: usize) -> Result<Pmf> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Parameter(format!("d = {d} must be nonnegative")));
    }
    let mut law = vec![0.0; cutoff + 1];
    law[0] = 1.0;
    for l in (1..=k).filter(|l| k.is_multiple_of(*l)) {
        let y = poisson_pmf(d.powi(l as i32) / l as f64, cutoff / l);
        let mut next = vec![0.0; cutoff + 1];
        for (a, pa) in law.iter().enumerate().filter(|(_, p)| **p != 0.0) {
            for (j, pj) in y.iter().enumerate() {
                let idx = a + l * j;
                if idx > cutoff {
                    break;
                }
                next[idx] += pa * pj;
            }
        }
        law = next;
    }
    let tail_mass = (1.0 - law.iter().sum::<f64>()).max(0.0);
    Ok(Pmf { probabilities: law, tail_mass })
}
