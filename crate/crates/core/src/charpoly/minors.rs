use super::SecularPolynomial;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use num_bigint::BigInt;

pub const MINOR_SUM_MAX_N: usize = 12;

/// q(z) from Δ_k = Σ_{|I|=k} det(A(I)) over all principal submatrices.
pub fn minor_sum_secular(g: &Digraph) -> Result<SecularPolynomial> {
    let dense: Vec<Vec<i64>> = g
        .to_dense()
        .into_iter()
        .map(|row| row.into_iter().map(i64::from).collect())
        .collect();
    minor_sum_secular_matrix(&dense)
}

pub fn minor_sum_secular_matrix(a: &[Vec<i64>]) -> Result<SecularPolynomial> {
    let n = a.len();
    if n > MINOR_SUM_MAX_N {
        return Err(Error::Budget(format!(
            "minor enumeration needs 2^{n} subsets; limit is n = {MINOR_SUM_MAX_N}"
        )));
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::Parameter("matrix is not square".into()));
    }
    let mut delta = vec![0i128; n + 1];
    delta[0] = 1;
    let mut idx = Vec::with_capacity(n);
    let mut sub = Vec::with_capacity(n * n);
    for mask in 1u32..(1 << n) {
        idx.clear();
        idx.extend((0..n).filter(|i| mask >> i & 1 == 1));
        sub.clear();
        for &i in &idx {
            for &j in &idx {
                sub.push(i128::from(a[i][j]));
            }
        }
        delta[idx.len()] += bareiss_det(&mut sub, idx.len());
    }
    let c = delta
        .into_iter()
        .enumerate()
        .map(|(k, x)| BigInt::from(if k % 2 == 0 { x } else { -x }))
        .collect();
    SecularPolynomial::from_exact(c)
}

/// Fraction-free Gaussian elimination; `m` is row-major k×k and is destroyed.
fn bareiss_det(m: &mut [i128], k: usize) -> i128 {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for col in 0..k {
        if m[col * k + col] == 0 {
            let Some(r) = (col + 1..k).find(|&r| m[r * k + col] != 0) else {
                return 0;
            };
            for j in 0..k {
                m.swap(col * k + j, r * k + j);
            }
            sign = -sign;
        }
        let pivot = m[col * k + col];
        for r in col + 1..k {
            for j in col + 1..k {
                m[r * k + j] = (m[r * k + j] * pivot - m[r * k + col] * m[col * k + j]) / prev;
            }
            m[r * k + col] = 0;
        }
        prev = pivot;
    }
    sign * m[(k - 1) * k + (k - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(q: &SecularPolynomial) -> Vec<i64> {
        q.exact_coeffs()
            .unwrap()
            .iter()
            .map(|x| x.try_into().unwrap())
            .collect()
    }

    #[test]
    fn empty_graph() {
        assert_eq!(
            coeffs(&minor_sum_secular(&Digraph::empty(4)).unwrap()),
            vec![1]
        );
    }

    #[test]
    fn two_cycle() {
        let g = Digraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let q = minor_sum_secular(&g).unwrap();
        assert_eq!(coeffs(&q), vec![1, 0, -1]);
        let delta = q.minor_sums().unwrap();
        assert_eq!(
            delta,
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(-1)]
        );
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        fn cofactor(m: &[Vec<i128>]) -> i128 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<i128>> = m[1..]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .filter(|(j, _)| *j != c)
                                .map(|(_, &x)| x)
                                .collect()
                        })
                        .collect();
                    let s = if c % 2 == 0 { 1 } else { -1 };
                    s * m[0][c] * cofactor(&minor)
                })
                .sum()
        }
        let mut state = 17u64;
        for k in 1..=6 {
            for _ in 0..30 {
                let rows: Vec<Vec<i128>> = (0..k)
                    .map(|_| {
                        (0..k)
                            .map(|_| {
                                state = crate::rng::mix64(state);
                                (state % 7) as i128 - 3
                            })
                            .collect()
                    })
                    .collect();
                let mut flat: Vec<i128> = rows.iter().flatten().copied().collect();
                assert_eq!(bareiss_det(&mut flat, k), cofactor(&rows));
            }
        }
    }

    #[test]
    fn too_large_is_a_budget_error() {
        assert!(matches!(
            minor_sum_secular(&Digraph::empty(13)),
            Err(Error::Budget(_))
        ));
    }
}
