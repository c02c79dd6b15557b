use crate::error::{Error, Result};
use crate::graph::Digraph;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

pub const FKG_MAX_UNION_EDGES: usize = 20;
pub const FKG_MAX_VERTICES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkgReport {
    pub r: usize,
    pub union_edges: usize,
    /// E[∏(X_i − E X_i)] as an exact rational string.
    pub value: String,
    /// 2^r p^E.
    pub bound: String,
    pub holds: bool,
}

/// X_i is the indicator that every edge of the i-th graph is present, edges
/// being iid Bernoulli(p). The centred product moment is computed exactly by
/// summing over the 2^E states of the union edges.
pub fn fkg_bound_check(family: &[Digraph], p: &BigRational) -> Result<FkgReport> {
    if family.is_empty() {
        return Err(Error::Parameter("empty graph family".into()));
    }
    if *p < BigRational::zero() || *p > BigRational::one() {
        return Err(Error::Parameter(format!("p = {p} outside [0, 1]")));
    }
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut masks = Vec::with_capacity(family.len());
    for g in family {
        if g.n() > FKG_MAX_VERTICES {
            return Err(Error::Parameter(format!(
                "graphs are limited to {FKG_MAX_VERTICES} vertices"
            )));
        }
        let mut mask = 0u32;
        for e in g.edges() {
            let next = ids.len();
            let id = *ids.entry(e).or_insert(next);
            if id >= FKG_MAX_UNION_EDGES {
                return Err(Error::Budget(format!(
                    "edge union exceeds {FKG_MAX_UNION_EDGES}"
                )));
            }
            mask |= 1 << id;
        }
        masks.push(mask);
    }
    let e = ids.len();
    let q = BigRational::one() - p;
    let p_pow: Vec<BigRational> = (0..=e).map(|k| num_traits::pow(p.clone(), k)).collect();
    let q_pow: Vec<BigRational> = (0..=e).map(|k| num_traits::pow(q.clone(), k)).collect();
    let means: Vec<BigRational> = masks
        .iter()
        .map(|m| p_pow[m.count_ones() as usize].clone())
        .collect();
    // The product depends on the state only through which X_i equal 1, so
    // accumulate the state probabilities per indicator pattern first.
    let mut by_pattern: BTreeMap<u64, BigRational> = BTreeMap::new();
    for state in 0u32..1 << e {
        let ones = state.count_ones() as usize;
        let weight = &p_pow[ones] * &q_pow[e - ones];
        let pattern =
            masks.iter().enumerate().fold(
                0u64,
                |acc, (i, &m)| if state & m == m { acc | 1 << i } else { acc },
            );
        *by_pattern.entry(pattern).or_insert_with(BigRational::zero) += weight;
    }
    let mut value = BigRational::zero();
    for (pattern, weight) in by_pattern {
        let term = means
            .iter()
            .enumerate()
            .fold(BigRational::one(), |acc, (i, mean)| {
                let x = if pattern >> i & 1 == 1 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                };
                acc * (x - mean)
            });
        value += term * weight;
    }
    let bound = BigRational::from_integer(BigInt::from(2).pow(family.len() as u32)) * &p_pow[e];
    Ok(FkgReport {
        r: family.len(),
        union_edges: e,
        holds: value <= bound,
        value: value.to_string(),
        bound: bound.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkgSuiteReport {
    pub vertices: usize,
    pub max_len: usize,
    pub p: String,
    pub checked: usize,
    pub violations: Vec<FkgReport>,
    pub ok: bool,
}

/// Every simple directed cycle of length ≤ `max_len` on `vertices` vertices,
/// each listed once starting from its smallest vertex.
pub fn small_cycles(vertices: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn extend(path: &mut Vec<usize>, vertices: usize, max_len: usize, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        if path.len() == max_len {
            return;
        }
        for v in path[0] + 1..vertices {
            if !path.contains(&v) {
                path.push(v);
                extend(path, vertices, max_len, out);
                path.pop();
            }
        }
    }
    for start in 0..vertices {
        extend(&mut vec![start], vertices, max_len, &mut out);
    }
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

pub fn cycle_digraph(vertices: usize, cycle: &[usize]) -> Digraph {
    let edges = (0..cycle.len()).map(|i| (cycle[i], cycle[(i + 1) % cycle.len()]));
    Digraph::from_edges(vertices, edges).expect("cycle vertices are in range")
}

/// All multisets of one, two and three cycles of length ≤ `max_len` on `vertices` vertices.
pub fn fkg_suite(vertices: usize, max_len: usize, p: &BigRational) -> Result<FkgSuiteReport> {
    let graphs: Vec<Digraph> = small_cycles(vertices, max_len)
        .iter()
        .map(|c| cycle_digraph(vertices, c))
        .collect();
    let m = graphs.len();
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut check = |family: Vec<Digraph>| -> Result<()> {
        let report = fkg_bound_check(&family, p)?;
        checked += 1;
        if !report.holds {
            violations.push(report);
        }
        Ok(())
    };
    for a in 0..m {
        check(vec![graphs[a].clone()])?;
        for b in a..m {
            check(vec![graphs[a].clone(), graphs[b].clone()])?;
            for c in b..m {
                check(vec![
                    graphs[a].clone(),
                    graphs[b].clone(),
                    graphs[c].clone(),
                ])?;
            }
        }
    }
    Ok(FkgSuiteReport {
        vertices,
        max_len,
        p: p.to_string(),
        checked,
        ok: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rational;

    #[test]
    fn single_factor_is_centred() {
        let g = cycle_digraph(4, &[0, 1, 2]);
        let r = fkg_bound_check(&[g], &rational(1, 3)).unwrap();
        assert_eq!(r.value, "0");
        assert_eq!(r.bound, "2/27");
        assert!(r.holds);
    }

    #[test]
    fn identical_pair_is_a_variance() {
        let g = cycle_digraph(4, &[0, 1]);
        let p = rational(1, 2);
        let r = fkg_bound_check(&[g.clone(), g], &p).unwrap();
        // p²(1 − p²) = 3/16
        assert_eq!(r.value, "3/16");
        assert_eq!(r.union_edges, 2);
        assert!(r.holds);
    }

    #[test]
    fn cycle_listing() {
        // 5 loops, 10 two-cycles, 20 three-cycles
        assert_eq!(small_cycles(5, 3).len(), 35);
        assert_eq!(small_cycles(4, 4).len(), 4 + 6 + 8 + 6);
    }

    #[test]
    fn small_exhaustive_suite() {
        let report = fkg_suite(3, 3, &rational(1, 2)).unwrap();
        assert!(report.ok, "{:?}", report.violations);
        // 8 cycles: 8 + 36 + 120 multisets
        assert_eq!(report.checked, 164);
    }
}
