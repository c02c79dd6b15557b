use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub const LOOPSOUP_MAX_WEIGHT: usize = 8;
pub const LOOPSOUP_DIRECT_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentTarget {
    /// lim E[∏(S_{ℓ_i})_{p_i}] = ∏(d^{ℓ_i}/ℓ_i)^{p_i}.
    PoissonFactorial {
        lengths: Vec<usize>,
        powers: Vec<usize>,
        d: f64,
    },
    /// lim E[∏ W_{ℓ_i}^{p_i}] for independent standard Gaussians.
    Gaussian { powers: Vec<usize> },
    /// E[∏(S_{ℓ_i})_{p_i}] at finite n with p = d/n.
    LoopsoupExact {
        n: usize,
        #[serde(serialize_with = "as_string")]
        d: BigRational,
        lengths: Vec<usize>,
        powers: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TargetValue {
    Exact(#[serde(serialize_with = "as_string")] BigRational),
    Real(f64),
}

fn as_string<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

impl TargetValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            TargetValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            TargetValue::Real(x) => *x,
        }
    }
}

fn check_lengths(lengths: &[usize], powers: &[usize]) -> Result<()> {
    if lengths.len() != powers.len() || lengths.is_empty() {
        return Err(Error::Parameter(
            "lengths and powers must be nonempty and of equal size".into(),
        ));
    }
    if lengths.contains(&0) || powers.contains(&0) {
        return Err(Error::Parameter(
            "lengths and powers must be positive".into(),
        ));
    }
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parameter("cycle lengths must be distinct".into()));
    }
    Ok(())
}

pub fn moment_targets(target: &MomentTarget) -> Result<TargetValue> {
    match target {
        MomentTarget::PoissonFactorial { lengths, powers, d } => {
            check_lengths(lengths, powers)?;
            if !(*d > 0.0) || !d.is_finite() {
                return Err(Error::Parameter(format!("d must be positive, got {d}")));
            }
            let log: f64 = lengths
                .iter()
                .zip(powers)
                .map(|(&l, &p)| p as f64 * (l as f64 * d.ln() - (l as f64).ln()))
                .sum();
            Ok(TargetValue::Real(log.exp()))
        }
        MomentTarget::Gaussian { powers } => {
            if powers.is_empty() || powers.contains(&0) {
                return Err(Error::Parameter("powers must be positive".into()));
            }
            // p!/(2^{p/2}(p/2)!) = (p − 1)!! for even p
            let mut value = BigInt::one();
            for &p in powers {
                if p % 2 == 1 {
                    return Ok(TargetValue::Exact(BigRational::zero()));
                }
                value *= (1..p).step_by(2).fold(BigInt::one(), |acc, j| acc * j);
            }
            Ok(TargetValue::Exact(BigRational::from_integer(value)))
        }
        MomentTarget::LoopsoupExact {
            n,
            d,
            lengths,
            powers,
        } => {
            if *n <= LOOPSOUP_DIRECT_MAX_N {
                loopsoup_direct(*n, d, lengths, powers).map(TargetValue::Exact)
            } else {
                loopsoup_by_vertex_sets(*n, d, lengths, powers).map(TargetValue::Exact)
            }
        }
    }
}

/// Simple directed cycles of length `len` on `v` vertices as (edge mask, vertex mask),
/// edge (a, b) at bit a·v + b.
fn cycles_on(v: usize, len: usize) -> Vec<(u64, u8)> {
    let mut out = Vec::new();
    fn extend(path: &mut Vec<usize>, v: usize, len: usize, out: &mut Vec<(u64, u8)>) {
        if path.len() == len {
            let mut edges = 0u64;
            let mut verts = 0u8;
            for i in 0..len {
                let (a, b) = (path[i], path[(i + 1) % len]);
                edges |= 1 << (a * v + b);
                verts |= 1 << a;
            }
            out.push((edges, verts));
            return;
        }
        for w in path[0] + 1..v {
            if !path.contains(&w) {
                path.push(w);
                extend(path, v, len, out);
                path.pop();
            }
        }
    }
    for start in 0..v {
        extend(&mut vec![start], v, len, &mut out);
    }
    out
}

/// counts[u][e]: ordered loopsoups on [v] covering u vertices with e distinct edges.
fn loopsoup_counts(v: usize, lengths: &[usize], powers: &[usize]) -> Vec<Vec<u64>> {
    let pools: Vec<Vec<(u64, u8)>> = lengths.iter().map(|&l| cycles_on(v, l)).collect();
    let slots: Vec<usize> = powers
        .iter()
        .enumerate()
        .flat_map(|(g, &p)| std::iter::repeat_n(g, p))
        .collect();
    let mut used: Vec<Vec<bool>> = pools.iter().map(|p| vec![false; p.len()]).collect();
    let mut counts = vec![vec![0u64; v * v + 1]; v + 1];

    fn go(
        slot: usize,
        slots: &[usize],
        pools: &[Vec<(u64, u8)>],
        used: &mut [Vec<bool>],
        edges: u64,
        verts: u8,
        counts: &mut [Vec<u64>],
    ) {
        if slot == slots.len() {
            counts[verts.count_ones() as usize][edges.count_ones() as usize] += 1;
            return;
        }
        let g = slots[slot];
        for c in 0..pools[g].len() {
            if used[g][c] {
                continue;
            }
            used[g][c] = true;
            let (e, w) = pools[g][c];
            go(slot + 1, slots, pools, used, edges | e, verts | w, counts);
            used[g][c] = false;
        }
    }
    go(0, &slots, &pools, &mut used, 0, 0, &mut counts);
    counts
}

fn weight(lengths: &[usize], powers: &[usize]) -> Result<usize> {
    check_lengths(lengths, powers)?;
    let m: usize = lengths.iter().zip(powers).map(|(l, p)| l * p).sum();
    if m > LOOPSOUP_MAX_WEIGHT {
        return Err(Error::Budget(format!(
            "loopsoup weight {m} exceeds {LOOPSOUP_MAX_WEIGHT}"
        )));
    }
    Ok(m)
}

fn check_d(n: usize, d: &BigRational) -> Result<BigRational> {
    let p = d / BigRational::from_integer(BigInt::from(n));
    if *d <= BigRational::zero() || p > BigRational::one() {
        return Err(Error::Parameter(format!(
            "need 0 < d <= n, got d = {d}, n = {n}"
        )));
    }
    Ok(p)
}

/// Σ over ordered tuples of distinct cycles in the complete digraph on [n]
/// (loops included) of (d/n)^{#distinct edges}, by listing every tuple.
pub fn loopsoup_direct(
    n: usize,
    d: &BigRational,
    lengths: &[usize],
    powers: &[usize],
) -> Result<BigRational> {
    weight(lengths, powers)?;
    if n == 0 || n > LOOPSOUP_DIRECT_MAX_N {
        return Err(Error::Budget(format!(
            "direct loopsoup enumeration needs 1 <= n <= {LOOPSOUP_DIRECT_MAX_N}"
        )));
    }
    let p = check_d(n, d)?;
    let counts = loopsoup_counts(n, lengths, powers);
    let by_edges = (0..=n * n)
        .map(|e| counts.iter().map(|row| row[e]).sum())
        .collect();
    Ok(sum_by_edges(by_edges, &p))
}

fn sum_by_edges(by_edges: Vec<u64>, p: &BigRational) -> BigRational {
    by_edges
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(e, &c)| BigRational::from_integer(BigInt::from(c)) * num_traits::pow(p.clone(), e))
        .sum()
}

/// Same sum for any n: tuples are enumerated once on M = Σ ℓ_i p_i labelled
/// vertices, grouped by the number u of vertices they touch, and each group
/// is rescaled by C(n, u)/C(M, u).
pub fn loopsoup_by_vertex_sets(
    n: usize,
    d: &BigRational,
    lengths: &[usize],
    powers: &[usize],
) -> Result<BigRational> {
    let m = weight(lengths, powers)?;
    let p = check_d(n, d)?;
    let v = m.min(n);
    let counts = loopsoup_counts(v, lengths, powers);
    let mut total = BigRational::zero();
    for (u, row) in counts.iter().enumerate() {
        if row.iter().all(|&c| c == 0) {
            continue;
        }
        let scale = BigRational::new(
            binomial(BigInt::from(n), BigInt::from(u)),
            binomial(BigInt::from(v), BigInt::from(u)),
        );
        total += scale * sum_by_edges(row.clone(), &p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rational;

    fn falling(n: i64, k: i64) -> i64 {
        (0..k).map(|i| n - i).product()
    }

    #[test]
    fn limit_targets() {
        let v = moment_targets(&MomentTarget::PoissonFactorial {
            lengths: vec![2],
            powers: vec![1],
            d: 2.0,
        })
        .unwrap();
        assert!((v.to_f64() - 2.0).abs() < 1e-12);
        let g = |powers: Vec<usize>| moment_targets(&MomentTarget::Gaussian { powers }).unwrap();
        assert_eq!(g(vec![3]), TargetValue::Exact(rational(0, 1)));
        assert_eq!(g(vec![2, 2]), TargetValue::Exact(rational(1, 1)));
        assert_eq!(g(vec![4, 6]), TargetValue::Exact(rational(3 * 15, 1)));
    }

    #[test]
    fn ordered_pairs_of_loops() {
        let d = rational(3, 2);
        let v = loopsoup_direct(5, &d, &[1], &[2]).unwrap();
        assert_eq!(v, rational(4, 5) * &d * &d);
    }

    #[test]
    fn single_cycle_count() {
        let d = rational(7, 3);
        for n in 3..=8i64 {
            for l in 1..=n.min(4) {
                let expected = BigRational::from_integer(falling(n, l).into())
                    * num_traits::pow(&d / rational(n, 1), l as usize)
                    / rational(l, 1);
                assert_eq!(
                    loopsoup_direct(n as usize, &d, &[l as usize], &[1]).unwrap(),
                    expected
                );
            }
        }
    }

    #[test]
    fn vertex_set_route_matches_direct() {
        let d = rational(6, 5);
        let cases: [(&[usize], &[usize]); 5] = [
            (&[1], &[2]),
            (&[2], &[2]),
            (&[1, 2], &[1, 2]),
            (&[3], &[2]),
            (&[1, 3], &[2, 1]),
        ];
        for n in 2..=8 {
            for (l, p) in cases {
                assert_eq!(
                    loopsoup_by_vertex_sets(n, &d, l, p).unwrap(),
                    loopsoup_direct(n, &d, l, p).unwrap(),
                    "n={n} l={l:?} p={p:?}"
                );
            }
        }
    }

    #[test]
    fn two_cycle_pairs_at_large_n() {
        // Ordered pairs of distinct 2-cycles share no edges: C(n,2)(C(n,2) − 1) p^4.
        let n = 2000i64;
        let d = rational(6, 5);
        let v = loopsoup_by_vertex_sets(n as usize, &d, &[2], &[2]).unwrap();
        let pairs = n * (n - 1) / 2;
        let expected = rational(pairs * (pairs - 1), 1) * num_traits::pow(&d / rational(n, 1), 4);
        assert_eq!(v, expected);
        let limit = (1.2f64 * 1.2 / 2.0).powi(2);
        assert!((v.to_f64().unwrap() / limit - 1.0).abs() < 0.02);
    }

    #[test]
    fn caps_and_parameters() {
        let d = rational(1, 1);
        assert!(matches!(
            loopsoup_direct(9, &d, &[1], &[1]),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            loopsoup_by_vertex_sets(100, &d, &[3], &[3]),
            Err(Error::Budget(_))
        ));
        assert!(loopsoup_direct(4, &d, &[2, 2], &[1, 1]).is_err());
        assert!(moment_targets(&MomentTarget::Gaussian { powers: vec![] }).is_err());
    }
}
