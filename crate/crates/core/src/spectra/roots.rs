use crate::charpoly::{Coefficients, SecularPolynomial};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const ABERTH_MAX_ITERATIONS: usize = 2000;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

type QPoly = Vec<BigRational>;

fn trim(mut p: QPoly) -> QPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn derivative(p: &[BigRational]) -> QPoly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect(),
    )
}

fn monic(p: QPoly) -> QPoly {
    match p.last().cloned() {
        Some(lead) => p.into_iter().map(|c| c / &lead).collect(),
        None => p,
    }
}

/// Quotient and remainder; `b` must be nonzero.
fn div_rem(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let mut rem: QPoly = a.to_vec();
    if a.len() < b.len() {
        return (Vec::new(), trim(rem));
    }
    let lead = b.last().expect("nonzero divisor");
    let mut quot = vec![BigRational::zero(); a.len() - b.len() + 1];
    for shift in (0..quot.len()).rev() {
        let c = &rem[shift + b.len() - 1] / lead;
        if !c.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                rem[shift + i] -= &c * bi;
            }
        }
        quot[shift] = c;
    }
    rem.truncate(b.len() - 1);
    (trim(quot), trim(rem))
}

fn gcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = div_rem(&x, &y);
        x = y;
        y = monic(r);
    }
    monic(x)
}

fn sub(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let len = a.len().max(b.len());
    trim(
        (0..len)
            .map(|i| {
                a.get(i).cloned().unwrap_or_else(BigRational::zero)
                    - b.get(i).cloned().unwrap_or_else(BigRational::zero)
            })
            .collect(),
    )
}

/// Yun's square-free decomposition: f = c·∏ g_i^i with each g_i square-free
/// and pairwise coprime. Returns the nonconstant (g_i, i), lowest power first
/// in coefficients.
pub fn squarefree_factors(coeffs: &[BigInt]) -> Vec<(Vec<BigRational>, usize)> {
    let f: QPoly = trim(coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect());
    if f.len() <= 1 {
        return Vec::new();
    }
    let df = derivative(&f);
    let c = gcd(&f, &df);
    let mut w = div_rem(&f, &c).0;
    let mut y = div_rem(&df, &c).0;
    let mut z = sub(&y, &derivative(&w));
    let mut out = Vec::new();
    let mut i = 1;
    while w.len() > 1 {
        let g = gcd(&w, &z);
        if g.len() > 1 {
            out.push((g.clone(), i));
        }
        w = div_rem(&w, &g).0;
        y = div_rem(&z, &g).0;
        z = sub(&y, &derivative(&w));
        i += 1;
    }
    out
}

/// Initial guesses from the upper convex hull of (k, log|a_k|): each hull
/// edge from k₀ to k₁ places k₁ − k₀ points on a circle of radius
/// |a_{k₀}/a_{k₁}|^{1/(k₁−k₀)}.
fn initial_guesses(a: &[f64]) -> Vec<Complex64> {
    let pts: Vec<(usize, f64)> =
        a.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(k, c)| (k, c.abs().ln())).collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (k0, l0) = hull[hull.len() - 2];
            let (k1, l1) = hull[hull.len() - 1];
            let cross = (k1 as f64 - k0 as f64) * (p.1 - l0) - (l1 - l0) * (p.0 as f64 - k0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let degree = a.len() - 1;
    let mut out = Vec::with_capacity(degree);
    for w in hull.windows(2) {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let count = k1 - k0;
        let radius = ((l0 - l1) / count as f64).exp();
        let offset = 0.7 + out.len() as f64 * 0.37;
        for j in 0..count {
            let angle = std::f64::consts::TAU * j as f64 / count as f64 + offset;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    // A zero low coefficient would put roots at the origin; nudge them off it.
    while out.len() < degree {
        out.push(Complex64::from_polar(f64::EPSILON, out.len() as f64));
    }
    out
}

/// (p(z)/p'(z), |p(z)| / Σ|a_k||z|^k), evaluated in reversed form for |z| > 1.
fn newton_ratio(a: &[f64], z: Complex64) -> (Complex64, f64) {
    let degree = a.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        let mut scale = 0.0;
        let r = z.norm();
        for &c in a.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            scale = scale * r + c.abs();
        }
        (p / dp, p.norm() / scale)
    } else {
        let y = z.inv();
        let mut r = Complex64::zero();
        let mut dr = Complex64::zero();
        let mut scale = 0.0;
        let ry = y.norm();
        for &c in a {
            dr = dr * y + r;
            r = r * y + c;
            scale = scale * ry + c.abs();
        }
        let ratio = z / (Complex64::new(degree as f64, 0.0) - y * dr / r);
        (ratio, r.norm() / scale)
    }
}

/// All roots of Σ a_k z^k (a_D ≠ 0) by Aberth–Ehrlich simultaneous iteration.
pub fn aberth(a: &[f64]) -> Result<Vec<Complex64>> {
    let degree = a.len().saturating_sub(1);
    if degree == 0 || a[degree] == 0.0 {
        return Err(Error::Parameter("polynomial needs degree >= 1 and a nonzero leading coefficient".into()));
    }
    if degree == 1 {
        return Ok(vec![Complex64::new(-a[0] / a[1], 0.0)]);
    }
    let tol = 4.0 * degree as f64 * f64::EPSILON;
    let mut z = initial_guesses(a);
    let mut done = vec![false; degree];
    for _ in 0..ABERTH_MAX_ITERATIONS {
        let mut all = true;
        for k in 0..degree {
            if done[k] {
                continue;
            }
            let (ratio, backward) = newton_ratio(a, z[k]);
            if !ratio.is_finite() {
                done[k] = true;
                continue;
            }
            all = false;
            let repulsion: Complex64 =
                (0..degree).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::one() - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
            }
            // One correction past the backward-error threshold, then freeze.
            if backward <= tol || !step.is_finite() || step.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if all {
            break;
        }
    }
    let worst = z.iter().map(|&r| newton_ratio(a, r).1).fold(0.0, f64::max);
    if !(worst <= RESIDUAL_TOLERANCE) {
        return Err(Error::NonConvergence {
            context: format!("Aberth iteration on a degree-{degree} polynomial"),
            detail: format!("largest relative residual {worst:e}"),
        });
    }
    Ok(z)
}

fn to_f64(p: &[BigRational]) -> Vec<f64> {
    // Scale by a power of two so the largest coefficient is near 1 before converting.
    let big = p.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::one);
    let bits = big.numer().bits() as i64 - big.denom().bits() as i64;
    let scale = if bits >= 0 {
        BigRational::from_integer(BigInt::one() << bits as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-bits) as usize)
    };
    p.iter().map(|c| (c / &scale).to_f64().unwrap_or(0.0)).collect()
}

/// Roots of q, each repeated by its multiplicity. Exact polynomials are split
/// into square-free factors first so repeated roots are found as simple ones.
pub fn poly_roots(p: &SecularPolynomial) -> Result<Vec<Complex64>> {
    if p.degree() == 0 {
        return Err(Error::Parameter("poly_roots needs degree >= 1".into()));
    }
    match p.coefficients() {
        Coefficients::Exact(c) => {
            let mut out = Vec::with_capacity(p.degree());
            for (factor, mult) in squarefree_factors(c) {
                for root in aberth(&to_f64(&factor))? {
                    out.extend(std::iter::repeat_n(root, mult));
                }
            }
            Ok(out)
        }
        Coefficients::Float(c) => aberth(c),
    }
}

/// The nonzero eigenvalues 1/root, found directly as roots of the reversed
/// polynomial z^D q(1/z) so that small eigenvalues keep relative accuracy.
pub fn secular_eigenvalues(p: &SecularPolynomial) -> Result<Vec<Complex64>> {
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    match p.coefficients() {
        Coefficients::Exact(c) => {
            let mut out = Vec::with_capacity(p.degree());
            for (factor, mult) in squarefree_factors(c) {
                let reversed: Vec<BigRational> = factor.into_iter().rev().collect();
                for root in aberth(&to_f64(&reversed))? {
                    out.extend(std::iter::repeat_n(root, mult));
                }
            }
            Ok(out)
        }
        Coefficients::Float(c) => {
            let reversed: Vec<f64> = c.iter().rev().copied().collect();
            aberth(&reversed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::match_multisets;

    fn exact(c: &[i64]) -> SecularPolynomial {
        SecularPolynomial::from_exact(c.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
    }

    #[test]
    fn textbook_cases() {
        let r = poly_roots(&exact(&[1, 0, -1])).unwrap();
        assert!(match_multisets(&r, &[1.0.into(), (-1.0).into()], 1e-12).all_matched());
        let r = poly_roots(&exact(&[1, -2])).unwrap();
        assert!((r[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let e = secular_eigenvalues(&exact(&[1, -2])).unwrap();
        assert!((e[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn yun_splits_repeated_factors() {
        // (1 − z)^3 (1 + z)^2 (1 − 2z)
        let one_minus = vec![BigInt::from(1), BigInt::from(-1)];
        let one_plus = vec![BigInt::from(1), BigInt::from(1)];
        let lin = vec![BigInt::from(1), BigInt::from(-2)];
        let mul = |a: &[BigInt], b: &[BigInt]| {
            let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let mut f = lin.clone();
        for _ in 0..3 {
            f = mul(&f, &one_minus);
        }
        for _ in 0..2 {
            f = mul(&f, &one_plus);
        }
        let factors = squarefree_factors(&f);
        let mults: Vec<usize> = factors.iter().map(|(g, m)| (g.len() - 1) * m).collect();
        assert_eq!(mults.iter().sum::<usize>(), 6);
        assert_eq!(factors.iter().map(|(_, m)| *m).collect::<Vec<_>>(), vec![1, 2, 3]);

        let p = SecularPolynomial::from_exact(f).unwrap();
        let roots = poly_roots(&p).unwrap();
        let expected: Vec<Complex64> = [0.5, 1.0, 1.0, 1.0, -1.0, -1.0].iter().map(|&x| x.into()).collect();
        assert!(match_multisets(&roots, &expected, 1e-12).all_matched());
    }

    #[test]
    fn wide_dynamic_range() {
        // (z − 10^-6)(z − 1)(z − 10^6); both middle symmetric functions equal e
        let e = 1e6 + 1.0 + 1e-6;
        let a = [-1.0, e, -e, 1.0];
        let roots = aberth(&a).unwrap();
        for target in [1e-6, 1.0, 1e6] {
            assert!(roots.iter().any(|r| (r.re - target).abs() <= 1e-9 * target), "{roots:?}");
        }
    }

    #[test]
    fn unit_circle_roots() {
        // 1 − z^12
        let mut c = vec![0i64; 13];
        c[0] = 1;
        c[12] = -1;
        let roots = poly_roots(&exact(&c)).unwrap();
        assert_eq!(roots.len(), 12);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-13);
            assert!((r.powu(12) - 1.0).norm() < 1e-12);
        }
    }
}
