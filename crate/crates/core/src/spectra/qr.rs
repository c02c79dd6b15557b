use crate::error::{Error, Result};
use num_complex::Complex64;

/// Largest block handled by the built-in QR; larger blocks go to `faer`.
pub const OWN_QR_MAX_N: usize = 256;
pub const SWEEPS_PER_EIGENVALUE: usize = 40;
const EXCEPTIONAL_EVERY: usize = 10;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("matrix must be square".into()));
        }
        Ok(DenseMatrix { n, data: rows.concat() })
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Parameter(format!("expected {} entries, got {}", n * n, data.len())));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// All eigenvalues of a real square matrix. Complex pairs come out as exact
/// conjugates, positive imaginary part first.
pub fn dense_eigenvalues(block: &DenseMatrix) -> Result<Vec<Complex64>> {
    if block.n == 0 {
        return Err(Error::Parameter("empty matrix".into()));
    }
    if block.n > OWN_QR_MAX_N {
        faer_eigenvalues(block)
    } else {
        qr_eigenvalues(block)
    }
}

/// Balancing, elimination to Hessenberg form, then Francis double-shift QR.
pub fn qr_eigenvalues(block: &DenseMatrix) -> Result<Vec<Complex64>> {
    let mut a = block.clone();
    balance(&mut a);
    to_hessenberg(&mut a);
    hqr(&mut a)
}

pub fn faer_eigenvalues(block: &DenseMatrix) -> Result<Vec<Complex64>> {
    let n = block.n;
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| block.get(i, j));
    let mut values = m.eigenvalues().map_err(|e| Error::NonConvergence {
        context: format!("faer eigensolver on a {n}x{n} block"),
        detail: format!("{e:?}"),
    })?;
    symmetrise_pairs(&mut values);
    Ok(values)
}

/// Makes near-conjugate pairs exact conjugates.
fn symmetrise_pairs(values: &mut [Complex64]) {
    let mut used = vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let v = values[i];
        if v.im == 0.0 {
            continue;
        }
        let partner = (0..values.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (values[a] - v.conj()).norm().total_cmp(&(values[b] - v.conj()).norm())
            });
        if let Some(j) = partner {
            let scale = v.norm().max(1.0);
            if (values[j] - v.conj()).norm() <= 1e-8 * scale {
                used[j] = true;
                let re = 0.5 * (v.re + values[j].re);
                let im = 0.5 * (v.im.abs() + values[j].im.abs());
                values[i] = Complex64::new(re, im);
                values[j] = Complex64::new(re, -im);
            }
        }
    }
}

/// Diagonal similarity by powers of two that evens out row and column norms.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a.set(i, j, a.get(i, j) * inv);
                }
                for j in 0..n {
                    a.set(j, i, a.get(j, i) * f);
                }
            }
        }
    }
}

/// Gaussian elimination with pivoting to upper Hessenberg form; entries
/// below the subdiagonal are cleared afterwards.
fn to_hessenberg(a: &mut DenseMatrix) {
    let n = a.n;
    for m in 1..n.saturating_sub(1) {
        let mut x: f64 = 0.0;
        let mut pivot = m;
        for j in m..n {
            if a.get(j, m - 1).abs() > x.abs() {
                x = a.get(j, m - 1);
                pivot = j;
            }
        }
        if pivot != m {
            for j in m - 1..n {
                let t = a.get(pivot, j);
                a.set(pivot, j, a.get(m, j));
                a.set(m, j, t);
            }
            for j in 0..n {
                let t = a.get(j, pivot);
                a.set(j, pivot, a.get(j, m));
                a.set(j, m, t);
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a.get(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    a.set(i, m - 1, y);
                    for j in m..n {
                        a.set(i, j, a.get(i, j) - y * a.get(m, j));
                    }
                    for j in 0..n {
                        a.set(j, m, a.get(j, m) + y * a.get(j, i));
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a.set(i, j, 0.0);
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the shifted double-step QR
/// algorithm, deflating one or two eigenvalues at a time from the bottom.
fn hqr(a: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.n;
    let eps = f64::EPSILON;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a.get(i, j).abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() <= eps * s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.get(nu, nu);
            if l == nu {
                out[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a.get(nu - 1, nu - 1);
            let mut w = a.get(nu, nu - 1) * a.get(nu - 1, nu);
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    out[nu - 1] = Complex64::new(x + z, 0.0);
                    out[nu] = Complex64::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
                } else {
                    out[nu - 1] = Complex64::new(x + p, z);
                    out[nu] = Complex64::new(x + p, -z);
                }
                nn -= 2;
                break;
            }
            if its == SWEEPS_PER_EIGENVALUE {
                return Err(Error::NonConvergence {
                    context: format!("QR iteration on a {n}x{n} block"),
                    detail: format!("{} eigenvalues still undeflated after {its} sweeps", nu + 1),
                });
            }
            if its > 0 && its.is_multiple_of(EXCEPTIONAL_EVERY) {
                t += x;
                for i in 0..=nu {
                    a.set(i, i, a.get(i, i) - x);
                }
                let s = a.get(nu, nu - 1).abs() + a.get(nu - 1, nu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let (mut p, mut q, mut r): (f64, f64, f64);
            let mut z;
            let mut m = nu - 2;
            loop {
                z = a.get(m, m);
                let rr = x - z;
                let s = y - z;
                p = (rr * s - w) / a.get(m + 1, m) + a.get(m, m + 1);
                q = a.get(m + 1, m + 1) - z - rr - s;
                r = a.get(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a.get(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.get(m - 1, m - 1).abs() + z.abs() + a.get(m + 1, m + 1).abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a.set(i + 2, i, 0.0);
                if i != m {
                    a.set(i + 2, i - 1, 0.0);
                }
            }
            for k in m..nu {
                if k != m {
                    p = a.get(k, k - 1);
                    q = a.get(k + 1, k - 1);
                    r = if k + 1 != nu { a.get(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a.set(k, k - 1, -a.get(k, k - 1));
                    }
                } else {
                    a.set(k, k - 1, -s * x);
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                    if k + 1 != nu {
                        pp += r * a.get(k + 2, j);
                        a.set(k + 2, j, a.get(k + 2, j) - pp * z);
                    }
                    a.set(k + 1, j, a.get(k + 1, j) - pp * y);
                    a.set(k, j, a.get(k, j) - pp * x);
                }
                let mmin = if nu < k + 3 { nu } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * a.get(i, k) + y * a.get(i, k + 1);
                    if k + 1 != nu {
                        pp += z * a.get(i, k + 2);
                        a.set(i, k + 2, a.get(i, k + 2) - pp * r);
                    }
                    a.set(i, k + 1, a.get(i, k + 1) - pp * q);
                    a.set(i, k, a.get(i, k) - pp);
                }
            }
        }
    }
    Ok(out)
}
