//! Eigenvalues of dense real nonsymmetric matrices.
//!
//! The pipeline is the classical one: diagonal balancing by powers of two,
//! Householder reduction to upper Hessenberg form, then Francis double-shift
//! QR iteration with deflation. Only eigenvalues are computed.

use crate::{Error, Result};

/// Exceptional shifts are applied after this many stalled sweeps on a block.
const EXCEPTIONAL_SHIFT_EVERY: usize = 10;
/// Sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Row-major dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::input(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// All eigenvalues of `m`, in no particular order.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Eigenvalue>> {
    if !m.is_finite() {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hqr(&mut a)
}

/// Diagonal similarity scaling by powers of two so that row and column
/// norms are comparable. Eigenvalues are unchanged.
pub fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = a.n;
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
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
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
                    let g = 1.0 / f;
                    for j in 0..n {
                        *a.at(i, j) *= g;
                    }
                    for j in 0..n {
                        *a.at(j, i) *= f;
                    }
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place. Entries below
/// the first subdiagonal are set to zero.
#[allow(clippy::needless_range_loop)]
pub fn hessenberg(a: &mut DenseMatrix) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| a.get(i, m - 1).abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..n).rev() {
            ort[i] = a.get(i, m - 1) / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;

        // H A
        for j in m..n {
            let f: f64 = (m..n).rev().map(|i| ort[i] * a.get(i, j)).sum::<f64>() / h;
            for i in m..n {
                *a.at(i, j) -= f * ort[i];
            }
        }
        // (H A) H
        for i in 0..n {
            let f: f64 = (m..n).rev().map(|j| ort[j] * a.get(i, j)).sum::<f64>() / h;
            for j in m..n {
                *a.at(i, j) -= f * ort[j];
            }
        }
        *a.at(m, m - 1) = scale * g;
        for i in m + 1..n {
            *a.at(i, m - 1) = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
pub fn hqr(a: &mut DenseMatrix) -> Result<Vec<Eigenvalue>> {
    let n = a.n;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    if n == 0 {
        return Ok(Vec::new());
    }
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
            // smallest l with a negligible subdiagonal a[l][l-1]
            let mut l = nu;
            while l >= 1 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() <= f64::EPSILON * s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.get(nu, nu);
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a.get(nu - 1, nu - 1);
            let mut w = a.get(nu, nu - 1) * a.get(nu - 1, nu);
            if l + 1 == nu {
                // 2x2 block
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }

            if its >= MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NoConvergence {
                    index: nu,
                    iterations: its,
                    active: nu + 1 - l,
                });
            }
            if its > 0 && its.is_multiple_of(EXCEPTIONAL_SHIFT_EVERY) {
                t += x;
                for i in 0..=nu {
                    *a.at(i, i) -= x;
                }
                let s = a.get(nu, nu - 1).abs() + a.get(nu - 1, nu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // look for two consecutive small subdiagonal elements
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a.get(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a.get(m + 1, m) + a.get(m, m + 1);
                q = a.get(m + 1, m + 1) - z - rr - ss;
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
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a.set(i, i - 2, 0.0);
                if i != m + 2 {
                    a.set(i, i - 3, 0.0);
                }
            }

            // double QR step on rows l..=nu and columns m..=nu
            let mut xk = 0.0;
            for k in m..nu {
                if k != m {
                    p = a.get(k, k - 1);
                    q = a.get(k + 1, k - 1);
                    r = if k + 1 != nu { a.get(k + 2, k - 1) } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        let v = -a.get(k, k - 1);
                        a.set(k, k - 1, v);
                    }
                } else {
                    a.set(k, k - 1, -s * xk);
                }
                p += s;
                let xx = p / s;
                let yy = q / s;
                let zz = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                    if k + 1 != nu {
                        pp += r * a.get(k + 2, j);
                        *a.at(k + 2, j) -= pp * zz;
                    }
                    *a.at(k + 1, j) -= pp * yy;
                    *a.at(k, j) -= pp * xx;
                }
                let mmin = if nu < k + 3 { nu } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = xx * a.get(i, k) + yy * a.get(i, k + 1);
                    if k + 1 != nu {
                        pp += zz * a.get(i, k + 2);
                        *a.at(i, k + 2) -= pp * r;
                    }
                    *a.at(i, k + 1) -= pp * q;
                    *a.at(i, k) -= pp;
                }
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Eigenvalue { re, im })
        .collect())
}
