//! Eigenvalues of a dense Hermitian matrix in double-double precision:
//! Householder reduction to real tridiagonal form, then Sturm-sequence bisection.
//!
//! Bisection resolves each eigenvalue to about `1e-31` of the matrix norm,
//! so eigenvalues many orders below the largest keep their leading digits.

use super::double_double::{CDd, Dd};
use crate::error::{Error, Result};

/// Dense Hermitian matrix; only the lower triangle is read.
#[derive(Debug, Clone)]
pub struct HermitianDd {
    n: usize,
    data: Vec<CDd>,
}

impl HermitianDd {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![CDd::ZERO; n * n],
        }
    }

    /// Build from the lower-triangle entries `f(i, j)`, `i >= j`.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> CDd) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> CDd {
        self.data[i * self.n + j]
    }

    /// Reduce to a real symmetric tridiagonal matrix with the same eigenvalues;
    /// returns the diagonal and the `n - 1` off-diagonal entries.
    pub fn tridiagonalize(mut self) -> (Vec<Dd>, Vec<Dd>) {
        let n = self.n;
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let m = n - k - 1;
            let x: Vec<CDd> = (0..m).map(|i| self.at(k + 1 + i, k)).collect();
            let xnorm = x.iter().fold(Dd::ZERO, |acc, v| acc + v.norm_sqr()).sqrt();
            off.push(xnorm);
            if m == 1 || xnorm.hi == 0.0 {
                continue;
            }
            let x0abs = x[0].norm_sqr().sqrt();
            let phase = if x0abs.hi == 0.0 {
                CDd::new(Dd::ONE, Dd::ZERO)
            } else {
                x[0].scale(Dd::ONE / x0abs)
            };
            let mut v = x;
            v[0] = phase.scale(x0abs + xnorm);
            let tau = Dd::ONE / (xnorm * (xnorm + x0abs));

            // p = tau B v over the trailing block, from its lower triangle
            let base = k + 1;
            let mut p = vec![CDd::ZERO; m];
            for i in 0..m {
                let row = (base + i) * n + base;
                let mut acc = CDd::ZERO;
                for j in 0..i {
                    let b = self.data[row + j];
                    acc = acc + b * v[j];
                    p[j] = p[j] + b.conj() * v[i];
                }
                acc = acc + self.data[row + i] * v[i];
                p[i] = p[i] + acc;
            }
            for pi in p.iter_mut() {
                *pi = pi.scale(tau);
            }
            let vp = v
                .iter()
                .zip(&p)
                .fold(Dd::ZERO, |acc, (vi, pi)| acc + (vi.re * pi.re + vi.im * pi.im));
            let half_k = tau * vp * 0.5;
            let q: Vec<CDd> = p.iter().zip(&v).map(|(pi, vi)| *pi - vi.scale(half_k)).collect();
            for i in 0..m {
                let row = (base + i) * n + base;
                let (vi, qi) = (v[i], q[i]);
                for j in 0..=i {
                    let upd = vi * q[j].conj() + qi * v[j].conj();
                    self.data[row + j] = self.data[row + j] - upd;
                }
            }
        }
        let diag = (0..n).map(|i| self.at(i, i).re).collect();
        (diag, off)
    }
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn count_below(diag: &[Dd], off2: &[Dd], x: Dd, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - off2[i - 1] / q;
        }
        if q.hi.abs() < pivmin {
            q = Dd::new(-pivmin);
        }
        if q.hi < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of the real symmetric tridiagonal matrix `(diag, off)`, descending.
pub fn tridiagonal_eigenvalues(diag: &[Dd], off: &[Dd]) -> Result<Vec<Dd>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::Numerical("tridiagonal shape mismatch".into()));
    }
    let off2: Vec<Dd> = off.iter().map(|e| e.sqr()).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs().to_f64() } else { 0.0 } + if i + 1 < n { off[i].abs().to_f64() } else { 0.0 };
        lo = lo.min(diag[i].to_f64() - r);
        hi = hi.max(diag[i].to_f64() + r);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let norm = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let (lo, hi) = (Dd::new(lo - 1e-12 * norm), Dd::new(hi + 1e-12 * norm));
    let abs_tol = 1e-33 * norm;
    let pivmin = f64::MIN_POSITIVE * 1e10 * norm.max(1.0);

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // the k-th largest is the (n - 1 - k)-th smallest
        let j = n - 1 - k;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..400 {
            let width = (b - a).to_f64();
            let scale = a.to_f64().abs().max(b.to_f64().abs());
            if width <= 1e-31 * scale + abs_tol {
                break;
            }
            let mid = (a + b) * 0.5;
            if count_below(diag, &off2, mid, pivmin) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push((a + b) * 0.5);
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues_dd(a: HermitianDd) -> Result<Vec<Dd>> {
    let (diag, off) = a.tridiagonalize();
    tridiagonal_eigenvalues(&diag, &off)
}
