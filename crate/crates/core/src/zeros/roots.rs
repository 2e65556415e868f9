//! Polynomial roots from the eigenvalues of a balanced companion matrix, with Newton
//! polishing on the original coefficients.
//!
//! The companion matrix is already upper Hessenberg, so the eigenvalues come from a
//! single-shift implicit QR iteration on the active block only; no Schur vectors are
//! formed.

use crate::error::{GafError, Result};
use num_complex::Complex64;

/// Coefficients smaller than this fraction of the largest one are dropped from the top
/// before building the companion matrix; on the closed unit disk they change the
/// polynomial by less than `1e-40` relative.
const TRIM: f64 = 1e-40;

fn horner(c: &[Complex64], u: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &x in c.iter().rev() {
        dp = dp * u + p;
        p = p * u + x;
    }
    (p, dp)
}

/// `|p(u)| / Σ |c_m| |u|^m`, the residual relative to the size of the terms.
pub fn relative_residual(c: &[Complex64], u: Complex64) -> f64 {
    let (p, _) = horner(c, u);
    let a = u.norm();
    let scale = c.iter().rev().fold(0.0, |acc, x| acc * a + x.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Effective degree after dropping negligible leading coefficients.
pub fn effective_degree(c: &[Complex64]) -> usize {
    let max = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    c.iter().rposition(|x| x.norm() > TRIM * max).unwrap_or(0)
}

/// Row-major square matrix.
struct Square {
    k: usize,
    a: Vec<Complex64>,
}

impl std::ops::Index<(usize, usize)> for Square {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.a[i * self.k + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Square {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.a[i * self.k + j]
    }
}

fn balance(a: &mut Square) {
    let n = a.k;
    let radix = 2.0f64;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Complex Givens rotation `[[c, s], [-s̄, c]]` taking `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed in the process).
fn hessenberg_eigenvalues(h: &mut Square) -> Option<Vec<Complex64>> {
    let k = h.k;
    let mut eig = Vec::with_capacity(k);
    if k == 0 {
        return Some(eig);
    }
    let mut hi = k - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig.push(h[(0, 0)]);
            return Some(eig);
        }
        // look for a negligible subdiagonal entry
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].l1_norm() + h[(lo, lo)].l1_norm();
            if h[(lo, lo - 1)].l1_norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * k {
            return None;
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            let e = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + Complex64::new(0.75 * e, 0.43 * e)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for j in lo..hi {
            if j > lo {
                x = h[(j, j - 1)];
                y = h[(j + 1, j - 1)];
            }
            let (c, s) = givens(x, y);
            let first = if j > lo { j - 1 } else { lo };
            for col in first..=hi {
                let p = h[(j, col)];
                let q = h[(j + 1, col)];
                h[(j, col)] = p * c + s * q;
                h[(j + 1, col)] = q * c - s.conj() * p;
            }
            if j > lo {
                h[(j + 1, j - 1)] = Complex64::new(0.0, 0.0);
            }
            let last = (j + 2).min(hi);
            for row in lo..=last {
                let p = h[(row, j)];
                let q = h[(row, j + 1)];
                h[(row, j)] = p * c + q * s.conj();
                h[(row, j + 1)] = q * c - p * s;
            }
        }
    }
}

/// All roots of `Σ_m c_m u^m` (with multiplicity) after trimming negligible leading
/// coefficients.
pub fn polynomial_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = effective_degree(c);
    let c = &c[..=d];
    if d == 0 {
        return Ok(Vec::new());
    }
    let zeros_at_origin = c
        .iter()
        .position(|x| *x != Complex64::new(0.0, 0.0))
        .unwrap_or(0);
    let reduced = &c[zeros_at_origin..];
    let k = reduced.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if k == 0 {
        return Ok(roots);
    }
    if k == 1 {
        roots.push(-reduced[0] / reduced[1]);
        return Ok(roots);
    }
    let lead = reduced[k];
    let mut a = Square {
        k,
        a: vec![Complex64::new(0.0, 0.0); k * k],
    };
    for j in 0..k {
        a[(0, j)] = -reduced[k - 1 - j] / lead;
    }
    for i in 1..k {
        a[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut a);
    let eig = hessenberg_eigenvalues(&mut a).ok_or_else(|| {
        GafError::Numeric(format!(
            "companion eigen-solve did not converge (degree {k})"
        ))
    })?;
    for mut u in eig {
        for _ in 0..2 {
            let (p, dp) = horner(reduced, u);
            if dp.norm() == 0.0 {
                break;
            }
            let next = u - p / dp;
            if next.is_finite() && horner(reduced, next).0.norm() <= p.norm() {
                u = next;
            }
        }
        roots.push(u);
    }
    Ok(roots)
}
