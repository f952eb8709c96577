//! Tridiagonal solvers (real and complex) used by the radial boundary-value
//! solves and the resolvent scan.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `T x = rhs` for tridiagonal `T` by the Thomas algorithm.
///
/// `sub[i]` multiplies `x[i-1]` in row `i` (so `sub[0]` is ignored) and
/// `sup[i]` multiplies `x[i+1]` (so `sup[n-1]` is ignored).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    check_lengths(n, sub.len(), sup.len(), rhs.len())?;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - sub[i] * c[i - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        c[i] = if i + 1 < n { sup[i] / pivot } else { 0.0 };
        d[i] = if i == 0 { rhs[0] / pivot } else { (rhs[i] - sub[i] * d[i - 1]) / pivot };
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

fn check_lengths(n: usize, sub: usize, sup: usize, rhs: usize) -> Result<()> {
    if n == 0 || sub != n || sup != n || rhs != n {
        return Err(Error::InvalidParameter(format!(
            "tridiagonal system needs equal non-zero lengths, got diag {n}, sub {sub}, sup {sup}, rhs {rhs}"
        )));
    }
    Ok(())
}

/// LU factorisation (no pivoting) of a complex tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct ComplexTridiagonalLu {
    sub: Vec<Complex64>,
    pivots: Vec<Complex64>,
    upper: Vec<Complex64>,
}

impl ComplexTridiagonalLu {
    pub fn factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        check_lengths(n, sub.len(), sup.len(), n)?;
        let mut pivots = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 0..n {
            let p = if i == 0 { diag[0] } else { diag[i] - sub[i] * upper[i - 1] };
            if p.norm() == 0.0 || !p.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            upper.push(if i + 1 < n { sup[i] / p } else { Complex64::new(0.0, 0.0) });
            pivots.push(p);
        }
        Ok(Self { sub: sub.to_vec(), pivots, upper })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let r = if i == 0 { rhs[0] } else { rhs[i] - self.sub[i] * y[i - 1] };
            y.push(r / self.pivots[i]);
        }
        for i in (0..n - 1).rev() {
            let next = y[i + 1];
            y[i] -= self.upper[i] * next;
        }
        y
    }

    /// Solves `conj(A) x = rhs`; for complex-symmetric `A` this is `A^H x = rhs`.
    pub fn solve_conjugate(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let conj_rhs: Vec<Complex64> = rhs.iter().map(|z| z.conj()).collect();
        self.solve(&conj_rhs).into_iter().map(|z| z.conj()).collect()
    }
}

pub fn complex_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
