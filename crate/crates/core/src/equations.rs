//! Continuous Sylvester/Lyapunov and discrete Stein solvers, the matrix
//! Cayley map `ζ(-A)`, and unit-eigenvalue counting.
//!
//! Both solvers reduce the coefficients to complex Schur form and
//! back-substitute column by column (Bartels-Stewart), so the cost is
//! cubic in the state dimensions rather than in their product.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, identity, op_norm, CMatrix, SINGULAR_CONDITION};

/// Relative residual bound accepted from the solvers.
pub const SOLVE_TOL: f64 = 1e-10;

/// Default clustering tolerance for eigenvalue 1.
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSolution {
    pub x: CMatrix,
    /// Operator norm of the defining equation after substitution.
    pub residual: f64,
}

/// Solves `a x + x b + c = 0`.
pub fn solve_sylvester(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<EquationSolution> {
    check_shapes(a, b, c)?;
    let (p, q) = c.shape();
    if p == 0 || q == 0 {
        return Ok(EquationSolution { x: linalg::zeros(p, q), residual: 0.0 });
    }
    let (u, t) = linalg::schur(a);
    let (v, s) = linalg::schur(b);

    let sep = separation(&t, &s, |x, y| x + y);
    let condition = (op_norm(a) + op_norm(b)) / sep;
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::Unsolvable { separation: sep, condition });
    }

    let f = u.adjoint() * c * &v;
    let mut y = linalg::zeros(p, q);
    for j in 0..q {
        // (T + s_jj I) y_j = -f_j - sum_{k<j} y_k s_kj
        let mut rhs: Vec<Complex64> = (0..p).map(|i| -f[(i, j)]).collect();
        for k in 0..j {
            let skj = s[(k, j)];
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= y[(i, k)] * skj;
            }
        }
        let col = back_substitute(&t, s[(j, j)], Complex64::new(1.0, 0.0), &rhs);
        for (i, v) in col.into_iter().enumerate() {
            y[(i, j)] = v;
        }
    }
    let x = &u * y * v.adjoint();

    let residual = op_norm(&(a * &x + &x * b + c));
    let nx = op_norm(&x);
    let bound = SOLVE_TOL * (1.0 + op_norm(a) * nx + op_norm(b) * nx + op_norm(c));
    if residual > bound {
        return Err(Error::Inaccurate { residual, bound });
    }
    Ok(EquationSolution { x, residual })
}

/// Solves `x = a x b + c`.
pub fn solve_stein(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<EquationSolution> {
    check_shapes(a, b, c)?;
    let (p, q) = c.shape();
    if p == 0 || q == 0 {
        return Ok(EquationSolution { x: linalg::zeros(p, q), residual: 0.0 });
    }
    let (u, t) = linalg::schur(a);
    let (v, s) = linalg::schur(b);

    let sep = separation(&t, &s, |x, y| Complex64::new(1.0, 0.0) - x * y);
    let condition = (1.0 + op_norm(a) * op_norm(b)) / sep;
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::Unsolvable { separation: sep, condition });
    }

    let f = u.adjoint() * c * &v;
    let mut y = linalg::zeros(p, q);
    for j in 0..q {
        // (I - s_jj T) y_j = f_j + T sum_{k<j} y_k s_kj
        let mut acc = vec![Complex64::new(0.0, 0.0); p];
        for k in 0..j {
            let skj = s[(k, j)];
            for (i, r) in acc.iter_mut().enumerate() {
                *r += y[(i, k)] * skj;
            }
        }
        let rhs: Vec<Complex64> = (0..p)
            .map(|i| f[(i, j)] + (i..p).map(|l| t[(i, l)] * acc[l]).sum::<Complex64>())
            .collect();
        let col = back_substitute(&t, Complex64::new(1.0, 0.0), -s[(j, j)], &rhs);
        for (i, v) in col.into_iter().enumerate() {
            y[(i, j)] = v;
        }
    }
    let x = &u * y * v.adjoint();

    let residual = op_norm(&(a * &x * b + c - &x));
    let nx = op_norm(&x);
    let bound = SOLVE_TOL * (1.0 + op_norm(a) * nx * op_norm(b) + nx + op_norm(c));
    if residual > bound {
        return Err(Error::Inaccurate { residual, bound });
    }
    Ok(EquationSolution { x, residual })
}

fn check_shapes(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Dimension("equation coefficients must be square".into()));
    }
    if c.shape() != (a.nrows(), b.nrows()) {
        return Err(Error::Dimension(format!(
            "right-hand side is {:?}, expected {:?}",
            c.shape(),
            (a.nrows(), b.nrows())
        )));
    }
    Ok(())
}

/// Smallest modulus of `pair(t_ii, s_jj)` over all diagonal pairs.
fn separation(t: &CMatrix, s: &CMatrix, pair: impl Fn(Complex64, Complex64) -> Complex64) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..t.nrows() {
        for j in 0..s.nrows() {
            sep = sep.min(pair(t[(i, i)], s[(j, j)]).norm());
        }
    }
    sep
}

/// Solves `(shift I + scale T) y = rhs` for upper-triangular `T`.
fn back_substitute(t: &CMatrix, shift: Complex64, scale: Complex64, rhs: &[Complex64]) -> Vec<Complex64> {
    let p = rhs.len();
    let mut y = vec![Complex64::new(0.0, 0.0); p];
    for i in (0..p).rev() {
        let mut r = rhs[i];
        for l in i + 1..p {
            r -= scale * t[(i, l)] * y[l];
        }
        y[i] = r / (shift + scale * t[(i, i)]);
    }
    y
}

/// `ζ(-A) = (I + A)(I - A)^{-1}`, mapping a Hurwitz matrix into the unit disk.
pub fn zeta_of_minus(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension("zeta_of_minus needs a square matrix".into()));
    }
    let n = a.nrows();
    let inv = linalg::inverse(&(identity(n) - a), "I - A")?;
    Ok((identity(n) + a) * inv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitMultiplicity {
    /// Number of eigenvalues `>= 1 - tol`.
    pub count: usize,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

impl UnitMultiplicity {
    /// `rank(I - h)` at the same tolerance.
    pub fn defect_rank(&self) -> usize {
        self.eigenvalues.len() - self.count
    }

    /// Distance of the closest eigenvalue to the clustering threshold.
    pub fn margin(&self, tol: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| (l - (1.0 - tol)).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Counts eigenvalues of the Hermitian part of `h` clustered at 1.
///
/// Fails with [`Error::ContractionViolation`] when an eigenvalue exceeds
/// `1 + tol`.
pub fn eigenvalue_one_multiplicity(h: &CMatrix, tol: f64) -> Result<UnitMultiplicity> {
    if !h.is_square() {
        return Err(Error::Dimension("multiplicity needs a square matrix".into()));
    }
    let eigenvalues = linalg::hermitian_eigenvalues(h);
    if let Some(&top) = eigenvalues.last() {
        if top > 1.0 + tol {
            return Err(Error::ContractionViolation { eigenvalue: top });
        }
    }
    let count = eigenvalues.iter().filter(|&&l| l >= 1.0 - tol).count();
    Ok(UnitMultiplicity { count, eigenvalues })
}
