//! State-space realizations and their structural constructors.
//!
//! A continuous realization `{A, B, C, D}` represents
//! `Θ(s) = D + C (sI - A)^{-1} B`; a discrete one represents
//! `Θ(z) = D + z C (I - z A)^{-1} B`. The input and output spaces always
//! coincide (`D` is `m x m`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, block2, block_diag, condition, identity, op_norm, CMatrix, SINGULAR_CONDITION};

/// Default tolerance for the validity checks.
pub const VALIDATION_TOL: f64 = 1e-8;

/// Band below the stability boundary that triggers the near-marginal flag.
pub const MARGINAL_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
    flavor: Flavor,
}

impl Realization {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix, flavor: Flavor) -> Result<Self> {
        let n = a.nrows();
        let m = d.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("state map is {}x{}", n, a.ncols())));
        }
        if d.ncols() != m {
            return Err(Error::Dimension(format!("feedthrough is {}x{}", m, d.ncols())));
        }
        if b.shape() != (n, m) {
            return Err(Error::Dimension(format!("input map is {:?}, expected {:?}", b.shape(), (n, m))));
        }
        if c.shape() != (m, n) {
            return Err(Error::Dimension(format!("output map is {:?}, expected {:?}", c.shape(), (m, n))));
        }
        Ok(Self { a, b, c, d, flavor })
    }

    pub fn continuous(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        Self::new(a, b, c, d, Flavor::Continuous)
    }

    pub fn discrete(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        Self::new(a, b, c, d, Flavor::Discrete)
    }

    /// Zero-dimensional state: the constant function `d`.
    pub fn constant(d: CMatrix, flavor: Flavor) -> Result<Self> {
        let m = d.nrows();
        Self::new(linalg::zeros(0, 0), linalg::zeros(0, m), linalg::zeros(m, 0), d, flavor)
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    /// Size of the coefficient space.
    pub fn io_dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix, CMatrix, CMatrix, Flavor) {
        (self.a, self.b, self.c, self.d, self.flavor)
    }

    /// Largest entrywise difference over all four matrices.
    pub fn max_diff(&self, other: &Realization) -> f64 {
        if self.flavor != other.flavor {
            return f64::INFINITY;
        }
        [
            linalg::max_abs_diff(&self.a, &other.a),
            linalg::max_abs_diff(&self.b, &other.b),
            linalg::max_abs_diff(&self.c, &other.c),
            linalg::max_abs_diff(&self.d, &other.d),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Stacked system matrix `[[A, B], [C, D]]`.
    pub fn system_matrix(&self) -> CMatrix {
        block2(&self.a, &self.b, &self.c, &self.d)
    }

    fn require(&self, flavor: Flavor) -> Result<()> {
        if self.flavor == flavor {
            Ok(())
        } else {
            Err(Error::FlavorMismatch { expected: flavor, found: self.flavor })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Residuals {
    /// `‖A + A* + C*C‖`, `‖D*D - I‖`, `‖B + C*D‖`.
    Dissipative { dissipative: f64, feedthrough_unitarity: f64, coupling: f64 },
    /// `‖S*S - I‖` for the system matrix `S`.
    Unitary { system_unitarity: f64 },
}

impl Residuals {
    pub fn max(&self) -> f64 {
        match *self {
            Residuals::Dissipative { dissipative, feedthrough_unitarity, coupling } => {
                dissipative.max(feedthrough_unitarity).max(coupling)
            }
            Residuals::Unitary { system_unitarity } => system_unitarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub stable: bool,
    /// Max real part of the spectrum (continuous) or spectral radius (discrete).
    pub spectral_bound: f64,
    /// Stable, but within [`MARGINAL_BAND`] of the boundary.
    pub near_marginal: bool,
    pub residuals: Residuals,
    pub tolerance: f64,
    pub verdict: bool,
}

impl ValidationReport {
    fn new(stable: bool, spectral_bound: f64, near_marginal: bool, residuals: Residuals, tolerance: f64) -> Self {
        let verdict = stable && residuals.max() <= tolerance;
        Self { stable, spectral_bound, near_marginal, residuals, tolerance, verdict }
    }

    pub fn summary(&self) -> String {
        format!(
            "stable={} bound={:.3e} residuals={:?} tol={:e}",
            self.stable, self.spectral_bound, self.residuals, self.tolerance
        )
    }
}

/// Checks the stable dissipative conditions: `A` Hurwitz, `A + A* + C*C = 0`,
/// `D` unitary and `B = -C*D`.
pub fn validate_stable_dissipative(r: &Realization) -> Result<ValidationReport> {
    validate_stable_dissipative_with(r, VALIDATION_TOL)
}

pub fn validate_stable_dissipative_with(r: &Realization, tol: f64) -> Result<ValidationReport> {
    r.require(Flavor::Continuous)?;
    let n = r.state_dim();
    let m = r.io_dim();
    let abscissa = linalg::eigenvalues(&r.a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let stable = n == 0 || abscissa < 0.0;
    let near_marginal = stable && n > 0 && abscissa > -MARGINAL_BAND;
    let cc = r.c.adjoint() * &r.c;
    let residuals = Residuals::Dissipative {
        dissipative: op_norm(&(&r.a + r.a.adjoint() + cc)),
        feedthrough_unitarity: op_norm(&(r.d.adjoint() * &r.d - identity(m))),
        coupling: op_norm(&(&r.b + r.c.adjoint() * &r.d)),
    };
    Ok(ValidationReport::new(stable, abscissa, near_marginal, residuals, tol))
}

/// Checks the stable unitary conditions: `A` Schur-stable and the system
/// matrix unitary.
pub fn validate_stable_unitary(r: &Realization) -> Result<ValidationReport> {
    validate_stable_unitary_with(r, VALIDATION_TOL)
}

pub fn validate_stable_unitary_with(r: &Realization, tol: f64) -> Result<ValidationReport> {
    r.require(Flavor::Discrete)?;
    let n = r.state_dim();
    let radius = linalg::spectral_radius(&r.a);
    let stable = n == 0 || radius < 1.0;
    let near_marginal = stable && n > 0 && radius > 1.0 - MARGINAL_BAND;
    let s = r.system_matrix();
    let k = s.nrows();
    let residuals = Residuals::Unitary { system_unitarity: op_norm(&(s.adjoint() * &s - identity(k))) };
    Ok(ValidationReport::new(stable, radius, near_marginal, residuals, tol))
}

/// Evaluates the transfer function at `s` (continuous) or `z` (discrete).
pub fn eval_transfer(r: &Realization, s: Complex64) -> Result<CMatrix> {
    let n = r.state_dim();
    if n == 0 {
        return Ok(r.d.clone());
    }
    let one = identity(n);
    let (resolvent, scale) = match r.flavor {
        Flavor::Continuous => (one * s - &r.a, Complex64::new(1.0, 0.0)),
        Flavor::Discrete => {
            if s == Complex64::new(0.0, 0.0) {
                return Ok(r.d.clone());
            }
            (one - &r.a * s, s)
        }
    };
    let cond = condition(&resolvent);
    if !(cond <= SINGULAR_CONDITION) {
        return Err(Error::EvaluationAtPole { condition: cond });
    }
    let lu = resolvent.lu();
    let x = lu.solve(&r.b).ok_or(Error::EvaluationAtPole { condition: cond })?;
    Ok(&r.d + &r.c * x * scale)
}

/// Block-diagonal combination `Θ1 ⊕ Θ2`.
pub fn direct_sum(r1: &Realization, r2: &Realization) -> Result<Realization> {
    if r1.flavor != r2.flavor {
        return Err(Error::FlavorMismatch { expected: r1.flavor, found: r2.flavor });
    }
    Realization::new(
        block_diag(&r1.a, &r2.a),
        block_diag(&r1.b, &r2.b),
        block_diag(&r1.c, &r2.c),
        block_diag(&r1.d, &r2.d),
        r1.flavor,
    )
}

/// Realization of the product `Θ_outer · Θ_inner`, state ordered `[outer; inner]`.
pub fn cascade(outer: &Realization, inner: &Realization) -> Result<Realization> {
    outer.require(Flavor::Continuous)?;
    inner.require(Flavor::Continuous)?;
    if outer.io_dim() != inner.io_dim() {
        return Err(Error::Dimension(format!(
            "cascade of {0}x{0} and {1}x{1} functions",
            outer.io_dim(),
            inner.io_dim()
        )));
    }
    let n2 = outer.state_dim();
    let n1 = inner.state_dim();
    let a = block2(&outer.a, &(&outer.b * &inner.c), &linalg::zeros(n1, n2), &inner.a);
    let b = CMatrix::from_fn(n2 + n1, inner.io_dim(), |i, j| {
        if i < n2 {
            (&outer.b * &inner.d)[(i, j)]
        } else {
            inner.b[(i - n2, j)]
        }
    });
    let d2c1 = &outer.d * &inner.c;
    let c = CMatrix::from_fn(outer.io_dim(), n2 + n1, |i, j| if j < n2 { outer.c[(i, j)] } else { d2c1[(i, j - n2)] });
    Realization::continuous(a, b, c, &outer.d * &inner.d)
}

/// Multiplies by a constant unitary: `UΘ` (left) or `ΘU` (right).
pub fn unitary_twist(r: &Realization, u: &CMatrix, side: Side) -> Result<Realization> {
    unitary_twist_with(r, u, side, VALIDATION_TOL)
}

pub fn unitary_twist_with(r: &Realization, u: &CMatrix, side: Side, tol: f64) -> Result<Realization> {
    let m = r.io_dim();
    if u.shape() != (m, m) {
        return Err(Error::Dimension(format!("twist is {:?}, expected {m}x{m}", u.shape())));
    }
    let residual = op_norm(&(u.adjoint() * u - identity(m)));
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    match side {
        Side::Left => Realization::new(r.a.clone(), r.b.clone(), u * &r.c, u * &r.d, r.flavor),
        Side::Right => Realization::new(r.a.clone(), &r.b * u, r.c.clone(), &r.d * u, r.flavor),
    }
}

/// Factors `V` and `W` of `R = V W*`, both continuous, sharing the
/// coefficient space.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPair {
    v: Realization,
    w: Realization,
}

impl SymbolPair {
    pub fn new(v: Realization, w: Realization) -> Result<Self> {
        v.require(Flavor::Continuous)?;
        w.require(Flavor::Continuous)?;
        if v.io_dim() != w.io_dim() {
            return Err(Error::Dimension(format!(
                "factors act on spaces of size {} and {}",
                v.io_dim(),
                w.io_dim()
            )));
        }
        Ok(Self { v, w })
    }

    pub fn v(&self) -> &Realization {
        &self.v
    }
    pub fn w(&self) -> &Realization {
        &self.w
    }
    pub fn size(&self) -> usize {
        self.v.io_dim()
    }

    /// The pair `(W, V)` whose symbol is `R*`.
    pub fn swapped(&self) -> SymbolPair {
        SymbolPair { v: self.w.clone(), w: self.v.clone() }
    }

    /// `R(s) = V(s) W(-s̄)*`.
    pub fn eval_symbol(&self, s: Complex64) -> Result<CMatrix> {
        let v = eval_transfer(&self.v, s)?;
        let w = eval_transfer(&self.w, -s.conj())?;
        Ok(v * w.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, real};

    fn scalar(a: f64, b: f64, c: f64, d: f64) -> Realization {
        Realization::continuous(
            from_real_rows(&[&[a]]),
            from_real_rows(&[&[b]]),
            from_real_rows(&[&[c]]),
            from_real_rows(&[&[d]]),
        )
        .unwrap()
    }

    fn zeta_block() -> Realization {
        let r2 = std::f64::consts::SQRT_2;
        scalar(-1.0, r2, r2, -1.0)
    }

    #[test]
    fn shapes_are_checked() {
        let err = Realization::continuous(identity(2), linalg::zeros(2, 1), linalg::zeros(2, 2), identity(1));
        assert!(matches!(err, Err(Error::Dimension(_))));
        let err = Realization::continuous(linalg::zeros(2, 3), linalg::zeros(2, 1), linalg::zeros(1, 2), identity(1));
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn unstable_state_map_fails() {
        let rep = validate_stable_dissipative(&scalar(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(!rep.stable);
        assert!(!rep.verdict);
    }

    #[test]
    fn non_unitary_feedthrough_residual() {
        let r2 = std::f64::consts::SQRT_2;
        let rep = validate_stable_dissipative(&scalar(-1.0, -r2, r2, 2.0)).unwrap();
        match rep.residuals {
            Residuals::Dissipative { feedthrough_unitarity, .. } => {
                assert!((feedthrough_unitarity - 3.0).abs() < 1e-12)
            }
            _ => unreachable!(),
        }
        assert!(!rep.verdict);
    }

    #[test]
    fn zeta_block_is_stable_dissipative() {
        let rep = validate_stable_dissipative(&zeta_block()).unwrap();
        assert!(rep.verdict, "{}", rep.summary());
        assert!(!rep.near_marginal);
    }

    #[test]
    fn near_marginal_flag() {
        let rep = validate_stable_dissipative(&scalar(-1e-11, 0.0, 0.0, 1.0)).unwrap();
        assert!(rep.stable && rep.near_marginal);
    }

    #[test]
    fn shift_is_stable_unitary() {
        let r = Realization::discrete(
            from_real_rows(&[&[0.0]]),
            from_real_rows(&[&[1.0]]),
            from_real_rows(&[&[1.0]]),
            from_real_rows(&[&[0.0]]),
        )
        .unwrap();
        assert!(validate_stable_unitary(&r).unwrap().verdict);
        let z = eval_transfer(&r, real(0.3)).unwrap();
        assert!((z[(0, 0)] - real(0.3)).norm() < 1e-15);
        assert_eq!(eval_transfer(&r, real(0.0)).unwrap()[(0, 0)], real(0.0));
    }

    #[test]
    fn outside_disk_is_unstable() {
        let r = Realization::discrete(
            from_real_rows(&[&[2.0]]),
            from_real_rows(&[&[0.0]]),
            from_real_rows(&[&[0.0]]),
            from_real_rows(&[&[1.0]]),
        )
        .unwrap();
        assert!(!validate_stable_unitary(&r).unwrap().stable);
    }

    #[test]
    fn flavor_is_enforced() {
        let r = Realization::constant(identity(1), Flavor::Discrete).unwrap();
        assert!(matches!(validate_stable_dissipative(&r), Err(Error::FlavorMismatch { .. })));
        let c = Realization::constant(identity(1), Flavor::Continuous).unwrap();
        assert!(matches!(direct_sum(&r, &c), Err(Error::FlavorMismatch { .. })));
    }

    #[test]
    fn evaluation_at_pole() {
        assert!(matches!(
            eval_transfer(&zeta_block(), real(-1.0)),
            Err(Error::EvaluationAtPole { .. })
        ));
    }

    #[test]
    fn direct_sum_of_constants() {
        let one = Realization::constant(identity(1), Flavor::Continuous).unwrap();
        let s = direct_sum(&one, &one).unwrap();
        assert_eq!(s.state_dim(), 0);
        assert_eq!(s.d(), &identity(2));
    }

    #[test]
    fn cascade_of_zeta_blocks_vanishes_at_one() {
        let z2 = cascade(&zeta_block(), &zeta_block()).unwrap();
        assert!(eval_transfer(&z2, real(1.0)).unwrap()[(0, 0)].norm() < 1e-14);
        assert!(validate_stable_dissipative(&z2).unwrap().verdict);
        assert!(matches!(
            cascade(&zeta_block(), &direct_sum(&zeta_block(), &zeta_block()).unwrap()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn identity_twist_is_noop() {
        let r = zeta_block();
        for side in [Side::Left, Side::Right] {
            let t = unitary_twist(&r, &identity(1), side).unwrap();
            assert!(t.max_diff(&r) == 0.0);
        }
        assert!(matches!(
            unitary_twist(&r, &from_real_rows(&[&[2.0]]), Side::Left),
            Err(Error::NotUnitary { .. })
        ));
    }
}
