//! Scalar Blaschke products, polynomials, and the realization builders
//! for inner functions.
//!
//! A Blaschke product of degree `n` is `b(s) = ρ Π (s + ᾱ_k)/(s - α_k)`
//! with `|ρ| = 1` and every pole `α_k` in the open left half plane. For a
//! stable dissipative `A`, evaluating `b` at `-A` gives a contraction whose
//! defect rank is `min(deg b, dim A)` when `A + A*` has rank one.

use num_complex::Complex64;

use crate::equations::CLUSTER_TOL;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, op_norm, real, CMatrix, CVector};
use crate::realization::{cascade, direct_sum, Flavor, Realization, SymbolPair};

const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeSpec {
    rho: Complex64,
    poles: Vec<Complex64>,
}

impl BlaschkeSpec {
    pub fn new(rho: Complex64, poles: Vec<Complex64>) -> Result<Self> {
        if (rho.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::InvalidSpec(format!("|rho| = {} is not 1", rho.norm())));
        }
        if let Some(p) = poles.iter().find(|p| !(p.re < 0.0)) {
            return Err(Error::InvalidSpec(format!("pole {p} is not in the open left half plane")));
        }
        Ok(Self { rho, poles })
    }

    /// The constant `ρ` (degree 0).
    pub fn constant(rho: Complex64) -> Result<Self> {
        Self::new(rho, Vec::new())
    }

    /// `ζ(s)^n = ((1 - s)/(1 + s))^n`.
    pub fn zeta_power(n: usize) -> Self {
        let rho = if n % 2 == 0 { real(1.0) } else { real(-1.0) };
        Self { rho, poles: vec![real(-1.0); n] }
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }
    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }
    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.poles.iter().fold(self.rho, |acc, a| acc * (s + a.conj()) / (s - a))
    }

    /// Holomorphic functional calculus `b(M) = ρ Π (M + ᾱ I)(M - α I)^{-1}`.
    pub fn eval_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if !m.is_square() {
            return Err(Error::Dimension("Blaschke evaluation needs a square matrix".into()));
        }
        let n = m.nrows();
        let mut out = identity(n) * self.rho;
        for a in &self.poles {
            let den = linalg::inverse(&(m - identity(n) * *a), "M - αI")?;
            out = out * (m + identity(n) * a.conj()) * den;
        }
        Ok(out)
    }

    /// Monic denominator `Π (s - α_k)`.
    pub fn denominator(&self) -> Polynomial {
        Polynomial::from_roots(&self.poles)
    }
}

/// Polynomial with complex coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::InvalidArgument("polynomial needs at least one coefficient".into())),
            Some(c) if *c == Complex64::new(0.0, 0.0) => {
                Err(Error::InvalidArgument("leading coefficient is zero".into()))
            }
            Some(_) => Ok(Self { coeffs }),
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| real(x)).collect())
    }

    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![real(1.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }

    /// `p♯(s) = conj(p(-s̄))`.
    pub fn sharp(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c.conj() } else { -c.conj() })
            .collect();
        Polynomial { coeffs }
    }
}

pub fn p_sharp(p: &Polynomial) -> Polynomial {
    p.sharp()
}

/// Horner evaluation `Σ c_k M^k`.
pub fn poly_of_matrix(p: &Polynomial, m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("polynomial evaluation needs a square matrix".into()));
    }
    let n = m.nrows();
    Ok(p.coeffs.iter().rev().fold(linalg::zeros(n, n), |acc, c| acc * m + identity(n) * *c))
}

/// `φ(-A) = p♯(-A) p(-A)^{-1}` for `φ = p♯/p`.
pub fn blaschke_of_minus_a(p: &Polynomial, a: &CMatrix) -> Result<CMatrix> {
    let minus_a = -a;
    let num = poly_of_matrix(&p.sharp(), &minus_a)?;
    let den = linalg::inverse(&poly_of_matrix(p, &minus_a)?, "p(-A)")?;
    Ok(num * den)
}

/// Rank of `I - M*M` at `tol`, for a contraction `M`.
pub fn defect_rank(m: &CMatrix, tol: f64) -> Result<usize> {
    let norm = op_norm(m);
    if norm > 1.0 + tol {
        return Err(Error::ContractionViolation { eigenvalue: norm });
    }
    let n = m.ncols();
    let defect = identity(n) - m.adjoint() * m;
    Ok(linalg::hermitian_eigenvalues(&defect).into_iter().filter(|&l| l > tol).count())
}

/// Stable dissipative realization of `ζ(s)^n`, the Cayley image of the
/// shift realization of `z^n`:
///
/// ```text
/// A = -I + 2 Σ_{j≥1} (-1)^{j+1} J^j,  B = √2 (I+J)^{-1} e_n,
/// C = √2 e_1ᵀ (I+J)^{-1},             D = (-1)^n
/// ```
///
/// with `J` the upward shift.
pub fn zeta_power_realization(n: usize) -> Result<Realization> {
    if n == 0 {
        return Err(Error::InvalidArgument("zeta power must be at least 1".into()));
    }
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let r2 = std::f64::consts::SQRT_2;
    let a = CMatrix::from_fn(n, n, |i, k| match k.cmp(&i) {
        std::cmp::Ordering::Less => real(0.0),
        std::cmp::Ordering::Equal => real(-1.0),
        std::cmp::Ordering::Greater => real(-2.0 * sign(k - i)),
    });
    let b = CMatrix::from_fn(n, 1, |i, _| real(r2 * sign(n - 1 - i)));
    let c = CMatrix::from_fn(1, n, |_, j| real(r2 * sign(j)));
    let d = CMatrix::from_element(1, 1, real(sign(n)));
    Realization::continuous(a, b, c, d)
}

/// First-order section realizing `(s + ᾱ)/(s - α)`.
fn section(alpha: Complex64) -> Result<Realization> {
    let g = (-2.0 * alpha.re).sqrt();
    Realization::continuous(
        CMatrix::from_element(1, 1, alpha),
        CMatrix::from_element(1, 1, real(-g)),
        CMatrix::from_element(1, 1, real(g)),
        CMatrix::from_element(1, 1, real(1.0)),
    )
}

/// Cascade of balanced first-order sections; `ρ` sits in the outermost one.
pub fn blaschke_realization(spec: &BlaschkeSpec) -> Result<Realization> {
    let rho = CMatrix::from_element(1, 1, spec.rho);
    let Some((last, rest)) = spec.poles.split_last() else {
        return Realization::constant(rho, Flavor::Continuous);
    };
    let mut acc: Option<Realization> = None;
    for &alpha in rest {
        let s = section(alpha)?;
        acc = Some(match acc {
            None => s,
            Some(inner) => cascade(&s, &inner)?,
        });
    }
    let (a, b, c, d, _) = section(*last)?.into_parts();
    let outer = Realization::continuous(a, b, &rho * c, &rho * d)?;
    match acc {
        None => Ok(outer),
        Some(inner) => cascade(&outer, &inner),
    }
}

/// Factors `V`, `W` of `diag(ζ^{p_1}, ..., ζ^{p_m}) = V W*`: positive
/// powers go to `V`, negative ones to `W`, identity blocks elsewhere.
pub fn diagonal_symbol_factors(powers: &[i32]) -> Result<SymbolPair> {
    let one = Realization::constant(identity(1), Flavor::Continuous)?;
    let block = |p: i32| -> Result<Realization> {
        if p > 0 {
            zeta_power_realization(p as usize)
        } else {
            Ok(one.clone())
        }
    };
    let mut v = Realization::constant(identity(0), Flavor::Continuous)?;
    let mut w = v.clone();
    for &p in powers {
        v = direct_sum(&v, &block(p)?)?;
        w = direct_sum(&w, &block(-p)?)?;
    }
    SymbolPair::new(v, w)
}

/// Unit vector `x` with `φ(-A*)* φ(-A*) x = x`; exists when `deg φ < dim A`
/// and `A + A*` has rank one.
pub fn unit_eigenvector(a: &CMatrix, phi: &BlaschkeSpec, tol: f64) -> Result<CVector> {
    let f = phi.eval_matrix(&(-a.adjoint()))?;
    let (values, vectors) = linalg::hermitian_eigen(&(f.adjoint() * &f));
    match values.last() {
        Some(&top) if top >= 1.0 - tol => Ok(vectors.column(values.len() - 1).into_owned()),
        Some(&top) => Err(Error::Precondition(format!("largest eigenvalue {top} is not 1"))),
        None => Err(Error::Precondition("empty state space".into())),
    }
}

/// Recovers `φ(s)` as `C(sI - A)^{-1} φ(-A*) x / C(sI - A)^{-1} x`.
pub fn recover_blaschke_pointwise(
    a: &CMatrix,
    c: &CMatrix,
    phi: &BlaschkeSpec,
    x: &CVector,
    s: Complex64,
) -> Result<Complex64> {
    let n = a.nrows();
    if !a.is_square() || c.shape() != (1, n) || x.len() != n {
        return Err(Error::Dimension("recovery needs A n x n, C 1 x n, x of length n".into()));
    }
    if phi.degree() >= n {
        return Err(Error::Precondition(format!("deg φ = {} is not below dim A = {n}", phi.degree())));
    }
    let dissipation = op_norm(&(a + a.adjoint() + c.adjoint() * c));
    if dissipation > 1e-8 {
        return Err(Error::Precondition(format!("A + A* + C*C has norm {dissipation:e}")));
    }
    let xnorm = x.norm();
    if xnorm == 0.0 {
        return Err(Error::Precondition("x is zero".into()));
    }
    let f = phi.eval_matrix(&(-a.adjoint()))?;
    let fx = &f * x;
    let drift = (f.adjoint() * &fx - x).norm();
    if drift > CLUSTER_TOL * xnorm.max(1.0) {
        return Err(Error::Precondition(format!("x is not a unit eigenvector (drift {drift:e})")));
    }
    let resolvent = identity(n) * s - a;
    let cond = linalg::condition(&resolvent);
    if !(cond <= linalg::SINGULAR_CONDITION) {
        return Err(Error::EvaluationAtPole { condition: cond });
    }
    let lu = resolvent.lu();
    let apply = |v: &CVector| -> Result<Complex64> {
        let y = lu.solve(v).ok_or(Error::EvaluationAtPole { condition: cond })?;
        Ok((c * y)[(0, 0)])
    };
    let num = apply(&fx)?;
    let den = apply(x)?;
    if den.norm() <= 1e-14 * (1.0 + num.norm()) {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::realization::{eval_transfer, validate_stable_dissipative};

    fn zeta(s: Complex64) -> Complex64 {
        (1.0 - s) / (1.0 + s)
    }

    fn scalar(r: &Realization, s: Complex64) -> Complex64 {
        eval_transfer(r, s).unwrap()[(0, 0)]
    }

    #[test]
    fn zeta_block() {
        let r = zeta_power_realization(1).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert_eq!(r.a()[(0, 0)], real(-1.0));
        assert!((r.b()[(0, 0)] - real(r2)).norm() < 1e-15);
        assert!((r.c()[(0, 0)] - real(r2)).norm() < 1e-15);
        assert_eq!(r.d()[(0, 0)], real(-1.0));
        assert!(matches!(zeta_power_realization(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zeta_powers_match_closed_form() {
        for n in 1..=6 {
            let r = zeta_power_realization(n).unwrap();
            assert!(validate_stable_dissipative(&r).unwrap().verdict, "n = {n}");
            for s in [c(0.3, 1.7), c(2.0, -0.5), c(0.0, 4.0), real(1.0)] {
                let expected = zeta(s).powi(n as i32);
                assert!((scalar(&r, s) - expected).norm() < 1e-10, "n = {n}, s = {s}");
            }
        }
        assert!(scalar(&zeta_power_realization(2).unwrap(), real(1.0)).norm() < 1e-12);
    }

    #[test]
    fn zeta_four_is_unimodular_on_axis() {
        let r = zeta_power_realization(4).unwrap();
        for w in [-7.0, -1.0, -0.1, 0.0, 0.4, 2.5, 30.0] {
            assert!((scalar(&r, c(0.0, w)).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn blaschke_builder() {
        let spec = BlaschkeSpec::new(real(-1.0), vec![real(-1.0)]).unwrap();
        let r = blaschke_realization(&spec).unwrap();
        let z = zeta_power_realization(1).unwrap();
        for s in [c(0.5, 0.5), c(3.0, -2.0), c(0.1, 9.0)] {
            assert!((scalar(&r, s) - zeta(s)).norm() < 1e-10);
            assert!((scalar(&r, s) - scalar(&z, s)).norm() < 1e-10);
        }

        let spec = BlaschkeSpec::new(real(1.0), vec![real(-1.0), c(-2.0, 1.0)]).unwrap();
        let r = blaschke_realization(&spec).unwrap();
        assert_eq!(r.state_dim(), 2);
        assert!(validate_stable_dissipative(&r).unwrap().verdict);
        for w in [-5.0, -0.3, 0.0, 1.1, 8.0] {
            let s = c(0.0, w);
            assert!((scalar(&r, s).norm() - 1.0).abs() < 1e-10);
            assert!((scalar(&r, s) - spec.eval(s)).norm() < 1e-10);
        }

        let constant = blaschke_realization(&BlaschkeSpec::constant(c(0.0, 1.0)).unwrap()).unwrap();
        assert_eq!(constant.state_dim(), 0);
        assert_eq!(scalar(&constant, c(1.0, 1.0)), c(0.0, 1.0));
    }

    #[test]
    fn spec_validation() {
        assert!(BlaschkeSpec::new(real(2.0), vec![]).is_err());
        assert!(BlaschkeSpec::new(real(1.0), vec![c(0.0, 1.0)]).is_err());
        assert!(BlaschkeSpec::new(real(1.0), vec![c(0.5, 0.0)]).is_err());
        assert!(Polynomial::new(vec![]).is_err());
        assert!(Polynomial::from_real(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn worked_example_factors() {
        let pair = diagonal_symbol_factors(&[-4, -2, 0, 3, 5]).unwrap();
        assert_eq!(pair.size(), 5);
        assert_eq!(pair.w().state_dim(), 6);
        assert_eq!(pair.v().state_dim(), 8);
        let s = c(0.7, -0.2);
        let r = pair.eval_symbol(s).unwrap();
        for (k, p) in [-4, -2, 0, 3, 5].into_iter().enumerate() {
            assert!((r[(k, k)] - zeta(s).powi(p)).norm() < 1e-10);
        }
    }

    #[test]
    fn sharp_and_horner() {
        let p = Polynomial::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(p.sharp().coeffs(), &[real(1.0), real(-1.0)]);
        let p = Polynomial::new(vec![c(1.0, 2.0), c(0.0, 1.0), real(3.0)]).unwrap();
        let s = c(0.4, -1.3);
        assert!((p.sharp().eval(s) - p.eval(-s.conj()).conj()).norm() < 1e-12);
        assert_eq!(p_sharp(&p), p.sharp());

        let m = linalg::from_real_rows(&[&[1.0, 2.0], &[0.0, 3.0]]);
        let quad = Polynomial::from_real(&[1.0, 0.0, 1.0]).unwrap();
        let expected = linalg::from_real_rows(&[&[2.0, 8.0], &[0.0, 10.0]]);
        assert!(linalg::max_abs_diff(&poly_of_matrix(&quad, &m).unwrap(), &expected) < 1e-14);
    }

    #[test]
    fn zeta_via_polynomial() {
        let a = zeta_power_realization(3).unwrap().a().clone();
        let p = Polynomial::from_real(&[1.0, 1.0]).unwrap();
        let lhs = blaschke_of_minus_a(&p, &a).unwrap();
        let rhs = crate::equations::zeta_of_minus(&a).unwrap();
        assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn defect_rank_law_on_zeta_three() {
        let a = zeta_power_realization(3).unwrap().a().clone();
        let two = Polynomial::from_roots(&[c(-1.0, 1.0), real(-0.5)]);
        let five = Polynomial::from_roots(&[real(-1.0), real(-2.0), c(-0.3, 2.0), c(-1.0, -1.0), real(-4.0)]);
        assert_eq!(defect_rank(&blaschke_of_minus_a(&two, &a).unwrap(), CLUSTER_TOL).unwrap(), 2);
        assert_eq!(defect_rank(&blaschke_of_minus_a(&five, &a).unwrap(), CLUSTER_TOL).unwrap(), 3);
        assert!(matches!(defect_rank(&(identity(2) * real(2.0)), CLUSTER_TOL), Err(Error::ContractionViolation { .. })));
    }

    #[test]
    fn recovery_formula() {
        let r = zeta_power_realization(3).unwrap();
        let phi = BlaschkeSpec::new(c(0.0, 1.0), vec![c(-0.5, 1.0), real(-2.0)]).unwrap();
        let x = unit_eigenvector(r.a(), &phi, CLUSTER_TOL).unwrap();
        for s in [c(0.3, 0.2), c(1.0, -3.0), c(4.0, 0.0)] {
            let got = recover_blaschke_pointwise(r.a(), r.c(), &phi, &x, s).unwrap();
            assert!((got - phi.eval(s)).norm() < 1e-8, "s = {s}");
        }
        let too_big = BlaschkeSpec::new(real(1.0), vec![real(-1.0); 3]).unwrap();
        assert!(matches!(
            recover_blaschke_pointwise(r.a(), r.c(), &too_big, &x, real(1.0)),
            Err(Error::Precondition(_))
        ));
        let zero = CVector::zeros(3);
        assert!(recover_blaschke_pointwise(r.a(), r.c(), &phi, &zero, real(1.0)).is_err());
    }
}
