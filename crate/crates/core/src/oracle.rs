//! Ground truth that does not go through the Lyapunov machinery:
//! argument-principle winding numbers, companion-matrix root location,
//! and the operator Schur-Cohen test built on the `ζ^n` realization.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::blaschke::{poly_of_matrix, zeta_power_realization, BlaschkeSpec, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

const INITIAL_SAMPLES: usize = 4096;
const MAX_SAMPLES: usize = 1 << 20;
const ROOT_MARGIN: f64 = 1e-9;
const PSD_RELATIVE: f64 = 1e-9;

/// Total phase change of `R(iω) = φ(iω) conj(m(iω))` along the boundary,
/// traversed with the right half plane on the left (ω from +∞ to -∞).
/// Returns the rounded winding number and the largest phase step.
fn phase_winding(phi: &BlaschkeSpec, m: &BlaschkeSpec, samples: usize) -> (f64, f64) {
    let at_infinity = phi.rho() * m.rho().conj();
    let value = |k: usize| -> Complex64 {
        if k == 0 || k == samples {
            return at_infinity;
        }
        let theta = PI - 2.0 * PI * k as f64 / samples as f64;
        let s = Complex64::new(0.0, (theta / 2.0).tan());
        phi.eval(s) * m.eval(s).conj()
    };
    let mut total = 0.0;
    let mut largest: f64 = 0.0;
    let mut prev = value(0);
    for k in 1..=samples {
        let next = value(k);
        let step = (next / prev).arg();
        largest = largest.max(step.abs());
        total += step;
        prev = next;
    }
    (total / (2.0 * PI), largest)
}

/// Winding number of `φ m̄` about the origin along the imaginary axis.
pub fn winding_number(phi: &BlaschkeSpec, m: &BlaschkeSpec) -> Result<i64> {
    let mut samples = INITIAL_SAMPLES;
    let mut history: Vec<i64> = Vec::new();
    loop {
        let (turns, largest) = phase_winding(phi, m, samples);
        if largest < PI / 2.0 {
            history.push(turns.round() as i64);
            if let [.., a, b, c] = history[..] {
                if a == b && b == c {
                    return Ok(c);
                }
            }
        } else {
            history.clear();
        }
        if samples >= MAX_SAMPLES {
            return Err(Error::Resolution { samples });
        }
        samples *= 2;
    }
}

fn companion(p: &Polynomial) -> CMatrix {
    let n = p.degree();
    let coeffs = p.coeffs();
    let lead = coeffs[n];
    CMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -coeffs[n - 1 - j] / lead
        } else if i == j + 1 {
            linalg::real(1.0)
        } else {
            linalg::real(0.0)
        }
    })
}

fn require_degree(p: &Polynomial) -> Result<()> {
    if p.degree() == 0 {
        return Err(Error::Precondition("polynomial must have degree at least 1".into()));
    }
    Ok(())
}

/// Roots of `p`, from the eigenvalues of its companion matrix.
pub fn roots(p: &Polynomial) -> Vec<Complex64> {
    if p.degree() == 0 {
        return Vec::new();
    }
    linalg::eigenvalues(&companion(p))
}

/// True iff every root of `p` has real part below `-1e-9`.
pub fn roots_stable(p: &Polynomial) -> Result<bool> {
    require_degree(p)?;
    Ok(roots(p).iter().all(|r| r.re < -ROOT_MARGIN))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCohen {
    pub stable: bool,
    /// Smallest eigenvalue of `G`.
    pub lambda_min: f64,
    pub g_norm: f64,
    /// Smallest eigenvalue of `I - Φ*Φ`, `Φ = p♯(-A) p(-A)^{-1}`; `None`
    /// when `p(-A)` is numerically singular.
    pub defect_min: Option<f64>,
}

/// Operator Schur-Cohen test: with `A` the `ζ^n` state matrix,
/// `p` is stable iff `G = p(-A)* p(-A) - p♯(-A)* p♯(-A)` is positive definite.
///
/// `G` is typically far more ill-conditioned than its inertia: for degree 8
/// `λ_min(G)/‖G‖` can sit near `1e-14` with every root a distance `0.3`
/// from the axis. The verdict is therefore read from the congruent form
/// `G = P*(I - Φ*Φ)P`, which has the same inertia when `P = p(-A)` is
/// invertible, and is positive iff `λ_min(I - Φ*Φ) > 1e-9 ‖I - Φ*Φ‖`.
pub fn schur_cohen_stable(p: &Polynomial) -> Result<SchurCohen> {
    require_degree(p)?;
    let n = p.degree();
    let minus_a = -zeta_power_realization(n)?.a().clone();
    let pa = poly_of_matrix(p, &minus_a)?;
    let sa = poly_of_matrix(&p.sharp(), &minus_a)?;
    let g = linalg::hermitize(&(pa.adjoint() * &pa - sa.adjoint() * &sa));
    let lambda_min = linalg::hermitian_eigenvalues(&g).first().copied().unwrap_or(0.0);
    let g_norm = linalg::op_norm(&g);

    let defect_min = match linalg::inverse(&pa, "p(-A)") {
        Err(Error::Singular { .. }) => None,
        Err(e) => return Err(e),
        Ok(pinv) => {
            let phi = sa * pinv;
            let h = linalg::hermitize(&(linalg::identity(n) - phi.adjoint() * &phi));
            let low = linalg::hermitian_eigenvalues(&h)[0];
            Some((low, linalg::op_norm(&h)))
        }
    };
    let stable = matches!(defect_min, Some((low, norm)) if low > PSD_RELATIVE * norm);
    Ok(SchurCohen { stable, lambda_min, g_norm, defect_min: defect_min.map(|(low, _)| low) })
}
