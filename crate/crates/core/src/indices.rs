//! Partial-index pipelines.
//!
//! For `R = V W*` with stable dissipative realizations of `V` and `W`:
//!
//! ```text
//! A_v Ω + Ω A_w* + B_v B_w* = 0
//! C∘ = D_v B_w* + C_v Ω
//! A_w Q + Q A_w* + C∘* C∘ = 0
//! ```
//!
//! `Q` is a positive contraction and the kernel dimensions of
//! `I - M^k Q M*^k`, `M = ζ(-A_w)`, equal `n(T_{ζ^k R})`. Their successive
//! differences `μ_k` count the negative indices at least `k`, and
//! `κ_j = #{k : μ_k ≥ j}`. The positive indices come from the same
//! pipeline applied to `R* = W V*`.

use crate::equations::{self, eigenvalue_one_multiplicity, solve_stein, solve_sylvester, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitize, CMatrix};
use crate::realization::{
    validate_stable_dissipative_with, validate_stable_unitary_with, Realization, SymbolPair, VALIDATION_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Clustering tolerance for eigenvalue 1.
    pub cluster: f64,
    /// Tolerance for the realization validity checks.
    pub validation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { cluster: CLUSTER_TOL, validation: VALIDATION_TOL }
    }
}

impl From<f64> for Tolerances {
    fn from(cluster: f64) -> Self {
        Self { cluster, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceResiduals {
    pub omega: f64,
    pub q: f64,
}

/// Intermediate matrices of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTrace {
    pub omega: CMatrix,
    pub c_circ: CMatrix,
    pub q: CMatrix,
    /// `dim ker(I - M^k Q M*^k)` for `k = 0, 1, ...` down to 0.
    pub kernel_dims: Vec<usize>,
    pub residuals: TraceResiduals,
    /// Spectrum of `Q`, ascending.
    pub q_eigenvalues: Vec<f64>,
}

/// One side of the profile: the trace, the differences `μ_k` and the
/// index magnitudes in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SideProfile {
    pub trace: PipelineTrace,
    pub steps: Vec<usize>,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub name: &'static str,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    /// Distance of the nearest eigenvalue to the clustering threshold.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexProfile {
    /// `κ_1 ≥ ... ≥ κ_p`; the indices are `-κ_j`.
    pub negative: Vec<usize>,
    /// `ω_1 ≥ ... ≥ ω_q`.
    pub positive: Vec<usize>,
    pub zeros: usize,
    pub mu: Vec<usize>,
    pub nu: Vec<usize>,
    /// All `m` indices, ascending.
    pub all_indices: Vec<i64>,
    pub negative_trace: PipelineTrace,
    pub positive_trace: PipelineTrace,
    /// `max |Ω_* - Ω*|`.
    pub dual_omega_gap: f64,
    pub cross_checks: Vec<CrossCheck>,
    pub warnings: Vec<String>,
}

/// `μ_k = dims[k-1] - dims[k]` and `κ_j = #{k : μ_k ≥ j}`.
pub fn counts_from_kernel_dims(kernel_dims: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let steps: Vec<usize> = kernel_dims.windows(2).map(|w| w[0].saturating_sub(w[1])).collect();
    let top = steps.iter().copied().max().unwrap_or(0);
    let indices = (1..=top).map(|j| steps.iter().filter(|&&s| s >= j).count()).collect();
    (steps, indices)
}

/// Kernel dimensions of `I - M^k Q M*^k` until they vanish.
pub fn kernel_sequence(m: &CMatrix, q: &CMatrix, tol: f64) -> Result<Vec<usize>> {
    let cap = q.nrows() + 1;
    let mut x = q.clone();
    let mut dims = Vec::new();
    loop {
        let count = eigenvalue_one_multiplicity(&x, tol)?.count;
        if dims.last().is_some_and(|&prev| count > prev) {
            dims.push(count);
            return Err(Error::KernelIncrease { kernel_dims: dims });
        }
        dims.push(count);
        if count == 0 {
            return Ok(dims);
        }
        if dims.len() > cap {
            return Err(Error::NonTermination { cap, kernel_dims: dims });
        }
        x = hermitize(&(m * &x * m.adjoint()));
    }
}

/// Second half of the continuous pipeline, from `C∘` onwards.
pub fn profile_from_c_circ(a_w: &CMatrix, omega: CMatrix, omega_residual: f64, c_circ: CMatrix, tol: f64) -> Result<SideProfile> {
    let gram = c_circ.adjoint() * &c_circ;
    let q_sol = solve_sylvester(a_w, &a_w.adjoint(), &gram)?;
    let q = hermitize(&q_sol.x);
    let m = equations::zeta_of_minus(a_w)?;
    finish(omega, omega_residual, c_circ, q, q_sol.residual, &m, tol)
}

fn finish(
    omega: CMatrix,
    omega_residual: f64,
    c_circ: CMatrix,
    q: CMatrix,
    q_residual: f64,
    m: &CMatrix,
    tol: f64,
) -> Result<SideProfile> {
    let spectrum = eigenvalue_one_multiplicity(&q, tol)?;
    if let Some(&low) = spectrum.eigenvalues.first() {
        if low < -tol {
            return Err(Error::ContractionViolation { eigenvalue: low });
        }
    }
    let kernel_dims = kernel_sequence(m, &q, tol)?;
    let (steps, indices) = counts_from_kernel_dims(&kernel_dims);
    let trace = PipelineTrace {
        omega,
        c_circ,
        q,
        kernel_dims,
        residuals: TraceResiduals { omega: omega_residual, q: q_residual },
        q_eigenvalues: spectrum.eigenvalues,
    };
    Ok(SideProfile { trace, steps, indices })
}

fn check_dissipative(r: &Realization, factor: &'static str, tol: f64) -> Result<()> {
    let report = validate_stable_dissipative_with(r, tol)?;
    if report.verdict {
        Ok(())
    } else {
        Err(Error::InvalidRealization { factor, detail: report.summary() })
    }
}

fn check_unitary(r: &Realization, factor: &'static str, tol: f64) -> Result<()> {
    let report = validate_stable_unitary_with(r, tol)?;
    if report.verdict {
        Ok(())
    } else {
        Err(Error::InvalidRealization { factor, detail: report.summary() })
    }
}

fn continuous_side(v: &Realization, w: &Realization, tol: f64) -> Result<SideProfile> {
    let rhs = v.b() * w.b().adjoint();
    let omega = solve_sylvester(v.a(), &w.a().adjoint(), &rhs)?;
    let c_circ = v.d() * w.b().adjoint() + v.c() * &omega.x;
    profile_from_c_circ(w.a(), omega.x, omega.residual, c_circ, tol)
}

/// Negative indices `-κ_j` of `R = V W*`.
pub fn negative_profile(pair: &SymbolPair, tol: impl Into<Tolerances>) -> Result<SideProfile> {
    let tol = tol.into();
    check_dissipative(pair.v(), "V", tol.validation)?;
    check_dissipative(pair.w(), "W", tol.validation)?;
    continuous_side(pair.v(), pair.w(), tol.cluster)
}

/// Positive indices `ω_j` of `R = V W*`, i.e. the negative side of `R* = W V*`.
pub fn positive_profile(pair: &SymbolPair, tol: impl Into<Tolerances>) -> Result<SideProfile> {
    let tol = tol.into();
    check_dissipative(pair.v(), "V", tol.validation)?;
    check_dissipative(pair.w(), "W", tol.validation)?;
    continuous_side(pair.w(), pair.v(), tol.cluster)
}

/// Negative indices from stable unitary (disk) realizations via Stein equations:
///
/// ```text
/// Ω_d = A_dv Ω_d A_dw* + B_dv B_dw*
/// C_d∘ = D_dv B_dw* + C_dv Ω_d A_dw*
/// Q_d = A_dw Q_d A_dw* + C_d∘* C_d∘
/// ```
///
/// with `M = A_dw`.
pub fn discrete_negative_profile(v: &Realization, w: &Realization, tol: impl Into<Tolerances>) -> Result<SideProfile> {
    let tol = tol.into();
    check_unitary(v, "V", tol.validation)?;
    check_unitary(w, "W", tol.validation)?;
    if v.io_dim() != w.io_dim() {
        return Err(Error::Dimension(format!("factors act on spaces of size {} and {}", v.io_dim(), w.io_dim())));
    }
    let a_w_adj = w.a().adjoint();
    let omega = solve_stein(v.a(), &a_w_adj, &(v.b() * w.b().adjoint()))?;
    let c_circ = v.d() * w.b().adjoint() + v.c() * &omega.x * &a_w_adj;
    let gram = c_circ.adjoint() * &c_circ;
    let q_sol = solve_stein(w.a(), &a_w_adj, &gram)?;
    let q = hermitize(&q_sol.x);
    finish(omega.x, omega.residual, c_circ, q, q_sol.residual, w.a(), tol.cluster)
}

/// Runs both pipelines and assembles the full index multiset.
pub fn full_profile(pair: &SymbolPair, tol: impl Into<Tolerances>) -> Result<IndexProfile> {
    let tol = tol.into();
    let negative = negative_profile(pair, tol)?;
    let positive = positive_profile(pair, tol)?;
    combine_profiles(pair, negative, positive, tol.cluster)
}

/// Assembles an [`IndexProfile`] and runs the dual cross-checks.
pub fn combine_profiles(pair: &SymbolPair, negative: SideProfile, positive: SideProfile, tol: f64) -> Result<IndexProfile> {
    let size = pair.size();
    let (p, q) = (negative.indices.len(), positive.indices.len());
    if p + q > size {
        return Err(Error::InconsistentProfile { negative: p, positive: q, size });
    }
    let zeros = size - p - q;

    let mut all_indices: Vec<i64> = negative.indices.iter().map(|&k| -(k as i64)).collect();
    all_indices.extend(std::iter::repeat(0).take(zeros));
    all_indices.extend(positive.indices.iter().map(|&w| w as i64));
    all_indices.sort_unstable();

    let dim_v = pair.v().state_dim();
    let dim_w = pair.w().state_dim();
    let neg_eigs = &negative.trace.q_eigenvalues;
    let pos_eigs = &positive.trace.q_eigenvalues;

    let mut cross_checks = dual_checks(neg_eigs, pos_eigs, dim_v, dim_w, tol);
    let mut warnings = Vec::new();
    if cross_checks.iter().any(|c| !c.holds) {
        let relaxed = dual_checks(neg_eigs, pos_eigs, dim_v, dim_w, 10.0 * tol);
        if relaxed.iter().all(|c| c.holds) {
            for c in cross_checks.iter().filter(|c| !c.holds) {
                warnings.push(format!(
                    "{}: {} != {} at tol {tol:e}, consistent at {:e}",
                    c.name,
                    c.lhs,
                    c.rhs,
                    10.0 * tol
                ));
            }
        } else {
            let failed: Vec<String> = cross_checks
                .iter_mut()
                .filter(|c| !c.holds)
                .map(|c| format!("{}: {} != {}", c.name, c.lhs, c.rhs))
                .collect();
            return Err(Error::CrossCheck(failed.join("; ")));
        }
    }

    let dual_omega_gap = linalg::max_abs_diff(&positive.trace.omega, &negative.trace.omega.adjoint());

    Ok(IndexProfile {
        negative: negative.indices,
        positive: positive.indices,
        zeros,
        mu: negative.steps,
        nu: positive.steps,
        all_indices,
        negative_trace: negative.trace,
        positive_trace: positive.trace,
        dual_omega_gap,
        cross_checks,
        warnings,
    })
}

fn unit_count(eigs: &[f64], tol: f64) -> usize {
    eigs.iter().filter(|&&l| l >= 1.0 - tol).count()
}

fn margin(eigs: &[f64], tol: f64) -> f64 {
    eigs.iter().map(|l| (l - (1.0 - tol)).abs()).fold(f64::INFINITY, f64::min)
}

/// `mult_1(Q_*) = dim A_v - rank(I - Q)` and `mult_1(Q) = dim A_w - rank(I - Q_*)`.
fn dual_checks(neg: &[f64], pos: &[f64], dim_v: usize, dim_w: usize, tol: f64) -> Vec<CrossCheck> {
    let ones_q = unit_count(neg, tol);
    let ones_q_star = unit_count(pos, tol);
    let rank_q = neg.len() - ones_q;
    let rank_q_star = pos.len() - ones_q_star;
    let m = margin(neg, tol).min(margin(pos, tol));
    let lhs1 = ones_q_star;
    let rhs1 = dim_v as i64 - rank_q as i64;
    let lhs2 = ones_q;
    let rhs2 = dim_w as i64 - rank_q_star as i64;
    vec![
        CrossCheck {
            name: "mult1(Q*) = dim(A_v) - rank(I - Q)",
            lhs: lhs1,
            rhs: rhs1.max(0) as usize,
            holds: lhs1 as i64 == rhs1,
            margin: m,
        },
        CrossCheck {
            name: "mult1(Q) = dim(A_w) - rank(I - Q*)",
            lhs: lhs2,
            rhs: rhs2.max(0) as usize,
            holds: lhs2 as i64 == rhs2,
            margin: m,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::diagonal_symbol_factors;

    #[test]
    fn counting_rule() {
        let (mu, kappa) = counts_from_kernel_dims(&[6, 4, 2, 1, 0]);
        assert_eq!(mu, vec![2, 2, 1, 1]);
        assert_eq!(kappa, vec![4, 2]);
        let (mu, kappa) = counts_from_kernel_dims(&[0]);
        assert!(mu.is_empty() && kappa.is_empty());
    }

    #[test]
    fn identity_symbol() {
        let pair = diagonal_symbol_factors(&[0]).unwrap();
        let neg = negative_profile(&pair, CLUSTER_TOL).unwrap();
        assert_eq!(neg.trace.kernel_dims, vec![0]);
        assert!(neg.indices.is_empty());
        let full = full_profile(&pair, CLUSTER_TOL).unwrap();
        assert_eq!(full.all_indices, vec![0]);
        assert!(full.positive.is_empty());
    }

    #[test]
    fn single_negative_power() {
        let pair = diagonal_symbol_factors(&[-1]).unwrap();
        let neg = negative_profile(&pair, CLUSTER_TOL).unwrap();
        assert_eq!(neg.trace.kernel_dims, vec![1, 0]);
        assert_eq!(neg.indices, vec![1]);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let pair = diagonal_symbol_factors(&[2]).unwrap();
        let (a, b, c, d, _) = pair.v().clone().into_parts();
        let broken = Realization::continuous(a, b * linalg::real(2.0), c, d).unwrap();
        let bad = SymbolPair::new(broken, pair.w().clone()).unwrap();
        assert!(matches!(
            negative_profile(&bad, CLUSTER_TOL),
            Err(Error::InvalidRealization { factor: "V", .. })
        ));
    }

    #[test]
    fn non_contraction_is_caught() {
        let m = linalg::zeros(1, 1);
        let q = linalg::from_real_rows(&[&[2.0]]);
        assert!(matches!(kernel_sequence(&m, &q, 1e-7), Err(Error::ContractionViolation { .. })));
    }

    #[test]
    fn stuck_kernel_does_not_loop() {
        let m = linalg::identity(2);
        let q = linalg::identity(2);
        assert!(matches!(kernel_sequence(&m, &q, 1e-7), Err(Error::NonTermination { cap: 3, .. })));
    }
}
