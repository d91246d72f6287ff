//! The indices report.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use whindex::indices::{IndexProfile, PipelineTrace, Tolerances};

use crate::json::canonical;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sides<T> {
    pub negative: T,
    pub positive: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResiduals {
    pub omega: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckMargin {
    pub name: String,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    /// Distance of the nearest `Q` eigenvalue to the clustering threshold;
    /// absent when both state spaces are trivial.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residuals: Sides<StepResiduals>,
    pub q_eigenvalues: Sides<Vec<f64>>,
    pub cross_check_margins: Vec<CrossCheckMargin>,
    /// `max |Ω_* - Ω*|`.
    pub dual_omega_gap: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceUsed {
    pub cluster: f64,
    pub validation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub all_indices: Vec<i64>,
    /// Ascending, e.g. `[-4, -2]`.
    pub negative_indices: Vec<i64>,
    /// Ascending, e.g. `[3, 5]`.
    pub positive_indices: Vec<i64>,
    pub zeros: usize,
    pub mu: Vec<usize>,
    pub nu: Vec<usize>,
    pub kernel_dims: Sides<Vec<usize>>,
    pub diagnostics: Diagnostics,
    pub tool_version: String,
    pub tolerance_used: ToleranceUsed,
}

fn residuals(t: &PipelineTrace) -> StepResiduals {
    StepResiduals { omega: t.residuals.omega, q: t.residuals.q }
}

impl Report {
    pub fn new(profile: &IndexProfile, tol: Tolerances) -> Self {
        let mut negative_indices: Vec<i64> = profile.negative.iter().map(|&k| -(k as i64)).collect();
        negative_indices.sort_unstable();
        let mut positive_indices: Vec<i64> = profile.positive.iter().map(|&w| w as i64).collect();
        positive_indices.sort_unstable();
        let (neg, pos) = (&profile.negative_trace, &profile.positive_trace);
        Report {
            all_indices: profile.all_indices.clone(),
            negative_indices,
            positive_indices,
            zeros: profile.zeros,
            mu: profile.mu.clone(),
            nu: profile.nu.clone(),
            kernel_dims: Sides { negative: neg.kernel_dims.clone(), positive: pos.kernel_dims.clone() },
            diagnostics: Diagnostics {
                residuals: Sides { negative: residuals(neg), positive: residuals(pos) },
                q_eigenvalues: Sides { negative: neg.q_eigenvalues.clone(), positive: pos.q_eigenvalues.clone() },
                cross_check_margins: profile
                    .cross_checks
                    .iter()
                    .map(|c| CrossCheckMargin {
                        name: c.name.to_string(),
                        lhs: c.lhs,
                        rhs: c.rhs,
                        holds: c.holds,
                        margin: c.margin.is_finite().then_some(c.margin),
                    })
                    .collect(),
                dual_omega_gap: profile.dual_omega_gap,
                warnings: profile.warnings.clone(),
            },
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            tolerance_used: ToleranceUsed { cluster: tol.cluster, validation: tol.validation },
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report fields are serializable")
    }

    pub fn to_canonical(&self) -> String {
        canonical(&self.to_value())
    }

    /// Aligned two-column table.
    pub fn to_table(&self) -> String {
        let d = &self.diagnostics;
        let fmt_f = |xs: &[f64]| xs.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", ");
        let mut rows: Vec<(String, String)> = vec![
            ("all indices".into(), format!("{:?}", self.all_indices)),
            ("negative indices".into(), format!("{:?}", self.negative_indices)),
            ("positive indices".into(), format!("{:?}", self.positive_indices)),
            ("zeros".into(), self.zeros.to_string()),
            ("mu".into(), format!("{:?}", self.mu)),
            ("nu".into(), format!("{:?}", self.nu)),
            ("kernel dims (negative)".into(), format!("{:?}", self.kernel_dims.negative)),
            ("kernel dims (positive)".into(), format!("{:?}", self.kernel_dims.positive)),
            (
                "residuals (negative)".into(),
                format!("omega {:.3e}, q {:.3e}", d.residuals.negative.omega, d.residuals.negative.q),
            ),
            (
                "residuals (positive)".into(),
                format!("omega {:.3e}, q {:.3e}", d.residuals.positive.omega, d.residuals.positive.q),
            ),
            ("Q eigenvalues (negative)".into(), fmt_f(&d.q_eigenvalues.negative)),
            ("Q eigenvalues (positive)".into(), fmt_f(&d.q_eigenvalues.positive)),
            ("dual Omega gap".into(), format!("{:.3e}", d.dual_omega_gap)),
        ];
        for c in &d.cross_check_margins {
            let margin = c.margin.map_or("n/a".to_string(), |m| format!("{m:.3e}"));
            let verdict = if c.holds { "holds" } else { "FAILS" };
            rows.push((c.name.clone(), format!("{} vs {} {verdict}, margin {margin}", c.lhs, c.rhs)));
        }
        for w in &d.warnings {
            rows.push(("warning".into(), w.clone()));
        }
        rows.push((
            "tolerance".into(),
            format!("cluster {:e}, validation {:e}", self.tolerance_used.cluster, self.tolerance_used.validation),
        ));
        rows.push(("version".into(), self.tool_version.clone()));
        let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}
