use serde::{Deserialize, Serialize};

/// Numeric tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericPolicy {
    /// Elementwise bound on `|A - A^dag|` for Hermitian operators.
    pub hermitian_tol: f64,
    /// Elementwise bound on `|U^dag U - 1|` for unitaries.
    pub unitary_tol: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace_tol: f64,
    /// Most negative eigenvalue still accepted (and clipped to zero) in a state.
    pub psd_tol: f64,
    /// Distance of an eigenphase from the branch cut that raises a warning.
    pub branch_cut_tol: f64,
    /// Trace distance at which a target state counts as reached.
    pub passage_tol: f64,
    /// Relative slack on every `<` / `<=` bound check.
    pub bound_slack: f64,
    /// Relative mismatch allowed between parallel and collective work.
    pub fairness_tol: f64,
    /// Relative accuracy of constraint saturation by bisection.
    pub saturation_tol: f64,
    /// Largest imaginary part tolerated in a physically real expectation value.
    pub imaginary_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-12,
            unitary_tol: 1e-10,
            trace_tol: 1e-10,
            psd_tol: 1e-10,
            branch_cut_tol: 1e-12,
            passage_tol: 1e-8,
            bound_slack: 1e-9,
            fairness_tol: 1e-8,
            saturation_tol: 1e-8,
            imaginary_tol: 1e-8,
        }
    }
}
