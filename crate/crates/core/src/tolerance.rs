//! Numerical tolerances shared by all validation paths.

/// Tolerances for the algebraic validity checks on operators and POVMs.
///
/// Double-precision matrix products at desk scale (`d <= 16`) accumulate
/// roughly `1e-13` of rounding, so the defaults are strict but safe. Every
/// field can be overridden for experiments with deliberately sloppy inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSet {
    /// Max-norm bound on `M - M†` for a matrix to count as Hermitian.
    pub herm: f64,
    /// How far below zero the smallest eigenvalue may sit.
    pub psd: f64,
    /// Allowed deviation of a density operator's trace from 1.
    pub trace: f64,
    /// Max-norm bound on `sum(E_j) - I` for a POVM.
    pub povm: f64,
    /// Max-norm bound on `U†U - I` for a unitary.
    pub unitary: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-10,
            trace: 1e-10,
            povm: 1e-9,
            unitary: 1e-10,
        }
    }
}

impl ToleranceSet {
    /// Uniform override of every linear-algebra tolerance; the POVM sum
    /// check stays an order of magnitude looser, as in the defaults.
    pub fn uniform(tol: f64) -> Self {
        Self {
            herm: tol,
            psd: tol,
            trace: tol,
            povm: tol * 10.0,
            unitary: tol,
        }
    }
}
