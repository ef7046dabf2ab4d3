//! Finite-dimensional operator algebra: validated Hermitian, density and
//! unitary operators, POVMs, the Hilbert-Schmidt inner product, Born
//! probabilities, unitary evolution, and the Lüders update.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::{ComplexMatrix, MatrixError};
use crate::rep::ProbVector;
use crate::tolerance::ToleranceSet;

/// Residual imaginary part allowed when a trace is asserted real.
const IM_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("invalid probability: {context} = {value}")]
    InvalidProbability { context: String, value: f64 },
    #[error("postcondition failure: {0}")]
    PostconditionFailure(String),
    #[error("conditioning on an outcome of probability {prob} (at or below tolerance)")]
    ZeroProbabilityConditioning { prob: f64 },
    #[error("rank {rank} out of range for dimension {dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("operator fails {kind} validation: {report}")]
    Invalid { kind: &'static str, report: ValidationReport },
    #[error("expected a rank-1 projector: {0}")]
    NotProjector(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// One invariant check with its measured deviation.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        let passed = deviation <= tolerance;
        Self {
            name: name.into(),
            deviation,
            tolerance,
            passed,
        }
    }
}

/// Outcome of validating an operator against its invariants. Lists every
/// check with the measured deviation so failures are diagnosable.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for c in &self.checks {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(
                f,
                "{} {}: deviation {:.3e} (tol {:.1e})",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.deviation,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

/// A Hermitian operator: `‖M - M†‖_max` within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, tol: &ToleranceSet) -> Result<Self, OperatorError> {
        let dim = require_square(&matrix)?;
        let dev = matrix.hermiticity_deviation();
        if dev > tol.herm {
            let mut report = ValidationReport::default();
            report.push(CheckResult::new("hermiticity", dev, tol.herm));
            return Err(OperatorError::Invalid {
                kind: "hermitian",
                report,
            });
        }
        Ok(Self { dim, matrix })
    }

    /// Rank-1 projector `|v⟩⟨v|` onto a (normalized) vector.
    pub fn projector(v: &DVector<Complex64>) -> Self {
        let d = v.len();
        let norm = v.norm();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = v[r] * v[c].conj() / Complex64::new(norm * norm, 0.0);
            }
        }
        Self {
            dim: d,
            matrix: ComplexMatrix::new(m).expect("projector entries are finite"),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            matrix: ComplexMatrix::identity(d),
        }
    }

    /// Scales by a real factor (stays Hermitian).
    pub fn scale(&self, factor: f64) -> Self {
        let m = self.matrix.as_dmatrix().scale(factor);
        Self {
            dim: self.dim,
            matrix: ComplexMatrix::new(m).expect("scaled entries are finite"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigen().min_eigenvalue()
    }

    pub fn trace_re(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, tol: &ToleranceSet) -> Result<Self, OperatorError> {
        let report = validate_density(&matrix, tol)?;
        if !report.passed() {
            return Err(OperatorError::Invalid {
                kind: "density",
                report,
            });
        }
        let dim = matrix.require_square().expect("validated as square");
        Ok(Self { dim, matrix })
    }

    /// Pure state `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn from_pure(v: &DVector<Complex64>) -> Self {
        let proj = HermitianOperator::projector(v);
        Self {
            dim: proj.dim,
            matrix: proj.matrix,
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let m = DMatrix::<Complex64>::identity(d, d).scale(1.0 / d as f64);
        Self {
            dim: d,
            matrix: ComplexMatrix::new(m).expect("identity entries are finite"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// tr(rho^2), the purity.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_of_product(&self.matrix).re
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator {
            dim: self.dim,
            matrix: self.matrix.clone(),
        }
    }
}

/// A unitary operator: `‖U†U - I‖_max` within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix, tol: &ToleranceSet) -> Result<Self, OperatorError> {
        let dim = require_square(&matrix)?;
        let dev = matrix.unitarity_deviation();
        if dev > tol.unitary {
            let mut report = ValidationReport::default();
            report.push(CheckResult::new("unitarity", dev, tol.unitary));
            return Err(OperatorError::Invalid {
                kind: "unitary",
                report,
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            matrix: ComplexMatrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Conjugates an operator: `U A U†`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&self.matrix * a) * &self.matrix.adjoint()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }
}

/// A positive-operator valued measure: PSD effects resolving the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>, tol: &ToleranceSet) -> Result<Self, OperatorError> {
        let report = validate_povm(&effects, tol)?;
        if !report.passed() {
            return Err(OperatorError::Invalid {
                kind: "povm",
                report,
            });
        }
        let dim = effects[0].dim();
        Ok(Self { dim, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }
}

fn require_square(m: &ComplexMatrix) -> Result<usize, OperatorError> {
    m.require_square().map_err(|_| OperatorError::NonSquare {
        rows: m.nrows(),
        cols: m.ncols(),
    })
}

/// Checks the density-operator invariants: hermiticity, positive
/// semidefiniteness (via full eigendecomposition, so the report can name the
/// offending eigenvalue), and unit trace.
pub fn validate_density(m: &ComplexMatrix, tol: &ToleranceSet) -> Result<ValidationReport, OperatorError> {
    require_square(m)?;
    let mut report = ValidationReport::default();
    report.push(CheckResult::new(
        "hermiticity",
        m.hermiticity_deviation(),
        tol.herm,
    ));
    let min_eig = m.hermitian_eigen().min_eigenvalue();
    report.push(CheckResult::new(
        "positive semidefiniteness (min eigenvalue)",
        (-min_eig).max(0.0),
        tol.psd,
    ));
    report.push(CheckResult::new(
        "unit trace",
        (m.trace() - Complex64::new(1.0, 0.0)).norm(),
        tol.trace,
    ));
    Ok(report)
}

/// Checks the POVM invariants: per-effect positive semidefiniteness and the
/// resolution of the identity `sum(E_j) = I`.
pub fn validate_povm(effects: &[HermitianOperator], tol: &ToleranceSet) -> Result<ValidationReport, OperatorError> {
    let first = effects
        .first()
        .ok_or(OperatorError::PostconditionFailure("empty POVM".into()))?;
    let dim = first.dim();
    for e in effects {
        if e.dim() != dim {
            return Err(OperatorError::DimMismatch {
                left: dim,
                right: e.dim(),
            });
        }
    }
    let mut report = ValidationReport::default();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (j, e) in effects.iter().enumerate() {
        let min_eig = e.matrix().hermitian_eigen().min_eigenvalue();
        report.push(CheckResult::new(
            format!("effect {j} positive semidefiniteness"),
            (-min_eig).max(0.0),
            tol.psd,
        ));
        sum = &sum + e.matrix();
    }
    report.push(CheckResult::new(
        "resolution of identity",
        sum.max_diff(&ComplexMatrix::identity(dim)),
        tol.povm,
    ));
    Ok(report)
}

/// Hilbert-Schmidt inner product tr(AB) of two Hermitian operators.
///
/// The product trace of Hermitian operators is real; the imaginary residue
/// is asserted below `1e-9` and discarded.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64, OperatorError> {
    if a.dim() != b.dim() {
        return Err(OperatorError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let t = a.matrix().trace_of_product(b.matrix());
    assert!(
        t.im.abs() <= IM_RESIDUE_TOL,
        "imaginary residue {} exceeds {}",
        t.im,
        IM_RESIDUE_TOL
    );
    Ok(t.re)
}

/// Born-rule outcome probabilities `Q(E_j) = tr(rho E_j)`.
///
/// Entries within `tol.psd` of 0 or 1 are clamped to the boundary; anything
/// farther out is an error, never silently repaired. The vector must sum to
/// 1 within `tol.povm`.
pub fn born_probabilities(rho: &DensityOperator, povm: &Povm) -> Result<ProbVector, OperatorError> {
    let tol = ToleranceSet::default();
    if rho.dim() != povm.dim() {
        return Err(OperatorError::DimMismatch {
            left: rho.dim(),
            right: povm.dim(),
        });
    }
    let mut probs = Vec::with_capacity(povm.len());
    for (j, e) in povm.effects().iter().enumerate() {
        let q = hs_inner(&rho.as_hermitian(), e)?;
        let clamped = if q < -tol.psd || q > 1.0 + tol.psd {
            return Err(OperatorError::InvalidProbability {
                context: format!("tr(rho E_{j})"),
                value: q,
            });
        } else {
            q.clamp(0.0, 1.0)
        };
        probs.push(clamped);
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol.povm {
        return Err(OperatorError::InvalidProbability {
            context: "sum of Born probabilities".into(),
            value: sum,
        });
    }
    Ok(ProbVector::from_raw(probs))
}

/// Unitary evolution `U rho U†`, revalidated as a density operator.
pub fn evolve(rho: &DensityOperator, u: &UnitaryOperator) -> Result<DensityOperator, OperatorError> {
    if rho.dim() != u.dim() {
        return Err(OperatorError::DimMismatch {
            left: rho.dim(),
            right: u.dim(),
        });
    }
    let rotated = u.conjugate(rho.matrix());
    DensityOperator::new(rotated, &ToleranceSet::default()).map_err(|e| {
        OperatorError::PostconditionFailure(format!("evolved state failed revalidation: {e}"))
    })
}

/// Lüders update `Π rho Π / tr(rho Π)` for a rank-1 projector.
///
/// Only rank-1 projectors are accepted: the update rule for general effects
/// is left unspecified here.
pub fn luders_update(
    rho: &DensityOperator,
    projector: &HermitianOperator,
) -> Result<DensityOperator, OperatorError> {
    let tol = ToleranceSet::default();
    if rho.dim() != projector.dim() {
        return Err(OperatorError::DimMismatch {
            left: rho.dim(),
            right: projector.dim(),
        });
    }
    let trace_dev = (projector.trace_re() - 1.0).abs();
    let idem_dev = (projector.matrix() * projector.matrix()).max_diff(projector.matrix());
    if trace_dev > 1e-9 || idem_dev > 1e-9 {
        return Err(OperatorError::NotProjector(format!(
            "trace deviation {trace_dev:.3e}, idempotency deviation {idem_dev:.3e}"
        )));
    }
    let prob = hs_inner(&rho.as_hermitian(), projector)?;
    if prob <= tol.psd {
        return Err(OperatorError::ZeroProbabilityConditioning { prob });
    }
    let updated = (&(projector.matrix() * rho.matrix()) * projector.matrix())
        .as_dmatrix()
        .scale(1.0 / prob);
    DensityOperator::new(
        ComplexMatrix::new(updated).map_err(OperatorError::Matrix)?,
        &tol,
    )
    .map_err(|e| OperatorError::PostconditionFailure(format!("Lüders output invalid: {e}")))
}
