//! The Born rule written purely in terms of probabilities.
//!
//! Fix a SIC and consider any other measurement `{D_j}`. An agent who knows
//! the probabilities `P(H_i)` they assign to the SIC outcomes and the
//! conditionals `P(D_j|H_i) = tr(Π_i D_j)` can compute the Born-rule
//! probabilities for the other measurement without ever touching a Hilbert
//! space:
//!
//! ```text
//! Q(D_j) = Σ_i [(d+1) P(H_i) - 1/d] P(D_j|H_i)        (urgleichung)
//! ```
//!
//! This is a deformation of the classical Law of Total Probability
//! `Σ_i P(H_i) P(D_j|H_i)`, and the two genuinely disagree: the gap is the
//! `deformation` this module reports. Special cases implemented here: the
//! von Neumann reduction (constant `-1` for measurements with trace-1
//! effects), the Schrödinger form (a unitarily rotated SIC, constant
//! `-1/d`), and the generalized family `Σ_i [α P(H_i) - β] P(D_j|H_i)`
//! covering, for example, real vector spaces with `α = d/2 + 1` and
//! `β = 1/(d+1)`.

use thiserror::Error;

use crate::operator::{HermitianOperator, OperatorError, Povm, UnitaryOperator};
use crate::rep::{ProbVector, RepError};
use crate::sic::{SicError, SicStructure};
use crate::tolerance::ToleranceSet;

#[derive(Debug, Error)]
pub enum UrgleichungError {
    #[error("probability vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("not a von Neumann measurement: {0}")]
    NotVonNeumann(String),
    #[error("conditional matrix invariant violated: {0}")]
    InvalidConditional(String),
    #[error(transparent)]
    Sic(#[from] SicError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// The conditionals `r[j][i] = P(D_j|H_i) = tr(Π_i D_j)`.
///
/// Outcomes index rows and frame elements index columns, so a prediction
/// is one matrix-vector product. Each column is a probability distribution
/// (it sums to 1 because the `D_j` resolve the identity).
#[derive(Debug, Clone)]
pub struct ConditionalMatrix {
    dim: usize,
    n_out: usize,
    n_fid: usize,
    /// Row-major `n_out x n_fid`.
    r: Vec<f64>,
}

impl ConditionalMatrix {
    fn build(
        dim: usize,
        projectors: &[HermitianOperator],
        povm: &Povm,
    ) -> Result<Self, UrgleichungError> {
        if povm.dim() != dim {
            return Err(UrgleichungError::DimMismatch {
                left: dim,
                right: povm.dim(),
            });
        }
        let n_out = povm.len();
        let n_fid = projectors.len();
        let mut r = vec![0.0; n_out * n_fid];
        for (j, effect) in povm.effects().iter().enumerate() {
            for (i, projector) in projectors.iter().enumerate() {
                let value = projector.matrix().trace_of_product(effect.matrix()).re;
                if !(-1e-12..=1.0 + 1e-12).contains(&value) {
                    return Err(UrgleichungError::InvalidConditional(format!(
                        "entry ({j}, {i}) = {value} outside [0, 1]"
                    )));
                }
                r[j * n_fid + i] = value;
            }
        }
        for i in 0..n_fid {
            let column_sum: f64 = (0..n_out).map(|j| r[j * n_fid + i]).sum();
            if (column_sum - 1.0).abs() > 1e-9 {
                return Err(UrgleichungError::InvalidConditional(format!(
                    "column {i} sums to {column_sum}"
                )));
            }
        }
        Ok(Self {
            dim,
            n_out,
            n_fid,
            r,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// Number of frame elements (columns); `d²` when built from a SIC.
    pub fn n_fid(&self) -> usize {
        self.n_fid
    }

    pub fn entry(&self, j: usize, i: usize) -> f64 {
        self.r[j * self.n_fid + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.r[j * self.n_fid..(j + 1) * self.n_fid]
    }
}

/// Conditional matrix of a POVM with respect to a verified SIC.
pub fn conditional_matrix(sic: &SicStructure, povm: &Povm) -> Result<ConditionalMatrix, UrgleichungError> {
    sic.require_verified()?;
    ConditionalMatrix::build(sic.dim(), sic.projectors(), povm)
}

/// Conditional matrix against an arbitrary projector frame, for frames that
/// are not SICs (such as the real trine).
pub fn conditional_matrix_from_projectors(
    projectors: &[HermitianOperator],
    povm: &Povm,
) -> Result<ConditionalMatrix, UrgleichungError> {
    let dim = projectors
        .first()
        .map(|p| p.dim())
        .ok_or_else(|| UrgleichungError::ShapeMismatch("empty projector frame".into()))?;
    for p in projectors {
        if p.dim() != dim {
            return Err(UrgleichungError::DimMismatch {
                left: dim,
                right: p.dim(),
            });
        }
    }
    ConditionalMatrix::build(dim, projectors, povm)
}

/// The generalized family `Q(D_j) = Σ_i [α p_i - β] P(D_j|H_i)`.
///
/// No normalization is enforced: the family is a probe, and any point off
/// the quantum values `(d+1, 1/d)` may produce improper vectors.
pub fn generalized_predict(
    p: &ProbVector,
    cond: &ConditionalMatrix,
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>, UrgleichungError> {
    if p.len() != cond.n_fid() {
        return Err(UrgleichungError::ShapeMismatch(format!(
            "probability vector has length {}, conditional matrix has {} columns",
            p.len(),
            cond.n_fid()
        )));
    }
    let coeffs: Vec<f64> = p.entries().iter().map(|&x| alpha * x - beta).collect();
    Ok((0..cond.n_out())
        .map(|j| {
            cond.row(j)
                .iter()
                .zip(coeffs.iter())
                .map(|(r, c)| r * c)
                .sum()
        })
        .collect())
}

/// The urgleichung: the Born rule as `Σ_i [(d+1) p_i - 1/d] P(D_j|H_i)`.
///
/// For a quantum-valid `p` this reproduces `tr(rho D_j)` exactly. Outputs
/// are deliberately *not* clamped: a `p` outside the quantum region shows
/// up as negative entries, which is the diagnostic signal the relation
/// exists to provide.
pub fn urgleichung_predict(p: &ProbVector, cond: &ConditionalMatrix) -> Result<ProbVector, UrgleichungError> {
    let d = cond.dim() as f64;
    let q = generalized_predict(p, cond, d + 1.0, 1.0 / d)?;
    let q = ProbVector::from_raw(q);
    if (p.sum() - 1.0).abs() <= 1e-9 {
        debug_assert!(
            (q.sum() - 1.0).abs() <= 1e-9,
            "urgleichung output sums to {}",
            q.sum()
        );
    }
    Ok(q)
}

/// The classical Law of Total Probability `Σ_i p_i P(D_j|H_i)`.
pub fn ltp_predict(p: &ProbVector, cond: &ConditionalMatrix) -> Result<ProbVector, UrgleichungError> {
    let q = generalized_predict(p, cond, 1.0, 0.0)?;
    ProbVector::new(q).map_err(UrgleichungError::Rep)
}

/// How far a claimed distribution sits from the urgleichung prediction,
/// and how far the urgleichung sits from the Law of Total Probability.
#[derive(Debug, Clone)]
pub struct UrgleichungReport {
    /// The urgleichung prediction for `Q`.
    pub q_predicted: ProbVector,
    /// What it was compared against: a claimed `Q`, or a directly computed
    /// Born-rule distribution.
    pub q_direct: ProbVector,
    /// `max_j |q_direct_j - q_predicted_j|`.
    pub residual_max: f64,
    /// `Σ_j |q_direct_j - q_predicted_j|`.
    pub residual_l1: f64,
    /// `max_j` gap between the urgleichung and the Law of Total
    /// Probability on the same inputs.
    pub deformation: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl UrgleichungReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual_max <= tol
    }
}

/// Compares a claimed outcome distribution against the urgleichung
/// prediction. A nonzero residual is an inconsistency the agent is being
/// told to remove.
pub fn residual(
    p: &ProbVector,
    cond: &ConditionalMatrix,
    q_claimed: &ProbVector,
) -> Result<UrgleichungReport, UrgleichungError> {
    if q_claimed.len() != cond.n_out() {
        return Err(UrgleichungError::ShapeMismatch(format!(
            "claimed distribution has length {}, conditional matrix has {} rows",
            q_claimed.len(),
            cond.n_out()
        )));
    }
    let d = cond.dim() as f64;
    let q_predicted = urgleichung_predict(p, cond)?;
    let q_ltp = generalized_predict(p, cond, 1.0, 0.0)?;

    let mut residual_max: f64 = 0.0;
    let mut residual_l1 = 0.0;
    for (c, pr) in q_claimed.entries().iter().zip(q_predicted.entries()) {
        let gap = (c - pr).abs();
        residual_max = residual_max.max(gap);
        residual_l1 += gap;
    }
    let deformation = q_predicted
        .entries()
        .iter()
        .zip(q_ltp.iter())
        .map(|(u, l)| (u - l).abs())
        .fold(0.0, f64::max);

    Ok(UrgleichungReport {
        q_predicted,
        q_direct: q_claimed.clone(),
        residual_max,
        residual_l1,
        deformation,
        alpha: d + 1.0,
        beta: 1.0 / d,
    })
}

/// The von Neumann special case `Q(D_j) = (d+1) Σ_i p_i P(D_j|H_i) - 1`.
///
/// Valid only for measurements of the old von Neumann variety: `d` rank-1
/// orthogonal projectors. The operation verifies what it can from the
/// conditionals alone: `n_out = d`, and each implied effect trace
/// `Σ_i r[j][i] / d` within `1e-8` of 1.
pub fn von_neumann_predict(p: &ProbVector, cond: &ConditionalMatrix) -> Result<ProbVector, UrgleichungError> {
    let d = cond.dim();
    if cond.n_out() != d {
        return Err(UrgleichungError::NotVonNeumann(format!(
            "{} outcomes, expected d = {d}",
            cond.n_out()
        )));
    }
    if cond.n_fid() != d * d {
        return Err(UrgleichungError::ShapeMismatch(format!(
            "conditional matrix has {} columns, expected d² = {}",
            cond.n_fid(),
            d * d
        )));
    }
    for j in 0..d {
        let implied_trace: f64 = cond.row(j).iter().sum::<f64>() / d as f64;
        if (implied_trace - 1.0).abs() > 1e-8 {
            return Err(UrgleichungError::NotVonNeumann(format!(
                "effect {j} has trace {implied_trace}, expected 1"
            )));
        }
    }
    let q = generalized_predict(p, cond, d as f64 + 1.0, 0.0)?
        .into_iter()
        .map(|x| x - 1.0)
        .collect();
    Ok(ProbVector::from_raw(q))
}

/// The Schrödinger form: the SIC representation of the time-evolved state,
/// computed as `P_t(H_j) = (d+1) Σ_i p_i P(D_j|H_i) - 1/d` with
/// `D_j = U† H_j U`.
pub fn schrodinger_predict(
    p: &ProbVector,
    u: &UnitaryOperator,
    sic: &SicStructure,
) -> Result<ProbVector, UrgleichungError> {
    sic.require_verified()?;
    if u.dim() != sic.dim() {
        return Err(UrgleichungError::DimMismatch {
            left: u.dim(),
            right: sic.dim(),
        });
    }
    let u_dag = u.adjoint();
    let rotated: Vec<HermitianOperator> = sic
        .effects()
        .iter()
        .map(|h| {
            HermitianOperator::new(u_dag.conjugate(h.matrix()), &ToleranceSet::default())
                .expect("unitary conjugation preserves hermiticity")
        })
        .collect();
    let povm = Povm::new(rotated, &ToleranceSet::default()).map_err(UrgleichungError::Operator)?;
    let cond = conditional_matrix(sic, &povm)?;
    let d = sic.dim() as f64;
    let q = generalized_predict(p, &cond, d + 1.0, 0.0)?
        .into_iter()
        .map(|x| x - 1.0 / d)
        .collect();
    Ok(ProbVector::from_raw(q))
}

/// The real-vector-space witness in `d = 2`: three projectors onto lines at
/// 120° (the trine) and the POVM of effects `(2/3) Π_i`. Real symmetric
/// matrices are handled as complex matrices with zero imaginary part.
pub fn trine_frame() -> (Vec<HermitianOperator>, Povm) {
    use nalgebra::DVector;
    use num_complex::Complex64;
    let projectors: Vec<HermitianOperator> = (0..3)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            let v = DVector::from_vec(vec![
                Complex64::new(theta.cos(), 0.0),
                Complex64::new(theta.sin(), 0.0),
            ]);
            HermitianOperator::projector(&v)
        })
        .collect();
    let effects: Vec<HermitianOperator> = projectors.iter().map(|p| p.scale(2.0 / 3.0)).collect();
    let povm = Povm::new(effects, &ToleranceSet::default()).expect("trine effects resolve identity");
    (projectors, povm)
}
