//! Weyl-Heisenberg displacement operators `D_{p,q} = tau^{pq} X^p Z^q`.
//!
//! `X` is the cyclic shift `X|k⟩ = |k+1 mod d⟩`, `Z` the clock
//! `Z|k⟩ = exp(2πik/d)|k⟩`, and `tau = -exp(iπ/d)` fixes the phase
//! convention. Each displacement is a permutation matrix with phases, so it
//! is applied to vectors in O(d) through a precomputed table.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::operator::UnitaryOperator;
use crate::sic::SicError;
use crate::tolerance::ToleranceSet;

/// Action of one displacement: `(D φ)_k = phase[k] · φ[src[k]]`.
#[derive(Debug, Clone)]
pub(crate) struct DisplacementAction {
    pub src: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl DisplacementAction {
    fn build(d: usize, p: usize, q: usize) -> Self {
        // tau = -exp(iπ/d) = exp(iπ(d+1)/d); omega = tau².
        let tau_angle = std::f64::consts::PI * (d as f64 + 1.0) / d as f64;
        let omega_angle = 2.0 * std::f64::consts::PI / d as f64;
        let lead = Complex64::from_polar(1.0, tau_angle * (p * q) as f64);
        let mut src = Vec::with_capacity(d);
        let mut phase = Vec::with_capacity(d);
        for k in 0..d {
            let source = (k + d - p % d) % d;
            src.push(source);
            phase.push(lead * Complex64::from_polar(1.0, omega_angle * (q * source) as f64));
        }
        Self { src, phase }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_fn(v.len(), |k, _| self.phase[k] * v[self.src[k]])
    }

    pub fn apply_adjoint(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::<Complex64>::zeros(v.len());
        for k in 0..v.len() {
            out[self.src[k]] = self.phase[k].conj() * v[k];
        }
        out
    }

    /// `⟨φ| D |φ⟩` without forming the matrix.
    pub fn expectation(&self, v: &DVector<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..v.len() {
            acc += v[k].conj() * self.phase[k] * v[self.src[k]];
        }
        acc
    }

    fn to_matrix(&self, d: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            m[(k, self.src[k])] = self.phase[k];
        }
        m
    }
}

/// All `d²` displacement actions in lexicographic `(p, q)` order; index
/// `t = p·d + q`, with `t = 0` the identity.
#[derive(Debug, Clone)]
pub(crate) struct DisplacementTable {
    pub d: usize,
    pub actions: Vec<DisplacementAction>,
}

impl DisplacementTable {
    pub fn new(d: usize) -> Self {
        let mut actions = Vec::with_capacity(d * d);
        for p in 0..d {
            for q in 0..d {
                actions.push(DisplacementAction::build(d, p, q));
            }
        }
        Self { d, actions }
    }
}

/// The Weyl-Heisenberg displacement `D_{p,q}` as a validated unitary.
pub fn wh_displacement(d: usize, p: usize, q: usize) -> Result<UnitaryOperator, SicError> {
    if d == 0 {
        return Err(SicError::IndexOutOfRange { d, p, q });
    }
    if p >= d || q >= d {
        return Err(SicError::IndexOutOfRange { d, p, q });
    }
    let action = DisplacementAction::build(d, p, q);
    let m = action.to_matrix(d);
    UnitaryOperator::new(
        ComplexMatrix::new(m).expect("phases are finite"),
        &ToleranceSet::default(),
    )
    .map_err(SicError::Operator)
}
