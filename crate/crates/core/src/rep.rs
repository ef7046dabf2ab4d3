//! The probability-vector face of quantum states.
//!
//! With a fiducial SIC fixed, a state `rho` *is* the probability vector
//! `P(H_i) = tr(rho H_i)` it assigns to the SIC outcomes, and the state is
//! recovered by `rho = Σ_i [(d+1) P(H_i) - 1/d] Π_i`. Not every point of
//! the simplex is reachable: valid vectors obey `P(H_i) ≤ 1/d`, and the
//! extreme points satisfy a quadratic and a cubic constraint. Validity
//! ground truth is positive semidefiniteness of the reconstruction; the
//! quadratic and cubic values only characterize the pure states.

use thiserror::Error;

use crate::matrix::ComplexMatrix;
use crate::operator::{DensityOperator, HermitianOperator, OperatorError};
use crate::sic::{SicError, SicStructure, TripleProducts};
use crate::tolerance::ToleranceSet;

/// Entries this far below zero are treated as rounding and clamped.
const ENTRY_TOL: f64 = 1e-12;
/// Allowed deviation of the entry sum from 1.
const SUM_TOL: f64 = 1e-9;
/// Tolerance on the quadratic/cubic purity values; the cubic sums `d⁶`
/// triple products, which amplifies rounding well past linear-algebra
/// noise.
const PURITY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("probability vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("entry {index} = {value} is more than {ENTRY_TOL} below zero")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entries sum to {sum}, more than {SUM_TOL} from 1")]
    BadSum { sum: f64 },
    #[error(transparent)]
    Sic(#[from] SicError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A probability vector: nonnegative entries summing to 1.
///
/// `new` enforces the invariants (clamping entries within `1e-12` of zero);
/// `from_raw` skips them for vectors that are deliberately allowed to carry
/// diagnostic negatives, such as urgleichung output for an invalid input.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, RepError> {
        let mut clamped = entries;
        for (index, e) in clamped.iter_mut().enumerate() {
            if *e < -ENTRY_TOL {
                return Err(RepError::NegativeEntry {
                    index,
                    value: *e,
                });
            }
            if *e < 0.0 {
                *e = 0.0;
            }
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(RepError::BadSum { sum });
        }
        Ok(Self { entries: clamped })
    }

    /// Wraps entries without validation.
    pub fn from_raw(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            entries: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute entry difference against another vector.
    pub fn max_diff(&self, other: &ProbVector) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Where a probability vector sits relative to the quantum region.
#[derive(Debug, Clone)]
pub struct PValidity {
    /// Every entry within the `1/d` ceiling.
    pub max_prob_ok: bool,
    /// Smallest eigenvalue of the reconstructed operator; the ground truth
    /// for membership.
    pub reconstructed_min_eigenvalue: f64,
    /// `Σ p_i²`; equals `2/(d(d+1))` exactly for pure states.
    pub quadratic_value: f64,
    /// `Σ c_ijk p_i p_j p_k`; equals `(d+7)/(d+1)³` exactly for pure states.
    pub cubic_value: f64,
    pub is_quantum: bool,
    pub is_pure: bool,
}

fn check_len(expected: usize, got: usize) -> Result<(), RepError> {
    if expected != got {
        Err(RepError::LengthMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// SIC representation of a state: `P(H_i) = tr(rho H_i)`.
pub fn state_to_probs(rho: &DensityOperator, sic: &SicStructure) -> Result<ProbVector, RepError> {
    sic.require_verified()?;
    if rho.dim() != sic.dim() {
        return Err(RepError::DimMismatch {
            left: rho.dim(),
            right: sic.dim(),
        });
    }
    let d = sic.dim() as f64;
    let entries: Vec<f64> = sic
        .effects()
        .iter()
        .map(|h| rho.matrix().trace_of_product(h.matrix()).re)
        .collect();
    let p = ProbVector::new(entries)?;
    debug_assert!((p.sum() - 1.0).abs() <= 1e-10, "SIC probabilities must normalize");
    debug_assert!(p.max_entry() <= 1.0 / d + 1e-10, "1/d ceiling violated");
    Ok(p)
}

/// Reconstruction `Σ_i [(d+1) p_i - 1/d] Π_i`.
///
/// The output is Hermitian with unit trace for any probability vector, but
/// positive semidefinite only when `p` lies in the quantum region; callers
/// inspect validity separately.
pub fn probs_to_state(p: &ProbVector, sic: &SicStructure) -> Result<HermitianOperator, RepError> {
    let n = sic.dim() * sic.dim();
    check_len(n, p.len())?;
    let d = sic.dim() as f64;
    let mut acc = nalgebra::DMatrix::<num_complex::Complex64>::zeros(sic.dim(), sic.dim());
    for (p_i, proj) in p.entries().iter().zip(sic.projectors()) {
        let coeff = (d + 1.0) * p_i - 1.0 / d;
        acc += proj.matrix().as_dmatrix().scale(coeff);
    }
    let matrix = ComplexMatrix::new(acc).expect("finite combination of projectors");
    HermitianOperator::new(matrix, &ToleranceSet::default()).map_err(RepError::Operator)
}

/// Classifies a probability vector: the `1/d` ceiling, the reconstruction's
/// spectrum, and the quadratic/cubic purity values.
pub fn check_validity(
    p: &ProbVector,
    sic: &SicStructure,
    triples: &TripleProducts,
) -> Result<PValidity, RepError> {
    let n = sic.dim() * sic.dim();
    check_len(n, p.len())?;
    check_len(triples.n(), p.len())?;
    let tol = ToleranceSet::default();
    let d = sic.dim() as f64;

    let max_prob_ok = p.max_entry() <= 1.0 / d + 1e-10;
    let reconstruction = probs_to_state(p, sic)?;
    let min_eig = reconstruction.min_eigenvalue();
    let quadratic_value: f64 = p.entries().iter().map(|x| x * x).sum();
    let cubic_value = triples.cubic_form(p.entries());

    let quadratic_target = 2.0 / (d * (d + 1.0));
    let cubic_target = (d + 7.0) / (d + 1.0).powi(3);
    let is_quantum = min_eig >= -tol.psd;
    let is_pure = is_quantum
        && (quadratic_value - quadratic_target).abs() <= PURITY_TOL
        && (cubic_value - cubic_target).abs() <= PURITY_TOL;

    Ok(PValidity {
        max_prob_ok,
        reconstructed_min_eigenvalue: min_eig,
        quadratic_value,
        cubic_value,
        is_quantum,
        is_pure,
    })
}

/// Euclidean projection of a real vector onto the probability simplex.
fn project_to_simplex(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            threshold = candidate;
        }
    }
    values.iter().map(|&v| (v - threshold).max(0.0)).collect()
}

/// Replaces an inconsistent probability vector by the nearest valid one.
///
/// The reconstruction of `p` is projected (in Frobenius distance) onto the
/// density operators by clipping its spectrum to the probability simplex,
/// then converted back. Valid inputs are fixed points; the map is
/// idempotent.
pub fn repair_p_vector(p: &ProbVector, sic: &SicStructure) -> Result<ProbVector, RepError> {
    let reconstruction = probs_to_state(p, sic)?;
    let eigen = reconstruction.matrix().hermitian_eigen();
    let clipped = project_to_simplex(&eigen.eigenvalues);
    let repaired = eigen.recompose_with(&clipped);
    let rho = DensityOperator::new(
        ComplexMatrix::new(repaired).expect("recomposition is finite"),
        &ToleranceSet::default(),
    )?;
    state_to_probs(&rho, sic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_density;
    use crate::sic::{find_sic_fiducial, triple_products, SicSearchConfig};
    use approx::assert_abs_diff_eq;

    fn sic(d: usize) -> SicStructure {
        let mut config = SicSearchConfig::new(d);
        config.seed = 20;
        config.target_deviation = 1e-12;
        let (fiducial, _) = find_sic_fiducial(&config).unwrap();
        SicStructure::from_fiducial(fiducial, 1e-12)
    }

    #[test]
    fn maximally_mixed_state_maps_to_uniform_vector() {
        let s = sic(2);
        let p = state_to_probs(&DensityOperator::maximally_mixed(2), &s).unwrap();
        for &e in p.entries() {
            assert_abs_diff_eq!(e, 0.25, epsilon = 1e-11);
        }
    }

    #[test]
    fn sic_projector_maps_to_spiked_vector() {
        let s = sic(2);
        let rho = DensityOperator::new(
            s.projectors()[1].matrix().clone(),
            &ToleranceSet::default(),
        )
        .unwrap();
        let p = state_to_probs(&rho, &s).unwrap();
        assert_abs_diff_eq!(p.entries()[1], 0.5, epsilon = 1e-10);
        for (i, &e) in p.entries().iter().enumerate() {
            if i != 1 {
                assert_abs_diff_eq!(e, 1.0 / 6.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn probs_match_per_effect_trace_oracle() {
        let s = sic(4);
        let rho = random_density(4, 3, 33).unwrap();
        let p = state_to_probs(&rho, &s).unwrap();
        for (i, h) in s.effects().iter().enumerate() {
            let mut oracle = num_complex::Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    oracle += rho.matrix().as_dmatrix()[(r, c)] * h.matrix().as_dmatrix()[(c, r)];
                }
            }
            assert!((p.entries()[i] - oracle.re).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_vector_reconstructs_maximally_mixed() {
        let s = sic(2);
        let rho = probs_to_state(&ProbVector::uniform(4), &s).unwrap();
        assert!(
            rho.matrix()
                .max_diff(DensityOperator::maximally_mixed(2).matrix())
                < 1e-11
        );
    }

    #[test]
    fn round_trip_reproduces_random_states() {
        for d in 2..=6 {
            let s = sic(d);
            for seed in 0..10 {
                let rho = random_density(d, 1 + (seed as usize % d), seed * 31 + d as u64).unwrap();
                let p = state_to_probs(&rho, &s).unwrap();
                let back = probs_to_state(&p, &s).unwrap();
                assert!(
                    back.matrix().frobenius_diff(rho.matrix()) < 1e-10,
                    "round trip failed at d={d}, seed={seed}"
                );
            }
        }
    }

    #[test]
    fn spiked_corner_vector_reconstructs_outside_quantum_region() {
        let s = sic(2);
        let p = ProbVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let candidate = probs_to_state(&p, &s).unwrap();
        assert_abs_diff_eq!(candidate.trace_re(), 1.0, epsilon = 1e-10);
        assert!(candidate.min_eigenvalue() < -1e-3);
    }

    #[test]
    fn validity_flags_classify_known_vectors() {
        let s = sic(2);
        let triples = triple_products(&s).unwrap();

        let pure = state_to_probs(
            &DensityOperator::new(s.projectors()[0].matrix().clone(), &ToleranceSet::default())
                .unwrap(),
            &s,
        )
        .unwrap();
        let v = check_validity(&pure, &s, &triples).unwrap();
        assert!(v.is_quantum && v.is_pure && v.max_prob_ok);
        assert_abs_diff_eq!(v.quadratic_value, 1.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v.cubic_value, 1.0 / 3.0, epsilon = 1e-8);

        let uniform = check_validity(&ProbVector::uniform(4), &s, &triples).unwrap();
        assert!(uniform.is_quantum && !uniform.is_pure);
        assert_abs_diff_eq!(uniform.quadratic_value, 0.25, epsilon = 1e-10);

        let corner =
            check_validity(&ProbVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap(), &s, &triples)
                .unwrap();
        assert!(!corner.max_prob_ok && !corner.is_quantum);
    }

    #[test]
    fn repair_fixes_valid_inputs_and_projects_invalid_ones() {
        let s = sic(2);
        let valid = state_to_probs(&random_density(2, 2, 9).unwrap(), &s).unwrap();
        let repaired = repair_p_vector(&valid, &s).unwrap();
        assert!(repaired.max_diff(&valid) < 1e-10);

        let corner = ProbVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let fixed = repair_p_vector(&corner, &s).unwrap();
        assert!(fixed.max_entry() <= 0.5 + 1e-10);
        let again = repair_p_vector(&fixed, &s).unwrap();
        assert!(again.max_diff(&fixed) < 1e-10);
    }

    #[test]
    fn simplex_projection_handles_edge_cases() {
        let already = project_to_simplex(&[0.2, 0.3, 0.5]);
        assert!((already[0] - 0.2).abs() < 1e-14);
        let spiked = project_to_simplex(&[2.0, -0.5, -0.5]);
        assert_abs_diff_eq!(spiked[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spiked[1], 0.0, epsilon = 1e-14);
        let sum: f64 = project_to_simplex(&[0.9, 0.9, -0.1, 0.4]).iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let s = sic(2);
        let p = ProbVector::uniform(9);
        assert!(matches!(
            probs_to_state(&p, &s),
            Err(RepError::LengthMismatch { expected: 4, got: 9 })
        ));
    }
}
