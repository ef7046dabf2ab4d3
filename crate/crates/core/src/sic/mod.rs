//! SIC structures: Weyl-Heisenberg orbits, fiducial search, verification,
//! and the triple-product tensor.
//!
//! A SIC in dimension `d` is a set of `d²` rank-1 projectors `Π_i` with
//! completely uniform pairwise overlaps `tr(Π_i Π_k) = 1/(d+1)`; dividing
//! by `d` turns them into the effects `H_i = Π_i / d` of an informationally
//! complete measurement. All structures here are generated as the orbit of
//! a single fiducial vector under the `d²` displacement operators.

mod displacement;
mod search;

pub use displacement::wh_displacement;
pub use search::{find_sic_fiducial, SearchDiagnostics, SicSearchConfig};

use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

pub(crate) use displacement::DisplacementTable;

use crate::operator::{HermitianOperator, OperatorError, Povm};
use crate::tolerance::ToleranceSet;

#[derive(Debug, Error)]
pub enum SicError {
    #[error("displacement index (p={p}, q={q}) out of range for dimension {d}")]
    IndexOutOfRange { d: usize, p: usize, q: usize },
    #[error("fiducial norm {norm} deviates from 1 by more than 1e-12")]
    NotNormalized { norm: f64 },
    #[error("expected {expected} projectors (d²), got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("search did not reach target; best deviation {best_deviation:.3e}")]
    ConvergenceFailure {
        best_deviation: f64,
        /// Best fiducial found, so the caller can resume or inspect.
        best: Box<Fiducial>,
        diagnostics: Box<SearchDiagnostics>,
    },
    #[error("SIC deviation {max_deviation:.3e} exceeds its declared tolerance {tolerance:.1e}")]
    UnverifiedSic { max_deviation: f64, tolerance: f64 },
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A unit vector generating a Weyl-Heisenberg orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiducial {
    dim: usize,
    amplitudes: DVector<Complex64>,
}

impl Fiducial {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self, SicError> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(SicError::NotNormalized { norm });
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    pub fn from_re_im(re: &[f64], im: &[f64]) -> Result<Self, SicError> {
        assert_eq!(re.len(), im.len(), "re/im length mismatch");
        let v = DVector::from_fn(re.len(), |k, _| Complex64::new(re[k], im[k]));
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }
}

pub(crate) fn orbit_kets(table: &DisplacementTable, phi: &DVector<Complex64>) -> Vec<DVector<Complex64>> {
    table.actions.iter().map(|a| a.apply(phi)).collect()
}

/// Worst pairwise overlap deviation `| |⟨v_i|v_k⟩|² - 1/(d+1) |` of a set
/// of orbit kets.
pub(crate) fn pairwise_deviation(kets: &[DVector<Complex64>]) -> f64 {
    let d = kets[0].len();
    let target = 1.0 / (d as f64 + 1.0);
    let mut worst: f64 = 0.0;
    for i in 0..kets.len() {
        for k in (i + 1)..kets.len() {
            let overlap = kets[i].dotc(&kets[k]).norm_sqr();
            worst = worst.max((overlap - target).abs());
        }
    }
    worst
}

/// The `d²` rank-1 projectors `D_{p,q} |φ⟩⟨φ| D†_{p,q}` in lexicographic
/// `(p, q)` order.
pub fn orbit(fiducial: &Fiducial) -> Vec<HermitianOperator> {
    let table = DisplacementTable::new(fiducial.dim());
    orbit_kets(&table, fiducial.amplitudes())
        .iter()
        .map(HermitianOperator::projector)
        .collect()
}

/// Frame potential `Σ_{(p,q)≠(0,0)} |⟨φ|D_{p,q}|φ⟩|⁴` of the orbit.
///
/// Bounded below by `(d-1)/(d+1)`, with equality exactly when the orbit is
/// a SIC.
pub fn frame_potential(fiducial: &Fiducial) -> f64 {
    let table = DisplacementTable::new(fiducial.dim());
    table.actions[1..]
        .iter()
        .map(|a| {
            let x = a.expectation(fiducial.amplitudes()).norm_sqr();
            x * x
        })
        .sum()
}

/// Per-projector deviations measured during verification.
#[derive(Debug, Clone)]
pub struct ProjectorChecks {
    pub trace_deviation: f64,
    pub idempotency_deviation: f64,
}

/// Result of checking a projector set against the SIC conditions.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub dim: usize,
    /// Worst `|tr(Π_i Π_k) - 1/(d+1)|` over all pairs; the pass criterion.
    pub max_pairwise_deviation: f64,
    pub mean_pairwise_deviation: f64,
    pub per_projector: Vec<ProjectorChecks>,
    /// `‖Σ Π_i - d·I‖_max`.
    pub sum_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let worst_trace = self
            .per_projector
            .iter()
            .map(|p| p.trace_deviation)
            .fold(0.0, f64::max);
        let worst_idem = self
            .per_projector
            .iter()
            .map(|p| p.idempotency_deviation)
            .fold(0.0, f64::max);
        write!(
            f,
            "d={}: pairwise deviation max {:.3e} / mean {:.3e} (tol {:.1e}), \
             trace dev {:.3e}, idempotency dev {:.3e}, sum dev {:.3e} -> {}",
            self.dim,
            self.max_pairwise_deviation,
            self.mean_pairwise_deviation,
            self.tolerance,
            worst_trace,
            worst_idem,
            self.sum_deviation,
            if self.passed { "pass" } else { "FAIL" }
        )
    }
}

/// Checks `d²` projectors for the uniform-overlap condition, reporting
/// pairwise and per-projector deviations. Passes iff the worst pairwise
/// deviation is within `tol`.
pub fn verify_sic(projectors: &[HermitianOperator], tol: f64) -> Result<VerificationReport, SicError> {
    let dim = projectors
        .first()
        .map(|p| p.dim())
        .ok_or(SicError::WrongCount { expected: 1, got: 0 })?;
    let expected = dim * dim;
    if projectors.len() != expected {
        return Err(SicError::WrongCount {
            expected,
            got: projectors.len(),
        });
    }
    for p in projectors {
        if p.dim() != dim {
            return Err(SicError::Operator(OperatorError::DimMismatch {
                left: dim,
                right: p.dim(),
            }));
        }
    }

    let per_projector: Vec<ProjectorChecks> = projectors
        .iter()
        .map(|p| ProjectorChecks {
            trace_deviation: (p.trace_re() - 1.0).abs(),
            idempotency_deviation: (p.matrix() * p.matrix()).max_diff(p.matrix()),
        })
        .collect();

    let target = 1.0 / (dim as f64 + 1.0);
    let mut max_dev: f64 = 0.0;
    let mut sum_dev = 0.0;
    let mut pairs = 0usize;
    for i in 0..projectors.len() {
        for k in (i + 1)..projectors.len() {
            let overlap = projectors[i]
                .matrix()
                .trace_of_product(projectors[k].matrix())
                .re;
            let dev = (overlap - target).abs();
            max_dev = max_dev.max(dev);
            sum_dev += dev;
            pairs += 1;
        }
    }

    let mut sum = crate::matrix::ComplexMatrix::zeros(dim, dim);
    for p in projectors {
        sum = &sum + p.matrix();
    }
    let scaled_identity = crate::matrix::ComplexMatrix::new(
        nalgebra::DMatrix::<Complex64>::identity(dim, dim).scale(dim as f64),
    )
    .expect("identity is finite");

    Ok(VerificationReport {
        dim,
        max_pairwise_deviation: max_dev,
        mean_pairwise_deviation: sum_dev / pairs as f64,
        per_projector,
        sum_deviation: sum.max_diff(&scaled_identity),
        tolerance: tol,
        passed: max_dev <= tol,
    })
}

/// A fiducial together with its orbit, effects, and measured deviation.
///
/// Construction never fails: the measured `max_deviation` records how close
/// the orbit is to a SIC, and `is_verified` compares it against the
/// tolerance the structure was declared with. Operations that require a
/// genuine SIC reject unverified structures.
#[derive(Debug, Clone)]
pub struct SicStructure {
    dim: usize,
    fiducial: Fiducial,
    projectors: Vec<HermitianOperator>,
    effects: Vec<HermitianOperator>,
    kets: Vec<DVector<Complex64>>,
    max_deviation: f64,
    tolerance: f64,
}

impl SicStructure {
    pub fn from_fiducial(fiducial: Fiducial, tolerance: f64) -> Self {
        let d = fiducial.dim();
        let table = DisplacementTable::new(d);
        let kets = orbit_kets(&table, fiducial.amplitudes());
        let projectors: Vec<HermitianOperator> =
            kets.iter().map(HermitianOperator::projector).collect();
        let effects: Vec<HermitianOperator> =
            projectors.iter().map(|p| p.scale(1.0 / d as f64)).collect();
        let report = verify_sic(&projectors, tolerance).expect("orbit has d² projectors");
        Self {
            dim: d,
            fiducial,
            projectors,
            effects,
            kets,
            max_deviation: report.max_pairwise_deviation,
            tolerance,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fiducial(&self) -> &Fiducial {
        &self.fiducial
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// The SIC effects `H_i = Π_i / d`.
    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub(crate) fn kets(&self) -> &[DVector<Complex64>] {
        &self.kets
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_deviation
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_verified(&self) -> bool {
        self.max_deviation <= self.tolerance
    }

    pub fn require_verified(&self) -> Result<(), SicError> {
        if self.is_verified() {
            Ok(())
        } else {
            Err(SicError::UnverifiedSic {
                max_deviation: self.max_deviation,
                tolerance: self.tolerance,
            })
        }
    }

    /// The effects as a validated POVM.
    pub fn povm(&self) -> Result<Povm, SicError> {
        Povm::new(self.effects.clone(), &ToleranceSet::default()).map_err(SicError::Operator)
    }
}

/// The real tensor `c_ijk = Re tr(Π_i Π_j Π_k)`, fully symmetric in its
/// indices, with `c_iii = 1` and `c_iik = 1/(d+1)`.
#[derive(Debug, Clone)]
pub struct TripleProducts {
    dim: usize,
    n: usize,
    data: Vec<f64>,
}

impl TripleProducts {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of SIC elements, `d²`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// Contracts the tensor with three copies of a probability vector:
    /// `Σ_ijk c_ijk p_i p_j p_k`.
    pub fn cubic_form(&self, p: &[f64]) -> f64 {
        assert_eq!(p.len(), self.n, "probability vector length mismatch");
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let pij = p[i] * p[j];
                let row = &self.data[(i * self.n + j) * self.n..(i * self.n + j + 1) * self.n];
                let mut inner = 0.0;
                for (k, c) in row.iter().enumerate() {
                    inner += c * p[k];
                }
                acc += pij * inner;
            }
        }
        acc
    }
}

/// Computes the full triple-product tensor of a verified SIC.
///
/// For rank-1 projectors the three-fold trace factors through the Gram
/// matrix of the orbit kets: `tr(Π_i Π_j Π_k) = G_ij G_jk G_ki`.
pub fn triple_products(sic: &SicStructure) -> Result<TripleProducts, SicError> {
    sic.require_verified()?;
    let n = sic.dim() * sic.dim();
    let kets = sic.kets();
    let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = kets[i].dotc(&kets[j]);
        }
    }
    let mut data = vec![0.0f64; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let gij = gram[i * n + j];
            for k in 0..n {
                data[(i * n + j) * n + k] = (gij * gram[j * n + k] * gram[k * n + i]).re;
            }
        }
    }
    Ok(TripleProducts {
        dim: sic.dim(),
        n,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The exact qubit fiducial with Bloch vector (1,1,1)/√3.
    pub(crate) fn qubit_fiducial() -> Fiducial {
        let s = 1.0 / 3.0_f64.sqrt();
        let cos_half = ((1.0 + s) / 2.0).sqrt();
        let sin_half = ((1.0 - s) / 2.0).sqrt();
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        Fiducial::new(DVector::from_vec(vec![c(cos_half, 0.0), phase * sin_half]))
            .expect("unit vector")
    }

    #[test]
    fn basis_fiducial_orbit_is_not_a_sic() {
        let phi = Fiducial::new(DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let projectors = orbit(&phi);
        assert_eq!(projectors.len(), 4);
        for p in &projectors {
            assert_abs_diff_eq!(p.trace_re(), 1.0, epsilon = 1e-12);
        }
        let report = verify_sic(&projectors, 1e-9).unwrap();
        assert!(!report.passed);
        // An orthogonal pair sits at overlap 0, a full 1/3 away.
        assert!(report.max_pairwise_deviation >= 1.0 / 3.0 - 1e-12);
    }

    #[test]
    fn exact_qubit_fiducial_orbit_is_a_sic() {
        let sic = SicStructure::from_fiducial(qubit_fiducial(), 1e-10);
        assert!(sic.is_verified());
        assert!(sic.max_deviation() < 1e-13);
        let report = verify_sic(sic.projectors(), 1e-10).unwrap();
        assert!(report.passed);
        assert!(report.sum_deviation < 1e-12);
    }

    #[test]
    fn frame_potential_hits_known_values() {
        // (d-1)/(d+1) at a SIC fiducial: 1/3 for d=2.
        assert_abs_diff_eq!(
            frame_potential(&qubit_fiducial()),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        // 1/2 for d=3.
        let mut config = SicSearchConfig::new(3);
        config.seed = 2;
        let (fiducial, _) = find_sic_fiducial(&config).unwrap();
        assert_abs_diff_eq!(frame_potential(&fiducial), 0.5, epsilon = 1e-9);
        // Basis fiducial: only the Z term survives, |⟨0|Z|0⟩|⁴ = 1.
        let basis = Fiducial::new(DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_abs_diff_eq!(frame_potential(&basis), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sic_projectors_have_uniform_overlap_and_effects_resolve_identity() {
        use crate::operator::{hs_inner, validate_povm};
        let sic = SicStructure::from_fiducial(qubit_fiducial(), 1e-10);
        for i in 0..4 {
            for k in 0..4 {
                if i != k {
                    let overlap = hs_inner(&sic.projectors()[i], &sic.projectors()[k]).unwrap();
                    assert_abs_diff_eq!(overlap, 1.0 / 3.0, epsilon = 1e-13);
                }
            }
        }
        let report = validate_povm(sic.effects(), &crate::tolerance::ToleranceSet::default())
            .unwrap();
        assert!(report.passed());
        // Direct matrix addition as the sum oracle.
        let mut sum = crate::matrix::ComplexMatrix::zeros(2, 2);
        for h in sic.effects() {
            sum = &sum + h.matrix();
        }
        assert!(sum.max_diff(&crate::matrix::ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn triple_products_stay_symmetric_in_higher_dimension() {
        // Sampled index triples at d=4.
        let mut config = SicSearchConfig::new(4);
        config.seed = 12;
        config.target_deviation = 1e-12;
        let (fiducial, _) = find_sic_fiducial(&config).unwrap();
        let sic = SicStructure::from_fiducial(fiducial, 1e-12);
        let triples = triple_products(&sic).unwrap();
        let n = 16;
        for step in 0..200 {
            let i = (7 * step + 1) % n;
            let j = (11 * step + 3) % n;
            let k = (13 * step + 5) % n;
            let base = triples.get(i, j, k);
            for perm in [
                triples.get(i, k, j),
                triples.get(j, i, k),
                triples.get(j, k, i),
                triples.get(k, i, j),
                triples.get(k, j, i),
            ] {
                assert!((base - perm).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn frame_potential_respects_lower_bound() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(271);
        for d in 2..=5 {
            let bound = (d as f64 - 1.0) / (d as f64 + 1.0);
            for _ in 0..50 {
                let v = DVector::from_fn(d, |_, _| crate::random::standard_complex(&mut rng))
                    .normalize();
                let phi = Fiducial::new(v).unwrap();
                assert!(frame_potential(&phi) >= bound - 1e-12);
            }
        }
    }

    #[test]
    fn wrong_projector_count_is_rejected() {
        let phi = qubit_fiducial();
        let mut projectors = orbit(&phi);
        projectors.pop();
        assert!(matches!(
            verify_sic(&projectors, 1e-9),
            Err(SicError::WrongCount { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn orbit_relabeling_permutes_the_projector_set() {
        // Conjugating the fiducial by any displacement permutes the orbit.
        for d in 2..=3 {
            let mut config = SicSearchConfig::new(d);
            config.seed = 5;
            let (fiducial, _) = find_sic_fiducial(&config).unwrap();
            let base = orbit(&fiducial);
            let shift = wh_displacement(d, 1, d - 1).unwrap();
            let moved = Fiducial::new(shift.matrix().as_dmatrix() * fiducial.amplitudes())
                .expect("unitary preserves norm");
            let relabeled = orbit(&moved);
            for m in &relabeled {
                let matched = base.iter().any(|b| b.matrix().max_diff(m.matrix()) < 1e-9);
                assert!(matched, "relabeled projector missing from base orbit (d={d})");
            }
        }
    }

    #[test]
    fn triple_products_match_brute_force_traces() {
        let sic = SicStructure::from_fiducial(qubit_fiducial(), 1e-10);
        let triples = triple_products(&sic).unwrap();
        let projectors = sic.projectors();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let direct = (&(projectors[i].matrix() * projectors[j].matrix())
                        * projectors[k].matrix())
                        .trace()
                        .re;
                    assert_abs_diff_eq!(triples.get(i, j, k), direct, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn triple_products_have_unit_diagonal_and_sic_overlaps() {
        let sic = SicStructure::from_fiducial(qubit_fiducial(), 1e-10);
        let triples = triple_products(&sic).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(triples.get(i, i, i), 1.0, epsilon = 1e-9);
            for k in 0..4 {
                if i != k {
                    assert_abs_diff_eq!(triples.get(i, i, k), 1.0 / 3.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn triple_products_require_a_verified_sic() {
        let basis = Fiducial::new(DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let not_sic = SicStructure::from_fiducial(basis, 1e-9);
        assert!(!not_sic.is_verified());
        assert!(matches!(
            triple_products(&not_sic),
            Err(SicError::UnverifiedSic { .. })
        ));
    }
}
