//! Seeded random test objects: Ginibre density operators, Haar unitaries,
//! and random POVMs. Everything is a pure function of its seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;
use crate::operator::{DensityOperator, HermitianOperator, OperatorError, Povm, UnitaryOperator};
use crate::tolerance::ToleranceSet;

fn rng_for(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub(crate) fn standard_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| standard_complex(rng))
}

/// Random density operator of the requested rank via the Ginibre method:
/// `G G† / tr(G G†)` with `G` of shape `d x rank`. Deterministic per seed.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityOperator, OperatorError> {
    if rank < 1 || rank > d {
        return Err(OperatorError::BadRank { rank, dim: d });
    }
    let mut rng = rng_for(seed);
    let g = ginibre(&mut rng, d, rank);
    let gg = &g * g.adjoint();
    let trace = gg.trace().re;
    let rho = gg.scale(1.0 / trace);
    DensityOperator::new(
        ComplexMatrix::new(rho).expect("Gaussian samples are finite"),
        &ToleranceSet::default(),
    )
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// the R diagonal folded into Q. Deterministic per seed.
pub fn random_unitary(d: usize, seed: u64) -> UnitaryOperator {
    let mut rng = rng_for(seed);
    let g = ginibre(&mut rng, d, d);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / Complex64::new(rjj.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOperator::new(
        ComplexMatrix::new(q).expect("QR output is finite"),
        &ToleranceSet::default(),
    )
    .expect("QR of a Ginibre matrix is unitary to machine precision")
}

/// Random von Neumann measurement: the rank-1 projectors onto the columns
/// of a Haar-random unitary.
pub fn random_projective_povm(d: usize, seed: u64) -> Povm {
    let u = random_unitary(d, seed);
    let effects: Vec<HermitianOperator> = (0..d)
        .map(|k| {
            let col: DVector<Complex64> = u.matrix().as_dmatrix().column(k).into_owned();
            HermitianOperator::projector(&col)
        })
        .collect();
    Povm::new(effects, &ToleranceSet::default()).expect("orthonormal projectors resolve identity")
}

/// Random `n_out`-outcome POVM: Wishart effects `A_j = G_j G_j†` whitened by
/// the inverse square root of their sum.
pub fn random_povm(d: usize, n_out: usize, seed: u64) -> Povm {
    assert!(n_out >= 1, "POVM needs at least one outcome");
    let mut rng = rng_for(seed);
    let raw: Vec<DMatrix<Complex64>> = (0..n_out)
        .map(|_| {
            let g = ginibre(&mut rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    let mut sum = DMatrix::<Complex64>::zeros(d, d);
    for a in &raw {
        sum += a;
    }
    let whitener = inv_sqrt_hermitian(&sum);
    let effects: Vec<HermitianOperator> = raw
        .iter()
        .map(|a| {
            let e = &(&whitener * a) * &whitener;
            // Symmetrize away the rounding skew before validation.
            let e = (&e + e.adjoint()).scale(0.5);
            HermitianOperator::new(
                ComplexMatrix::new(e).expect("whitened effect is finite"),
                &ToleranceSet::default(),
            )
            .expect("whitened effect is Hermitian")
        })
        .collect();
    Povm::new(effects, &ToleranceSet::default()).expect("whitened effects resolve identity")
}

fn inv_sqrt_hermitian(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let cm = ComplexMatrix::new(m.clone()).expect("finite");
    let eig = cm.hermitian_eigen();
    let inv_sqrt: Vec<f64> = eig.eigenvalues.iter().map(|&l| 1.0 / l.sqrt()).collect();
    eig.recompose_with(&inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::validate_povm;

    #[test]
    fn rank_one_state_is_pure() {
        let rho = random_density(4, 1, 42).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_rank_state_has_positive_spectrum() {
        let rho = random_density(4, 4, 42).unwrap();
        let eig = rho.matrix().hermitian_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > 1e-8));
    }

    #[test]
    fn requested_rank_is_attained() {
        for rank in 1..=4 {
            let rho = random_density(4, rank, 7).unwrap();
            let eig = rho.matrix().hermitian_eigen();
            let effective = eig.eigenvalues.iter().filter(|&&l| l > 1e-8).count();
            assert_eq!(effective, rank);
        }
    }

    #[test]
    fn same_seed_reproduces_density_bitwise() {
        let a = random_density(3, 2, 123).unwrap();
        let b = random_density(3, 2, 123).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn bad_rank_is_rejected() {
        assert!(matches!(
            random_density(3, 0, 1).unwrap_err(),
            OperatorError::BadRank { rank: 0, dim: 3 }
        ));
        assert!(matches!(
            random_density(3, 4, 1).unwrap_err(),
            OperatorError::BadRank { rank: 4, dim: 3 }
        ));
    }

    #[test]
    fn unitary_in_dimension_one_is_a_phase() {
        let u = random_unitary(1, 9);
        let z = u.matrix().as_dmatrix()[(0, 0)];
        assert!((z.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary_to_machine_precision() {
        for d in 1..=6 {
            let u = random_unitary(d, 31 + d as u64);
            assert!(u.matrix().unitarity_deviation() <= 1e-12);
        }
    }

    #[test]
    fn same_seed_reproduces_unitary_bitwise() {
        let a = random_unitary(4, 77);
        let b = random_unitary(4, 77);
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn random_povms_validate() {
        let tol = ToleranceSet::default();
        for d in 2..=4 {
            let p = random_projective_povm(d, 3 * d as u64);
            assert!(validate_povm(p.effects(), &tol).unwrap().passed());
            let q = random_povm(d, 2 * d, 5 * d as u64);
            assert!(validate_povm(q.effects(), &tol).unwrap().passed());
        }
    }
}
