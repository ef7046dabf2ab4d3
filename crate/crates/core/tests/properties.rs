//! Property tests for the algebraic invariants that hold for *all* inputs,
//! not just the curated fixtures.

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use sicore_core::io::MatrixJson;
use sicore_core::random::{random_density, random_povm, random_projective_povm};
use sicore_core::sic::{frame_potential, Fiducial};
use sicore_core::{born_probabilities, hs_inner, ComplexMatrix};

fn complex_pairs(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Born probabilities form a distribution for every valid state and
    /// measurement: entries in [0, 1] and total 1.
    #[test]
    fn born_outputs_are_distributions(seed in 0u64..10_000, d in 2usize..=6, projective in any::<bool>()) {
        let rank = 1 + (seed as usize % d);
        let rho = random_density(d, rank, seed).unwrap();
        let povm = if projective {
            random_projective_povm(d, seed ^ 0xABCD)
        } else {
            random_povm(d, d + 2, seed ^ 0xBEEF)
        };
        let p = born_probabilities(&rho, &povm).unwrap();
        for &entry in p.entries() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&entry));
        }
        prop_assert!((p.sum() - 1.0).abs() <= 1e-9);
    }

    /// The Hilbert-Schmidt inner product is symmetric and linear in each
    /// argument.
    #[test]
    fn hs_inner_is_symmetric_and_bilinear(seed in 0u64..10_000, scale in -3.0f64..3.0) {
        let a = random_density(3, 2, seed).unwrap().as_hermitian();
        let b = random_density(3, 3, seed ^ 0x1111).unwrap().as_hermitian();
        let c = random_density(3, 1, seed ^ 0x2222).unwrap().as_hermitian();
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-10);

        // hs(a, scale·b + c) = scale·hs(a,b) + hs(a,c); build the
        // combination at the matrix level.
        let combo = ComplexMatrix::new(
            b.matrix().as_dmatrix().scale(scale) + c.matrix().as_dmatrix(),
        )
        .unwrap();
        let combo = sicore_core::HermitianOperator::new(combo, &Default::default()).unwrap();
        let lhs = hs_inner(&a, &combo).unwrap();
        let rhs = scale * ab + hs_inner(&a, &c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    /// The frame potential of any unit vector sits on or above the SIC
    /// bound (d-1)/(d+1).
    #[test]
    fn frame_potential_never_beats_the_bound(d in 2usize..=5, raw in complex_pairs(5)) {
        let v = DVector::from_fn(d, |k, _| Complex64::new(raw[k].0, raw[k].1));
        let norm = v.norm();
        prop_assume!(norm > 1e-3);
        let fiducial = Fiducial::new(v.unscale(norm)).unwrap();
        let bound = (d as f64 - 1.0) / (d as f64 + 1.0);
        prop_assert!(frame_potential(&fiducial) >= bound - 1e-12);
    }

    /// Matrix JSON round-trips reproduce every entry bit for bit.
    #[test]
    fn matrix_json_round_trip_is_bitwise(d in 1usize..=4, raw in complex_pairs(16)) {
        let entries: Vec<Complex64> = raw[..d * d]
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        let m = ComplexMatrix::from_rows(d, d, &entries).unwrap();
        let json = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let parsed: MatrixJson = serde_json::from_str(&json).unwrap();
        let back = parsed.to_matrix("inline").unwrap();
        prop_assert_eq!(m, back);
    }
}
