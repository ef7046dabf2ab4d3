//! Numerical core for SIC-POVM construction and the probabilistic
//! representation of quantum states.
//!
//! The crate builds symmetric informationally complete (SIC) measurements by
//! frame-potential minimization over Weyl-Heisenberg orbits, converts density
//! operators to and from the probability vectors they induce on a fiducial
//! SIC, and evaluates the Born rule written purely in terms of probabilities
//! (the urgleichung) together with its special cases: the classical Law of
//! Total Probability, the von Neumann reduction, the Schrödinger form, and
//! the generalized `(alpha, beta)` family that also covers real vector
//! spaces.
//!
//! All operations are pure functions over immutable values; everything is
//! safe to share across threads. SIC search restarts run in parallel with a
//! deterministic reduction, so results depend only on the seed.

pub mod io;
pub mod matrix;
pub mod operator;
pub mod random;
pub mod rep;
pub mod sic;
pub mod tolerance;
pub mod urgleichung;

pub use matrix::ComplexMatrix;
pub use operator::{
    born_probabilities, evolve, hs_inner, luders_update, validate_density, validate_povm,
    DensityOperator, HermitianOperator, OperatorError, Povm, UnitaryOperator, ValidationReport,
};
pub use random::{random_density, random_povm, random_projective_povm, random_unitary};
pub use rep::{
    check_validity, probs_to_state, repair_p_vector, state_to_probs, PValidity, ProbVector,
    RepError,
};
pub use sic::{
    find_sic_fiducial, frame_potential, orbit, triple_products, verify_sic, wh_displacement,
    Fiducial, SearchDiagnostics, SicError, SicSearchConfig, SicStructure, TripleProducts,
    VerificationReport,
};
pub use tolerance::ToleranceSet;
pub use urgleichung::{
    conditional_matrix, conditional_matrix_from_projectors, generalized_predict, ltp_predict,
    residual, schrodinger_predict, urgleichung_predict, von_neumann_predict, ConditionalMatrix,
    UrgleichungError, UrgleichungReport,
};
