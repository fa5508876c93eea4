//! Exact computations with the octonion algebra over a prime field F_p: the
//! automorphism group G2(p) acting on the imaginary octonions `V`, the
//! 14-dimensional G2-invariant subspace `U` of `Λ²V`, and the class-two,
//! exponent-p group `P_U = V × Λ²V/U` of order p^14.

pub mod error;
pub mod exterior;
pub mod field;
pub mod g2;
pub mod group;
pub mod linalg;
pub mod octonion;
pub mod verify;

pub use error::{OctoError, Result};
pub use exterior::{
    equivariance_check, ftilde_matrix, hom_space, is_invariant, kernel_u, lambda2, quotient_action,
    spin, wedge, HomSpace, SubspaceU,
};
pub use field::FieldPrime;
pub use g2::{
    count_triples, extend_triple, is_automorphism, random_g2, BasicTriple, G2Element, G2Sampler,
};
pub use group::{
    lift_automorphism, structure_report, verify_group_axioms, PGroupContext, PGroupElement,
};
pub use linalg::{FpMatrix, FpVector, Subspace};
pub use octonion::{f_map, ImaginaryOctonion, Octonion};
pub use verify::{find_nonstabilizing_isometry, run_pipeline, Certificate, CheckStatus};
