//! Finite-truncation Fock-space laboratory.
//!
//! Every operator of the free fermion theory is built here as an exact sparse
//! matrix over Gaussian rationals, and the bosonization identities are checked
//! on the part of the truncated space where the truncation cannot be seen.

pub mod bosons;
pub mod counting;
pub mod expr;
pub mod identities;
pub mod operator;
pub mod ops;
pub mod reconstruct;
pub mod space;

pub use bosons::{boson_state, inner_product, is_orthonormal_pair, labels_up_to, BosonLabels, BosonState};
pub use counting::{degeneracy_counts, jacobi_check, partition_numbers, JacobiReport};
pub use expr::{Evaluation, Expr, Term};
pub use identities::{
    check_instances, identity_residual, identity_residual_with, instance_residual, instances, Failure, Identity,
    IdentityReport, Instance,
};
pub use operator::{
    boson_ladder, boson_ladder_dagger, density_op, field_op, free_hamiltonian, klein_factor, klein_factor_dagger,
    ladder_op, ladder_op_dagger, SparseOperator,
};
pub use ops::{Amp, FockOp, Image, Prediction, SparseVec};
pub use reconstruct::{partitions, reconstructed_field, reconstruction_check, Reconstruction, ReconstructionReport};
pub use space::{build_space, build_space_with, FockSpace, Mode, OccupationState, SignConvention};
