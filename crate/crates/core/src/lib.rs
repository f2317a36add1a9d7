//! Desk-scale laboratory for the essential norm of multiplication operators
//! on `L_p(mu)`, where `mu` is a finite list of atoms plus a dyadically
//! discretized diffuse interval.
//!
//! The crate is organised bottom-up:
//!
//! * [`measure`]: measure spaces, refinement, atom tail rules;
//! * [`lpspace`]: step functions and weighted `p`-norms;
//! * [`operator`]: dense and low-rank operators, pinching, norms;
//! * [`lattice`]: modulus, join, meet, and the projection onto the centre;
//! * [`essnorm`]: the essential-norm formula and its certificates;
//! * [`experiments`]: JSON-configured scenarios, CSV output, and the CLI
//!   backend.

pub mod error;
pub mod essnorm;
pub mod experiments;
pub mod lattice;
pub mod lpspace;
pub mod measure;
pub mod operator;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
pub use essnorm::{
    best_diagonal_rank_k, diagonal_compactification, essential_norm, pinching_lower_bound,
    qn_decay_profile, witness_lower_bound, witness_sets, Construction, EssNormProblem,
    FunctionKernel, LowerBoundCertificate,
};
pub use lattice::{centre_project, join, meet, modulus, regular_norm, RegularDecomposition};
pub use lpspace::{norm_p, normalized_indicator, Profile, StepFunction};
pub use measure::{build_space, refine, MeasureSpace, TailDescriptor};
pub use operator::{
    mult_op, opnorm_estimate, opnorm_p1, pinch, projections, rank_one_atomic_offdiag,
    rank_one_diffuse, LinearOperator, LowRankOperator, MatrixOperator, MultiplicationOperator,
};
