//! Certified membership of distances and their finite unit-distance witnesses.

pub mod derivation;
pub mod expand;
pub mod graph;
pub mod membership;
pub mod validate;
pub mod wire;

pub use derivation::{
    k_of_n, rho_sq, Derivation, DerivationBuilder, DerivationError, Node, NodeId, Step,
};
pub use expand::Role;
pub use graph::{
    build_witness, witness_counts, witness_stats, WitnessCounts, WitnessError, WitnessGraph,
    WitnessJson, WitnessStats,
};
pub use membership::{derive_membership, family_target_sq};
pub use validate::{all_pass, validate_derivation, CheckResult};
