//! Transformations that generate transparent pairs from unit sections, their
//! inverses, holomorphic section factories and the degree reduction that runs
//! the construction backwards.

pub mod chain;
pub mod factory;
pub mod reduce;
pub mod section;
pub mod transform;

pub use chain::{generate_chain, Chain, StepSpec};
pub use factory::{eval_zeta, factory_section, holomorphic_g_factory, stereographic, weierstrass_p, FactorySpec, ZetaSpec};
pub use reduce::{reduce_degree, Reduction, ReductionDiagnostics, ReductionOptions};
pub use section::{gmero_residual, lemma_eq_residuals, vertical_solution_a, LemmaEqResiduals, Projector, UnitSection};
pub use transform::{
    backlund_transform, backlund_transform_with, inverse_backlund, q_lemma_residuals, su2_parity, two_step_su2,
    BacklundCertificate, InverseResult, QLemmaResiduals, StepResiduals, StepTolerances, TwoStep,
};
