//! Choi-operator calculus for multi-time quantum processes and their
//! classification by memory structure.

pub mod choi;
pub mod classify;
pub mod error;
pub mod label;
pub mod operator;
pub mod spectral;
pub mod tolerance;

pub use choi::{
    choi_ebc, choi_identity, choi_trace_and_prepare, choi_trace_map, choi_unitary, link_all,
    link_product, ChoiChannel, Povm,
};
pub use error::{Error, Result};
pub use label::{total_dim, Port, Role, SpaceLabel};
pub use operator::{CMatrix, CVector, LabeledOperator};
pub use spectral::{
    hermitian_eigen, pseudo_inverse_sqrt, relative_entropy, trace_norm, Eigen,
};
pub use tolerance::Tolerances;
pub mod examples;
pub mod process;
pub mod random;
pub mod solver;

pub use classify::{classify, ClassificationReport, ProcessClass, Verdict};
pub use process::ProcessTensor;
pub use solver::{FeasibilityResult, SdpFeasibility, SolverAdapter};
