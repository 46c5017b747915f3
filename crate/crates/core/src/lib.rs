//! Optimal controller measurements for controlled teleportation over a
//! three-qubit pure channel in canonical form.

pub mod analytic;
pub mod error;
pub mod numeric;
pub mod objective;
pub mod protocol;
pub mod state;
pub mod two_qubit;

pub use analytic::{
    candidates_for, epr_collapse, pmax_analytic, CandidatePoint, CollapseReport, Method, OptimumReport,
};
pub use error::{Error, Result};
pub use numeric::{objective_landscape, pmax_numeric, OptimizerConfig};
pub use objective::{
    charlie_collapse, objective_f, success_probability, Branch, BranchDecomposition, MeasurementBasis,
};
pub use protocol::{run_protocol, MessageQubit, ProtocolTrace};
pub use state::{classify, random_state, CanonicalState, CaseLabel, Classification, MuClass, Tolerances};
pub use two_qubit::{concurrence, schmidt_decompose, SchmidtForm, TwoQubitPure};
