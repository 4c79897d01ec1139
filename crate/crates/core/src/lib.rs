//! Classical QAOA mean values through light-cone decomposition.
//!
//! The engine splits `E_p(γ, β)` of an Ising cost operator into one
//! expectation per Hamiltonian term, simulates each term's light cone as a
//! small statevector circuit, and sums the weighted results.
//!
//! ```
//! use qaoa_lightcone::{expectation, EngineConfig, IsingModel, ParamSchedule};
//!
//! let model = IsingModel::new(2, &[(0, 1, 1.0)], &[], 0.0).unwrap();
//! let params = ParamSchedule::new(
//!     vec![std::f64::consts::FRAC_PI_4],
//!     vec![std::f64::consts::FRAC_PI_8],
//! )
//! .unwrap();
//! let report = expectation(&model, &params, &EngineConfig::default()).unwrap();
//! assert!((report.energy + 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod ising;
pub mod lightcone;
pub mod mean_value;
pub mod optimize;
pub mod oracle;
pub mod problems;
pub mod sim;

pub use error::{Error, Result};
pub use ising::{Edge, IsingModel, SpinAssignment};
pub use lightcone::{decompose, extract_ball, Anchor, AnchoredSubgraph, Term, TermId, TermKind};
pub use mean_value::{
    expectation, grid_scan, Axis, EngineConfig, GridScan, MeanValueReport, PreparedModel,
    Reduction, TermResult,
};
pub use optimize::{optimize, OptimizeConfig, OptimizeResult, TraceEntry};
pub use problems::PlainGraph;
pub use sim::{ParamSchedule, StateVector};
