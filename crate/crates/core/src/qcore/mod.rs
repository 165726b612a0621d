//! Exact two-level quantum kernel: labeled bases, pure states, local basis
//! changes, projective measurement, density operators and dephasing.

mod basis;
mod density;
mod state;

pub use basis::{Angle, Basis, Outcome, SystemKind, C64};
pub use density::{born_distribution_mixed, dephase, DensityOperator};
pub use state::{born_distribution, make_state, LocalUnitary, OutcomeDistribution, StateVector, NORM_TOLERANCE};

