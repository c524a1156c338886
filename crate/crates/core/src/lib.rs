//! Entanglement dynamics of two qubits, each coupled to its own Ohmic
//! reservoir with a Lorentz-Drude cutoff.
//!
//! The pipeline is: [`kernels`] for the time-dependent coefficients `Δ(t)`,
//! `γ(t)`; [`dynamics`] to integrate X-shaped density matrices;
//! [`entanglement`] for concurrence and sudden-death analysis;
//! [`controller`] for the open-loop temperature schedule; and [`sweep`] to run
//! parameter grids.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod kernels;
pub mod ode;
pub mod quadrature;
pub mod special_fn;
pub mod sweep;
pub mod validate;

pub use controller::{controlled_temperature, evolve_controlled, ControllerConfig};
pub use dynamics::{evolve, evolve_full_liouvillian, stationary_state, Mode, Trajectory, XState};
pub use entanglement::{
    analyze_esd, concurrence_general, concurrence_x, entanglement_of_formation, estimate_xi,
    ConcurrenceSeries, ESDReport,
};
pub use error::{Error, Result};
pub use kernels::{BathParams, CoefficientModel, CoefficientSample, Method};
pub use sweep::{run_sweep, Scenario, SweepResult, SweepSpec};
