//! Stationary entanglement between an optical whispering-gallery mode, a
//! magnon mode and a microwave cavity mode.
//!
//! The pipeline is linear: raw [`PhysicalParams`] are turned into
//! [`DerivedParams`], those into the drift/diffusion pair of the linearized
//! quadrature dynamics, the continuous Lyapunov equation yields the
//! stationary covariance matrix, and logarithmic negativity is read off
//! each two-mode reduction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod oracle;
pub mod params;
pub mod smallmat;
pub mod sweep;

pub use dynamics::{build_matrices, check_stability, steady_state, SteadyState, SystemMatrices};
pub use entanglement::{all_pairs, log_negativity, reduce, BipartiteCov, EntanglementResult, Pair};
pub use error::{Error, Result};
pub use params::{DerivedParams, MaterialParams, PhysicalConstants, PhysicalParams};
pub use smallmat::Mat;

/// Reference rate used to nondimensionalize every rate entering the drift
/// and diffusion matrices: 2π × 1 MHz.
pub const KAPPA_REF: f64 = 2.0 * std::f64::consts::PI * 1.0e6;

/// Relative stability margin: eigenvalues with real part above
/// `-EPS_STAB_REL * max|A_ij|` count as unstable.
pub const EPS_STAB_REL: f64 = 1.0e-9;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
