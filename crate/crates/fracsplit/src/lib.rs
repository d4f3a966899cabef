//! Solver library for vector-valued fractional reaction-diffusion equations
//!
//! ∂ₜu + σ(−Δ)^β u = F(t, u) on a periodic box, integrated with the
//! Lie-Trotter scheme: the fractional heat semigroup S(h) is applied
//! spectrally (exact per Fourier mode), then the doubled reaction flow
//! ż = 2F(t, z) is advanced pointwise over the second half of each period.
//!
//! The crate is organised around that split:
//!
//! - [`kernel`] — rotation-invariant stable densities g_β, the scaled
//!   heat kernel G_{σ,β}, and spectral application of the semigroup.
//! - [`reaction`] — the reaction model suite (Fisher-KPP, complex
//!   Ginzburg-Landau, FitzHugh-Nagumo, trait-structured population) and
//!   the pointwise nonlinear flow.
//! - [`splitting`] — the on/off schedule α_h, its integral τ_h, the
//!   Lie-Trotter recursion, full simulations and self-convergence studies.
//! - [`regions`] — time-indexed convex region families and trajectory
//!   audits certifying that simulations stay inside them.
//! - [`asymptotics`] — spatial boundary-limit tracking against the
//!   reaction ODE.
//! - [`config`] / [`io`] — JSON run configuration, snapshot and report
//!   serialization for the `fracsplit` CLI.

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod reaction;
pub mod regions;
pub mod splitting;

pub use error::Error;
pub use grid::{Field, GridSpec};
pub use kernel::{heat_kernel, semigroup_multiplier, stable_density, KernelSpec};
pub use reaction::{FlowConfig, FlowFactor, ReactionModel};
pub use regions::RegionFamily;
pub use splitting::{SplitSchedule, Trajectory};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
