//! Numerical toolkit for quantum search protected by a decoherence-free subspace.
//!
//! Physical qubits are spin-1/2 sites; pairs of spins encode logical qubits inside
//! the zero-magnetization sector, which collective dephasing cannot touch. The crate
//! provides, bottom to top:
//!
//! - [`spinlab`]: Pauli operators, pair Hamiltonians, exact unitary propagation and
//!   Hermitian eigensolving over tagged state spaces.
//! - [`dfs`]: enumeration of the protected sector, pair-encoded logical operators,
//!   and the maps between the full, sector, and logical spaces.
//! - [`grover`]: continuous-time search with oracle plus uniform driver, validated
//!   against its closed-form solution.
//! - [`aqc`]: the adiabatic engine — interpolated Hamiltonians, spectral-gap
//!   profiles, and gap-optimized switching schedules.
//! - [`trotter`]: symmetric-splitting realizations of the adiabatic sweep and the
//!   fidelity sweeps over (T, M, K) grids.
//! - [`krotov`]: iterative optimal-control refinement of the switching schedule.
//! - [`noise`]: system–bath simulations that check the dephasing-protection claim.

pub mod aqc;
pub mod dfs;
pub mod error;
pub mod grover;
pub mod krotov;
pub mod noise;
pub mod space;
pub mod spinlab;
pub mod trotter;

pub use error::CoreError;
pub use space::Space;
pub use spinlab::{Operator, QuantumState};

/// Crate-wide numerical tolerances. These are contracts, not tuning knobs:
/// tests and the acceptance suite pin against them.
pub mod tol {
    /// Max-norm deviation allowed for an operator flagged Hermitian.
    pub const HERMITICITY: f64 = 1e-12;
    /// Allowed drift of the state norm per propagation step.
    pub const NORM_PRESERVATION: f64 = 1e-10;
    /// Eigenpair residual bound for the eigensolver.
    pub const EIG_RESIDUAL: f64 = 1e-9;
    /// Max-norm bound on [H, Z_total] below which H counts as sector-preserving.
    pub const SYMMETRY_COMMUTATOR: f64 = 1e-10;
    /// Projections renormalize only when the leaked weight stays below this.
    pub const PROJECTION_RENORM: f64 = 1e-6;
    /// Out-of-subspace support allowed when restricting a state exactly.
    pub const EMBED_LEAKAGE: f64 = 1e-12;
}

/// Storage policy: operators denser than this fraction stay dense.
pub const SPARSE_DENSITY_MAX: f64 = 0.10;
/// Storage policy: below this dimension operators stay dense regardless of density.
pub const SPARSE_MIN_DIM: usize = 1024;
/// Above this dimension, propagation of sparse operators switches to Krylov action.
pub const KRYLOV_DIM_THRESHOLD: usize = 4096;

/// A complex amplitude.
pub type C64 = num_complex::Complex64;
