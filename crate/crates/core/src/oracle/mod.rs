//! Exact closed-system propagation on a truncated occupation basis.
//!
//! Modes are ordered `(L_V, L_H, R_V, R_H, M)`. The Hamiltonian is built as
//! a sparse matrix, states are propagated with a Lanczos exponential, and
//! thermal or phase-averaged inputs are deterministic finite mixtures whose
//! branches evolve independently.

pub mod dump;
pub mod krylov;
pub mod layout;
pub mod observables;
pub mod operator;
pub mod run;
pub mod state;

pub use dump::{read_dump, write_dump};
pub use krylov::{evolve, Propagator, DEFAULT_TOL};
pub use layout::{ModeLayout, DEFAULT_DIMENSION_CAP, MODE_NAMES};
pub use observables::{branch_moments, expectation, BranchMoments};
pub use operator::{build_hamiltonian, SparseOperator};
pub use run::{
    initial_phonon_cutoff, oracle_run, photon_cutoff_for, run_scenario, select_phonon_cutoff,
    series_change, OracleOptions, OracleRun,
};
pub use state::{
    prepare_branches, prepare_state, prepare_state_with, Branch, BranchSpec, CoherentPhase,
    PrepareOptions, TruncatedState, DEFAULT_TAIL,
};
