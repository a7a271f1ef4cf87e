//! Discrete-time quantum walks on bounded graphs.
//!
//! The walk is described in the walker-operator picture: a walker at position
//! `x` carrying coin value `c` (the vertex it arrived from) is one basis state
//! of a `|G|²`-dimensional space. One time step applies the per-vertex coin
//! `A^(x)` and then moves the walker, `w(x,c)† -> Σ_j A^(x)_{c,j} w(j,x)†`.
//!
//! Modules:
//! - [`graph`]: walk topologies and the `(position, coin)` basis ordering
//! - [`coin`]: biased Hadamard coins and per-vertex coin assignments
//! - [`evolution`]: the global one-step unitary and single-walker states
//! - [`entanglement`]: Shannon-entropy and Meyer-Wallach metrics
//! - [`spectral`]: eigenphases, rational approximation, periods and revivals
//! - [`multiwalker`]: two-photon evolution and post-selection
//! - [`optical`]: mapping onto mode-bundle coin layers and mode permutations
//! - [`sweep`]: batch evaluation over parameter grids
//!
//! Vertices, coin values and optical modes are 1-based throughout the public
//! API; the flat basis index of `(x, c)` is `(x-1)·|G| + c`.

pub mod coin;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod graph;
pub mod linalg;
pub mod multiwalker;
pub mod optical;
pub mod par;
pub mod spectral;
pub mod sweep;

pub use coin::{CoinAssignment, CoinMatrix};
pub use entanglement::{EntanglementSeries, Metric};
pub use error::{Result, WalkError};
pub use evolution::{GlobalUnitary, WalkerState};
pub use graph::{BasisIndex, Graph};
pub use multiwalker::{PostSelection, TwoWalkerState};
pub use optical::OpticalCircuit;
pub use par::Execution;
pub use spectral::{Dynamics, SpectrumAnalysis};

/// Complex amplitude type used everywhere in the crate.
pub type C64 = num_complex::Complex64;

/// Tolerance on `‖A†A − I‖_max` for coins and global unitaries.
pub const UNITARY_TOL: f64 = 1e-12;

/// Tolerance on `|‖ψ‖ − 1|` accepted when constructing states.
pub const NORM_TOL: f64 = 1e-9;
