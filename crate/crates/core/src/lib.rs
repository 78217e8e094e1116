//! Operator laboratory for the massless Schwinger model on a circle in
//! Coulomb gauge.
//!
//! The crate builds the truncated zero-charge fermionic Fock space, the
//! modular group of large gauge transformations acting on it, the
//! bosonization operators (densities, currents, the Kronig identity), the
//! normal-ordered Coulomb interaction with its Bogoliubov dressing, an
//! independent bosonic-oscillator representation, and the gauge-zero-mode
//! grid with twisted-periodic boundary conditions. Everything is assembled
//! as sparse Hermitian matrices over deterministic basis catalogs so that
//! each operator identity can be checked entry by entry.

pub mod bosonrep;
pub mod coulomb;
pub mod densities;
pub mod error;
pub mod fock;
pub mod gaugegrid;
pub mod modular;
pub mod op;
pub mod solver;

pub use error::CoreError;
pub use fock::StateVector;
pub use op::OperatorMatrix;
