//! Numerical toolkit for two-mode bosonic systems on a truncated Fock space.
//!
//! The crate builds the asymmetric projection operators obtained by swapping
//! the real and imaginary parts of the entangled-state variable in the bra of
//! the `|η⟩` / `|ξ⟩` completeness relations, and shows that they coincide with
//! parity detection behind a balanced beam splitter. Every operator is built
//! by more than one independent route so the routes can be compared:
//!
//! * [`projectors::mu_conjugation`]: `U_BS† (I ⊗ Π) U_BS` via a dense matrix
//!   exponential,
//! * [`projectors::mu_fock`]: the closed Fock-sum form,
//! * [`projectors::mu_from_eta_quadrature`] / [`projectors::mu_from_xi_quadrature`]:
//!   midpoint quadrature over the entangled-state plane,
//! * [`projectors::mu_coherent_quadrature`]: a 4-D coherent-state integral.
//!
//! [`metrology`] runs the interferometer pipeline (input state, first beam
//! splitter, phase shift, parity detection) and compares against the NOON and
//! coherent⊗squeezed-vacuum closed forms.
//!
//! Basis ordering is fixed crate-wide: flat index `k = m·d + n` with mode `a`
//! major and mode `b` minor (see [`tensor::ModeIndexer`]).

pub mod angle;
pub mod cli;
pub mod error;
pub mod metrology;
pub mod projectors;
pub mod quadrature;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
