//! Operator means and Lebesgue decompositions of completely positive maps
//! between matrix algebras, computed through Choi matrices.
//!
//! The crate is layered bottom-up:
//!
//! * [`hermlinalg`]: Hermitian/PSD kernel (spectra, pseudo-inverses, supports),
//! * [`opmeans`]: parallel sum and Kubo–Ando connections on the PSD cone,
//! * [`cpmaps`]: CP maps as Choi matrices, the CP order, means of CP maps,
//!   the Pimsner–Popa index and a zoo of standard channels,
//! * [`lebesgue`]: Radon–Nikodym pairs and the absolutely continuous /
//!   singular split of one CP map against another.

pub mod cpmaps;
pub mod error;
pub mod hermlinalg;
pub mod lebesgue;
pub mod opmeans;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
