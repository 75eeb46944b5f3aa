//! Symbolic substitution systems on lattices with a dilation structure.
//!
//! The crate builds substitution subshifts over ℤᵈ (block substitutions) and
//! over the discrete Heisenberg lattice H₃(2ℤ), and answers three questions
//! about their periodic approximations:
//!
//! * **Convergence** — does the sequence of periodic words obtained by
//!   iterating the substitution on a periodic seed converge to the
//!   substitution subshift? A finite directed graph over small patterns
//!   decides this, and [`convergence`] produces either a certificate or a
//!   concrete obstruction path.
//! * **Testing domains** — how small can the pattern shape used by that
//!   graph be? [`domain`] constructs a canonical testing domain from the
//!   dilation data and shrinks it by certified reductions.
//! * **Rates** — when the approximation converges, how fast do the
//!   dictionaries and the spectra of pattern-equivariant Schrödinger
//!   operators converge? [`dictionary`] measures Hausdorff distances between
//!   dictionaries, and [`spectral`] compares Floquet–Bloch spectra.

pub mod dictionary;
pub mod domain;
pub mod error;
pub mod lattice;
pub mod presets;
pub mod spectral;
pub mod subfile;
pub mod substitution;

pub mod convergence;

pub use error::{Error, Result};
