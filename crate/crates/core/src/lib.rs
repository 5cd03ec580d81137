//! Spin-chain similarity simulator.
//!
//! A hidden *target* chain and a controllable *candidate* chain are compared
//! site by site through their single-site Bloch vectors. The candidate may be
//! rotated globally, `exp(−iχ Σ_k Z_k)`, after asking a black-box oracle for
//! the similarity once; the rotation angle comes from a table precomputed over
//! every possible target.
//!
//! Modules, bottom up:
//!
//! - [`hilbert`]: dense operators, states, partial trace, Hermitian eigensolver
//! - [`chain`]: the periodic chain Hamiltonian and the discrete target family
//! - [`similarity`]: Bloch vectors, angles and subset similarity measures
//! - [`protocol`]: rotations, similarity gain, optimal angle, lookup table
//! - [`oracle`]: exact, noisy and measurement-sampled black boxes
//! - [`study`]: whole-grid sweeps used by the command-line driver

pub mod chain;
pub mod error;
pub mod hilbert;
pub mod oracle;
pub mod protocol;
pub mod similarity;
pub mod study;

pub use error::{QuizError, Result};
