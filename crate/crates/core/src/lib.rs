//! Exact desk-scale laboratory for Hardy's paradox in its Wigner's-friend
//! dress: context tables for the Hardy state, discrete Bohmian trajectory sets
//! under two foliations, quantum-memory erasure versus decoherence, a replay of
//! the agents' reasoning, and CHSH statistics for the singlet against a local
//! hidden-variable model.

pub mod bell;
pub mod bohm;
pub mod cli;
pub mod epistemic;
pub mod error;
pub mod hardy;
pub mod memory;
pub mod numfmt;
pub mod qcore;

pub use error::{Error, Result};
