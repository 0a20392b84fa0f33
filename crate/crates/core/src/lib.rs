//! Analysis of real-valued functions on the p-biased hypercube.
//!
//! The crate covers representations and transforms of functions on
//! `{0,1}^n` ([`cube`]), finite value sets ([`valueset`]), hypergraph
//! branching factors ([`hypergraph`]), constant-p junta approximators
//! ([`constp`]), the sparse-junta construction by local fitting and plurality
//! decoding ([`sparse`]), deviation and bias experiments ([`deviation`]),
//! instance generators ([`corpus`]) and the JSON file formats ([`io`]).

pub mod cube;
mod error;
mod subset;
pub mod constp;
pub mod corpus;
pub mod deviation;
pub mod hypergraph;
pub mod io;
pub mod sparse;
pub mod valueset;

pub use cube::{BiasedMeasure, Mode, SubsetPoly, TruthTable};
pub use error::{Error, Result};
pub use subset::{Subset, MAX_VARS};
pub use valueset::ValueSet;
