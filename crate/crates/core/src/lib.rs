//! Homomorphisms of random cubic graphs into the 7-cycle.
//!
//! The crate bundles the pieces needed to study, at desk scale and through
//! a first-moment bound, whether the union of three uniform perfect
//! matchings maps to `C_7`:
//!
//! - [`graph`]: multigraphs, matchings, girth, exact independence number;
//! - [`sampler`]: uniform matchings and matching triples;
//! - [`hom`]: homomorphism search, tightening and counting, circular cliques;
//! - [`moment`]: exact counts of tight (map, triple) pairs with a brute-force oracle;
//! - [`rate`]: the exponential rate, box bounds and the certification sweep;
//! - [`experiment`]: seeded Monte Carlo drivers with CSV output.

pub mod experiment;
pub mod graph;
pub mod hom;
pub mod moment;
pub mod rate;
pub mod sampler;

pub use graph::{MatchingTriple, MultiGraph, PerfectMatching};
pub use hom::{CircularClique, CycleTarget, HomMap, Target};
