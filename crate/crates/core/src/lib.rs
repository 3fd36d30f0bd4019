//! Exact decorated graph complexes over Poincaré-duality pairing spaces.

pub mod error;
pub mod exact_linalg;
pub mod gc_lie;
pub mod gra_comodule;
pub mod graph_core;
pub mod pairing_space;
pub mod rational;
pub mod term_file;
pub mod twisted_complex;

pub use error::Error;
