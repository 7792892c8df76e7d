//! Chordal Loewner evolutions driven by mixed Brownian/alpha-stable
//! processes: exact slit-map kernels, cadlag trace extraction, operator
//! kernels for the superharmonicity machinery, and a deterministic Monte
//! Carlo verification harness.

pub mod comb;
pub mod error;
pub mod export;
pub mod levy;
pub mod loewner;
pub mod quad;
pub mod report;
pub mod rng;
pub mod stats;
pub mod superharmonic;
pub mod trace;

pub use error::{Error, Result};
