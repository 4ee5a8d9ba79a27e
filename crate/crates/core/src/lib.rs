//! Census, exact counting and uniform sampling of unlabelled graphs that are
//! `r`-locally `L^d`: finite graphs in which every radius-`r` ball looks like
//! the radius-`r` ball of the integer lattice graph.

pub mod asymptotics;
pub mod census;
pub mod counting;
pub mod error;
pub mod lattice;
pub mod quotient;
pub mod sampler;

pub use error::{Error, Result};
