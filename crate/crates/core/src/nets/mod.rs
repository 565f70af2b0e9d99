//! Dense network math: vectors, MLPs, Adam and Polyak blending.

mod adam;
pub mod checkpoint;
mod mlp;
mod vector;

pub use adam::{Adam, AdamConfig};
pub use mlp::{polyak_update, Activation, Dense, DenseGrad, Gradients, Mlp, Trace};
pub use vector::Vector;
