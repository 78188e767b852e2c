pub mod circuits;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod graphs;
pub mod linalg;
pub mod mixers;
pub mod optimize;
pub mod par;
pub mod qaoa;
pub mod statesim;

pub use error::{Error, Result};
