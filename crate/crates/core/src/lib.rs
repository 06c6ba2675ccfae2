//! Joint radar-interference estimation and data demodulation for an OFDM
//! receiver sharing spectrum with uncoordinated pulsed radars.

pub mod error;
pub mod linalg;
mod serde_matrix;
pub mod signal_model;

pub use error::{Error, Result};
pub use linalg::C64;
pub mod demodulator;
pub mod harness;
mod outer;
pub mod receiver;
pub mod result;
pub mod param_extract;
pub mod solver_an;
pub mod solver_l1;
