//! Polar-code soft covering over prime alphabets: channel resolvability with
//! recycled randomness, empirical coordination and strong coordination, with
//! exact enumeration oracles for small block lengths.
//!
//! Polar indices use the natural Kronecker order `u = x G_n` with kernel
//! `[[1, 0], [1, 1]]` and no bit-reversal; see [`field`].

pub mod bench;
pub mod error;
pub mod field;
pub mod oracle;
pub mod polarize;
pub mod prob;
pub mod schemes;
pub mod scsample;

pub use error::{Error, Result};
