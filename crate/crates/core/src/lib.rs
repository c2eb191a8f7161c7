#![cfg_attr(not(feature = "std"), no_std)]
//! Separability of multimode Gaussian states under local thermal noise.

extern crate alloc;

mod error;
pub mod analysis;
pub mod channel;
pub mod ensemble;
pub mod linalg;
pub mod sdp;
pub mod separability;
pub mod states;
pub mod symplectic;

pub use error::{Error, Result};
