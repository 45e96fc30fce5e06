//! Sound spatialisation without a fixed loudspeaker layout.
//!
//! Panning laws (tangent law, delay panning, pairwise rings), Ambisonics
//! encoding/rotation/decoding up to mixed orders, vector base and
//! distance based amplitude panning, binaural rendering through HRIRs, and
//! a block renderer that ties them together for declarative scenes.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command-line
//! front end live in the `spatium` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod ambisonics;
pub mod binaural;
pub mod dbap;
pub mod geometry;
pub mod hull;
pub mod linalg;
pub mod math;
pub mod panning;
pub mod render;
pub mod scene;
pub mod vbap;

pub use geometry::{Direction, LayoutCategory, LoudspeakerLayout, Position, Vec3};
pub use hull::{ConvexHull, Dimensionality};
pub use panning::GainVector;

/// Speed of sound used for delay compensation and ITD models, in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;
