//! File formats (WAV, JSON layouts, scenes, HRIR indexes, Ambisonic
//! sidecars) and the command-line front end for `spatium-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod files;
pub mod wav;
