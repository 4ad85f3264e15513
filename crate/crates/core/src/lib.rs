//! Core algorithms for generating synthetic OCR corpora, degrading them,
//! translating text inside images and scoring OCR / translation output.
//!
//! Everything here is a pure function of its inputs and only needs `alloc`.
//! File formats, the manifest and the command line live in the `ocrforge`
//! crate.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod degrade;
pub mod font;
pub mod geometry;
pub mod metrics;
pub mod render;
pub mod rng;
pub mod viztrans;

mod math;

pub use font::BuiltinFont;
pub use geometry::{AlphaMask, Homography, Point, Quad, RasterImage, Rgb};
pub use rng::{derive_seed, Rng};
