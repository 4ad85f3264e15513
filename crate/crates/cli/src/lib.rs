//! File formats, the manifest and the `ocrforge` command line, on top of
//! `ocrforge-core`.

pub mod assets;
pub mod chain;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod generate;
pub mod imageio;
pub mod inspect;
pub mod manifest;
pub mod prompt;
pub mod translate;
