//! File formats, parallel stepping and the command-line front end around
//! `ifworld-core`.

pub use ifworld_core as core;

pub mod config;
pub mod files;
pub mod games;
pub mod play;
pub mod report;
pub mod stepper;
