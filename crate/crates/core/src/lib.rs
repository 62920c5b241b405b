//! Interactive-fiction worlds, a template action space over them, a
//! reinforcement-learning environment with optional handicaps, and two
//! learning agents.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the `ifworld` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod agents;
pub mod bench;
pub mod env;
pub mod grammar;
pub mod rng;
pub mod world;
