//! Rules engine, self-play simulator and balance laboratory for
//! Official International Mahjong.

pub mod agents;
pub mod balance;
pub mod cli;
pub mod engine;
pub mod rng;
pub mod ruleset;
pub mod scoring;
pub mod service;
pub mod simulator;
pub mod tiles;
