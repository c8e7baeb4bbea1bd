//! Context-aware adaptive switching between ray-based selection techniques.

pub mod adapter;
pub mod config;
pub mod geometry;
pub mod objectives;
pub mod scene;
pub mod simulator;
pub mod techniques;
pub mod trace;
