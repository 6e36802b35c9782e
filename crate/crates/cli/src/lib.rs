//! Command-line and HTTP front ends for `chemski-core`.

pub mod commands;
pub mod input;
pub mod service;
