//! IO companion for the route-explanation core: file formats, synthetic
//! fixtures, configuration, and the batch evaluation harness behind the
//! `sve` binary.

pub mod config;
pub mod formats;
pub mod grid;
pub mod harness;
