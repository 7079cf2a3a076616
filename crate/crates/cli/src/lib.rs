//! File formats and commands behind the `prevalence` binary.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod experiment;
pub mod joint_file;
pub mod manifest;
