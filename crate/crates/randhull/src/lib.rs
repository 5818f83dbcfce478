//! Experiment harness, file formats and command-line front end for
//! `randhull-core`.

pub mod config;
pub mod experiments;
pub mod io;
