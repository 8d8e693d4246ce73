//! Batch front end for the subsphere reconstruction: configuration, file
//! formats, the subcommands and the verification suites.

pub mod commands;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod formats;
pub mod oracles;
pub mod verify;
