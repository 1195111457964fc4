//! File formats, grids, configuration and parallel scans behind the `jpk` command.

pub mod config;
pub mod error;
pub mod format;
pub mod grid;
pub mod io;
pub mod scan;
