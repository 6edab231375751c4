//! Command line front end for the colorful bin packing toolkit.

pub mod args;
pub mod commands;
pub mod exit;
pub mod experiment;
pub mod io;
