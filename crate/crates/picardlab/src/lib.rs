//! File formats, command-line front end and fuzzing harness for
//! `picardlab-core`.

pub mod cli;
pub mod format;
pub mod fuzz;
