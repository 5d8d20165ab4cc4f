//! File formats, verification campaigns and the command-line driver for
//! `elasto-bem-core`.

pub mod config;
pub mod matfile;
pub mod msh;
pub mod report;
pub mod selftest;
pub mod tasks;
