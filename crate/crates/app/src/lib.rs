//! Batch front-end for the `casimir` command: material files, run
//! configurations, named recipes, sweep execution and output formats.

pub mod config;
pub mod material_file;
pub mod output;
pub mod pool;
pub mod recipes;
pub mod run;
