//! Configuration-driven experiment runner and reports for pqelab.

pub mod config;
pub mod report;
pub mod run;
