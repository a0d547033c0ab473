#![allow(clippy::result_large_err)]

pub mod exact;
pub mod padic;
pub mod schottky;
pub mod measure;
pub mod fixtures;
pub mod wavelets;
pub mod operator;
pub mod heat;
pub mod config;
pub mod report;
pub mod cli;
