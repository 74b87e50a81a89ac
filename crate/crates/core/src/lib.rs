//! Logical-reasoning evaluation toolkit.

pub mod logic;
pub mod proof;
pub mod endpoint;
pub mod steps;
pub mod bench;
pub mod probing;
pub mod sft;
pub mod reward;
pub mod cli;
