//! File formats, the parallel generation pipeline and the `followup` command
//! line around [`followup_core`].

pub mod config;
pub mod datamuse;
pub mod exchange;
pub mod formats;
pub mod jsonl;
pub mod pipeline;
pub mod report;
pub mod stats;

pub use followup_core;
