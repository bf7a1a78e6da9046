//! Zero-shot activity recognition over smart-home sensor event streams.

pub mod catalog;
pub mod ingest;
pub mod inventory;
pub mod time;
pub mod segment;
pub mod backend;
pub mod prompt;
pub mod cache;
pub mod confidence;
pub mod eval;
pub mod records;
pub mod pipeline;
