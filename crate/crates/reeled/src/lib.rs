//! Std side of the reel generator: caption loading, LLM transport, media
//! tooling, the generation pipeline, the job service and study analysis.

pub use reeled_core as core;

pub mod captions;
pub mod openai;
pub mod source;
pub mod media;
pub mod generate;
pub mod service;
pub mod analysis;
