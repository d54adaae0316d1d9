//! Pure, allocation-only building blocks for turning long lecture videos into
//! short reels and for analysing the learner study that evaluates them.
//!
//! Everything in this crate is deterministic and free of IO so it can run in
//! `no_std` environments. Media tooling, HTTP, persistence and the command line
//! live in the `reeled` companion crate.
//!
//! * [`transcript`]: SRT/WebVTT ingestion, normalization and windowing.
//! * [`llm`]: prompt templates, response validation, the repair loop and the
//!   offline mock provider.
//! * [`planner`]: snapping, duration enforcement and overlap resolution that
//!   turn key moments into a [`planner::CutPlan`].
//! * [`analytics`]: quiz, revisit and questionnaire scoring plus the
//!   normality-gated two-group comparison.
//! * [`stats`]: Shapiro-Wilk, Welch's t-test and Mann-Whitney U.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analytics;
pub mod llm;
pub mod manifest;
pub mod planner;
pub mod stats;
pub mod timecode;
pub mod transcript;

pub use llm::{KeyMoment, ReelSpec};
pub use planner::{CutPlan, ReelSegment};
pub use transcript::{Transcript, TranscriptCue};
