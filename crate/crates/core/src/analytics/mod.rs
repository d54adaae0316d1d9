//! Scoring of the learner study instruments and telemetry.

pub mod catalog;
mod events;
mod likert;
mod quiz;

pub use events::{count_revisits, EventError, EventKind, ViewEvent, REVISIT_DEBOUNCE_MS};
pub use likert::{
    score_likert_block, score_ueq_short, Instrument, LikertBlock, LikertError, LikertResponse, UeqScales, UEQ_S_ITEMS,
};
pub use quiz::{score_quiz, QuizAnswer, QuizError, QuizKeyItem, QuizScore};

pub use crate::stats::{compare_groups, GroupSample, Method, Summary, TestResult};
