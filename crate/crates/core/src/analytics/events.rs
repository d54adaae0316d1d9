use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two qualifying events on the same subject at most this far apart count as
/// one revisit.
pub const REVISIT_DEBOUNCE_MS: i64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Play,
    Pause,
    Seek,
    ReelChange,
    QuizOpen,
    QuizSubmit,
    Rate,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::Play,
        EventKind::Pause,
        EventKind::Seek,
        EventKind::ReelChange,
        EventKind::QuizOpen,
        EventKind::QuizSubmit,
        EventKind::Rate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Play => "play",
            EventKind::Pause => "pause",
            EventKind::Seek => "seek",
            EventKind::ReelChange => "reel_change",
            EventKind::QuizOpen => "quiz_open",
            EventKind::QuizSubmit => "quiz_submit",
            EventKind::Rate => "rate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// One learner interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEvent {
    pub session_id: String,
    /// Reel or video the event concerns.
    pub subject_id: String,
    pub kind: EventKind,
    /// Media position.
    pub at_ms: u64,
    /// Wall clock, milliseconds since the Unix epoch.
    pub wall_time_ms: i64,
    /// Rating 1 to 5, present only for `rate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("rate events need a value")]
    MissingValue,
    #[error("only rate events carry a value")]
    UnexpectedValue,
    #[error("rating {0} is outside 1..=5")]
    OutOfRange(u8),
}

impl ViewEvent {
    pub fn validate(&self) -> Result<(), EventError> {
        match (self.kind, self.value) {
            (EventKind::Rate, None) => Err(EventError::MissingValue),
            (EventKind::Rate, Some(v)) if !(1..=5).contains(&v) => Err(EventError::OutOfRange(v)),
            (EventKind::Rate, Some(_)) => Ok(()),
            (_, Some(_)) => Err(EventError::UnexpectedValue),
            (_, None) => Ok(()),
        }
    }
}

/// Returns to the video content after the quiz was first opened.
///
/// Every play or seek after the first `quiz_open` qualifies. A qualifying
/// event on the same subject as the previous qualifying event, and at most
/// [`REVISIT_DEBOUNCE_MS`] after it, is part of the same revisit.
pub fn count_revisits(events: &[ViewEvent]) -> u32 {
    let Some(open) = events.iter().position(|e| e.kind == EventKind::QuizOpen) else {
        return 0;
    };
    let mut count = 0;
    let mut prev: Option<&ViewEvent> = None;
    for e in &events[open + 1..] {
        if !matches!(e.kind, EventKind::Play | EventKind::Seek) {
            continue;
        }
        let debounced =
            prev.is_some_and(|p| p.subject_id == e.subject_id && e.wall_time_ms - p.wall_time_ms <= REVISIT_DEBOUNCE_MS);
        if !debounced {
            count += 1;
        }
        prev = Some(e);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn ev(kind: EventKind, subject: &str, wall: i64) -> ViewEvent {
        ViewEvent {
            session_id: "s".into(),
            subject_id: subject.into(),
            kind,
            at_ms: 0,
            wall_time_ms: wall,
            value: None,
        }
    }

    #[test]
    fn no_quiz_open_means_no_revisits() {
        assert_eq!(count_revisits(&[ev(EventKind::Play, "r1", 0), ev(EventKind::Seek, "r1", 9000)]), 0);
        assert_eq!(count_revisits(&[]), 0);
    }

    #[test]
    fn separated_seeks() {
        let e = [
            ev(EventKind::Play, "r1", 0),
            ev(EventKind::QuizOpen, "quiz", 1000),
            ev(EventKind::Seek, "r1", 10_000),
            ev(EventKind::Seek, "r1", 20_000),
            ev(EventKind::Seek, "r2", 30_000),
        ];
        assert_eq!(count_revisits(&e), 3);
    }

    #[test]
    fn debounce() {
        let e = [ev(EventKind::QuizOpen, "quiz", 0), ev(EventKind::Seek, "r1", 5000), ev(EventKind::Seek, "r1", 5500)];
        assert_eq!(count_revisits(&e), 1);
        // different subject inside the window is a separate revisit
        let e = [ev(EventKind::QuizOpen, "quiz", 0), ev(EventKind::Seek, "r1", 5000), ev(EventKind::Play, "r2", 5500)];
        assert_eq!(count_revisits(&e), 2);
        // pause does not count and does not break the chain
        let e: Vec<ViewEvent> = [
            ev(EventKind::QuizOpen, "quiz", 0),
            ev(EventKind::Play, "r1", 5000),
            ev(EventKind::Pause, "r1", 6000),
            ev(EventKind::Play, "r1", 7000),
        ]
        .into();
        assert_eq!(count_revisits(&e), 1);
    }

    #[test]
    fn rating_values() {
        let mut e = ev(EventKind::Rate, "r1", 0);
        assert_eq!(e.validate(), Err(EventError::MissingValue));
        e.value = Some(6);
        assert_eq!(e.validate(), Err(EventError::OutOfRange(6)));
        e.value = Some(5);
        assert_eq!(e.validate(), Ok(()));
        let mut p = ev(EventKind::Play, "r1", 0);
        p.value = Some(3);
        assert_eq!(p.validate(), Err(EventError::UnexpectedValue));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in EventKind::ALL {
            assert_eq!(EventKind::parse(k.as_str()), Some(k));
            assert_eq!(serde_json::to_value(k).unwrap(), k.as_str());
        }
    }
}
