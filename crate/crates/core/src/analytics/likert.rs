use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Questionnaire an item belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instrument {
    UeqS,
    ImiCompetence,
    Tlx,
    LearningEffectiveness,
    LearningExperience,
    Trust,
}

impl Instrument {
    pub const ALL: [Instrument; 6] = [
        Instrument::UeqS,
        Instrument::ImiCompetence,
        Instrument::Tlx,
        Instrument::LearningEffectiveness,
        Instrument::LearningExperience,
        Instrument::Trust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Instrument::UeqS => "ueq_s",
            Instrument::ImiCompetence => "imi_competence",
            Instrument::Tlx => "tlx",
            Instrument::LearningEffectiveness => "learning_effectiveness",
            Instrument::LearningExperience => "learning_experience",
            Instrument::Trust => "trust",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.as_str() == s)
    }
}

/// UEQ-S items in scoring order: four pragmatic, then four hedonic.
pub const UEQ_S_ITEMS: [&str; 8] = [
    "obstructive_supportive",
    "complicated_easy",
    "inefficient_efficient",
    "confusing_clear",
    "boring_exciting",
    "not_interesting_interesting",
    "conventional_inventive",
    "usual_leading_edge",
];

/// One answer on a 7-point scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertResponse {
    pub instrument: Instrument,
    pub item_id: String,
    pub value: u8,
    #[serde(default)]
    pub reversed: bool,
}

impl LikertResponse {
    pub fn new(instrument: Instrument, item_id: impl Into<String>, value: u8) -> Self {
        Self {
            instrument,
            item_id: item_id.into(),
            value,
            reversed: false,
        }
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = true;
        self
    }

    /// Value after reverse-coding.
    pub fn coded(&self) -> Result<u8, LikertError> {
        if !(1..=7).contains(&self.value) {
            return Err(LikertError::OutOfRange {
                item_id: self.item_id.clone(),
                value: self.value,
            });
        }
        Ok(if self.reversed { 8 - self.value } else { self.value })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LikertError {
    #[error("item `{item_id}` has value {value} outside 1..=7")]
    OutOfRange { item_id: String, value: u8 },
    #[error("a block must come from a single instrument")]
    MixedInstruments,
    #[error("expected {expected} items, got {found}")]
    WrongItemCount { expected: usize, found: usize },
    #[error("unexpected item `{found}` where `{expected}` belongs")]
    UnknownItem { expected: String, found: String },
    #[error("block is empty")]
    Empty,
}

/// Reverse-coded item values of one instrument and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertBlock {
    pub instrument: Instrument,
    pub per_item: Vec<(String, u8)>,
    pub block_mean: f64,
}

pub fn score_likert_block(items: &[LikertResponse]) -> Result<LikertBlock, LikertError> {
    let first = items.first().ok_or(LikertError::Empty)?;
    if items.iter().any(|i| i.instrument != first.instrument) {
        return Err(LikertError::MixedInstruments);
    }
    let per_item = items
        .iter()
        .map(|i| Ok((i.item_id.clone(), i.coded()?)))
        .collect::<Result<Vec<_>, LikertError>>()?;
    let sum: u32 = per_item.iter().map(|(_, v)| u32::from(*v)).sum();
    Ok(LikertBlock {
        instrument: first.instrument,
        block_mean: f64::from(sum) / per_item.len() as f64,
        per_item,
    })
}

/// UEQ-S scales on [-3, 3].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeqScales {
    pub pragmatic: f64,
    pub hedonic: f64,
    /// Mean of all eight items.
    pub overall: f64,
}

impl UeqScales {
    /// Per-scale means over respondents.
    pub fn mean_of(scores: &[UeqScales]) -> Option<UeqScales> {
        if scores.is_empty() {
            return None;
        }
        let n = scores.len() as f64;
        let sum = |f: fn(&UeqScales) -> f64| scores.iter().map(f).sum::<f64>() / n;
        Some(UeqScales {
            pragmatic: sum(|s| s.pragmatic),
            hedonic: sum(|s| s.hedonic),
            overall: sum(|s| s.overall),
        })
    }
}

/// Scores one UEQ-S questionnaire given in [`UEQ_S_ITEMS`] order.
pub fn score_ueq_short(items: &[LikertResponse]) -> Result<UeqScales, LikertError> {
    if items.len() != UEQ_S_ITEMS.len() {
        return Err(LikertError::WrongItemCount {
            expected: UEQ_S_ITEMS.len(),
            found: items.len(),
        });
    }
    let mut t = [0i32; 8];
    for (k, (item, expected)) in items.iter().zip(UEQ_S_ITEMS).enumerate() {
        if item.instrument != Instrument::UeqS || item.item_id != expected {
            return Err(LikertError::UnknownItem {
                expected: String::from(expected),
                found: item.item_id.clone(),
            });
        }
        t[k] = i32::from(item.coded()?) - 4;
    }
    let pragmatic: i32 = t[..4].iter().sum();
    let hedonic: i32 = t[4..].iter().sum();
    Ok(UeqScales {
        pragmatic: f64::from(pragmatic) / 4.0,
        hedonic: f64::from(hedonic) / 4.0,
        overall: f64::from(pragmatic + hedonic) / 8.0,
    })
}
