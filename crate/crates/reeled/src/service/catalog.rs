use std::collections::BTreeMap;
use std::path::Path;

use reeled_core::analytics::QuizKeyItem;

pub const DEFAULT_QUIZ_ID: &str = "default";

/// Answer keys by quiz id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuizCatalog {
    quizzes: BTreeMap<String, Vec<QuizKeyItem>>,
}

impl Default for QuizCatalog {
    /// One six-item placeholder quiz; real deployments load their own.
    fn default() -> Self {
        let key = ["b", "d", "a", "c", "b", "a"]
            .iter()
            .enumerate()
            .map(|(i, c)| QuizKeyItem { item_id: format!("q{}", i + 1), correct_choice: (*c).into() })
            .collect();
        Self { quizzes: BTreeMap::from([(DEFAULT_QUIZ_ID.to_string(), key)]) }
    }
}

impl QuizCatalog {
    pub fn new(quizzes: BTreeMap<String, Vec<QuizKeyItem>>) -> Self {
        Self { quizzes }
    }

    /// Reads `{"<quiz_id>": [{"item_id": .., "correct_choice": ..}, ..]}`.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let raw = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let quizzes: BTreeMap<String, Vec<QuizKeyItem>> =
            serde_json::from_slice(&raw).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some((id, _)) = quizzes.iter().find(|(_, k)| k.is_empty()) {
            return Err(format!("quiz `{id}` has no items"));
        }
        Ok(Self { quizzes })
    }

    pub fn key(&self, quiz_id: &str) -> Option<&[QuizKeyItem]> {
        self.quizzes.get(quiz_id).map(Vec::as_slice)
    }
}
