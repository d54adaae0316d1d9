use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizKeyItem {
    pub item_id: String,
    pub correct_choice: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizAnswer {
    pub item_id: String,
    pub choice: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuizScore {
    pub correct: u32,
    pub total: u32,
    pub score_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuizError {
    #[error("answer for unknown quiz item `{0}`")]
    UnknownItem(String),
    #[error("quiz item `{0}` answered more than once")]
    DuplicateAnswer(String),
    #[error("quiz key is empty")]
    EmptyKey,
}

/// Percentage of key items answered correctly. Unanswered items count as
/// wrong.
pub fn score_quiz(answers: &[QuizAnswer], key: &[QuizKeyItem]) -> Result<QuizScore, QuizError> {
    if key.is_empty() {
        return Err(QuizError::EmptyKey);
    }
    let mut seen: Vec<&str> = Vec::with_capacity(answers.len());
    let mut correct = 0u32;
    for a in answers {
        let item = key
            .iter()
            .find(|k| k.item_id == a.item_id)
            .ok_or_else(|| QuizError::UnknownItem(a.item_id.clone()))?;
        if seen.contains(&a.item_id.as_str()) {
            return Err(QuizError::DuplicateAnswer(a.item_id.clone()));
        }
        seen.push(&a.item_id);
        if item.correct_choice == a.choice {
            correct += 1;
        }
    }
    let total = key.len() as u32;
    Ok(QuizScore {
        correct,
        total,
        score_pct: 100.0 * f64::from(correct) / f64::from(total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn key() -> Vec<QuizKeyItem> {
        (1..=6)
            .map(|i| QuizKeyItem { item_id: format!("q{i}"), correct_choice: "a".into() })
            .collect()
    }

    fn answers(correct: usize, answered: usize) -> Vec<QuizAnswer> {
        (1..=answered)
            .map(|i| QuizAnswer { item_id: format!("q{i}"), choice: if i <= correct { "a".into() } else { "b".into() } })
            .collect()
    }

    #[test]
    fn percentages() {
        assert_eq!(score_quiz(&answers(6, 6), &key()).unwrap().score_pct, 100.0);
        assert_eq!(score_quiz(&answers(0, 6), &key()).unwrap().score_pct, 0.0);
        assert_eq!(score_quiz(&answers(5, 6), &key()).unwrap().score_pct, 500.0 / 6.0);
        // missing item scored wrong
        let partial = score_quiz(&answers(5, 5), &key()).unwrap();
        assert_eq!((partial.correct, partial.total), (5, 6));
    }

    #[test]
    fn bad_answers() {
        let mut a = answers(1, 1);
        a.push(QuizAnswer { item_id: "q9".into(), choice: "a".into() });
        assert_eq!(score_quiz(&a, &key()), Err(QuizError::UnknownItem("q9".into())));
        let dup = [answers(1, 1), answers(1, 1)].concat();
        assert_eq!(score_quiz(&dup, &key()), Err(QuizError::DuplicateAnswer("q1".into())));
    }
}
