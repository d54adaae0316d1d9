//! The study dataset as CSV, one row per submitted assignment.
//!
//! Columns, in order: `participant_id`, `assignment_id`, `condition`,
//! `quiz_score_pct`, `quiz_duration_s`, `revisits`, then one
//! `<instrument>.<item_id>` column per questionnaire item in catalog order.
//! Likert cells hold the raw 1 to 7 answer; empty cells mean unanswered.

use reeled_core::analytics::catalog::{column_name, ITEMS};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::model::Condition;
use super::store::Storage;
use super::ServiceError;

pub const FIXED_COLUMNS: [&str; 6] =
    ["participant_id", "assignment_id", "condition", "quiz_score_pct", "quiz_duration_s", "revisits"];

/// Restricts the export; empty fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    pub condition: Option<Condition>,
    pub quiz_id: Option<String>,
    /// Job whose reels were assigned.
    pub job: Option<Uuid>,
}

pub fn header() -> Vec<String> {
    FIXED_COLUMNS.iter().map(|s| s.to_string()).chain(ITEMS.iter().map(column_name)).collect()
}

pub fn export_csv(store: &dyn Storage, filter: &ExportFilter) -> Result<String, ServiceError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ServiceError::Internal(e.to_string());
    w.write_record(header()).map_err(csv_err)?;
    let mut rows = 0;
    for a in store.assignments()? {
        if filter.condition.is_some_and(|c| c != a.condition)
            || filter.quiz_id.as_ref().is_some_and(|q| *q != a.quiz_id)
            || filter.job.is_some_and(|j| j != a.reel_set_id)
        {
            continue;
        }
        let Some(r) = store.quiz_result(a.assignment_id)? else { continue };
        let mut record = vec![
            a.student_id.clone(),
            a.assignment_id.to_string(),
            a.condition.as_str().to_string(),
            r.score.score_pct.to_string(),
            r.quiz_duration_s.map(|d| d.to_string()).unwrap_or_default(),
            r.revisits.to_string(),
        ];
        record.extend(ITEMS.iter().map(|item| {
            r.questionnaire
                .iter()
                .find(|q| q.instrument == item.instrument && q.item_id == item.item_id)
                .map(|q| q.value.to_string())
                .unwrap_or_default()
        }));
        w.write_record(&record).map_err(csv_err)?;
        rows += 1;
    }
    if rows == 0 {
        return Err(ServiceError::EmptyFilter);
    }
    String::from_utf8(w.into_inner().map_err(|e| ServiceError::Internal(e.to_string()))?)
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
