//! The job, review, assignment and telemetry service behind the HTTP API.

pub mod api;
mod catalog;
pub mod export;
pub mod jobs;
pub mod model;
mod sqlite;
pub mod store;

use std::collections::HashSet;
use std::sync::Arc;

use chrono::Utc;
use parking_lot::Mutex;
use reeled_core::analytics::{
    catalog::find, count_revisits, score_quiz, EventError, EventKind, Instrument, LikertResponse, QuizAnswer, QuizError, ViewEvent,
};
use reeled_core::llm::{ReelSpec, SpecError};
use reeled_core::planner::{CutPlan, PlanError, ReelSegment};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

pub use catalog::{QuizCatalog, DEFAULT_QUIZ_ID};
pub use jobs::{advance_job, run_job, AdvanceError, JobQueue, PipelineExecutor, StageExecutor};
pub use model::{Assignment, Condition, GenerationJob, JobFailure, JobStatus, QuizResult, Reel, ReelMedia};
pub use sqlite::SqliteStore;
pub use store::{MemoryStore, StageEnd, Storage, StoreError};

use crate::source::{self, SourceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Instructor,
    Student,
    Researcher,
}

/// The authenticated caller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub role: Role,
    pub user: String,
}

impl Principal {
    pub fn new(role: Role, user: impl Into<String>) -> Self {
        Self { role, user: user.into() }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid reel spec: {0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    SourceUnresolvable(#[from] SourceError),
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("{error}")]
    Plan {
        error: PlanError,
        /// The sibling reel an edit collided with.
        conflicting_reel: Option<Uuid>,
    },
    #[error("session {0} is unknown")]
    SessionUnknown(String),
    #[error("{0}")]
    OrderViolation(String),
    #[error("quiz for assignment {0} was already submitted")]
    AlreadySubmitted(Uuid),
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("invalid event: {0}")]
    InvalidEvent(#[from] EventError),
    #[error("{0}")]
    Invalid(String),
    #[error("no rows match the export filter")]
    EmptyFilter,
    #[error("job {0} has not finished")]
    NotReady(Uuid),
    #[error("{0}")]
    Internal(String),
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound { kind, id } => Self::NotFound { kind, id },
            StoreError::SessionUnknown(s) => Self::SessionUnknown(s),
            e @ StoreError::OrderViolation { .. } => Self::OrderViolation(e.to_string()),
            StoreError::AlreadySubmitted(a) => Self::AlreadySubmitted(a),
            e => Self::Internal(e.to_string()),
        }
    }
}

fn not_found(kind: &'static str, id: impl ToString) -> ServiceError {
    ServiceError::NotFound { kind, id: id.to_string() }
}

fn require(actor: &Principal, role: Role) -> Result<(), ServiceError> {
    if actor.role == role {
        Ok(())
    } else {
        Err(ServiceError::Forbidden(format!("requires the {role:?} role").to_lowercase()))
    }
}

/// Fields an instructor may change on a reel. Absent fields stay as they are.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReelPatch {
    pub start_ms: Option<u64>,
    pub end_ms: Option<u64>,
    pub label: Option<String>,
    pub summary: Option<String>,
    pub published: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventInput {
    pub session_id: String,
    pub subject_id: String,
    pub kind: EventKind,
    #[serde(default)]
    pub at_ms: u64,
    /// Server time is used when absent.
    #[serde(default)]
    pub wall_time_ms: Option<i64>,
    #[serde(default)]
    pub value: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireAnswer {
    pub instrument: String,
    pub item_id: String,
    pub value: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizSubmission {
    pub answers: Vec<QuizAnswer>,
    /// Likert questionnaire filled in after the quiz.
    #[serde(default)]
    pub questionnaire: Vec<QuestionnaireAnswer>,
}

/// What a student sees for an assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentView {
    pub assignment: Assignment,
    /// Published reels, in order. Empty for the long-form condition.
    pub reels: Vec<Reel>,
    /// The full lecture, for the long-form condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_uri: Option<String>,
}

pub struct Service {
    store: Arc<dyn Storage>,
    exec: Arc<dyn StageExecutor>,
    queue: Option<JobQueue>,
    catalog: QuizCatalog,
    // one edit at a time keeps sibling checks and writes together
    edit_lock: Mutex<()>,
    // stamps and appends under one lock so server times never go backwards
    event_lock: Mutex<()>,
}

impl Service {
    /// A service whose jobs only move when [`Service::advance`] is called.
    pub fn new(store: Arc<dyn Storage>, exec: Arc<dyn StageExecutor>, catalog: QuizCatalog) -> Self {
        Self { store, exec, queue: None, catalog, edit_lock: Mutex::new(()), event_lock: Mutex::new(()) }
    }

    /// Runs new jobs on `workers` background threads.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.queue = Some(JobQueue::start(self.store.clone(), self.exec.clone(), workers));
        self
    }

    pub fn store(&self) -> &dyn Storage {
        self.store.as_ref()
    }

    pub fn catalog(&self) -> &QuizCatalog {
        &self.catalog
    }

    pub fn create_job(&self, actor: &Principal, source_uri: &str, captions_ref: &str, spec: ReelSpec) -> Result<GenerationJob, ServiceError> {
        require(actor, Role::Instructor)?;
        spec.validate()?;
        source::check_resolvable(source_uri)?;
        if !source::is_remote(captions_ref) {
            source::check_resolvable(captions_ref)?;
        }
        let job = GenerationJob::new(source_uri, captions_ref, spec, Utc::now());
        self.store.insert_job(&job)?;
        if let Some(q) = &self.queue {
            q.submit(job.job_id);
        }
        Ok(job)
    }

    pub fn advance(&self, id: Uuid) -> Result<GenerationJob, ServiceError> {
        advance_job(self.store.as_ref(), self.exec.as_ref(), id).map_err(|e| match e {
            AdvanceError::NotFound(id) => not_found("job", id),
            AdvanceError::Terminal(s) => ServiceError::Invalid(format!("job is {} and cannot advance", s.as_str())),
            AdvanceError::Store(e) => e.into(),
        })
    }

    pub fn job(&self, actor: &Principal, id: Uuid) -> Result<GenerationJob, ServiceError> {
        require(actor, Role::Instructor)?;
        self.store.job(id)?.ok_or_else(|| not_found("job", id))
    }

    pub fn reels(&self, actor: &Principal, job_id: Uuid) -> Result<Vec<Reel>, ServiceError> {
        require(actor, Role::Instructor)?;
        self.store.job(job_id)?.ok_or_else(|| not_found("job", job_id))?;
        Ok(self.store.reels_for_job(job_id)?)
    }

    /// Applies an instructor edit. New bounds are re-snapped and checked
    /// against the sibling reels before anything is written; a re-trim then
    /// runs in the background.
    pub fn update_reel(&self, actor: &Principal, reel_id: Uuid, patch: &ReelPatch) -> Result<Reel, ServiceError> {
        require(actor, Role::Instructor)?;
        let guard = self.edit_lock.lock();
        let mut reel = self.store.reel(reel_id)?.ok_or_else(|| not_found("reel", reel_id))?;
        let job = self.store.job(reel.job_id)?.ok_or_else(|| not_found("job", reel.job_id))?;

        let mut bounds_changed = false;
        if patch.start_ms.is_some() || patch.end_ms.is_some() {
            let start = patch.start_ms.unwrap_or(reel.start_ms);
            let end = patch.end_ms.unwrap_or(reel.end_ms);
            let siblings = self.store.reels_for_job(reel.job_id)?;
            let t = self.exec.transcript(&job).map_err(ServiceError::Internal)?;
            let plan = CutPlan {
                source_id: t.source_id.clone(),
                spec: job.spec,
                segments: siblings.iter().map(segment_of).collect(),
            };
            let edited = plan.replan_segment(reel.order, start, end, &t).map_err(|error| {
                let conflicting_reel = match &error {
                    PlanError::SiblingOverlap { sibling, .. } => siblings.iter().find(|r| r.order == *sibling).map(|r| r.reel_id),
                    _ => None,
                };
                ServiceError::Plan { error, conflicting_reel }
            })?;
            bounds_changed = (edited.cut_start_ms, edited.cut_end_ms) != (reel.start_ms, reel.end_ms);
            reel.start_ms = edited.cut_start_ms;
            reel.end_ms = edited.cut_end_ms;
        }
        if let Some(label) = &patch.label {
            reel.label = label.clone();
        }
        if let Some(summary) = &patch.summary {
            reel.summary = summary.clone();
        }
        if let Some(p) = patch.published {
            reel.published = p;
        }
        reel.retrimming |= bounds_changed;
        self.store.update_reel(&reel)?;
        drop(guard);

        if bounds_changed {
            self.spawn_retrim(job, reel.clone());
        }
        Ok(reel)
    }

    fn spawn_retrim(&self, job: GenerationJob, reel: Reel) {
        let (store, exec) = (self.store.clone(), self.exec.clone());
        std::thread::spawn(move || {
            let outcome = exec.retrim(&job, &reel);
            let Ok(Some(mut current)) = store.reel(reel.reel_id) else { return };
            // a newer edit owns the flag and will finish it
            if (current.start_ms, current.end_ms) != (reel.start_ms, reel.end_ms) {
                return;
            }
            match outcome {
                Ok(media) => current.media = Some(media),
                Err(e) => eprintln!("re-trim of reel {}: {e}", reel.reel_id),
            }
            current.retrimming = false;
            let _ = store.update_reel(&current);
        });
    }

    pub fn create_assignment(
        &self,
        actor: &Principal,
        reel_set_id: Uuid,
        student_id: &str,
        quiz_id: Option<&str>,
        condition: Condition,
    ) -> Result<Assignment, ServiceError> {
        require(actor, Role::Instructor)?;
        let job = self.store.job(reel_set_id)?.ok_or_else(|| not_found("job", reel_set_id))?;
        if job.status != JobStatus::Complete {
            return Err(ServiceError::NotReady(reel_set_id));
        }
        let quiz_id = quiz_id.unwrap_or(DEFAULT_QUIZ_ID);
        self.catalog.key(quiz_id).ok_or_else(|| not_found("quiz", quiz_id))?;
        if student_id.trim().is_empty() {
            return Err(ServiceError::Invalid("student_id is empty".into()));
        }
        let a = Assignment {
            assignment_id: Uuid::new_v4(),
            reel_set_id,
            student_id: student_id.into(),
            quiz_id: quiz_id.into(),
            condition,
            session_id: Uuid::new_v4(),
            created_at: Utc::now(),
        };
        self.store.insert_assignment(&a)?;
        Ok(a)
    }

    fn owned_assignment(&self, actor: &Principal, id: Uuid) -> Result<Assignment, ServiceError> {
        let a = self.store.assignment(id)?.ok_or_else(|| not_found("assignment", id))?;
        match actor.role {
            Role::Student if actor.user == a.student_id => Ok(a),
            Role::Instructor => Ok(a),
            _ => Err(ServiceError::Forbidden("assignment belongs to another student".into())),
        }
    }

    pub fn assignment_reels(&self, actor: &Principal, id: Uuid) -> Result<AssignmentView, ServiceError> {
        let assignment = self.owned_assignment(actor, id)?;
        let job = self.store.job(assignment.reel_set_id)?.ok_or_else(|| not_found("job", assignment.reel_set_id))?;
        let (reels, source_uri) = match assignment.condition {
            Condition::Reels => {
                let reels = self.store.reels_for_job(assignment.reel_set_id)?;
                (reels.into_iter().filter(|r| r.published).collect(), None)
            }
            Condition::LongForm => (Vec::new(), Some(job.source_uri)),
        };
        Ok(AssignmentView { assignment, reels, source_uri })
    }

    fn session_owner(&self, actor: &Principal, session_id: &str) -> Result<Assignment, ServiceError> {
        let a = self
            .store
            .assignments()?
            .into_iter()
            .find(|a| a.session_id.to_string() == session_id)
            .ok_or_else(|| ServiceError::SessionUnknown(session_id.into()))?;
        require(actor, Role::Student)?;
        if a.student_id != actor.user {
            return Err(ServiceError::Forbidden("session belongs to another student".into()));
        }
        Ok(a)
    }

    fn append(&self, input: EventInput) -> Result<ViewEvent, ServiceError> {
        let _g = self.event_lock.lock();
        let e = ViewEvent {
            session_id: input.session_id,
            subject_id: input.subject_id,
            kind: input.kind,
            at_ms: input.at_ms,
            wall_time_ms: input.wall_time_ms.unwrap_or_else(|| Utc::now().timestamp_millis()),
            value: input.value,
        };
        e.validate()?;
        self.store.append_event(&e)?;
        Ok(e)
    }

    pub fn record_event(&self, actor: &Principal, input: EventInput) -> Result<ViewEvent, ServiceError> {
        self.session_owner(actor, &input.session_id)?;
        self.append(input)
    }

    pub fn events(&self, session_id: &str) -> Result<Vec<ViewEvent>, ServiceError> {
        Ok(self.store.events(session_id)?)
    }

    /// Stores a 1 to 5 rating as a `rate` event in the assignment's session.
    pub fn rate_reel(
        &self,
        actor: &Principal,
        reel_id: Uuid,
        assignment_id: Uuid,
        value: u8,
        wall_time_ms: Option<i64>,
    ) -> Result<ViewEvent, ServiceError> {
        require(actor, Role::Student)?;
        let a = self.owned_assignment(actor, assignment_id)?;
        let reel = self.store.reel(reel_id)?.ok_or_else(|| not_found("reel", reel_id))?;
        if reel.job_id != a.reel_set_id || !reel.published {
            return Err(not_found("reel", reel_id));
        }
        self.append(EventInput {
            session_id: a.session_id.to_string(),
            subject_id: reel_id.to_string(),
            kind: EventKind::Rate,
            at_ms: 0,
            wall_time_ms,
            value: Some(value),
        })
    }

    pub fn submit_quiz(&self, actor: &Principal, assignment_id: Uuid, sub: &QuizSubmission) -> Result<QuizResult, ServiceError> {
        require(actor, Role::Student)?;
        let a = self.owned_assignment(actor, assignment_id)?;
        if self.store.quiz_result(assignment_id)?.is_some() {
            return Err(ServiceError::AlreadySubmitted(assignment_id));
        }
        let key = self.catalog.key(&a.quiz_id).ok_or_else(|| not_found("quiz", &a.quiz_id))?;
        let score = score_quiz(&sub.answers, key).map_err(|e| match e {
            QuizError::UnknownItem(i) => ServiceError::UnknownItem(i),
            e => ServiceError::Invalid(e.to_string()),
        })?;
        let questionnaire = check_questionnaire(&sub.questionnaire)?;

        let session = a.session_id.to_string();
        let mut events = self.store.events(&session)?;
        if !events.iter().any(|e| e.kind == EventKind::QuizSubmit) {
            let now = Utc::now().timestamp_millis();
            let last = events.last().map_or(now, |e| e.wall_time_ms);
            self.append(EventInput {
                session_id: session.clone(),
                subject_id: format!("quiz:{}", a.quiz_id),
                kind: EventKind::QuizSubmit,
                at_ms: 0,
                wall_time_ms: Some(now.max(last)),
                value: None,
            })?;
            events = self.store.events(&session)?;
        }
        let (quiz_duration_s, revisits) = quiz_timing(&events);
        let result = QuizResult {
            assignment_id,
            score,
            quiz_duration_s,
            revisits,
            questionnaire,
            submitted_at: Utc::now(),
        };
        self.store.insert_quiz_result(&result)?;
        Ok(result)
    }

    pub fn export_csv(&self, actor: &Principal, filter: &export::ExportFilter) -> Result<String, ServiceError> {
        require(actor, Role::Researcher)?;
        export::export_csv(self.store.as_ref(), filter)
    }
}

fn segment_of(r: &Reel) -> ReelSegment {
    ReelSegment {
        order: r.order,
        cut_start_ms: r.start_ms,
        cut_end_ms: r.end_ms,
        label: r.label.clone(),
        summary: r.summary.clone(),
        source_moment_rank: r.order,
    }
}

fn check_questionnaire(answers: &[QuestionnaireAnswer]) -> Result<Vec<LikertResponse>, ServiceError> {
    let mut seen = HashSet::new();
    answers
        .iter()
        .map(|q| {
            let instrument = Instrument::parse(&q.instrument).ok_or_else(|| ServiceError::UnknownItem(q.instrument.clone()))?;
            let item = find(instrument, &q.item_id)
                .ok_or_else(|| ServiceError::UnknownItem(format!("{}.{}", q.instrument, q.item_id)))?;
            if !(1..=7).contains(&q.value) {
                return Err(ServiceError::Invalid(format!("{}.{}: {} is outside 1..=7", q.instrument, q.item_id, q.value)));
            }
            if !seen.insert((instrument, q.item_id.as_str())) {
                return Err(ServiceError::Invalid(format!("{}.{} answered twice", q.instrument, q.item_id)));
            }
            let r = LikertResponse::new(instrument, item.item_id, q.value);
            Ok(if item.reversed { r.reversed() } else { r })
        })
        .collect()
}

/// Quiz time and revisits over the events up to the first `quiz_submit`.
pub fn quiz_timing(events: &[ViewEvent]) -> (Option<f64>, u32) {
    let end = events.iter().position(|e| e.kind == EventKind::QuizSubmit).map_or(events.len(), |i| i + 1);
    let upto = &events[..end];
    let open = upto.iter().find(|e| e.kind == EventKind::QuizOpen);
    let submit = upto.last().filter(|e| e.kind == EventKind::QuizSubmit);
    let duration = match (open, submit) {
        (Some(o), Some(s)) => Some((s.wall_time_ms - o.wall_time_ms) as f64 / 1000.0),
        _ => None,
    };
    (duration, count_revisits(upto))
}
