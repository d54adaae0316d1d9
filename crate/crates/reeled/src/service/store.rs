use std::collections::HashMap;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use reeled_core::analytics::ViewEvent;
use thiserror::Error;
use uuid::Uuid;

use super::model::{Assignment, GenerationJob, JobFailure, JobStatus, QuizResult, Reel};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("session {0} is unknown")]
    SessionUnknown(String),
    #[error("event at {got_ms} ms is earlier than the last stored event of session {session} ({last_ms} ms)")]
    OrderViolation { session: String, last_ms: i64, got_ms: i64 },
    #[error("quiz for assignment {0} was already submitted")]
    AlreadySubmitted(Uuid),
    #[error("job {0} is not running a stage")]
    NotRunning(Uuid),
    #[error("storage: {0}")]
    Backend(String),
}

impl StoreError {
    pub(crate) fn not_found(kind: &'static str, id: impl ToString) -> Self {
        Self::NotFound { kind, id: id.to_string() }
    }
}

/// How a stage that was begun with [`Storage::begin_stage`] ended.
#[derive(Debug, Clone)]
pub enum StageEnd {
    /// The stage finished; the job waits for its next stage.
    Idle,
    /// The last stage finished; the reels are stored with the job.
    Complete(Vec<Reel>),
    Failed(JobFailure),
}

/// Persistence for the service. Every method is atomic on its own.
pub trait Storage: Send + Sync {
    fn insert_job(&self, job: &GenerationJob) -> Result<(), StoreError>;
    fn job(&self, id: Uuid) -> Result<Option<GenerationJob>, StoreError>;
    fn jobs(&self) -> Result<Vec<GenerationJob>, StoreError>;
    /// Moves an idle job from `from` to `to` and marks it busy. Returns
    /// false, changing nothing, when the job is not idle in `from`.
    fn begin_stage(&self, id: Uuid, from: JobStatus, to: JobStatus, now: DateTime<Utc>) -> Result<bool, StoreError>;
    /// Ends the stage a busy job is running.
    fn end_stage(&self, id: Uuid, end: StageEnd, now: DateTime<Utc>) -> Result<GenerationJob, StoreError>;
    /// Jobs marked busy, used to fail work interrupted by a restart.
    fn busy_jobs(&self) -> Result<Vec<Uuid>, StoreError>;

    /// Ordered by `order`.
    fn reels_for_job(&self, job_id: Uuid) -> Result<Vec<Reel>, StoreError>;
    fn reel(&self, id: Uuid) -> Result<Option<Reel>, StoreError>;
    fn update_reel(&self, reel: &Reel) -> Result<(), StoreError>;

    /// Also opens the assignment's event session.
    fn insert_assignment(&self, a: &Assignment) -> Result<(), StoreError>;
    fn assignment(&self, id: Uuid) -> Result<Option<Assignment>, StoreError>;
    fn assignments(&self) -> Result<Vec<Assignment>, StoreError>;

    /// Appends to the session's stream; rejects unknown sessions and
    /// wall times earlier than the last stored one.
    fn append_event(&self, e: &ViewEvent) -> Result<(), StoreError>;
    fn events(&self, session_id: &str) -> Result<Vec<ViewEvent>, StoreError>;

    /// Results are immutable once stored.
    fn insert_quiz_result(&self, r: &QuizResult) -> Result<(), StoreError>;
    fn quiz_result(&self, assignment_id: Uuid) -> Result<Option<QuizResult>, StoreError>;
}

pub(crate) fn apply_begin(job: &mut GenerationJob, to: JobStatus, now: DateTime<Utc>) {
    job.status = to;
    job.history.push(to);
    if let Some(p) = to.progress_pct() {
        job.progress_pct = p;
    }
    job.updated_at = now;
}

pub(crate) fn apply_end(job: &mut GenerationJob, end: &StageEnd, now: DateTime<Utc>) {
    match end {
        StageEnd::Idle => {}
        StageEnd::Complete(_) => apply_begin(job, JobStatus::Complete, now),
        StageEnd::Failed(f) => {
            job.status = JobStatus::Failed;
            job.history.push(JobStatus::Failed);
            job.failure = Some(f.clone());
        }
    }
    job.updated_at = now;
}

#[derive(Default)]
struct Inner {
    jobs: HashMap<Uuid, (GenerationJob, bool)>,
    reels: HashMap<Uuid, Reel>,
    assignments: HashMap<Uuid, Assignment>,
    sessions: HashMap<String, Vec<ViewEvent>>,
    results: HashMap<Uuid, QuizResult>,
}

/// Everything in one mutex-guarded map set.
#[derive(Default)]
pub struct MemoryStore {
    inner: Mutex<Inner>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Storage for MemoryStore {
    fn insert_job(&self, job: &GenerationJob) -> Result<(), StoreError> {
        self.inner.lock().jobs.insert(job.job_id, (job.clone(), false));
        Ok(())
    }

    fn job(&self, id: Uuid) -> Result<Option<GenerationJob>, StoreError> {
        Ok(self.inner.lock().jobs.get(&id).map(|(j, _)| j.clone()))
    }

    fn jobs(&self) -> Result<Vec<GenerationJob>, StoreError> {
        let mut all: Vec<_> = self.inner.lock().jobs.values().map(|(j, _)| j.clone()).collect();
        all.sort_by_key(|j| (j.created_at, j.job_id));
        Ok(all)
    }

    fn begin_stage(&self, id: Uuid, from: JobStatus, to: JobStatus, now: DateTime<Utc>) -> Result<bool, StoreError> {
        let mut g = self.inner.lock();
        let (job, busy) = g.jobs.get_mut(&id).ok_or_else(|| StoreError::not_found("job", id))?;
        if *busy || job.status != from {
            return Ok(false);
        }
        apply_begin(job, to, now);
        *busy = true;
        Ok(true)
    }

    fn end_stage(&self, id: Uuid, end: StageEnd, now: DateTime<Utc>) -> Result<GenerationJob, StoreError> {
        let mut g = self.inner.lock();
        let (job, busy) = g.jobs.get_mut(&id).ok_or_else(|| StoreError::not_found("job", id))?;
        if !*busy {
            return Err(StoreError::NotRunning(id));
        }
        apply_end(job, &end, now);
        *busy = false;
        let job = job.clone();
        if let StageEnd::Complete(reels) = end {
            g.reels.retain(|_, r| r.job_id != id);
            g.reels.extend(reels.into_iter().map(|r| (r.reel_id, r)));
        }
        Ok(job)
    }

    fn busy_jobs(&self) -> Result<Vec<Uuid>, StoreError> {
        Ok(self.inner.lock().jobs.iter().filter(|(_, (_, b))| *b).map(|(id, _)| *id).collect())
    }

    fn reels_for_job(&self, job_id: Uuid) -> Result<Vec<Reel>, StoreError> {
        let mut reels: Vec<Reel> = self.inner.lock().reels.values().filter(|r| r.job_id == job_id).cloned().collect();
        reels.sort_by_key(|r| r.order);
        Ok(reels)
    }

    fn reel(&self, id: Uuid) -> Result<Option<Reel>, StoreError> {
        Ok(self.inner.lock().reels.get(&id).cloned())
    }

    fn update_reel(&self, reel: &Reel) -> Result<(), StoreError> {
        let mut g = self.inner.lock();
        let slot = g.reels.get_mut(&reel.reel_id).ok_or_else(|| StoreError::not_found("reel", reel.reel_id))?;
        *slot = reel.clone();
        Ok(())
    }

    fn insert_assignment(&self, a: &Assignment) -> Result<(), StoreError> {
        let mut g = self.inner.lock();
        g.assignments.insert(a.assignment_id, a.clone());
        g.sessions.entry(a.session_id.to_string()).or_default();
        Ok(())
    }

    fn assignment(&self, id: Uuid) -> Result<Option<Assignment>, StoreError> {
        Ok(self.inner.lock().assignments.get(&id).cloned())
    }

    fn assignments(&self) -> Result<Vec<Assignment>, StoreError> {
        let mut all: Vec<_> = self.inner.lock().assignments.values().cloned().collect();
        all.sort_by_key(|a| (a.created_at, a.assignment_id));
        Ok(all)
    }

    fn append_event(&self, e: &ViewEvent) -> Result<(), StoreError> {
        let mut g = self.inner.lock();
        let stream = g.sessions.get_mut(&e.session_id).ok_or_else(|| StoreError::SessionUnknown(e.session_id.clone()))?;
        if let Some(last) = stream.last() {
            if e.wall_time_ms < last.wall_time_ms {
                return Err(StoreError::OrderViolation {
                    session: e.session_id.clone(),
                    last_ms: last.wall_time_ms,
                    got_ms: e.wall_time_ms,
                });
            }
        }
        stream.push(e.clone());
        Ok(())
    }

    fn events(&self, session_id: &str) -> Result<Vec<ViewEvent>, StoreError> {
        self.inner
            .lock()
            .sessions
            .get(session_id)
            .cloned()
            .ok_or_else(|| StoreError::SessionUnknown(session_id.into()))
    }

    fn insert_quiz_result(&self, r: &QuizResult) -> Result<(), StoreError> {
        let mut g = self.inner.lock();
        if g.results.contains_key(&r.assignment_id) {
            return Err(StoreError::AlreadySubmitted(r.assignment_id));
        }
        g.results.insert(r.assignment_id, r.clone());
        Ok(())
    }

    fn quiz_result(&self, assignment_id: Uuid) -> Result<Option<QuizResult>, StoreError> {
        Ok(self.inner.lock().results.get(&assignment_id).cloned())
    }
}
