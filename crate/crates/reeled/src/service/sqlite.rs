use std::path::Path;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use reeled_core::analytics::ViewEvent;
use rusqlite::{params, Connection, OptionalExtension, TransactionBehavior};
use serde::de::DeserializeOwned;
use serde::Serialize;
use uuid::Uuid;

use super::model::{Assignment, GenerationJob, JobStatus, QuizResult, Reel};
use super::store::{apply_begin, apply_end, StageEnd, Storage, StoreError};

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS jobs (
    id TEXT PRIMARY KEY,
    busy INTEGER NOT NULL DEFAULT 0,
    created_at TEXT NOT NULL,
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS reels (
    id TEXT PRIMARY KEY,
    job_id TEXT NOT NULL,
    ord INTEGER NOT NULL,
    body TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS reels_by_job ON reels (job_id, ord);
CREATE TABLE IF NOT EXISTS assignments (
    id TEXT PRIMARY KEY,
    created_at TEXT NOT NULL,
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (id TEXT PRIMARY KEY);
CREATE TABLE IF NOT EXISTS events (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL REFERENCES sessions (id),
    wall_time_ms INTEGER NOT NULL,
    body TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS events_by_session ON events (session_id, seq);
CREATE TABLE IF NOT EXISTS quiz_results (
    assignment_id TEXT PRIMARY KEY,
    body TEXT NOT NULL
);
";

/// Rows hold the JSON form of each record next to the columns queries
/// filter on.
pub struct SqliteStore {
    conn: Mutex<Connection>,
}

fn backend(e: impl std::fmt::Display) -> StoreError {
    StoreError::Backend(e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, StoreError> {
    serde_json::to_string(v).map_err(backend)
}

fn from_json<T: DeserializeOwned>(s: &str) -> Result<T, StoreError> {
    serde_json::from_str(s).map_err(backend)
}

impl SqliteStore {
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        Self::init(Connection::open(path).map_err(backend)?)
    }

    pub fn open_in_memory() -> Result<Self, StoreError> {
        Self::init(Connection::open_in_memory().map_err(backend)?)
    }

    fn init(conn: Connection) -> Result<Self, StoreError> {
        conn.execute_batch(SCHEMA).map_err(backend)?;
        Ok(Self { conn: Mutex::new(conn) })
    }

    fn one<T: DeserializeOwned>(&self, sql: &str, key: &str) -> Result<Option<T>, StoreError> {
        let conn = self.conn.lock();
        let body: Option<String> = conn.query_row(sql, [key], |r| r.get(0)).optional().map_err(backend)?;
        body.map(|b| from_json(&b)).transpose()
    }

    fn all<T: DeserializeOwned>(&self, sql: &str, key: Option<&str>) -> Result<Vec<T>, StoreError> {
        let conn = self.conn.lock();
        let mut stmt = conn.prepare(sql).map_err(backend)?;
        let rows: Vec<String> = match key {
            Some(k) => stmt.query_map([k], |r| r.get(0)).map_err(backend)?.collect::<Result<_, _>>(),
            None => stmt.query_map([], |r| r.get(0)).map_err(backend)?.collect::<Result<_, _>>(),
        }
        .map_err(backend)?;
        rows.iter().map(|b| from_json(b)).collect()
    }
}

impl Storage for SqliteStore {
    fn insert_job(&self, job: &GenerationJob) -> Result<(), StoreError> {
        self.conn
            .lock()
            .execute(
                "INSERT INTO jobs (id, busy, created_at, body) VALUES (?1, 0, ?2, ?3)",
                params![job.job_id.to_string(), job.created_at.to_rfc3339(), to_json(job)?],
            )
            .map_err(backend)?;
        Ok(())
    }

    fn job(&self, id: Uuid) -> Result<Option<GenerationJob>, StoreError> {
        self.one("SELECT body FROM jobs WHERE id = ?1", &id.to_string())
    }

    fn jobs(&self) -> Result<Vec<GenerationJob>, StoreError> {
        self.all("SELECT body FROM jobs ORDER BY created_at, id", None)
    }

    fn begin_stage(&self, id: Uuid, from: JobStatus, to: JobStatus, now: DateTime<Utc>) -> Result<bool, StoreError> {
        let mut conn = self.conn.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate).map_err(backend)?;
        let row: Option<(bool, String)> = tx
            .query_row("SELECT busy, body FROM jobs WHERE id = ?1", [id.to_string()], |r| Ok((r.get(0)?, r.get(1)?)))
            .optional()
            .map_err(backend)?;
        let (busy, body) = row.ok_or_else(|| StoreError::not_found("job", id))?;
        let mut job: GenerationJob = from_json(&body)?;
        if busy || job.status != from {
            return Ok(false);
        }
        apply_begin(&mut job, to, now);
        tx.execute("UPDATE jobs SET busy = 1, body = ?2 WHERE id = ?1", params![id.to_string(), to_json(&job)?])
            .map_err(backend)?;
        tx.commit().map_err(backend)?;
        Ok(true)
    }

    fn end_stage(&self, id: Uuid, end: StageEnd, now: DateTime<Utc>) -> Result<GenerationJob, StoreError> {
        let mut conn = self.conn.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate).map_err(backend)?;
        let row: Option<(bool, String)> = tx
            .query_row("SELECT busy, body FROM jobs WHERE id = ?1", [id.to_string()], |r| Ok((r.get(0)?, r.get(1)?)))
            .optional()
            .map_err(backend)?;
        let (busy, body) = row.ok_or_else(|| StoreError::not_found("job", id))?;
        if !busy {
            return Err(StoreError::NotRunning(id));
        }
        let mut job: GenerationJob = from_json(&body)?;
        apply_end(&mut job, &end, now);
        tx.execute("UPDATE jobs SET busy = 0, body = ?2 WHERE id = ?1", params![id.to_string(), to_json(&job)?])
            .map_err(backend)?;
        if let StageEnd::Complete(reels) = &end {
            tx.execute("DELETE FROM reels WHERE job_id = ?1", [id.to_string()]).map_err(backend)?;
            for r in reels {
                tx.execute(
                    "INSERT INTO reels (id, job_id, ord, body) VALUES (?1, ?2, ?3, ?4)",
                    params![r.reel_id.to_string(), id.to_string(), r.order, to_json(r)?],
                )
                .map_err(backend)?;
            }
        }
        tx.commit().map_err(backend)?;
        Ok(job)
    }

    fn busy_jobs(&self) -> Result<Vec<Uuid>, StoreError> {
        let conn = self.conn.lock();
        let mut stmt = conn.prepare("SELECT id FROM jobs WHERE busy = 1").map_err(backend)?;
        let ids: Vec<String> = stmt.query_map([], |r| r.get(0)).map_err(backend)?.collect::<Result<_, _>>().map_err(backend)?;
        ids.iter().map(|s| Uuid::parse_str(s).map_err(backend)).collect()
    }

    fn reels_for_job(&self, job_id: Uuid) -> Result<Vec<Reel>, StoreError> {
        self.all("SELECT body FROM reels WHERE job_id = ?1 ORDER BY ord", Some(&job_id.to_string()))
    }

    fn reel(&self, id: Uuid) -> Result<Option<Reel>, StoreError> {
        self.one("SELECT body FROM reels WHERE id = ?1", &id.to_string())
    }

    fn update_reel(&self, reel: &Reel) -> Result<(), StoreError> {
        let n = self
            .conn
            .lock()
            .execute(
                "UPDATE reels SET ord = ?2, body = ?3 WHERE id = ?1",
                params![reel.reel_id.to_string(), reel.order, to_json(reel)?],
            )
            .map_err(backend)?;
        if n == 0 {
            return Err(StoreError::not_found("reel", reel.reel_id));
        }
        Ok(())
    }

    fn insert_assignment(&self, a: &Assignment) -> Result<(), StoreError> {
        let mut conn = self.conn.lock();
        let tx = conn.transaction().map_err(backend)?;
        tx.execute(
            "INSERT INTO assignments (id, created_at, body) VALUES (?1, ?2, ?3)",
            params![a.assignment_id.to_string(), a.created_at.to_rfc3339(), to_json(a)?],
        )
        .map_err(backend)?;
        tx.execute("INSERT OR IGNORE INTO sessions (id) VALUES (?1)", [a.session_id.to_string()]).map_err(backend)?;
        tx.commit().map_err(backend)
    }

    fn assignment(&self, id: Uuid) -> Result<Option<Assignment>, StoreError> {
        self.one("SELECT body FROM assignments WHERE id = ?1", &id.to_string())
    }

    fn assignments(&self) -> Result<Vec<Assignment>, StoreError> {
        self.all("SELECT body FROM assignments ORDER BY created_at, id", None)
    }

    fn append_event(&self, e: &ViewEvent) -> Result<(), StoreError> {
        let mut conn = self.conn.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate).map_err(backend)?;
        let known: Option<String> = tx
            .query_row("SELECT id FROM sessions WHERE id = ?1", [&e.session_id], |r| r.get(0))
            .optional()
            .map_err(backend)?;
        if known.is_none() {
            return Err(StoreError::SessionUnknown(e.session_id.clone()));
        }
        let last: Option<i64> = tx
            .query_row(
                "SELECT wall_time_ms FROM events WHERE session_id = ?1 ORDER BY seq DESC LIMIT 1",
                [&e.session_id],
                |r| r.get(0),
            )
            .optional()
            .map_err(backend)?;
        if let Some(last_ms) = last.filter(|l| e.wall_time_ms < *l) {
            return Err(StoreError::OrderViolation { session: e.session_id.clone(), last_ms, got_ms: e.wall_time_ms });
        }
        tx.execute(
            "INSERT INTO events (session_id, wall_time_ms, body) VALUES (?1, ?2, ?3)",
            params![e.session_id, e.wall_time_ms, to_json(e)?],
        )
        .map_err(backend)?;
        tx.commit().map_err(backend)
    }

    fn events(&self, session_id: &str) -> Result<Vec<ViewEvent>, StoreError> {
        {
            let conn = self.conn.lock();
            let known: Option<String> = conn
                .query_row("SELECT id FROM sessions WHERE id = ?1", [session_id], |r| r.get(0))
                .optional()
                .map_err(backend)?;
            if known.is_none() {
                return Err(StoreError::SessionUnknown(session_id.into()));
            }
        }
        self.all("SELECT body FROM events WHERE session_id = ?1 ORDER BY seq", Some(session_id))
    }

    fn insert_quiz_result(&self, r: &QuizResult) -> Result<(), StoreError> {
        let res = self.conn.lock().execute(
            "INSERT INTO quiz_results (assignment_id, body) VALUES (?1, ?2)",
            params![r.assignment_id.to_string(), to_json(r)?],
        );
        match res {
            Ok(_) => Ok(()),
            Err(rusqlite::Error::SqliteFailure(f, _)) if f.code == rusqlite::ErrorCode::ConstraintViolation => {
                Err(StoreError::AlreadySubmitted(r.assignment_id))
            }
            Err(e) => Err(backend(e)),
        }
    }

    fn quiz_result(&self, assignment_id: Uuid) -> Result<Option<QuizResult>, StoreError> {
        self.one("SELECT body FROM quiz_results WHERE assignment_id = ?1", &assignment_id.to_string())
    }
}
