use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};
use std::thread;

use chrono::Utc;
use parking_lot::Mutex;
use reeled_core::llm::{KeyMoment, LlmOptions, LlmProvider};
use reeled_core::planner::{plan, CutPlan, ReelSegment};
use reeled_core::transcript::Transcript;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use uuid::Uuid;

use super::model::{GenerationJob, JobFailure, JobStatus, Reel, ReelMedia};
use super::store::{StageEnd, Storage, StoreError};
use crate::captions::{load_captions, CaptionSource, YtDlpCaptions};
use crate::generate::find_moments;
use crate::media::{self, assemble, AssembleOptions, MediaTools, TrimOptions};
use crate::source;

/// Runs the work behind each job stage.
pub trait StageExecutor: Send + Sync {
    /// Runs `stage` for `job`. Only the trimming stage returns reels.
    fn run_stage(&self, job: &GenerationJob, stage: JobStatus) -> Result<Vec<Reel>, String>;

    /// The normalized transcript a finished job was planned against.
    fn transcript(&self, job: &GenerationJob) -> Result<Transcript, String>;

    /// Renders `reel` again after its bounds changed. The old file must stay
    /// valid until the new one has been probed.
    fn retrim(&self, _job: &GenerationJob, _reel: &Reel) -> Result<ReelMedia, String> {
        Err("re-trimming is not supported by this executor".into())
    }
}

#[derive(Debug, Error)]
pub enum AdvanceError {
    #[error("job {0} not found")]
    NotFound(Uuid),
    #[error("job is {} and cannot advance", .0.as_str())]
    Terminal(JobStatus),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Runs the stage after the job's current one.
///
/// The store's compare-and-set makes concurrent calls safe: only one caller
/// wins a stage, the others get the job back unchanged.
pub fn advance_job(store: &dyn Storage, exec: &dyn StageExecutor, id: Uuid) -> Result<GenerationJob, AdvanceError> {
    let job = store.job(id)?.ok_or(AdvanceError::NotFound(id))?;
    let Some(next) = job.status.next() else {
        return Err(AdvanceError::Terminal(job.status));
    };
    if !store.begin_stage(id, job.status, next, Utc::now())? {
        return store.job(id)?.ok_or(AdvanceError::NotFound(id));
    }
    let job = store.job(id)?.ok_or(AdvanceError::NotFound(id))?;
    let outcome = catch_unwind(AssertUnwindSafe(|| exec.run_stage(&job, next)))
        .unwrap_or_else(|_| Err(format!("{} stage panicked", next.as_str())));
    let end = match outcome {
        Ok(reels) if next == JobStatus::Trimming => StageEnd::Complete(reels),
        Ok(_) => StageEnd::Idle,
        Err(message) => StageEnd::Failed(JobFailure { stage: next, message }),
    };
    Ok(store.end_stage(id, end, Utc::now())?)
}

/// Advances until the job is terminal or another caller holds it.
pub fn run_job(store: &dyn Storage, exec: &dyn StageExecutor, id: Uuid) -> Result<GenerationJob, AdvanceError> {
    loop {
        let before = store.job(id)?.ok_or(AdvanceError::NotFound(id))?;
        if before.status.is_terminal() {
            return Ok(before);
        }
        let after = advance_job(store, exec, id)?;
        if after.history.len() == before.history.len() {
            return Ok(after);
        }
    }
}

/// Marks jobs left busy by a previous process as failed.
pub fn fail_interrupted(store: &dyn Storage) -> Result<usize, StoreError> {
    let ids = store.busy_jobs()?;
    for id in &ids {
        if let Some(job) = store.job(*id)? {
            let failure = JobFailure { stage: job.status, message: "interrupted by a service restart".into() };
            store.end_stage(*id, StageEnd::Failed(failure), Utc::now())?;
        }
    }
    Ok(ids.len())
}

/// Bounded pool of threads that run queued jobs to completion.
pub struct JobQueue {
    tx: Mutex<mpsc::Sender<Uuid>>,
}

impl JobQueue {
    pub fn start(store: Arc<dyn Storage>, exec: Arc<dyn StageExecutor>, workers: usize) -> Self {
        let (tx, rx) = mpsc::channel::<Uuid>();
        let rx = Arc::new(Mutex::new(rx));
        for i in 0..workers.max(1) {
            let (store, exec, rx) = (store.clone(), exec.clone(), rx.clone());
            thread::Builder::new()
                .name(format!("job-worker-{i}"))
                .spawn(move || loop {
                    let next = rx.lock().recv();
                    let Ok(id) = next else { return };
                    if let Err(e) = run_job(store.as_ref(), exec.as_ref(), id) {
                        eprintln!("job {id}: {e}");
                    }
                })
                .expect("spawning a worker thread");
        }
        Self { tx: Mutex::new(tx) }
    }

    pub fn submit(&self, id: Uuid) {
        // workers only stop when the queue is dropped
        let _ = self.tx.lock().send(id);
    }
}

/// The real pipeline, keeping each job's intermediate files in
/// `<media_root>/jobs/<job_id>/`.
pub struct PipelineExecutor {
    pub media_root: PathBuf,
    pub provider: Arc<dyn LlmProvider + Send + Sync>,
    pub llm: LlmOptions,
    pub trim: TrimOptions,
    /// Parallel trims per job; 0 means one per CPU.
    pub trim_workers: usize,
}

const SOURCE_FILE: &str = "source.path";
const TRANSCRIPT_FILE: &str = "transcript.json";
const MOMENTS_FILE: &str = "moments.json";
const PLAN_FILE: &str = "plan.json";

fn save<T: Serialize>(dir: &Path, name: &str, v: &T) -> Result<(), String> {
    let body = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
    fs::write(dir.join(name), body).map_err(|e| format!("{}: {e}", dir.join(name).display()))
}

fn load<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, String> {
    let p = dir.join(name);
    let raw = fs::read(&p).map_err(|e| format!("{}: {e}", p.display()))?;
    serde_json::from_slice(&raw).map_err(|e| format!("{}: {e}", p.display()))
}

impl PipelineExecutor {
    pub fn job_dir(&self, id: Uuid) -> PathBuf {
        self.media_root.join("jobs").join(id.to_string())
    }

    fn media_path(id: Uuid, order: u32) -> String {
        format!("jobs/{id}/{}", media::reel_file_name(order))
    }

    fn source_path(dir: &Path) -> Result<PathBuf, String> {
        let p = dir.join(SOURCE_FILE);
        fs::read_to_string(&p).map(|s| PathBuf::from(s.trim_end())).map_err(|e| format!("{}: {e}", p.display()))
    }

    fn captions(&self, job: &GenerationJob, dir: &Path) -> Result<Transcript, String> {
        let path = if source::is_remote(&job.captions_ref) {
            YtDlpCaptions::default().fetch(&job.captions_ref, dir).map_err(|e| e.to_string())?
        } else {
            PathBuf::from(job.captions_ref.strip_prefix("file://").unwrap_or(&job.captions_ref))
        };
        load_captions(&path).map_err(|e| e.to_string())
    }
}

impl StageExecutor for PipelineExecutor {
    fn run_stage(&self, job: &GenerationJob, stage: JobStatus) -> Result<Vec<Reel>, String> {
        let dir = self.job_dir(job.job_id);
        fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        match stage {
            JobStatus::Downloading => {
                let path = source::acquire(&job.source_uri, &dir).map_err(|e| e.to_string())?;
                let path = fs::canonicalize(&path).unwrap_or(path);
                fs::write(dir.join(SOURCE_FILE), path.to_string_lossy().as_bytes()).map_err(|e| e.to_string())?;
            }
            JobStatus::Transcribing => {
                let tools = MediaTools::locate().map_err(|e| e.to_string())?;
                let probed = media::probe(&tools, &Self::source_path(&dir)?).map_err(|e| e.to_string())?;
                let t = self.captions(job, &dir)?.extend_duration(probed.duration_ms);
                save(&dir, TRANSCRIPT_FILE, &t)?;
            }
            JobStatus::LlmProcessing => {
                let t: Transcript = load(&dir, TRANSCRIPT_FILE)?;
                let (moments, _) = find_moments(self.provider.as_ref(), &t, &job.spec, &self.llm).map_err(|e| e.to_string())?;
                save(&dir, MOMENTS_FILE, &moments)?;
            }
            JobStatus::Planning => {
                let t: Transcript = load(&dir, TRANSCRIPT_FILE)?;
                let moments: Vec<KeyMoment> = load(&dir, MOMENTS_FILE)?;
                let cut = plan(&t, &moments, &job.spec).map_err(|e| e.to_string())?;
                save(&dir, PLAN_FILE, &cut)?;
            }
            JobStatus::Trimming => {
                let cut: CutPlan = load(&dir, PLAN_FILE)?;
                let tools = MediaTools::locate().map_err(|e| e.to_string())?;
                let opts = AssembleOptions { trim: self.trim, workers: self.trim_workers, ..AssembleOptions::default() };
                let done = assemble(&tools, &Self::source_path(&dir)?, &cut, &dir, &opts).map_err(|e| e.to_string())?;
                return Ok(cut
                    .segments
                    .iter()
                    .zip(&done.artifacts)
                    .map(|(s, a)| Reel {
                        reel_id: Uuid::new_v4(),
                        job_id: job.job_id,
                        order: s.order,
                        start_ms: s.cut_start_ms,
                        end_ms: s.cut_end_ms,
                        label: s.label.clone(),
                        summary: s.summary.clone(),
                        published: false,
                        media: Some(ReelMedia {
                            file: Self::media_path(job.job_id, s.order),
                            duration_ms: a.measured_duration_ms,
                            checksum: a.checksum.clone(),
                        }),
                        retrimming: false,
                    })
                    .collect());
            }
            other => return Err(format!("no work is attached to {}", other.as_str())),
        }
        Ok(Vec::new())
    }

    fn transcript(&self, job: &GenerationJob) -> Result<Transcript, String> {
        load(&self.job_dir(job.job_id), TRANSCRIPT_FILE)
    }

    fn retrim(&self, job: &GenerationJob, reel: &Reel) -> Result<ReelMedia, String> {
        let dir = self.job_dir(job.job_id);
        let tools = MediaTools::locate().map_err(|e| e.to_string())?;
        let seg = ReelSegment {
            order: reel.order,
            cut_start_ms: reel.start_ms,
            cut_end_ms: reel.end_ms,
            label: reel.label.clone(),
            summary: reel.summary.clone(),
            source_moment_rank: reel.order,
        };
        let staged = dir.join(format!("reel_{}.retrim.mp4", reel.order));
        let art = media::trim_segment(&tools, &Self::source_path(&dir)?, &seg, &self.trim, &staged).map_err(|e| e.to_string())?;
        let final_path = dir.join(media::reel_file_name(reel.order));
        fs::rename(&staged, &final_path).map_err(|e| e.to_string())?;
        Ok(ReelMedia {
            file: Self::media_path(job.job_id, reel.order),
            duration_ms: art.measured_duration_ms,
            checksum: art.checksum,
        })
    }
}
