#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reeled::service::export::ExportFilter;
use reeled::service::{
    Condition, EventInput, GenerationJob, JobStatus, MemoryStore, Principal, QuestionnaireAnswer, QuizCatalog, QuizSubmission,
    Reel, ReelMedia, Role, Service, ServiceError, SqliteStore, StageExecutor, Storage,
};
use reeled_core::analytics::catalog::ITEMS;
use reeled_core::analytics::{EventKind, QuizAnswer, ViewEvent};
use reeled_core::llm::{mock_select, ReelSpec};
use reeled_core::planner::plan;
use reeled_core::transcript::{Transcript, TranscriptCue};
use uuid::Uuid;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_str(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

/// 144 five-second cues: a twelve-minute lecture.
pub fn grid_transcript() -> Transcript {
    let cues = (0..144u64)
        .map(|i| TranscriptCue::new(i as u32, i * 5000, (i + 1) * 5000, format!("cue {i} talks about topic {}", i / 10)))
        .collect();
    Transcript::from_cues("grid", cues, 0)
}

/// Stage work without media: plans with the mock selection on the grid
/// transcript and records every stage it runs.
#[derive(Default)]
pub struct FakeExecutor {
    pub fail_at: Mutex<HashMap<Uuid, JobStatus>>,
    pub calls: Mutex<Vec<(Uuid, JobStatus)>>,
    /// Upper bound of a pseudo-random pause inside each stage, microseconds.
    pub jitter_us: u64,
    pub retrims: Mutex<Vec<Uuid>>,
}

impl FakeExecutor {
    pub fn with_jitter(jitter_us: u64) -> Self {
        Self { jitter_us, ..Self::default() }
    }

    pub fn fail(&self, job: Uuid, stage: JobStatus) {
        self.fail_at.lock().insert(job, stage);
    }
}

impl StageExecutor for FakeExecutor {
    fn run_stage(&self, job: &GenerationJob, stage: JobStatus) -> Result<Vec<Reel>, String> {
        self.calls.lock().push((job.job_id, stage));
        if self.jitter_us > 0 {
            let h = job.job_id.as_u128() as u64 ^ (stage as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            std::thread::sleep(std::time::Duration::from_micros(h % self.jitter_us));
        }
        if self.fail_at.lock().get(&job.job_id) == Some(&stage) {
            return Err(format!("scripted failure in {}", stage.as_str()));
        }
        if stage != JobStatus::Trimming {
            return Ok(Vec::new());
        }
        let t = grid_transcript();
        let moments = mock_select(&t, &job.spec).map_err(|e| e.to_string())?;
        let cut = plan(&t, &moments, &job.spec).map_err(|e| e.to_string())?;
        Ok(cut
            .segments
            .iter()
            .map(|s| Reel {
                reel_id: Uuid::new_v4(),
                job_id: job.job_id,
                order: s.order,
                start_ms: s.cut_start_ms,
                end_ms: s.cut_end_ms,
                label: s.label.clone(),
                summary: s.summary.clone(),
                published: false,
                media: Some(ReelMedia { file: format!("jobs/{}/reel_{}.mp4", job.job_id, s.order), duration_ms: s.duration_ms(), checksum: "0".repeat(64) }),
                retrimming: false,
            })
            .collect())
    }

    fn transcript(&self, _job: &GenerationJob) -> Result<Transcript, String> {
        Ok(grid_transcript())
    }

    fn retrim(&self, job: &GenerationJob, reel: &Reel) -> Result<ReelMedia, String> {
        self.retrims.lock().push(reel.reel_id);
        Ok(ReelMedia {
            file: format!("jobs/{}/reel_{}.mp4", job.job_id, reel.order),
            duration_ms: reel.end_ms - reel.start_ms,
            checksum: "1".repeat(64),
        })
    }
}

pub fn instructor() -> Principal {
    Principal::new(Role::Instructor, "prof")
}

pub fn student(name: &str) -> Principal {
    Principal::new(Role::Student, name)
}

pub fn researcher() -> Principal {
    Principal::new(Role::Researcher, "analyst")
}

pub fn stores() -> Vec<(&'static str, Arc<dyn Storage>)> {
    vec![
        ("memory", Arc::new(MemoryStore::new()) as Arc<dyn Storage>),
        ("sqlite", Arc::new(SqliteStore::open_in_memory().unwrap())),
    ]
}

pub fn service(store: Arc<dyn Storage>, exec: Arc<FakeExecutor>) -> Service {
    Service::new(store, exec, QuizCatalog::default())
}

/// A job advanced by hand until it completes.
pub fn completed_job(svc: &Service) -> GenerationJob {
    let job = svc
        .create_job(&instructor(), &fixture_str("lecture_12min.mp4"), &fixture_str("lecture_12min.vtt"), ReelSpec::default())
        .unwrap();
    let mut j = job;
    while !j.status.is_terminal() {
        j = svc.advance(j.job_id).unwrap();
    }
    assert_eq!(j.status, JobStatus::Complete);
    j
}

/// Publishes every reel of `job`.
pub fn publish_all(svc: &Service, job: Uuid) -> Vec<Reel> {
    let reels = svc.reels(&instructor(), job).unwrap();
    reels
        .iter()
        .map(|r| {
            let patch = reeled::service::ReelPatch { published: Some(true), ..Default::default() };
            svc.update_reel(&instructor(), r.reel_id, &patch).unwrap()
        })
        .collect()
}

/// A study run through the service: `participants` students split between
/// the conditions, each with a seeded viewing session and a full
/// questionnaire. Every `skip_every`-th student never submits.
pub fn run_study(svc: &Service, participants: usize, skip_every: usize, seed: u64) -> HashMap<String, Condition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let job = completed_job(svc);
    let reels = publish_all(svc, job.job_id);
    let mut submitted = HashMap::new();
    for p in 0..participants {
        let who = format!("p{p:03}");
        let cond = if p % 2 == 0 { Condition::Reels } else { Condition::LongForm };
        let a = svc.create_assignment(&instructor(), job.job_id, &who, None, cond).unwrap();
        let session = a.session_id.to_string();
        let mut wall = 1_700_000_000_000i64 + p as i64 * 10_000_000;
        let send = |subject: &str, kind: EventKind, wall: i64| {
            let e = EventInput { session_id: session.clone(), subject_id: subject.into(), kind, at_ms: 0, wall_time_ms: Some(wall), value: None };
            svc.record_event(&student(&who), e).unwrap();
        };
        send(&reels[0].reel_id.to_string(), EventKind::Play, wall);
        wall += rng.gen_range(60_000..600_000);
        send("quiz", EventKind::QuizOpen, wall);
        for _ in 0..rng.gen_range(0..6) {
            wall += rng.gen_range(1_000..60_000);
            let r = reels.choose(&mut rng).unwrap().reel_id.to_string();
            send(&r, *[EventKind::Play, EventKind::Seek].choose(&mut rng).unwrap(), wall);
        }
        if skip_every > 0 && p % skip_every == skip_every - 1 {
            continue;
        }
        wall += rng.gen_range(60_000..600_000);
        send("quiz", EventKind::QuizSubmit, wall);

        let answers = ["q1", "q2", "q3", "q4", "q5", "q6"]
            .iter()
            .map(|q| QuizAnswer { item_id: (*q).into(), choice: ["a", "b", "c", "d"].choose(&mut rng).unwrap().to_string() })
            .collect();
        // the reels group leans higher so some comparisons come out significant
        let lift = if cond == Condition::Reels { 2 } else { 0 };
        let questionnaire = ITEMS
            .iter()
            .map(|c| QuestionnaireAnswer {
                instrument: c.instrument.as_str().into(),
                item_id: c.item_id.into(),
                value: rng.gen_range(1..=5) + lift,
            })
            .collect();
        svc.submit_quiz(&student(&who), a.assignment_id, &QuizSubmission { answers, questionnaire }).unwrap();
        submitted.insert(who, cond);
    }
    submitted
}

/// Checks one job's persisted history: a prefix of the forward order,
/// possibly ended by `failed`, with no state twice.
pub fn history_is_valid(h: &[JobStatus]) -> bool {
    let (body, failed) = match h.split_last() {
        Some((JobStatus::Failed, rest)) => (rest, true),
        _ => (h, false),
    };
    !body.is_empty() && body == &JobStatus::ORDER[..body.len()] && !(failed && body.last() == Some(&JobStatus::Complete))
}

pub fn interleave(store: Arc<dyn Storage>, seed: u64) {
    let exec = Arc::new(FakeExecutor::with_jitter(300));
    let svc = Arc::new(service(store.clone(), exec.clone()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stages = &JobStatus::ORDER[1..6];
    let ids: Vec<Uuid> = (0..50)
        .map(|_| {
            let j = svc
                .create_job(&instructor(), &fixture_str("lecture_12min.mp4"), &fixture_str("lecture_12min.vtt"), ReelSpec::default())
                .unwrap();
            if rng.gen_bool(0.3) {
                exec.fail(j.job_id, *stages.choose(&mut rng).unwrap());
            }
            j.job_id
        })
        .collect();

    let finished = Arc::new(AtomicUsize::new(0));
    std::thread::scope(|s| {
        for t in 0..8u64 {
            let (svc, ids, finished) = (svc.clone(), ids.clone(), finished.clone());
            s.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 100 + t);
                while finished.load(Ordering::SeqCst) < ids.len() {
                    let id = *ids.choose(&mut rng).unwrap();
                    match svc.advance(id) {
                        Ok(j) if j.status.is_terminal() => {}
                        Ok(_) => {}
                        Err(ServiceError::Invalid(_)) => {}
                        Err(e) => panic!("{e}"),
                    }
                    let done = ids.iter().filter(|i| svc.store().job(**i).unwrap().unwrap().status.is_terminal()).count();
                    finished.fetch_max(done, Ordering::SeqCst);
                }
            });
        }
    });

    let calls = exec.calls.lock().clone();
    let mut per_job: HashMap<Uuid, Vec<JobStatus>> = HashMap::new();
    for (id, stage) in calls {
        per_job.entry(id).or_default().push(stage);
    }
    let failures = exec.fail_at.lock().clone();
    for id in &ids {
        let job = store.job(*id).unwrap().unwrap();
        assert!(history_is_valid(&job.history), "{id}: {:?}", job.history);
        // every stage ran exactly once, in the recorded order
        let ran: Vec<JobStatus> = job.history.iter().copied().filter(|s| !matches!(s, JobStatus::Queued | JobStatus::Complete | JobStatus::Failed)).collect();
        assert_eq!(per_job.get(id).cloned().unwrap_or_default(), ran, "{id}");
        match failures.get(id) {
            Some(stage) => {
                assert_eq!(job.status, JobStatus::Failed);
                assert_eq!(job.failure.unwrap().stage, *stage);
            }
            None => {
                assert_eq!(job.status, JobStatus::Complete);
                assert_eq!(job.progress_pct, 100);
                assert_eq!(store.reels_for_job(*id).unwrap().len(), 5);
            }
        }
    }
}

/// Revisits per the study definition, written out independently of the
/// library: play/seek after the first quiz_open and up to the first
/// quiz_submit; one within 2 s of the previous one on the same subject
/// does not count again.
pub fn recount(events: &[ViewEvent]) -> u32 {
    let mut opened = false;
    let mut last: Option<(String, i64)> = None;
    let mut n = 0;
    for e in events {
        match e.kind {
            EventKind::QuizOpen => opened = true,
            EventKind::QuizSubmit if opened => break,
            EventKind::Play | EventKind::Seek if opened => {
                let repeat = matches!(&last, Some((s, t)) if *s == e.subject_id && e.wall_time_ms - t <= 2000);
                if !repeat {
                    n += 1;
                }
                last = Some((e.subject_id.clone(), e.wall_time_ms));
            }
            _ => {}
        }
    }
    n
}

pub fn random_session(svc: &Service, who: &str, session: &str, rng: &mut ChaCha8Rng) {
    let kinds = [EventKind::Play, EventKind::Pause, EventKind::Seek, EventKind::ReelChange];
    let subjects = ["r0", "r1", "r2"];
    let mut wall = 1_700_000_000_000i64;
    let n = rng.gen_range(0..40);
    let open_at = rng.gen_range(0..=n);
    for i in 0..n {
        if i == open_at {
            svc.record_event(&student(who), EventInput {
                session_id: session.into(),
                subject_id: "quiz".into(),
                kind: EventKind::QuizOpen,
                at_ms: 0,
                wall_time_ms: Some(wall),
                value: None,
            })
            .unwrap();
        }
        wall += *[0, 300, 1500, 2000, 2001, 5000].choose(rng).unwrap();
        svc.record_event(&student(who), EventInput {
            session_id: session.into(),
            subject_id: (*subjects.choose(rng).unwrap()).into(),
            kind: *kinds.choose(rng).unwrap(),
            at_ms: rng.gen_range(0..60_000),
            wall_time_ms: Some(wall),
            value: None,
        })
        .unwrap();
    }
}

/// Forty students with random sessions; the exported revisit column must
/// equal [`recount`] over each raw stream.
pub fn check_revisit_export(store: Arc<dyn Storage>) {
    {
        let svc = service(store, Arc::new(FakeExecutor::default()));
        let job = completed_job(&svc);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut expected = HashMap::new();
        for p in 0..40 {
            let who = format!("p{p}");
            let cond = if p % 2 == 0 { Condition::Reels } else { Condition::LongForm };
            let a = svc.create_assignment(&instructor(), job.job_id, &who, None, cond).unwrap();
            random_session(&svc, &who, &a.session_id.to_string(), &mut rng);
            let sub = QuizSubmission {
                answers: vec![QuizAnswer { item_id: "q1".into(), choice: "b".into() }],
                questionnaire: vec![],
            };
            svc.submit_quiz(&student(&who), a.assignment_id, &sub).unwrap();
            // events after the submission do not change the stored count
            let late = EventInput {
                session_id: a.session_id.to_string(),
                subject_id: "r0".into(),
                kind: EventKind::Seek,
                at_ms: 0,
                wall_time_ms: None,
                value: None,
            };
            svc.record_event(&student(&who), late).unwrap();
            let events = svc.events(&a.session_id.to_string()).unwrap();
            expected.insert(who, recount(&events));
        }
        assert!(expected.values().any(|n| *n > 1), "suite should include real revisits");
        let csv = svc.export_csv(&researcher(), &ExportFilter::default()).unwrap();
        let mut rdr = csv::Reader::from_reader(csv.as_bytes());
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec.unwrap();
            let revisits: u32 = rec[5].parse().unwrap();
            assert_eq!(revisits, expected[&rec[0]], "{}", &rec[0]);
            rows += 1;
        }
        assert_eq!(rows, 40);
    }
}
