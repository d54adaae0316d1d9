//! The whole pipeline run once, in the foreground.

use std::fs;
use std::path::{Path, PathBuf};

use reeled_core::llm::{enrich_moments, identify_key_moments, KeyMoment, KeyMomentError, LlmOptions, LlmProvider, ReelSpec};
use reeled_core::manifest::{PlanManifest, ReelManifest};
use reeled_core::planner::{plan, CutPlan, PlanError};
use reeled_core::transcript::Transcript;
use thiserror::Error;

use crate::captions::{load_captions, CaptionLoadError};
use crate::media::{self, assemble, AssembleOptions, MediaError, MediaTools};
use crate::source::{self, SourceError};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Captions(#[from] CaptionLoadError),
    #[error(transparent)]
    KeyMoments(#[from] KeyMomentError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error("a source video is required unless only the plan is requested")]
    NoSource,
}

#[derive(Debug, Clone)]
pub struct GenerateRequest {
    /// Local path, `file://` URI or http(s) URL.
    pub source: Option<String>,
    pub captions: PathBuf,
    pub spec: ReelSpec,
    pub llm: LlmOptions,
    pub out_dir: PathBuf,
    /// Stop after planning and write a manifest with no artifacts.
    pub plan_only: bool,
    pub assemble: AssembleOptions,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub plan: CutPlan,
    pub manifest: ReelManifest,
    pub manifest_path: PathBuf,
    pub retries: u32,
}

/// Stage i and ii: moments identified, then labelled and summarised.
pub fn find_moments<P>(provider: &P, t: &Transcript, spec: &ReelSpec, llm: &LlmOptions) -> Result<(Vec<KeyMoment>, u32), KeyMomentError>
where
    P: LlmProvider + ?Sized,
{
    let found = identify_key_moments(provider, t, spec, llm)?;
    let enriched = enrich_moments(provider, t, &found.moments, llm)?;
    Ok((enriched, found.retries))
}

pub fn generate<P>(req: &GenerateRequest, provider: &P) -> Result<Generated, GenerateError>
where
    P: LlmProvider + ?Sized,
{
    req.spec.validate().map_err(KeyMomentError::from)?;
    let render = match (&req.source, req.plan_only) {
        (_, true) => None,
        (None, false) => return Err(GenerateError::NoSource),
        (Some(uri), false) => Some(uri),
    };
    fs::create_dir_all(&req.out_dir).map_err(|e| MediaError::io(&req.out_dir, e))?;

    let mut t = load_captions(&req.captions)?;
    let media = match render {
        Some(uri) => {
            let tools = MediaTools::locate()?;
            let path = source::acquire(uri, &req.out_dir)?;
            t = t.extend_duration(media::probe(&tools, &path)?.duration_ms);
            Some((tools, path))
        }
        None => {
            if let Some(uri) = &req.source {
                source::check_resolvable(uri)?;
            }
            None
        }
    };

    let (moments, retries) = find_moments(provider, &t, &req.spec, &req.llm)?;
    let cut = plan(&t, &moments, &req.spec)?;

    let (manifest, manifest_path) = match media {
        Some((tools, path)) => {
            let done = assemble(&tools, &path, &cut, &req.out_dir, &req.assemble)?;
            (done.manifest, done.manifest_path)
        }
        None => {
            let manifest = ReelManifest {
                plan: PlanManifest::from(&cut),
                generated_at: req.assemble.generated_at.clone(),
                artifacts: Vec::new(),
                combined: None,
            };
            let path = media::write_manifest(&req.out_dir, &manifest)?;
            (manifest, path)
        }
    };
    Ok(Generated { plan: cut, manifest, manifest_path, retries })
}

/// Convenience for callers that only hold a directory.
pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join(media::MANIFEST_FILE)
}
