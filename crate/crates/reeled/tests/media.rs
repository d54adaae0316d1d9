//! Runs against the real ffmpeg; every test prints SKIPPED and returns when
//! no ffmpeg can be found.

use std::fs;
use std::path::{Path, PathBuf};

use reeled::captions::load_captions;
use reeled::media::{
    assemble, probe, reel_file_name, trim_segment, AssembleOptions, Layout, MediaError, MediaTools, TrimMode,
    TrimOptions, MANIFEST_FILE,
};
use reeled_core::llm::{mock_select, ReelSpec};
use reeled_core::manifest::ReelManifest;
use reeled_core::planner::{plan, CutPlan, ReelSegment};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn tools(test: &str) -> Option<MediaTools> {
    match MediaTools::locate() {
        Ok(t) => Some(t),
        Err(e) => {
            println!("SKIPPED {test}: {e}");
            None
        }
    }
}

fn seg(order: u32, start_ms: u64, end_ms: u64) -> ReelSegment {
    ReelSegment {
        order,
        cut_start_ms: start_ms,
        cut_end_ms: end_ms,
        label: format!("part {order}"),
        summary: String::new(),
        source_moment_rank: order,
    }
}

fn mock_plan(k: u32) -> CutPlan {
    let t = load_captions(&fixture("lecture_12min.vtt")).unwrap();
    let spec = ReelSpec::new(k, 30, 60).unwrap();
    plan(&t, &mock_select(&t, &spec).unwrap(), &spec).unwrap()
}

#[test]
fn reencoded_minute_matches_planned_duration() {
    let Some(tools) = tools("reencoded_minute_matches_planned_duration") else { return };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clip.mp4");
    let a = trim_segment(&tools, &fixture("lecture_12min.mp4"), &seg(0, 30_000, 90_000), &TrimOptions::default(), &out).unwrap();
    // measured independently of the artifact's own report
    let info = probe(&tools, &out).unwrap();
    assert!(info.duration_ms.abs_diff(60_000) <= 200, "{}", info.duration_ms);
    assert!(info.has_video && info.has_audio);
    assert_eq!(a.measured_duration_ms, info.duration_ms);
    assert_eq!(a.checksum.len(), 64);
}

#[test]
fn copy_mode_stays_within_a_keyframe() {
    let Some(tools) = tools("copy_mode_stays_within_a_keyframe") else { return };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clip.mp4");
    // the fixture has a keyframe every 2 s; 31 s is between two of them
    let opts = TrimOptions { mode: TrimMode::Copy, keyframe_interval_ms: 2000 };
    let a = trim_segment(&tools, &fixture("lecture_12min.mp4"), &seg(0, 31_000, 76_000), &opts, &out).unwrap();
    assert!(a.measured_duration_ms.abs_diff(45_000) <= 2000, "{}", a.measured_duration_ms);
}

#[test]
fn probe_cases() {
    let Some(tools) = tools("probe_cases") else { return };
    let src = probe(&tools, &fixture("lecture_12min.mp4")).unwrap();
    assert!(src.has_video);
    assert_eq!(src.duration_ms, 720_000);

    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("notes.txt");
    fs::write(&text, "not a video\n").unwrap();
    assert!(matches!(probe(&tools, &text), Err(MediaError::NotMedia(_))));
    assert!(matches!(probe(&tools, &dir.path().join("absent.mp4")), Err(MediaError::ToolFailure { .. })));
}

#[test]
fn bad_inputs() {
    let Some(tools) = tools("bad_inputs") else { return };
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.mp4");
    let err = trim_segment(&tools, &missing, &seg(0, 0, 30_000), &TrimOptions::default(), &dir.path().join("o.mp4")).unwrap_err();
    assert!(matches!(err, MediaError::ToolFailure { .. }));
    assert!(err.to_string().contains("nowhere.mp4"), "{err}");

    let err = trim_segment(&tools, &fixture("lecture_12min.mp4"), &seg(2, 5000, 5000), &TrimOptions::default(), &dir.path().join("o.mp4")).unwrap_err();
    assert!(matches!(err, MediaError::EmptySegment { order: 2, .. }));
}

#[test]
fn per_reel_layout_is_deterministic() {
    let Some(tools) = tools("per_reel_layout_is_deterministic") else { return };
    let p = mock_plan(5);
    let dir = tempfile::tempdir().unwrap();
    let opts = AssembleOptions::default();
    let first = assemble(&tools, &fixture("lecture_12min.mp4"), &p, dir.path(), &opts).unwrap();
    assert_eq!(first.artifacts.len(), 5);
    for (i, a) in first.artifacts.iter().enumerate() {
        assert_eq!(a.segment_order, i as u32);
        assert_eq!(a.file_path, dir.path().join(reel_file_name(i as u32)));
        assert!(fs::metadata(&a.file_path).unwrap().len() > 0);
        let planned = p.segments[i].duration_ms();
        assert!(a.measured_duration_ms.abs_diff(planned) <= 200);
    }
    assert!(first.combined.is_none());
    let on_disk: ReelManifest = serde_json::from_slice(&fs::read(&first.manifest_path).unwrap()).unwrap();
    assert_eq!(on_disk, first.manifest);
    assert_eq!(on_disk.artifacts.iter().map(|a| a.order).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);

    let again = assemble(&tools, &fixture("lecture_12min.mp4"), &p, dir.path(), &opts).unwrap();
    let sums = |m: &ReelManifest| m.artifacts.iter().map(|a| a.checksum.clone()).collect::<Vec<_>>();
    assert_eq!(sums(&first.manifest), sums(&again.manifest));
}

#[test]
fn single_concat_adds_combined_file() {
    let Some(tools) = tools("single_concat_adds_combined_file") else { return };
    let p = mock_plan(5);
    let dir = tempfile::tempdir().unwrap();
    let opts = AssembleOptions { layout: Layout::SingleConcat, ..AssembleOptions::default() };
    let out = assemble(&tools, &fixture("lecture_12min.mp4"), &p, dir.path(), &opts).unwrap();
    let mp4s = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "mp4"))
        .count();
    assert_eq!(mp4s, 6);
    let combined = out.combined.unwrap();
    let probed: u64 = out.artifacts.iter().map(|a| a.measured_duration_ms).sum();
    let planned: u64 = p.segments.iter().map(|s| s.duration_ms()).sum();
    let measured = probe(&tools, &dir.path().join("reel_all.mp4")).unwrap().duration_ms;
    assert_eq!(measured, combined.duration_ms);
    assert!(measured.abs_diff(planned) <= 5 * 200, "{measured} vs {planned}");
    assert!(measured.abs_diff(probed) <= 5 * 200);
}

#[test]
fn failing_segment_is_named_and_no_manifest_is_written() {
    let Some(tools) = tools("failing_segment_is_named_and_no_manifest_is_written") else { return };
    let mut p = mock_plan(5);
    // past the end of the 12-minute source: the clip comes out empty
    p.segments[3].cut_start_ms = 800_000;
    p.segments[3].cut_end_ms = 845_000;
    p.segments[4].cut_start_ms = 850_000;
    p.segments[4].cut_end_ms = 895_000;
    let dir = tempfile::tempdir().unwrap();
    let opts = AssembleOptions { workers: 1, ..AssembleOptions::default() };
    let err = assemble(&tools, &fixture("lecture_12min.mp4"), &p, dir.path(), &opts).unwrap_err();
    assert_eq!(err.segment_order(), Some(3), "{err}");
    assert!(err.to_string().starts_with("segment 3"), "{err}");
    for order in 0..3 {
        assert!(dir.path().join(reel_file_name(order)).is_file());
    }
    assert!(!dir.path().join(MANIFEST_FILE).exists());
}

#[test]
fn tool_dir_lookup() {
    let Some(found) = tools("tool_dir_lookup") else { return };
    let dir = found.ffmpeg.parent().unwrap().to_owned();
    let again = MediaTools::in_dirs(&[PathBuf::from("/nonexistent"), dir]).unwrap();
    assert_eq!(again.ffmpeg, found.ffmpeg);
}
