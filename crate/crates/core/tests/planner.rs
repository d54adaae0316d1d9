//! Cut planning checked against a brute-force validity oracle.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reeled_core::llm::{mock_select, KeyMoment, ReelSpec};
use reeled_core::planner::{plan, snap_to_cues, CutPlan, PlanError};
use reeled_core::transcript::{Transcript, TranscriptCue};

/// Every legal cut point, collected the slow way.
fn cut_points(t: &Transcript) -> Vec<u64> {
    let mut v = vec![0, t.duration_ms];
    for c in &t.cues {
        v.push(c.start_ms);
        v.push(c.end_ms);
    }
    v
}

fn oracle(p: &CutPlan, t: &Transcript, spec: &ReelSpec) -> Result<(), String> {
    let points = cut_points(t);
    if p.segments.len() != spec.reel_count as usize {
        return Err(format!("count {}", p.segments.len()));
    }
    for (i, s) in p.segments.iter().enumerate() {
        if s.order != i as u32 {
            return Err(format!("order {i}"));
        }
        let len = s.cut_end_ms.checked_sub(s.cut_start_ms).ok_or("reversed")?;
        if len < u64::from(spec.min_duration_s) * 1000 || len > u64::from(spec.max_duration_s) * 1000 {
            return Err(format!("segment {i} lasts {len} ms"));
        }
        if !points.contains(&s.cut_start_ms) || !points.contains(&s.cut_end_ms) {
            return Err(format!("segment {i} off boundary"));
        }
        if s.cut_end_ms > t.duration_ms {
            return Err(format!("segment {i} past the end"));
        }
    }
    for i in 0..p.segments.len() {
        for j in i + 1..p.segments.len() {
            let (a, b) = (&p.segments[i], &p.segments[j]);
            if a.cut_start_ms >= b.cut_start_ms {
                return Err(format!("unsorted {i} {j}"));
            }
            if a.cut_start_ms < b.cut_end_ms && b.cut_start_ms < a.cut_end_ms {
                return Err(format!("overlap {i} {j}"));
            }
        }
    }
    Ok(())
}

struct Instance {
    t: Transcript,
    moments: Vec<KeyMoment>,
    spec: ReelSpec,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(1..80);
    let mut at = 0u64;
    let mut cues = Vec::with_capacity(n);
    for i in 0..n {
        let gap = if rng.gen_bool(0.3) { rng.gen_range(0..8000) } else { 0 };
        let len = rng.gen_range(500..15_000);
        cues.push(TranscriptCue::new(i as u32, at + gap, at + gap + len, "word"));
        at += gap + len;
    }
    let tail = if rng.gen_bool(0.2) { rng.gen_range(0..30_000) } else { 0 };
    let t = Transcript::from_cues("random", cues, at + tail);
    let min = rng.gen_range(1..40);
    let max = min + rng.gen_range(0..60);
    let k = rng.gen_range(1..7);
    let spec = ReelSpec::new(k, min, max).unwrap();
    let moments = (0..k)
        .map(|rank| {
            let a = rng.gen_range(0..t.duration_ms);
            let b = rng.gen_range(0..t.duration_ms);
            KeyMoment {
                rank,
                start_ms: a.min(b),
                end_ms: a.max(b).max(a.min(b) + 1),
                label: format!("m{rank}"),
                summary: String::new(),
            }
        })
        .collect();
    Instance { t, moments, spec }
}

#[test]
fn randomized_plans_are_valid_or_typed_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let (mut ok, mut failed) = (0, 0);
    for _ in 0..2000 {
        let inst = random_instance(&mut rng);
        match plan(&inst.t, &inst.moments, &inst.spec) {
            Ok(p) => {
                oracle(&p, &inst.t, &inst.spec).unwrap();
                p.validate(&inst.t).unwrap();
                ok += 1;
            }
            Err(PlanError::InfeasibleSegment { rank: Some(_), .. } | PlanError::Overlap { .. }) => failed += 1,
            Err(PlanError::InfeasibleSegment { rank: None, .. }) => failed += 1,
            Err(other) => panic!("unexpected error kind {other:?}"),
        }
    }
    // the generator must exercise both outcomes
    assert!(ok > 200 && failed > 200, "ok {ok} failed {failed}");
}

#[test]
fn relaxing_bounds_keeps_plans_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..2000 {
        let inst = random_instance(&mut rng);
        if plan(&inst.t, &inst.moments, &inst.spec).is_err() {
            continue;
        }
        let min = rng.gen_range(1..=inst.spec.min_duration_s);
        let max = inst.spec.max_duration_s + rng.gen_range(0..30);
        let relaxed = ReelSpec::new(inst.spec.reel_count, min, max).unwrap();
        let p = plan(&inst.t, &inst.moments, &relaxed)
            .unwrap_or_else(|e| panic!("relaxed to {min}-{max} s failed: {e}"));
        oracle(&p, &inst.t, &relaxed).unwrap();
        checked += 1;
    }
    assert!(checked > 200);
}

#[test]
fn planning_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let inst = random_instance(&mut rng);
        assert_eq!(plan(&inst.t, &inst.moments, &inst.spec), plan(&inst.t, &inst.moments, &inst.spec));
    }
}

fn uniform() -> Transcript {
    let cues = (0..144u64).map(|i| TranscriptCue::new(i as u32, i * 5000, (i + 1) * 5000, "w")).collect();
    Transcript::from_cues("lecture", cues, 0)
}

#[test]
fn mock_moments_plan_cleanly_on_the_uniform_lecture() {
    let t = uniform();
    let spec = ReelSpec::new(5, 30, 60).unwrap();
    let moments = mock_select(&t, &spec).unwrap();
    let p = plan(&t, &moments, &spec).unwrap();
    oracle(&p, &t, &spec).unwrap();
    // moments already sit on cue boundaries within bounds, so nothing moves
    for (s, m) in p.segments.iter().zip(&moments) {
        assert_eq!((s.cut_start_ms, s.cut_end_ms), (m.start_ms, m.end_ms));
    }
}

proptest! {
    #[test]
    fn snapping_contains_the_moment(a in 0u64..720_000, b in 0u64..720_000) {
        let t = uniform();
        let (start, end) = (a.min(b), a.max(b) + 1);
        let m = KeyMoment { rank: 0, start_ms: start, end_ms: end.min(720_000), label: String::new(), summary: String::new() };
        let (s, e) = snap_to_cues(&m, &t);
        prop_assert!(s <= m.start_ms && e >= m.end_ms);
        prop_assert!(s % 5000 == 0 && e % 5000 == 0);
        // outward by less than one cue
        prop_assert!(m.start_ms - s < 5000 && e - m.end_ms < 5000);
    }
}
