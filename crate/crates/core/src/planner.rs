//! Turns validated key moments into an executable cut plan.
//!
//! The greedy path follows four rules: cut points snap outward to cue
//! boundaries, short windows grow forward (then backward), long windows shrink
//! from the end, and an overlapping later segment is pushed to the end of its
//! predecessor. When those rules cannot produce a valid plan, an exhaustive
//! search over cue-aligned windows that still overlap each moment decides
//! whether any valid plan exists, so relaxing the duration bounds never turns
//! a feasible input into an infeasible one.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{KeyMoment, ReelSpec, SpecError};
use crate::transcript::Transcript;

/// One reel to cut from the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReelSegment {
    pub order: u32,
    pub cut_start_ms: u64,
    pub cut_end_ms: u64,
    pub label: String,
    pub summary: String,
    pub source_moment_rank: u32,
}

impl ReelSegment {
    pub fn duration_ms(&self) -> u64 {
        self.cut_end_ms.saturating_sub(self.cut_start_ms)
    }

    fn overlaps(&self, other: &ReelSegment) -> bool {
        self.cut_start_ms < other.cut_end_ms && other.cut_start_ms < self.cut_end_ms
    }
}

/// Sorted, pairwise disjoint, duration-bounded segments; one per requested
/// reel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub source_id: String,
    pub spec: ReelSpec,
    pub segments: Vec<ReelSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("invalid reel spec: {0}")]
    InvalidSpec(#[from] SpecError),
    #[error("expected {expected} key moments, got {found}")]
    MomentCount { expected: u32, found: usize },
    #[error("no cue-aligned window within the duration bounds exists around {}", describe(.rank, .start_ms, .end_ms))]
    InfeasibleSegment {
        rank: Option<u32>,
        start_ms: u64,
        end_ms: u64,
    },
    #[error("segments {first} and {second} cannot both stay disjoint and long enough{}", ranks(.first_rank, .second_rank))]
    Overlap {
        first: u32,
        second: u32,
        first_rank: Option<u32>,
        second_rank: Option<u32>,
    },
    #[error("edited segment {order} would overlap segment {sibling}")]
    SiblingOverlap { order: u32, sibling: u32 },
    #[error("plan has no segment {0}")]
    NoSuchSegment(u32),
}

fn describe(rank: &Option<u32>, start_ms: &u64, end_ms: &u64) -> String {
    match rank {
        Some(r) => alloc::format!("moment {r} [{start_ms}, {end_ms}] ms"),
        None => alloc::format!("[{start_ms}, {end_ms}] ms"),
    }
}

fn ranks(a: &Option<u32>, b: &Option<u32>) -> String {
    match (a, b) {
        (Some(a), Some(b)) => alloc::format!(" (moments {a} and {b})"),
        _ => String::new(),
    }
}

/// Sorted set of legal cut points: every cue start and end plus `0` and the
/// transcript duration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundaries(Vec<u64>);

impl Boundaries {
    pub fn of(t: &Transcript) -> Self {
        let mut points = Vec::with_capacity(t.cues.len() * 2 + 2);
        points.push(0);
        points.push(t.duration_ms);
        for c in &t.cues {
            points.push(c.start_ms);
            points.push(c.end_ms);
        }
        points.sort_unstable();
        points.dedup();
        Self(points)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn duration(&self) -> u64 {
        self.0[self.0.len() - 1]
    }

    /// Largest boundary `<= x`.
    pub fn floor(&self, x: u64) -> u64 {
        let i = self.0.partition_point(|&b| b <= x);
        self.0[i.saturating_sub(1)]
    }

    /// Smallest boundary `>= x`, clamped to the duration.
    pub fn ceil(&self, x: u64) -> u64 {
        let i = self.0.partition_point(|&b| b < x);
        self.0.get(i).copied().unwrap_or_else(|| self.duration())
    }

    fn next_after(&self, x: u64) -> Option<u64> {
        let i = self.0.partition_point(|&b| b <= x);
        self.0.get(i).copied()
    }

    fn prev_before(&self, x: u64) -> Option<u64> {
        let i = self.0.partition_point(|&b| b < x);
        i.checked_sub(1).map(|i| self.0[i])
    }

    fn from(&self, x: u64) -> &[u64] {
        &self.0[self.0.partition_point(|&b| b < x)..]
    }
}

/// Widens a moment outward to the nearest cue boundaries. The result always
/// contains the input window.
pub fn snap_to_cues(moment: &KeyMoment, t: &Transcript) -> (u64, u64) {
    snap(moment.start_ms, moment.end_ms, &Boundaries::of(t))
}

fn snap(start_ms: u64, end_ms: u64, b: &Boundaries) -> (u64, u64) {
    (b.floor(start_ms), b.ceil(end_ms))
}

/// Brings snapped bounds inside `[min, max]` seconds by moving whole cues.
///
/// A short window grows its end forward and, once the end reaches the
/// duration, its start backward. A long window gives up cues from its end
/// but never drops below the minimum.
pub fn enforce_duration(bounds: (u64, u64), spec: &ReelSpec, t: &Transcript) -> Result<(u64, u64), PlanError> {
    enforce(bounds, spec, &Boundaries::of(t)).ok_or(PlanError::InfeasibleSegment {
        rank: None,
        start_ms: bounds.0,
        end_ms: bounds.1,
    })
}

/// Window ranking key: coverage, negated distance from target, negated start.
type Score = (u64, i64, i64);

fn enforce((mut start, mut end): (u64, u64), spec: &ReelSpec, b: &Boundaries) -> Option<(u64, u64)> {
    let (min, max) = (spec.min_ms(), spec.max_ms());
    while end - start < min {
        match b.next_after(end) {
            Some(next) => end = next,
            None => break,
        }
    }
    while end - start < min {
        start = b.prev_before(start)?;
    }
    while end - start > max {
        match b.prev_before(end) {
            Some(prev) if prev > start && prev - start >= min => end = prev,
            _ => return None,
        }
    }
    Some((start, end))
}

/// Pushes each segment that overlaps its predecessor to start where the
/// predecessor ends.
///
/// `segments` must be sorted by start. Fails with the offending pair (list
/// positions) when a pushed segment would fall below the minimum duration.
pub fn resolve_overlaps(segments: Vec<ReelSegment>, spec: &ReelSpec, t: &Transcript) -> Result<Vec<ReelSegment>, PlanError> {
    resolve(segments, spec, &Boundaries::of(t))
}

fn resolve(mut segments: Vec<ReelSegment>, spec: &ReelSpec, b: &Boundaries) -> Result<Vec<ReelSegment>, PlanError> {
    for i in 1..segments.len() {
        let prev_end = segments[i - 1].cut_end_ms;
        let seg = &mut segments[i];
        if seg.cut_start_ms >= prev_end {
            continue;
        }
        seg.cut_start_ms = b.ceil(prev_end);
        if seg.cut_end_ms <= seg.cut_start_ms || seg.cut_end_ms - seg.cut_start_ms < spec.min_ms() {
            return Err(PlanError::Overlap {
                first: i as u32 - 1,
                second: i as u32,
                first_rank: None,
                second_rank: None,
            });
        }
    }
    Ok(segments)
}

struct Anchor<'a> {
    moment: &'a KeyMoment,
    snapped: (u64, u64),
}

/// Builds the cut plan: snap, enforce durations, sort, resolve overlaps.
///
/// Every successful plan has exactly `spec.reel_count` sorted, disjoint
/// segments whose cut points are cue boundaries and whose lengths lie in
/// `[min, max]`. Errors name the moment ranks involved.
pub fn plan(t: &Transcript, moments: &[KeyMoment], spec: &ReelSpec) -> Result<CutPlan, PlanError> {
    spec.validate()?;
    if moments.len() != spec.reel_count as usize {
        return Err(PlanError::MomentCount {
            expected: spec.reel_count,
            found: moments.len(),
        });
    }
    let b = Boundaries::of(t);
    let mut anchors: Vec<Anchor<'_>> = moments
        .iter()
        .map(|m| Anchor {
            moment: m,
            snapped: snap(m.start_ms.min(b.duration()), m.end_ms.min(b.duration()), &b),
        })
        .collect();
    anchors.sort_by_key(|a| (a.snapped.0, a.snapped.1, a.moment.rank));

    let greedy = greedy_plan(&anchors, spec, &b);
    let windows = match greedy {
        Ok(ref w) if is_anchored_chain(w, &anchors, spec, &b) => w.clone(),
        _ => match search_plan(&anchors, spec, &b) {
            Some(w) => w,
            None => return Err(greedy.err().unwrap_or(PlanError::InfeasibleSegment {
                rank: None,
                start_ms: 0,
                end_ms: b.duration(),
            })),
        },
    };

    let segments = anchors
        .iter()
        .zip(windows)
        .enumerate()
        .map(|(order, (a, (start, end)))| ReelSegment {
            order: order as u32,
            cut_start_ms: start,
            cut_end_ms: end,
            label: a.moment.label.clone(),
            summary: a.moment.summary.clone(),
            source_moment_rank: a.moment.rank,
        })
        .collect();
    Ok(CutPlan {
        source_id: t.source_id.clone(),
        spec: *spec,
        segments,
    })
}

/// Greedy windows, one per anchor in anchor order.
fn greedy_plan(anchors: &[Anchor<'_>], spec: &ReelSpec, b: &Boundaries) -> Result<Vec<(u64, u64)>, PlanError> {
    let mut segments = Vec::with_capacity(anchors.len());
    for (i, a) in anchors.iter().enumerate() {
        let (start, end) = enforce(a.snapped, spec, b).ok_or(PlanError::InfeasibleSegment {
            rank: Some(a.moment.rank),
            start_ms: a.moment.start_ms,
            end_ms: a.moment.end_ms,
        })?;
        segments.push(ReelSegment {
            order: i as u32,
            cut_start_ms: start,
            cut_end_ms: end,
            label: String::new(),
            summary: String::new(),
            source_moment_rank: a.moment.rank,
        });
    }
    // stable: equal starts keep anchor order
    segments.sort_by_key(|s| s.cut_start_ms);
    let resolved = resolve(segments, spec, b).map_err(|e| match e {
        PlanError::Overlap { first, second, .. } => PlanError::Overlap {
            first,
            second,
            first_rank: Some(anchors[first as usize].moment.rank),
            second_rank: Some(anchors[second as usize].moment.rank),
        },
        other => other,
    })?;
    // map back to anchor order; a greedy plan whose sort reordered anchors is
    // left to the search
    let mut windows = Vec::with_capacity(resolved.len());
    for (i, seg) in resolved.iter().enumerate() {
        if seg.order as usize != i {
            return Ok(Vec::new());
        }
        windows.push((seg.cut_start_ms, seg.cut_end_ms));
    }
    Ok(windows)
}

/// True when `windows` is a valid chain of admissible windows for `anchors`.
fn is_anchored_chain(windows: &[(u64, u64)], anchors: &[Anchor<'_>], spec: &ReelSpec, b: &Boundaries) -> bool {
    windows.len() == anchors.len()
        && windows.windows(2).all(|w| w[0].1 <= w[1].0)
        && windows
            .iter()
            .zip(anchors)
            .all(|(&(s, e), a)| admissible(s, e, a.snapped, spec, b))
}

/// A window is admissible for a moment when it is cue-aligned, within the
/// duration bounds, and shares time with the snapped moment.
fn admissible(s: u64, e: u64, snapped: (u64, u64), spec: &ReelSpec, b: &Boundaries) -> bool {
    s < e
        && b.contains(s)
        && b.contains(e)
        && (spec.min_ms()..=spec.max_ms()).contains(&(e - s))
        && s < snapped.1
        && e > snapped.0
}

/// Exhaustive chain search over admissible windows.
///
/// A forward pass finds the earliest feasible end for each prefix; a backward
/// pass then picks, for each anchor, the window that covers most of its
/// moment while leaving room for both neighbours.
fn search_plan(anchors: &[Anchor<'_>], spec: &ReelSpec, b: &Boundaries) -> Option<Vec<(u64, u64)>> {
    let (min, max) = (spec.min_ms(), spec.max_ms());
    let mut earliest_end = Vec::with_capacity(anchors.len());
    let mut floor = 0;
    for a in anchors {
        let (ss, se) = a.snapped;
        let mut best: Option<u64> = None;
        for &s in b.from(floor) {
            if s >= se {
                break;
            }
            let e = b.ceil((s + min).max(ss + 1));
            if e - s >= min && e - s <= max && e > ss && b.contains(e) {
                best = Some(best.map_or(e, |cur| cur.min(e)));
            }
        }
        floor = best?;
        earliest_end.push(floor);
    }

    let mut windows = alloc::vec![(0, 0); anchors.len()];
    let mut ceiling = b.duration();
    for i in (0..anchors.len()).rev() {
        let lower = if i == 0 { 0 } else { earliest_end[i - 1] };
        let (ss, se) = anchors[i].snapped;
        // (coverage, -distance from target, -start) maximised
        let mut best: Option<(Score, (u64, u64))> = None;
        for &s in b.from(lower) {
            if s >= se {
                break;
            }
            for &e in b.from((s + min).max(ss + 1)) {
                if e > ceiling || e - s > max {
                    break;
                }
                let coverage = e.min(se) - s.max(ss);
                let dist = (e - s).abs_diff(spec.target_ms()) as i64;
                let key = (coverage, -dist, -(s as i64));
                if best.is_none_or(|(k, _)| key > k) {
                    best = Some((key, (s, e)));
                }
            }
        }
        let (_, window) = best?;
        windows[i] = window;
        ceiling = window.0;
    }
    Some(windows)
}

impl CutPlan {
    /// Checks every plan invariant against the transcript it was cut from.
    pub fn validate(&self, t: &Transcript) -> Result<(), String> {
        if self.segments.len() != self.spec.reel_count as usize {
            return Err(alloc::format!("{} segments for {} reels", self.segments.len(), self.spec.reel_count));
        }
        let b = Boundaries::of(t);
        for (i, s) in self.segments.iter().enumerate() {
            if s.order as usize != i {
                return Err(alloc::format!("segment {i} has order {}", s.order));
            }
            if s.cut_start_ms >= s.cut_end_ms || s.cut_end_ms > t.duration_ms {
                return Err(alloc::format!("segment {i} has bad bounds"));
            }
            if !(self.spec.min_ms()..=self.spec.max_ms()).contains(&s.duration_ms()) {
                return Err(alloc::format!("segment {i} lasts {} ms", s.duration_ms()));
            }
            if !b.contains(s.cut_start_ms) || !b.contains(s.cut_end_ms) {
                return Err(alloc::format!("segment {i} is not cue-aligned"));
            }
        }
        if let Some(i) = self.segments.windows(2).position(|w| w[0].cut_end_ms > w[1].cut_start_ms) {
            return Err(alloc::format!("segments {i} and {} overlap", i + 1));
        }
        Ok(())
    }

    /// Re-snaps an instructor's edit of one segment and checks it against its
    /// siblings. The plan itself is left untouched.
    pub fn replan_segment(&self, order: u32, start_ms: u64, end_ms: u64, t: &Transcript) -> Result<ReelSegment, PlanError> {
        let current = self
            .segments
            .iter()
            .find(|s| s.order == order)
            .ok_or(PlanError::NoSuchSegment(order))?;
        let b = Boundaries::of(t);
        let start = start_ms.min(b.duration());
        let end = end_ms.min(b.duration());
        if start >= end {
            return Err(PlanError::InfeasibleSegment {
                rank: Some(current.source_moment_rank),
                start_ms,
                end_ms,
            });
        }
        let (s, e) = enforce(snap(start, end, &b), &self.spec, &b).ok_or(PlanError::InfeasibleSegment {
            rank: Some(current.source_moment_rank),
            start_ms,
            end_ms,
        })?;
        let edited = ReelSegment {
            cut_start_ms: s,
            cut_end_ms: e,
            ..current.clone()
        };
        if let Some(sibling) = self.segments.iter().find(|o| o.order != order && o.overlaps(&edited)) {
            return Err(PlanError::SiblingOverlap {
                order,
                sibling: sibling.order,
            });
        }
        Ok(edited)
    }
}
