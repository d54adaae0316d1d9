//! Caption ingestion: SubRip and WebVTT parsing, normalization, windowing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timecode::parse_caption_timestamp;

/// One timestamped caption unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptCue {
    pub index: u32,
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

impl TranscriptCue {
    pub fn new(index: u32, start_ms: u64, end_ms: u64, text: impl Into<String>) -> Self {
        Self {
            index,
            start_ms,
            end_ms,
            text: text.into(),
        }
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }

    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// A lecture transcript. After [`normalize`] the cues are sorted, pairwise
/// disjoint and re-indexed from zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub source_id: String,
    pub language: String,
    pub cues: Vec<TranscriptCue>,
    pub duration_ms: u64,
}

impl Transcript {
    /// Builds a transcript from cues, deriving `duration_ms` from the last cue
    /// end unless `min_duration_ms` (usually a probed media duration) is
    /// larger.
    pub fn from_cues(source_id: impl Into<String>, cues: Vec<TranscriptCue>, min_duration_ms: u64) -> Self {
        let last_end = cues.iter().map(|c| c.end_ms).max().unwrap_or(0);
        Self {
            source_id: source_id.into(),
            language: UNDETERMINED.to_string(),
            cues,
            duration_ms: last_end.max(min_duration_ms),
        }
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    /// Raises `duration_ms` to a probed media duration when the media runs
    /// past the last caption.
    pub fn extend_duration(mut self, media_duration_ms: u64) -> Self {
        self.duration_ms = self.duration_ms.max(media_duration_ms);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    /// Checks every invariant of a normalized transcript.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        if self.cues.is_empty() {
            return Err(InvariantViolation::NoCues);
        }
        for (i, c) in self.cues.iter().enumerate() {
            if c.start_ms >= c.end_ms {
                return Err(InvariantViolation::EmptyInterval(i));
            }
            if c.text.trim().is_empty() {
                return Err(InvariantViolation::BlankText(i));
            }
            if c.index as usize != i {
                return Err(InvariantViolation::Index(i));
            }
        }
        for (i, w) in self.cues.windows(2).enumerate() {
            if w[0].start_ms >= w[1].start_ms {
                return Err(InvariantViolation::Unsorted(i));
            }
            if w[0].end_ms > w[1].start_ms {
                return Err(InvariantViolation::Overlap(i));
            }
        }
        let last_end = self.cues[self.cues.len() - 1].end_ms;
        if self.duration_ms < last_end {
            return Err(InvariantViolation::Duration);
        }
        Ok(())
    }
}

/// Language tag used when the caption file declares none.
pub const UNDETERMINED: &str = "und";

/// A broken transcript invariant; the payload is the offending cue position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantViolation {
    NoCues,
    EmptyInterval(usize),
    BlankText(usize),
    Index(usize),
    Unsorted(usize),
    Overlap(usize),
    Duration,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoCues => f.write_str("transcript has no cues"),
            Self::EmptyInterval(i) => write!(f, "cue {i} does not start before it ends"),
            Self::BlankText(i) => write!(f, "cue {i} has blank text"),
            Self::Index(i) => write!(f, "cue {i} carries the wrong index"),
            Self::Unsorted(i) => write!(f, "cues {i} and {} are not strictly ascending", i + 1),
            Self::Overlap(i) => write!(f, "cues {i} and {} overlap", i + 1),
            Self::Duration => f.write_str("duration ends before the last cue"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("caption data is not valid UTF-8 (at byte {offset})")]
    Decode { offset: usize },
    #[error("caption format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("transcript contains no cues")]
    EmptyTranscript,
    #[error("window [{start_ms}, {end_ms}) is not inside [0, {duration_ms}]")]
    Range { start_ms: u64, end_ms: u64, duration_ms: u64 },
}

/// Caption container selection for [`parse_captions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptionFormat {
    #[default]
    Auto,
    Srt,
    Vtt,
}

/// Parses SubRip or WebVTT bytes into a transcript.
///
/// Cues keep their source order; call [`normalize`] before planning. Markup
/// (WebVTT tags, HTML tags, SSA override blocks, character references) is
/// stripped and line breaks inside a cue collapse to single spaces. Cues whose
/// text is blank after stripping, and zero-length cues, are skipped.
pub fn parse_captions(raw: &[u8], hint: CaptionFormat) -> Result<Transcript, TranscriptError> {
    let text = core::str::from_utf8(raw).map_err(|e| TranscriptError::Decode {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines = split_lines(text);

    let format = match hint {
        CaptionFormat::Auto => detect(&lines)?,
        other => other,
    };
    let parsed = match format {
        CaptionFormat::Vtt => parse_vtt(&lines)?,
        _ => parse_srt(&lines)?,
    };
    if parsed.cues.is_empty() {
        return Err(TranscriptError::EmptyTranscript);
    }
    let mut t = Transcript::from_cues("", parsed.cues, 0);
    if let Some(lang) = parsed.language {
        t.language = lang;
    }
    Ok(t)
}

/// Sorts cues, truncates each overlapping cue to the start of its successor,
/// drops cues that truncation reduced to zero length and re-indexes.
pub fn normalize(t: &Transcript) -> Result<Transcript, TranscriptError> {
    let mut sorted = t.cues.clone();
    sorted.sort_by_key(|c| c.start_ms);

    let mut out: Vec<TranscriptCue> = Vec::with_capacity(sorted.len());
    for cue in sorted {
        if cue.start_ms >= cue.end_ms || cue.text.trim().is_empty() {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if last.end_ms > cue.start_ms {
                last.end_ms = cue.start_ms;
                if last.end_ms <= last.start_ms {
                    out.pop();
                }
            }
        }
        out.push(cue);
    }
    if out.is_empty() {
        return Err(TranscriptError::EmptyTranscript);
    }
    for (i, c) in out.iter_mut().enumerate() {
        c.index = i as u32;
    }
    let last_end = out[out.len() - 1].end_ms;
    Ok(Transcript {
        source_id: t.source_id.clone(),
        language: t.language.clone(),
        cues: out,
        duration_ms: t.duration_ms.max(last_end),
    })
}

/// Returns the cues intersecting `[start_ms, end_ms)`, untrimmed.
pub fn slice(t: &Transcript, start_ms: u64, end_ms: u64) -> Result<&[TranscriptCue], TranscriptError> {
    if start_ms >= end_ms || end_ms > t.duration_ms {
        return Err(TranscriptError::Range {
            start_ms,
            end_ms,
            duration_ms: t.duration_ms,
        });
    }
    // cues are sorted and disjoint, so ends are ascending as well
    let first = t.cues.partition_point(|c| c.end_ms <= start_ms);
    let last = t.cues.partition_point(|c| c.start_ms < end_ms);
    Ok(if first < last { &t.cues[first..last] } else { &[] })
}

struct Parsed {
    cues: Vec<TranscriptCue>,
    language: Option<String>,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    let mut rest = text;
    let mut number = 1;
    while !rest.is_empty() {
        let (line, next) = match rest.find(['\r', '\n']) {
            Some(i) => {
                let skip = if rest[i..].starts_with("\r\n") { 2 } else { 1 };
                (&rest[..i], &rest[i + skip..])
            }
            None => (rest, ""),
        };
        lines.push(Line { number, text: line });
        number += 1;
        rest = next;
    }
    lines
}

fn is_vtt_header(line: &str) -> bool {
    match line.strip_prefix("WEBVTT") {
        Some(rest) => rest.is_empty() || rest.starts_with([' ', '\t']),
        None => false,
    }
}

fn is_counter(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
}

fn detect(lines: &[Line<'_>]) -> Result<CaptionFormat, TranscriptError> {
    let mut non_blank = lines.iter().enumerate().filter(|(_, l)| !l.is_blank());
    let Some((i, first)) = non_blank.next() else {
        return Err(TranscriptError::EmptyTranscript);
    };
    if i == 0 && is_vtt_header(first.text) {
        return Ok(CaptionFormat::Vtt);
    }
    let next_is_timing = lines.get(i + 1).is_some_and(|l| l.text.contains("-->"));
    if (is_counter(first.text) && next_is_timing) || first.text.contains("-->") {
        return Ok(CaptionFormat::Srt);
    }
    Err(TranscriptError::Format {
        line: first.number,
        message: "expected a WEBVTT header or an SRT cue counter".to_string(),
    })
}

fn format_err(line: &Line<'_>, message: impl Into<String>) -> TranscriptError {
    TranscriptError::Format {
        line: line.number,
        message: message.into(),
    }
}

fn parse_timing(line: &Line<'_>) -> Result<(u64, u64), TranscriptError> {
    let Some((left, right)) = line.text.split_once("-->") else {
        return Err(format_err(line, "expected a timing line `start --> end`"));
    };
    let start = left.trim();
    let end = right.split_whitespace().next().unwrap_or("");
    let start_ms = parse_caption_timestamp(start)
        .ok_or_else(|| format_err(line, alloc::format!("invalid start timestamp `{start}`")))?;
    let end_ms = parse_caption_timestamp(end)
        .ok_or_else(|| format_err(line, alloc::format!("invalid end timestamp `{end}`")))?;
    if end_ms < start_ms {
        return Err(format_err(line, "cue ends before it starts"));
    }
    Ok((start_ms, end_ms))
}

fn push_cue(cues: &mut Vec<TranscriptCue>, start_ms: u64, end_ms: u64, payload: &[&str]) {
    let text = strip_markup(&payload.join("\n"));
    if start_ms < end_ms && !text.is_empty() {
        let index = cues.len() as u32;
        cues.push(TranscriptCue::new(index, start_ms, end_ms, text));
    }
}

fn parse_srt(lines: &[Line<'_>]) -> Result<Parsed, TranscriptError> {
    let mut cues = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].is_blank() {
            i += 1;
            continue;
        }
        // the counter is optional in practice; accept a bare timing line
        if !lines[i].text.contains("-->") {
            if !is_counter(lines[i].text) {
                return Err(format_err(&lines[i], "expected an SRT cue counter"));
            }
            i += 1;
            if i >= lines.len() {
                return Err(TranscriptError::Format {
                    line: lines[i - 1].number + 1,
                    message: "cue counter without a timing line".to_string(),
                });
            }
        }
        let (start_ms, end_ms) = parse_timing(&lines[i])?;
        i += 1;
        let mut payload = Vec::new();
        while i < lines.len() && !lines[i].is_blank() {
            let next_is_timing = lines.get(i + 1).is_some_and(|l| l.text.contains("-->"));
            if is_counter(lines[i].text) && next_is_timing {
                break;
            }
            payload.push(lines[i].text);
            i += 1;
        }
        push_cue(&mut cues, start_ms, end_ms, &payload);
    }
    Ok(Parsed { cues, language: None })
}

fn parse_vtt(lines: &[Line<'_>]) -> Result<Parsed, TranscriptError> {
    let Some(first) = lines.first() else {
        return Err(TranscriptError::EmptyTranscript);
    };
    if !is_vtt_header(first.text) {
        return Err(format_err(first, "missing WEBVTT header"));
    }
    let mut language = None;
    let mut i = 1;
    while i < lines.len() && !lines[i].is_blank() {
        if let Some((key, value)) = lines[i].text.split_once(':') {
            if key.trim().eq_ignore_ascii_case("language") && !value.trim().is_empty() {
                language = Some(value.trim().to_string());
            }
        }
        i += 1;
    }

    let mut cues = Vec::new();
    while i < lines.len() {
        if lines[i].is_blank() {
            i += 1;
            continue;
        }
        let head = lines[i].text;
        let is_block = |kw: &str| {
            head.strip_prefix(kw)
                .is_some_and(|r| r.is_empty() || r.starts_with([' ', '\t']))
        };
        if is_block("NOTE") || is_block("STYLE") || is_block("REGION") {
            while i < lines.len() && !lines[i].is_blank() {
                i += 1;
            }
            continue;
        }
        if !head.contains("-->") {
            // cue identifier
            i += 1;
            if i >= lines.len() || lines[i].is_blank() {
                return Err(format_err(&lines[i - 1], "cue identifier without a timing line"));
            }
        }
        let (start_ms, end_ms) = parse_timing(&lines[i])?;
        i += 1;
        let mut payload = Vec::new();
        while i < lines.len() && !lines[i].is_blank() {
            payload.push(lines[i].text);
            i += 1;
        }
        push_cue(&mut cues, start_ms, end_ms, &payload);
    }
    Ok(Parsed { cues, language })
}

/// Removes tags and SSA override blocks, decodes character references and
/// collapses whitespace.
pub fn strip_markup(raw: &str) -> String {
    let mut untagged = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(pos) = rest.find(['<', '{']) {
        untagged.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let close = if tail.starts_with('<') {
            tail.find('>')
        } else if tail.starts_with("{\\") {
            tail.find('}')
        } else {
            None
        };
        match close {
            Some(end) => rest = &tail[end + 1..],
            None => {
                untagged.push_str(&tail[..1]);
                rest = &tail[1..];
            }
        }
    }
    untagged.push_str(rest);

    let decoded = decode_entities(&untagged);
    let mut out = String::with_capacity(decoded.len());
    for word in decoded.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let decoded = tail
            .find(';')
            .filter(|&end| end <= 10)
            .and_then(|end| entity(&tail[1..end]).map(|c| (c, end)));
        match decoded {
            Some((c, end)) => {
                if let Some(c) = c {
                    out.push(c);
                }
                rest = &tail[end + 1..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// `Some(None)` marks a recognised entity that renders as nothing.
fn entity(name: &str) -> Option<Option<char>> {
    let c = match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => ' ',
        "lrm" | "rlm" => return Some(None),
        _ => {
            let num = name.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)?
        }
    };
    Some(Some(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cue(start: u64, end: u64, text: &str) -> TranscriptCue {
        TranscriptCue::new(0, start, end, text)
    }

    fn uniform(n: u64, len_ms: u64) -> Transcript {
        let cues = (0..n)
            .map(|i| TranscriptCue::new(i as u32, i * len_ms, (i + 1) * len_ms, "w"))
            .collect();
        Transcript::from_cues("u", cues, 0)
    }

    #[test]
    fn single_srt_block() {
        let t = parse_captions(b"1\n00:00:00,000 --> 00:00:05,000\nHello\n", CaptionFormat::Auto).unwrap();
        assert_eq!(t.cues, vec![cue(0, 5000, "Hello")]);
        assert_eq!(t.duration_ms, 5000);
        assert_eq!(t.language, "und");
    }

    #[test]
    fn header_only_vtt_is_empty() {
        assert_eq!(parse_captions(b"WEBVTT\n", CaptionFormat::Auto), Err(TranscriptError::EmptyTranscript));
        assert_eq!(parse_captions(b"WEBVTT", CaptionFormat::Vtt), Err(TranscriptError::EmptyTranscript));
    }

    #[test]
    fn invalid_utf8() {
        let err = parse_captions(b"1\n00:00:00,000 --> 00:00:01,000\n\xff\n", CaptionFormat::Auto).unwrap_err();
        assert_eq!(err, TranscriptError::Decode { offset: 32 });
    }

    #[test]
    fn unknown_format_reports_line() {
        let err = parse_captions(b"\n\nhello there\n", CaptionFormat::Auto).unwrap_err();
        assert!(matches!(err, TranscriptError::Format { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn bad_timing_reports_line() {
        let raw = b"WEBVTT\n\n00:00.000 --> 00:05.000\nok\n\n00:05.000 --> 00:xx.000\nbad\n";
        let err = parse_captions(raw, CaptionFormat::Auto).unwrap_err();
        assert!(matches!(err, TranscriptError::Format { line: 6, .. }), "{err:?}");
    }

    #[test]
    fn vtt_with_bom_crlf_ids_notes_and_settings() {
        let raw = "\u{feff}WEBVTT - lecture\r\nKind: captions\r\nLanguage: en-GB\r\n\r\nNOTE a comment\r\nspanning lines\r\n\r\nintro\r\n00:01.000 --> 00:02.500 align:start position:10%\r\n<v Ana>Hi &amp; <i>welcome</i></v>\r\n\r\n01:00:00.000 --> 01:00:01.000\r\nsecond\r\nline\r\n";
        let t = parse_captions(raw.as_bytes(), CaptionFormat::Auto).unwrap();
        assert_eq!(t.language, "en-GB");
        assert_eq!(t.cues, vec![cue(1000, 2500, "Hi & welcome"), TranscriptCue::new(1, 3_600_000, 3_601_000, "second line")]);
    }

    #[test]
    fn srt_without_blank_separator_and_styling() {
        let raw = "1\n00:00:01,000 --> 00:00:02,000\n{\\an8}<font color=\"red\">Top</font>\n2\n00:00:02,000 --> 00:00:03,000\n&lt;b&gt; literal\n";
        let t = parse_captions(raw.as_bytes(), CaptionFormat::Srt).unwrap();
        assert_eq!(t.cues.len(), 2);
        assert_eq!(t.cues[0].text, "Top");
        assert_eq!(t.cues[1].text, "<b> literal");
    }

    #[test]
    fn blank_and_zero_length_cues_are_skipped() {
        let raw = "WEBVTT\n\n00:01.000 --> 00:02.000\n<c></c>\n\n00:03.000 --> 00:03.000\nx\n\n00:04.000 --> 00:05.000\nkept\n";
        let t = parse_captions(raw.as_bytes(), CaptionFormat::Auto).unwrap();
        assert_eq!(t.cues, vec![cue(4000, 5000, "kept")]);
    }

    #[test]
    fn inverted_cue_is_a_format_error() {
        let err = parse_captions(b"1\n00:00:05,000 --> 00:00:01,000\nx\n", CaptionFormat::Auto).unwrap_err();
        assert!(matches!(err, TranscriptError::Format { line: 2, .. }));
    }

    #[test]
    fn markup_edge_cases() {
        assert_eq!(strip_markup("a < b and c > d"), "a d");
        assert_eq!(strip_markup("5 < 6"), "5 < 6");
        assert_eq!(strip_markup("x &unknown; &#65;&#x42; &lrm;y"), "x &unknown; AB y");
        assert_eq!(strip_markup("<00:00:01.000><c.colorE5E5E5>word</c>"), "word");
        assert_eq!(strip_markup("{not ssa} ok"), "{not ssa} ok");
    }

    #[test]
    fn normalize_truncates_earlier_cue() {
        let t = Transcript::from_cues("s", vec![cue(0, 6000, "a"), cue(5000, 10000, "b")], 0);
        let n = normalize(&t).unwrap();
        assert_eq!(n.cues, vec![cue(0, 5000, "a"), TranscriptCue::new(1, 5000, 10000, "b")]);
    }

    #[test]
    fn normalize_drops_zero_length_and_sorts() {
        let t = Transcript::from_cues("s", vec![cue(5000, 9000, "late"), cue(1000, 4000, "x"), cue(1000, 3000, "y")], 0);
        let n = normalize(&t).unwrap();
        // equal starts: the first in source order is truncated to nothing
        assert_eq!(n.cues.len(), 2);
        assert_eq!(n.cues[0].text, "y");
        assert_eq!(n.cues[1].text, "late");
        assert_eq!(n.duration_ms, 9000);
        n.check_invariants().unwrap();
    }

    #[test]
    fn normalize_is_identity_on_normalized_input() {
        let t = uniform(10, 5000);
        assert_eq!(normalize(&t).unwrap(), t);
    }

    #[test]
    fn normalize_of_nothing() {
        let t = Transcript::from_cues("s", vec![], 0);
        assert_eq!(normalize(&t), Err(TranscriptError::EmptyTranscript));
    }

    #[test]
    fn slice_windows() {
        let t = uniform(144, 5000);
        assert_eq!(slice(&t, 0, t.duration_ms).unwrap().len(), 144);
        let s = slice(&t, 12_000, 41_000).unwrap();
        assert_eq!(s.first().unwrap().index, 2);
        assert_eq!(s.last().unwrap().index, 8);
        assert_eq!(s.len(), 7);

        let gappy = Transcript::from_cues("g", vec![cue(0, 1000, "a"), TranscriptCue::new(1, 5000, 6000, "b")], 0);
        assert!(slice(&gappy, 2000, 4000).unwrap().is_empty());
    }

    #[test]
    fn slice_rejects_bad_windows() {
        let t = uniform(4, 1000);
        for (s, e) in [(10, 10), (20, 10), (0, 4001)] {
            assert!(matches!(slice(&t, s, e), Err(TranscriptError::Range { .. })));
        }
    }
}
