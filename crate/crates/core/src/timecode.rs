//! Millisecond timestamps and their textual forms.

use alloc::string::String;
use core::fmt::Write;

/// Formats `ms` as `HH:MM:SS.mmm`, the wire grammar used in LLM responses.
///
/// Hours widen past two digits for inputs of 100 hours or more.
pub fn format_hms_millis(ms: u64) -> String {
    let (h, m, s, milli) = split(ms);
    let mut out = String::with_capacity(12);
    let _ = write!(out, "{h:02}:{m:02}:{s:02}.{milli:03}");
    out
}

/// Formats `ms` as `mm:ss` (minutes are not wrapped into hours, seconds are
/// truncated).
pub fn format_min_sec(ms: u64) -> String {
    let total_s = ms / 1000;
    let mut out = String::with_capacity(5);
    let _ = write!(out, "{:02}:{:02}", total_s / 60, total_s % 60);
    out
}

/// Parses the strict `HH:MM:SS.mmm` grammar: exactly two hour digits, two
/// minute digits below 60, two second digits below 60 and three millisecond
/// digits.
pub fn parse_hms_millis(s: &str) -> Option<u64> {
    let b = s.as_bytes();
    if b.len() != 12 || b[2] != b':' || b[5] != b':' || b[8] != b'.' {
        return None;
    }
    let h = digits(&b[0..2])?;
    let m = digits(&b[3..5])?;
    let sec = digits(&b[6..8])?;
    let milli = digits(&b[9..12])?;
    if m >= 60 || sec >= 60 {
        return None;
    }
    Some(((h * 60 + m) * 60 + sec) * 1000 + milli)
}

/// Parses the inverse of [`format_min_sec`].
pub fn parse_min_sec(s: &str) -> Option<u64> {
    let (m, sec) = s.split_once(':')?;
    if m.is_empty() || sec.len() != 2 {
        return None;
    }
    let m = digits(m.as_bytes())?;
    let sec = digits(sec.as_bytes())?;
    if sec >= 60 {
        return None;
    }
    Some((m * 60 + sec) * 1000)
}

/// Parses a caption timestamp: `[HH:]MM:SS(.|,)mmm`. Hours may have any
/// number of digits. Both separators are accepted because real-world SRT files
/// frequently use the WebVTT dot.
pub(crate) fn parse_caption_timestamp(s: &str) -> Option<u64> {
    let i = s.rfind(['.', ','])?;
    let (clock, frac) = (&s[..i], &s[i + 1..]);
    if frac.len() != 3 {
        return None;
    }
    let milli = digits(frac.as_bytes())?;
    let mut parts = clock.rsplit(':');
    let sec = parts.next().filter(|p| p.len() == 2).and_then(|p| digits(p.as_bytes()))?;
    let min = parts.next().filter(|p| p.len() == 2).and_then(|p| digits(p.as_bytes()))?;
    let hours = match parts.next() {
        Some(p) if !p.is_empty() => digits(p.as_bytes())?,
        Some(_) => return None,
        None => 0,
    };
    if parts.next().is_some() || min >= 60 || sec >= 60 {
        return None;
    }
    Some(((hours * 60 + min) * 60 + sec) * 1000 + milli)
}

fn split(ms: u64) -> (u64, u64, u64, u64) {
    let milli = ms % 1000;
    let total_s = ms / 1000;
    (total_s / 3600, (total_s / 60) % 60, total_s % 60, milli)
}

fn digits(b: &[u8]) -> Option<u64> {
    if b.is_empty() || b.len() > 12 || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(b.iter().fold(0u64, |acc, d| acc * 10 + u64::from(d - b'0')))
}
