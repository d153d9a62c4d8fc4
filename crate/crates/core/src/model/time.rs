use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MINUTES_PER_DAY: u16 = 24 * 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("malformed time `{0}`: expected HH:MM")]
    Malformed(alloc::string::String),
    #[error("hour out of range in `{0}`")]
    HourOutOfRange(alloc::string::String),
    #[error("minute out of range in `{0}`")]
    MinuteOutOfRange(alloc::string::String),
    #[error("shift `{0}` does not end after it starts")]
    EmptyShift(alloc::string::String),
}

/// Wall-clock time within a day, stored as minutes since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub const fn from_minutes(minutes: u16) -> Option<Self> {
        if minutes < MINUTES_PER_DAY {
            Some(Self(minutes))
        } else {
            None
        }
    }

    pub const fn from_hm(hour: u16, minute: u16) -> Option<Self> {
        if hour < 24 && minute < 60 {
            Some(Self(hour * 60 + minute))
        } else {
            None
        }
    }

    pub const fn minutes(self) -> u16 {
        self.0
    }

    pub const fn hour(self) -> u16 {
        self.0 / 60
    }

    pub const fn minute(self) -> u16 {
        self.0 % 60
    }

    /// Shifts by a signed number of minutes, or `None` when leaving the day.
    pub fn offset(self, delta: i32) -> Option<Self> {
        let m = i32::from(self.0) + delta;
        u16::try_from(m).ok().and_then(Self::from_minutes)
    }
}

impl TryFrom<u16> for TimeOfDay {
    type Error = &'static str;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        Self::from_minutes(value).ok_or("minutes since midnight must be below 1440")
    }
}

impl From<TimeOfDay> for u16 {
    fn from(t: TimeOfDay) -> u16 {
        t.0
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.hour(), self.minute())
    }
}

impl FromStr for TimeOfDay {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_time(s)
    }
}

fn parse_component(part: &str, whole: &str) -> Result<u16, TimeError> {
    if part.is_empty() || part.len() > 2 || !part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TimeError::Malformed(whole.into()));
    }
    part.parse().map_err(|_| TimeError::Malformed(whole.into()))
}

/// Parses `HH:MM` (a single-digit hour is accepted) into a [`TimeOfDay`].
pub fn parse_time(text: &str) -> Result<TimeOfDay, TimeError> {
    let trimmed = text.trim();
    let (h, m) = trimmed
        .split_once(':')
        .ok_or_else(|| TimeError::Malformed(trimmed.into()))?;
    let hour = parse_component(h, trimmed)?;
    if m.len() != 2 {
        return Err(TimeError::Malformed(trimmed.into()));
    }
    let minute = parse_component(m, trimmed)?;
    if hour > 23 {
        return Err(TimeError::HourOutOfRange(trimmed.into()));
    }
    if minute > 59 {
        return Err(TimeError::MinuteOutOfRange(trimmed.into()));
    }
    Ok(TimeOfDay(hour * 60 + minute))
}

/// An opening window of one site on one day and shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftSpec {
    start: TimeOfDay,
    end: TimeOfDay,
}

impl ShiftSpec {
    pub fn new(start: TimeOfDay, end: TimeOfDay) -> Result<Self, TimeError> {
        if end <= start {
            return Err(TimeError::EmptyShift(alloc::format!("{start}-{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> TimeOfDay {
        self.start
    }

    pub fn end(&self) -> TimeOfDay {
        self.end
    }

    /// Length in minutes; always positive.
    pub fn duration_minutes(&self) -> u32 {
        u32::from(self.end.0 - self.start.0)
    }

    pub fn duration_hours(&self) -> f64 {
        f64::from(self.duration_minutes()) / 60.0
    }

    /// Moves both ends by `delta` minutes, preserving the duration.
    pub fn shifted(&self, delta: i32) -> Option<Self> {
        Some(Self {
            start: self.start.offset(delta)?,
            end: self.end.offset(delta)?,
        })
    }
}

/// Duration of a shift in minutes.
pub fn shift_duration(spec: &ShiftSpec) -> u32 {
    spec.duration_minutes()
}

impl fmt::Display for ShiftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for ShiftSpec {
    type Err = TimeError;

    /// Accepts `HH:MM-HH:MM`; an en dash or a doubled hyphen also separates.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (a, b) = s
            .split_once("--")
            .or_else(|| s.split_once('\u{2013}'))
            .or_else(|| s.split_once('-'))
            .ok_or_else(|| TimeError::Malformed(s.into()))?;
        ShiftSpec::new(parse_time(a)?, parse_time(b)?)
    }
}
