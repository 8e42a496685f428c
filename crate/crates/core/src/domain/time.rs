use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Minutes since midnight.
///
/// Values above 1439 represent showtimes after midnight of the scheduled
/// day, up to 27:59.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeOfDay(u16);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeParseError {
    #[error("expected \"HH:MM\", got {0:?}")]
    Format(String),
    #[error("time {0:?} is past 27:59")]
    OutOfRange(String),
}

impl TimeOfDay {
    pub const MAX_MINUTES: u16 = 27 * 60 + 59;

    pub fn from_minutes(minutes: u32) -> Option<TimeOfDay> {
        (minutes <= u32::from(Self::MAX_MINUTES)).then_some(TimeOfDay(minutes as u16))
    }

    pub fn from_hm(hours: u32, minutes: u32) -> Option<TimeOfDay> {
        if minutes >= 60 {
            return None;
        }
        Self::from_minutes(hours.checked_mul(60)?.checked_add(minutes)?)
    }

    pub fn minutes(self) -> u32 {
        u32::from(self.0)
    }

    /// `self + minutes`, or `None` past the representable range.
    pub fn checked_add(self, minutes: u32) -> Option<TimeOfDay> {
        Self::from_minutes(self.minutes().checked_add(minutes)?)
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for TimeOfDay {
    type Err = TimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let format_err = || TimeParseError::Format(s.to_string());
        let (h, m) = s.split_once(':').ok_or_else(format_err)?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(format_err());
        }
        if !h.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(format_err());
        }
        let hours: u32 = h.parse().map_err(|_| format_err())?;
        let minutes: u32 = m.parse().map_err(|_| format_err())?;
        if minutes >= 60 {
            return Err(format_err());
        }
        TimeOfDay::from_hm(hours, minutes).ok_or_else(|| TimeParseError::OutOfRange(s.to_string()))
    }
}

impl Serialize for TimeOfDay {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeOfDay {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
