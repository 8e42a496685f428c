use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Attendance in exact milli-units (fixed denominator 1000).
///
/// Objective values are sums of these, so every comparison the solvers make
/// is an integer comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attendance(i64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttendanceParseError {
    #[error("invalid attendance value {0:?}")]
    Syntax(String),
    #[error("attendance {0:?} has more than three decimal places")]
    TooPrecise(String),
    #[error("attendance {0:?} is out of range")]
    Overflow(String),
}

impl Attendance {
    pub const SCALE: i64 = 1000;
    pub const ZERO: Attendance = Attendance(0);

    pub const fn from_milli(milli: i64) -> Self {
        Attendance(milli)
    }

    /// Whole attendance units.
    pub fn from_units(units: i64) -> Self {
        Attendance(units * Self::SCALE)
    }

    pub const fn milli(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn scale(self, factor: i64) -> Self {
        Attendance(self.0 * factor)
    }

    pub fn is_integral(self) -> bool {
        self.0 % Self::SCALE == 0
    }
}

impl Add for Attendance {
    type Output = Attendance;
    fn add(self, rhs: Attendance) -> Attendance {
        Attendance(self.0 + rhs.0)
    }
}

impl AddAssign for Attendance {
    fn add_assign(&mut self, rhs: Attendance) {
        self.0 += rhs.0;
    }
}

impl Sub for Attendance {
    type Output = Attendance;
    fn sub(self, rhs: Attendance) -> Attendance {
        Attendance(self.0 - rhs.0)
    }
}

impl Sum for Attendance {
    fn sum<I: Iterator<Item = Attendance>>(iter: I) -> Attendance {
        iter.fold(Attendance::ZERO, Add::add)
    }
}

impl fmt::Display for Attendance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / Self::SCALE as u64;
        let frac = abs % Self::SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl FromStr for Attendance {
    type Err = AttendanceParseError;

    /// Parses a decimal literal such as `226`, `226.5`, `-3`, or `2.265e2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || AttendanceParseError::Syntax(s.to_string());
        let overflow = || AttendanceParseError::Overflow(s.to_string());

        let (negative, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (mantissa, exponent) = match rest.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = rest[pos + 1..].parse().map_err(|_| syntax())?;
                (&rest[..pos], exp)
            }
            None => (rest, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(syntax());
        }
        if !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(syntax());
        }

        // value = digits * 10^(exponent - frac_len); we want value * 1000.
        let digits = format!("{int_part}{frac_part}");
        let digits = digits.trim_start_matches('0');
        let shift = i64::from(exponent) - frac_part.len() as i64 + 3;
        let mut milli: i128 = 0;
        let (kept, dropped) = if shift >= 0 {
            (digits, "")
        } else {
            let cut = digits.len().saturating_sub(shift.unsigned_abs() as usize);
            digits.split_at(cut)
        };
        if dropped.bytes().any(|b| b != b'0') {
            return Err(AttendanceParseError::TooPrecise(s.to_string()));
        }
        for b in kept.bytes() {
            milli = milli
                .checked_mul(10)
                .and_then(|m| m.checked_add(i128::from(b - b'0')))
                .filter(|m| *m <= i128::from(i64::MAX))
                .ok_or_else(overflow)?;
        }
        if shift > 0 && milli != 0 {
            for _ in 0..shift {
                milli = milli
                    .checked_mul(10)
                    .filter(|m| *m <= i128::from(i64::MAX))
                    .ok_or_else(overflow)?;
            }
        }
        let milli = milli as i64;
        Ok(Attendance(if negative { -milli } else { milli }))
    }
}

impl Serialize for Attendance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_integral() {
            serializer.serialize_i64(self.0 / Self::SCALE)
        } else {
            // Shortest round-trip float formatting reproduces the exact
            // three-decimal literal.
            serializer.serialize_f64(self.0 as f64 / Self::SCALE as f64)
        }
    }
}

impl<'de> Deserialize<'de> for Attendance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(serde_json::Number),
            Text(String),
        }
        let text = match Raw::deserialize(deserializer)? {
            Raw::Number(n) => n.to_string(),
            Raw::Text(s) => s,
        };
        text.trim().parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Attendance {
        s.parse().unwrap()
    }

    #[test]
    fn parses_integers_and_decimals() {
        assert_eq!(p("226").milli(), 226_000);
        assert_eq!(p("226.5").milli(), 226_500);
        assert_eq!(p("0.001").milli(), 1);
        assert_eq!(p("-3.25").milli(), -3_250);
        assert_eq!(p(".5").milli(), 500);
        assert_eq!(p("7.").milli(), 7_000);
        assert_eq!(p("2.265e2").milli(), 226_500);
        assert_eq!(p("1e-3").milli(), 1);
        assert_eq!(p("1.50000").milli(), 1_500);
        assert_eq!(p("0").milli(), 0);
    }

    #[test]
    fn rejects_excess_precision_and_garbage() {
        assert!(matches!(
            "0.0005".parse::<Attendance>(),
            Err(AttendanceParseError::TooPrecise(_))
        ));
        for bad in ["", ".", "abc", "1.2.3", "1e", "--1", "1,5"] {
            assert!(bad.parse::<Attendance>().is_err(), "{bad:?}");
        }
        assert!(matches!(
            "1e30".parse::<Attendance>(),
            Err(AttendanceParseError::Overflow(_))
        ));
    }

    #[test]
    fn display_trims_trailing_zeros() {
        assert_eq!(Attendance::from_milli(2_615_000).to_string(), "2615");
        assert_eq!(Attendance::from_milli(1_500).to_string(), "1.5");
        assert_eq!(Attendance::from_milli(1_050).to_string(), "1.05");
        assert_eq!(Attendance::from_milli(-7).to_string(), "-0.007");
    }

    #[test]
    fn json_number_round_trip() {
        for milli in [0, 1, 226_000, 226_500, 999_999_999, 123_456_789_012] {
            let a = Attendance::from_milli(milli);
            let text = serde_json::to_string(&a).unwrap();
            let back: Attendance = serde_json::from_str(&text).unwrap();
            assert_eq!(back, a, "{text}");
        }
        let quoted: Attendance = serde_json::from_str("\"12.25\"").unwrap();
        assert_eq!(quoted.milli(), 12_250);
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(milli in -1_000_000_000_000i64..1_000_000_000_000) {
            let a = Attendance::from_milli(milli);
            prop_assert_eq!(a.to_string().parse::<Attendance>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(serde_json::from_str::<Attendance>(&json).unwrap(), a);
        }
    }
}
