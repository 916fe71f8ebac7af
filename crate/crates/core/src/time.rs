//! Time is a plain nanosecond count: virtual nanoseconds in the simulator,
//! monotonic wall nanoseconds in the runtime.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// Nanoseconds, virtual or wall depending on the driver.
pub type Nanos = u64;

pub const NANOS_PER_MICRO: u64 = 1_000;
pub const NANOS_PER_MILLI: u64 = 1_000_000;
pub const NANOS_PER_SEC: u64 = 1_000_000_000;

/// A duration field that reads as either a raw nanosecond integer or a
/// human string like `"20ms"`, `"5us"`, `"1.5s"`. Serializes back to the
/// shortest exact human form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DurationNs(pub Nanos);

impl DurationNs {
    pub const fn ns(self) -> Nanos {
        self.0
    }

    pub fn from_millis(ms: u64) -> Self {
        DurationNs(ms * NANOS_PER_MILLI)
    }

    pub fn from_micros(us: u64) -> Self {
        DurationNs(us * NANOS_PER_MICRO)
    }
}

impl From<Nanos> for DurationNs {
    fn from(ns: Nanos) -> Self {
        DurationNs(ns)
    }
}

impl fmt::Display for DurationNs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_nanos(self.0))
    }
}

/// Render a nanosecond count with the largest unit that divides it exactly.
pub fn format_nanos(ns: Nanos) -> String {
    if ns == 0 {
        return "0ns".to_string();
    }
    for (div, unit) in [
        (NANOS_PER_SEC, "s"),
        (NANOS_PER_MILLI, "ms"),
        (NANOS_PER_MICRO, "us"),
    ] {
        if ns % div == 0 {
            return format!("{}{}", ns / div, unit);
        }
    }
    format!("{}ns", ns)
}

/// Parse `"20ms"`, `"5us"`, `"1.5s"`, `"250000"` (bare integers are ns).
pub fn parse_nanos(s: &str) -> Result<Nanos, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty duration".to_string());
    }
    let split = s
        .find(|c: char| c.is_ascii_alphabetic())
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let num = num.trim();
    let mult = match unit.trim() {
        "" | "ns" => 1,
        "us" | "µs" => NANOS_PER_MICRO,
        "ms" => NANOS_PER_MILLI,
        "s" => NANOS_PER_SEC,
        other => return Err(format!("unknown duration unit {other:?} in {s:?}")),
    };
    if let Ok(v) = num.parse::<u64>() {
        return v
            .checked_mul(mult)
            .ok_or_else(|| format!("duration {s:?} overflows"));
    }
    // Fractional values like "1.5ms": keep nanosecond exactness.
    let f: f64 = num
        .parse()
        .map_err(|_| format!("bad duration number {num:?} in {s:?}"))?;
    if !(f.is_finite() && f >= 0.0) {
        return Err(format!("bad duration {s:?}"));
    }
    Ok((f * mult as f64).round() as u64)
}

impl Serialize for DurationNs {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_nanos(self.0))
    }
}

impl<'de> Deserialize<'de> for DurationNs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = DurationNs;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a duration string like \"20ms\" or a nanosecond integer")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<DurationNs, E> {
                Ok(DurationNs(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<DurationNs, E> {
                if v < 0 {
                    return Err(E::custom("duration must be non-negative"));
                }
                Ok(DurationNs(v as u64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<DurationNs, E> {
                parse_nanos(v).map(DurationNs).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(V)
    }
}
