//! Quantities with unit suffixes, normalized to SI.
//!
//! A bare number is taken to already be in the SI unit of its field. Strings
//! are `"<number> <unit>"`, e.g. `"30 dBm"` or `"2 GHz"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Number(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// m
    Length,
    /// Hz
    Frequency,
    /// W
    Power,
    /// W/Hz
    PowerDensity,
    /// bit/s
    Rate,
    /// J
    Energy,
    /// Linear power ratio; also accepts dB.
    Ratio,
    /// Plain number, no unit allowed.
    Scalar,
}

impl Kind {
    fn si(self) -> &'static str {
        match self {
            Kind::Length => "m",
            Kind::Frequency => "Hz",
            Kind::Power => "W",
            Kind::PowerDensity => "W/Hz",
            Kind::Rate => "bps",
            Kind::Energy => "J",
            Kind::Ratio => "(linear)",
            Kind::Scalar => "(none)",
        }
    }
}

fn convert(kind: Kind, value: f64, unit: &str) -> Option<f64> {
    let db = |v: f64| 10f64.powf(v / 10.0);
    Some(match (kind, unit) {
        (Kind::Length, "m") => value,
        (Kind::Length, "km") => value * 1e3,
        (Kind::Frequency, "Hz") => value,
        (Kind::Frequency, "kHz") => value * 1e3,
        (Kind::Frequency, "MHz") => value * 1e6,
        (Kind::Frequency, "GHz") => value * 1e9,
        (Kind::Power, "W") => value,
        (Kind::Power, "mW") => value * 1e-3,
        (Kind::Power, "kW") => value * 1e3,
        (Kind::Power, "dBW") => db(value),
        (Kind::Power, "dBm") => db(value - 30.0),
        (Kind::PowerDensity, "W/Hz") => value,
        (Kind::PowerDensity, "dBW/Hz") => db(value),
        (Kind::PowerDensity, "dBm/Hz") => db(value - 30.0),
        (Kind::Rate, "bps") => value,
        (Kind::Rate, "kbps") => value * 1e3,
        (Kind::Rate, "Mbps") => value * 1e6,
        (Kind::Rate, "Gbps") => value * 1e9,
        (Kind::Energy, "J") => value,
        (Kind::Energy, "kJ") => value * 1e3,
        (Kind::Energy, "Wh") => value * 3600.0,
        (Kind::Ratio, "dB") => db(value),
        _ => return None,
    })
}

/// SI value of `q`; errors name `field`.
pub fn parse(field: &str, q: &Quantity, kind: Kind) -> Result<f64> {
    let bad = |why: String| Error::Config(format!("{field}: {why}"));
    let value = match q {
        Quantity::Number(v) => *v,
        Quantity::Text(s) => {
            let mut parts = s.split_whitespace();
            let (num, unit) = (parts.next(), parts.next());
            if parts.next().is_some() {
                return Err(bad(format!("expected \"<number> <unit>\", got {s:?}")));
            }
            let num: f64 = num
                .ok_or_else(|| bad("empty value".into()))?
                .parse()
                .map_err(|_| bad(format!("cannot parse a number from {s:?}")))?;
            match unit {
                None => num,
                Some(u) => convert(kind, num, u)
                    .ok_or_else(|| bad(format!("unit {u:?} is not valid here (SI unit is {})", kind.si())))?,
            }
        }
    };
    if !value.is_finite() {
        return Err(bad("value must be finite".into()));
    }
    Ok(value)
}
