//! Exact rational judgment values and the 1–9 intensity scale.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact positive rational used for matrix entries.
///
/// Serialized as `"p"` when the denominator is one and `"p/q"` otherwise, so
/// values like `1/9` survive persistence without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(Ratio<u64>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("`{0}` is not a rational of the form p or p/q")]
    Syntax(String),
    #[error("`{0}` is not strictly positive")]
    NonPositive(String),
}

impl Rational {
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `numer / denom` in lowest terms. Returns `None` for zero parts.
    pub fn new(numer: u64, denom: u64) -> Option<Self> {
        if numer == 0 || denom == 0 {
            return None;
        }
        Some(Rational(Ratio::new(numer, denom)))
    }

    pub fn integer(value: u64) -> Option<Self> {
        Self::new(value, 1)
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// Exact multiplicative inverse.
    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Natural log computed as `ln p - ln q`, which makes
    /// `ln(x) == -ln(1/x)` hold bit-for-bit.
    pub fn ln(&self) -> f64 {
        (self.numer() as f64).ln() - (self.denom() as f64).ln()
    }

    pub fn is_one(&self) -> bool {
        self.numer() == 1 && self.denom() == 1
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let parse = |part: &str| -> Result<u64, RationalParseError> {
            let part = part.trim();
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(RationalParseError::Syntax(s.to_string()));
            }
            part.parse::<u64>()
                .map_err(|_| RationalParseError::Syntax(s.to_string()))
        };
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (parse(p)?, parse(q)?),
            None => (parse(t)?, 1),
        };
        Rational::new(p, q).ok_or_else(|| RationalParseError::NonPositive(s.to_string()))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One of the 17 admissible intensities: 1..=9 and their reciprocals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Saaty(Rational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not an admissible intensity (expected 1..9 or 1/2..1/9)")]
pub struct InvalidJudgment(pub String);

impl Saaty {
    pub const EQUAL: Saaty = Saaty(Rational::ONE);

    /// All admissible intensities in ascending order, from 1/9 to 9.
    pub fn all() -> [Saaty; 17] {
        let mut out = [Saaty::EQUAL; 17];
        for k in 2..=9u64 {
            out[9 - k as usize] = Saaty(Rational::new(1, k).unwrap());
            out[7 + k as usize] = Saaty(Rational::integer(k).unwrap());
        }
        out
    }

    /// Intensity `k` in favour of the row criterion (`k` in 1..=9).
    pub fn favouring(k: u64) -> Result<Self, InvalidJudgment> {
        Self::try_from(Rational::integer(k).ok_or_else(|| InvalidJudgment(k.to_string()))?)
    }

    /// Intensity `k` in favour of the column criterion, i.e. `1/k`.
    pub fn against(k: u64) -> Result<Self, InvalidJudgment> {
        Self::try_from(Rational::new(1, k).ok_or_else(|| InvalidJudgment(format!("1/{k}")))?)
    }

    pub fn value(&self) -> Rational {
        self.0
    }

    pub fn recip(&self) -> Saaty {
        Saaty(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn ln(&self) -> f64 {
        self.0.ln()
    }

    /// Verbal label of the integer part of the intensity.
    pub fn verbal(&self) -> &'static str {
        let k = self.0.numer().max(self.0.denom());
        match k {
            1 => "equal",
            2 => "equal to moderate",
            3 => "moderate",
            4 => "moderate to strong",
            5 => "strong",
            6 => "strong to very strong",
            7 => "very strong",
            8 => "very strong to extreme",
            _ => "extreme",
        }
    }

    /// Snaps a log-space value to the nearest admissible intensity.
    ///
    /// The result is always one of the two scale values bracketing
    /// `exp(log_value)` (or the scale endpoint when outside `[1/9, 9]`).
    /// Exact ties go to the value closer to 1 so that
    /// `snap(-x) == snap(x).recip()`.
    pub fn snap_log(log_value: f64) -> Saaty {
        const TIE_EPS: f64 = 1e-12;
        let scale = Saaty::all();
        if log_value <= scale[0].ln() {
            return scale[0];
        }
        if log_value >= scale[16].ln() {
            return scale[16];
        }
        let upper = scale
            .iter()
            .position(|s| s.ln() >= log_value)
            .expect("value below the top of the scale");
        if upper == 0 || (scale[upper].ln() - log_value).abs() <= TIE_EPS {
            return scale[upper];
        }
        let (lo, hi) = (scale[upper - 1], scale[upper]);
        let d_lo = log_value - lo.ln();
        let d_hi = hi.ln() - log_value;
        if (d_lo - d_hi).abs() <= TIE_EPS {
            // tie: move toward 1
            if lo.ln().abs() <= hi.ln().abs() {
                lo
            } else {
                hi
            }
        } else if d_lo < d_hi {
            lo
        } else {
            hi
        }
    }
}

impl TryFrom<Rational> for Saaty {
    type Error = InvalidJudgment;

    fn try_from(r: Rational) -> Result<Self, Self::Error> {
        let (p, q) = (r.numer(), r.denom());
        let ok = (q == 1 && (1..=9).contains(&p)) || (p == 1 && (2..=9).contains(&q));
        if ok {
            Ok(Saaty(r))
        } else {
            Err(InvalidJudgment(r.to_string()))
        }
    }
}

impl FromStr for Saaty {
    type Err = InvalidJudgment;

    /// Accepts exactly `k` or `1/k`; anything else (decimals, `2/4`, signs)
    /// is rejected rather than rounded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || InvalidJudgment(s.trim().to_string());
        let digit = |p: &str| -> Option<u64> {
            if p.len() == 1 && p.as_bytes()[0].is_ascii_digit() {
                p.parse().ok()
            } else {
                None
            }
        };
        match t.split_once('/') {
            Some(("1", q)) => match digit(q) {
                Some(k) if k >= 2 => Saaty::against(k).map_err(|_| bad()),
                _ => Err(bad()),
            },
            Some(_) => Err(bad()),
            None => Saaty::favouring(digit(t).ok_or_else(bad)?).map_err(|_| bad()),
        }
    }
}

impl fmt::Display for Saaty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<Saaty> for Rational {
    fn from(s: Saaty) -> Self {
        s.0
    }
}

impl Serialize for Saaty {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Saaty {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = Rational::deserialize(deserializer)?;
        Saaty::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_has_seventeen_sorted_values() {
        let all = Saaty::all();
        assert_eq!(all.len(), 17);
        assert!(all.windows(2).all(|w| w[0].to_f64() < w[1].to_f64()));
        assert_eq!(all[0].to_string(), "1/9");
        assert_eq!(all[8], Saaty::EQUAL);
        assert_eq!(all[16].to_string(), "9");
    }

    #[test]
    fn parses_strict_forms_only() {
        assert_eq!("7".parse::<Saaty>().unwrap().to_string(), "7");
        assert_eq!(" 1/7 ".parse::<Saaty>().unwrap().to_string(), "1/7");
        for bad in ["6.5", "10", "0", "1/1", "2/4", "1/10", "-3", "", "1/", "x"] {
            assert!(bad.parse::<Saaty>().is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn rational_round_trips_text() {
        for s in ["1/9", "7", "3/5", "1000/3"] {
            assert_eq!(s.parse::<Rational>().unwrap().to_string(), s);
        }
        assert_eq!("4/2".parse::<Rational>().unwrap().to_string(), "2");
        assert!("0/3".parse::<Rational>().is_err());
        assert!("1.5".parse::<Rational>().is_err());
    }

    #[test]
    fn ln_is_antisymmetric_exactly() {
        for s in Saaty::all() {
            assert_eq!(s.ln(), -s.recip().ln());
        }
    }

    #[test]
    fn snapping_picks_nearest_and_breaks_ties_toward_one() {
        assert_eq!(Saaty::snap_log(3f64.ln()).to_string(), "3");
        assert_eq!(Saaty::snap_log(0.0), Saaty::EQUAL);
        // sqrt(6) sits exactly between 2 and 3 in log space
        assert_eq!(Saaty::snap_log(6f64.sqrt().ln()).to_string(), "2");
        assert_eq!(Saaty::snap_log(-(6f64.sqrt().ln())).to_string(), "1/2");
        assert_eq!(Saaty::snap_log(100f64.ln()).to_string(), "9");
        assert_eq!(Saaty::snap_log(-100f64.ln()).to_string(), "1/9");
    }
}
