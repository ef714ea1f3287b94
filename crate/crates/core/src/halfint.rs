//! Half-integer arithmetic. SU(2) spins, band limits and cutoffs all live in
//! ½ℤ; storing twice the value keeps every comparison exact.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub fn from_int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub fn twice(self) -> i64 {
        self.twice
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Integer value, if this is an integer.
    pub fn as_int(self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Exact parse of an f64 that must be a half-integer (halves are exact in
    /// binary floating point, so no tolerance is involved).
    pub fn try_from_f64(v: f64) -> Option<Self> {
        let twice = 2.0 * v;
        if twice.fract() == 0.0 && twice.abs() <= i64::MAX as f64 {
            Some(HalfInt { twice: twice as i64 })
        } else {
            None
        }
    }

    /// Parse "3", "-2", "3/2", "1.5".
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return None;
            }
            return num.trim().parse::<i64>().ok().map(HalfInt::from_twice);
        }
        if let Ok(n) = s.parse::<i64>() {
            return Some(HalfInt::from_int(n));
        }
        s.parse::<f64>().ok().and_then(HalfInt::try_from_f64)
    }

    pub fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other { self } else { other }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other { self } else { other }
    }

    /// Largest half-integer not exceeding half of `self` (used for the
    /// half-cutoff stability diagnostic).
    pub fn half_floor(self) -> Self {
        HalfInt { twice: self.twice.div_euclid(2) }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

// Serialized as a plain JSON number; every half-integer is exact in f64.
impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if let Some(n) = self.as_int() {
            ser.serialize_i64(n)
        } else {
            ser.serialize_f64(self.to_f64())
        }
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(de)?;
        HalfInt::try_from_f64(v)
            .ok_or_else(|| serde::de::Error::custom(format!("{v} is not a half-integer")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!(HalfInt::parse("3").unwrap().twice(), 6);
        assert_eq!(HalfInt::parse("3/2").unwrap().twice(), 3);
        assert_eq!(HalfInt::parse("-1/2").unwrap().twice(), -1);
        assert_eq!(HalfInt::parse("1.5").unwrap().twice(), 3);
        assert_eq!(HalfInt::from_twice(5).to_string(), "5/2");
        assert_eq!(HalfInt::from_int(-4).to_string(), "-4");
        assert_eq!(HalfInt::parse("2/3"), None);
    }

    #[test]
    fn ordering_and_arithmetic() {
        let a = HalfInt::from_twice(3); // 3/2
        let b = HalfInt::from_int(2);
        assert!(a < b);
        assert_eq!((a + b).twice(), 7);
        assert_eq!((b - a).twice(), 1);
        assert_eq!(b.half_floor(), HalfInt::ONE);
        assert_eq!(HalfInt::from_twice(3).half_floor().twice(), 1);
    }

    #[test]
    fn json_round_trip_is_exact() {
        for twice in [-7i64, -2, 0, 1, 8, 65] {
            let h = HalfInt::from_twice(twice);
            let s = serde_json::to_string(&h).unwrap();
            let back: HalfInt = serde_json::from_str(&s).unwrap();
            assert_eq!(h, back);
        }
    }
}
