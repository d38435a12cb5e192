//! Information quantities that may be infinite.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A quantity in bits, or `+∞`.
///
/// Relative entropy diverges whenever the support of its first argument is
/// not contained in the support of the second; that case is kept exact here.
/// Arithmetic saturates at `Infinite`. Scaling by zero yields zero (`0·∞ = 0`),
/// which is how zero-probability ensemble members are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bits {
    Finite(f64),
    Infinite,
}

impl Bits {
    pub const ZERO: Bits = Bits::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Bits::Infinite)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            Bits::Finite(v) => Some(v),
            Bits::Infinite => None,
        }
    }

    /// Lossy conversion; `Infinite` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Bits::Finite(v) => v,
            Bits::Infinite => f64::INFINITY,
        }
    }

    /// Multiply by a nonnegative weight with `0·∞ = 0`.
    pub fn scale(self, weight: f64) -> Bits {
        debug_assert!(weight >= 0.0);
        match self {
            _ if weight == 0.0 => Bits::ZERO,
            Bits::Finite(v) => Bits::Finite(weight * v),
            Bits::Infinite => Bits::Infinite,
        }
    }

    pub fn max(self, other: Bits) -> Bits {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Bits) -> Bits {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Bits {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Bits::Infinite
        } else {
            Bits::Finite(v)
        }
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Bits::Finite(a), Bits::Finite(b)) => a.partial_cmp(b),
            (Bits::Finite(_), Bits::Infinite) => Some(Ordering::Less),
            (Bits::Infinite, Bits::Finite(_)) => Some(Ordering::Greater),
            (Bits::Infinite, Bits::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        match (self, rhs) {
            (Bits::Finite(a), Bits::Finite(b)) => Bits::Finite(a + b),
            _ => Bits::Infinite,
        }
    }
}

impl Add<f64> for Bits {
    type Output = Bits;
    fn add(self, rhs: f64) -> Bits {
        self + Bits::Finite(rhs)
    }
}

/// Subtracting a finite amount from `∞` stays `∞`.
impl Sub<f64> for Bits {
    type Output = Bits;
    fn sub(self, rhs: f64) -> Bits {
        match self {
            Bits::Finite(a) => Bits::Finite(a - rhs),
            Bits::Infinite => Bits::Infinite,
        }
    }
}

impl std::iter::Sum for Bits {
    fn sum<I: Iterator<Item = Bits>>(iter: I) -> Bits {
        iter.fold(Bits::ZERO, |acc, b| acc + b)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bits::Finite(v) => write!(f, "{v}"),
            Bits::Infinite => f.write_str("infinite"),
        }
    }
}

/// Serialized as a JSON number, or the string `"infinite"`.
impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Bits::Finite(v) => serializer.serialize_f64(*v),
            Bits::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BitsVisitor;

        impl Visitor<'_> for BitsVisitor {
            type Value = Bits;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"infinite\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Bits, E> {
                Ok(Bits::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Bits, E> {
                Ok(Bits::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Bits, E> {
                Ok(Bits::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Bits, E> {
                if v == "infinite" {
                    Ok(Bits::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(BitsVisitor)
    }
}
