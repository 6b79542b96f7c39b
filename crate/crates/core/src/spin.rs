//! Classical spin configurations.
//!
//! A configuration of `n` spins is a bitmask: bit `i` set means spin `i`
//! points down (`σ_i = -1`), clear means up (`σ_i = +1`). The textual form
//! is a `+`/`-` string with spin 0 leftmost.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_SPINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    bits: u64,
    n: usize,
}

impl SpinConfiguration {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_SPINS {
            return Err(Error::InvalidArgument(format!(
                "spin count must be in 1..={MAX_SPINS}, got {n}"
            )));
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "bitmask {bits:#x} has bits above spin count {n}"
            )));
        }
        Ok(Self { bits, n })
    }

    /// All spins up.
    pub fn all_up(n: usize) -> Self {
        Self::new(n, 0).expect("valid spin count")
    }

    pub(crate) fn from_bits_unchecked(n: usize, bits: u64) -> Self {
        debug_assert!(n == 64 || bits >> n == 0);
        Self { bits, n }
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << i,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "spin value must be ±1, got {other}"
                    )))
                }
            }
        }
        Self::new(spins.len(), bits)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mask(&self) -> u64 {
        full_mask(self.n)
    }

    /// `σ_i` as ±1.
    #[inline]
    pub fn spin(&self, i: usize) -> i8 {
        if self.bits >> i & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.spin(i)).collect()
    }

    pub fn down_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// `Σ_i σ_i`.
    pub fn magnetization(&self) -> i64 {
        self.n as i64 - 2 * self.down_count() as i64
    }

    pub fn is_balanced(&self) -> bool {
        self.magnetization() == 0
    }

    /// Global spin flip.
    pub fn complement(&self) -> Self {
        Self {
            bits: !self.bits & self.mask(),
            n: self.n,
        }
    }

    /// Bitstring form: `0` for up, `1` for down, spin 0 leftmost.
    pub fn to_bitstring(&self) -> String {
        (0..self.n)
            .map(|i| if self.spin(i) == 1 { '0' } else { '1' })
            .collect()
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.spin(i) == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Accepts either a `+`/`-` string or a `0`/`1` bitstring.
impl FromStr for SpinConfiguration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Malformed("empty spin configuration".into()));
        }
        let pm = s.chars().all(|c| c == '+' || c == '-');
        let bin = s.chars().all(|c| c == '0' || c == '1');
        if !pm && !bin {
            return Err(Error::Malformed(format!(
                "spin configuration {s:?} must use only '+'/'-' or '0'/'1'"
            )));
        }
        let mut bits = 0u64;
        let n = s.chars().count();
        if n > MAX_SPINS {
            return Err(Error::TooLarge {
                what: "a spin configuration",
                n,
                max: MAX_SPINS,
            });
        }
        for (i, c) in s.chars().enumerate() {
            if c == '-' || c == '1' {
                bits |= 1 << i;
            }
        }
        Self::new(n, bits)
    }
}

impl Serialize for SpinConfiguration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpinConfiguration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_forms() {
        let c: SpinConfiguration = "+--++-".parse().unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c.bits(), 0b100110);
        assert_eq!(c.to_string(), "+--++-");
        assert_eq!(c.to_bitstring(), "011001");
        let b: SpinConfiguration = "011001".parse().unwrap();
        assert_eq!(b, c);
        assert!(c.is_balanced());
        assert_eq!(c.complement().to_string(), "-++--+");
    }

    #[test]
    fn rejects_garbage() {
        assert!("+-x".parse::<SpinConfiguration>().is_err());
        assert!("+-01".parse::<SpinConfiguration>().is_err());
        assert!("".parse::<SpinConfiguration>().is_err());
        assert!(SpinConfiguration::new(3, 0b1000).is_err());
    }

    #[test]
    fn magnetization_counts_down_spins() {
        let c = SpinConfiguration::new(4, 0b0001).unwrap();
        assert_eq!(c.magnetization(), 2);
        assert_eq!(c.spins(), vec![-1, 1, 1, 1]);
    }
}
