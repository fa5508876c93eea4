//! Arithmetic in the prime field F_p.
//!
//! Residues are canonical `u32` values in `[0, p)`. Products are formed in
//! `u64` and reduced immediately, so any prime below 2^31 is safe.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OctoError, Result};

/// Largest supported characteristic.
pub const MAX_PRIME: u64 = 1 << 31;

/// An odd prime `p` with `3 <= p < 2^31`, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u32")]
pub struct FieldPrime(u32);

impl FieldPrime {
    pub fn new(p: u64) -> Result<Self> {
        if p == 2 {
            return Err(OctoError::EvenCharacteristic(p));
        }
        if !(2..MAX_PRIME).contains(&p) {
            return Err(OctoError::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(OctoError::NotPrime(p));
        }
        Ok(FieldPrime(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Reduce an arbitrary signed integer to its canonical residue.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.0 as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.0 as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    /// `a + b*c`
    #[inline]
    pub fn mul_add(self, a: u32, b: u32, c: u32) -> u32 {
        ((a as u64 + b as u64 * c as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(OctoError::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.0 as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce(t0))
    }

    /// Residue of the integer `k`.
    #[inline]
    pub fn from_u64(self, k: u64) -> u32 {
        (k % self.0 as u64) as u32
    }

    pub fn check(self, value: u64) -> Result<u32> {
        if value < self.0 as u64 {
            Ok(value as u32)
        } else {
            Err(OctoError::NonCanonical { value, p: self.0 })
        }
    }
}

impl From<FieldPrime> for u32 {
    fn from(p: FieldPrime) -> u32 {
        p.0
    }
}

impl<'de> Deserialize<'de> for FieldPrime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = u64::deserialize(d)?;
        FieldPrime::new(raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for FieldPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
