//! Spin configurations and the repo-wide random number generator.
//!
//! Every random draw in the crate goes through [`Rng64`], a ChaCha8 stream
//! cipher generator seeded from a 64-bit integer. Independent sub-streams
//! (one per repetition, per decoder, ...) are selected with
//! [`stream_rng`], which uses ChaCha's native 64-bit stream id instead of
//! hashing seeds, so results never depend on scheduling order.

use std::fmt;
use std::ops::Index;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The generator used everywhere. Recorded in output metadata as [`RNG_NAME`].
pub type Rng64 = ChaCha8Rng;

pub const RNG_NAME: &str = "chacha8/seed_from_u64+stream";

pub fn seeded_rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for sub-stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fills `out` with uniform ±1 values, 64 spins per generator word.
pub fn fill_random_spins<R: RngCore + ?Sized>(rng: &mut R, out: &mut [i8]) {
    for chunk in out.chunks_mut(64) {
        let mut word = rng.next_u64();
        for s in chunk.iter_mut() {
            *s = if word & 1 == 0 { 1 } else { -1 };
            word >>= 1;
        }
    }
}

/// An assignment of ±1 to an ordered list of spins.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v != 1 && v != -1) {
            return invalid(format!("spin {pos} has value {}, expected +1 or -1", values[pos]));
        }
        Ok(SpinConfig(values))
    }

    pub fn all_up(len: usize) -> Self {
        SpinConfig(vec![1; len])
    }

    /// Bit `b` of `mask` set means spin `b` is −1.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        SpinConfig((0..len).map(|b| if mask >> b & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0.iter().enumerate().fold(0u64, |acc, (b, &s)| if s < 0 { acc | 1 << b } else { acc })
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = vec![1; len];
        fill_random_spins(rng, &mut v);
        SpinConfig(v)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<i8>) -> Self {
        debug_assert!(values.iter().all(|&v| v == 1 || v == -1));
        SpinConfig(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i8> {
        self.0
    }

    pub fn flip(&mut self, m: usize) {
        self.0[m] = -self.0[m];
    }

    pub fn flipped(&self, m: usize) -> Self {
        let mut out = self.clone();
        out.flip(m);
        out
    }

    /// Global spin flip.
    pub fn negated(&self) -> Self {
        SpinConfig(self.0.iter().map(|&s| -s).collect())
    }

    pub fn hamming(&self, other: &SpinConfig) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Representative of `{Z, −Z}` whose first spin is +1.
    pub fn gauge_fixed(&self) -> Self {
        match self.0.first() {
            Some(&s) if s < 0 => self.negated(),
            _ => self.clone(),
        }
    }
}

impl Index<usize> for SpinConfig {
    type Output = i8;
    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = crate::error::Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        SpinConfig::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Vec<i8> {
        s.0
    }
}

impl fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_spin_values() {
        assert!(SpinConfig::new(vec![1, 0, -1]).is_err());
        assert!(SpinConfig::new(vec![1, -1, 1]).is_ok());
    }

    #[test]
    fn mask_round_trip() {
        for mask in 0..64u64 {
            assert_eq!(SpinConfig::from_mask(mask, 6).to_mask(), mask);
        }
    }

    #[test]
    fn streams_differ_and_repeat() {
        let mut a = stream_rng(7, 0);
        let mut b = stream_rng(7, 1);
        let mut a2 = stream_rng(7, 0);
        let (x, y, x2) = (a.next_u64(), b.next_u64(), a2.next_u64());
        assert_ne!(x, y);
        assert_eq!(x, x2);
    }
}
