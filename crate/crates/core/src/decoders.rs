//! Postreadout decoders: iterative bit-flip (BF) decoding of parity-encoded
//! readouts and majority-vote (MV) decoding of minor-embedded readouts.
//!
//! The BF map works on the symmetric `n x n` matrix `m` with `m_ij = r_ij`
//! off the diagonal and `m_ii = +1`, and replaces it by the componentwise
//! sign of `m (m - I)`. Entries are stored one bit each (set means −1), so
//! `(m m)_ij = n - 2 popcount(row_i XOR row_j)` and one step costs `n^2`
//! popcounts.

use rand::Rng;

use crate::embedding::MinorEmbedding;
use crate::error::{invalid, Error, Result};
use crate::parity::{pair_count, PairCodebook};
use crate::spin::{seeded_rng, SpinConfig};

/// Largest `n` accepted by [`nearest_codeword_oracle`].
pub const ORACLE_CAP: usize = 20;

/// Default BF iteration budget.
pub const DEFAULT_MAX_ITER: usize = 6;

/// Symmetric ±1 matrix with unit diagonal, bit-packed by rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParityMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl ParityMatrix {
    /// All +1.
    pub fn ones(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        ParityMatrix { n, words, bits: vec![0; n * words] }
    }

    /// From dense rows; checks symmetry, unit diagonal and ±1 entries.
    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::ones(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return invalid(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 1 && v != -1 {
                    return invalid(format!("entry ({i},{j}) is {v}"));
                }
                if v != rows[j][i] || (i == j && v != 1) {
                    return invalid(format!("entry ({i},{j}) breaks symmetry or unit diagonal"));
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        if self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: i8) {
        let w = &mut self.bits[i * self.words + j / 64];
        if v < 0 {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 1)
    }

    /// `m = v v^T` for some ±1 vector `v`: every row equals row 0 or its complement.
    pub fn is_codeword(&self) -> bool {
        let first = self.row(0);
        let tail = self.n % 64;
        (1..self.n).all(|i| {
            let row = self.row(i);
            let same = row == first;
            let opposite = row.iter().zip(first).enumerate().all(|(w, (a, b))| {
                let mask = if w + 1 == self.words && tail != 0 { (1u64 << tail) - 1 } else { u64::MAX };
                a ^ b == mask
            });
            same || opposite
        })
    }

    /// `(m m)_ij = Σ_k m_ik m_kj`.
    #[inline]
    fn square_entry(&self, i: usize, j: usize) -> i32 {
        let diff: u32 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| (a ^ b).count_ones()).sum();
        self.n as i32 - 2 * diff as i32
    }

    /// Row 0 read as a logical state, so `Z_1 = +1`.
    pub fn first_row(&self) -> SpinConfig {
        SpinConfig::from_vec_unchecked((0..self.n).map(|j| self.get(0, j)).collect())
    }
}

pub fn to_matrix(r: &SpinConfig, codebook: &PairCodebook) -> Result<ParityMatrix> {
    if r.len() != codebook.k() {
        return invalid(format!("readout has {} spins, codebook expects {}", r.len(), codebook.k()));
    }
    let mut m = ParityMatrix::ones(codebook.n());
    fill_matrix(&mut m, r.as_slice());
    Ok(m)
}

fn fill_matrix(m: &mut ParityMatrix, r: &[i8]) {
    m.bits.iter_mut().for_each(|w| *w = 0);
    let n = m.n;
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            if r[idx] < 0 {
                m.set(i, j, -1);
                m.set(j, i, -1);
            }
            idx += 1;
        }
    }
}

/// Upper triangle in codebook order.
pub fn from_matrix(m: &ParityMatrix) -> SpinConfig {
    let n = m.n;
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push(m.get(i, j));
        }
    }
    SpinConfig::from_vec_unchecked(out)
}

/// One BF iteration: `sign(m (m - I))` componentwise, where a zero keeps
/// the current entry. The diagonal evaluates to `n - 1 > 0`.
pub fn bf_step(m: &ParityMatrix) -> ParityMatrix {
    let mut out = m.clone();
    bf_step_into(m, &mut out);
    out
}

fn bf_step_into(m: &ParityMatrix, out: &mut ParityMatrix) {
    let n = m.n;
    for i in 0..n {
        out.set(i, i, 1);
        for j in i + 1..n {
            let current = m.get(i, j);
            let s = m.square_entry(i, j) - i32::from(current);
            let v = match s.signum() {
                0 => current,
                x => x as i8,
            };
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
}

/// Result of [`bf_decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfOutcome {
    /// Final matrix as a physical configuration (a codeword when `converged`).
    pub codeword: SpinConfig,
    /// Row 0 of the final matrix, `Z_1 = +1`.
    pub logical: SpinConfig,
    pub converged: bool,
    pub iterations: usize,
}

/// Reusable BF decoder with scratch matrices, for hot loops.
#[derive(Debug, Clone)]
pub struct BitFlipDecoder {
    max_iter: usize,
    current: ParityMatrix,
    scratch: ParityMatrix,
}

impl BitFlipDecoder {
    pub fn new(n: usize, max_iter: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("decoder needs n >= 2, got {n}"));
        }
        if max_iter < 1 {
            return invalid("max_iter must be at least 1");
        }
        let m = ParityMatrix::ones(n);
        Ok(BitFlipDecoder { max_iter, current: m.clone(), scratch: m })
    }

    /// Decodes `r` in place; returns `(converged, iterations)`. The final
    /// matrix is available through [`Self::matrix`].
    pub fn run(&mut self, r: &[i8]) -> (bool, usize) {
        debug_assert_eq!(r.len(), pair_count(self.current.n));
        fill_matrix(&mut self.current, r);
        let mut iterations = 0;
        loop {
            if self.current.is_codeword() {
                return (true, iterations);
            }
            if iterations == self.max_iter {
                return (false, iterations);
            }
            bf_step_into(&self.current, &mut self.scratch);
            iterations += 1;
            std::mem::swap(&mut self.current, &mut self.scratch);
            if self.current == self.scratch {
                // stuck on a non-codeword fixed point
                return (false, iterations);
            }
        }
    }

    pub fn matrix(&self) -> &ParityMatrix {
        &self.current
    }

    /// Row 0 of the current matrix as a bit mask (bit `j` set means `Z_j = -1`).
    pub fn logical_mask(&self) -> u64 {
        debug_assert!(self.current.n <= 64);
        self.current.bits[0]
    }
}

/// Iterates [`bf_step`] from the readout until a codeword appears or
/// `max_iter` steps were taken.
pub fn bf_decode(r: &SpinConfig, codebook: &PairCodebook, max_iter: usize) -> Result<BfOutcome> {
    if r.len() != codebook.k() {
        return invalid(format!("readout has {} spins, codebook expects {}", r.len(), codebook.k()));
    }
    let mut dec = BitFlipDecoder::new(codebook.n(), max_iter)?;
    let (converged, iterations) = dec.run(r.as_slice());
    Ok(BfOutcome { codeword: from_matrix(dec.matrix()), logical: dec.matrix().first_row(), converged, iterations })
}

/// Closest codeword by exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearestCodeword {
    pub codeword: SpinConfig,
    /// Logical preimage with `Z_1 = +1`.
    pub logical: SpinConfig,
    pub distance: usize,
    /// Number of codewords at the minimum distance; the lexicographically
    /// smallest (−1 before +1) is returned.
    pub ties: usize,
}

pub fn nearest_codeword_oracle(r: &SpinConfig, codebook: &PairCodebook) -> Result<NearestCodeword> {
    let n = codebook.n();
    if n > ORACLE_CAP {
        return Err(Error::Resource(format!("nearest-codeword search is capped at n={ORACLE_CAP}, got {n}")));
    }
    let m = to_matrix(r, codebook)?;
    let rows: Vec<u64> = (0..n).map(|i| m.row(i)[0]).collect();
    let full = (1u64 << n) - 1;
    let mut best = usize::MAX;
    let mut winners: Vec<u64> = Vec::new();
    // v ranges over logical states with bit 0 clear (Z_1 = +1)
    for half in 0..1u64 << (n - 1) {
        let v = half << 1;
        let twice: u32 = rows
            .iter()
            .enumerate()
            .map(|(i, &row)| {
                let cw = if v >> i & 1 == 1 { !v & full } else { v };
                (row ^ cw).count_ones()
            })
            .sum();
        let d = twice as usize / 2;
        if d < best {
            best = d;
            winners.clear();
        }
        if d == best {
            winners.push(v);
        }
    }
    let ties = winners.len();
    let (codeword, logical) = winners
        .into_iter()
        .map(|v| {
            let z = SpinConfig::from_mask(v, n);
            (crate::parity::encode(&z), z)
        })
        .min()
        .expect("at least one codeword");
    Ok(NearestCodeword { codeword, logical, distance: best, ties })
}

/// Majority vote per chain; exact ties go to a fair coin drawn from `rng`.
pub fn majority_vote<R: Rng + ?Sized>(z: &[i8], e: &MinorEmbedding, rng: &mut R) -> SpinConfig {
    let out = e
        .chains()
        .iter()
        .map(|c| {
            let sum: i32 = c.iter().map(|&m| i32::from(z[m])).sum();
            match sum.signum() {
                0 => {
                    if rng.random::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
                s => s as i8,
            }
        })
        .collect();
    SpinConfig::from_vec_unchecked(out)
}

pub fn mv_decode(z: &SpinConfig, e: &MinorEmbedding, seed: u64) -> Result<SpinConfig> {
    if z.len() != e.k() {
        return invalid(format!("readout has {} spins, embedding expects {}", z.len(), e.k()));
    }
    Ok(majority_vote(z.as_slice(), e, &mut seeded_rng(seed)))
}
