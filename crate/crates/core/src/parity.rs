//! Parity encoding of logical pairs: the pair codebook, codeword encoding,
//! the weight-4 plaquette and weight-3 triad constraint families, and the
//! penalized Hamiltonians built on them.

use std::fmt;

use crate::error::{invalid, Result};
use crate::instances::LogicalProblem;
use crate::spin::SpinConfig;

/// Number of unordered pairs among `n` items.
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic linear index of the 0-based pair `i < j`.
#[inline]
pub const fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Bijection between logical pairs `{i, j}` and physical spin indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCodebook {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

pub fn build_codebook(n: usize) -> Result<PairCodebook> {
    PairCodebook::new(n)
}

impl PairCodebook {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("codebook needs at least 2 logical spins, got {n}"));
        }
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Ok(PairCodebook { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Physical spin count `n(n-1)/2`.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// Physical index of `{i, j}` (either order). `None` when `i == j` or out of range.
    pub fn to_index(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        (a != b && b < self.n).then(|| pair_index(self.n, a, b))
    }

    pub fn to_pair(&self, index: usize) -> (usize, usize) {
        self.pairs[index]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Smallest `n` whose codebook has `k` entries, if any.
    pub fn n_for_k(k: usize) -> Option<usize> {
        (2..).take_while(|&n| pair_count(n) <= k).find(|&n| pair_count(n) == k)
    }
}

/// `z_ij = Z_i Z_j` in codebook order.
pub fn encode(logical: &SpinConfig) -> SpinConfig {
    let z = logical.as_slice();
    let n = z.len();
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push(z[i] * z[j]);
        }
    }
    SpinConfig::from_vec_unchecked(out)
}

/// A product-of-spins parity check. `support` lists the free physical spins;
/// fixed literals contribute +1 and are not listed.
pub trait ParityCheck {
    fn support(&self) -> &[usize];

    fn syndrome(&self, z: &[i8]) -> i8 {
        self.support().iter().map(|&m| z[m]).product()
    }

    fn weight(&self) -> f64 {
        1.0
    }
}

pub fn syndrome(z: &SpinConfig, check: &impl ParityCheck) -> i8 {
    check.syndrome(z.as_slice())
}

/// One weight-4 unit cell over logical indices `(i, i+1, k, k+1)`:
/// spins `{i,k}, {j,k}, {j,l}, {i,l}` with `j = i+1`, `l = k+1`.
/// A pair with equal indices is the fixed diagonal literal `z_jj = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plaquette {
    /// The four 0-based index pairs in cell order.
    pub corners: [(usize, usize); 4],
    /// Physical index per corner; `None` for the fixed literal.
    pub members: [Option<usize>; 4],
    /// Multiplier on the penalty weight. Always 1.0 in shipped constructions.
    pub weight: f64,
    support: Vec<usize>,
}

impl Plaquette {
    pub fn has_fixed_corner(&self) -> bool {
        self.members.iter().any(Option::is_none)
    }
}

impl ParityCheck for Plaquette {
    fn support(&self) -> &[usize] {
        &self.support
    }

    fn weight(&self) -> f64 {
        self.weight
    }
}

/// The weight-3 check `z_ij z_jk z_ik` for one triple `i < j < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triad {
    pub triple: (usize, usize, usize),
    support: [usize; 3],
}

impl ParityCheck for Triad {
    fn support(&self) -> &[usize] {
        &self.support
    }
}

pub fn build_plaquettes(n: usize) -> Result<Vec<Plaquette>> {
    if n < 3 {
        return invalid(format!("plaquettes need at least 3 logical spins, got {n}"));
    }
    let book = PairCodebook::new(n)?;
    let mut out = Vec::with_capacity(pair_count(n - 1));
    for i in 0..n - 1 {
        for k in i + 1..n - 1 {
            let (j, l) = (i + 1, k + 1);
            let corners = [(i, k), (j, k), (j, l), (i, l)];
            let members = corners.map(|(a, b)| book.to_index(a, b));
            let support = members.iter().flatten().copied().collect();
            out.push(Plaquette { corners, members, weight: 1.0, support });
        }
    }
    Ok(out)
}

pub fn build_triads(n: usize) -> Result<Vec<Triad>> {
    if n < 3 {
        return invalid(format!("triads need at least 3 logical spins, got {n}"));
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let support = [pair_index(n, i, j), pair_index(n, j, k), pair_index(n, i, k)];
                out.push(Triad { triple: (i, j, k), support });
            }
        }
    }
    Ok(out)
}

impl fmt::Display for Plaquette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P4")?;
        for (&(a, b), m) in self.corners.iter().zip(&self.members) {
            match m {
                Some(idx) => write!(f, " z{},{}[{idx}]", a + 1, b + 1)?,
                None => write!(f, " z{},{}=+1", a + 1, b + 1)?,
            }
        }
        write!(f, " weight={}", self.weight)
    }
}

impl fmt::Display for Triad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j, k) = self.triple;
        let [a, b, c] = self.support;
        write!(f, "P3 z{},{}[{a}] z{},{}[{b}] z{},{}[{c}]", i + 1, j + 1, j + 1, k + 1, i + 1, k + 1)
    }
}

/// One constraint per line, in construction order.
pub fn constraint_listing<C: fmt::Display>(checks: &[C]) -> String {
    checks.iter().map(|c| format!("{c}\n")).collect()
}

/// Which parity-check family penalizes non-codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckFamily {
    Plaquettes,
    Triads,
}

/// `-Σ J_ij z_ij + C Σ_c w_c (1 - s_c)/2` over one check family.
#[derive(Debug, Clone)]
pub struct ParityHamiltonian {
    family: CheckFamily,
    fields: Vec<f64>,
    checks: Vec<Vec<usize>>,
    weights: Vec<f64>,
    penalty: f64,
}

impl ParityHamiltonian {
    pub fn new(problem: &LogicalProblem, family: CheckFamily, penalty: f64) -> Result<Self> {
        if !(penalty > 0.0 && penalty.is_finite()) {
            return invalid(format!("penalty weight must be positive and finite, got {penalty}"));
        }
        let n = problem.n();
        let (checks, weights) = match family {
            CheckFamily::Plaquettes => {
                build_plaquettes(n)?.into_iter().map(|p| (p.support().to_vec(), p.weight)).unzip()
            }
            CheckFamily::Triads => build_triads(n)?.into_iter().map(|t| (t.support().to_vec(), 1.0)).unzip(),
        };
        Ok(ParityHamiltonian { family, fields: problem.couplings().to_vec(), checks, weights, penalty })
    }

    pub fn family(&self) -> CheckFamily {
        self.family
    }

    pub fn k(&self) -> usize {
        self.fields.len()
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    /// Couplings acting as local fields on the physical spins.
    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn checks(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.checks.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }

    pub fn violated(&self, z: &[i8]) -> usize {
        self.checks.iter().filter(|c| c.iter().map(|&m| z[m]).product::<i8>() < 0).count()
    }

    pub fn energy(&self, z: &SpinConfig) -> Result<f64> {
        if z.len() != self.k() {
            return invalid(format!("physical configuration has {} spins, expected {}", z.len(), self.k()));
        }
        Ok(self.energy_unchecked(z.as_slice()))
    }

    pub(crate) fn energy_unchecked(&self, z: &[i8]) -> f64 {
        let field: f64 = self.fields.iter().zip(z).map(|(j, &s)| j * f64::from(s)).sum();
        let penalty: f64 = self
            .checks
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| c.iter().map(|&m| z[m]).product::<i8>() < 0)
            .map(|(_, w)| w)
            .sum();
        -field + self.penalty * penalty
    }
}

/// Weight-4 (plaquette) penalized energy.
pub fn slhz_energy(z: &SpinConfig, problem: &LogicalProblem, c4: f64) -> Result<f64> {
    ParityHamiltonian::new(problem, CheckFamily::Plaquettes, c4)?.energy(z)
}

/// Weight-3 (triad) penalized energy.
pub fn slhz3_energy(z: &SpinConfig, problem: &LogicalProblem, c3: f64) -> Result<f64> {
    ParityHamiltonian::new(problem, CheckFamily::Triads, c3)?.energy(z)
}
