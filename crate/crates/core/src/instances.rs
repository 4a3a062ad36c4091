//! Logical all-to-all Ising instances, exact ground truth by enumeration,
//! and the on-disk instance format.
//!
//! Logical spins are indexed from 0 in the API. The instance file uses the
//! 1-based `(i, j)` labels of the usual `J_ij` notation.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::parity::{pair_count, pair_index};
use crate::spin::{seeded_rng, SpinConfig};

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// Largest `n` accepted by [`solve_exhaustive`].
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// `H(Z) = -Σ_{i<j} J_ij Z_i Z_j` over `n` logical spins.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalProblem {
    n: usize,
    /// One coupling per pair, in lexicographic pair order.
    couplings: Vec<f64>,
    seed: Option<u64>,
    half_range: Option<f64>,
}

impl LogicalProblem {
    /// Hand-built instance. `couplings` must be in lexicographic pair order
    /// `(0,1), (0,2), ..., (n-2,n-1)`.
    pub fn new(n: usize, couplings: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return invalid(format!("need at least 2 logical spins, got {n}"));
        }
        if couplings.len() != pair_count(n) {
            return invalid(format!("expected {} couplings for n={n}, got {}", pair_count(n), couplings.len()));
        }
        if let Some(p) = couplings.iter().position(|v| !v.is_finite()) {
            return invalid(format!("coupling #{p} is not finite"));
        }
        Ok(LogicalProblem { n, couplings, seed: None, half_range: None })
    }

    /// Every pair gets the same coupling.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(n, vec![value; pair_count(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn half_range(&self) -> Option<f64> {
        self.half_range
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// `J_ij` for 0-based `i != j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.couplings[pair_index(self.n, a, b)]
    }

    /// `(i, j, J_ij)` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.couplings.iter())
            .map(|((i, j), &v)| (i, j, v))
    }

    /// Dense symmetric coupling matrix with zero diagonal.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (i, j, v) in self.pairs() {
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
        m
    }

    /// Short content hash identifying the instance in output metadata.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(to_json_string(self).as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Draws every `J_ij` independently and uniformly from `[-half_range, half_range]`.
pub fn generate_instance(n: usize, half_range: f64, seed: u64) -> Result<LogicalProblem> {
    if n < 2 {
        return invalid(format!("need at least 2 logical spins, got {n}"));
    }
    if !(half_range > 0.0 && half_range.is_finite()) {
        return invalid(format!("half_range must be positive and finite, got {half_range}"));
    }
    let mut rng = seeded_rng(seed);
    let couplings = (0..pair_count(n)).map(|_| rng.random_range(-half_range..=half_range)).collect();
    Ok(LogicalProblem { n, couplings, seed: Some(seed), half_range: Some(half_range) })
}

pub fn logical_energy(problem: &LogicalProblem, z: &SpinConfig) -> Result<f64> {
    if z.len() != problem.n {
        return invalid(format!("logical configuration has {} spins, expected {}", z.len(), problem.n));
    }
    Ok(logical_energy_unchecked(problem, z.as_slice()))
}

pub(crate) fn logical_energy_unchecked(problem: &LogicalProblem, z: &[i8]) -> f64 {
    -problem.pairs().map(|(i, j, v)| v * f64::from(z[i] * z[j])).sum::<f64>()
}

/// Exact ground-state information for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub energy: f64,
    /// All minimizers, sorted; closed under global flip.
    pub states: Vec<SpinConfig>,
    /// `|states| / 2^n`.
    pub p_exhaustive: f64,
}

impl GroundTruth {
    pub fn n(&self) -> usize {
        self.states.first().map_or(0, SpinConfig::len)
    }

    pub fn contains(&self, z: &SpinConfig) -> bool {
        self.states.binary_search(z).is_ok()
    }

    /// Minimizers with `Z_1 = +1`, one per `{Z, -Z}` pair.
    pub fn representatives(&self) -> Vec<SpinConfig> {
        let mut reps: Vec<SpinConfig> = self.states.iter().filter(|s| s[0] > 0).cloned().collect();
        reps.sort();
        reps
    }
}

pub fn solve_exhaustive(problem: &LogicalProblem) -> Result<GroundTruth> {
    solve_exhaustive_capped(problem, DEFAULT_ENUMERATION_CAP)
}

struct ChunkScan {
    min: f64,
    candidates: Vec<(f64, u64)>,
}

/// Enumerates all `2^n` states (`2^(n-1)` with spin 0 pinned, then adds the
/// global flips). Gray-code order inside fixed-prefix chunks; the chunks run
/// in parallel and are merged in index order.
pub fn solve_exhaustive_capped(problem: &LogicalProblem, cap: usize) -> Result<GroundTruth> {
    let n = problem.n;
    if n > cap.min(63) {
        return Err(Error::Resource(format!("enumeration cap is {cap} spins, instance has {n}")));
    }
    let scale = 1.0 + problem.couplings.iter().map(|v| v.abs()).sum::<f64>();
    let slack = 1e-9 * scale;
    let free = n - 1;
    let high = free.min(6);
    let low = free - high;
    let dense = problem.dense();

    let chunks: Vec<ChunkScan> =
        (0..1u64 << high).into_par_iter().map(|prefix| scan_chunk(&dense, n, low, prefix, slack)).collect();

    let approx_min = chunks.iter().map(|c| c.min).fold(f64::INFINITY, f64::min);
    let mut exact: Vec<(f64, u64)> = chunks
        .iter()
        .filter(|c| c.min <= approx_min + slack)
        .flat_map(|c| c.candidates.iter())
        .filter(|c| c.0 <= approx_min + slack)
        .map(|&(_, free_mask)| {
            let z = SpinConfig::from_mask(free_mask << 1, n);
            (logical_energy_unchecked(problem, z.as_slice()), free_mask << 1)
        })
        .collect();
    let energy = exact.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * scale;
    exact.retain(|e| e.0 <= energy + tol);

    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut states: Vec<SpinConfig> =
        exact.iter().flat_map(|&(_, mask)| [mask, !mask & full]).map(|mask| SpinConfig::from_mask(mask, n)).collect();
    states.sort();
    states.dedup();
    let p_exhaustive = states.len() as f64 / (n as f64).exp2();
    Ok(GroundTruth { energy, states, p_exhaustive })
}

fn scan_chunk(dense: &[f64], n: usize, low: usize, prefix: u64, slack: f64) -> ChunkScan {
    // spin 0 pinned to +1; free spin b (0-based) is logical spin b+1
    let start = prefix << low;
    let mut z: Vec<f64> = (0..n).map(|s| if s > 0 && start >> (s - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect();
    let mut field: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i * n + j] * z[j]).sum()).collect();
    let mut energy = -0.5 * (0..n).map(|i| z[i] * field[i]).sum::<f64>();
    let mut mask = start;
    let mut min = energy;
    let mut candidates = vec![(energy, mask)];

    for t in 1u64..1 << low {
        let bit = t.trailing_zeros() as usize;
        let m = bit + 1;
        energy += 2.0 * z[m] * field[m];
        z[m] = -z[m];
        mask ^= 1 << bit;
        let row = &dense[m * n..(m + 1) * n];
        let step = 2.0 * z[m];
        for (f, &jm) in field.iter_mut().zip(row) {
            *f += step * jm;
        }
        if energy < min - slack {
            min = energy;
            candidates.clear();
            candidates.push((energy, mask));
        } else if energy <= min + slack {
            min = min.min(energy);
            candidates.push((energy, mask));
            if candidates.len() > 256 {
                candidates.retain(|c| c.0 <= min + slack);
            }
        }
    }
    ChunkScan { min, candidates }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    n: usize,
    seed: Option<u64>,
    half_range: Option<f64>,
    couplings: Vec<CouplingEntry>,
}

#[derive(Serialize, Deserialize)]
struct CouplingEntry {
    i: usize,
    j: usize,
    v: f64,
}

pub fn to_json_string(problem: &LogicalProblem) -> String {
    let file = InstanceFile {
        format_version: INSTANCE_FORMAT_VERSION,
        n: problem.n,
        seed: problem.seed,
        half_range: problem.half_range,
        couplings: problem.pairs().map(|(i, j, v)| CouplingEntry { i: i + 1, j: j + 1, v }).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serialization cannot fail");
    s.push('\n');
    s
}

pub fn from_json_str(text: &str) -> Result<LogicalProblem> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.format_version != INSTANCE_FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format_version {}", file.format_version)));
    }
    let n = file.n;
    if n < 2 {
        return Err(Error::Parse(format!("n must be at least 2, got {n}")));
    }
    let mut slots: Vec<Option<f64>> = vec![None; pair_count(n)];
    for (pos, e) in file.couplings.iter().enumerate() {
        let entry = format!("coupling #{pos} ({}, {})", e.i, e.j);
        if e.i < 1 || e.i > n || e.j < 1 || e.j > n {
            return Err(Error::Parse(format!("{entry}: index out of range 1..={n}")));
        }
        if e.i >= e.j {
            return Err(Error::Parse(format!("{entry}: indices not strictly increasing")));
        }
        if !e.v.is_finite() {
            return Err(Error::Parse(format!("{entry}: non-finite value")));
        }
        let slot = &mut slots[pair_index(n, e.i - 1, e.j - 1)];
        if slot.is_some() {
            return Err(Error::Parse(format!("{entry}: duplicate pair")));
        }
        *slot = Some(e.v);
    }
    let missing = slots.iter().filter(|s| s.is_none()).count();
    if missing > 0 {
        return Err(Error::Parse(format!("incomplete coupling table: {missing} of {} pairs missing", slots.len())));
    }
    if let Some(h) = file.half_range {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parse(format!("half_range must be positive, got {h}")));
        }
    }
    Ok(LogicalProblem {
        n,
        couplings: slots.into_iter().map(Option::unwrap).collect(),
        seed: file.seed,
        half_range: file.half_range,
    })
}

pub fn write_instance(problem: &LogicalProblem, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(problem))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<LogicalProblem> {
    from_json_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_min(p: &LogicalProblem) -> (f64, usize) {
        let n = p.n();
        let energies: Vec<f64> =
            (0..1u64 << n).map(|m| logical_energy(p, &SpinConfig::from_mask(m, n)).unwrap()).collect();
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        (min, energies.iter().filter(|&&e| e == min).count())
    }

    #[test]
    fn generated_instance_shape() {
        let p = generate_instance(14, 0.25, 3).unwrap();
        assert_eq!(p.couplings().len(), 91);
        assert!(p.couplings().iter().all(|v| v.abs() <= 0.25));
        assert_eq!(generate_instance(2, 0.25, 3).unwrap().couplings().len(), 1);
        assert_eq!(generate_instance(5, 0.25, 11).unwrap(), generate_instance(5, 0.25, 11).unwrap());
        assert_ne!(generate_instance(5, 0.25, 11).unwrap(), generate_instance(5, 0.25, 12).unwrap());
    }

    #[test]
    fn generation_rejects_bad_arguments() {
        assert!(matches!(generate_instance(1, 0.25, 0), Err(Error::Validation(_))));
        assert!(matches!(generate_instance(4, 0.0, 0), Err(Error::Validation(_))));
        assert!(matches!(generate_instance(4, -1.0, 0), Err(Error::Validation(_))));
    }

    #[test]
    fn energy_examples() {
        let p = LogicalProblem::uniform(3, 0.25).unwrap();
        let up = SpinConfig::all_up(3);
        assert_eq!(logical_energy(&p, &up).unwrap(), -0.75);
        assert!(logical_energy(&p, &SpinConfig::all_up(4)).is_err());
    }

    #[test]
    fn antiferromagnetic_triangle_by_enumeration() {
        // Σ Z_iZ_j over a triangle is +3 (aligned) or -1 (otherwise).
        let p = LogicalProblem::uniform(3, -0.25).unwrap();
        let (min, count) = brute_force_min(&p);
        assert_eq!(min, -0.25);
        assert_eq!(count, 6);
        let truth = solve_exhaustive(&p).unwrap();
        assert_eq!(truth.energy, -0.25);
        assert_eq!(truth.states.len(), 6);
        assert_eq!(truth.p_exhaustive, 6.0 / 8.0);
    }

    #[test]
    fn two_spin_ferromagnet() {
        let p = LogicalProblem::new(2, vec![0.25]).unwrap();
        let truth = solve_exhaustive(&p).unwrap();
        assert_eq!(truth.energy, -0.25);
        assert_eq!(truth.states, vec![SpinConfig::new(vec![-1, -1]).unwrap(), SpinConfig::all_up(2)]);
        assert_eq!(truth.p_exhaustive, 0.5);
    }

    #[test]
    fn solver_matches_brute_force_on_random_instances() {
        for seed in 0..50 {
            let n = 2 + (seed as usize % 11);
            let p = generate_instance(n, 0.25, seed).unwrap();
            let truth = solve_exhaustive(&p).unwrap();
            let (min, count) = brute_force_min(&p);
            assert!((truth.energy - min).abs() < 1e-12, "seed {seed}");
            assert_eq!(truth.states.len(), count, "seed {seed}");
            for s in &truth.states {
                assert!(truth.contains(&s.negated()));
                assert!((logical_energy(&p, s).unwrap() - truth.energy).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ground_states_closed_under_flip() {
        for seed in 100..200 {
            let truth = solve_exhaustive(&generate_instance(7, 0.25, seed).unwrap()).unwrap();
            assert!(truth.states.iter().all(|s| truth.contains(&s.negated())));
        }
    }

    #[test]
    fn enumeration_cap_enforced() {
        let p = generate_instance(25, 0.25, 1).unwrap();
        assert!(matches!(solve_exhaustive(&p), Err(Error::Resource(_))));
        let small = generate_instance(6, 0.25, 1).unwrap();
        assert!(matches!(solve_exhaustive_capped(&small, 5), Err(Error::Resource(_))));
    }

    #[test]
    fn file_round_trip_keeps_seed_and_bits() {
        let p = generate_instance(9, 0.25, 77).unwrap();
        let back = from_json_str(&to_json_string(&p)).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.seed(), Some(77));
        for (a, b) in back.couplings().iter().zip(p.couplings()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    fn doc(n: usize, entries: &str) -> String {
        format!(r#"{{"format_version":1,"n":{n},"seed":null,"half_range":null,"couplings":[{entries}]}}"#)
    }

    fn parse_message(text: &str) -> String {
        match from_json_str(text) {
            Err(Error::Parse(msg)) => msg,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_name_the_entry() {
        let msg = parse_message(&doc(3, r#"{"i":1,"j":2,"v":0.1},{"i":3,"j":2,"v":0.1}"#));
        assert!(msg.contains("indices not strictly increasing") && msg.contains("(3, 2)"), "{msg}");
        let msg = parse_message(&doc(3, r#"{"i":1,"j":2,"v":0.1},{"i":1,"j":3,"v":0.1}"#));
        assert!(msg.contains("incomplete coupling table"), "{msg}");
        let msg = parse_message(&doc(3, r#"{"i":1,"j":2,"v":0.1},{"i":1,"j":2,"v":0.2},{"i":2,"j":3,"v":0.1}"#));
        assert!(msg.contains("duplicate pair") && msg.contains("#1"), "{msg}");
        let msg = parse_message(&doc(3, r#"{"i":1,"j":4,"v":0.1}"#));
        assert!(msg.contains("out of range"), "{msg}");
        assert!(from_json_str("{not json").is_err());
    }

    #[test]
    fn unordered_entries_are_accepted() {
        let p = from_json_str(&doc(3, r#"{"i":2,"j":3,"v":0.3},{"i":1,"j":2,"v":0.1},{"i":1,"j":3,"v":0.2}"#)).unwrap();
        assert_eq!(p.couplings(), &[0.1, 0.2, 0.3]);
    }
}
