//! Success-probability experiments.
//!
//! Four arms per scheme:
//!
//! * `a`: `M` uniform random physical states, no decoding;
//! * `b`: `M` consecutive states of the rejection-free sampler, no decoding;
//! * `c`: as `b`, every state decoded (BF for parity schemes, MV for ME);
//! * `d`: as `a`, every state decoded.
//!
//! A repetition succeeds at `M` when one of its first `M` samples is (or
//! decodes to) a logical ground state. Repetition `r` draws its samples
//! from ChaCha stream `2r` of the master seed and its majority-vote coins
//! from stream `2r + 1`, so arms `b` and `c` see the same readouts and the
//! aggregate does not depend on execution order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{majority_vote, BitFlipDecoder, DEFAULT_MAX_ITER};
use crate::embedding::{build_embedding, embed, MinorEmbedding};
use crate::error::{invalid, Error, Result};
use crate::instances::{GroundTruth, LogicalProblem};
use crate::parity::encode;
use crate::sampler::{make_model, EnergyModel, RejectionFreeSampler, Scheme};
use crate::spin::{fill_random_spins, stream_rng, Rng64, SpinConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    /// Random states.
    A,
    /// Sampler states.
    B,
    /// Sampler states, decoded.
    C,
    /// Random states, decoded.
    D,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::A, Arm::B, Arm::C, Arm::D];

    pub fn as_str(self) -> &'static str {
        match self {
            Arm::A => "a",
            Arm::B => "b",
            Arm::C => "c",
            Arm::D => "d",
        }
    }

    pub fn uses_sampler(self) -> bool {
        matches!(self, Arm::B | Arm::C)
    }

    pub fn decodes(self) -> bool {
        matches!(self, Arm::C | Arm::D)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Arm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown arm {s:?} (expected a, b, c or d)")))
    }
}

/// One benchmark configuration. `gamma = beta * C` is the penalty weight in
/// units of temperature; the model's `C` is recovered as `gamma / beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scheme: Scheme,
    pub arm: Arm,
    pub beta: f64,
    pub gamma: f64,
    /// Largest sample size `M`.
    pub samples: u64,
    pub reps: usize,
    pub seed: u64,
    pub instance_id: String,
}

pub const DEFAULT_REPS: usize = 1000;

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scheme == Scheme::Logical && self.arm.decodes() {
            return invalid(format!("arm {} needs a decoder, scheme logical has none", self.arm));
        }
        if self.samples < 1 {
            return invalid("sample size M must be at least 1");
        }
        if self.reps < 1 {
            return invalid("repetition count must be at least 1");
        }
        if self.arm.uses_sampler() {
            if !(self.beta > 0.0 && self.beta.is_finite()) {
                return invalid(format!("arm {} needs a finite beta > 0, got {}", self.arm, self.beta));
            }
            if self.scheme.is_penalized() && !(self.gamma > 0.0 && self.gamma.is_finite()) {
                return invalid(format!("scheme {} needs a finite gamma > 0, got {}", self.scheme, self.gamma));
            }
        }
        Ok(())
    }

    /// Penalty weight `C = gamma / beta` handed to the model.
    pub fn penalty(&self) -> Option<f64> {
        (self.scheme.is_penalized() && self.arm.uses_sampler()).then(|| self.gamma / self.beta)
    }
}

/// Probability of at least one hit in `m` independent draws with hit probability `p`.
pub fn analytic_success(p: f64, m: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("probability must lie in [0, 1], got {p}"));
    }
    Ok(match (p, m) {
        (_, 0) => 0.0,
        (1.0, _) => 1.0,
        (p, m) => -(m as f64 * (-p).ln_1p()).exp_m1(),
    })
}

/// Exact probability that one uniform random physical state of `scheme`
/// is a ground state image: `|states|/2^n` for logical, `(|states|/2)/2^k`
/// for the parity schemes (`Z` and `-Z` share a codeword) and
/// `|states|/2^k` for ME.
pub fn exhaustive_hit_probability(scheme: Scheme, truth: &GroundTruth) -> f64 {
    let n = truth.n();
    let count = truth.states.len() as f64;
    let k = scheme.size(n) as f64;
    match scheme {
        Scheme::Logical | Scheme::Me => count / k.exp2(),
        Scheme::Slhz | Scheme::Slhz3 => count / 2.0 / k.exp2(),
    }
}

/// Powers of two below `m`, then `m` itself.
pub fn checkpoints(m: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64).map(|e| 1u64 << e).take_while(|&c| c < m).collect();
    out.push(m);
    out
}

/// Decides whether a sample is (or decodes to) a logical ground state.
#[derive(Debug, Clone)]
pub struct SuccessCriterion {
    scheme: Scheme,
    arm: Arm,
    n: usize,
    ground: HashSet<u64>,
    /// Physical images of the ground states, for undecoded arms.
    targets: Vec<Vec<i8>>,
    embedding: Option<MinorEmbedding>,
}

impl SuccessCriterion {
    pub fn new(scheme: Scheme, arm: Arm, truth: &GroundTruth) -> Result<Self> {
        if scheme == Scheme::Logical && arm.decodes() {
            return invalid(format!("arm {arm} needs a decoder, scheme logical has none"));
        }
        let n = truth.n();
        if !(2..=63).contains(&n) {
            return invalid(format!("ground truth must cover 2..=63 logical spins, got {n}"));
        }
        let embedding = (scheme == Scheme::Me).then(|| build_embedding(n)).transpose()?;
        let mut targets: Vec<Vec<i8>> = truth
            .states
            .iter()
            .map(|z| match scheme {
                Scheme::Logical => z.as_slice().to_vec(),
                Scheme::Slhz | Scheme::Slhz3 => encode(z).into_vec(),
                Scheme::Me => embed(z, embedding.as_ref().unwrap()).into_vec(),
            })
            .collect();
        targets.sort();
        targets.dedup();
        let ground = truth.states.iter().map(SpinConfig::to_mask).collect();
        Ok(SuccessCriterion { scheme, arm, n, ground, targets, embedding })
    }

    pub fn targets(&self) -> &[Vec<i8>] {
        &self.targets
    }

    fn decoder(&self) -> Option<BitFlipDecoder> {
        matches!(self.scheme, Scheme::Slhz | Scheme::Slhz3)
            .then(|| BitFlipDecoder::new(self.n, DEFAULT_MAX_ITER).expect("n >= 2"))
    }

    fn decoded_hit(&self, z: &[i8], bf: &mut Option<BitFlipDecoder>, coins: &mut Rng64) -> bool {
        match (self.scheme, bf.as_mut(), &self.embedding) {
            (_, Some(dec), _) => {
                let (converged, _) = dec.run(z);
                converged && self.ground.contains(&dec.logical_mask())
            }
            (Scheme::Me, None, Some(e)) => self.ground.contains(&majority_vote(z, e, coins).to_mask()),
            _ => unreachable!("decoded arms are rejected for the logical scheme"),
        }
    }

    fn exact_hit(&self, z: &[i8]) -> bool {
        self.targets.iter().any(|t| t.as_slice() == z)
    }

    /// Evaluates one sample; `coins` feeds majority-vote tie breaks.
    pub fn check(&self, sample: &SpinConfig, coins: &mut Rng64) -> Result<bool> {
        let size = self.scheme.size(self.n);
        if sample.len() != size {
            return invalid(format!("sample has {} spins, scheme {} uses {size}", sample.len(), self.scheme));
        }
        Ok(if self.arm.decodes() {
            self.decoded_hit(sample.as_slice(), &mut self.decoder(), coins)
        } else {
            self.exact_hit(sample.as_slice())
        })
    }
}

/// Single-sample success test for `spec`'s scheme and arm.
pub fn is_success(sample: &SpinConfig, spec: &ExperimentSpec, truth: &GroundTruth, coin_seed: u64) -> Result<bool> {
    SuccessCriterion::new(spec.scheme, spec.arm, truth)?.check(sample, &mut stream_rng(coin_seed, 0))
}

/// Success probability against sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub spec: ExperimentSpec,
    pub checkpoints: Vec<u64>,
    pub success: Vec<f64>,
    pub stderr: Vec<f64>,
    /// 1-based index of the first successful sample per repetition.
    pub first_hits: Vec<Option<u64>>,
}

impl SuccessCurve {
    pub fn from_first_hits(spec: ExperimentSpec, first_hits: Vec<Option<u64>>) -> Self {
        let grid = checkpoints(spec.samples);
        let reps = first_hits.len() as f64;
        let (success, stderr) = grid
            .iter()
            .map(|&m| {
                let hits = first_hits.iter().filter(|h| matches!(h, Some(t) if *t <= m)).count();
                let p = hits as f64 / reps;
                (p, (p * (1.0 - p) / reps).sqrt())
            })
            .unzip();
        SuccessCurve { spec, checkpoints: grid, success, stderr, first_hits }
    }

    /// Estimate and standard error at checkpoint `m` (or the nearest
    /// checkpoint below it).
    pub fn at(&self, m: u64) -> (f64, f64) {
        let idx = self.checkpoints.iter().rposition(|&c| c <= m).unwrap_or(0);
        (self.success[idx], self.stderr[idx])
    }

    pub fn last(&self) -> (f64, f64) {
        (*self.success.last().unwrap(), *self.stderr.last().unwrap())
    }
}

/// A prepared experiment: model, success test and decoder scratch.
pub struct Experiment {
    spec: ExperimentSpec,
    model: Option<EnergyModel>,
    criterion: SuccessCriterion,
}

impl Experiment {
    pub fn new(spec: ExperimentSpec, problem: &LogicalProblem, truth: &GroundTruth) -> Result<Self> {
        spec.validate()?;
        if truth.n() != problem.n() {
            return invalid(format!("ground truth covers n={}, problem has n={}", truth.n(), problem.n()));
        }
        let model = spec.arm.uses_sampler().then(|| make_model(spec.scheme, problem, spec.penalty())).transpose()?;
        let criterion = SuccessCriterion::new(spec.scheme, spec.arm, truth)?;
        Ok(Experiment { spec, model, criterion })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    /// First successful sample index of repetition `r`, if any within `M`.
    pub fn repetition(&self, r: u64) -> Option<u64> {
        let rng = stream_rng(self.spec.seed, 2 * r);
        let mut coins = stream_rng(self.spec.seed, 2 * r + 1);
        let mut bf = if self.spec.arm.decodes() { self.criterion.decoder() } else { None };
        let crit = &self.criterion;
        let m = self.spec.samples;
        match (&self.model, self.spec.arm) {
            (Some(model), Arm::B) => {
                let mut sampler = RejectionFreeSampler::with_random_start(model, self.spec.beta, rng).ok()?;
                let mut tracker = HammingTracker::new(&crit.targets, sampler.state());
                (1..=m).find(|_| {
                    let flip = sampler.step();
                    tracker.update(flip.index, sampler.state()[flip.index])
                })
            }
            (Some(model), Arm::C) => {
                let mut sampler = RejectionFreeSampler::with_random_start(model, self.spec.beta, rng).ok()?;
                (1..=m).find(|_| {
                    sampler.step();
                    crit.decoded_hit(sampler.state(), &mut bf, &mut coins)
                })
            }
            (_, arm) => {
                let mut rng = rng;
                let mut z = vec![1i8; crit.scheme.size(crit.n)];
                (1..=m).find(|_| {
                    fill_random_spins(&mut rng, &mut z);
                    if arm.decodes() {
                        crit.decoded_hit(&z, &mut bf, &mut coins)
                    } else {
                        crit.exact_hit(&z)
                    }
                })
            }
        }
    }

    pub fn run(&self) -> SuccessCurve {
        let hits: Vec<Option<u64>> = (0..self.spec.reps as u64).into_par_iter().map(|r| self.repetition(r)).collect();
        SuccessCurve::from_first_hits(self.spec.clone(), hits)
    }
}

/// Hamming distance from the current state to each target, updated per flip.
struct HammingTracker<'t> {
    targets: &'t [Vec<i8>],
    dist: Vec<usize>,
}

impl<'t> HammingTracker<'t> {
    fn new(targets: &'t [Vec<i8>], z: &[i8]) -> Self {
        let dist = targets.iter().map(|t| t.iter().zip(z).filter(|(a, b)| a != b).count()).collect();
        HammingTracker { targets, dist }
    }

    /// Records that spin `m` now has value `v`; true when some target is reached.
    #[inline]
    fn update(&mut self, m: usize, v: i8) -> bool {
        let mut hit = false;
        for (d, t) in self.dist.iter_mut().zip(self.targets) {
            if t[m] == v {
                *d -= 1;
            } else {
                *d += 1;
            }
            hit |= *d == 0;
        }
        hit
    }
}

pub fn run_experiment(spec: &ExperimentSpec, problem: &LogicalProblem, truth: &GroundTruth) -> Result<SuccessCurve> {
    Ok(Experiment::new(spec.clone(), problem, truth)?.run())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCell {
    pub beta: f64,
    pub gamma: f64,
    pub success: f64,
    pub stderr: f64,
}

/// Success probability at fixed `M` over a `beta x gamma` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub base: ExperimentSpec,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Row-major: `cells[ib * gammas.len() + ig]`.
    pub cells: Vec<LandscapeCell>,
    /// Index of the best cell (first one on ties).
    pub argmax: usize,
}

impl Landscape {
    pub fn best(&self) -> &LandscapeCell {
        &self.cells[self.argmax]
    }

    pub fn cell(&self, ib: usize, ig: usize) -> &LandscapeCell {
        &self.cells[ib * self.gammas.len() + ig]
    }
}

/// Runs the base experiment at every grid cell with `M = m_fixed`. Every
/// cell reuses the base seed, so a 1x1 sweep reproduces a plain run.
pub fn sweep_landscape(
    base: &ExperimentSpec,
    betas: &[f64],
    gammas: &[f64],
    m_fixed: u64,
    problem: &LogicalProblem,
    truth: &GroundTruth,
) -> Result<Landscape> {
    if betas.is_empty() || gammas.is_empty() {
        return invalid("beta and gamma grids must be non-empty");
    }
    if !base.arm.uses_sampler() {
        return invalid(format!("landscapes are defined for arms b and c, got {}", base.arm));
    }
    let base = ExperimentSpec { samples: m_fixed, ..base.clone() };
    let experiments: Vec<Experiment> = betas
        .iter()
        .flat_map(|&beta| gammas.iter().map(move |&gamma| (beta, gamma)))
        .map(|(beta, gamma)| Experiment::new(ExperimentSpec { beta, gamma, ..base.clone() }, problem, truth))
        .collect::<Result<_>>()?;
    let cells: Vec<LandscapeCell> = experiments
        .par_iter()
        .map(|exp| {
            let (success, stderr) = exp.run().last();
            LandscapeCell { beta: exp.spec.beta, gamma: exp.spec.gamma, success, stderr }
        })
        .collect();
    let argmax =
        cells.iter().enumerate().fold(0, |best, (i, c)| if c.success > cells[best].success { i } else { best });
    Ok(Landscape { base, betas: betas.to_vec(), gammas: gammas.to_vec(), cells, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, solve_exhaustive};

    fn spec(scheme: Scheme, arm: Arm) -> ExperimentSpec {
        ExperimentSpec {
            scheme,
            arm,
            beta: 3.0,
            gamma: 3.0,
            samples: 64,
            reps: 20,
            seed: 1,
            instance_id: "test".into(),
        }
    }

    #[test]
    fn names_round_trip() {
        for a in Arm::ALL {
            assert_eq!(a.as_str().parse::<Arm>().unwrap(), a);
        }
        assert!("e".parse::<Arm>().is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(spec(Scheme::Logical, Arm::C).validate().is_err());
        assert!(spec(Scheme::Logical, Arm::D).validate().is_err());
        assert!(spec(Scheme::Slhz, Arm::C).validate().is_ok());
        assert!(ExperimentSpec { beta: 0.0, ..spec(Scheme::Me, Arm::B) }.validate().is_err());
        assert!(ExperimentSpec { gamma: 0.0, ..spec(Scheme::Me, Arm::B) }.validate().is_err());
        assert!(ExperimentSpec { gamma: 0.0, ..spec(Scheme::Logical, Arm::B) }.validate().is_ok());
        assert!(ExperimentSpec { beta: 0.0, gamma: 0.0, ..spec(Scheme::Me, Arm::A) }.validate().is_ok());
        assert!(ExperimentSpec { reps: 0, ..spec(Scheme::Me, Arm::A) }.validate().is_err());
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(analytic_success(0.3, 0).unwrap(), 0.0);
        assert!((analytic_success(0.3, 1).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(analytic_success(1.0, 3).unwrap(), 1.0);
        assert_eq!(analytic_success(0.0, 3).unwrap(), 0.0);
        assert!(analytic_success(1.5, 3).is_err());
        assert!(analytic_success(-0.1, 3).is_err());
        // direct product of (1 - p), computed independently
        let p = 2f64.powi(-14);
        let mut q = 1.0f64;
        for _ in 0..11357 {
            q *= 1.0 - p;
        }
        let v = analytic_success(p, 11357).unwrap();
        assert!((v - (1.0 - q)).abs() < 1e-9);
        assert!((v - 0.5).abs() < 1e-3, "{v}");
        // tiny p stays accurate
        assert!((analytic_success(1e-20, 1000).unwrap() / 1e-17 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(checkpoints(10), vec![1, 2, 4, 8, 10]);
    }

    #[test]
    fn single_sample_success() {
        let p = generate_instance(6, 0.25, 3).unwrap();
        let truth = solve_exhaustive(&p).unwrap();
        let star = truth.states[0].clone();
        let cw = encode(&star);
        assert!(is_success(&cw, &spec(Scheme::Slhz, Arm::B), &truth, 0).unwrap());
        assert!(!is_success(&cw.flipped(3), &spec(Scheme::Slhz, Arm::B), &truth, 0).unwrap());
        assert!(is_success(&cw.flipped(3), &spec(Scheme::Slhz, Arm::C), &truth, 0).unwrap());
        assert!(is_success(&cw.flipped(3), &spec(Scheme::Slhz3, Arm::D), &truth, 0).unwrap());
        let e = build_embedding(6).unwrap();
        let emb = embed(&star, &e);
        assert!(is_success(&emb, &spec(Scheme::Me, Arm::B), &truth, 0).unwrap());
        assert!(!is_success(&emb.flipped(0), &spec(Scheme::Me, Arm::B), &truth, 0).unwrap());
        assert!(is_success(&emb.flipped(0), &spec(Scheme::Me, Arm::C), &truth, 0).unwrap());
        assert!(is_success(&star.negated(), &spec(Scheme::Logical, Arm::A), &truth, 0).unwrap());
        assert!(is_success(&star, &spec(Scheme::Logical, Arm::C), &truth, 0).is_err());
        assert!(is_success(&star, &spec(Scheme::Slhz, Arm::B), &truth, 0).is_err());
    }

    #[test]
    fn curves_are_monotone_and_deterministic() {
        let p = generate_instance(6, 0.25, 4).unwrap();
        let truth = solve_exhaustive(&p).unwrap();
        for scheme in Scheme::ALL {
            for arm in Arm::ALL {
                let s = spec(scheme, arm);
                if s.validate().is_err() {
                    continue;
                }
                let a = run_experiment(&s, &p, &truth).unwrap();
                assert!(a.success.windows(2).all(|w| w[0] <= w[1]));
                assert_eq!(a, run_experiment(&s, &p, &truth).unwrap());
            }
        }
    }

    #[test]
    fn landscape_shape_and_argmax() {
        let p = generate_instance(5, 0.25, 5).unwrap();
        let truth = solve_exhaustive(&p).unwrap();
        let l =
            sweep_landscape(&spec(Scheme::Slhz3, Arm::B), &[1.0, 4.0, 9.0], &[0.5, 2.0, 5.0], 32, &p, &truth).unwrap();
        assert_eq!(l.cells.len(), 9);
        assert_eq!((l.cell(2, 1).beta, l.cell(2, 1).gamma), (9.0, 2.0));
        assert!(l.cells.iter().all(|c| c.success <= l.best().success));
        assert!(sweep_landscape(&spec(Scheme::Slhz3, Arm::A), &[1.0], &[1.0], 8, &p, &truth).is_err());
        assert!(sweep_landscape(&spec(Scheme::Slhz3, Arm::B), &[], &[1.0], 8, &p, &truth).is_err());
    }
}
