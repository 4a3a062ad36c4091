//! Energy models over the four Hamiltonians and the rejection-free
//! single-spin-flip Metropolis sampler.
//!
//! Every model is also expanded into a list of product terms
//! `coef * Π_{m in term} z_m`; the sampler keeps the value of each term and
//! the local field `f_m = Σ_{t ∋ m} coef_t value_t`, so that flipping `m`
//! costs `ΔE = -2 f_m` and only spins sharing a term with `m` need new
//! weights.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::embedding::{build_embedding, MeHamiltonian};
use crate::error::{invalid, Error, Result};
use crate::instances::{logical_energy_unchecked, LogicalProblem};
use crate::parity::{pair_count, CheckFamily, ParityHamiltonian};
use crate::spin::{fill_random_spins, seeded_rng, SpinConfig};

/// Which Hamiltonian a model or experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// All-to-all logical problem.
    Logical,
    /// Parity encoding with weight-4 plaquette penalties.
    Slhz,
    /// Parity encoding with weight-3 triad penalties.
    Slhz3,
    /// Minor embedding with ferromagnetic chains.
    Me,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Logical, Scheme::Slhz, Scheme::Slhz3, Scheme::Me];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Logical => "logical",
            Scheme::Slhz => "slhz",
            Scheme::Slhz3 => "slhz3",
            Scheme::Me => "me",
        }
    }

    pub fn is_penalized(self) -> bool {
        self != Scheme::Logical
    }

    /// Spin count of the scheme for `n` logical spins.
    pub fn size(self, n: usize) -> usize {
        match self {
            Scheme::Logical => n,
            Scheme::Slhz | Scheme::Slhz3 => pair_count(n),
            Scheme::Me => n * (n.div_ceil(4) + 1),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown scheme {s:?} (expected logical, slhz, slhz3 or me)")))
    }
}

#[derive(Debug, Clone)]
enum Hamiltonian {
    Terms,
    Logical(LogicalProblem),
    Parity(ParityHamiltonian),
    Me(MeHamiltonian),
}

/// A Hamiltonian with exact total energy and single-flip energy changes.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    scheme: Option<Scheme>,
    size: usize,
    penalty: Option<f64>,
    hamiltonian: Hamiltonian,
    coefs: Vec<f64>,
    term_start: Vec<usize>,
    term_spins: Vec<usize>,
    inc_start: Vec<usize>,
    inc_terms: Vec<usize>,
    nb_start: Vec<usize>,
    nb_spins: Vec<usize>,
}

/// Builds the model for `scheme`. `penalty` is the constraint weight `C`
/// (C4, C3 or the chain strength) and is required for every scheme but
/// `logical`, which ignores it.
pub fn make_model(scheme: Scheme, problem: &LogicalProblem, penalty: Option<f64>) -> Result<EnergyModel> {
    let need = || penalty.ok_or_else(|| Error::Validation(format!("scheme {scheme} needs a penalty weight")));
    let (hamiltonian, terms): (Hamiltonian, Vec<(f64, Vec<usize>)>) = match scheme {
        Scheme::Logical => {
            let terms = problem.pairs().map(|(i, j, v)| (-v, vec![i, j])).collect();
            (Hamiltonian::Logical(problem.clone()), terms)
        }
        Scheme::Slhz | Scheme::Slhz3 => {
            let family = if scheme == Scheme::Slhz { CheckFamily::Plaquettes } else { CheckFamily::Triads };
            let h = ParityHamiltonian::new(problem, family, need()?)?;
            let c = h.penalty();
            let mut terms: Vec<(f64, Vec<usize>)> =
                h.fields().iter().enumerate().map(|(m, &j)| (-j, vec![m])).collect();
            // C w (1 - s)/2 = const - (C w / 2) s
            terms.extend(h.checks().map(|(support, w)| (-0.5 * c * w, support.to_vec())));
            (Hamiltonian::Parity(h), terms)
        }
        Scheme::Me => {
            let h = MeHamiltonian::new(problem, build_embedding(problem.n())?, need()?)?;
            let c = h.chain_strength();
            let mut terms: Vec<(f64, Vec<usize>)> = h.problem_couplers().map(|(a, b, j)| (-j, vec![a, b])).collect();
            terms.extend(h.embedding().chain_edges().iter().map(|&(a, b)| (-c, vec![a, b])));
            (Hamiltonian::Me(h), terms)
        }
    };
    let size = scheme.size(problem.n());
    let penalty = if scheme.is_penalized() { penalty } else { None };
    Ok(EnergyModel::build(Some(scheme), size, penalty, hamiltonian, terms))
}

impl EnergyModel {
    /// A model given directly as `Σ coef Π_{m in spins} z_m` over `size`
    /// spins, outside the four named schemes.
    pub fn from_terms(size: usize, terms: Vec<(f64, Vec<usize>)>) -> Result<Self> {
        if let Some((_, spins)) = terms.iter().find(|(c, spins)| !c.is_finite() || spins.iter().any(|&m| m >= size)) {
            return invalid(format!("term over {spins:?} has a bad coefficient or index"));
        }
        Ok(Self::build(None, size, None, Hamiltonian::Terms, terms))
    }

    fn build(
        scheme: Option<Scheme>,
        size: usize,
        penalty: Option<f64>,
        hamiltonian: Hamiltonian,
        terms: Vec<(f64, Vec<usize>)>,
    ) -> Self {
        let mut coefs = Vec::with_capacity(terms.len());
        let mut term_start = vec![0];
        let mut term_spins = Vec::new();
        let mut incidence = vec![Vec::new(); size];
        for (t, (c, spins)) in terms.into_iter().enumerate() {
            coefs.push(c);
            for &m in &spins {
                incidence[m].push(t);
            }
            term_spins.extend(spins);
            term_start.push(term_spins.len());
        }
        let mut inc_start = vec![0];
        let mut inc_terms = Vec::new();
        let mut nb_start = vec![0];
        let mut nb_spins = Vec::new();
        for (m, ts) in incidence.iter().enumerate() {
            inc_terms.extend(ts);
            inc_start.push(inc_terms.len());
            let mut nb: Vec<usize> = ts
                .iter()
                .flat_map(|&t| term_spins[term_start[t]..term_start[t + 1]].iter().copied())
                .filter(|&q| q != m)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb_spins.extend(nb);
            nb_start.push(nb_spins.len());
        }
        EnergyModel {
            scheme,
            size,
            penalty,
            hamiltonian,
            coefs,
            term_start,
            term_spins,
            inc_start,
            inc_terms,
            nb_start,
            nb_spins,
        }
    }

    /// `None` for models built with [`Self::from_terms`].
    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn penalty(&self) -> Option<f64> {
        self.penalty
    }

    fn check_len(&self, z: &SpinConfig) -> Result<()> {
        if z.len() != self.size {
            return invalid(format!("configuration has {} spins, model expects {}", z.len(), self.size));
        }
        Ok(())
    }

    /// Total energy, evaluated by the scheme's own Hamiltonian.
    pub fn energy(&self, z: &SpinConfig) -> Result<f64> {
        self.check_len(z)?;
        Ok(self.energy_unchecked(z.as_slice()))
    }

    fn energy_unchecked(&self, z: &[i8]) -> f64 {
        match &self.hamiltonian {
            Hamiltonian::Terms => (0..self.coefs.len()).map(|t| self.coefs[t] * f64::from(self.term_value(t, z))).sum(),
            Hamiltonian::Logical(p) => logical_energy_unchecked(p, z),
            Hamiltonian::Parity(h) => h.energy_unchecked(z),
            Hamiltonian::Me(h) => h.energy_unchecked(z),
        }
    }

    /// `energy(flip(z, m)) - energy(z)` from the terms touching `m`.
    pub fn delta(&self, z: &SpinConfig, m: usize) -> Result<f64> {
        self.check_len(z)?;
        if m >= self.size {
            return invalid(format!("spin index {m} out of range 0..{}", self.size));
        }
        let z = z.as_slice();
        Ok(-2.0 * self.terms_of(m).map(|t| self.coefs[t] * f64::from(self.term_value(t, z))).sum::<f64>())
    }

    #[inline]
    fn terms_of(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        self.inc_terms[self.inc_start[m]..self.inc_start[m + 1]].iter().copied()
    }

    #[inline]
    fn spins_of(&self, t: usize) -> &[usize] {
        &self.term_spins[self.term_start[t]..self.term_start[t + 1]]
    }

    #[inline]
    fn term_value(&self, t: usize, z: &[i8]) -> i8 {
        self.spins_of(t).iter().map(|&q| z[q]).product()
    }

    /// Spins sharing at least one term with `m`.
    pub fn neighbors(&self, m: usize) -> &[usize] {
        &self.nb_spins[self.nb_start[m]..self.nb_start[m + 1]]
    }
}

/// Binary sum tree over the flip weights; parents are always recomputed
/// from their children so the sums never drift.
#[derive(Debug, Clone)]
struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(size: usize) -> Self {
        let leaves = size.next_power_of_two().max(2);
        SumTree { leaves, nodes: vec![0.0; 2 * leaves] }
    }

    #[inline]
    fn set(&mut self, i: usize, w: f64) {
        let mut node = self.leaves + i;
        self.nodes[node] = w;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    #[inline]
    fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    /// Leaf holding cumulative weight `u`, `0 <= u < total`.
    #[inline]
    fn find(&self, mut u: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = 2 * node;
            if u < self.nodes[left] || self.nodes[left + 1] <= 0.0 {
                node = left;
            } else {
                u -= self.nodes[left];
                node = left + 1;
            }
        }
        node - self.leaves
    }
}

const FIELD_REFRESH: u64 = 1 << 14;

/// One transition of the sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flip {
    pub index: usize,
    pub delta: f64,
}

/// Rejection-free Metropolis sampler: every step flips exactly one spin,
/// chosen with probability `w_m / Σ w`, `w_m = min(1, exp(-β ΔE_m))`.
pub struct RejectionFreeSampler<'m, R> {
    model: &'m EnergyModel,
    beta: f64,
    rng: R,
    z: Vec<i8>,
    term_val: Vec<i8>,
    field: Vec<f64>,
    tree: SumTree,
    energy: f64,
    steps: u64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return invalid(format!("inverse temperature must be finite and non-negative, got {beta}"));
    }
    Ok(())
}

impl<'m, R: Rng> RejectionFreeSampler<'m, R> {
    pub fn new(model: &'m EnergyModel, beta: f64, init: SpinConfig, rng: R) -> Result<Self> {
        check_beta(beta)?;
        model.check_len(&init)?;
        let energy = model.energy_unchecked(init.as_slice());
        let mut s = RejectionFreeSampler {
            model,
            beta,
            rng,
            z: init.into_vec(),
            term_val: vec![1; model.coefs.len()],
            field: vec![0.0; model.size],
            tree: SumTree::new(model.size),
            energy,
            steps: 0,
        };
        s.refresh();
        Ok(s)
    }

    /// Starts from a uniformly random state drawn from `rng`.
    pub fn with_random_start(model: &'m EnergyModel, beta: f64, mut rng: R) -> Result<Self> {
        let mut z = vec![1; model.size];
        fill_random_spins(&mut rng, &mut z);
        Self::new(model, beta, SpinConfig::from_vec_unchecked(z), rng)
    }

    fn refresh(&mut self) {
        let model = self.model;
        for t in 0..model.coefs.len() {
            self.term_val[t] = model.term_value(t, &self.z);
        }
        for m in 0..model.size {
            self.field[m] = model.terms_of(m).map(|t| model.coefs[t] * f64::from(self.term_val[t])).sum();
            self.tree.set(m, self.weight(m));
        }
    }

    #[inline]
    fn weight(&self, m: usize) -> f64 {
        let delta = -2.0 * self.field[m];
        if delta <= 0.0 {
            1.0
        } else {
            (-self.beta * delta).exp()
        }
    }

    /// Draws and applies one flip.
    pub fn step(&mut self) -> Flip {
        let total = self.tree.total();
        let m = if total > 1e-300 {
            let u = self.rng.random::<f64>() * total;
            let m = self.tree.find(u);
            debug_assert!(self.tree.get(m) > 0.0);
            m
        } else {
            self.select_underflow()
        };
        let delta = -2.0 * self.field[m];
        self.apply(m);
        self.energy += delta;
        self.steps += 1;
        if self.steps.is_multiple_of(FIELD_REFRESH) {
            self.refresh();
        }
        Flip { index: m, delta }
    }

    /// Exact selection when every weight underflowed: weights are rescaled
    /// by the largest one before exponentiating.
    fn select_underflow(&mut self) -> usize {
        let logw: Vec<f64> = (0..self.model.size).map(|m| -self.beta * (-2.0 * self.field[m]).max(0.0)).collect();
        let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
        let mut u = self.rng.random::<f64>() * w.iter().sum::<f64>();
        for (m, &wm) in w.iter().enumerate() {
            if u < wm {
                return m;
            }
            u -= wm;
        }
        w.iter().rposition(|&x| x > 0.0).expect("the largest weight is 1")
    }

    fn apply(&mut self, m: usize) {
        let model = self.model;
        self.z[m] = -self.z[m];
        for t in model.terms_of(m) {
            let old = self.term_val[t];
            self.term_val[t] = -old;
            let change = 2.0 * model.coefs[t] * f64::from(old);
            for &q in model.spins_of(t) {
                self.field[q] -= change;
            }
        }
        self.tree.set(m, self.weight(m));
        for &q in model.neighbors(m) {
            self.tree.set(q, self.weight(q));
        }
    }

    pub fn state(&self) -> &[i8] {
        &self.z
    }

    /// Running energy: initial energy plus every applied `ΔE`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Current selection probabilities, for diagnostics and tests.
    pub fn probabilities(&self) -> Vec<f64> {
        let w: Vec<f64> = (0..self.model.size).map(|m| self.weight(m)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }
}

/// Provenance of a [`SampleSequence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub scheme: Option<Scheme>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub instance_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    pub states: Vec<SpinConfig>,
    /// Energy of each state; empty for sequences drawn without a model.
    pub energies: Vec<f64>,
    /// Spin flipped to reach each state; empty for independent draws.
    pub flips: Vec<usize>,
    pub meta: SampleMeta,
}

impl SampleSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Tab-separated `step, flipped, energy` records with a header line.
    pub fn write_trace<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step\tflipped\tenergy")?;
        for t in 0..self.states.len() {
            let flip = self.flips.get(t).map_or(String::from("-"), |f| f.to_string());
            let energy = self.energies.get(t).map_or(String::from("-"), |e| e.to_string());
            writeln!(out, "{}\t{flip}\t{energy}", t + 1)?;
        }
        Ok(())
    }
}

/// Runs `m` rejection-free steps and records every visited state (the
/// initial state is not recorded). Draws the start state from the seeded
/// generator when `init` is `None`.
pub fn rf_mcmc_run(
    model: &EnergyModel,
    beta: f64,
    m: usize,
    seed: u64,
    init: Option<SpinConfig>,
) -> Result<SampleSequence> {
    check_beta(beta)?;
    if m < 1 {
        return invalid("sample count must be at least 1");
    }
    let rng = seeded_rng(seed);
    let mut sampler = match init {
        Some(z) => RejectionFreeSampler::new(model, beta, z, rng)?,
        None => RejectionFreeSampler::with_random_start(model, beta, rng)?,
    };
    let mut states = Vec::with_capacity(m);
    let mut energies = Vec::with_capacity(m);
    let mut flips = Vec::with_capacity(m);
    for _ in 0..m {
        let flip = sampler.step();
        flips.push(flip.index);
        energies.push(sampler.energy());
        states.push(SpinConfig::from_vec_unchecked(sampler.state().to_vec()));
    }
    Ok(SampleSequence {
        states,
        energies,
        flips,
        meta: SampleMeta { scheme: model.scheme, beta: Some(beta), gamma: None, seed, instance_id: None },
    })
}

/// `m` independent uniform draws from `{±1}^size`.
pub fn random_states(size: usize, m: usize, seed: u64) -> Result<SampleSequence> {
    if m < 1 {
        return invalid("sample count must be at least 1");
    }
    let mut rng = seeded_rng(seed);
    let states = (0..m).map(|_| SpinConfig::random(size, &mut rng as &mut dyn RngCore)).collect();
    Ok(SampleSequence {
        states,
        energies: Vec::new(),
        flips: Vec::new(),
        meta: SampleMeta { scheme: None, beta: None, gamma: None, seed, instance_id: None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, logical_energy};
    use crate::parity::encode;

    fn models(n: usize) -> Vec<EnergyModel> {
        let p = generate_instance(n, 0.25, 31).unwrap();
        vec![
            make_model(Scheme::Logical, &p, None).unwrap(),
            make_model(Scheme::Slhz, &p, Some(0.4)).unwrap(),
            make_model(Scheme::Slhz3, &p, Some(0.3)).unwrap(),
            make_model(Scheme::Me, &p, Some(0.8)).unwrap(),
        ]
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("chimera".parse::<Scheme>().is_err());
        assert_eq!(Scheme::Me.size(14), 70);
        assert_eq!(Scheme::Slhz.size(14), 91);
    }

    #[test]
    fn model_sizes_and_parameters() {
        let p = generate_instance(6, 0.25, 1).unwrap();
        assert_eq!(make_model(Scheme::Logical, &p, None).unwrap().size(), 6);
        assert!(make_model(Scheme::Slhz, &p, None).is_err());
        assert!(make_model(Scheme::Me, &p, Some(0.0)).is_err());
        assert_eq!(make_model(Scheme::Me, &p, Some(1.0)).unwrap().size(), 18);
    }

    #[test]
    fn codeword_energy_is_logical_energy() {
        let p = generate_instance(6, 0.25, 2).unwrap();
        let m = make_model(Scheme::Slhz, &p, Some(1.0)).unwrap();
        let z = SpinConfig::random(6, &mut seeded_rng(0));
        assert_eq!(m.energy(&encode(&z)).unwrap(), crate::parity::slhz_energy(&encode(&z), &p, 1.0).unwrap());
        assert!((m.energy(&encode(&z)).unwrap() - logical_energy(&p, &z).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn delta_matches_recompute() {
        let mut rng = seeded_rng(3);
        for model in models(7) {
            for _ in 0..500 {
                let z = SpinConfig::random(model.size(), &mut rng);
                let m = rng.random_range(0..model.size());
                let d = model.delta(&z, m).unwrap();
                let full = model.energy(&z.flipped(m)).unwrap() - model.energy(&z).unwrap();
                assert!((d - full).abs() <= 1e-12 * full.abs().max(1.0), "{:?}", model.scheme());
            }
        }
    }

    #[test]
    fn single_spin_alternates() {
        let model = EnergyModel::from_terms(1, vec![(0.7, vec![0])]).unwrap();
        let seq = rf_mcmc_run(&model, 2.0, 10, 5, Some(SpinConfig::all_up(1))).unwrap();
        for (t, s) in seq.states.iter().enumerate() {
            assert_eq!(s[0], if t % 2 == 0 { -1 } else { 1 });
        }
    }

    #[test]
    fn consecutive_states_differ_in_one_spin() {
        for model in models(5) {
            let seq = rf_mcmc_run(&model, 3.0, 2000, 9, None).unwrap();
            for w in seq.states.windows(2) {
                assert_eq!(w[0].hamming(&w[1]), 1);
            }
            for (t, s) in seq.states.iter().enumerate().step_by(97) {
                assert!((seq.energies[t] - model.energy(s).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn energies_follow_applied_deltas() {
        let p = generate_instance(6, 0.25, 4).unwrap();
        let model = make_model(Scheme::Slhz3, &p, Some(0.5)).unwrap();
        let rng = seeded_rng(1);
        let mut s = RejectionFreeSampler::with_random_start(&model, 4.0, rng).unwrap();
        let mut prev = s.energy();
        for _ in 0..1000 {
            let f = s.step();
            assert_eq!(s.energy(), prev + f.delta);
            prev = s.energy();
        }
    }

    #[test]
    fn runs_are_deterministic() {
        for model in models(6) {
            let a = rf_mcmc_run(&model, 2.5, 500, 77, None).unwrap();
            let b = rf_mcmc_run(&model, 2.5, 500, 77, None).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn infinite_or_negative_beta_rejected() {
        let model = &models(4)[0];
        assert!(rf_mcmc_run(model, f64::INFINITY, 5, 0, None).is_err());
        assert!(rf_mcmc_run(model, -1.0, 5, 0, None).is_err());
        assert!(rf_mcmc_run(model, f64::NAN, 5, 0, None).is_err());
        assert!(rf_mcmc_run(model, 1.0, 0, 0, None).is_err());
    }

    #[test]
    fn huge_beta_still_moves() {
        let model = &models(5)[0];
        let seq = rf_mcmc_run(model, 1e6, 200, 3, None).unwrap();
        assert_eq!(seq.len(), 200);
        for w in seq.states.windows(2) {
            assert_eq!(w[0].hamming(&w[1]), 1);
        }
    }

    #[test]
    fn random_states_shape() {
        let seq = random_states(1, 4, 8).unwrap();
        assert_eq!(seq.len(), 4);
        assert!(seq.states.iter().all(|s| s.len() == 1));
        assert_eq!(random_states(7, 50, 8).unwrap(), random_states(7, 50, 8).unwrap());
    }

    #[test]
    fn trace_has_one_line_per_step() {
        let model = &models(4)[1];
        let seq = rf_mcmc_run(model, 1.0, 12, 0, None).unwrap();
        let mut buf = Vec::new();
        seq.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.lines().nth(1).unwrap().starts_with("1\t"));
    }
}
