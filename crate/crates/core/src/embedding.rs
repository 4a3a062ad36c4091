//! Triangular minor embedding of `K_n` into an `L x L` Chimera grid of
//! `K_{4,4}` cells, `L = ceil(n/4)`.
//!
//! Logical spins are grouped in blocks of four. The chain of spin `i` in
//! block `b` at position `p` runs along row `b` on the right-side qubit `p`
//! of cells `(b, 0) ..= (b, b)`, turns inside the diagonal cell through the
//! intra-cell coupler to left-side qubit `p`, then runs down column `b` on
//! left-side qubits through cells `(b+1, b) .. (L-1, b)`. Every chain has
//! `L + 1` qubits and two chains from blocks `b < b'` share exactly one
//! cell, `(b', b)`, where their crossing coupler lives.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::instances::LogicalProblem;
use crate::parity::{pair_count, pair_index};
use crate::spin::SpinConfig;

/// Left-side qubits couple vertically between cells, right-side horizontally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// A qubit position in the Chimera grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Site {
    pub row: usize,
    pub col: usize,
    pub side: Side,
    pub pos: usize,
}

impl Site {
    fn cell(&self) -> (usize, usize) {
        (self.row, self.col)
    }
}

/// Whether a physical coupler between two sites exists in Chimera.
pub fn chimera_coupler(a: Site, b: Site) -> bool {
    if a.cell() == b.cell() {
        return a.side != b.side;
    }
    if a.side != b.side || a.pos != b.pos {
        return false;
    }
    let dr = a.row.abs_diff(b.row);
    let dc = a.col.abs_diff(b.col);
    match a.side {
        Side::Left => dr == 1 && dc == 0,
        Side::Right => dr == 0 && dc == 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorEmbedding {
    n: usize,
    l: usize,
    /// Physical indices of each chain, in path order.
    chains: Vec<Vec<usize>>,
    chain_edges: Vec<(usize, usize)>,
    /// One coupler per logical pair in lexicographic pair order; the first
    /// endpoint lies in the lower-numbered chain.
    crossings: Vec<(usize, usize)>,
    sites: Vec<Site>,
    #[serde(skip)]
    owner: Vec<usize>,
}

pub fn build_embedding(n: usize) -> Result<MinorEmbedding> {
    MinorEmbedding::new(n)
}

impl MinorEmbedding {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("embedding needs at least 2 logical spins, got {n}"));
        }
        let l = n.div_ceil(4);
        let mut chains = Vec::with_capacity(n);
        let mut sites = Vec::with_capacity(n * (l + 1));
        let mut owner = Vec::with_capacity(n * (l + 1));
        let mut chain_edges = Vec::with_capacity(n * l);
        for i in 0..n {
            let (b, p) = (i / 4, i % 4);
            let row = (0..=b).map(|c| Site { row: b, col: c, side: Side::Right, pos: p });
            let col = (b..l).map(|r| Site { row: r, col: b, side: Side::Left, pos: p });
            let start = sites.len();
            sites.extend(row.chain(col));
            owner.resize(sites.len(), i);
            let chain: Vec<usize> = (start..sites.len()).collect();
            chain_edges.extend(chain.windows(2).map(|w| (w[0], w[1])));
            chains.push(chain);
        }

        let mut crossings = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in i + 1..n {
                // lexicographically first left-right coupler shared by the two chains
                let best = chains[i]
                    .iter()
                    .flat_map(|&a| chains[j].iter().map(move |&b| (a, b)))
                    .filter(|&(a, b)| sites[a].cell() == sites[b].cell() && sites[a].side != sites[b].side)
                    .min_by_key(|&(a, b)| {
                        let (left, right) = if sites[a].side == Side::Left { (a, b) } else { (b, a) };
                        (sites[a].row, sites[a].col, sites[left].pos, sites[right].pos)
                    });
                match best {
                    Some(edge) => crossings.push(edge),
                    None => return invalid(format!("chains {i} and {j} never meet")),
                }
            }
        }
        Ok(MinorEmbedding { n, l, chains, chain_edges, crossings, sites, owner })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid dimension `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Physical spin count `n (L + 1)`.
    pub fn k(&self) -> usize {
        self.sites.len()
    }

    pub fn chain_len(&self) -> usize {
        self.l + 1
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn chain_edges(&self) -> &[(usize, usize)] {
        &self.chain_edges
    }

    pub fn crossings(&self) -> &[(usize, usize)] {
        &self.crossings
    }

    /// Crossing coupler of logical pair `{i, j}`, oriented `(in chain i, in chain j)`.
    pub fn crossing(&self, i: usize, j: usize) -> (usize, usize) {
        if i < j {
            self.crossings[pair_index(self.n, i, j)]
        } else {
            let (a, b) = self.crossings[pair_index(self.n, j, i)];
            (b, a)
        }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// Logical spin whose chain holds physical spin `m`.
    pub fn owner(&self, m: usize) -> usize {
        self.owner[m]
    }

    /// Same qubits with chain `i` reassigned to logical spin `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<MinorEmbedding> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return invalid("relabeling must be a permutation of the logical spins");
        }
        let mut chains = vec![Vec::new(); n];
        for (i, c) in self.chains.iter().enumerate() {
            chains[perm[i]] = c.clone();
        }
        let mut owner = vec![0; self.k()];
        for (i, c) in chains.iter().enumerate() {
            for &m in c {
                owner[m] = i;
            }
        }
        let mut crossings = vec![(0, 0); pair_count(n)];
        for i in 0..n {
            for j in i + 1..n {
                let (pi, pj) = (perm[i], perm[j]);
                let (a, b) = self.crossings[pair_index(n, i, j)];
                let (lo, hi, edge) = if pi < pj { (pi, pj, (a, b)) } else { (pj, pi, (b, a)) };
                crossings[pair_index(n, lo, hi)] = edge;
            }
        }
        Ok(MinorEmbedding { chains, owner, crossings, ..self.clone() })
    }

    /// Checks every structural invariant; returns the list of violations.
    pub fn audit(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let k = self.k();
        if self.l != self.n.div_ceil(4) {
            bad.push(format!("grid dimension {} != ceil(n/4)", self.l));
        }
        if k != self.n * (self.l + 1) {
            bad.push(format!("k={k} != n(L+1)"));
        }
        let mut seen = vec![false; k];
        for (i, chain) in self.chains.iter().enumerate() {
            if chain.len() != self.l + 1 {
                bad.push(format!("chain {i} has {} spins", chain.len()));
            }
            for &m in chain {
                if m >= k || std::mem::replace(&mut seen[m], true) {
                    bad.push(format!("physical spin {m} reused or out of range"));
                } else if self.owner[m] != i {
                    bad.push(format!("owner of {m} is not {i}"));
                }
            }
            // connectivity through chain edges
            let members: BTreeSet<usize> = chain.iter().copied().collect();
            let mut reached = BTreeSet::from([chain[0]]);
            let mut grew = true;
            while grew {
                grew = false;
                for &(a, b) in &self.chain_edges {
                    if members.contains(&a) && members.contains(&b) && reached.contains(&a) != reached.contains(&b) {
                        reached.insert(a);
                        reached.insert(b);
                        grew = true;
                    }
                }
            }
            if reached.len() != members.len() {
                bad.push(format!("chain {i} is not connected"));
            }
        }
        if seen.iter().any(|s| !s) {
            bad.push("some physical spin belongs to no chain".into());
        }
        for &(a, b) in &self.chain_edges {
            if self.owner[a] != self.owner[b] {
                bad.push(format!("chain edge ({a},{b}) joins different chains"));
            }
        }
        let mut covered = BTreeSet::new();
        for &(a, b) in &self.crossings {
            let (i, j) = (self.owner[a], self.owner[b]);
            if i >= j || !covered.insert((i, j)) {
                bad.push(format!("crossing ({a},{b}) misoriented or duplicated"));
            }
        }
        if covered.len() != pair_count(self.n) {
            bad.push(format!("crossings cover {} of {} pairs", covered.len(), pair_count(self.n)));
        }
        let mut sites = BTreeSet::new();
        for s in &self.sites {
            if s.row >= self.l || s.col >= self.l || s.pos >= 4 || !sites.insert(*s) {
                bad.push(format!("site {s:?} out of grid or doubly occupied"));
            }
        }
        for &(a, b) in self.chain_edges.iter().chain(&self.crossings) {
            if !chimera_coupler(self.sites[a], self.sites[b]) {
                bad.push(format!("edge ({a},{b}) is not a Chimera coupler"));
            }
        }
        bad
    }

    /// JSON adjacency dump: chains, chain edges, crossings, qubit sites.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("embedding serialization cannot fail")
    }
}

/// Copies each logical spin onto every qubit of its chain.
pub fn embed(logical: &SpinConfig, e: &MinorEmbedding) -> SpinConfig {
    let z = logical.as_slice();
    SpinConfig::from_vec_unchecked((0..e.k()).map(|m| z[e.owner[m]]).collect())
}

/// Problem couplers on crossings plus ferromagnetic chain couplers of strength `C`.
#[derive(Debug, Clone)]
pub struct MeHamiltonian {
    embedding: MinorEmbedding,
    couplings: Vec<f64>,
    chain_strength: f64,
}

impl MeHamiltonian {
    pub fn new(problem: &LogicalProblem, embedding: MinorEmbedding, chain_strength: f64) -> Result<Self> {
        if !(chain_strength > 0.0 && chain_strength.is_finite()) {
            return invalid(format!("chain strength must be positive and finite, got {chain_strength}"));
        }
        if problem.n() != embedding.n() {
            return invalid(format!("embedding is for n={}, problem has n={}", embedding.n(), problem.n()));
        }
        Ok(MeHamiltonian { embedding, couplings: problem.couplings().to_vec(), chain_strength })
    }

    pub fn embedding(&self) -> &MinorEmbedding {
        &self.embedding
    }

    pub fn chain_strength(&self) -> f64 {
        self.chain_strength
    }

    /// `(a, b, J)` for every problem coupler.
    pub fn problem_couplers(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.embedding.crossings.iter().zip(&self.couplings).map(|(&(a, b), &j)| (a, b, j))
    }

    pub fn energy(&self, z: &SpinConfig) -> Result<f64> {
        if z.len() != self.embedding.k() {
            return invalid(format!("physical configuration has {} spins, expected {}", z.len(), self.embedding.k()));
        }
        Ok(self.energy_unchecked(z.as_slice()))
    }

    pub(crate) fn energy_unchecked(&self, z: &[i8]) -> f64 {
        let problem: f64 = self.problem_couplers().map(|(a, b, j)| j * f64::from(z[a] * z[b])).sum();
        let chain: f64 = self.embedding.chain_edges.iter().map(|&(a, b)| f64::from(z[a] * z[b])).sum();
        -problem - self.chain_strength * chain
    }
}

pub fn me_energy(z: &SpinConfig, e: &MinorEmbedding, problem: &LogicalProblem, chain_strength: f64) -> Result<f64> {
    MeHamiltonian::new(problem, e.clone(), chain_strength)?.energy(z)
}

/// Indices of chains whose qubits disagree.
pub fn broken_chains(z: &SpinConfig, e: &MinorEmbedding) -> Vec<usize> {
    let z = z.as_slice();
    e.chains.iter().enumerate().filter(|(_, c)| c.iter().any(|&m| z[m] != z[c[0]])).map(|(i, _)| i).collect()
}

pub fn chain_intact(z: &SpinConfig, e: &MinorEmbedding) -> bool {
    let z = z.as_slice();
    e.chains.iter().all(|c| c.iter().all(|&m| z[m] == z[c[0]]))
}

/// The logical state of an unbroken readout.
pub fn unanimous_logical(z: &SpinConfig, e: &MinorEmbedding) -> Option<SpinConfig> {
    chain_intact(z, e).then(|| SpinConfig::from_vec_unchecked(e.chains.iter().map(|c| z[c[0]]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, logical_energy};
    use crate::spin::seeded_rng;

    #[test]
    fn sizes_follow_chain_formula() {
        for (n, l, k) in [(14, 4, 70), (8, 2, 24), (4, 1, 8), (2, 1, 4), (5, 2, 15)] {
            let e = build_embedding(n).unwrap();
            assert_eq!((e.l(), e.k(), e.chain_len()), (l, k, l + 1), "n={n}");
        }
        assert_eq!(build_embedding(14).unwrap().chain_edges().len(), 56);
        assert!(build_embedding(1).is_err());
    }

    #[test]
    fn four_spins_fit_one_cell() {
        let e = build_embedding(4).unwrap();
        for &(a, b) in e.crossings() {
            assert_eq!((e.sites()[a].row, e.sites()[a].col), (0, 0));
            assert_eq!((e.sites()[b].row, e.sites()[b].col), (0, 0));
        }
        assert_eq!(e.crossings().len(), 6);
    }

    #[test]
    fn audit_is_clean() {
        for n in 2..=32 {
            let e = build_embedding(n).unwrap();
            assert!(e.audit().is_empty(), "n={n}: {:?}", e.audit());
        }
    }

    #[test]
    fn audit_catches_non_local_edges() {
        let mut e = build_embedding(8).unwrap();
        e.crossings[0] = (e.chains[0][0], e.chains[1][2]);
        assert!(!e.audit().is_empty());
    }

    #[test]
    fn energy_offset_identity() {
        let p = generate_instance(8, 0.25, 21).unwrap();
        let e = build_embedding(8).unwrap();
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let z = SpinConfig::random(8, &mut rng);
            let c = 0.6;
            let lhs = me_energy(&embed(&z, &e), &e, &p, c).unwrap();
            let rhs = logical_energy(&p, &z).unwrap() - c * e.chain_edges().len() as f64;
            assert!((lhs - rhs).abs() < 1e-12);
        }
        assert!(me_energy(&embed(&SpinConfig::all_up(8), &e), &e, &p, 0.0).is_err());
    }

    #[test]
    fn flipping_interior_chain_spin_breaks_two_edges() {
        let p = generate_instance(14, 0.25, 2).unwrap();
        let e = build_embedding(14).unwrap();
        let z = embed(&SpinConfig::random(14, &mut seeded_rng(8)), &e);
        let c = 1.3;
        let h = MeHamiltonian::new(&p, e.clone(), c).unwrap();
        let m = e.chains()[3][2];
        // interior qubit: two chain edges, and it may carry problem couplers
        let couplers: f64 = h
            .problem_couplers()
            .filter(|&(a, b, _)| a == m || b == m)
            .map(|(a, b, j)| 2.0 * j * f64::from(z[a] * z[b]))
            .sum();
        let delta = h.energy(&z.flipped(m)).unwrap() - h.energy(&z).unwrap();
        assert!((delta - (2.0 * 2.0 * c + couplers)).abs() < 1e-12);
    }

    #[test]
    fn chain_checks() {
        let e = build_embedding(6).unwrap();
        let z = SpinConfig::random(6, &mut seeded_rng(1));
        let emb = embed(&z, &e);
        assert!(chain_intact(&emb, &e));
        assert_eq!(embed(&z.negated(), &e), emb.negated());
        assert_eq!(embed(&SpinConfig::all_up(6), &e), SpinConfig::all_up(e.k()));
        let broken = emb.flipped(e.chains()[4][1]);
        assert!(!chain_intact(&broken, &e));
        assert_eq!(broken_chains(&broken, &e), vec![4]);
        let mut whole = emb.clone();
        for &m in &e.chains()[2] {
            whole.flip(m);
        }
        assert!(chain_intact(&whole, &e));
        assert_eq!(unanimous_logical(&whole, &e).unwrap(), z.flipped(2));
    }

    #[test]
    fn relabeling_permutes_chains() {
        let e = build_embedding(6).unwrap();
        let perm = [3, 0, 5, 1, 2, 4];
        let r = e.relabeled(&perm).unwrap();
        assert!(r.audit().is_empty(), "{:?}", r.audit());
        assert_eq!(r.chains()[3], e.chains()[0]);
        assert!(e.relabeled(&[0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn dump_lists_everything() {
        let e = build_embedding(5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["chains"].as_array().unwrap().len(), 5);
        assert_eq!(v["crossings"].as_array().unwrap().len(), 10);
        assert_eq!(v["sites"].as_array().unwrap().len(), 15);
    }
}
