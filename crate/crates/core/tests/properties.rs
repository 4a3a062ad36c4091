use parity_bench::decoders::{bf_decode, bf_step, from_matrix, majority_vote, to_matrix, ParityMatrix};
use parity_bench::embedding::{build_embedding, embed, me_energy};
use parity_bench::instances::{from_json_str, generate_instance, logical_energy, to_json_string};
use parity_bench::parity::{build_plaquettes, build_triads, encode, slhz3_energy, slhz_energy, syndrome, PairCodebook};
use parity_bench::sampler::{make_model, Scheme};
use parity_bench::spin::{seeded_rng, SpinConfig};
use proptest::prelude::*;

fn spins(len: usize) -> impl Strategy<Value = SpinConfig> {
    prop::collection::vec(prop::bool::ANY, len)
        .prop_map(|b| SpinConfig::new(b.into_iter().map(|u| if u { 1 } else { -1 }).collect()).unwrap())
}

fn instance_and_spins() -> impl Strategy<Value = (usize, u64, SpinConfig)> {
    (2usize..12, any::<u64>()).prop_flat_map(|(n, seed)| (Just(n), Just(seed), spins(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn logical_energy_is_flip_symmetric((n, seed, z) in instance_and_spins()) {
        let p = generate_instance(n, 0.25, seed).unwrap();
        prop_assert_eq!(logical_energy(&p, &z).unwrap(), logical_energy(&p, &z.negated()).unwrap());
    }

    #[test]
    fn codewords_carry_logical_energy((n, seed, z) in instance_and_spins(), c in 0.01f64..10.0) {
        prop_assume!(n >= 3);
        let p = generate_instance(n, 0.25, seed).unwrap();
        let e = logical_energy(&p, &z).unwrap();
        let code = encode(&z);
        prop_assert!((slhz_energy(&code, &p, c).unwrap() - e).abs() < 1e-12);
        prop_assert!((slhz3_energy(&code, &p, c).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn me_energy_is_flip_symmetric(n in 2usize..10, seed in any::<u64>(), bits in any::<u64>(), c in 0.01f64..10.0) {
        let p = generate_instance(n, 0.25, seed).unwrap();
        let e = build_embedding(n).unwrap();
        let z = SpinConfig::from_mask(bits, e.k().min(64));
        prop_assume!(z.len() == e.k());
        let a = me_energy(&z, &e, &p, c).unwrap();
        let b = me_energy(&z.negated(), &e, &p, c).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn delta_matches_recompute(n in 3usize..9, seed in any::<u64>(), state_seed in any::<u64>(), c in 0.05f64..5.0) {
        let p = generate_instance(n, 0.25, seed).unwrap();
        let mut rng = seeded_rng(state_seed);
        for scheme in Scheme::ALL {
            let model = make_model(scheme, &p, scheme.is_penalized().then_some(c)).unwrap();
            let z = SpinConfig::random(model.size(), &mut rng);
            for m in 0..model.size() {
                let reference = model.energy(&z.flipped(m)).unwrap() - model.energy(&z).unwrap();
                prop_assert!((model.delta(&z, m).unwrap() - reference).abs() <= 1e-12 * reference.abs().max(1.0));
            }
        }
    }

    #[test]
    fn instance_json_round_trips(n in 2usize..16, seed in any::<u64>(), half in 0.01f64..3.0) {
        let p = generate_instance(n, half, seed).unwrap();
        let text = to_json_string(&p);
        let back = from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.id(), p.id());
        prop_assert_eq!(to_json_string(&back), text);
    }

    #[test]
    fn spin_config_serde_round_trips(z in (1usize..80).prop_flat_map(spins)) {
        let text = serde_json::to_string(&z).unwrap();
        prop_assert_eq!(serde_json::from_str::<SpinConfig>(&text).unwrap(), z);
    }

    #[test]
    fn matrix_round_trips(n in 2usize..12, bits in prop::collection::vec(any::<bool>(), 66)) {
        let k = n * (n - 1) / 2;
        let r = SpinConfig::new(bits[..k].iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap();
        let m = to_matrix(&r, &PairCodebook::new(n).unwrap()).unwrap();
        prop_assert!(m.is_symmetric() && m.has_unit_diagonal());
        prop_assert_eq!(from_matrix(&m), r);
    }

    #[test]
    fn bf_step_keeps_matrix_shape(n in 3usize..14, bits in prop::collection::vec(any::<bool>(), 91)) {
        let k = n * (n - 1) / 2;
        let r = SpinConfig::new(bits[..k].iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap();
        let m = to_matrix(&r, &PairCodebook::new(n).unwrap()).unwrap();
        let next = bf_step(&m);
        prop_assert!(next.is_symmetric() && next.has_unit_diagonal());
    }

    #[test]
    fn converged_output_satisfies_every_check(n in 3usize..10, bits in prop::collection::vec(any::<bool>(), 45)) {
        let k = n * (n - 1) / 2;
        let r = SpinConfig::new(bits[..k].iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap();
        let out = bf_decode(&r, &PairCodebook::new(n).unwrap(), 6).unwrap();
        if out.converged {
            prop_assert!(build_plaquettes(n).unwrap().iter().all(|c| syndrome(&out.codeword, c) == 1));
            prop_assert!(build_triads(n).unwrap().iter().all(|c| syndrome(&out.codeword, c) == 1));
            prop_assert_eq!(encode(&out.logical), out.codeword.clone());
            prop_assert_eq!(out.logical[0], 1);
        }
    }

    #[test]
    fn codeword_matrix_is_outer_product(z in (2usize..14).prop_flat_map(spins)) {
        let n = z.len();
        let m = to_matrix(&encode(&z), &PairCodebook::new(n).unwrap()).unwrap();
        prop_assert!(m.is_codeword());
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m.get(i, j), z[i] * z[j]);
            }
        }
        prop_assert_eq!(bf_step(&m), m);
    }

    #[test]
    fn majority_vote_commutes_with_relabeling(
        perm in (5usize..9).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()),
        seed in any::<u64>(),
    ) {
        // odd chain length, so no coin is ever used
        let n = perm.len();
        let e = build_embedding(n).unwrap();
        prop_assert_eq!(e.chain_len() % 2, 1);
        let relabeled = e.relabeled(&perm).unwrap();
        let z = SpinConfig::random(e.k(), &mut seeded_rng(seed));
        let a = majority_vote(z.as_slice(), &e, &mut seeded_rng(0));
        let b = majority_vote(z.as_slice(), &relabeled, &mut seeded_rng(0));
        for i in 0..n {
            prop_assert_eq!(b[perm[i]], a[i]);
        }
    }

    #[test]
    fn embedded_states_decode_to_themselves(z in (2usize..20).prop_flat_map(spins), seed in any::<u64>()) {
        let e = build_embedding(z.len()).unwrap();
        prop_assert_eq!(majority_vote(embed(&z, &e).as_slice(), &e, &mut seeded_rng(seed)), z);
    }
}

#[test]
fn relabeled_embedding_passes_audit() {
    let e = build_embedding(9).unwrap();
    let r = e.relabeled(&[3, 0, 8, 1, 2, 7, 6, 4, 5]).unwrap();
    assert!(r.audit().is_empty(), "{:?}", r.audit());
}

#[test]
fn parity_matrix_rejects_asymmetry() {
    assert!(ParityMatrix::from_rows(&[vec![1, -1], vec![1, 1]]).is_err());
}
