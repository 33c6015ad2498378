use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use randamp::bounds::{chernoff_bound, linear_fraction, relative_entropy};
use randamp::boxes::{
    bell_value, depolarize, ideal_quantum_box, make_adversarial_device, AdversarySpec, Behavior, DeviceOracle,
    SettingMeasure,
};
use randamp::extractor::{bits_to_hex, extract, hex_to_bits};
use randamp::ks_bell::{build_ks_model, SettingPair};
use randamp::protocol::standard_functional;
use randamp::seed::RunSeeds;
use randamp::sv_source::{SettingMap, Strategy as Bias, SvSource};

fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn setting() -> impl Strategy<Value = SettingPair> {
    (1u8..=9, 1u8..=9).prop_map(|(a, b)| SettingPair::new(a, b))
}

fn measure() -> impl Strategy<Value = SettingMeasure> {
    prop::collection::vec(0.01f64..1.0, 81).prop_map(|w| {
        let s: f64 = w.iter().sum();
        SettingMeasure::new(w.into_iter().map(|v| v / s).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bell_value_is_affine_under_mixing(alpha in 0.0f64..=1.0, eta in 0.0f64..=1.0, m in measure()) {
        let q = ideal_quantum_box(&build_ks_model());
        let a = depolarize(&q, eta).unwrap();
        let b = Behavior::uniform();
        let f = standard_functional();
        // a.mix(b, alpha) = alpha a + (1 - alpha) b
        let mixed = a.mix(&b, alpha);
        let expect = alpha * bell_value(&a, f, &m) + (1.0 - alpha) * bell_value(&b, f, &m);
        prop_assert!((bell_value(&mixed, f, &m) - expect).abs() < 1e-12);
        // white noise only ever raises the value of the ideal box
        prop_assert!(bell_value(&a, f, &m) >= 0.0);
    }

    #[test]
    fn device_output_law_ignores_future_settings(
        prefix in prop::collection::vec(setting(), 1..20),
        tail_a in prop::collection::vec(setting(), 0..10),
        tail_b in prop::collection::vec(setting(), 0..10),
        seed in any::<u64>(),
    ) {
        let q = Arc::new(ideal_quantum_box(&build_ks_model()));
        let u = Arc::new(Behavior::uniform());
        let trigger = vec![prefix[0]];
        let make = || make_adversarial_device(AdversarySpec::HistoryTrigger {
            pattern: trigger.clone(), first: q.clone(), second: u.clone(),
        }).unwrap();
        let run = |tail: &[SettingPair]| {
            let mut d = make();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut laws = Vec::new();
            for (i, &s) in prefix.iter().chain(tail).enumerate() {
                laws.push(d.round_distribution(i, s));
                d.respond(i, s, &mut rng);
            }
            laws.truncate(prefix.len());
            laws
        };
        prop_assert_eq!(run(&tail_a), run(&tail_b));
    }

    #[test]
    fn extractor_is_bilinear(
        l in 1usize..64,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut v = |_| (0..l).map(|_| rng.gen::<bool>()).collect::<Vec<bool>>();
        let (x1, x2, t1, t2) = (v(0), v(1), v(2), v(3));
        let m = l;
        let lhs = extract(&xor(&x1, &x2), &t1, m, l).unwrap();
        let rhs = xor(&extract(&x1, &t1, m, l).unwrap(), &extract(&x2, &t1, m, l).unwrap());
        prop_assert_eq!(lhs, rhs);
        let lhs = extract(&x1, &xor(&t1, &t2), m, l).unwrap();
        let rhs = xor(&extract(&x1, &t1, m, l).unwrap(), &extract(&x1, &t2, m, l).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sv_source_stays_in_band(eps in 0.0f64..0.49, seed in any::<u64>(), which in 0usize..4, n in 1usize..200) {
        let map = SettingMap::mod9();
        let strategy = match which {
            0 => Bias::Unbiased,
            1 => Bias::AvoidTarget { target: randamp::ks_bell::TARGET_SETTING },
            2 => Bias::ConstantBias { signs: vec![1, -1, 0] },
            _ => Bias::toward_setting(&map, SettingPair::new(9, 9)),
        };
        let mut s = SvSource::new(eps, strategy, &map, seed).unwrap();
        for _ in 0..n {
            let p = s.p_zero();
            prop_assert!(p >= 0.5 - eps - 1e-15 && p <= 0.5 + eps + 1e-15);
            s.next_bit();
        }
    }

    #[test]
    fn hex_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200)) {
        prop_assert_eq!(hex_to_bits(&bits_to_hex(&bits), bits.len()).unwrap(), bits);
    }

    #[test]
    fn chernoff_bound_is_monotone(zeta in 0.01f64..0.9, gap in 0.001f64..0.09, n in 1usize..5000) {
        let g = zeta + gap;
        let b = chernoff_bound(n, g, zeta).unwrap();
        prop_assert!(chernoff_bound(n + 1, g, zeta).unwrap() <= b);
        prop_assert!(chernoff_bound(n, (g + 0.01).min(1.0), zeta).unwrap() <= b);
        prop_assert!(relative_entropy(g, zeta).unwrap() >= 2.0 * gap * gap - 1e-15);
    }

    #[test]
    fn linear_fraction_postcondition(vals in prop::collection::vec(0.0f64..=1.0, 1..300), slack in 0.0f64..0.5) {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let delta = (mean * (1.0 + slack)).min(1.0);
        let set = linear_fraction(&vals, delta).unwrap();
        prop_assert!(set.len() as f64 >= (1.0 - delta.sqrt()) * vals.len() as f64 - 1e-9);
        prop_assert!(set.iter().all(|&i| vals[i] <= delta.sqrt()));
    }

    #[test]
    fn trial_seeds_are_stable(master in any::<u64>(), t in 0u64..1000) {
        prop_assert_eq!(RunSeeds::for_trial(master, t), RunSeeds::for_trial(master, t));
        prop_assert_ne!(RunSeeds::for_trial(master, t), RunSeeds::for_trial(master, t + 1));
    }
}

/// For every nonzero `x` and every output position, the extractor bit is
/// balanced over all `t`. Exhaustive for `L <= 12`; `L = 16` on a sample of `x`.
#[test]
fn extractor_is_balanced_for_small_blocks() {
    let bits = |v: u32, l: usize| (0..l).map(|i| v >> (l - 1 - i) & 1 == 1).collect::<Vec<_>>();
    for l in 1..=16usize {
        let xs: Vec<u32> = if l <= 12 {
            (1..1u32 << l).collect()
        } else {
            (0..40u32).map(|k| (k.wrapping_mul(2_654_435_761) % ((1 << l) - 1)) + 1).collect()
        };
        let ts: Vec<Vec<bool>> = (0..1u32 << l).map(|t| bits(t, l)).collect();
        for x in xs {
            let xb = bits(x, l);
            let mut ones = vec![0usize; l];
            for t in &ts {
                for (j, b) in extract(&xb, t, l, l).unwrap().into_iter().enumerate() {
                    ones[j] += b as usize;
                }
            }
            assert!(ones.iter().all(|&c| c == 1 << (l - 1)), "L={l} x={x:b}");
        }
    }
}
