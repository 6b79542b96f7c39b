mod common;

use anneal_fair::fairness;
use anneal_fair::ingest::{
    apply_gauge_samples, degauge, emit_csv, emit_json, empirical_fairness, parse_csv, parse_json, SampleBatch,
    SampleSet,
};
use anneal_fair::model::{GaugeVector, GbpInstance};
use anneal_fair::spin::SpinConfiguration;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn four_cycle() -> GbpInstance {
    GbpInstance::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap()
}

fn sample_set(n: usize) -> impl Strategy<Value = SampleSet> {
    let entry = (0..1u64 << n, 1..50u64).prop_map(move |(b, k)| (SpinConfiguration::new(n, b).unwrap(), k));
    prop::collection::vec(prop::collection::vec(entry, 1..12), 1..4).prop_map(move |batches| SampleSet {
        n,
        batches: batches.into_iter().map(|entries| SampleBatch { gauge: None, entries }).collect(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degauge_undoes_gauging_exactly(set in sample_set(6), mask in 0..64u64, inst in instance(&[6])) {
        let g = GaugeVector::from_flip_mask(6, mask);
        let gauged = apply_gauge_samples(&set, &g).unwrap();
        prop_assert!(gauged.is_gauged());
        prop_assert_eq!(degauge(&gauged).unwrap(), set.clone());
        prop_assert_eq!(empirical_fairness(&gauged, &inst).unwrap(), empirical_fairness(&set, &inst).unwrap());
    }

    #[test]
    fn classification_partitions_total(set in sample_set(6), inst in instance(&[6])) {
        let r = empirical_fairness(&set, &inst).unwrap();
        prop_assert_eq!(r.counts.optimal + r.counts.suboptimal + r.counts.infeasible, r.total);
        prop_assert_eq!(r.ground_states.iter().map(|g| g.count).sum::<u64>(), r.counts.optimal);
        let (e_opt, _) = brute_optimum(&inst);
        let opt: u64 = set
            .entries()
            .filter(|(c, _)| c.is_balanced() && cut(&inst, c.bits()) == e_opt)
            .map(|e| e.1)
            .sum();
        prop_assert_eq!(r.counts.optimal, opt);
    }

    #[test]
    fn emit_parse_round_trip(set in sample_set(5), mask in 0..32u64) {
        let mut set = set;
        set.batches[0] = apply_gauge_samples(
            &SampleSet { n: 5, batches: vec![set.batches[0].clone()] },
            &GaugeVector::from_flip_mask(5, mask),
        )
        .unwrap()
        .batches
        .remove(0);
        prop_assert_eq!(parse_csv(&emit_csv(&set)).unwrap(), set.clone());
        prop_assert_eq!(parse_json(&emit_json(&set)).unwrap(), set);
    }
}

/// Gauged hardware-style file: the four ground states with counts
/// (153, 183, 182, 153) plus 300 suboptimal and 29 unbalanced samples,
/// spread over two gauged batches and an ungauged one.
#[test]
fn gauged_file_reproduces_known_fairness() {
    let inst = four_cycle();
    let entries: Vec<(SpinConfiguration, u64)> = [
        ("++--", 153),
        ("--++", 183),
        ("+--+", 182),
        ("-++-", 153),
        ("+-+-", 300),
        ("++++", 29),
    ]
    .iter()
    .map(|(c, k)| (c.parse().unwrap(), *k))
    .collect();
    let set = SampleSet {
        n: 4,
        batches: vec![SampleBatch { gauge: None, entries: entries.clone() }],
    };
    let mut text = String::from("config,count\n");
    for (k, mask) in [0b0110u64, 0b1111].into_iter().enumerate() {
        let part = SampleSet {
            n: 4,
            batches: vec![SampleBatch {
                gauge: None,
                entries: entries[2 * k..2 * k + 2].to_vec(),
            }],
        };
        let g = apply_gauge_samples(&part, &GaugeVector::from_flip_mask(4, mask)).unwrap();
        text.push_str(emit_csv(&g).trim_start_matches("config,count\n"));
    }
    text.push_str("gauge,none\n");
    for (c, k) in &entries[4..] {
        text.push_str(&format!("{},{k}\n", c.to_bitstring()));
    }
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.batches.len(), 3);
    assert_eq!(parsed.total(), 1000);
    let r = empirical_fairness(&parsed, &inst).unwrap();
    assert_eq!(r, empirical_fairness(&set, &inst).unwrap());
    assert_eq!(r.counts.optimal, 671);
    assert_eq!(r.counts.suboptimal, 300);
    assert_eq!(r.counts.infeasible, 29);
    assert!((r.p_gs - 0.671).abs() < 1e-12);
    let s = r.entropy.unwrap();
    assert_eq!(s, fairness::entropy(&[153.0, 183.0, 182.0, 153.0]).unwrap());
    assert!((s - 1.994).abs() < 1e-3);
}

/// 10⁶ draws from a known distribution reproduce its entropy and ground-state
/// probability within three standard errors.
#[test]
fn empirical_entropy_converges() {
    let inst = four_cycle();
    let ground = ["++--", "--++", "+--+", "-++-"];
    let p = [0.30, 0.25, 0.20, 0.15];
    let other = ["+-+-", "++++", "+---"];
    let p_other = [0.05, 0.03, 0.02];
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let draws = 1_000_000u64;
    let mut counts = [0u64; 7];
    let cdf: Vec<f64> = p
        .iter()
        .chain(&p_other)
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    for _ in 0..draws {
        let u: f64 = rng.random();
        let k = cdf.iter().position(|c| u < *c).unwrap_or(6);
        counts[k] += 1;
    }
    let entries = ground
        .iter()
        .chain(&other)
        .zip(counts)
        .filter(|e| e.1 > 0)
        .map(|(c, k)| (c.parse().unwrap(), k))
        .collect();
    let set = SampleSet {
        n: 4,
        batches: vec![SampleBatch { gauge: None, entries }],
    };
    let r = empirical_fairness(&set, &inst).unwrap();
    let p_gs: f64 = p.iter().sum();
    assert!((r.p_gs - p_gs).abs() <= 3.0 * r.p_gs_se);
    let q: Vec<f64> = p.iter().map(|x| x / p_gs).collect();
    let s_true = fairness::entropy(&q).unwrap();
    // delta-method standard error of the plug-in entropy
    let n_gs = r.counts.optimal as f64;
    let var = q.iter().map(|x| x * x.log2().powi(2)).sum::<f64>() - s_true * s_true;
    let se = (var / n_gs).sqrt();
    let s = r.entropy.unwrap();
    assert!((s - s_true).abs() <= 3.0 * se, "S = {s}, expected {s_true} ± {}", 3.0 * se);
    for g in &r.ground_states {
        let k = ground.iter().position(|c| c.parse::<SpinConfiguration>().unwrap() == g.config).unwrap();
        assert!((g.p - p[k]).abs() <= 3.0 * g.se, "{}: {} vs {}", g.config, g.p, p[k]);
    }
}

#[test]
fn degenerate_extremes() {
    let inst = four_cycle();
    let one = SampleSet {
        n: 4,
        batches: vec![SampleBatch {
            gauge: None,
            entries: vec![("++--".parse().unwrap(), 10)],
        }],
    };
    let r = empirical_fairness(&one, &inst).unwrap();
    assert_eq!((r.p_gs, r.entropy), (1.0, Some(0.0)));
    let uniform = SampleSet {
        n: 4,
        batches: vec![SampleBatch {
            gauge: None,
            entries: ["++--", "--++", "+--+", "-++-"].iter().map(|c| (c.parse().unwrap(), 7)).collect(),
        }],
    };
    assert_eq!(empirical_fairness(&uniform, &inst).unwrap().entropy, Some(2.0));
}
