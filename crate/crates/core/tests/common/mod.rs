#![allow(dead_code)]

use anneal_fair::model::{GbpInstance, IsingModel};
use anneal_fair::spin::SpinConfiguration;
use proptest::prelude::*;

/// Cut weight straight from the edge list, independent of any encoding.
pub fn cut(inst: &GbpInstance, bits: u64) -> u64 {
    inst.edges()
        .iter()
        .filter(|e| (bits >> e.i & 1) != (bits >> e.j & 1))
        .map(|e| e.weight)
        .sum()
}

pub fn magnetization(n: usize, bits: u64) -> i64 {
    n as i64 - 2 * (bits & ((1u64 << n) - 1)).count_ones() as i64
}

/// Brute-force balanced optimum and its configurations, as sorted bitmasks.
pub fn brute_optimum(inst: &GbpInstance) -> (u64, Vec<u64>) {
    let n = inst.n();
    let mut best = u64::MAX;
    let mut set = Vec::new();
    for bits in 0..1u64 << n {
        if magnetization(n, bits) != 0 {
            continue;
        }
        let c = cut(inst, bits);
        if c < best {
            best = c;
            set.clear();
        }
        if c == best {
            set.push(bits);
        }
    }
    (best, set)
}

/// Smallest penalty weight above which no unbalanced partition reaches the
/// balanced optimum: `max (e_opt − cut) / m²` over unbalanced `m`, floored
/// at zero, in exact rational arithmetic.
pub fn brute_mu_threshold(inst: &GbpInstance) -> (i64, i64) {
    let n = inst.n();
    let (e_opt, _) = brute_optimum(inst);
    let mut best = (0i64, 1i64);
    for bits in 0..1u64 << n {
        let m = magnetization(n, bits);
        if m == 0 {
            continue;
        }
        let num = e_opt as i64 - cut(inst, bits) as i64;
        let den = m * m;
        if num * best.1 > best.0 * den {
            best = (num, den);
        }
    }
    best
}

/// Energy `E(σ) = offset − Σ h σ − Σ J σσ` evaluated term by term.
pub fn brute_energy(model: &IsingModel, bits: u64) -> f64 {
    let s = |i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
    let mut e = model.offset();
    for (i, h) in model.fields().iter().enumerate() {
        e -= h * s(i);
    }
    for (i, j, v) in model.couplings() {
        e -= v * s(i) * s(j);
    }
    e
}

pub fn configs(n: usize, bits: &[u64]) -> Vec<SpinConfiguration> {
    bits.iter().map(|&b| SpinConfiguration::new(n, b).unwrap()).collect()
}

/// Random instance on an even vertex count in `sizes`, weights in `1..=n`.
pub fn instance(sizes: &'static [usize]) -> impl Strategy<Value = GbpInstance> {
    prop::sample::select(sizes).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec(prop::option::weighted(0.6, 1..=n as u64), pairs).prop_map(move |ws| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if let Some(w) = ws[k] {
                        edges.push((i, j, w));
                    }
                    k += 1;
                }
            }
            GbpInstance::new(n, edges).unwrap()
        })
    })
}

/// Random Ising model with fields and all-to-all couplings on quarter-unit
/// values, so energy sums are exact in floating point.
pub fn ising(n_range: std::ops::RangeInclusive<usize>, with_fields: bool) -> impl Strategy<Value = IsingModel> {
    n_range.prop_flat_map(move |n| {
        let q = || (-8i32..=8).prop_map(|v| v as f64 / 4.0);
        (
            q(),
            prop::collection::vec(q(), n),
            prop::collection::vec(q(), n * (n - 1) / 2),
        )
            .prop_map(move |(offset, h, js)| {
                let h = if with_fields { h } else { vec![0.0; n] };
                let mut couplings = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        couplings.push((i, j, js[k]));
                        k += 1;
                    }
                }
                IsingModel::new(n, offset, h, couplings).unwrap()
            })
    })
}

pub fn gauge_mask(n: usize) -> impl Strategy<Value = u64> {
    0..1u64 << n
}
