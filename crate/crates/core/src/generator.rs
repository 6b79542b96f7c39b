//! Random weighted graphs filtered by connectivity and ground-state
//! degeneracy.
//!
//! Randomness comes from ChaCha8. Instance `k` of a batch with base seed `S`
//! draws from its own stream seeded with `S ^ splitmix64(k)`, so batches are
//! identical whatever order or thread count produces them. A stream seed `s`
//! becomes the 32-byte ChaCha key formed by the first four `splitmix64`
//! outputs of state `s`, little-endian. Draws are portable:
//!
//! * `u = (next_u64 >> 11) / 2^53` is a uniform double in `[0, 1)`;
//! * pairs `(i, j)` with `i < j` are visited in lexicographic order, and an
//!   edge is present when `u < edge_prob`;
//! * a present edge then takes weight `lo + ⌊u·(hi − lo + 1)⌋` from a fresh `u`.

use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GbpInstance;
use crate::oracle::{self, OracleReport};

pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `k` under base seed `seed`.
pub fn stream_seed(seed: u64, k: u64) -> u64 {
    let mut s = k;
    seed ^ splitmix64(&mut s)
}

pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub edge_prob: f64,
    pub weight_range: (u64, u64),
    pub target_flip_classes: usize,
    pub seed: u64,
    pub max_attempts: u64,
}

impl GenSpec {
    /// Defaults: edge probability 0.5, weights uniform on `[1, n]`, two
    /// spin-flip classes (`D = 4`), at most 10⁶ attempts.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            edge_prob: 0.5,
            weight_range: (1, n as u64),
            target_flip_classes: 2,
            seed,
            max_attempts: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "vertex count must be a positive even integer, got {}",
                self.n
            )));
        }
        if self.n > oracle::MAX_ENUMERATION_SPINS {
            return Err(Error::TooLarge {
                what: "filtered generation",
                n: self.n,
                max: oracle::MAX_ENUMERATION_SPINS,
            });
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "edge probability must lie in (0, 1], got {}",
                self.edge_prob
            )));
        }
        let (lo, hi) = self.weight_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!("weight range [{lo}, {hi}] is empty or non-positive")));
        }
        if self.target_flip_classes == 0 {
            return Err(Error::InvalidArgument("target flip classes must be positive".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidArgument("max attempts must be positive".into()));
        }
        Ok(())
    }
}

/// Weighted edge list of one random graph, before the connectivity check.
pub fn random_edges(spec: &GenSpec, rng: &mut impl RngCore) -> Vec<(usize, usize, u64)> {
    let (lo, hi) = spec.weight_range;
    let span = (hi - lo + 1) as f64;
    let mut edges = Vec::new();
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            if uniform(rng) < spec.edge_prob {
                let w = lo + (uniform(rng) * span) as u64;
                edges.push((i, j, w.min(hi)));
            }
        }
    }
    edges
}

/// One draw; `None` when the graph is disconnected.
pub fn random_graph(spec: &GenSpec, rng: &mut impl RngCore) -> Option<GbpInstance> {
    let inst = GbpInstance::new(spec.n, random_edges(spec, rng)).expect("generated edges are valid");
    is_connected(&inst).then_some(inst)
}

/// Breadth-first reachability of every vertex from vertex 0.
pub fn is_connected(inst: &GbpInstance) -> bool {
    let n = inst.n();
    let mut adj = vec![Vec::new(); n];
    for e in inst.edges() {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedInstance {
    pub index: u64,
    pub seed: u64,
    pub attempts: u64,
    pub instance: GbpInstance,
    pub report: OracleReport,
}

/// Draw from the stream seeded by `spec.seed` until the oracle reports the
/// target number of spin-flip classes.
pub fn generate_filtered(spec: &GenSpec) -> Result<(GbpInstance, OracleReport, u64)> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed);
    for attempt in 1..=spec.max_attempts {
        let Some(inst) = random_graph(spec, &mut rng) else {
            continue;
        };
        let report = oracle::analyze(&inst)?;
        if report.spin_flip_classes.len() == spec.target_flip_classes {
            log::debug!("n={} seed={} accepted after {attempt} attempts", spec.n, spec.seed);
            return Ok((inst, report, attempt));
        }
    }
    Err(Error::GenerationExhausted {
        attempts: spec.max_attempts,
    })
}

/// Instance `index` of the batch with base seed `spec.seed`.
pub fn generate_indexed(spec: &GenSpec, index: u64) -> Result<GeneratedInstance> {
    let seed = stream_seed(spec.seed, index);
    let (instance, report, attempts) = generate_filtered(&GenSpec { seed, ..*spec })?;
    Ok(GeneratedInstance {
        index,
        seed,
        attempts,
        instance,
        report,
    })
}

/// Instances `0..count`, generated in parallel and returned in index order.
pub fn generate_batch(spec: &GenSpec, count: usize) -> Result<Vec<GeneratedInstance>> {
    spec.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|k| generate_indexed(spec, k))
        .collect()
}

pub fn instance_file_name(n: usize, seed: u64, index: u64) -> String {
    format!("gbp_n{n}_seed{seed}_k{index}.json")
}

pub fn manifest_csv(batch: &[GeneratedInstance]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "seed", "attempts", "D", "e_opt", "mu_threshold"])
        .expect("in-memory write");
    for g in batch {
        w.write_record([
            g.index.to_string(),
            g.seed.to_string(),
            g.attempts.to_string(),
            g.report.degeneracy.to_string(),
            g.report.e_opt.to_string(),
            g.report.mu_threshold.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Write one JSON file per instance plus `manifest.csv` into `dir`.
pub fn write_batch(dir: &Path, spec: &GenSpec, batch: &[GeneratedInstance]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for g in batch {
        g.instance.save(dir.join(instance_file_name(spec.n, spec.seed, g.index)))?;
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest_csv(batch)).map_err(|e| Error::io(&path, e))
}
