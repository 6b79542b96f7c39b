//! Graph bipartitioning instances and their Ising encodings.
//!
//! Energies follow the convention
//!
//! ```text
//! E(σ) = offset − Σ_i h_i σ_i − Σ_{i<j} J_ij σ_i σ_j
//! ```
//!
//! so a positive `J_ij` is ferromagnetic. External tools that use the opposite
//! sign must negate `h` and `J` at the boundary. Offsets are carried so that
//! classical energies equal cut weights; the quantum dynamics drops them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spin::SpinConfiguration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: u64,
}

/// Weighted undirected graph with an even number of vertices.
///
/// Edges are kept sorted by endpoint pair with `i < j`, which makes the JSON
/// form canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GbpInstance {
    n: usize,
    edges: Vec<Edge>,
}

impl GbpInstance {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, u64)>) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInstance(format!(
                "vertex count must be a positive even integer, got {n}"
            )));
        }
        let mut out: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidInstance(format!("self-loop on vertex {a}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            if w == 0 {
                return Err(Error::InvalidInstance(format!(
                    "edge ({i}, {j}) has non-positive weight"
                )));
            }
            out.push(Edge { i, j, weight: w });
        }
        out.sort();
        if let Some(w) = out.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidInstance(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Total weight of edges whose endpoints lie on opposite sides.
    pub fn cut_weight(&self, config: &SpinConfiguration) -> u64 {
        let bits = config.bits();
        self.edges
            .iter()
            .filter(|e| (bits >> e.i ^ bits >> e.j) & 1 == 1)
            .map(|e| e.weight)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the canonical compact JSON form, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    edges: Vec<(usize, usize, u64)>,
}

impl Serialize for GbpInstance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceRepr {
            n: self.n,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.weight)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GbpInstance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = InstanceRepr::deserialize(d)?;
        GbpInstance::new(repr.n, repr.edges).map_err(D::Error::custom)
    }
}

/// Classical Ising Hamiltonian with local fields, pair couplings and a
/// constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    offset: f64,
    h: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
}

impl IsingModel {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            offset: 0.0,
            h: vec![0.0; n],
            couplings: BTreeMap::new(),
        }
    }

    pub fn new(
        n: usize,
        offset: f64,
        h: Vec<f64>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.len(),
            });
        }
        if !offset.is_finite() || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite model entry".into()));
        }
        let mut map = BTreeMap::new();
        for (a, b, v) in couplings {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == j || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "coupling ({a}, {b}) invalid for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument("non-finite coupling".into()));
            }
            *map.entry((i, j)).or_insert(0.0) += v;
        }
        Ok(Self {
            n,
            offset,
            h,
            couplings: map,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.couplings.get(&key).copied().unwrap_or(0.0)
    }

    pub fn has_fields(&self) -> bool {
        self.h.iter().any(|&v| v != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0.0 && !self.has_fields() && self.couplings.values().all(|&v| v == 0.0)
    }

    /// Every term multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            offset: self.offset * c,
            h: self.h.iter().map(|v| v * c).collect(),
            couplings: self.couplings.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
    }

    pub fn energy(&self, config: &SpinConfiguration) -> f64 {
        debug_assert_eq!(config.len(), self.n);
        let s = |i: usize| f64::from(config.spin(i));
        let field: f64 = self.h.iter().enumerate().map(|(i, &h)| h * s(i)).sum();
        let pair: f64 = self
            .couplings
            .iter()
            .map(|(&(i, j), &v)| v * s(i) * s(j))
            .sum();
        self.offset - field - pair
    }

    /// Energy of every basis state, indexed by bitmask. Requires `n < 32`.
    pub fn energies(&self, include_offset: bool) -> Vec<f64> {
        assert!(self.n < 32, "energy table for {} spins", self.n);
        let terms = EnergyTerms::new(self, include_offset);
        (0..1u64 << self.n).map(|x| terms.eval(x)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    n: usize,
    offset: f64,
    h: Vec<f64>,
    #[serde(rename = "J")]
    couplings: Vec<(usize, usize, f64)>,
}

/// Nonzero terms of a model in bitmask form, for evaluating many basis
/// states without going through `SpinConfiguration`.
pub(crate) struct EnergyTerms {
    base: f64,
    fields: Vec<(u64, f64)>,
    pairs: Vec<(u64, f64)>,
}

impl EnergyTerms {
    pub(crate) fn new(model: &IsingModel, include_offset: bool) -> Self {
        Self {
            base: if include_offset { model.offset } else { 0.0 },
            fields: model
                .h
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(i, &h)| (1u64 << i, h))
                .collect(),
            pairs: model
                .couplings
                .iter()
                .filter(|(_, &v)| v != 0.0)
                .map(|(&(i, j), &v)| ((1u64 << i) | (1u64 << j), v))
                .collect(),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, x: u64) -> f64 {
        let mut e = self.base;
        for &(m, h) in &self.fields {
            e -= if x & m == 0 { h } else { -h };
        }
        for &(m, v) in &self.pairs {
            // σ_iσ_j = +1 when both bits agree
            e -= if (x & m).count_ones() == 1 { -v } else { v };
        }
        e
    }
}

impl Serialize for IsingModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelRepr {
            n: self.n,
            offset: self.offset,
            h: self.h.clone(),
            couplings: self.couplings().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IsingModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ModelRepr::deserialize(d)?;
        IsingModel::new(r.n, r.offset, r.h, r.couplings).map_err(D::Error::custom)
    }
}

/// Spin-reversal gauge: entries are exactly ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaugeVector(Vec<i8>);

impl GaugeVector {
    pub fn new(g: Vec<i8>) -> Result<Self> {
        if let Some(v) = g.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument(format!(
                "gauge entries must be ±1, got {v}"
            )));
        }
        Ok(Self(g))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn global_flip(n: usize) -> Self {
        Self(vec![-1; n])
    }

    /// Gauge flipping exactly the spins set in `mask`.
    pub fn from_flip_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn flip_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == -1)
            .fold(0, |m, (i, _)| m | 1 << i)
    }
}

impl Serialize for GaugeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaugeVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        GaugeVector::new(Vec::<i8>::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// Cut-weight objective: `offset = Σw/2`, `J_ij = w_ij/2`, no fields.
pub fn encode_objective(inst: &GbpInstance) -> IsingModel {
    let couplings = inst
        .edges()
        .iter()
        .map(|e| ((e.i, e.j), e.weight as f64 / 2.0))
        .collect();
    IsingModel {
        n: inst.n(),
        offset: inst.total_weight() as f64 / 2.0,
        h: vec![0.0; inst.n()],
        couplings,
    }
}

/// Balance penalty `(Σσ)^2`: `offset = n`, `J_ij = −2` on every pair.
pub fn encode_constraint(n: usize) -> Result<IsingModel> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "constraint needs at least 2 spins, got {n}"
        )));
    }
    let mut couplings = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            couplings.insert((i, j), -2.0);
        }
    }
    Ok(IsingModel {
        n,
        offset: n as f64,
        h: vec![0.0; n],
        couplings,
    })
}

/// `ca·a + cb·b`, term by term. A zero coefficient drops its operand
/// entirely so that e.g. `μ = 0` reproduces `a` exactly.
fn linear_combination(a: &IsingModel, ca: f64, b: &IsingModel, cb: f64) -> Result<IsingModel> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    let mut out = IsingModel::zero(a.n);
    for (m, c) in [(a, ca), (b, cb)] {
        if c == 0.0 {
            continue;
        }
        out.offset += c * m.offset;
        for (dst, src) in out.h.iter_mut().zip(&m.h) {
            *dst += c * src;
        }
        for (&k, &v) in &m.couplings {
            *out.couplings.entry(k).or_insert(0.0) += c * v;
        }
    }
    Ok(out)
}

/// `H_obj + μ·H_const`.
pub fn compose_mu(obj: &IsingModel, cons: &IsingModel, mu: f64) -> Result<IsingModel> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "penalty coefficient must be finite and non-negative, got {mu}"
        )));
    }
    linear_combination(obj, 1.0, cons, mu)
}

/// `(1−λ)·H_obj + λ·H_const`, equivalent to `compose_mu` with
/// `μ = λ/(1−λ)` up to the overall factor `1−λ`.
pub fn compose_lambda(obj: &IsingModel, cons: &IsingModel, lambda: f64) -> Result<IsingModel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "normalized penalty must lie in [0, 1], got {lambda}"
        )));
    }
    linear_combination(obj, 1.0 - lambda, cons, lambda)
}

/// `μ = λ/(1−λ)`; infinite at `λ = 1`.
pub fn lambda_to_mu(lambda: f64) -> f64 {
    lambda / (1.0 - lambda)
}

pub fn mu_to_lambda(mu: f64) -> f64 {
    mu / (1.0 + mu)
}

pub fn classical_energy(model: &IsingModel, config: &SpinConfiguration) -> Result<f64> {
    if config.len() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: config.len(),
        });
    }
    Ok(model.energy(config))
}

/// `h'_i = g_i h_i`, `J'_ij = g_i g_j J_ij`.
pub fn apply_gauge(model: &IsingModel, g: &GaugeVector) -> Result<IsingModel> {
    if g.len() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: g.len(),
        });
    }
    let gi = |i: usize| f64::from(g.0[i]);
    Ok(IsingModel {
        n: model.n,
        offset: model.offset,
        h: model.h.iter().enumerate().map(|(i, &v)| gi(i) * v).collect(),
        couplings: model
            .couplings
            .iter()
            .map(|(&(i, j), &v)| ((i, j), gi(i) * gi(j) * v))
            .collect(),
    })
}

/// `σ'_i = g_i σ_i`.
pub fn apply_gauge_config(config: &SpinConfiguration, g: &GaugeVector) -> Result<SpinConfiguration> {
    if g.len() != config.len() {
        return Err(Error::DimensionMismatch {
            expected: config.len(),
            got: g.len(),
        });
    }
    Ok(SpinConfiguration::from_bits_unchecked(
        config.len(),
        config.bits() ^ g.flip_mask(),
    ))
}

/// Hardware bias and coupling ranges for auto-scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoscaleRanges {
    pub h: (f64, f64),
    pub j: (f64, f64),
}

impl Default for AutoscaleRanges {
    fn default() -> Self {
        Self {
            h: (-4.0, 4.0),
            j: (-1.0, 1.0),
        }
    }
}

impl AutoscaleRanges {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < 0.0 && 0.0 < hi;
        if ok(self.h) && ok(self.j) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "autoscale ranges must straddle zero: h {:?}, J {:?}",
                self.h, self.j
            )))
        }
    }
}

/// Divide the whole model by the smallest factor that fits every field and
/// coupling into its range (the group coupling limit is not applied). The
/// factor is not clamped at 1, so small models are scaled up. An all-zero
/// model comes back unchanged with factor 1.
pub fn autoscale(model: &IsingModel, ranges: &AutoscaleRanges) -> Result<(IsingModel, f64)> {
    ranges.validate()?;
    let mut factor: f64 = 0.0;
    for &v in &model.h {
        factor = factor.max(v / ranges.h.1).max(v / ranges.h.0);
    }
    for &v in model.couplings.values() {
        factor = factor.max(v / ranges.j.1).max(v / ranges.j.0);
    }
    if factor <= 0.0 {
        return Ok((model.clone(), 1.0));
    }
    Ok((model.scaled(1.0 / factor), factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_configs(n: usize) -> impl Iterator<Item = SpinConfiguration> {
        (0..1u64 << n).map(move |b| SpinConfiguration::new(n, b).unwrap())
    }

    #[test]
    fn instance_validation() {
        assert!(GbpInstance::new(3, []).is_err());
        assert!(GbpInstance::new(0, []).is_err());
        assert!(GbpInstance::new(4, [(0, 0, 1)]).is_err());
        assert!(GbpInstance::new(4, [(0, 4, 1)]).is_err());
        assert!(GbpInstance::new(4, [(0, 1, 0)]).is_err());
        assert!(GbpInstance::new(4, [(0, 1, 1), (1, 0, 2)]).is_err());
        let g = GbpInstance::new(4, [(2, 1, 3), (0, 1, 1)]).unwrap();
        assert_eq!(g.to_json(), r#"{"n":4,"edges":[[0,1,1],[1,2,3]]}"#);
        assert_eq!(GbpInstance::from_json(&g.to_json()).unwrap(), g);
        assert!(GbpInstance::from_json(r#"{"n":5,"edges":[]}"#).is_err());
    }

    #[test]
    fn single_edge_objective() {
        let inst = GbpInstance::new(2, [(0, 1, 2)]).unwrap();
        let m = encode_objective(&inst);
        assert_eq!(m.offset(), 1.0);
        assert_eq!(m.coupling(0, 1), 1.0);
        assert_eq!(m.energy(&"++".parse().unwrap()), 0.0);
        assert_eq!(m.energy(&"+-".parse().unwrap()), 2.0);
    }

    #[test]
    fn empty_objective_is_zero() {
        let inst = GbpInstance::new(4, []).unwrap();
        let m = encode_objective(&inst);
        assert!(m.is_zero());
        assert!(all_configs(4).all(|c| m.energy(&c) == 0.0));
    }

    #[test]
    fn triangle_min_balanced_cut_is_two() {
        let inst = GbpInstance::new(4, [(0, 1, 1), (0, 2, 1), (1, 2, 1)]).unwrap();
        let m = encode_objective(&inst);
        let best = all_configs(4)
            .filter(|c| c.is_balanced())
            .map(|c| m.energy(&c))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, 2.0);
    }

    #[test]
    fn constraint_values() {
        let c6 = encode_constraint(6).unwrap();
        assert_eq!(c6.energy(&"++++++".parse().unwrap()), 36.0);
        assert_eq!(c6.energy(&"+-+-+-".parse().unwrap()), 0.0);
        let c4 = encode_constraint(4).unwrap();
        assert_eq!(c4.energy(&"+-++".parse().unwrap()), 4.0);
        assert!(encode_constraint(1).is_err());
    }

    #[test]
    fn compose_mu_examples() {
        let inst = GbpInstance::new(2, [(0, 1, 2)]).unwrap();
        let obj = encode_objective(&inst);
        let cons = encode_constraint(2).unwrap();
        assert_eq!(compose_mu(&obj, &cons, 0.0).unwrap(), obj);
        assert_eq!(compose_mu(&IsingModel::zero(2), &cons, 1.0).unwrap(), cons);
        let m = compose_mu(&obj, &cons, 3.0).unwrap();
        assert_eq!(m.coupling(0, 1), -5.0);
        assert_eq!(m.offset(), 7.0);
        for c in all_configs(2) {
            let direct = obj.energy(&c) + 3.0 * cons.energy(&c);
            assert_eq!(m.energy(&c), direct);
        }
        assert!(compose_mu(&obj, &cons, -1.0).is_err());
        assert!(compose_mu(&obj, &encode_constraint(4).unwrap(), 1.0).is_err());
    }

    #[test]
    fn compose_lambda_endpoints() {
        let inst = GbpInstance::new(4, [(0, 1, 2), (2, 3, 1)]).unwrap();
        let obj = encode_objective(&inst);
        let cons = encode_constraint(4).unwrap();
        assert_eq!(compose_lambda(&obj, &cons, 0.0).unwrap(), obj);
        assert_eq!(compose_lambda(&obj, &cons, 1.0).unwrap(), cons);
        assert!(compose_lambda(&obj, &cons, 1.5).is_err());
        assert!(compose_lambda(&obj, &cons, -0.1).is_err());
    }

    #[test]
    fn gauge_examples() {
        let m = IsingModel::new(3, 0.5, vec![1.0, -2.0, 0.5], [(0, 1, 1.5), (1, 2, -0.5)]).unwrap();
        assert_eq!(apply_gauge(&m, &GaugeVector::identity(3)).unwrap(), m);
        let flipped = apply_gauge(&m, &GaugeVector::global_flip(3)).unwrap();
        assert_eq!(flipped.fields(), &[-1.0, 2.0, -0.5]);
        assert_eq!(flipped.coupling(0, 1), 1.5);
        let c: SpinConfiguration = "+-+".parse().unwrap();
        assert_eq!(
            apply_gauge_config(&c, &GaugeVector::global_flip(3)).unwrap(),
            c.complement()
        );
        assert_eq!(apply_gauge_config(&c, &GaugeVector::identity(3)).unwrap(), c);
        assert!(GaugeVector::new(vec![1, 0]).is_err());
        assert!(apply_gauge(&m, &GaugeVector::identity(2)).is_err());
    }

    #[test]
    fn autoscale_halves_double_couplings() {
        let m = IsingModel::new(3, 4.0, vec![0.0; 3], [(0, 1, 2.0), (1, 2, -1.0)]).unwrap();
        let (s, f) = autoscale(&m, &AutoscaleRanges::default()).unwrap();
        assert_eq!(f, 2.0);
        assert_eq!(s.coupling(0, 1), 1.0);
        assert_eq!(s.coupling(1, 2), -0.5);
        assert_eq!(s.offset(), 2.0);
        let (again, f2) = autoscale(&s, &AutoscaleRanges::default()).unwrap();
        assert_eq!(f2, 1.0);
        assert_eq!(again, s);
    }

    #[test]
    fn autoscale_zero_model_and_bad_ranges() {
        let z = IsingModel::zero(4);
        assert_eq!(autoscale(&z, &AutoscaleRanges::default()).unwrap(), (z.clone(), 1.0));
        let bad = AutoscaleRanges {
            h: (1.0, 4.0),
            j: (-1.0, 1.0),
        };
        assert!(autoscale(&z, &bad).is_err());
    }

    #[test]
    fn autoscale_uses_matching_sign_bound() {
        // h = -8 against h_lo = -4 gives 2; J = 0.5 against 1 gives 0.5.
        let m = IsingModel::new(2, 0.0, vec![-8.0, 1.0], [(0, 1, 0.5)]).unwrap();
        let (s, f) = autoscale(&m, &AutoscaleRanges::default()).unwrap();
        assert_eq!(f, 2.0);
        assert_eq!(s.fields(), &[-4.0, 0.5]);
    }

    #[test]
    fn energy_table_matches_direct_evaluation() {
        let m = IsingModel::new(4, 1.25, vec![0.3, -0.2, 0.0, 1.0], [(0, 1, 1.0), (1, 3, -0.7), (0, 2, 0.25)])
            .unwrap();
        let table = m.energies(true);
        for c in all_configs(4) {
            assert!((table[c.bits() as usize] - m.energy(&c)).abs() < 1e-12);
        }
        let no_off = m.energies(false);
        assert!((table[5] - no_off[5] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn model_json_round_trip() {
        let m = IsingModel::new(3, 0.5, vec![1.0, 0.0, 0.0], [(0, 2, -2.0)]).unwrap();
        let text = m.to_json();
        assert_eq!(text, r#"{"n":3,"offset":0.5,"h":[1.0,0.0,0.0],"J":[[0,2,-2.0]]}"#);
        let back: IsingModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
