//! Exhaustive classical reference over all `2^n` configurations.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::dynamics::operator::{FlipOperator, Space};
use crate::error::{Error, Result};
use crate::model::{EnergyTerms, GbpInstance, IsingModel};
use crate::spin::SpinConfiguration;

pub const MAX_ENUMERATION_SPINS: usize = 24;
pub const MAX_SPECTRUM_SPINS: usize = 16;
pub const MAX_DENSE_GAP_SPINS: usize = 10;
pub const MAX_GAP_SPINS: usize = 16;

/// Eigensolver convergence target for [`quantum_gap`].
pub const GAP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub e_opt: f64,
    pub optimal_configs: Vec<SpinConfiguration>,
    pub degeneracy: usize,
    pub spin_flip_classes: Vec<(SpinConfiguration, SpinConfiguration)>,
    pub mu_threshold: f64,
    pub feasible_count: u64,
}

impl OracleReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_enumerable(n: usize, max: usize, what: &'static str) -> Result<()> {
    if n > max {
        return Err(Error::TooLarge { what, n, max });
    }
    Ok(())
}

/// Minimum cut weight per number of down spins, plus the balanced minimizers.
struct CutScan {
    min_by_down: Vec<u64>,
    e_opt: u64,
    optimal: Vec<u64>,
}

/// Gray-code walk over the configurations with the top spin up. Cut weight
/// is invariant under the global flip, so the other half follows by
/// complement.
fn scan_cuts(inst: &GbpInstance) -> Result<CutScan> {
    let n = inst.n();
    check_enumerable(n, MAX_ENUMERATION_SPINS, "exhaustive enumeration")?;
    let half = n / 2;
    let mask = (1u64 << n) - 1;
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for e in inst.edges() {
        adj[e.i].push((e.j, e.weight as i64));
        adj[e.j].push((e.i, e.weight as i64));
    }
    let mut min_by_down = vec![u64::MAX; n + 1];
    let mut best = u64::MAX;
    let mut optimal = Vec::new();
    let mut visit = |x: u64, cut: u64, down: usize, min_by_down: &mut Vec<u64>| {
        min_by_down[down] = min_by_down[down].min(cut);
        min_by_down[n - down] = min_by_down[n - down].min(cut);
        if down == half {
            if cut < best {
                best = cut;
                optimal.clear();
            }
            if cut == best {
                optimal.push(x);
                optimal.push(x ^ mask);
            }
        }
    };
    let (mut x, mut cut, mut down) = (0u64, 0i64, 0usize);
    visit(x, 0, 0, &mut min_by_down);
    for k in 1..1u64 << (n - 1) {
        let i = k.trailing_zeros() as usize;
        let was_down = x >> i & 1 == 1;
        for &(j, w) in &adj[i] {
            cut += if (x >> j & 1 == 1) == was_down { w } else { -w };
        }
        x ^= 1 << i;
        if was_down {
            down -= 1;
        } else {
            down += 1;
        }
        visit(x, cut as u64, down, &mut min_by_down);
    }
    optimal.sort_unstable();
    Ok(CutScan {
        min_by_down,
        e_opt: best,
        optimal,
    })
}

fn configs(n: usize, bits: &[u64]) -> Vec<SpinConfiguration> {
    bits.iter().map(|&b| SpinConfiguration::from_bits_unchecked(n, b)).collect()
}

/// Minimum cut weight over balanced partitions and all its minimizers in
/// ascending bitmask order.
pub fn feasible_optimum(inst: &GbpInstance) -> Result<(f64, Vec<SpinConfiguration>)> {
    let scan = scan_cuts(inst)?;
    Ok((scan.e_opt as f64, configs(inst.n(), &scan.optimal)))
}

/// Supremum over infeasible `x` of `(e_opt − cut(x)) / (Σσ)²`, floored at 0.
///
/// The maximum is taken over exact integer ratios so that ties between
/// candidates are resolved without rounding.
fn threshold_from_scan(n: usize, scan: &CutScan) -> f64 {
    let e_opt = scan.e_opt as i128;
    let mut best: (i128, i128) = (0, 1);
    for (down, &c) in scan.min_by_down.iter().enumerate() {
        if 2 * down == n {
            continue;
        }
        let m = n as i128 - 2 * down as i128;
        let (num, den) = (e_opt - c as i128, m * m);
        if num * best.1 > best.0 * den {
            best = (num, den);
        }
    }
    best.0 as f64 / best.1 as f64
}

pub fn mu_threshold(inst: &GbpInstance) -> Result<f64> {
    let scan = scan_cuts(inst)?;
    Ok(threshold_from_scan(inst.n(), &scan))
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn analyze(inst: &GbpInstance) -> Result<OracleReport> {
    let n = inst.n();
    let scan = scan_cuts(inst)?;
    let optimal_configs = configs(n, &scan.optimal);
    let mut spin_flip_classes: Vec<_> = optimal_configs
        .iter()
        .filter(|c| c.bits() < c.complement().bits())
        .map(|c| (*c, c.complement()))
        .collect();
    spin_flip_classes.sort_by_key(|(a, _)| a.bits());
    Ok(OracleReport {
        n,
        e_opt: scan.e_opt as f64,
        degeneracy: optimal_configs.len(),
        optimal_configs,
        spin_flip_classes,
        mu_threshold: threshold_from_scan(n, &scan),
        feasible_count: binomial(n as u64, n as u64 / 2),
    })
}

pub fn default_tie_tolerance(e_min: f64) -> f64 {
    1e-9 * e_min.abs().max(1.0)
}

/// All configurations within `tol` of the minimum energy, ascending by
/// bitmask. `None` uses [`default_tie_tolerance`].
pub fn ground_states(model: &IsingModel, tol: Option<f64>) -> Result<(f64, Vec<SpinConfiguration>)> {
    let n = model.n();
    check_enumerable(n, MAX_ENUMERATION_SPINS, "exhaustive enumeration")?;
    let terms = EnergyTerms::new(model, true);
    let mut e_min = f64::INFINITY;
    for x in 0..1u64 << n {
        e_min = e_min.min(terms.eval(x));
    }
    let tol = tol.unwrap_or_else(|| default_tie_tolerance(e_min));
    let bits: Vec<u64> = (0..1u64 << n).filter(|&x| terms.eval(x) <= e_min + tol).collect();
    Ok((e_min, configs(n, &bits)))
}

/// Every classical energy in ascending order; ties stay in bitmask order.
pub fn full_spectrum(model: &IsingModel) -> Result<Vec<(f64, SpinConfiguration)>> {
    let n = model.n();
    check_enumerable(n, MAX_SPECTRUM_SPINS, "full spectrum")?;
    let mut out: Vec<(f64, SpinConfiguration)> = model
        .energies(true)
        .into_iter()
        .enumerate()
        .map(|(x, e)| (e, SpinConfiguration::from_bits_unchecked(n, x as u64)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMethod {
    /// Dense up to [`MAX_DENSE_GAP_SPINS`], Lanczos above.
    Auto,
    Dense,
    Lanczos,
}

/// Gap between the two lowest eigenvalues of `s·H_p − (1−s)·Σσ^x` at each
/// grid point.
pub fn quantum_gap(model: &IsingModel, s_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    quantum_gap_with(model, s_grid, GapMethod::Auto)
}

pub fn quantum_gap_with(model: &IsingModel, s_grid: &[f64], method: GapMethod) -> Result<Vec<(f64, f64)>> {
    let n = model.n();
    check_enumerable(n, MAX_GAP_SPINS, "gap computation")?;
    if let Some(&s) = s_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidArgument(format!("schedule fraction {s} outside [0, 1]")));
    }
    let dense = match method {
        GapMethod::Auto => n <= MAX_DENSE_GAP_SPINS,
        GapMethod::Dense => {
            check_enumerable(n, MAX_DENSE_GAP_SPINS, "dense gap computation")?;
            true
        }
        GapMethod::Lanczos => false,
    };
    let diag = model.energies(false);
    let op = FlipOperator::new(n, &diag, Space::Full);
    s_grid
        .iter()
        .map(|&s| {
            let (e0, e1) = if dense {
                dense_lowest_two(&op, s)
            } else {
                lanczos_lowest_two(&op, s)?
            };
            Ok((s, e1 - e0))
        })
        .collect()
}

fn dense_lowest_two(op: &FlipOperator, s: f64) -> (f64, f64) {
    let dim = op.dim();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (x, &d) in op.diag().iter().enumerate() {
        m[(x, x)] = s * d;
        for i in 0..op.n() {
            m[(x, x ^ (1 << i))] = -(1.0 - s);
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    (ev[0], ev.get(1).copied().unwrap_or(ev[0]))
}

const KRYLOV_DIM: usize = 80;
const MAX_RESTARTS: usize = 200;

/// Reproducible start vector: positive entries overlap the (Perron)
/// ground state; signed entries are used after deflation.
fn start_vector(dim: usize, signed: bool) -> Vec<f64> {
    (0..dim as u64)
        .map(|k| {
            let mut z = k.wrapping_add(0x9e37_79b9_7f4a_7c15);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            let u = (z >> 11) as f64 / (1u64 << 53) as f64;
            if signed {
                2.0 * u - 1.0
            } else {
                0.5 + u
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in against {
            let c = dot(v, u);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Lowest eigenpair in the complement of `deflate` by explicitly restarted
/// Lanczos with full reorthogonalization.
fn lanczos_lowest(op: &FlipOperator, s: f64, deflate: &[Vec<f64>], start: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    let dim = op.dim();
    let avail = dim - deflate.len();
    let m_max = KRYLOV_DIM.min(avail).max(1);
    let (a, b) = (s, -(1.0 - s));
    let mut v0 = start;
    orthogonalize(&mut v0, deflate);
    normalize(&mut v0);
    let mut w = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        loop {
            let j = basis.len() - 1;
            op.apply(a, b, &basis[j], &mut w);
            alpha.push(dot(&w, &basis[j]));
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let bj = normalize(&mut w);
            if basis.len() == m_max || bj < 1e-12 {
                beta.push(bj);
                break;
            }
            beta.push(bj);
            basis.push(w.clone());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let idx = (0..k)
            .min_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]))
            .expect("nonempty tridiagonal");
        let y = eig.eigenvectors.column(idx);
        let mut ritz = vec![0.0; dim];
        for (c, v) in y.iter().zip(&basis) {
            ritz.iter_mut().zip(v).for_each(|(r, x)| *r += c * x);
        }
        orthogonalize(&mut ritz, deflate);
        normalize(&mut ritz);
        op.apply(a, b, &ritz, &mut w);
        let theta = dot(&ritz, &w);
        residual = w
            .iter()
            .zip(&ritz)
            .map(|(hx, x)| (hx - theta * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= GAP_TOLERANCE * theta.abs().max(1.0) || k == avail {
            return Ok((theta, ritz));
        }
        v0 = ritz;
    }
    Err(Error::NoConvergence {
        iterations: MAX_RESTARTS * m_max,
        residual,
    })
}

fn lanczos_lowest_two(op: &FlipOperator, s: f64) -> Result<(f64, f64)> {
    if op.dim() == 1 {
        let e = s * op.diag()[0];
        return Ok((e, e));
    }
    let (e0, v0) = lanczos_lowest(op, s, &[], start_vector(op.dim(), false))?;
    let (e1, _) = lanczos_lowest(op, s, &[v0], start_vector(op.dim(), true))?;
    Ok((e0, e1))
}
