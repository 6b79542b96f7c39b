//! Closed-system annealing dynamics.
//!
//! `H(t) = (t/T)·H_p + (1 − t/T)·H_q` with the transverse-field driver
//! `H_q = −Σ_i σ^x_i`, in units with ħ = 1. The state starts in the uniform
//! superposition (the driver ground state). Constant energy offsets only add
//! a global phase and are dropped by default.

pub mod chebyshev;
pub mod magnus;
pub mod operator;
pub mod rk;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use magnus::MagnusConfig;
use operator::{FlipOperator, Space};

use crate::error::{Error, Result};
use crate::model::IsingModel;
use crate::spin::SpinConfiguration;

pub const MAX_DYNAMICS_SPINS: usize = 14;
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: amplitudes.len(),
            });
        }
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, config: &SpinConfiguration) -> f64 {
        self.amplitudes[config.bits() as usize].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Adaptive Dormand–Prince 5(4) with rel/abs tolerances.
    DormandPrince,
    /// Commutator-free Magnus-4 stepping with Chebyshev exponentials.
    MagnusChebyshev,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk45" | "dopri" | "dormand-prince" => Ok(Integrator::DormandPrince),
            "magnus" | "magnus-chebyshev" => Ok(Integrator::MagnusChebyshev),
            other => Err(Error::InvalidArgument(format!("unknown integrator {other:?}"))),
        }
    }
}

/// One annealing run: total time and integrator controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealRun {
    pub total_time: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub drop_offset: bool,
    pub integrator: Integrator,
}

impl AnnealRun {
    pub fn new(total_time: f64) -> Self {
        Self {
            total_time,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            drop_offset: true,
            integrator: Integrator::DormandPrince,
        }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "anneal time must be positive, got {}",
                self.total_time
            )));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn check_spins(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DYNAMICS_SPINS {
        return Err(Error::TooLarge {
            what: "state-vector dynamics",
            n,
            max: MAX_DYNAMICS_SPINS,
        });
    }
    Ok(())
}

/// Uniform superposition `2^{−n/2} Σ_x |x⟩`.
pub fn initial_state(n: usize) -> Result<QuantumState> {
    check_spins(n)?;
    let amp = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    Ok(QuantumState {
        n,
        amplitudes: vec![amp; 1 << n],
    })
}

/// `out[x] = s·diag[x]·in[x] − (1−s)·Σ_i in[x ⊕ 2^i]`.
pub fn apply_hamiltonian(diag: &[f64], s: f64, state: &QuantumState) -> Result<QuantumState> {
    if diag.len() != state.amplitudes.len() {
        return Err(Error::DimensionMismatch {
            expected: state.amplitudes.len(),
            got: diag.len(),
        });
    }
    let op = FlipOperator::new(state.n, diag, Space::Full);
    let mut out = vec![Complex64::default(); diag.len()];
    op.apply(s, -(1.0 - s), &state.amplitudes, &mut out);
    Ok(QuantumState {
        n: state.n,
        amplitudes: out,
    })
}

/// Diagonal of the problem Hamiltonian as used by the dynamics.
pub fn problem_diagonal(model: &IsingModel, drop_offset: bool) -> Vec<f64> {
    model.energies(!drop_offset)
}

/// Integrate the annealing Schrödinger equation from the uniform state to
/// `t = T`.
pub fn evolve(model: &IsingModel, run: &AnnealRun) -> Result<QuantumState> {
    evolve_with(model, run, &MagnusConfig::for_tolerance(run.rel_tol))
}

pub fn evolve_with(model: &IsingModel, run: &AnnealRun, magnus: &MagnusConfig) -> Result<QuantumState> {
    run.validate()?;
    let n = model.n();
    check_spins(n)?;
    let diag = problem_diagonal(model, run.drop_offset);
    // h = 0 models conserve global spin-flip parity
    let space = if model.has_fields() { Space::Full } else { Space::Even };
    let op = FlipOperator::new(n, &diag, space);
    let amp = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    let mut psi = vec![amp; op.dim()];
    match run.integrator {
        Integrator::DormandPrince => {
            let stats = rk::integrate(&op, run.total_time, run.rel_tol, run.abs_tol, NORM_TOLERANCE, &mut psi)?;
            log::debug!(
                "dopri n={n} T={}: {} accepted, {} rejected",
                run.total_time,
                stats.accepted,
                stats.rejected
            );
        }
        Integrator::MagnusChebyshev => {
            let stats = magnus::integrate(&op, run.total_time, magnus, NORM_TOLERANCE, &mut psi)?;
            log::debug!(
                "magnus n={n} T={}: {} steps, {} applications",
                run.total_time,
                stats.steps,
                stats.applications
            );
        }
    }
    let amplitudes = match space {
        Space::Full => psi,
        Space::Even => {
            let mask = (1usize << n) - 1;
            (0..1usize << n)
                .map(|x| psi[if x >> (n - 1) & 1 == 0 { x } else { x ^ mask }])
                .collect()
        }
    };
    Ok(QuantumState { n, amplitudes })
}


pub fn ground_state_probabilities(
    state: &QuantumState,
    ground_set: &[SpinConfiguration],
) -> Result<(f64, Vec<f64>)> {
    let mut per = Vec::with_capacity(ground_set.len());
    for c in ground_set {
        if c.len() != state.n {
            return Err(Error::DimensionMismatch {
                expected: state.n,
                got: c.len(),
            });
        }
        per.push(state.probability(c));
    }
    Ok((per.iter().sum(), per))
}
