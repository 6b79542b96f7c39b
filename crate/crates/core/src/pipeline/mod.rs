//! Penalty and anneal-time sweeps over single instances, and the
//! multi-instance scaling study.
//!
//! Every evolution is an independent task over an `(instance, control, T)`
//! index. Tasks run on the current rayon pool and results land in a
//! pre-sized table by index, so output never depends on scheduling.

pub mod output;
pub mod svg;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, AnnealRun, Integrator};
use crate::error::{Error, Result};
use crate::fairness::{
    self, ControlKind, FairnessRecord, DEFAULT_MONOTONE_SLACK, DEFAULT_VALIDITY_THRESHOLD,
};
use crate::generator::{self, GenSpec, GeneratedInstance};
use crate::model::{self, AutoscaleRanges, GbpInstance, IsingModel};
use crate::oracle::{self, OracleReport};

pub fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

pub fn default_mu_plus_grid() -> Vec<f64> {
    (0..=5).map(|k| k as f64 / 5.0).collect()
}

pub fn default_time_grid() -> Vec<f64> {
    vec![1e1, 1e2, 1e3, 1e4]
}

pub const DEFAULT_SCALING_TIME: f64 = 1e5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPlan {
    pub control_kind: ControlKind,
    pub controls: Vec<f64>,
    pub times: Vec<f64>,
    /// `None` keeps raw energy units.
    pub autoscale: Option<AutoscaleRanges>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub integrator: Integrator,
    pub validity_threshold: f64,
    pub monotone_slack: f64,
    /// Leave λ = 1 (pure constraint, objective gone) out of the
    /// monotonicity check.
    pub exclude_pure_constraint: bool,
}

impl SweepPlan {
    pub fn lambda(controls: Vec<f64>, times: Vec<f64>) -> Self {
        Self::new(ControlKind::Lambda, controls, times)
    }

    pub fn mu_plus(controls: Vec<f64>, times: Vec<f64>) -> Self {
        Self::new(ControlKind::MuPlus, controls, times)
    }

    fn new(control_kind: ControlKind, controls: Vec<f64>, times: Vec<f64>) -> Self {
        let run = AnnealRun::new(1.0);
        Self {
            control_kind,
            controls,
            times,
            autoscale: Some(AutoscaleRanges::default()),
            rel_tol: run.rel_tol,
            abs_tol: run.abs_tol,
            integrator: run.integrator,
            validity_threshold: DEFAULT_VALIDITY_THRESHOLD,
            monotone_slack: DEFAULT_MONOTONE_SLACK,
            exclude_pure_constraint: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn sorted_nonempty(name: &str, v: &[f64]) -> Result<()> {
            if v.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} grid is empty")));
            }
            if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid must be finite and strictly ascending"
                )));
            }
            Ok(())
        }
        sorted_nonempty("control", &self.controls)?;
        sorted_nonempty("time", &self.times)?;
        match self.control_kind {
            ControlKind::Lambda if self.controls.iter().any(|l| !(0.0..=1.0).contains(l)) => {
                return Err(Error::InvalidArgument("λ values must lie in [0, 1]".into()));
            }
            ControlKind::MuPlus if self.controls.iter().any(|m| *m < 0.0) => {
                return Err(Error::InvalidArgument("μ+ values must be nonnegative".into()));
            }
            _ => {}
        }
        if self.times.iter().any(|t| *t <= 0.0) {
            return Err(Error::InvalidArgument("anneal times must be positive".into()));
        }
        if let Some(r) = &self.autoscale {
            r.validate()?;
        }
        self.anneal_run(1.0).validate()
    }

    pub fn anneal_run(&self, t: f64) -> AnnealRun {
        AnnealRun::new(t)
            .with_tolerances(self.rel_tol, self.abs_tol)
            .with_integrator(self.integrator)
    }

    fn expect_kind(&self, kind: ControlKind) -> Result<()> {
        if self.control_kind != kind {
            return Err(Error::InvalidArgument(format!(
                "plan sweeps {} but {} was requested",
                self.control_kind, kind
            )));
        }
        Ok(())
    }
}

/// Problem Hamiltonian for one control value, before autoscaling.
pub fn problem_model(inst: &GbpInstance, report: &OracleReport, kind: ControlKind, control: f64) -> Result<IsingModel> {
    let obj = model::encode_objective(inst);
    let cons = model::encode_constraint(inst.n())?;
    match kind {
        ControlKind::Lambda => model::compose_lambda(&obj, &cons, control),
        ControlKind::MuPlus => model::compose_mu(&obj, &cons, report.mu_threshold + control),
    }
}

/// One evolution scored against the oracle's feasible optima.
pub fn run_point(
    inst: &GbpInstance,
    report: &OracleReport,
    plan: &SweepPlan,
    control: f64,
    t: f64,
) -> Result<FairnessRecord> {
    let mut h = problem_model(inst, report, plan.control_kind, control)?;
    if let Some(ranges) = &plan.autoscale {
        h = model::autoscale(&h, ranges)?.0;
    }
    let state = dynamics::evolve(&h, &plan.anneal_run(t))?;
    let (_, per) = dynamics::ground_state_probabilities(&state, &report.optimal_configs)?;
    Ok(FairnessRecord::from_probabilities(
        plan.control_kind,
        control,
        t,
        per,
        plan.validity_threshold,
    ))
}

fn point_or_failure(inst: &GbpInstance, report: &OracleReport, plan: &SweepPlan, control: f64, t: f64) -> FairnessRecord {
    run_point(inst, report, plan, control, t).unwrap_or_else(|e| {
        log::warn!("{} = {control}, T = {t}: {e}", plan.control_kind);
        FairnessRecord::failed(plan.control_kind, control, t, &e)
    })
}

/// Records ordered by (control, T).
pub fn run_sweep(inst: &GbpInstance, report: &OracleReport, plan: &SweepPlan) -> Result<Vec<FairnessRecord>> {
    plan.validate()?;
    let tasks: Vec<(f64, f64)> = plan
        .controls
        .iter()
        .flat_map(|&c| plan.times.iter().map(move |&t| (c, t)))
        .collect();
    Ok(tasks
        .par_iter()
        .map(|&(c, t)| point_or_failure(inst, report, plan, c, t))
        .collect())
}

pub fn run_lambda_sweep(inst: &GbpInstance, plan: &SweepPlan) -> Result<Vec<FairnessRecord>> {
    plan.expect_kind(ControlKind::Lambda)?;
    run_sweep(inst, &oracle::analyze(inst)?, plan)
}

/// The `μ+` sweep resolves `μ = μ* + μ+` through the oracle.
pub fn run_mu_time_sweep(inst: &GbpInstance, plan: &SweepPlan) -> Result<Vec<FairnessRecord>> {
    plan.expect_kind(ControlKind::MuPlus)?;
    run_sweep(inst, &oracle::analyze(inst)?, plan)
}

/// Monotonicity over the valid records of one λ curve at one anneal time.
/// `None` when any point failed numerically.
pub fn curve_is_monotone(records: &[FairnessRecord], plan: &SweepPlan) -> Option<bool> {
    if records.iter().any(|r| r.failure.is_some()) {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.valid && !(plan.exclude_pure_constraint && r.control_kind == ControlKind::Lambda && r.control == 1.0))
        .filter_map(|r| r.entropy.map(|s| (r.control, s)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s: Vec<f64> = pts.into_iter().map(|(_, s)| s).collect();
    Some(fairness::monotone_nondecreasing(&s, plan.monotone_slack))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceCurve {
    pub n: usize,
    pub index: u64,
    pub seed: u64,
    pub fingerprint: String,
    pub records: Vec<FairnessRecord>,
    /// `None` marks an indeterminate instance (some evolution failed).
    pub monotone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub instances: usize,
    pub evaluated: usize,
    pub indeterminate: usize,
    pub monotone: usize,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    pub curves: Vec<InstanceCurve>,
}

/// Generate `count` filtered instances per size and run the λ sweep on
/// each at the plan's single anneal time.
pub fn run_scaling(ns: &[usize], count: usize, plan: &SweepPlan, seed: u64) -> Result<ScalingResult> {
    let batches: Vec<(usize, Vec<GeneratedInstance>)> = ns
        .iter()
        .map(|&n| {
            if n > dynamics::MAX_DYNAMICS_SPINS {
                return Err(Error::TooLarge {
                    what: "state-vector dynamics",
                    n,
                    max: dynamics::MAX_DYNAMICS_SPINS,
                });
            }
            Ok((n, generator::generate_batch(&GenSpec::new(n, seed), count)?))
        })
        .collect::<Result<_>>()?;
    run_scaling_on(&batches, plan)
}

/// Scaling study over already generated batches, keyed by size.
pub fn run_scaling_on(batches: &[(usize, Vec<GeneratedInstance>)], plan: &SweepPlan) -> Result<ScalingResult> {
    plan.expect_kind(ControlKind::Lambda)?;
    plan.validate()?;
    if plan.times.len() != 1 {
        return Err(Error::InvalidArgument("scaling runs use a single anneal time".into()));
    }
    let t = plan.times[0];
    let instances: Vec<&GeneratedInstance> = batches.iter().flat_map(|(_, b)| b.iter()).collect();
    let tasks: Vec<(usize, f64)> = (0..instances.len())
        .flat_map(|i| plan.controls.iter().map(move |&c| (i, c)))
        .collect();
    let records: Vec<FairnessRecord> = tasks
        .par_iter()
        .map(|&(i, c)| point_or_failure(&instances[i].instance, &instances[i].report, plan, c, t))
        .collect();
    let per = plan.controls.len();
    let curves: Vec<InstanceCurve> = instances
        .iter()
        .zip(records.chunks(per))
        .map(|(g, recs)| InstanceCurve {
            n: g.instance.n(),
            index: g.index,
            seed: g.seed,
            fingerprint: g.instance.fingerprint(),
            monotone: curve_is_monotone(recs, plan),
            records: recs.to_vec(),
        })
        .collect();
    let rows = batches
        .iter()
        .map(|(n, b)| {
            let flags: Vec<bool> = curves.iter().filter(|c| c.n == *n).filter_map(|c| c.monotone).collect();
            ScalingRow {
                n: *n,
                instances: b.len(),
                evaluated: flags.len(),
                indeterminate: b.len() - flags.len(),
                monotone: flags.iter().filter(|&&f| f).count(),
                rate: fairness::monotonic_increase_rate(&flags).ok(),
            }
        })
        .collect();
    Ok(ScalingResult { rows, curves })
}
