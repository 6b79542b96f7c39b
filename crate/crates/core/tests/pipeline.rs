mod common;

use anneal_fair::dynamics::evolve;
use anneal_fair::fairness::{self, ControlKind};
use anneal_fair::generator::{self, GenSpec};
use anneal_fair::model::{self, GbpInstance};
use anneal_fair::oracle;
use anneal_fair::pipeline::{self, output, SweepPlan};
use common::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn quick(plan: SweepPlan) -> SweepPlan {
    SweepPlan {
        rel_tol: 1e-6,
        abs_tol: 1e-8,
        ..plan
    }
}

#[test]
fn filtered_generation_matches_brute_force() {
    let spec = GenSpec::new(6, 99);
    for g in generator::generate_batch(&spec, 8).unwrap() {
        assert!(generator::is_connected(&g.instance));
        let (e_opt, set) = brute_optimum(&g.instance);
        assert_eq!(set.len(), 4);
        assert_eq!(g.report.e_opt, e_opt as f64);
        assert!(g.instance.edges().iter().all(|e| (1..=6).contains(&e.weight)));
        assert_eq!(g.seed, generator::stream_seed(99, g.index));
    }
}

#[test]
fn edge_frequency_follows_bernoulli() {
    let spec = GenSpec::new(6, 5);
    let mut rng = generator::stream_rng(5);
    let draws = 10_000;
    let mut counts = [[0u32; 6]; 6];
    for _ in 0..draws {
        for (i, j, _) in generator::random_edges(&spec, &mut rng) {
            counts[i][j] += 1;
        }
    }
    for i in 0..6 {
        for j in i + 1..6 {
            let f = counts[i][j] as f64 / draws as f64;
            assert!((f - 0.5).abs() < 0.02, "pair ({i},{j}) frequency {f}");
        }
    }
}

#[test]
fn batches_are_thread_count_independent() {
    let spec = GenSpec::new(8, 3);
    let a = in_pool(1, || generator::generate_batch(&spec, 6).unwrap());
    let b = in_pool(4, || generator::generate_batch(&spec, 6).unwrap());
    assert_eq!(a, b);
    assert_eq!(generator::manifest_csv(&a), generator::manifest_csv(&b));
}

#[test]
fn sweep_output_is_thread_count_independent() {
    let g = generator::generate_indexed(&GenSpec::new(6, 1), 0).unwrap();
    let plan = quick(SweepPlan::lambda(vec![0.0, 0.3, 0.6, 0.9], vec![10.0, 40.0]));
    let a = in_pool(1, || pipeline::run_sweep(&g.instance, &g.report, &plan).unwrap());
    let b = in_pool(8, || pipeline::run_sweep(&g.instance, &g.report, &plan).unwrap());
    assert_eq!(a.len(), 8);
    assert_eq!(fairness::records_to_csv(&a), fairness::records_to_csv(&b));
    let render = |r: &[fairness::FairnessRecord]| {
        output::sweep_charts(r)
            .iter()
            .map(|(_, c)| pipeline::svg::render(c))
            .collect::<Vec<_>>()
    };
    assert_eq!(render(&a), render(&b));
}

#[test]
fn lambda_zero_equals_unpenalized_run() {
    // objective optimum already balanced, so the constraint is irrelevant
    let inst = GbpInstance::new(4, [(0, 1, 3), (2, 3, 3), (1, 2, 1)]).unwrap();
    let report = oracle::analyze(&inst).unwrap();
    let plan = SweepPlan {
        autoscale: None,
        ..quick(SweepPlan::lambda(vec![0.0], vec![30.0]))
    };
    let rec = pipeline::run_sweep(&inst, &report, &plan).unwrap().remove(0);
    let st = evolve(&model::encode_objective(&inst), &plan.anneal_run(30.0)).unwrap();
    let direct: Vec<f64> = report.optimal_configs.iter().map(|c| st.probability(c)).collect();
    assert_eq!(rec.p_per_state, direct);
}

#[test]
fn mu_time_grid_is_complete() {
    let g = generator::generate_indexed(&GenSpec::new(4, 2), 0).unwrap();
    let plan = quick(SweepPlan::mu_plus(vec![0.0, 0.5], vec![1.0, 10.0, 100.0]));
    let recs = pipeline::run_mu_time_sweep(&g.instance, &plan).unwrap();
    assert_eq!(recs.len(), 6);
    assert!(recs.iter().all(|r| r.control_kind == ControlKind::MuPlus && r.failure.is_none()));
    assert!(pipeline::run_lambda_sweep(&g.instance, &plan).is_err());
}

/// Four vertices with D = 4 sample fairly at long anneal times.
#[test]
fn four_vertex_instance_is_fair() {
    let g = generator::generate_indexed(&GenSpec::new(4, 17), 0).unwrap();
    let plan = SweepPlan::lambda(pipeline::default_lambda_grid(), vec![pipeline::DEFAULT_SCALING_TIME]);
    let recs = pipeline::run_lambda_sweep(&g.instance, &plan).unwrap();
    assert_eq!(recs.len(), 11);
    let valid: Vec<_> = recs.iter().filter(|r| r.valid).collect();
    assert!(!valid.is_empty());
    for r in valid {
        assert!((r.entropy.unwrap() - 2.0).abs() <= 1e-3, "λ = {}: S = {:?}", r.control, r.entropy);
    }
    assert_eq!(pipeline::curve_is_monotone(&recs, &plan), Some(true));
}

#[test]
fn scaling_smoke() {
    let plan = quick(SweepPlan::lambda(vec![0.2, 0.5, 0.8], vec![50.0]));
    let r = pipeline::run_scaling(&[4], 1, &plan, 0).unwrap();
    assert_eq!(r.rows.len(), 1);
    let rate = r.rows[0].rate.unwrap();
    assert!(rate == 0.0 || rate == 1.0);
    assert!(pipeline::run_scaling(&[16], 1, &plan, 0).is_err());
    let two_times = quick(SweepPlan::lambda(vec![0.5], vec![1.0, 2.0]));
    assert!(pipeline::run_scaling(&[4], 1, &two_times, 0).is_err());
}

#[test]
fn output_tree_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let g = generator::generate_indexed(&GenSpec::new(4, 4), 0).unwrap();
    let plan = quick(SweepPlan::mu_plus(vec![0.0, 0.2], vec![5.0, 50.0]));
    let recs = pipeline::run_sweep(&g.instance, &g.report, &plan).unwrap();
    output::write_sweep(dir.path(), &serde_json::json!({"plan": plan}), &recs).unwrap();
    for f in ["manifest.json", "records.csv", "plots/p_gs_vs_T.svg", "plots/entropy_vs_T.svg"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(fairness::records_from_csv(&csv).unwrap().len(), 4);
    let again = output::write_charts_from_csv(&dir.path().join("records.csv"), &dir.path().join("re")).unwrap();
    for p in again {
        let name = p.file_name().unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(dir.path().join("plots").join(name)).unwrap());
    }
}
