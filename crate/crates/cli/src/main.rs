use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anneal_fair::dynamics::Integrator;
use anneal_fair::error::{Error, ErrorKind};
use anneal_fair::fairness::{self, ControlKind};
use anneal_fair::generator::{self, GenSpec};
use anneal_fair::ingest::{self, SampleFormat};
use anneal_fair::model::{self, GbpInstance};
use anneal_fair::oracle;
use anneal_fair::pipeline::{self, output, SweepPlan};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "anneal-fair",
    version,
    about = "Quantum annealing simulation of penalized graph bipartitioning and ground-state sampling fairness"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Base seed for instance generation
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output root directory
    #[arg(long, global = true, env = "ANNEAL_FAIR_OUT", default_value = "out")]
    out: PathBuf,
    /// Format of results printed to stdout (and extra record files)
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Relative tolerance of the integrator
    #[arg(long, global = true, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Absolute tolerance of the integrator
    #[arg(long, global = true, default_value_t = 1e-10)]
    abs_tol: f64,
    /// Minimum ground-state probability for a run to count as valid
    #[arg(long, global = true, default_value_t = fairness::DEFAULT_VALIDITY_THRESHOLD)]
    validity_threshold: f64,
    /// Report failures on stderr as one JSON object
    #[arg(long, global = true)]
    errors_json: bool,
    /// More log output (repeat for more)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Lambda,
    MuPlus,
}

impl From<Kind> for ControlKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Lambda => ControlKind::Lambda,
            Kind::MuPlus => ControlKind::MuPlus,
        }
    }
}

#[derive(Args, Debug)]
struct RunOpts {
    /// Keep raw energy units instead of autoscaling to hardware ranges
    #[arg(long)]
    no_autoscale: bool,
    /// Time integrator: rk45 (adaptive Dormand-Prince) or magnus
    #[arg(long, default_value = "rk45")]
    integrator: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate connected random instances with a given ground-state degeneracy
    Gen {
        /// Vertex count (even)
        #[arg(short = 'n')]
        n: usize,
        /// Number of instances
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Independent probability of each edge
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        /// Smallest edge weight (default 1)
        #[arg(long)]
        weight_min: Option<u64>,
        /// Largest edge weight (default n)
        #[arg(long)]
        weight_max: Option<u64>,
        /// Required number of spin-flip classes of optimal partitions
        #[arg(long, default_value_t = 2)]
        flip_classes: usize,
        /// Random draws per instance before giving up
        #[arg(long, default_value_t = 1_000_000)]
        max_attempts: u64,
        /// Target directory (default: {out}/gen_n{N}_seed{S})
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Print the exact classical analysis of an instance as JSON
    Info {
        /// Instance JSON file
        instance: PathBuf,
        /// Also report the quantum gap along the schedule for this λ
        #[arg(long)]
        gap_lambda: Option<f64>,
        /// Points of the schedule grid for --gap-lambda
        #[arg(long, default_value_t = 11)]
        gap_points: usize,
    },
    /// Run one anneal and print its fairness record
    Solve {
        /// Instance JSON file
        instance: PathBuf,
        /// Penalty mixing weight in [0, 1]
        #[arg(long, conflicts_with = "mu_plus", required_unless_present = "mu_plus")]
        lambda: Option<f64>,
        /// Penalty surplus over the instance threshold
        #[arg(long)]
        mu_plus: Option<f64>,
        /// Anneal time
        #[arg(short = 'T', long = "time")]
        time: f64,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Sweep λ or μ+ and anneal times on one instance
    Sweep {
        /// Instance JSON file
        instance: PathBuf,
        /// Swept control: λ or the surplus μ+ over the instance threshold
        #[arg(long, value_enum, default_value_t = Kind::Lambda)]
        kind: Kind,
        /// Control values (default: λ 0,0.1,..,1 or μ+ 0,0.2,..,1)
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Anneal times (default: 1e5 for λ, 1e1,1e2,1e3,1e4 for μ+)
        #[arg(short = 'T', long = "time", value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// Experiment name under the output root
        #[arg(long, default_value = "sweep")]
        name: String,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Multi-instance λ sweeps and the monotonic increase rate per size
    Scale {
        /// Sizes to study
        #[arg(long = "Ns", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        /// Instances per size (default 100, or 10 with --fast)
        #[arg(long)]
        count: Option<usize>,
        /// Anneal time (default 1e5, or 1e3 with --fast)
        #[arg(short = 'T', long = "time")]
        time: Option<f64>,
        /// Quick profile: T = 1e3 and 10 instances unless given explicitly
        #[arg(long)]
        fast: bool,
        /// λ values (default 0,0.1,..,1)
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Experiment name under the output root
        #[arg(long, default_value = "scale")]
        name: String,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Classify external samples against an instance and report fairness
    Ingest {
        /// Sample file (CSV `config,count` with optional gauge lines, or JSON)
        samples: PathBuf,
        /// Instance JSON file the samples were drawn for
        #[arg(long)]
        instance: PathBuf,
        /// Sample file format (default: from the extension)
        #[arg(long, value_enum)]
        input_format: Option<Format>,
    },
    /// Render SVG charts from an existing records.csv
    Plot {
        /// records.csv of a sweep or scaling run
        records: PathBuf,
        /// Target directory (default: plots/ next to the records file)
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Input | ErrorKind::Io => 2,
                ErrorKind::Numerical => 3,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Lib(e) => match e.kind() {
                ErrorKind::Usage => "usage",
                ErrorKind::Input => "input",
                ErrorKind::Io => "io",
                ErrorKind::Numerical => "numerical",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Write to stdout; a closed pipe ends the process quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(2);
    }
}

fn print_json<T: Serialize>(v: &T) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable output") + "\n"));
}

fn run_plan(kind: ControlKind, grid: Option<Vec<f64>>, times: Vec<f64>, g: &Global, run: &RunOpts) -> Result<SweepPlan, Failure> {
    let controls = grid.unwrap_or_else(|| match kind {
        ControlKind::Lambda => pipeline::default_lambda_grid(),
        ControlKind::MuPlus => pipeline::default_mu_plus_grid(),
    });
    let integrator: Integrator = run.integrator.parse()?;
    let plan = SweepPlan {
        autoscale: if run.no_autoscale {
            None
        } else {
            Some(model::AutoscaleRanges::default())
        },
        rel_tol: g.rel_tol,
        abs_tol: g.abs_tol,
        integrator,
        validity_threshold: g.validity_threshold,
        ..match kind {
            ControlKind::Lambda => SweepPlan::lambda(controls, times),
            ControlKind::MuPlus => SweepPlan::mu_plus(controls, times),
        }
    };
    plan.validate()?;
    Ok(plan)
}

fn software() -> serde_json::Value {
    json!({"name": "anneal-fair", "version": env!("CARGO_PKG_VERSION")})
}

fn cmd_gen(g: &Global, spec: GenSpec, count: usize, dir: Option<PathBuf>) -> CmdResult {
    spec.validate()?;
    let batch = generator::generate_batch(&spec, count)?;
    let dir = dir.unwrap_or_else(|| g.out.join(format!("gen_n{}_seed{}", spec.n, spec.seed)));
    generator::write_batch(&dir, &spec, &batch)?;
    match g.format {
        Format::Csv => emit(&generator::manifest_csv(&batch)),
        Format::Json => print_json(&json!({
            "dir": dir,
            "files": batch.iter().map(|b| generator::instance_file_name(spec.n, spec.seed, b.index)).collect::<Vec<_>>(),
            "attempts": batch.iter().map(|b| b.attempts).collect::<Vec<_>>(),
        })),
    }
    Ok(())
}

fn cmd_info(instance: &Path, gap_lambda: Option<f64>, gap_points: usize) -> CmdResult {
    let inst = GbpInstance::load(instance)?;
    let report = oracle::analyze(&inst)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["fingerprint"] = json!(inst.fingerprint());
    if let Some(lambda) = gap_lambda {
        if gap_points < 2 {
            return Err(usage("--gap-points must be at least 2"));
        }
        let h = pipeline::problem_model(&inst, &report, ControlKind::Lambda, lambda)?;
        let (h, _) = model::autoscale(&h, &model::AutoscaleRanges::default())?;
        let grid: Vec<f64> = (0..gap_points).map(|k| k as f64 / (gap_points - 1) as f64).collect();
        let gaps = oracle::quantum_gap(&h, &grid)?;
        v["gap"] = json!({"lambda": lambda, "points": gaps});
    }
    print_json(&v);
    Ok(())
}

fn cmd_solve(g: &Global, instance: &Path, kind: ControlKind, control: f64, time: f64, run: &RunOpts) -> CmdResult {
    let inst = GbpInstance::load(instance)?;
    let report = oracle::analyze(&inst)?;
    let plan = run_plan(kind, Some(vec![control]), vec![time], g, run)?;
    let record = pipeline::run_point(&inst, &report, &plan, control, time)?;
    match g.format {
        Format::Csv => emit(&fairness::records_to_csv(std::slice::from_ref(&record))),
        Format::Json => print_json(&record),
    }
    Ok(())
}

fn cmd_sweep(g: &Global, instance: &Path, plan: SweepPlan, name: &str) -> CmdResult {
    let inst = GbpInstance::load(instance)?;
    let report = oracle::analyze(&inst)?;
    let records = pipeline::run_sweep(&inst, &report, &plan)?;
    let failures: Vec<_> = records
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| json!({"control": r.control, "T": r.t, "error": f})))
        .collect();
    let manifest = json!({
        "experiment": name,
        "command": "sweep",
        "software": software(),
        "instance": {"fingerprint": inst.fingerprint(), "n": inst.n(), "edges": inst.edges().len()},
        "oracle": report,
        "plan": plan,
        "records": records.len(),
        "failures": failures,
    });
    let dir = output::experiment_dir(&g.out, name);
    output::write_sweep(&dir, &manifest, &records)?;
    match g.format {
        Format::Csv => emit(&fairness::records_to_csv(&records)),
        Format::Json => {
            output::write_file(&dir.join("records.json"), &output::to_pretty_json(&records))?;
            print_json(&records);
        }
    }
    Ok(())
}

fn cmd_scale(g: &Global, ns: &[usize], count: usize, plan: SweepPlan, name: &str) -> CmdResult {
    if count == 0 {
        return Err(usage("--count must be positive"));
    }
    let mut batches = Vec::new();
    for &n in ns {
        if n > anneal_fair::dynamics::MAX_DYNAMICS_SPINS {
            return Err(Error::TooLarge {
                what: "state-vector dynamics",
                n,
                max: anneal_fair::dynamics::MAX_DYNAMICS_SPINS,
            }
            .into());
        }
        let spec = GenSpec::new(n, g.seed);
        spec.validate()?;
        batches.push((n, generator::generate_batch(&spec, count)?));
    }
    let result = pipeline::run_scaling_on(&batches, &plan)?;
    let dir = output::experiment_dir(&g.out, name);
    for (n, batch) in &batches {
        generator::write_batch(&dir.join("instances").join(format!("n{n}")), &GenSpec::new(*n, g.seed), batch)?;
    }
    let manifest = json!({
        "experiment": name,
        "command": "scale",
        "software": software(),
        "seed": g.seed,
        "Ns": ns,
        "count": count,
        "plan": plan,
        "rows": result.rows,
        "instances": result.curves.iter().map(|c| json!({
            "n": c.n, "index": c.index, "seed": c.seed, "fingerprint": c.fingerprint, "monotone": c.monotone,
        })).collect::<Vec<_>>(),
    });
    output::write_scaling(&dir, &manifest, &result)?;
    match g.format {
        Format::Csv => emit(&output::scaling_markdown(&result)),
        Format::Json => {
            output::write_file(&dir.join("scaling.json"), &output::to_pretty_json(&result))?;
            emit(&output::scaling_markdown(&result));
        }
    }
    Ok(())
}

fn cmd_ingest(g: &Global, samples: &Path, instance: &Path, input_format: Option<Format>) -> CmdResult {
    let inst = GbpInstance::load(instance)?;
    let format = match input_format {
        Some(Format::Csv) => SampleFormat::Csv,
        Some(Format::Json) => SampleFormat::Json,
        None => SampleFormat::from_path(samples),
    };
    let set = ingest::parse_samples(samples, format)?;
    let report = ingest::empirical_fairness_with(&set, &inst, g.validity_threshold)?;
    match g.format {
        Format::Json => print_json(&report),
        Format::Csv => {
            let mut text = String::from("config,count,p,se\n");
            for s in &report.ground_states {
                text.push_str(&format!("{},{},{},{}\n", s.config, s.count, s.p, s.se));
            }
            emit(&text);
        }
    }
    Ok(())
}

fn cmd_plot(records: &Path, dir: Option<PathBuf>) -> CmdResult {
    let dir = dir.unwrap_or_else(|| records.parent().unwrap_or(Path::new(".")).join("plots"));
    for p in output::write_charts_from_csv(records, &dir)? {
        emit(&format!("{}\n", p.display()));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CmdResult {
    let g = &cli.global;
    for (name, v) in [("--rel-tol", g.rel_tol), ("--abs-tol", g.abs_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(usage(format!("{name} must be a positive number")));
        }
    }
    if !(0.0..=1.0).contains(&g.validity_threshold) {
        return Err(usage("--validity-threshold must lie in [0, 1]"));
    }
    match cli.command {
        Command::Gen {
            n,
            count,
            edge_prob,
            weight_min,
            weight_max,
            flip_classes,
            max_attempts,
            dir,
        } => {
            let spec = GenSpec {
                edge_prob,
                weight_range: (weight_min.unwrap_or(1), weight_max.unwrap_or(n as u64)),
                target_flip_classes: flip_classes,
                max_attempts,
                ..GenSpec::new(n, g.seed)
            };
            cmd_gen(g, spec, count, dir)
        }
        Command::Info {
            instance,
            gap_lambda,
            gap_points,
        } => cmd_info(&instance, gap_lambda, gap_points),
        Command::Solve {
            instance,
            lambda,
            mu_plus,
            time,
            run,
        } => {
            let (kind, control) = match (lambda, mu_plus) {
                (Some(l), None) => (ControlKind::Lambda, l),
                (None, Some(m)) => (ControlKind::MuPlus, m),
                _ => return Err(usage("give exactly one of --lambda and --mu-plus")),
            };
            cmd_solve(g, &instance, kind, control, time, &run)
        }
        Command::Sweep {
            instance,
            kind,
            grid,
            times,
            name,
            run,
        } => {
            let kind = ControlKind::from(kind);
            let times = times.unwrap_or_else(|| match kind {
                ControlKind::Lambda => vec![pipeline::DEFAULT_SCALING_TIME],
                ControlKind::MuPlus => pipeline::default_time_grid(),
            });
            let plan = run_plan(kind, grid, times, g, &run)?;
            cmd_sweep(g, &instance, plan, &name)
        }
        Command::Scale {
            ns,
            count,
            time,
            fast,
            grid,
            name,
            run,
        } => {
            let count = count.unwrap_or(if fast { 10 } else { 100 });
            let time = time.unwrap_or(if fast { 1e3 } else { pipeline::DEFAULT_SCALING_TIME });
            let plan = run_plan(ControlKind::Lambda, grid, vec![time], g, &run)?;
            cmd_scale(g, &ns, count, plan, &name)
        }
        Command::Ingest {
            samples,
            instance,
            input_format,
        } => cmd_ingest(g, &samples, &instance, input_format),
        Command::Plot { records, dir } => cmd_plot(&records, dir),
    }
}

fn report_failure(f: &Failure, errors_json: bool) {
    if errors_json {
        eprintln!(
            "{}",
            json!({"error": f.kind(), "message": f.message(), "exit_code": f.exit_code()})
        );
    } else {
        eprintln!("error: {}", f.message());
    }
}

fn main() -> ExitCode {
    let errors_json = std::env::args().any(|a| a == "--errors-json");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if errors_json {
                report_failure(&Failure::Usage(e.to_string().trim().to_string()), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(1);
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::new().default_filter_or(level)).init();
    let errors_json = cli.global.errors_json;
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            report_failure(&usage(e.to_string()), errors_json);
            return ExitCode::from(1);
        }
    };
    if cli.global.threads == Some(0) {
        report_failure(&usage("--threads must be positive"), errors_json);
        return ExitCode::from(1);
    }
    match pool.install(|| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report_failure(&f, errors_json);
            ExitCode::from(f.exit_code())
        }
    }
}
