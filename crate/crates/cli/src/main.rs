//! Command-line front end: scene synthesis, single solves, dual-certificate
//! sampling, Monte-Carlo sweeps and the acceptance checks.
//!
//! Exit codes: 0 success, 1 solver or check failure, 2 usage or invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use radcom::demodulator::{demodulate_initial, residual};
use radcom::harness::check::{run_all, run_quick, CheckScale};
use radcom::harness::experiment::{preset, results_csv, run_experiment, summary_json, ExperimentConfig};
use radcom::harness::runner::{solve, SolverSettings};
use radcom::param_extract::dual_from_primal;
use radcom::receiver::Receiver;
use radcom::result::Algorithm;
use radcom::signal_model::{synthesize_approx, synthesize_exact, FreqObservation, ScenarioSpec, SceneConfig};
use radcom::solver_an::{admm_solve, AnProblem, AnWeights};

#[derive(Parser)]
#[command(name = "radcom", version, about = "Radar interference removal and data demodulation for OFDM receivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a scene and write its frequency-domain observation as CSV.
    Synth(SynthArgs),
    /// Run one algorithm on one observation and write the result as JSON.
    Solve(SolveArgs),
    /// Sample the dual polynomial of one atomic-norm solve as CSV.
    Certify(CertifyArgs),
    /// Run a Monte-Carlo experiment; writes results.csv and summary.json.
    Mc(McArgs),
    /// Run the acceptance checks and print one line per criterion.
    Check(CheckArgs),
}

#[derive(Args)]
struct SceneArgs {
    /// Scene generator JSON (missing fields take their defaults).
    #[arg(long)]
    scene: PathBuf,
    /// Scene seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Quadrature synthesis of the received waveform instead of the
    /// frequency-domain model.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Cg,
    Admm,
}

#[derive(Args)]
struct WeightArgs {
    /// Multiplier applied to the noise level in the standard weights.
    #[arg(long)]
    weight_scale: Option<f64>,
    /// Interference weight override.
    #[arg(long)]
    lambda: Option<f64>,
    /// Error-vector weight override.
    #[arg(long)]
    gamma: Option<f64>,
    /// Solver for the atomic-norm algorithm.
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
}

impl WeightArgs {
    fn apply(&self, settings: &mut SolverSettings) {
        if let Some(s) = self.weight_scale {
            settings.weight_scale = s;
        }
        if self.lambda.is_some() {
            settings.lambda = self.lambda;
        }
        if self.gamma.is_some() {
            settings.gamma = self.gamma;
        }
    }

    fn algorithm(&self, a: Algorithm) -> Algorithm {
        match (a, self.solver) {
            (Algorithm::CsanCg | Algorithm::CsanAdmm, Some(SolverKind::Cg)) => Algorithm::CsanCg,
            (Algorithm::CsanCg | Algorithm::CsanAdmm, Some(SolverKind::Admm)) => Algorithm::CsanAdmm,
            _ => a,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Observation CSV produced by `synth`.
    #[arg(long)]
    obs: PathBuf,
    #[arg(long)]
    algo: Algorithm,
    #[command(flatten)]
    weights: WeightArgs,
    /// Solver settings JSON.
    #[arg(long)]
    settings: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long)]
    obs: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    /// Number of delays sampled; defaults to 16 N.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct McArgs {
    /// Experiment JSON.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Named preset (fig3, fig5a, fig5b, fig6, fig7a, fig7b, fig8).
    #[arg(long)]
    preset: Option<String>,
    /// With `--preset`, use `N = 129` instead of the desk-scale `N = 65`.
    #[arg(long)]
    full_scale: bool,
    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Restrict to these algorithms.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    weights: WeightArgs,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Include the Monte-Carlo criteria.
    #[arg(long)]
    full: bool,
    /// Trials per Monte-Carlo criterion.
    #[arg(long, default_value_t = 200)]
    trials: usize,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Solver(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

/// Configuration and input problems count as usage errors; everything the
/// numerics report is a solver failure.
fn classify(e: radcom::Error) -> Failure {
    use radcom::Error as E;
    match e {
        E::InvalidParameter(_) | E::Parse(_) | E::Json(_) | E::Io(_) | E::Dimension(_) | E::GridTooLarge { .. } => {
            Failure::Usage(e.into())
        }
        _ => Failure::Solver(e.into()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(usage)
}

/// Writes to standard output, treating a closed pipe as success.
fn print_text(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Solver(e.into())),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Solver)
}

fn load_scene(args: &SceneArgs) -> Result<SceneConfig, Failure> {
    let spec: ScenarioSpec = read_json(&args.scene)?;
    spec.draw(args.seed).map_err(classify)
}

fn load_obs(path: &Path, scene: &SceneConfig) -> Result<FreqObservation, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    let obs = FreqObservation::from_csv(&text, scene.noise_var).map_err(classify)?;
    if obs.values.len() != scene.n() {
        return Err(usage(anyhow::anyhow!(
            "observation has {} rows, scene has N = {}",
            obs.values.len(),
            scene.n()
        )));
    }
    Ok(obs)
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let scene = load_scene(&args.scene)?;
    let obs = if args.exact {
        synthesize_exact(&scene)
    } else {
        synthesize_approx(&scene)
    }
    .map_err(classify)?;
    write_text(&args.out, &obs.to_csv())
}

fn run_solve(args: SolveArgs) -> Result<(), Failure> {
    let scene = load_scene(&args.scene)?;
    let obs = load_obs(&args.obs, &scene)?;
    let rx = Receiver::from_scene(&scene).map_err(classify)?;
    let mut settings: SolverSettings = match &args.settings {
        Some(p) => read_json(p)?,
        None => SolverSettings::default(),
    };
    args.weights.apply(&mut settings);
    let known: Vec<f64> = scene.radars.iter().map(|r| r.normalized_delay).collect();
    let truth = scene.symbols();
    let algo = args.weights.algorithm(args.algo);
    let result = solve(algo, &obs, &rx, &settings, None, Some(&known), Some(&truth)).map_err(classify)?;
    let json = serde_json::to_string_pretty(&result).map_err(|e| Failure::Solver(e.into()))?;
    match &args.out {
        Some(p) => write_text(p, &json),
        None => print_text(&json),
    }
}

fn certify(args: CertifyArgs) -> Result<(), Failure> {
    let scene = load_scene(&args.scene)?;
    let obs = load_obs(&args.obs, &scene)?;
    let rx = Receiver::from_scene(&scene).map_err(classify)?;
    let mut settings = SolverSettings::default();
    args.weights.apply(&mut settings);
    let initial = demodulate_initial(&obs, &rx.channel, &rx.constellation).map_err(classify)?;
    let z = residual(&obs, &initial.symbols, &rx.channel).map_err(classify)?;
    let mut w = AnWeights::standard(settings.weight_sigma(&rx), rx.k(), rx.n());
    w.lambda = settings.lambda.unwrap_or(w.lambda);
    w.gamma = settings.gamma.unwrap_or(w.gamma);
    let problem = AnProblem {
        z: &z,
        dbar: &rx.dictionary.columns,
        channel: &rx.channel,
        lambda: w.lambda,
        gamma: w.gamma,
    };
    let state = admm_solve(&problem, &settings.csan.admm, None).map_err(classify)?;
    let cert = dual_from_primal(&problem, &state.x, &state.v, rx.dft.split());
    let points = args.points.unwrap_or(16 * rx.n()).max(1);
    let mut csv = String::from("tau,q_norm,q_over_lambda\n");
    for i in 0..points {
        let tau = i as f64 / points as f64;
        let q = cert.norm(tau);
        csv.push_str(&format!("{tau},{q},{}\n", q / w.lambda));
    }
    write_text(&args.out, &csv)
}

fn mc(args: McArgs) -> Result<(), Failure> {
    let mut config: ExperimentConfig = match (&args.config, &args.preset) {
        (Some(p), _) => read_json(p)?,
        (None, Some(name)) => preset(name, args.full_scale).map_err(classify)?,
        (None, None) => return Err(usage(anyhow::anyhow!("either --config or --preset is required"))),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(t) = args.threads {
        config.threads = t;
    }
    if !args.algo.is_empty() {
        config.algorithms = args.algo.clone();
    }
    config.exact |= args.exact;
    args.weights.apply(&mut config.solver);
    config.algorithms = config.algorithms.iter().map(|&a| args.weights.algorithm(a)).collect();
    config.algorithms.dedup();
    config.validate().map_err(classify)?;
    if args.print_config {
        let json = serde_json::to_string_pretty(&config).map_err(|e| Failure::Solver(e.into()))?;
        return print_text(&json);
    }
    let result = run_experiment(&config).map_err(classify)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(usage)?;
    write_text(&args.out.join("results.csv"), &results_csv(&result))?;
    write_text(&args.out.join("summary.json"), &summary_json(&result).map_err(classify)?)?;
    for p in &result.points {
        for s in &p.summaries {
            if s.failures > 0 {
                eprintln!(
                    "warning: {} failed on {} of {} trials at {} = {}",
                    s.algorithm,
                    s.failures,
                    config.trials,
                    config.sweep.name(),
                    p.value
                );
            }
        }
    }
    Ok(())
}

fn check(args: CheckArgs) -> Result<(), Failure> {
    let outcomes = if args.full {
        run_all(CheckScale {
            outer_loop_trials: args.trials,
            known_delay_trials: args.trials,
        })
    } else {
        run_quick()
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::Solver(anyhow::anyhow!("{failed} of {} criteria failed", outcomes.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Solve(a) => run_solve(a),
        Command::Certify(a) => certify(a),
        Command::Mc(a) => mc(a),
        Command::Check(a) => check(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
