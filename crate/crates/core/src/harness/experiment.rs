//! Monte-Carlo sweeps over scene parameters with per-trial seeding and
//! trial-ordered aggregation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{delay_rmse, waveform_relative_mse, TrialRadars};
use super::runner::{solve, SolverSettings};
use crate::error::{Error, Result};
use crate::receiver::Receiver;
use crate::result::Algorithm;
use crate::signal_model::{
    synthesize_approx, synthesize_exact, ChannelModel, Dft, IndexSplit, RadarDictionary, ScenarioSpec,
};
use crate::solver_l1::GridDictionary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Snr,
    Sir,
    /// Number of radars.
    #[serde(rename = "j")]
    Radars,
    /// Dictionary size.
    #[serde(rename = "k")]
    DictionarySize,
    /// Ricean factor `rho / sigma_h`.
    Ricean,
    /// Outer iteration cap.
    Iterations,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Snr => "snr",
            SweepVar::Sir => "sir",
            SweepVar::Radars => "j",
            SweepVar::DictionarySize => "k",
            SweepVar::Ricean => "ricean",
            SweepVar::Iterations => "iterations",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub trials: usize,
    /// Trial `t` uses seed `seed + t` at every sweep point.
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub base: ScenarioSpec,
    /// Quadrature synthesis instead of the frequency-domain model.
    pub exact: bool,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    pub solver: SolverSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            sweep: SweepVar::Sir,
            values: vec![0.0],
            trials: 10,
            seed: 0,
            algorithms: vec![Algorithm::Iter0, Algorithm::Csl1, Algorithm::CsanCg],
            base: ScenarioSpec {
                n: 65,
                ..ScenarioSpec::default()
            },
            exact: false,
            threads: 0,
            solver: SolverSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep values are empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithm selected".into()));
        }
        let integral = matches!(
            self.sweep,
            SweepVar::Radars | SweepVar::DictionarySize | SweepVar::Iterations
        );
        for &v in &self.values {
            if !v.is_finite() || (integral && (v < 0.0 || v.fract() != 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "invalid {} sweep value {v}",
                    self.sweep.name()
                )));
            }
        }
        self.solver.validate()?;
        for &v in &self.values {
            self.point(v).0.validate()?;
        }
        Ok(())
    }

    /// Scene generator and solver settings at one sweep value.
    pub fn point(&self, value: f64) -> (ScenarioSpec, SolverSettings) {
        let mut spec = self.base.clone();
        let mut solver = self.solver.clone();
        match self.sweep {
            SweepVar::Snr => spec.snr_db = Some(value),
            SweepVar::Sir => spec.sir_db = Some(value),
            SweepVar::Radars => spec.num_radars = value as usize,
            SweepVar::DictionarySize => spec.k = value as usize,
            SweepVar::Ricean => spec.channel = ChannelModel::Ricean { factor: Some(value) },
            SweepVar::Iterations => {
                solver.csl1.max_outer = value as usize;
                solver.csan.max_outer = value as usize;
            }
        }
        (spec, solver)
    }

    fn trace_len(&self) -> usize {
        self.values
            .iter()
            .map(|&v| {
                let (_, s) = self.point(v);
                s.csl1.max_outer.max(s.csan.max_outer)
            })
            .max()
            .unwrap_or(0)
            + 1
    }
}

/// Named configurations following the simulation section. Desk scale uses
/// `N = 65` and 200 trials; `full_scale` restores `N = 129`.
pub fn preset(name: &str, full_scale: bool) -> Result<ExperimentConfig> {
    let n = if full_scale { 129 } else { 65 };
    let base = ScenarioSpec {
        n,
        ..ScenarioSpec::default()
    };
    let all = vec![
        Algorithm::Iter0,
        Algorithm::Csl1,
        Algorithm::Csl1Known,
        Algorithm::CsanCg,
    ];
    let snr_sweep = vec![8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
    let cfg = |sweep, values: Vec<f64>, base: ScenarioSpec, algorithms: Vec<Algorithm>| ExperimentConfig {
        scenario: name.to_string(),
        sweep,
        values,
        trials: 200,
        seed: 1,
        algorithms,
        base,
        ..ExperimentConfig::default()
    };
    let c = match name {
        "fig3" => cfg(
            SweepVar::Sir,
            vec![0.0],
            ScenarioSpec {
                snr_db: Some(15.0),
                ..base
            },
            vec![Algorithm::Iter0, Algorithm::Csl1, Algorithm::CsanCg],
        ),
        "fig5a" | "fig5b" => cfg(
            SweepVar::Snr,
            snr_sweep,
            ScenarioSpec {
                sir_db: Some(if name == "fig5a" { -5.0 } else { 5.0 }),
                ..base
            },
            all,
        ),
        "fig6" => cfg(
            SweepVar::Snr,
            snr_sweep,
            base,
            vec![Algorithm::Csl1, Algorithm::CsanCg],
        ),
        "fig7a" => cfg(
            SweepVar::Radars,
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            ScenarioSpec {
                snr_db: Some(18.0),
                ..base
            },
            vec![Algorithm::Iter0, Algorithm::Csl1, Algorithm::CsanCg],
        ),
        "fig7b" => cfg(
            SweepVar::DictionarySize,
            vec![1.0, 3.0, 5.0, 7.0, 9.0],
            ScenarioSpec {
                snr_db: Some(18.0),
                ..base
            },
            vec![Algorithm::Iter0, Algorithm::Csl1, Algorithm::CsanCg],
        ),
        "fig8" => cfg(
            SweepVar::Ricean,
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            ScenarioSpec {
                snr_db: Some(18.0),
                ..base
            },
            vec![Algorithm::Iter0, Algorithm::Csl1, Algorithm::CsanCg],
        ),
        other => return Err(Error::InvalidParameter(format!("unknown preset '{other}'"))),
    };
    Ok(c)
}

pub const PRESETS: [&str; 7] = ["fig3", "fig5a", "fig5b", "fig6", "fig7a", "fig7b", "fig8"];

/// One algorithm on one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoTrial {
    pub algorithm: Algorithm,
    /// SER after each outer pass (entry 0 is the initial decision), held at
    /// its final value after the loop stops.
    pub ser_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub status: String,
    pub radars: TrialRadars,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    /// `Err` holds the diagnostic of a failed solve.
    pub outcomes: Vec<std::result::Result<AlgoTrial, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algorithm: Algorithm,
    pub trials_ok: usize,
    pub failures: usize,
    pub ser_mean: Vec<f64>,
    pub ser_ci: Vec<f64>,
    pub converged_fraction: f64,
    pub mean_outer_iterations: f64,
    /// Seconds; `None` when no radar was identified in any trial.
    pub delay_rmse: Option<f64>,
    pub waveform_mse: Option<f64>,
    pub identified_fraction: f64,
    pub mean_wall_time: f64,
}

impl AlgoSummary {
    pub fn final_ser(&self) -> f64 {
        self.ser_mean.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub value: f64,
    pub trials: Vec<TrialResult>,
    pub summaries: Vec<AlgoSummary>,
}

impl PointResult {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgoSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }

    /// Per-trial SER traces of one algorithm, successful trials only.
    pub fn traces(&self, algorithm: Algorithm) -> Vec<&[f64]> {
        self.trials
            .iter()
            .filter_map(|t| {
                t.outcomes
                    .iter()
                    .filter_map(|o| o.as_ref().ok())
                    .find(|o| o.algorithm == algorithm)
                    .map(|o| o.ser_trace.as_slice())
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub points: Vec<PointResult>,
    pub threads: usize,
    pub elapsed: f64,
}

/// Draws, synthesizes and solves every trial of every sweep point.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if config.threads > 0 {
        builder = builder.num_threads(config.threads);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let trace_len = config.trace_len();
    let mut points = Vec::with_capacity(config.values.len());
    for &value in &config.values {
        let (spec, settings) = config.point(value);
        let split = IndexSplit::new(spec.n)?;
        let dictionary = spec.dictionary(&Dft::new(split))?;
        let grid = if config.algorithms.contains(&Algorithm::Csl1) {
            Some(settings.grid_for(&split, &dictionary)?)
        } else {
            None
        };
        let ctx = TrialContext {
            spec: &spec,
            settings: &settings,
            dictionary: &dictionary,
            grid: grid.as_ref(),
            algorithms: &config.algorithms,
            exact: config.exact,
            trace_len,
        };
        let trials: Vec<TrialResult> = pool.install(|| {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|t| ctx.run(config.seed.wrapping_add(t)))
                .collect::<Result<Vec<_>>>()
        })?;
        let summaries = config
            .algorithms
            .iter()
            .map(|&a| summarize(a, &trials, spec.block_duration / (4.0 * spec.n as f64)))
            .collect();
        points.push(PointResult {
            value,
            trials,
            summaries,
        });
    }
    Ok(ExperimentResult {
        config: config.clone(),
        points,
        threads: pool.current_num_threads(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

struct TrialContext<'a> {
    spec: &'a ScenarioSpec,
    settings: &'a SolverSettings,
    dictionary: &'a RadarDictionary,
    grid: Option<&'a GridDictionary>,
    algorithms: &'a [Algorithm],
    exact: bool,
    trace_len: usize,
}

impl TrialContext<'_> {
    /// Scene-generation errors abort the experiment; solver errors are
    /// recorded against the trial.
    fn run(&self, seed: u64) -> Result<TrialResult> {
        let scene = self.spec.draw_with(seed, self.dictionary)?;
        let obs = if self.exact {
            synthesize_exact(&scene)?
        } else {
            synthesize_approx(&scene)?
        };
        let rx = Receiver::from_scene(&scene)?;
        let truth = scene.symbols();
        let known: Vec<f64> = scene.radars.iter().map(|r| r.normalized_delay).collect();
        let truth_delays: Vec<f64> = scene.radars.iter().map(|r| r.delay).collect();
        let truth_waveforms = scene.radar_waveforms();
        let outcomes = self
            .algorithms
            .iter()
            .map(|&algorithm| {
                let t0 = Instant::now();
                let res = solve(
                    algorithm,
                    &obs,
                    &rx,
                    self.settings,
                    self.grid,
                    Some(&known),
                    Some(&truth),
                )
                .map_err(|e| e.to_string())?;
                let mut trace = res.ser_trace.clone().unwrap_or_default();
                let last = trace.last().copied().unwrap_or(f64::NAN);
                trace.resize(self.trace_len.max(trace.len()), last);
                trace.truncate(self.trace_len);
                Ok(AlgoTrial {
                    algorithm,
                    ser_trace: trace,
                    outer_iterations: res.outer_iterations,
                    converged: res.converged,
                    status: res.solver_status.clone(),
                    radars: TrialRadars {
                        truth_delays: truth_delays.clone(),
                        truth_waveforms: truth_waveforms.clone(),
                        est_delays: res.radars.iter().map(|r| r.delay).collect(),
                        est_waveforms: res.radars.iter().map(|r| r.waveform.clone()).collect(),
                    },
                    wall_time: t0.elapsed().as_secs_f64(),
                })
            })
            .collect();
        Ok(TrialResult { seed, outcomes })
    }
}

fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

fn summarize(algorithm: Algorithm, trials: &[TrialResult], radius: f64) -> AlgoSummary {
    let mut ok: Vec<&AlgoTrial> = Vec::new();
    let mut failures = 0;
    for t in trials {
        match t.outcomes.iter().find(|o| match o {
            Ok(a) => a.algorithm == algorithm,
            Err(_) => false,
        }) {
            Some(Ok(a)) => ok.push(a),
            _ => failures += 1,
        }
    }
    let len = ok.first().map(|a| a.ser_trace.len()).unwrap_or(0);
    let (ser_mean, ser_ci) = (0..len)
        .map(|i| mean_ci(&ok.iter().map(|a| a.ser_trace[i]).collect::<Vec<_>>()))
        .unzip();
    let count = ok.len().max(1) as f64;
    let radars: Vec<TrialRadars> = ok.iter().map(|a| a.radars.clone()).collect();
    let with_radars: Vec<TrialRadars> = radars.iter().filter(|r| !r.truth_delays.is_empty()).cloned().collect();
    let (rmse, sets) = delay_rmse(&with_radars, radius);
    let total: usize = with_radars.iter().map(|r| r.truth_delays.len()).sum();
    let found: usize = sets.iter().map(|s| s.len()).sum();
    AlgoSummary {
        algorithm,
        trials_ok: ok.len(),
        failures,
        ser_mean,
        ser_ci,
        converged_fraction: ok.iter().filter(|a| a.converged).count() as f64 / count,
        mean_outer_iterations: ok.iter().map(|a| a.outer_iterations as f64).sum::<f64>() / count,
        delay_rmse: rmse,
        waveform_mse: waveform_relative_mse(&with_radars, radius),
        identified_fraction: if total == 0 { 0.0 } else { found as f64 / total as f64 },
        mean_wall_time: ok.iter().map(|a| a.wall_time).sum::<f64>() / count,
    }
}

/// `sweep,algo,iteration,ser_mean,ser_ci`, one row per sweep value,
/// algorithm and outer iteration.
pub fn results_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("sweep,algo,iteration,ser_mean,ser_ci\n");
    for p in &result.points {
        for s in &p.summaries {
            for (i, (m, c)) in s.ser_mean.iter().zip(&s.ser_ci).enumerate() {
                out.push_str(&format!("{},{},{},{},{}\n", p.value, s.algorithm, i, m, c));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct SummaryPoint<'a> {
    value: f64,
    algorithms: &'a [AlgoSummary],
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    sweep: &'a str,
    trials: usize,
    seed: u64,
    threads: usize,
    elapsed_seconds: f64,
    points: Vec<SummaryPoint<'a>>,
}

/// Aggregates per sweep value and algorithm, plus run metadata.
pub fn summary_json(result: &ExperimentResult) -> Result<String> {
    let s = Summary {
        scenario: &result.config.scenario,
        sweep: result.config.sweep.name(),
        trials: result.config.trials,
        seed: result.config.seed,
        threads: result.threads,
        elapsed_seconds: result.elapsed,
        points: result
            .points
            .iter()
            .map(|p| SummaryPoint {
                value: p.value,
                algorithms: &p.summaries,
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            preset(name, false).unwrap().validate().unwrap();
            assert_eq!(preset(name, true).unwrap().base.n, 129);
        }
        assert!(preset("fig99", false).is_err());
    }

    #[test]
    fn ci_of_constant_samples_is_zero() {
        assert_eq!(mean_ci(&[0.5, 0.5, 0.5]), (0.5, 0.0));
        let (m, c) = mean_ci(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((c - 1.96 * 0.5f64.sqrt() / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        let c = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            sweep: SweepVar::Radars,
            values: vec![1.5],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
