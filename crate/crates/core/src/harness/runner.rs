//! One-call dispatch from an algorithm name to its estimator.

use serde::{Deserialize, Serialize};

use crate::demodulator::demodulate_initial;
use crate::error::{Error, Result};
use crate::harness::metrics::ser;
use crate::linalg::C64;
use crate::receiver::Receiver;
use crate::result::{Algorithm, Interference, SolveResult};
use crate::signal_model::{FreqObservation, IndexSplit, RadarDictionary};
use crate::solver_an::{run_csan, AnSolver, AnWeights, CsanOptions};
use crate::solver_l1::{
    build_grid, known_delay_gamma, run_csl1, run_known_delays, Csl1Options, DelayWindow, GridDictionary, L1Weights,
    DEFAULT_ENTRY_CAP,
};

/// Noise level assumed by the default weights when the scene is noiseless,
/// relative to the constellation amplitude.
pub const SIGMA_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Delay grid points per chip for CS-L1.
    pub grid_oversampling: usize,
    /// Multiplies the noise level entering every default weight.
    pub weight_scale: f64,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub csl1: Csl1Options,
    pub csan: CsanOptions,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_oversampling: 4,
            weight_scale: 1.0,
            lambda: None,
            gamma: None,
            csl1: Csl1Options::default(),
            csan: CsanOptions::default(),
        }
    }
}

impl SolverSettings {
    /// Noise level fed to the weight formulas.
    pub fn weight_sigma(&self, rx: &Receiver) -> f64 {
        let floor = SIGMA_FLOOR * rx.constellation.energy().sqrt();
        rx.sigma_w().max(floor) * self.weight_scale
    }

    pub fn grid(&self, rx: &Receiver) -> Result<GridDictionary> {
        self.grid_for(rx.dft.split(), &rx.dictionary)
    }

    /// `oversampling * N` delays spread over the whole block.
    pub fn grid_for(&self, split: &IndexSplit, dictionary: &RadarDictionary) -> Result<GridDictionary> {
        build_grid(
            split,
            dictionary,
            self.grid_oversampling,
            DelayWindow::Full,
            DEFAULT_ENTRY_CAP,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight_scale > 0.0 && self.weight_scale.is_finite()) {
            return Err(Error::InvalidParameter("weight_scale must be positive".into()));
        }
        for w in [self.lambda, self.gamma].into_iter().flatten() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter("weights must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Runs `algorithm` on one observation. `grid` is only used by CS-L1 and
/// built on demand when absent; `known_delays` (normalized) is required by
/// the known-delay variant.
pub fn solve(
    algorithm: Algorithm,
    obs: &FreqObservation,
    rx: &Receiver,
    settings: &SolverSettings,
    grid: Option<&GridDictionary>,
    known_delays: Option<&[f64]>,
    truth: Option<&[C64]>,
) -> Result<SolveResult> {
    settings.validate()?;
    let sigma = settings.weight_sigma(rx);
    match algorithm {
        Algorithm::Iter0 => {
            let d = demodulate_initial(obs, &rx.channel, &rx.constellation)?;
            Ok(SolveResult {
                algorithm,
                ser_trace: truth.map(|t| vec![ser(t, &d.symbols)]),
                correction: vec![C64::new(0.0, 0.0); d.symbols.len()],
                symbols: d.symbols,
                interference: Interference::None,
                radars: Vec::new(),
                outer_iterations: 0,
                converged: true,
                inner_trace: Vec::new(),
                solver_status: "not_run".into(),
                flagged_subcarriers: d.flagged,
            })
        }
        Algorithm::Csl1 => {
            let owned;
            let grid = match grid {
                Some(g) => g,
                None => {
                    owned = settings.grid(rx)?;
                    &owned
                }
            };
            let mut w = L1Weights::for_grid(sigma, grid);
            w.lambda = settings.lambda.unwrap_or(w.lambda);
            w.gamma = settings.gamma.unwrap_or(w.gamma);
            run_csl1(obs, rx, grid, w, &settings.csl1, truth)
        }
        Algorithm::Csl1Known => {
            let delays = known_delays
                .ok_or_else(|| Error::InvalidParameter("the known-delay variant needs the radar delays".into()))?;
            let gamma = settings.gamma.unwrap_or_else(|| known_delay_gamma(sigma, rx.n()));
            run_known_delays(obs, rx, delays, gamma, &settings.csl1, truth)
        }
        Algorithm::CsanCg | Algorithm::CsanAdmm => {
            let mut w = AnWeights::standard(sigma, rx.k(), rx.n());
            w.lambda = settings.lambda.unwrap_or(w.lambda);
            w.gamma = settings.gamma.unwrap_or(w.gamma);
            let mut opts = settings.csan.clone();
            opts.solver = if algorithm == Algorithm::CsanCg {
                AnSolver::Cg
            } else {
                AnSolver::Admm
            };
            run_csan(obs, rx, w, &opts, truth)
        }
    }
}
