//! On-grid sparse recovery of the interference and the symbol errors.

pub mod fista;
pub mod grid;

pub use fista::{weighted_lasso, LinearMap, ProxOptions, ProxOutcome};
pub use grid::{build_grid, grid_at, DelayWindow, GridDictionary, DEFAULT_ENTRY_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat_adj_vec, mat_vec, norm, C64};
use crate::outer::run_outer;
use crate::receiver::Receiver;
use crate::result::{Algorithm, Interference, RadarEstimate, SolveResult, TraceRow};
use crate::signal_model::{Dft, EffectiveChannel, FreqObservation, RadarDictionary};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Weights {
    /// Weight on the interference coefficients.
    pub lambda: f64,
    /// Weight on the symbol-error vector.
    pub gamma: f64,
}

impl L1Weights {
    /// `lambda = sigma kappa sqrt(2 log(JK))`, `gamma = sigma sqrt(2 log(JK)) / 2`.
    pub fn standard(sigma_w: f64, kappa: f64, grid_columns: usize) -> Self {
        let s = (2.0 * (grid_columns as f64).ln()).sqrt();
        Self {
            lambda: sigma_w * kappa * s,
            gamma: 0.5 * sigma_w * s,
        }
    }

    pub fn for_grid(sigma_w: f64, grid: &GridDictionary) -> Self {
        Self::standard(sigma_w, grid.column_norm_mean, grid.upsilon.ncols())
    }
}

/// Error-vector weight for the known-delay variant, `2 sigma sqrt(2 log N)`.
pub fn known_delay_gamma(sigma_w: f64, n: usize) -> f64 {
    2.0 * sigma_w * (2.0 * (n as f64).ln()).sqrt()
}

#[derive(Clone, Debug)]
pub struct L1Solution {
    pub alpha: Vec<C64>,
    pub v: Vec<C64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `[Phi | Upsilon]` acting on `[v; alpha]`.
struct JointMap<'a> {
    channel: &'a EffectiveChannel,
    upsilon: &'a nalgebra::DMatrix<C64>,
}

impl LinearMap for JointMap<'_> {
    fn dim_in(&self) -> usize {
        self.channel.n_symbols() + self.upsilon.ncols()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let m = self.channel.n_symbols();
        let mut out = self.channel.apply(&x[..m]);
        for (o, u) in out.iter_mut().zip(mat_vec(self.upsilon, &x[m..])) {
            *o += u;
        }
        out
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = self.channel.adjoint(y);
        out.extend(mat_adj_vec(self.upsilon, y));
        out
    }
}

/// Minimises `1/2 ||z - Phi v - Upsilon alpha||^2 + lambda ||alpha||_1 + gamma ||v||_1`.
pub fn solve_l1(
    z: &[C64],
    grid: &GridDictionary,
    channel: &EffectiveChannel,
    weights: L1Weights,
    opts: &ProxOptions,
    warm_alpha: Option<&[C64]>,
) -> Result<L1Solution> {
    solve_blocks(z, grid, channel, weights.lambda, weights.gamma, opts, warm_alpha)
}

/// Same problem with the radar delays known: the coefficient block is
/// unpenalised least squares and only `v` carries an l1 weight.
pub fn solve_known_delays(
    z: &[C64],
    grid: &GridDictionary,
    channel: &EffectiveChannel,
    gamma: f64,
    opts: &ProxOptions,
    warm_alpha: Option<&[C64]>,
) -> Result<L1Solution> {
    solve_blocks(z, grid, channel, 0.0, gamma, opts, warm_alpha)
}

fn solve_blocks(
    z: &[C64],
    grid: &GridDictionary,
    channel: &EffectiveChannel,
    lambda: f64,
    gamma: f64,
    opts: &ProxOptions,
    warm_alpha: Option<&[C64]>,
) -> Result<L1Solution> {
    if z.len() != grid.n() || channel.n_rows() != grid.n() {
        return Err(Error::Dimension("residual, grid and link sizes differ".into()));
    }
    let m = channel.n_symbols();
    let cols = grid.upsilon.ncols();
    let mut weights = vec![gamma; m];
    weights.extend(std::iter::repeat_n(lambda, cols));
    let start = warm_alpha.map(|a| {
        let mut x = vec![C64::new(0.0, 0.0); m];
        x.extend_from_slice(a);
        x
    });
    let op = JointMap {
        channel,
        upsilon: &grid.upsilon,
    };
    let out = weighted_lasso(&op, z, &weights, start.as_deref(), opts)?;
    let alpha = out.x[m..].to_vec();
    let mut v = out.x;
    v.truncate(m);
    Ok(L1Solution {
        alpha,
        v,
        objective_trace: out.trace,
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Blocks whose norm reaches `threshold_rel` times the largest block norm.
pub fn extract_supports(alpha: &[C64], k: usize, threshold_rel: f64) -> Vec<(usize, Vec<C64>)> {
    if k == 0 {
        return Vec::new();
    }
    let norms: Vec<f64> = alpha.chunks(k).map(norm).collect();
    let peak = norms.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Vec::new();
    }
    norms
        .iter()
        .enumerate()
        .filter(|(_, &nb)| nb > 0.0 && nb >= threshold_rel * peak)
        .map(|(j, _)| (j, alpha[j * k..(j + 1) * k].to_vec()))
        .collect()
}

/// Time-domain waveform `(1/N) F^H Dbar coeff`.
pub fn reconstruct_waveform(coeff: &[C64], dictionary: &RadarDictionary, dft: &Dft) -> Vec<C64> {
    dft.inverse(&dictionary.spectrum(coeff))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Csl1Options {
    pub max_outer: usize,
    pub inner: ProxOptions,
    /// Relative block-norm threshold for reporting a radar.
    pub threshold_rel: f64,
}

impl Default for Csl1Options {
    fn default() -> Self {
        Self {
            max_outer: 10,
            inner: ProxOptions::default(),
            threshold_rel: 0.05,
        }
    }
}

/// Iterates residual, on-grid solve and re-demodulation from the
/// interference-blind decisions until they reach a fixed point.
pub fn run_csl1(
    obs: &FreqObservation,
    rx: &Receiver,
    grid: &GridDictionary,
    weights: L1Weights,
    opts: &Csl1Options,
    truth: Option<&[C64]>,
) -> Result<SolveResult> {
    let outcome = run_outer(obs, rx, opts.max_outer, truth, |z, _, prev: Option<&L1Solution>| {
        let sol = solve_l1(z, grid, &rx.channel, weights, &opts.inner, prev.map(|s| s.alpha.as_slice()))?;
        Ok((sol.v.clone(), sol))
    })?;
    finish(Algorithm::Csl1, outcome, rx, grid, opts.threshold_rel)
}

/// The correction loop with the true radar delays supplied.
pub fn run_known_delays(
    obs: &FreqObservation,
    rx: &Receiver,
    delays: &[f64],
    gamma: f64,
    opts: &Csl1Options,
    truth: Option<&[C64]>,
) -> Result<SolveResult> {
    let grid = grid_at(rx.dft.split(), &rx.dictionary, delays)?;
    let outcome = run_outer(obs, rx, opts.max_outer, truth, |z, _, prev: Option<&L1Solution>| {
        let sol = solve_known_delays(z, &grid, &rx.channel, gamma, &opts.inner, prev.map(|s| s.alpha.as_slice()))?;
        Ok((sol.v.clone(), sol))
    })?;
    finish(Algorithm::Csl1Known, outcome, rx, &grid, 0.0)
}

fn finish(
    algorithm: Algorithm,
    outcome: crate::outer::OuterOutcome<L1Solution>,
    rx: &Receiver,
    grid: &GridDictionary,
    threshold_rel: f64,
) -> Result<SolveResult> {
    let (alpha, inner_trace, status) = match &outcome.state {
        Some(sol) => (
            sol.alpha.clone(),
            sol.objective_trace
                .iter()
                .enumerate()
                .map(|(i, &f)| TraceRow {
                    iter: i,
                    objective: f,
                    grad_norm: None,
                    step: None,
                })
                .collect(),
            if sol.converged { "converged" } else { "max_iter" },
        ),
        None => (vec![C64::new(0.0, 0.0); grid.upsilon.ncols()], Vec::new(), "not_run"),
    };
    let radars = extract_supports(&alpha, grid.k, threshold_rel)
        .into_iter()
        .map(|(j, coeff)| {
            let w = reconstruct_waveform(&coeff, &rx.dictionary, &rx.dft);
            RadarEstimate::new(grid.delays[j], rx.block_duration, coeff, w)
        })
        .collect();
    Ok(SolveResult {
        algorithm,
        symbols: outcome.symbols,
        correction: outcome.correction,
        interference: Interference::Grid {
            delays: grid.delays.clone(),
            alpha,
        },
        radars,
        outer_iterations: outcome.passes,
        converged: outcome.converged,
        ser_trace: outcome.ser_trace,
        inner_trace,
        solver_status: status.to_string(),
        flagged_subcarriers: outcome.flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_weights() {
        let w = L1Weights::standard(0.1, 7.0, 2580);
        let s = 0.1 * (2.0 * 2580f64.ln()).sqrt();
        assert!((w.lambda / 7.0 - s).abs() < 1e-12);
        assert!((w.gamma / 0.5 - s).abs() < 1e-12);
        assert!((known_delay_gamma(0.1, 129) - 0.2 * (2.0 * 129f64.ln()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn support_threshold_rule() {
        let k = 2;
        assert!(extract_supports(&[C64::new(0.0, 0.0); 6], k, 0.05).is_empty());
        let alpha = vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.04),
            C64::new(0.0, 0.0),
        ];
        let s = extract_supports(&alpha, k, 0.05);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, 1);
        assert_eq!(extract_supports(&alpha, k, 0.01).len(), 2);
    }
}
