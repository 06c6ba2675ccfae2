//! Gridless joint estimation: an atomic-norm program over the interference
//! matrix, solved either by a factored conjugate-gradient method or by a
//! reference ADMM on the semidefinite form.

pub mod admm;
pub mod cg;
pub mod init;
pub mod problem;
pub mod smooth;
pub mod toeplitz;

pub use admm::{admm_solve, AdmmOptions};
pub use cg::{cg_solve, BetaRule, CgOptions, CgStatus, CgTrace};
pub use init::{init_factor, InitStrategy};
pub use problem::{AnProblem, FactorParams, FactorState, SdpState};
pub use smooth::{log_cosh, smoothed_l1, smoothed_l1_grad};
pub use toeplitz::{hermitian_toeplitz, toeplitz_project};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{hermitian_eigen, C64};
use crate::outer::run_outer;
use crate::param_extract::extract_radars;
use crate::receiver::Receiver;
use crate::result::{Algorithm, Interference, SolveResult, TraceRow};
use crate::signal_model::FreqObservation;

/// Number of eigenvalues of the Hermitian matrix at or above `rel_tol` times the largest.
pub fn rank_of_solution(z: &DMatrix<C64>, rel_tol: f64) -> usize {
    if z.nrows() == 0 {
        return 0;
    }
    let (values, _) = hermitian_eigen(z);
    let top = values.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v >= rel_tol * top).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnWeights {
    pub lambda: f64,
    pub gamma: f64,
}

impl AnWeights {
    /// `lambda = sigma sqrt(K N ln(K N))`, `gamma = lambda / sqrt(N)`.
    pub fn standard(sigma_w: f64, k: usize, n: usize) -> Self {
        let kn = (k * n) as f64;
        let lambda = sigma_w * (kn * kn.ln()).sqrt();
        Self {
            lambda,
            gamma: lambda / (n as f64).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnSolver {
    Cg,
    Admm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsanOptions {
    pub solver: AnSolver,
    pub max_outer: usize,
    pub params: FactorParams,
    pub cg: CgOptions,
    pub admm: AdmmOptions,
    pub init: InitStrategy,
    /// Largest number of exponentials sought per row.
    pub max_order: usize,
    /// Association radius in normalized delay; `None` uses `1/(4N)`.
    pub delta: Option<f64>,
}

impl Default for CsanOptions {
    fn default() -> Self {
        Self {
            solver: AnSolver::Cg,
            max_outer: 10,
            params: FactorParams::default(),
            cg: CgOptions::default(),
            admm: AdmmOptions::default(),
            init: InitStrategy::default(),
            max_order: 6,
            delta: None,
        }
    }
}

enum PassState {
    Cg(FactorState, CgTrace),
    Admm(SdpState, f64),
}

impl PassState {
    fn x(&self, n: usize) -> DMatrix<C64> {
        match self {
            PassState::Cg(f, _) => f.x_matrix(n),
            PassState::Admm(s, _) => s.x.clone(),
        }
    }
}

/// The correction loop with the atomic-norm estimator in each pass. A CG
/// pass restarts from the previous factor with the error vector cleared.
pub fn run_csan(
    obs: &FreqObservation,
    rx: &Receiver,
    weights: AnWeights,
    opts: &CsanOptions,
    truth: Option<&[C64]>,
) -> Result<SolveResult> {
    let dbar = &rx.dictionary.columns;
    let outcome = run_outer(obs, rx, opts.max_outer, truth, |z, _, prev: Option<&PassState>| {
        let problem = AnProblem {
            z,
            dbar,
            channel: &rx.channel,
            lambda: weights.lambda,
            gamma: weights.gamma,
        };
        match opts.solver {
            AnSolver::Cg => {
                let init = match prev {
                    Some(PassState::Cg(f, _)) => FactorState {
                        factor: f.factor.clone(),
                        errors: vec![C64::new(0.0, 0.0); problem.m()],
                        params: opts.params,
                    },
                    _ => init_factor(&problem, opts.params, opts.init)?,
                };
                let (state, trace) = cg_solve(&problem, init, &opts.cg)?;
                Ok((state.errors.clone(), PassState::Cg(state, trace)))
            }
            AnSolver::Admm => {
                let warm = match prev {
                    Some(PassState::Admm(s, _)) => Some(s),
                    _ => None,
                };
                let state = admm_solve(&problem, &opts.admm, warm)?;
                let objective = problem.sdp_objective(&state);
                Ok((state.v.clone(), PassState::Admm(state, objective)))
            }
        }
    })?;
    let n = rx.n();
    let delta = opts.delta.unwrap_or(1.0 / (4.0 * n as f64));
    let (x, inner_trace, status) = match &outcome.state {
        Some(state) => {
            let (rows, status) = match state {
                PassState::Cg(_, t) => (
                    (0..t.objective.len())
                        .map(|i| TraceRow {
                            iter: i,
                            objective: t.objective[i],
                            grad_norm: Some(t.grad_norm[i]),
                            step: Some(t.step[i]),
                        })
                        .collect(),
                    t.status.name(),
                ),
                PassState::Admm(s, objective) => (
                    vec![TraceRow {
                        iter: s.iterations,
                        objective: *objective,
                        grad_norm: None,
                        step: None,
                    }],
                    if s.converged { "converged" } else { "max_iter" },
                ),
            };
            (state.x(n), rows, status)
        }
        None => (DMatrix::zeros(rx.k(), n), Vec::new(), "not_run"),
    };
    let radars = extract_radars(&x, rx, delta, opts.max_order);
    Ok(SolveResult {
        algorithm: match opts.solver {
            AnSolver::Cg => Algorithm::CsanCg,
            AnSolver::Admm => Algorithm::CsanAdmm,
        },
        symbols: outcome.symbols,
        correction: outcome.correction,
        interference: Interference::Matrix { x },
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
    fn standard_weights_values() {
        let w = AnWeights::standard(0.1, 5, 129);
        assert!((w.lambda - 0.1 * (645f64 * 645f64.ln()).sqrt()).abs() < 1e-12);
        assert!((w.gamma - w.lambda / 129f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rank_counts() {
        assert_eq!(rank_of_solution(&DMatrix::zeros(4, 4), 1e-3), 0);
        let v = DMatrix::from_fn(6, 3, |r, c| C64::new(((r + 1) * (c + 2)) as f64 % 5.0, (r * c) as f64));
        assert_eq!(rank_of_solution(&(&v * v.adjoint()), 1e-9), 3);
    }
}
