//! Solver outputs shared by every algorithm.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{norm_sq, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Interference-blind demodulation only.
    Iter0,
    /// On-grid sparse recovery.
    Csl1,
    /// Sparse error correction with the true radar delays.
    Csl1Known,
    /// Atomic-norm recovery, factored conjugate-gradient solver.
    CsanCg,
    /// Atomic-norm recovery, semidefinite ADMM solver.
    CsanAdmm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Iter0,
        Algorithm::Csl1,
        Algorithm::Csl1Known,
        Algorithm::CsanCg,
        Algorithm::CsanAdmm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iter0 => "iter0",
            Algorithm::Csl1 => "csl1",
            Algorithm::Csl1Known => "csl1_known",
            Algorithm::CsanCg => "csan_cg",
            Algorithm::CsanAdmm => "csan_admm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm '{s}'")))
    }
}

/// One extracted radar. Only the products `c h` and `c g` are identifiable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarEstimate {
    pub normalized_delay: f64,
    /// Delay in seconds.
    pub delay: f64,
    pub coeff: Vec<C64>,
    /// Time-domain waveform `c g`.
    pub waveform: Vec<C64>,
    pub waveform_energy: f64,
}

impl RadarEstimate {
    pub fn new(normalized_delay: f64, block_duration: f64, coeff: Vec<C64>, waveform: Vec<C64>) -> Self {
        Self {
            normalized_delay,
            delay: normalized_delay * block_duration,
            waveform_energy: norm_sq(&waveform),
            coeff,
            waveform,
        }
    }
}

/// The estimated interference representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interference {
    None,
    /// Block coefficients on a delay grid, `K` entries per grid point.
    Grid { delays: Vec<f64>, alpha: Vec<C64> },
    /// The `K x N` interference matrix.
    Matrix {
        #[serde(with = "crate::serde_matrix")]
        x: DMatrix<C64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// CSV of an inner-solver trace: `iter,objective` or, when gradient data is
/// present, `iter,objective,grad_norm,step`.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    use std::fmt::Write as _;
    let full = rows.iter().any(|r| r.grad_norm.is_some());
    let mut out = String::from(if full { "iter,objective,grad_norm,step\n" } else { "iter,objective\n" });
    for r in rows {
        if full {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e}",
                r.iter,
                r.objective,
                r.grad_norm.unwrap_or(f64::NAN),
                r.step.unwrap_or(f64::NAN)
            );
        } else {
            let _ = writeln!(out, "{},{:e}", r.iter, r.objective);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    pub symbols: Vec<C64>,
    /// Last estimated symbol-error vector `b - b_hat`.
    pub correction: Vec<C64>,
    pub interference: Interference,
    pub radars: Vec<RadarEstimate>,
    /// Number of correction passes performed.
    pub outer_iterations: usize,
    /// Whether the symbol decisions reached a fixed point.
    pub converged: bool,
    /// Symbol error rate after each pass (index 0 is the initial decision),
    /// present when the true symbols were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ser_trace: Option<Vec<f64>>,
    /// Inner-solver trace of the last pass.
    pub inner_trace: Vec<TraceRow>,
    /// Diagnostic from the last inner solve.
    pub solver_status: String,
    pub flagged_subcarriers: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.name()));
        }
        assert!("cs".parse::<Algorithm>().is_err());
    }

    #[test]
    fn trace_csv_columns() {
        let rows = vec![TraceRow {
            iter: 1,
            objective: 2.0,
            grad_norm: None,
            step: None,
        }];
        assert_eq!(trace_csv(&rows), "iter,objective\n1,2e0\n");
    }
}
