//! Symbol error rate, delay RMSE and relative waveform MSE.

use serde::{Deserialize, Serialize};

use crate::linalg::{norm_sq, C64};

/// Fraction of positions where the decisions differ.
pub fn ser(truth: &[C64], estimate: &[C64]) -> f64 {
    assert_eq!(truth.len(), estimate.len(), "symbol vectors differ in length");
    if truth.is_empty() {
        return 0.0;
    }
    let errors = truth.iter().zip(estimate).filter(|(a, b)| a != b).count();
    errors as f64 / truth.len() as f64
}

/// True and estimated radars of one trial; delays in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialRadars {
    pub truth_delays: Vec<f64>,
    pub truth_waveforms: Vec<Vec<C64>>,
    pub est_delays: Vec<f64>,
    pub est_waveforms: Vec<Vec<C64>>,
}

impl TrialRadars {
    /// For each true radar, the nearest estimate if it lies within `radius`
    /// (ties to the lower estimate index).
    pub fn identify(&self, radius: f64) -> Vec<Option<usize>> {
        self.truth_delays
            .iter()
            .map(|&t| {
                let mut best: Option<(usize, f64)> = None;
                for (i, &e) in self.est_delays.iter().enumerate() {
                    let d = (t - e).abs();
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((i, d));
                    }
                }
                best.filter(|&(_, d)| d <= radius).map(|(i, _)| i)
            })
            .collect()
    }

    /// Mean squared delay error and mean relative waveform error over the
    /// identified radars, `None` if none was identified.
    pub fn accuracy(&self, radius: f64) -> Option<(f64, f64)> {
        let ids = self.identify(radius);
        let hits: Vec<(usize, usize)> = ids
            .iter()
            .enumerate()
            .filter_map(|(j, m)| m.map(|i| (j, i)))
            .collect();
        if hits.is_empty() {
            return None;
        }
        let cnt = hits.len() as f64;
        let sq = hits
            .iter()
            .map(|&(j, i)| (self.truth_delays[j] - self.est_delays[i]).powi(2))
            .sum::<f64>()
            / cnt;
        let mse = hits
            .iter()
            .map(|&(j, i)| relative_error(&self.truth_waveforms[j], &self.est_waveforms[i]))
            .sum::<f64>()
            / cnt;
        Some((sq, mse))
    }
}

/// `||truth - est||^2 / ||truth||^2`.
pub fn relative_error(truth: &[C64], est: &[C64]) -> f64 {
    let diff: f64 = truth.iter().zip(est).map(|(a, b)| (a - b).norm_sqr()).sum();
    diff / norm_sq(truth)
}

/// Delay RMSE over trials with at least one identified radar, together
/// with the identified true-radar indices of every trial.
pub fn delay_rmse(trials: &[TrialRadars], radius: f64) -> (Option<f64>, Vec<Vec<usize>>) {
    let sets = trials
        .iter()
        .map(|t| {
            t.identify(radius)
                .iter()
                .enumerate()
                .filter_map(|(j, m)| m.map(|_| j))
                .collect()
        })
        .collect();
    let per: Vec<f64> = trials.iter().filter_map(|t| t.accuracy(radius)).map(|a| a.0).collect();
    let rmse = (!per.is_empty()).then(|| (per.iter().sum::<f64>() / per.len() as f64).sqrt());
    (rmse, sets)
}

/// Mean relative waveform error over trials with an identified radar.
pub fn waveform_relative_mse(trials: &[TrialRadars], radius: f64) -> Option<f64> {
    let per: Vec<f64> = trials.iter().filter_map(|t| t.accuracy(radius)).map(|a| a.1).collect();
    (!per.is_empty()).then(|| per.iter().sum::<f64>() / per.len() as f64)
}
