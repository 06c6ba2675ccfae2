//! Subspace (MUSIC) estimation of the exponentials in one row of the
//! interference matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{cis, golden_section_min, hermitian_eigen, least_squares, wrap_unit, C64};
use crate::signal_model::IndexSplit;

/// Eigenvalues below this fraction of the largest are treated as noise.
pub const ORDER_THRESHOLD: f64 = 1e-2;

/// Components `amplitudes[j] * exp(-i 2 pi k delays[j])` found in a row,
/// ordered by decreasing amplitude modulus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RowEstimate {
    pub amplitudes: Vec<C64>,
    pub delays: Vec<f64>,
}

impl RowEstimate {
    pub fn count(&self) -> usize {
        self.delays.len()
    }
}

/// Estimates the delays and amplitudes of `row[r] = sum_j a_j exp(-i 2 pi k_r tau_j)`.
pub fn music_row(row: &[C64], max_order: usize) -> RowEstimate {
    let n = row.len();
    let Ok(split) = IndexSplit::new(n) else {
        return RowEstimate::default();
    };
    let l = n.div_ceil(2);
    let snapshots = n - l + 1;
    if max_order == 0 || l < 2 {
        return RowEstimate::default();
    }
    // forward-backward smoothed covariance
    let mut cov = DMatrix::<C64>::zeros(l, l);
    for s in 0..snapshots {
        let y = &row[s..s + l];
        for c in 0..l {
            let yc = y[c].conj();
            for r in 0..l {
                cov[(r, c)] += y[r] * yc;
            }
        }
    }
    let fwd = cov.clone();
    for r in 0..l {
        for c in 0..l {
            cov[(r, c)] += fwd[(l - 1 - r, l - 1 - c)].conj();
        }
    }
    let (values, vectors) = hermitian_eigen(&cov);
    let top = values.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return RowEstimate::default();
    }
    let order = values
        .iter()
        .filter(|&&v| v >= ORDER_THRESHOLD * top)
        .count()
        .min(max_order)
        .min(l - 1);
    if order == 0 {
        return RowEstimate::default();
    }
    let signal: Vec<Vec<C64>> = (0..order)
        .map(|i| vectors.column(l - 1 - i).iter().cloned().collect())
        .collect();
    // normalised distance of the steering vector exp(-i 2 pi m tau) to the signal subspace
    let null_energy = |tau: f64| -> f64 {
        let s: Vec<C64> = (0..l).map(|m| cis(-2.0 * PI * m as f64 * tau)).collect();
        let captured: f64 = signal
            .iter()
            .map(|e| e.iter().zip(&s).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr())
            .sum();
        1.0 - captured / l as f64
    };
    let grid = (16 * n).max(1024);
    let h = 1.0 / grid as f64;
    let spectrum: Vec<f64> = (0..grid).map(|i| null_energy(i as f64 * h)).collect();
    let mut minima: Vec<(f64, usize)> = (0..grid)
        .filter(|&i| {
            let prev = spectrum[(i + grid - 1) % grid];
            let next = spectrum[(i + 1) % grid];
            spectrum[i] <= prev && spectrum[i] < next
        })
        .map(|i| (spectrum[i], i))
        .collect();
    minima.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    minima.truncate(order);
    let delays: Vec<f64> = minima
        .iter()
        .map(|&(_, i)| {
            let c = i as f64 * h;
            wrap_unit(golden_section_min(null_energy, c - h, c + h, 1e-13))
        })
        .collect();
    let basis = DMatrix::from_fn(n, delays.len(), |r, j| cis(-2.0 * PI * split.freq(r) as f64 * delays[j]));
    let amps = least_squares(&basis, row);
    let mut comps: Vec<(C64, f64)> = amps.into_iter().zip(delays).collect();
    comps.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()));
    RowEstimate {
        amplitudes: comps.iter().map(|c| c.0).collect(),
        delays: comps.iter().map(|c| c.1).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::steering;

    fn row(n: usize, comps: &[(C64, f64)]) -> Vec<C64> {
        let split = IndexSplit::new(n).unwrap();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for &(amp, tau) in comps {
            for (o, a) in out.iter_mut().zip(steering(&split, tau)) {
                *o += amp * a.conj();
            }
        }
        out
    }

    #[test]
    fn single_exponential() {
        let est = music_row(&row(33, &[(C64::new(3.0, 0.0), 0.3)]), 4);
        assert_eq!(est.count(), 1);
        assert!((est.delays[0] - 0.3).abs() < 1e-6);
        assert!((est.amplitudes[0] - C64::new(3.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn zero_row_is_empty() {
        assert_eq!(music_row(&vec![C64::new(0.0, 0.0); 16], 4).count(), 0);
    }

    #[test]
    fn two_close_exponentials() {
        let n = 65;
        let sep = 4.0 / (n as f64 - 1.0);
        let truth = [(C64::new(1.0, 0.5), 0.2), (C64::new(-0.4, 0.8), 0.2 + sep)];
        let est = music_row(&row(n, &truth), 4);
        assert_eq!(est.count(), 2);
        let mut got: Vec<(f64, C64)> = est.delays.iter().cloned().zip(est.amplitudes.iter().cloned()).collect();
        got.sort_by(|a, b| a.0.total_cmp(&b.0));
        for ((d, a), (ta, td)) in got.iter().zip(truth.iter()) {
            assert!((d - td).abs() < 1e-3);
            assert!((a - ta).norm() < 1e-3);
        }
    }
}
