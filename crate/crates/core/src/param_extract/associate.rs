//! Merging per-row delay estimates into radar detections.

use serde::{Deserialize, Serialize};

use super::music::RowEstimate;
use crate::linalg::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub normalized_delay: f64,
    /// Coefficient block `c h`; entry `k` comes from row `k`.
    pub coeff: Vec<C64>,
}

/// Rows are visited in order and, within a row, components in the order
/// given. A component joins the closest existing detection within
/// `delta` whose coordinate for that row is still exactly zero; the
/// detection delay becomes the magnitude-weighted mean. Otherwise it starts
/// a new detection.
pub fn associate(rows: &[RowEstimate], delta: f64) -> (Vec<Detection>, usize) {
    let k = rows.len();
    let mut found: Vec<Detection> = Vec::new();
    for (row, est) in rows.iter().enumerate() {
        for (&beta, &tau) in est.amplitudes.iter().zip(&est.delays) {
            let mut best: Option<(usize, f64)> = None;
            for (m, det) in found.iter().enumerate() {
                let d = (det.normalized_delay - tau).abs();
                if d <= delta && det.coeff[row] == C64::new(0.0, 0.0) && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((m, d));
                }
            }
            match best {
                Some((m, _)) => {
                    let det = &mut found[m];
                    let weight: f64 = det.coeff.iter().map(|c| c.norm()).sum();
                    let b = beta.norm();
                    if weight + b > 0.0 {
                        det.normalized_delay = (weight * det.normalized_delay + b * tau) / (weight + b);
                    }
                    det.coeff[row] = beta;
                }
                None => {
                    let mut coeff = vec![C64::new(0.0, 0.0); k];
                    coeff[row] = beta;
                    found.push(Detection {
                        normalized_delay: tau,
                        coeff,
                    });
                }
            }
        }
    }
    let count = found.len();
    (found, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(beta: f64, tau: f64) -> RowEstimate {
        RowEstimate {
            amplitudes: vec![C64::new(beta, 0.0)],
            delays: vec![tau],
        }
    }

    #[test]
    fn single_component() {
        let (d, j) = associate(&[est(2.0, 0.4)], 0.01);
        assert_eq!(j, 1);
        assert_eq!(d[0].coeff, vec![C64::new(2.0, 0.0)]);
    }

    #[test]
    fn close_rows_merge_with_weighted_delay() {
        let (d, j) = associate(&[est(1.0, 0.30), est(3.0, 0.3002)], 0.001);
        assert_eq!(j, 1);
        assert!((d[0].normalized_delay - (0.30 + 3.0 * 0.3002) / 4.0).abs() < 1e-15);
        assert_eq!(d[0].coeff, vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0)]);
    }

    #[test]
    fn distant_rows_stay_apart() {
        let (d, j) = associate(&[est(1.0, 0.30), est(1.0, 0.32)], 0.001);
        assert_eq!(j, 2);
        assert_eq!(d[1].coeff[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn same_row_never_merges() {
        let row = RowEstimate {
            amplitudes: vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)],
            delays: vec![0.3, 0.3001],
        };
        assert_eq!(associate(&[row], 0.01).1, 2);
    }
}
