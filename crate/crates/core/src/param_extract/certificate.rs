//! The dual polynomial of the atomic-norm program and delay localisation
//! from its peaks.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::linalg::{cis, golden_section_min, wrap_unit, C64};
use crate::signal_model::{EffectiveChannel, IndexSplit};
use crate::solver_an::AnProblem;

/// `q(tau)_c = sum_k nu_k conj(Dbar[k, c]) exp(i 2 pi k tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub nu: Vec<C64>,
    dbar: DMatrix<C64>,
    freqs: Vec<f64>,
}

impl DualCertificate {
    pub fn new(nu: Vec<C64>, dbar: &DMatrix<C64>, split: &IndexSplit) -> Self {
        Self {
            nu,
            dbar: dbar.clone(),
            freqs: split.freqs().map(|k| k as f64).collect(),
        }
    }

    pub fn eval(&self, tau: f64) -> Vec<C64> {
        let mut q = vec![C64::new(0.0, 0.0); self.dbar.ncols()];
        for (row, (&nu, &k)) in self.nu.iter().zip(&self.freqs).enumerate() {
            let w = nu * cis(2.0 * PI * k * tau);
            for (c, qc) in q.iter_mut().enumerate() {
                *qc += w * self.dbar[(row, c)].conj();
            }
        }
        q
    }

    pub fn norm(&self, tau: f64) -> f64 {
        self.eval(tau).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Phi^H nu`; at an optimum its modulus equals `gamma` wherever the
    /// error estimate is nonzero.
    pub fn error_correlation(&self, channel: &EffectiveChannel) -> Vec<C64> {
        channel.adjoint(&self.nu)
    }

    /// Largest `|q|` over a uniform grid of `points` delays.
    pub fn max_norm(&self, points: usize) -> f64 {
        (0..points)
            .map(|i| self.norm(i as f64 / points as f64))
            .fold(0.0, f64::max)
    }
}

/// The dual point `z - Phi v - A(X)` paired with a primal solution.
pub fn dual_from_primal(problem: &AnProblem, x: &DMatrix<C64>, v: &[C64], split: &IndexSplit) -> DualCertificate {
    DualCertificate::new(problem.residual(x, v), problem.dbar, split)
}

/// Delays where `|q|` has a local maximum within 1% of `lambda`.
pub fn locate_by_certificate(cert: &DualCertificate, lambda: f64, grid_density: usize) -> Vec<f64> {
    let points = grid_density.max(1);
    let h = 1.0 / points as f64;
    let values: Vec<f64> = (0..points).map(|i| cert.norm(i as f64 * h)).collect();
    let mut out: Vec<f64> = (0..points)
        .filter(|&i| {
            let prev = values[(i + points - 1) % points];
            let next = values[(i + 1) % points];
            values[i] >= prev && values[i] > next && values[i] >= 0.99 * lambda && values[i] > 0.0
        })
        .map(|i| {
            let c = i as f64 * h;
            wrap_unit(golden_section_min(|t| -cert.norm(t), c - h, c + h, 1e-12))
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_certificate_locates_nothing() {
        let split = IndexSplit::new(9).unwrap();
        let d = DMatrix::from_element(9, 2, C64::new(1.0, 0.0));
        let cert = DualCertificate::new(vec![C64::new(0.0, 0.0); 9], &d, &split);
        assert!(locate_by_certificate(&cert, 1.0, 36).is_empty());
    }

    #[test]
    fn peak_of_a_steering_certificate() {
        // nu = Dbar h * exp(-i 2 pi k tau0) peaks at tau0
        let n = 17;
        let split = IndexSplit::new(n).unwrap();
        let d = DMatrix::from_element(n, 1, C64::new(1.0, 0.0));
        let tau0 = 0.37;
        let nu: Vec<C64> = split.freqs().map(|k| cis(-2.0 * PI * k as f64 * tau0)).collect();
        let cert = DualCertificate::new(nu, &d, &split);
        let peak = cert.norm(tau0);
        assert!((peak - n as f64).abs() < 1e-9);
        let found = locate_by_certificate(&cert, peak, 8 * n);
        assert_eq!(found.len(), 1);
        assert!((found[0] - tau0).abs() < 1e-6);
    }
}
