//! Centred DFT convention used throughout the crate.
//!
//! Frequency rows are indexed `k = -n1 ..= n2`; row `r` of every
//! frequency-domain vector holds frequency `k = r - n1`. The forward
//! transform is unnormalised, `F[k][n] = exp(-i 2 pi k n / N)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSplit {
    pub n1: usize,
    pub n2: usize,
    pub n: usize,
}

impl IndexSplit {
    /// `n1 = n2 = (N-1)/2` for odd `N`, `n1 = n2 + 1 = N/2` for even `N`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        let (n1, n2) = if n % 2 == 1 {
            ((n - 1) / 2, (n - 1) / 2)
        } else {
            (n / 2, n / 2 - 1)
        };
        Ok(Self { n1, n2, n })
    }

    pub fn validate(&self) -> Result<()> {
        let expected = Self::new(self.n)?;
        if *self != expected {
            return Err(Error::InvalidParameter(format!(
                "index split ({}, {}) does not match N = {}",
                self.n1, self.n2, self.n
            )));
        }
        Ok(())
    }

    /// Frequency index of row `r`.
    #[inline]
    pub fn freq(&self, row: usize) -> i64 {
        row as i64 - self.n1 as i64
    }

    /// Row holding frequency `k`.
    #[inline]
    pub fn row(&self, k: i64) -> usize {
        (k + self.n1 as i64) as usize
    }

    pub fn freqs(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n).map(move |r| self.freq(r))
    }
}

/// Steering vector `a(tau)` with entries `exp(i 2 pi k tau)`.
pub fn steering(split: &IndexSplit, tau: f64) -> Vec<C64> {
    split.freqs().map(|k| cis(2.0 * PI * k as f64 * tau)).collect()
}

#[derive(Clone, Debug)]
pub struct Dft {
    split: IndexSplit,
    forward: DMatrix<C64>,
}

impl Dft {
    pub fn new(split: IndexSplit) -> Self {
        let n = split.n;
        let forward = DMatrix::from_fn(n, n, |r, t| {
            let k = split.freq(r);
            // reduce the exponent modulo N before forming the phase
            let e = (k * t as i64).rem_euclid(n as i64);
            cis(-2.0 * PI * e as f64 / n as f64)
        });
        Self { split, forward }
    }

    pub fn split(&self) -> &IndexSplit {
        &self.split
    }

    pub fn n(&self) -> usize {
        self.split.n
    }

    /// The forward matrix `F`.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.forward
    }

    /// `F x`.
    pub fn forward(&self, x: &[C64]) -> Vec<C64> {
        crate::linalg::mat_vec(&self.forward, x)
    }

    /// `(1/N) F^H y`, the exact inverse of [`Dft::forward`].
    pub fn inverse(&self, y: &[C64]) -> Vec<C64> {
        let scale = 1.0 / self.split.n as f64;
        let mut out = crate::linalg::mat_adj_vec(&self.forward, y);
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// `(1/N) F^H`, the OFDM mixing matrix.
    pub fn inverse_matrix(&self) -> DMatrix<C64> {
        self.forward.adjoint() * C64::new(1.0 / self.split.n as f64, 0.0)
    }

    /// `F M` for a matrix with `N` rows.
    pub fn forward_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        &self.forward * m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_follow_parity_rule() {
        let s = IndexSplit::new(129).unwrap();
        assert_eq!((s.n1, s.n2), (64, 64));
        let s = IndexSplit::new(4).unwrap();
        assert_eq!((s.n1, s.n2), (2, 1));
        let s = IndexSplit::new(1).unwrap();
        assert_eq!((s.n1, s.n2), (0, 0));
        assert!(IndexSplit::new(0).is_err());
    }

    #[test]
    fn freq_range_covers_n_values() {
        for n in 1..20 {
            let s = IndexSplit::new(n).unwrap();
            let f: Vec<i64> = s.freqs().collect();
            assert_eq!(f.len(), n);
            assert_eq!(f[0], -(s.n1 as i64));
            assert_eq!(*f.last().unwrap(), s.n2 as i64);
            for (r, &k) in f.iter().enumerate() {
                assert_eq!(s.row(k), r);
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for n in [1usize, 4, 7, 16, 33] {
            let dft = Dft::new(IndexSplit::new(n).unwrap());
            let prod = dft.matrix().adjoint() * dft.matrix() / C64::new(n as f64, 0.0);
            let id = DMatrix::<C64>::identity(n, n);
            assert!((prod - id).camax() < 1e-10);
        }
    }

    #[test]
    fn steering_is_periodic_and_unit_at_zero() {
        let s = IndexSplit::new(10).unwrap();
        assert!(steering(&s, 0.0).iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let a = steering(&s, 0.37);
        let b = steering(&s, 1.37);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
