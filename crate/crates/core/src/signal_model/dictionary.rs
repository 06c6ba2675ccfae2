//! Random radar waveform subspace.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dft::Dft;
use super::random::{complex_normal, rng, Stream};
use crate::error::{Error, Result};
use crate::linalg::{mat_vec, C64};

/// Radar pulses live in the span of `K` length-`N` codes; `columns` holds
/// their spectra `F D`, `time_columns` the codes `D` themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarDictionary {
    #[serde(with = "crate::serde_matrix")]
    pub columns: DMatrix<C64>,
    #[serde(with = "crate::serde_matrix")]
    pub time_columns: DMatrix<C64>,
    pub pulse_length: usize,
    pub k: usize,
}

impl RadarDictionary {
    pub fn from_time_columns(dft: &Dft, time_columns: DMatrix<C64>, pulse_length: usize) -> Result<Self> {
        let n = dft.n();
        let k = time_columns.ncols();
        if time_columns.nrows() != n {
            return Err(Error::Dimension(format!(
                "dictionary has {} rows, expected N = {n}",
                time_columns.nrows()
            )));
        }
        check_sizes(n, pulse_length, k)?;
        if time_columns.rows(pulse_length, n - pulse_length).iter().any(|z| *z != C64::new(0.0, 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "dictionary codes must vanish beyond the pulse length {pulse_length}"
            )));
        }
        let columns = dft.forward_matrix(&time_columns);
        Ok(Self {
            columns,
            time_columns,
            pulse_length,
            k,
        })
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn validate(&self, dft: &Dft) -> Result<()> {
        let rebuilt = Self::from_time_columns(dft, self.time_columns.clone(), self.pulse_length)?;
        if rebuilt.k != self.k {
            return Err(Error::Dimension("dictionary K does not match its columns".into()));
        }
        let scale = self.columns.camax().max(1.0);
        if (&rebuilt.columns - &self.columns).camax() > 1e-9 * scale {
            return Err(Error::InvalidParameter(
                "dictionary spectra are not the DFT of its time columns".into(),
            ));
        }
        Ok(())
    }

    /// Time-domain waveform `D h`.
    pub fn waveform(&self, coeff: &[C64]) -> Vec<C64> {
        mat_vec(&self.time_columns, coeff)
    }

    /// Spectrum `F D h`.
    pub fn spectrum(&self, coeff: &[C64]) -> Vec<C64> {
        mat_vec(&self.columns, coeff)
    }
}

fn check_sizes(n: usize, pulse_length: usize, k: usize) -> Result<()> {
    if k == 0 || k > pulse_length || pulse_length > n {
        return Err(Error::Dimension(format!(
            "need 1 <= K <= N' <= N, got K = {k}, N' = {pulse_length}, N = {n}"
        )));
    }
    Ok(())
}

/// Draws codes with i.i.d. `CN(0, 1/N')` chips on the first `N'` slots.
pub fn build_dictionary(seed: u64, dft: &Dft, pulse_length: usize, k: usize) -> Result<RadarDictionary> {
    let n = dft.n();
    check_sizes(n, pulse_length, k)?;
    let mut r = rng(seed, Stream::Dictionary);
    let var = 1.0 / pulse_length as f64;
    let mut time = DMatrix::zeros(n, k);
    for c in 0..k {
        for m in 0..pulse_length {
            time[(m, c)] = complex_normal(&mut r, var);
        }
    }
    RadarDictionary::from_time_columns(dft, time, pulse_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::dft::IndexSplit;

    fn dft(n: usize) -> Dft {
        Dft::new(IndexSplit::new(n).unwrap())
    }

    #[test]
    fn trailing_zeros_beyond_pulse() {
        let d = build_dictionary(1, &dft(129), 32, 5).unwrap();
        assert_eq!(d.time_columns.shape(), (129, 5));
        for c in 0..5 {
            let zeros = (0..129).rev().take_while(|&m| d.time_columns[(m, c)].norm() == 0.0).count();
            assert_eq!(zeros, 97);
        }
    }

    #[test]
    fn spectra_are_dft_of_codes() {
        let f = dft(16);
        let d = build_dictionary(3, &f, 8, 2).unwrap();
        let expect = f.matrix() * &d.time_columns;
        assert!((expect - &d.columns).camax() < 1e-12);
        assert!(d.validate(&f).is_ok());
    }

    #[test]
    fn degenerate_single_chip() {
        let d = build_dictionary(9, &dft(5), 1, 1).unwrap();
        assert!(d.time_columns[(0, 0)].norm() > 0.0);
        assert!((1..5).all(|m| d.time_columns[(m, 0)].norm() == 0.0));
        // spectrum of a single chip at slot 0 is flat
        for r in 0..5 {
            assert!((d.columns[(r, 0)] - d.time_columns[(0, 0)]).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_dictionary(1, &dft(8), 9, 2).is_err());
        assert!(build_dictionary(1, &dft(8), 4, 5).is_err());
        assert!(build_dictionary(1, &dft(8), 4, 0).is_err());
    }

    #[test]
    fn same_seed_same_codes() {
        let f = dft(33);
        assert_eq!(build_dictionary(7, &f, 16, 3).unwrap(), build_dictionary(7, &f, 16, 3).unwrap());
        assert_ne!(build_dictionary(7, &f, 16, 3).unwrap(), build_dictionary(8, &f, 16, 3).unwrap());
    }
}
