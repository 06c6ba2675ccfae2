//! Delay-grid dictionary for on-grid sparse recovery.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cis, C64};
use crate::signal_model::{IndexSplit, RadarDictionary};

/// Cap on dictionary entries (about 320 MB of complex doubles).
pub const DEFAULT_ENTRY_CAP: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DelayWindow {
    /// Normalised delays `[lo, hi)`.
    Range(f64, f64),
    Full,
}

impl DelayWindow {
    fn bounds(self) -> (f64, f64) {
        match self {
            DelayWindow::Range(lo, hi) => (lo, hi),
            DelayWindow::Full => (0.0, 1.0),
        }
    }
}

/// Block dictionary: column `j K + c` holds `exp(-i 2 pi k tau_j) Dbar[k, c]`
/// in row `k`, so that `Upsilon alpha` is the spectrum of radars at the grid
/// delays with coefficient blocks `alpha_j`.
#[derive(Clone, Debug)]
pub struct GridDictionary {
    pub delays: Vec<f64>,
    pub k: usize,
    pub upsilon: DMatrix<C64>,
    pub column_norm_mean: f64,
}

impl GridDictionary {
    pub fn grid_size(&self) -> usize {
        self.delays.len()
    }

    pub fn n(&self) -> usize {
        self.upsilon.nrows()
    }
}

/// `oversampling * N` equispaced delays over `window`.
pub fn build_grid(
    split: &IndexSplit,
    dictionary: &RadarDictionary,
    oversampling: usize,
    window: DelayWindow,
    entry_cap: usize,
) -> Result<GridDictionary> {
    if oversampling == 0 {
        return Err(Error::InvalidParameter("grid oversampling must be at least 1".into()));
    }
    let (lo, hi) = window.bounds();
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::InvalidParameter(format!("delay window [{lo}, {hi}) is not inside [0, 1)")));
    }
    let size = oversampling * split.n;
    let needed = size * dictionary.k * split.n;
    if needed > entry_cap {
        return Err(Error::GridTooLarge { needed, cap: entry_cap });
    }
    let step = (hi - lo) / size as f64;
    let delays: Vec<f64> = (0..size).map(|j| lo + step * j as f64).collect();
    grid_at(split, dictionary, &delays)
}

/// Dictionary at arbitrary delays (used with the true delays as well).
pub fn grid_at(split: &IndexSplit, dictionary: &RadarDictionary, delays: &[f64]) -> Result<GridDictionary> {
    if dictionary.n() != split.n {
        return Err(Error::Dimension("dictionary does not match the index split".into()));
    }
    let k = dictionary.k;
    let n = split.n;
    let mut upsilon = DMatrix::zeros(n, delays.len() * k);
    for (j, &tau) in delays.iter().enumerate() {
        for row in 0..n {
            let phase = cis(-2.0 * PI * split.freq(row) as f64 * tau);
            for c in 0..k {
                upsilon[(row, j * k + c)] = phase * dictionary.columns[(row, c)];
            }
        }
    }
    let cols = upsilon.ncols().max(1);
    let column_norm_mean = upsilon.column_iter().map(|c| c.norm()).sum::<f64>() / cols as f64;
    Ok(GridDictionary {
        delays: delays.to_vec(),
        k,
        upsilon,
        column_norm_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{build_dictionary, Dft};

    #[test]
    fn grid_size_and_spacing() {
        let split = IndexSplit::new(129).unwrap();
        let d = build_dictionary(1, &Dft::new(split), 32, 5).unwrap();
        let g = build_grid(&split, &d, 4, DelayWindow::Range(0.1, 0.7), DEFAULT_ENTRY_CAP).unwrap();
        assert_eq!(g.grid_size(), 516);
        assert_eq!(g.upsilon.shape(), (129, 2580));
        assert!((g.delays[1] - g.delays[0] - 0.6 / 516.0).abs() < 1e-15);
        assert!(g.delays.iter().all(|&t| (0.1..0.7).contains(&t)));
    }

    #[test]
    fn memory_guard() {
        let split = IndexSplit::new(33).unwrap();
        let d = build_dictionary(1, &Dft::new(split), 8, 3).unwrap();
        let e = build_grid(&split, &d, 4, DelayWindow::Full, 1000).unwrap_err();
        assert!(matches!(e, Error::GridTooLarge { needed: 13068, cap: 1000 }));
    }

    #[test]
    fn zero_delay_block_is_the_dictionary() {
        let split = IndexSplit::new(9).unwrap();
        let d = build_dictionary(2, &Dft::new(split), 1, 1).unwrap();
        let g = grid_at(&split, &d, &[0.0]).unwrap();
        assert!((g.upsilon.clone() - d.columns.clone()).camax() < 1e-15);
    }
}
