//! Zero-forcing demodulation, residual formation and corrected re-slicing.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::signal_model::{Constellation, EffectiveChannel, FreqObservation};

/// Data symbols, hard (constellation points) or soft.
pub type SymbolVector = Vec<C64>;

/// Observation minus the re-modulated symbol estimate, frequency domain.
pub type Residual = Vec<C64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Demodulation {
    pub symbols: SymbolVector,
    /// Subcarriers whose gain was too small to equalise.
    pub flagged: Vec<usize>,
}

/// Nearest-point decision on each entry.
pub fn slice(soft: &[C64], constellation: &Constellation) -> SymbolVector {
    soft.iter().map(|&y| constellation.slice(y)).collect()
}

/// Equalises with the pseudo-inverse of the link and slices, ignoring any
/// interference.
pub fn demodulate_initial(
    obs: &FreqObservation,
    channel: &EffectiveChannel,
    constellation: &Constellation,
) -> Result<Demodulation> {
    if obs.values.len() != channel.n_rows() {
        return Err(Error::Dimension(format!(
            "observation length {} does not match the link ({} rows)",
            obs.values.len(),
            channel.n_rows()
        )));
    }
    let (soft, flagged) = channel.equalize(&obs.values);
    Ok(Demodulation {
        symbols: slice(&soft, constellation),
        flagged,
    })
}

/// `z = r - Phi b`.
pub fn residual(obs: &FreqObservation, symbols: &[C64], channel: &EffectiveChannel) -> Result<Residual> {
    if symbols.len() != channel.n_symbols() || obs.values.len() != channel.n_rows() {
        return Err(Error::Dimension("symbols or observation do not match the link".into()));
    }
    Ok(obs
        .values
        .iter()
        .zip(channel.apply(symbols))
        .map(|(r, x)| r - x)
        .collect())
}

/// Applies an estimated correction and re-slices: `slice(prev + correction)`.
pub fn redemodulate(prev: &[C64], correction: &[C64], constellation: &Constellation) -> SymbolVector {
    prev.iter()
        .zip(correction)
        .map(|(b, v)| constellation.slice(b + v))
        .collect()
}
