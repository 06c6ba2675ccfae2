//! Communication link: symbol mixing, multipath channel and constellation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::constellation::Constellation;
use super::dft::Dft;
use super::random::{complex_normal, rng, Stream};
use crate::error::{Error, Result};
use crate::linalg::{cis, mat_adj_vec, mat_vec, C64, ZERO};

/// Threshold below which a subcarrier gain is treated as a null.
pub const NULL_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkKind {
    /// `A = (1/N) F^H`, `H = (1/N) F^H diag(gain) F`.
    Ofdm { channel_diag: Vec<C64> },
    /// The frequency-domain link `F H A` is the identity.
    Identity,
    /// Arbitrary time-domain mixing (`N x M`) and channel (`N x N`).
    General {
        #[serde(with = "crate::serde_matrix")]
        mixing: DMatrix<C64>,
        #[serde(with = "crate::serde_matrix")]
        channel: DMatrix<C64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommLink {
    #[serde(flatten)]
    pub kind: LinkKind,
    pub constellation: Constellation,
    /// Specular amplitude of the channel taps.
    pub rho: f64,
    /// Standard deviation of the diffuse channel component.
    pub sigma_h: f64,
}

impl CommLink {
    pub fn ofdm(channel: RiceanChannel, constellation: Constellation) -> Self {
        Self {
            kind: LinkKind::Ofdm {
                channel_diag: channel.channel_diag,
            },
            constellation,
            rho: channel.rho,
            sigma_h: channel.sigma_h,
        }
    }

    pub fn identity(constellation: Constellation) -> Self {
        Self {
            kind: LinkKind::Identity,
            constellation,
            rho: 1.0,
            sigma_h: 0.0,
        }
    }

    /// Average channel power `rho^2 + sigma_h^2`.
    pub fn channel_power(&self) -> f64 {
        self.rho * self.rho + self.sigma_h * self.sigma_h
    }

    /// `rho / sigma_h`; infinite for a purely specular channel.
    pub fn ricean_factor(&self) -> f64 {
        if self.sigma_h == 0.0 {
            f64::INFINITY
        } else {
            self.rho / self.sigma_h
        }
    }

    /// The frequency-domain link matrix `F H A` in factored form.
    pub fn effective(&self, dft: &Dft) -> Result<EffectiveChannel> {
        let n = dft.n();
        match &self.kind {
            LinkKind::Ofdm { channel_diag } => {
                if channel_diag.len() != n {
                    return Err(Error::Dimension(format!(
                        "channel has {} taps, expected N = {n}",
                        channel_diag.len()
                    )));
                }
                Ok(EffectiveChannel::Diagonal(channel_diag.clone()))
            }
            LinkKind::Identity => Ok(EffectiveChannel::Diagonal(vec![C64::new(1.0, 0.0); n])),
            LinkKind::General { mixing, channel } => {
                if mixing.nrows() != n || channel.shape() != (n, n) {
                    return Err(Error::Dimension(format!(
                        "mixing {:?} and channel {:?} incompatible with N = {n}",
                        mixing.shape(),
                        channel.shape()
                    )));
                }
                EffectiveChannel::dense(dft.matrix() * channel * mixing)
            }
        }
    }
}

/// Time-domain OFDM matrices `(A, H)` for a diagonal frequency response.
pub fn ofdm_matrices(dft: &Dft, channel_diag: &[C64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let a = dft.inverse_matrix();
    let mut scaled = dft.matrix().clone();
    for (r, g) in channel_diag.iter().enumerate() {
        scaled.row_mut(r).iter_mut().for_each(|z| *z *= g);
    }
    let h = &a * scaled;
    (a, h)
}

/// `Phi = F H A` with its pseudo-inverse, specialised for the diagonal case.
#[derive(Clone, Debug, PartialEq)]
pub enum EffectiveChannel {
    Diagonal(Vec<C64>),
    Dense { phi: DMatrix<C64>, pinv: DMatrix<C64> },
}

impl EffectiveChannel {
    pub fn dense(phi: DMatrix<C64>) -> Result<Self> {
        let pinv = phi
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidParameter(format!("link matrix pseudo-inverse failed: {e}")))?;
        Ok(Self::Dense { phi, pinv })
    }

    pub fn n_rows(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::Dense { phi, .. } => phi.nrows(),
        }
    }

    pub fn n_symbols(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::Dense { phi, .. } => phi.ncols(),
        }
    }

    pub fn diagonal(&self) -> Option<&[C64]> {
        match self {
            Self::Diagonal(d) => Some(d),
            Self::Dense { .. } => None,
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        match self {
            Self::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            Self::Dense { phi, .. } => phi.clone(),
        }
    }

    /// `Phi v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            Self::Diagonal(d) => d.iter().zip(v).map(|(g, x)| g * x).collect(),
            Self::Dense { phi, .. } => mat_vec(phi, v),
        }
    }

    /// `Phi^H y`.
    pub fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        match self {
            Self::Diagonal(d) => d.iter().zip(y).map(|(g, x)| g.conj() * x).collect(),
            Self::Dense { phi, .. } => mat_adj_vec(phi, y),
        }
    }

    /// Zero-forcing equalisation. Returns the soft symbols and the indices
    /// of subcarriers whose gain is too small to invert (left unequalised).
    pub fn equalize(&self, y: &[C64]) -> (Vec<C64>, Vec<usize>) {
        match self {
            Self::Diagonal(d) => {
                let mut flagged = Vec::new();
                let soft = d
                    .iter()
                    .zip(y)
                    .enumerate()
                    .map(|(i, (g, x))| {
                        if g.norm() < NULL_GAIN {
                            flagged.push(i);
                            *x
                        } else {
                            x / g
                        }
                    })
                    .collect();
                (soft, flagged)
            }
            Self::Dense { pinv, .. } => (mat_vec(pinv, y), Vec::new()),
        }
    }

    /// Largest squared singular value of `Phi`.
    pub fn norm_sq(&self) -> f64 {
        match self {
            Self::Diagonal(d) => d.iter().map(|g| g.norm_sqr()).fold(0.0, f64::max),
            Self::Dense { phi, .. } => {
                let s = phi.singular_values();
                s.iter().cloned().fold(0.0, f64::max).powi(2)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiceanChannel {
    pub channel_diag: Vec<C64>,
    pub rho: f64,
    pub sigma_h: f64,
}

/// Draws `gain(k) = rho exp(i theta_k) + CN(0, sigma_h^2)` independently per
/// subcarrier with `rho^2 + sigma_h^2 = power` and `rho / sigma_h = factor`
/// (`None` or `+inf` for a purely specular channel).
pub fn build_ricean_channel(seed: u64, n: usize, factor: Option<f64>, power: f64) -> Result<RiceanChannel> {
    if !(power > 0.0) {
        return Err(Error::InvalidParameter(format!("channel power {power} must be positive")));
    }
    let (rho, sigma_h) = match factor {
        None => (power.sqrt(), 0.0),
        Some(f) if f.is_infinite() && f > 0.0 => (power.sqrt(), 0.0),
        Some(f) if f >= 0.0 => {
            let s2 = power / (1.0 + f * f);
            ((power - s2).sqrt(), s2.sqrt())
        }
        Some(f) => return Err(Error::InvalidParameter(format!("Ricean factor {f} must be nonnegative"))),
    };
    let mut r = rng(seed, Stream::Channel);
    let channel_diag = (0..n)
        .map(|_| {
            let theta: f64 = r.random::<f64>() * 2.0 * PI;
            let diffuse = if sigma_h > 0.0 {
                complex_normal(&mut r, sigma_h * sigma_h)
            } else {
                ZERO
            };
            cis(theta) * rho + diffuse
        })
        .collect();
    Ok(RiceanChannel {
        channel_diag,
        rho,
        sigma_h,
    })
}
