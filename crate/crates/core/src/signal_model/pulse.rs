//! Square-root raised-cosine chip pulse and its autocorrelation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub excess_bandwidth: f64,
    /// Chip period in seconds.
    pub chip_period: f64,
    /// Half-width of the observation window extension, in seconds.
    pub truncation_halfwidth: f64,
}

impl PulseShape {
    pub fn new(excess_bandwidth: f64, chip_period: f64, truncation_halfwidth: f64) -> Result<Self> {
        let p = Self {
            excess_bandwidth,
            chip_period,
            truncation_halfwidth,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.excess_bandwidth) {
            return Err(Error::InvalidParameter(format!(
                "excess bandwidth {} outside [0, 1)",
                self.excess_bandwidth
            )));
        }
        if !(self.chip_period > 0.0) || !(self.truncation_halfwidth > 0.0) {
            return Err(Error::InvalidParameter(
                "chip period and truncation half-width must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Autocorrelation at `t` seconds.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        raised_cosine(t / self.chip_period, self.excess_bandwidth)
    }
}

/// Autocorrelation `R(t)` of the SRRC pulse, normalised to `R(0) = 1`.
pub fn srrc_autocorrelation(t: f64, pulse: &PulseShape) -> f64 {
    pulse.autocorrelation(t)
}

fn sinc(s: f64) -> f64 {
    if s.abs() < 1e-8 {
        let x = PI * s;
        1.0 - x * x / 6.0
    } else {
        (PI * s).sin() / (PI * s)
    }
}

/// Raised-cosine pulse at `s` chips with roll-off `beta`.
pub fn raised_cosine(s: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return sinc(s);
    }
    let u = (2.0 * beta * s).abs();
    let w = 1.0 - u;
    // cos(pi u / 2) / (1 - u^2) = sin(pi w / 2) / (w (1 + u)); singular form near u = 1
    let taper = if w.abs() < 1e-3 {
        let x = PI * w / 2.0;
        let x2 = x * x;
        (PI / 2.0) * (1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0) / (1.0 + u)
    } else {
        (PI * u / 2.0).cos() / (1.0 - u * u)
    };
    sinc(s) * taper
}
