//! Receiver observations: the matched-filter spectrum `r(k)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dft::IndexSplit;
use super::pulse::raised_cosine;
use super::scene::SceneConfig;
use crate::error::{Error, Result};
use crate::linalg::{cis, C64, ZERO};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqObservation {
    /// Row `r` holds frequency `k = r - n1`.
    pub values: Vec<C64>,
    pub index_split: IndexSplit,
    pub noise_var: f64,
}

impl FreqObservation {
    pub fn new(values: Vec<C64>, index_split: IndexSplit, noise_var: f64) -> Result<Self> {
        if values.len() != index_split.n {
            return Err(Error::Dimension(format!(
                "observation has {} values, expected N = {}",
                values.len(),
                index_split.n
            )));
        }
        Ok(Self {
            values,
            index_split,
            noise_var,
        })
    }

    /// CSV with header `k,re,im`, one row per frequency.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re,im\n");
        for (r, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{:e},{:e}", self.index_split.freq(r), v.re, v.im);
        }
        out
    }

    /// Parses the CSV written by [`FreqObservation::to_csv`]. Rows may come
    /// in any order but must cover `-n1..=n2` exactly once.
    pub fn from_csv(text: &str, noise_var: f64) -> Result<Self> {
        let mut rows: Vec<(i64, C64)> = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with('k')) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", line_no + 1)));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", line_no + 1));
            let k: i64 = fields[0].parse().map_err(|_| bad("k"))?;
            let re: f64 = fields[1].parse().map_err(|_| bad("re"))?;
            let im: f64 = fields[2].parse().map_err(|_| bad("im"))?;
            rows.push((k, C64::new(re, im)));
        }
        let split = IndexSplit::new(rows.len())
            .map_err(|_| Error::Parse("observation CSV has no rows".into()))?;
        let mut values = vec![None; split.n];
        for (k, v) in rows {
            if k < -(split.n1 as i64) || k > split.n2 as i64 {
                return Err(Error::Parse(format!("frequency {k} outside the index range")));
            }
            let slot = &mut values[split.row(k)];
            if slot.is_some() {
                return Err(Error::Parse(format!("frequency {k} appears twice")));
            }
            *slot = Some(v);
        }
        let values = values.into_iter().map(|v| v.unwrap()).collect();
        Self::new(values, split, noise_var)
    }
}

/// Interference spectrum `sum_j c_j g_j(k) exp(-i 2 pi k tau_j)`.
pub fn radar_spectrum(scene: &SceneConfig) -> Vec<C64> {
    let split = scene.index_split;
    let mut out = vec![ZERO; split.n];
    for r in &scene.radars {
        let g = scene.dictionary.spectrum(&r.scaled_coeff());
        for (row, o) in out.iter_mut().enumerate() {
            let k = split.freq(row) as f64;
            *o += g[row] * cis(-2.0 * PI * k * r.normalized_delay);
        }
    }
    out
}

/// Frequency-domain model `x(k) + interference(k) + w(k)` with the scene's
/// own symbols and noise.
pub fn synthesize_approx(scene: &SceneConfig) -> Result<FreqObservation> {
    synthesize_approx_with(scene, &scene.symbols(), &scene.noise())
}

pub fn synthesize_approx_with(scene: &SceneConfig, symbols: &[C64], noise: &[C64]) -> Result<FreqObservation> {
    let dft = scene.dft();
    let link = scene.link.effective(&dft)?;
    if symbols.len() != link.n_symbols() || noise.len() != scene.n() {
        return Err(Error::Dimension("symbol or noise length does not match the scene".into()));
    }
    let mut values = link.apply(symbols);
    for ((v, i), w) in values.iter_mut().zip(radar_spectrum(scene)).zip(noise) {
        *v += i + w;
    }
    FreqObservation::new(values, scene.index_split, scene.noise_var)
}

const MAX_HALVINGS: usize = 8;
const INITIAL_STEP: f64 = 1.0 / 16.0;
const QUAD_TOL: f64 = 1e-8;

/// Evaluates the truncated projection integral by composite Simpson
/// quadrature, time measured in chips, with the scene's symbols and noise.
pub fn synthesize_exact(scene: &SceneConfig) -> Result<FreqObservation> {
    synthesize_exact_with(scene, &scene.symbols(), &scene.noise())
}

pub fn synthesize_exact_with(scene: &SceneConfig, symbols: &[C64], noise: &[C64]) -> Result<FreqObservation> {
    let dft = scene.dft();
    let link = scene.link.effective(&dft)?;
    if symbols.len() != link.n_symbols() || noise.len() != scene.n() {
        return Err(Error::Dimension("symbol or noise length does not match the scene".into()));
    }
    let n = scene.n();
    let chip = scene.pulse.chip_period;
    let beta = scene.pulse.excess_bandwidth;
    let comm = dft.inverse(&link.apply(symbols));

    // pulse trains: (start offset in chips, amplitudes)
    let mut trains: Vec<(f64, Vec<C64>)> = vec![(0.0, comm)];
    for (r, w) in scene.radars.iter().zip(scene.radar_waveforms()) {
        trains.push((r.delay / chip, w));
    }
    let [tau_min, tau_max] = scene.effective_delay_window();
    let half = scene.pulse.truncation_halfwidth / chip;
    let a = tau_min / chip - half;
    let b = tau_max / chip + (n - 1) as f64 + half;

    let received = |s: f64| -> C64 {
        let mut acc = ZERO;
        for (offset, amps) in &trains {
            for (m, x) in amps.iter().enumerate() {
                if *x != ZERO {
                    acc += x * raised_cosine(s - m as f64 - offset, beta);
                }
            }
        }
        acc
    };

    let split = scene.index_split;
    let integrate = |step_target: f64| -> Vec<C64> {
        let mut intervals = ((b - a) / step_target).ceil() as usize;
        intervals += intervals % 2;
        let h = (b - a) / intervals as f64;
        let samples: Vec<(f64, C64)> = (0..=intervals)
            .map(|i| {
                let s = a + h * i as f64;
                let w = if i == 0 || i == intervals {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                (s, received(s) * (w * h / 3.0))
            })
            .collect();
        (0..n)
            .map(|row| {
                let k = split.freq(row) as f64;
                let omega = -2.0 * PI * k / n as f64;
                samples.iter().map(|(s, v)| v * cis(omega * s)).sum()
            })
            .collect()
    };

    let mut step = INITIAL_STEP;
    let mut prev = integrate(step);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        step /= 2.0;
        let next = integrate(step);
        let scale = next.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        change = next.iter().zip(&prev).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale;
        prev = next;
        if change <= QUAD_TOL || scale == f64::MIN_POSITIVE {
            let values = prev.iter().zip(noise).map(|(v, w)| v + w).collect();
            return FreqObservation::new(values, split, scene.noise_var);
        }
    }
    Err(Error::Quadrature {
        refinements: MAX_HALVINGS,
        change,
    })
}

/// Bound on `max_k |exact - approx|` for an autocorrelation decaying like
/// `|t|^-(m0+1)`: `sum_n 2|x(n)| / (m0 Tb^m0) + sum_j sum_n 2|c_j g_j(n)| / (m0 Tb^m0)`
/// with `Tb = T' - tau_min` in chips.
pub fn approximation_error_bound(scene: &SceneConfig, m0: f64) -> Result<f64> {
    approximation_error_bound_with(scene, &scene.symbols(), m0)
}

pub fn approximation_error_bound_with(scene: &SceneConfig, symbols: &[C64], m0: f64) -> Result<f64> {
    if !(m0 > 1.0) {
        return Err(Error::InvalidParameter(format!("decay order {m0} must exceed 1")));
    }
    let chip = scene.pulse.chip_period;
    let [tau_min, _] = scene.effective_delay_window();
    let tb = (scene.pulse.truncation_halfwidth - tau_min) / chip;
    if !(tb > 0.0) {
        return Err(Error::EmptyWindow(tb));
    }
    let dft = scene.dft();
    let link = scene.link.effective(&dft)?;
    let comm = dft.inverse(&link.apply(symbols));
    let mut mass: f64 = comm.iter().map(|x| x.norm()).sum();
    for w in scene.radar_waveforms() {
        mass += w.iter().map(|x| x.norm()).sum::<f64>();
    }
    Ok(2.0 * mass / (m0 * tb.powf(m0)))
}
