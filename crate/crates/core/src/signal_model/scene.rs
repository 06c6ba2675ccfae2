//! Scene description: everything needed to synthesise one trial.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{build_ricean_channel, CommLink};
use super::constellation::{Constellation, Modulation};
use super::dft::{Dft, IndexSplit};
use super::dictionary::{build_dictionary, RadarDictionary};
use super::pulse::PulseShape;
use super::random::{complex_normal, rng, Stream};
use crate::error::{Error, Result};
use crate::linalg::{cis, norm, norm_sq, wrap_unit, C64, ZERO};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarSource {
    /// Delay in seconds.
    pub delay: f64,
    /// Delay as a fraction of the block duration, in `[0, 1)`.
    pub normalized_delay: f64,
    pub coupling: C64,
    /// Unit-norm coordinates of the waveform in the dictionary.
    pub subspace_coeff: Vec<C64>,
}

impl RadarSource {
    pub fn new(delay: f64, block_duration: f64, coupling: C64, mut subspace_coeff: Vec<C64>) -> Result<Self> {
        let nrm = norm(&subspace_coeff);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::InvalidParameter("radar subspace coefficients must be nonzero".into()));
        }
        subspace_coeff.iter_mut().for_each(|h| *h /= nrm);
        Ok(Self {
            delay,
            normalized_delay: wrap_unit(delay / block_duration),
            coupling,
            subspace_coeff,
        })
    }

    /// `c h`, the product identifiable from observations.
    pub fn scaled_coeff(&self) -> Vec<C64> {
        self.subspace_coeff.iter().map(|h| h * self.coupling).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub index_split: IndexSplit,
    pub pulse: PulseShape,
    pub dictionary: RadarDictionary,
    pub radars: Vec<RadarSource>,
    pub link: CommLink,
    pub noise_var: f64,
    pub snr_db: Option<f64>,
    pub sir_db: Option<f64>,
    pub seed: u64,
    /// Range `[min, max]` in seconds of delays any radar may have; defaults
    /// to the span of the actual radar delays. Sets the exact-synthesis window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_window: Option<[f64; 2]>,
}

impl SceneConfig {
    pub fn n(&self) -> usize {
        self.index_split.n
    }

    pub fn block_duration(&self) -> f64 {
        self.n() as f64 * self.pulse.chip_period
    }

    pub fn dft(&self) -> Dft {
        Dft::new(self.index_split)
    }

    pub fn validate(&self) -> Result<()> {
        self.index_split.validate()?;
        self.pulse.validate()?;
        if self.dictionary.n() != self.n() {
            return Err(Error::Dimension(format!(
                "dictionary has {} rows, scene has N = {}",
                self.dictionary.n(),
                self.n()
            )));
        }
        if !(self.noise_var >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise variance {} is negative", self.noise_var)));
        }
        let t = self.block_duration();
        for (j, r) in self.radars.iter().enumerate() {
            if r.subspace_coeff.len() != self.dictionary.k {
                return Err(Error::Dimension(format!(
                    "radar {j} has {} coefficients, dictionary K = {}",
                    r.subspace_coeff.len(),
                    self.dictionary.k
                )));
            }
            if ((norm(&r.subspace_coeff)) - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("radar {j} coefficients are not unit norm")));
            }
            if !(0.0..1.0).contains(&r.normalized_delay) || (wrap_unit(r.delay / t) - r.normalized_delay).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "radar {j} normalised delay is inconsistent with its delay"
                )));
            }
        }
        if let Some([lo, hi]) = self.delay_window {
            if !(lo <= hi) {
                return Err(Error::InvalidParameter("delay window is empty".into()));
            }
        }
        Ok(())
    }

    /// Transmitted data symbols for this seed.
    pub fn symbols(&self) -> Vec<C64> {
        let pts = self.link.constellation.points();
        let m = match &self.link.kind {
            super::channel::LinkKind::General { mixing, .. } => mixing.ncols(),
            _ => self.n(),
        };
        let mut r = rng(self.seed, Stream::Symbols);
        (0..m).map(|_| pts[r.random_range(0..pts.len())]).collect()
    }

    /// Frequency-domain receiver noise for this seed.
    pub fn noise(&self) -> Vec<C64> {
        if self.noise_var == 0.0 {
            return vec![ZERO; self.n()];
        }
        let mut r = rng(self.seed, Stream::Noise);
        (0..self.n()).map(|_| complex_normal(&mut r, self.noise_var)).collect()
    }

    /// Time-domain waveforms `c_j g_j` of each radar.
    pub fn radar_waveforms(&self) -> Vec<Vec<C64>> {
        self.radars
            .iter()
            .map(|r| self.dictionary.waveform(&r.scaled_coeff()))
            .collect()
    }

    /// Delay window in seconds used by exact synthesis.
    pub fn effective_delay_window(&self) -> [f64; 2] {
        if let Some(w) = self.delay_window {
            return w;
        }
        if self.radars.is_empty() {
            return [0.0, 0.0];
        }
        let lo = self.radars.iter().map(|r| r.delay).fold(f64::INFINITY, f64::min);
        let hi = self.radars.iter().map(|r| r.delay).fold(f64::NEG_INFINITY, f64::max);
        [lo, hi]
    }
}

/// Sets the noise variance from `snr_db` and rescales all couplings by a
/// common factor to meet `sir_db`.
///
/// SNR is `(rho^2 + sigma_h^2) eps_b / sigma_w^2`. SIR is the per-subcarrier
/// power ratio `N eps_b (rho^2 + sigma_h^2) / ||sum_j c_j Dbar h_j||^2`,
/// which equals `eps_b (rho^2 + sigma_h^2) / ||sum_j c_j g_j||^2` for the
/// time-domain waveforms under the `(1/N) F^H` synthesis convention.
pub fn scale_to_snr_sir(mut scene: SceneConfig, snr_db: Option<f64>, sir_db: Option<f64>) -> Result<SceneConfig> {
    let signal = scene.link.channel_power() * scene.link.constellation.energy();
    scene.noise_var = match snr_db {
        Some(db) => signal / 10f64.powf(db / 10.0),
        None => 0.0,
    };
    scene.snr_db = snr_db;
    if let Some(db) = sir_db {
        let interference = norm_sq(&aggregate_waveform(&scene));
        if !(interference > 0.0) {
            return Err(Error::ZeroRadarEnergy);
        }
        let target = signal / 10f64.powf(db / 10.0);
        let s = (target / interference).sqrt();
        scene.radars.iter_mut().for_each(|r| r.coupling *= s);
    }
    scene.sir_db = sir_db;
    Ok(scene)
}

fn aggregate_waveform(scene: &SceneConfig) -> Vec<C64> {
    let mut total = vec![ZERO; scene.n()];
    for w in scene.radar_waveforms() {
        total.iter_mut().zip(&w).for_each(|(t, x)| *t += x);
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// Ricean taps with `factor = rho / sigma_h` (absent for no diffuse part).
    Ricean { factor: Option<f64> },
    Identity,
}

/// Generator of random scenes sharing one set of system parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub n: usize,
    pub k: usize,
    pub pulse_length: usize,
    pub num_radars: usize,
    /// Block duration `N T` in seconds.
    pub block_duration: f64,
    /// Radar delays are drawn uniformly from this range (seconds).
    pub delay_range: [f64; 2],
    /// Minimum pairwise separation of normalised delays.
    pub min_separation: f64,
    pub modulation: Modulation,
    pub symbol_energy: f64,
    pub channel: ChannelModel,
    pub snr_db: Option<f64>,
    pub sir_db: Option<f64>,
    /// Coupling magnitude used when no SIR is imposed.
    pub coupling_magnitude: f64,
    /// Pulse roll-off; `None` selects `1/N`.
    pub excess_bandwidth: Option<f64>,
    /// Truncation half-width in units of the block duration.
    pub truncation_blocks: f64,
    /// The dictionary is a fixed system property, drawn from this seed.
    pub dictionary_seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            n: 129,
            k: 5,
            pulse_length: 32,
            num_radars: 2,
            block_duration: 100e-6,
            delay_range: [10e-6, 70e-6],
            min_separation: 0.0,
            modulation: Modulation::Qpsk,
            symbol_energy: 1.0,
            channel: ChannelModel::Ricean { factor: Some(3.0) },
            snr_db: Some(15.0),
            sir_db: Some(0.0),
            coupling_magnitude: 1.0,
            excess_bandwidth: None,
            truncation_blocks: 2.0,
            dictionary_seed: 1,
        }
    }
}

impl ScenarioSpec {
    pub fn chip_period(&self) -> f64 {
        self.block_duration / self.n as f64
    }

    pub fn pulse(&self) -> Result<PulseShape> {
        let beta = self.excess_bandwidth.unwrap_or(1.0 / self.n as f64);
        PulseShape::new(beta, self.chip_period(), self.truncation_blocks * self.block_duration)
    }

    pub fn dictionary(&self, dft: &Dft) -> Result<RadarDictionary> {
        build_dictionary(self.dictionary_seed, dft, self.pulse_length, self.k)
    }

    /// Normalised delay window `[lo, hi)` the radars are drawn from.
    pub fn normalized_delay_window(&self) -> (f64, f64) {
        (
            self.delay_range[0] / self.block_duration,
            self.delay_range[1] / self.block_duration,
        )
    }

    pub fn validate(&self) -> Result<()> {
        IndexSplit::new(self.n)?;
        let [lo, hi] = self.delay_range;
        if !(0.0 <= lo && lo <= hi && hi < self.block_duration) {
            return Err(Error::InvalidParameter(format!(
                "delay range [{lo}, {hi}] must lie inside [0, block duration)"
            )));
        }
        if !(self.truncation_blocks > 0.0) || !(self.coupling_magnitude >= 0.0) {
            return Err(Error::InvalidParameter("truncation and coupling must be positive".into()));
        }
        self.pulse()?;
        Ok(())
    }

    /// Draws a scene using an already-built dictionary (shared across trials).
    pub fn draw_with(&self, seed: u64, dictionary: &RadarDictionary) -> Result<SceneConfig> {
        self.validate()?;
        let split = IndexSplit::new(self.n)?;
        let constellation = Constellation::new(self.modulation, self.symbol_energy)?;
        let link = match &self.channel {
            ChannelModel::Ricean { factor } => CommLink::ofdm(build_ricean_channel(seed, self.n, *factor, 1.0)?, constellation),
            ChannelModel::Identity => CommLink::identity(constellation),
        };
        let radars = self.draw_radars(seed)?;
        let draft = SceneConfig {
            index_split: split,
            pulse: self.pulse()?,
            dictionary: dictionary.clone(),
            radars,
            link,
            noise_var: 0.0,
            snr_db: None,
            sir_db: None,
            seed,
            delay_window: Some(self.delay_range),
        };
        let sir = if self.num_radars == 0 { None } else { self.sir_db };
        scale_to_snr_sir(draft, self.snr_db, sir)
    }

    pub fn draw(&self, seed: u64) -> Result<SceneConfig> {
        let dft = Dft::new(IndexSplit::new(self.n)?);
        let dict = self.dictionary(&dft)?;
        self.draw_with(seed, &dict)
    }

    fn draw_radars(&self, seed: u64) -> Result<Vec<RadarSource>> {
        let mut r = rng(seed, Stream::Radars);
        let [lo, hi] = self.delay_range;
        let mut delays: Vec<f64> = Vec::with_capacity(self.num_radars);
        let mut attempts = 0usize;
        while delays.len() < self.num_radars {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::InvalidParameter(format!(
                    "cannot place {} radars with separation {} in the delay range",
                    self.num_radars, self.min_separation
                )));
            }
            let d = lo + (hi - lo) * r.random::<f64>();
            let ok = delays
                .iter()
                .all(|&e| ((d - e) / self.block_duration).abs() >= self.min_separation);
            if ok {
                delays.push(d);
            }
        }
        delays
            .into_iter()
            .map(|d| {
                let h: Vec<C64> = (0..self.k).map(|_| complex_normal(&mut r, 1.0)).collect();
                let phase = r.random::<f64>() * 2.0 * std::f64::consts::PI;
                RadarSource::new(d, self.block_duration, cis(phase) * self.coupling_magnitude, h)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ScenarioSpec {
        ScenarioSpec {
            n: 33,
            k: 3,
            pulse_length: 16,
            ..ScenarioSpec::default()
        }
    }

    #[test]
    fn snr_sets_noise_variance() {
        let spec = ScenarioSpec {
            snr_db: Some(20.0),
            ..small_spec()
        };
        let s = spec.draw(1).unwrap();
        assert!((s.noise_var - 0.01).abs() < 1e-15);
        let spec = ScenarioSpec { snr_db: None, ..small_spec() };
        assert_eq!(spec.draw(1).unwrap().noise_var, 0.0);
    }

    #[test]
    fn sir_scaling_for_unit_waveform() {
        // single radar whose time-domain waveform has unit energy
        let spec = ScenarioSpec {
            num_radars: 1,
            sir_db: None,
            snr_db: None,
            n: 129,
            ..ScenarioSpec::default()
        };
        let mut scene = spec.draw(3).unwrap();
        let g = scene.dictionary.waveform(&scene.radars[0].subspace_coeff);
        let e = norm_sq(&g).sqrt();
        scene.radars[0].coupling = C64::new(1.0 / e, 0.0);
        let scaled = scale_to_snr_sir(scene, None, Some(0.0)).unwrap();
        let c = scaled.radars[0].coupling.norm_sqr() * e * e;
        assert!((c - 1.0).abs() < 1e-9, "{c}");
        let spectrum = scaled.dictionary.spectrum(&scaled.radars[0].scaled_coeff());
        assert!((norm_sq(&spectrum) - 129.0).abs() < 1e-8);
    }

    #[test]
    fn sir_without_radar_energy_fails() {
        let spec = ScenarioSpec {
            num_radars: 1,
            coupling_magnitude: 0.0,
            ..small_spec()
        };
        assert!(matches!(spec.draw(1), Err(Error::ZeroRadarEnergy)));
    }

    #[test]
    fn radars_have_unit_coefficients_and_delays_in_range() {
        let spec = small_spec();
        for seed in 0..20 {
            let s = spec.draw(seed).unwrap();
            s.validate().unwrap();
            for r in &s.radars {
                assert!((norm(&r.subspace_coeff) - 1.0).abs() < 1e-12);
                assert!(r.delay >= 10e-6 && r.delay <= 70e-6);
                assert!((r.normalized_delay - r.delay / 100e-6).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn minimum_separation_is_respected() {
        let spec = ScenarioSpec {
            min_separation: 0.1,
            ..small_spec()
        };
        for seed in 0..20 {
            let s = spec.draw(seed).unwrap();
            assert!((s.radars[0].normalized_delay - s.radars[1].normalized_delay).abs() >= 0.1);
        }
    }

    #[test]
    fn scene_json_round_trip() {
        let s = small_spec().draw(11).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: SceneConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.radars, s.radars);
        assert_eq!(back.link, s.link);
        assert!((back.dictionary.columns.clone() - s.dictionary.columns.clone()).camax() == 0.0);
        assert_eq!(back.symbols(), s.symbols());
    }
}
