//! What the receiver is allowed to know about a scene.

use crate::error::Result;
use crate::signal_model::{Constellation, Dft, EffectiveChannel, RadarDictionary, SceneConfig};

/// Link, constellation, radar dictionary and noise level; never the radar
/// delays, couplings or count.
#[derive(Clone, Debug)]
pub struct Receiver {
    pub dft: Dft,
    pub dictionary: RadarDictionary,
    pub channel: EffectiveChannel,
    pub constellation: Constellation,
    pub noise_var: f64,
    /// Block duration `N T` in seconds.
    pub block_duration: f64,
}

impl Receiver {
    pub fn from_scene(scene: &SceneConfig) -> Result<Self> {
        scene.validate()?;
        let dft = scene.dft();
        let channel = scene.link.effective(&dft)?;
        Ok(Self {
            dft,
            dictionary: scene.dictionary.clone(),
            channel,
            constellation: scene.link.constellation.clone(),
            noise_var: scene.noise_var,
            block_duration: scene.block_duration(),
        })
    }

    pub fn n(&self) -> usize {
        self.dft.n()
    }

    pub fn k(&self) -> usize {
        self.dictionary.k
    }

    pub fn sigma_w(&self) -> f64 {
        self.noise_var.sqrt()
    }
}
