//! Scene generation and observation synthesis.

pub mod channel;
pub mod constellation;
pub mod dft;
pub mod dictionary;
pub mod pulse;
pub mod random;
pub mod scene;
pub mod synth;

pub use channel::{build_ricean_channel, ofdm_matrices, CommLink, EffectiveChannel, LinkKind, RiceanChannel};
pub use constellation::{Constellation, Modulation};
pub use dft::{steering, Dft, IndexSplit};
pub use dictionary::{build_dictionary, RadarDictionary};
pub use pulse::{srrc_autocorrelation, PulseShape};
pub use scene::{scale_to_snr_sir, ChannelModel, RadarSource, ScenarioSpec, SceneConfig};
pub use synth::{
    approximation_error_bound, radar_spectrum, synthesize_approx, synthesize_approx_with, synthesize_exact,
    synthesize_exact_with, FreqObservation,
};
