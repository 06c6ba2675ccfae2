//! Radar parameters from an estimated interference matrix.

pub mod associate;
pub mod certificate;
pub mod music;

pub use associate::{associate, Detection};
pub use certificate::{dual_from_primal, locate_by_certificate, DualCertificate};
pub use music::{music_row, RowEstimate};

use nalgebra::DMatrix;

use crate::linalg::{wrap_unit, C64};
use crate::receiver::Receiver;
use crate::result::RadarEstimate;
use crate::solver_l1::reconstruct_waveform;

/// Per-row MUSIC, then association; each detection carries the
/// reconstructed waveform of its coefficient block.
pub fn extract_radars(x: &DMatrix<C64>, rx: &Receiver, delta: f64, max_order: usize) -> Vec<RadarEstimate> {
    let rows: Vec<RowEstimate> = (0..x.nrows())
        .map(|r| {
            let row: Vec<C64> = x.row(r).iter().cloned().collect();
            music_row(&row, max_order)
        })
        .collect();
    detections_to_radars(associate(&rows, delta).0, rx)
}

pub fn detections_to_radars(dets: Vec<Detection>, rx: &Receiver) -> Vec<RadarEstimate> {
    dets.into_iter()
        .map(|d| {
            let w = reconstruct_waveform(&d.coeff, &rx.dictionary, &rx.dft);
            RadarEstimate::new(wrap_unit(d.normalized_delay), rx.block_duration, d.coeff, w)
        })
        .collect()
}
