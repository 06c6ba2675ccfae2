//! Seeded, independent random streams for each scene ingredient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::C64;

#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Stream {
    Dictionary = 1,
    Channel = 2,
    Radars = 3,
    Symbols = 4,
    Noise = 5,
    Init = 6,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// Circularly-symmetric complex Gaussian with `E|z|^2 = var`.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}
