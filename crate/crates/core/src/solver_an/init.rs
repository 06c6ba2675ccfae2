//! Starting points for the factored solver.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::problem::{AnProblem, FactorParams, FactorState};
use crate::error::{Error, Result};
use crate::linalg::{norm, C64};
use crate::signal_model::random::{complex_normal, rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitStrategy {
    /// Complex Gaussian with per-entry scale `1e-2 |z| / sqrt((N + K) r)`.
    Random { seed: u64 },
    /// A saddle point of the surrogate; gradient descent cannot leave it.
    Zeros,
    /// Balanced factors of the truncated SVD of the minimum-norm solution of `A(X) = z`.
    Spectral,
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::Random { seed: 0 }
    }
}

pub const RANDOM_INIT_SCALE: f64 = 1e-2;

pub fn init_factor(problem: &AnProblem, params: FactorParams, strategy: InitStrategy) -> Result<FactorState> {
    problem.validate()?;
    let r = params.rank_cap;
    if r == 0 {
        return Err(Error::InvalidParameter("rank cap must be at least 1".into()));
    }
    let n = problem.n();
    let k = problem.k();
    let factor = match strategy {
        InitStrategy::Zeros => DMatrix::zeros(n + k, r),
        InitStrategy::Random { seed } => {
            let scale = RANDOM_INIT_SCALE * norm(problem.z) / (((n + k) * r) as f64).sqrt();
            let mut g = rng(seed, Stream::Init);
            let mut f = DMatrix::zeros(n + k, r);
            for c in 0..r {
                for row in 0..n + k {
                    f[(row, c)] = complex_normal(&mut g, scale * scale);
                }
            }
            f
        }
        InitStrategy::Spectral => spectral(problem, r),
    };
    Ok(FactorState {
        factor,
        errors: vec![C64::new(0.0, 0.0); problem.m()],
        params,
    })
}

fn spectral(problem: &AnProblem, r: usize) -> DMatrix<C64> {
    let n = problem.n();
    let k = problem.k();
    let x = DMatrix::from_fn(k, n, |c, col| {
        let energy: f64 = problem.dbar.row(col).iter().map(|d| d.norm_sqr()).sum();
        if energy > 0.0 {
            problem.dbar[(col, c)].conj() * problem.z[col] / energy
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let svd = x.svd(true, true);
    let left = svd.u.expect("left vectors requested");
    let right = svd.v_t.expect("right vectors requested").adjoint();
    let balance = (n as f64).powf(0.25);
    let mut f = DMatrix::zeros(n + k, r);
    for c in 0..r.min(svd.singular_values.len()) {
        let s = svd.singular_values[c].sqrt();
        for row in 0..n {
            f[(row, c)] = right[(row, c)] * (s * balance);
        }
        for row in 0..k {
            f[(n + row, c)] = left[(row, c)] * (s / balance);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::EffectiveChannel;

    fn setup() -> (Vec<C64>, DMatrix<C64>, EffectiveChannel) {
        let n = 12;
        let k = 3;
        let z: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let d = DMatrix::from_fn(n, k, |r, c| C64::new((r + c) as f64 * 0.1, 0.3));
        (z, d, EffectiveChannel::Diagonal(vec![C64::new(1.0, 0.0); n]))
    }

    #[test]
    fn zeros_and_reproducible_random() {
        let (z, d, ch) = setup();
        let p = AnProblem {
            z: &z,
            dbar: &d,
            channel: &ch,
            lambda: 1.0,
            gamma: 1.0,
        };
        let params = FactorParams::default();
        let zero = init_factor(&p, params, InitStrategy::Zeros).unwrap();
        assert_eq!(zero.factor.norm(), 0.0);
        let a = init_factor(&p, params, InitStrategy::Random { seed: 4 }).unwrap();
        let b = init_factor(&p, params, InitStrategy::Random { seed: 4 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_scale() {
        let n = 200;
        let k = 5;
        let z = vec![C64::new(3.0, -1.0); n];
        let d = DMatrix::from_element(n, k, C64::new(1.0, 0.0));
        let ch = EffectiveChannel::Diagonal(vec![C64::new(1.0, 0.0); n]);
        let p = AnProblem {
            z: &z,
            dbar: &d,
            channel: &ch,
            lambda: 1.0,
            gamma: 1.0,
        };
        let params = FactorParams::default();
        let f = init_factor(&p, params, InitStrategy::Random { seed: 9 }).unwrap();
        let expected = (RANDOM_INIT_SCALE * norm(&z)).powi(2);
        let got = f.factor.norm_squared();
        assert!((got / expected - 1.0).abs() < 0.05, "{got} vs {expected}");
    }

    #[test]
    fn spectral_reproduces_min_norm_product() {
        let (z, d, ch) = setup();
        let p = AnProblem {
            z: &z,
            dbar: &d,
            channel: &ch,
            lambda: 1.0,
            gamma: 1.0,
        };
        let params = FactorParams::default();
        let f = init_factor(&p, params, InitStrategy::Spectral).unwrap();
        let fitted = p.apply_interference(&f.x_matrix(12));
        for (a, b) in fitted.iter().zip(&z) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
