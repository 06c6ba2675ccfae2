//! Accelerated proximal gradient for weighted complex LASSO problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot_re, norm_sq, power_iteration, soft_threshold, C64};

/// A linear operator given by its action and adjoint.
pub trait LinearMap {
    fn dim_in(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    fn adjoint(&self, y: &[C64]) -> Vec<C64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxOptions {
    pub max_iter: usize,
    /// Relative objective change that counts as converged.
    pub tol: f64,
}

impl Default for ProxOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProxOutcome {
    pub x: Vec<C64>,
    /// Objective after each accepted iterate, starting with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `1/2 ||y - B x||^2 + sum_i w_i |x_i|` with FISTA, adaptive
/// restart and backtracking. Rejected momentum steps are replaced by plain
/// proximal steps, so the recorded objective is nonincreasing.
pub fn weighted_lasso<M: LinearMap>(
    op: &M,
    y: &[C64],
    weights: &[f64],
    x0: Option<&[C64]>,
    opts: &ProxOptions,
) -> Result<ProxOutcome> {
    let dim = op.dim_in();
    if weights.len() != dim || x0.is_some_and(|x| x.len() != dim) {
        return Err(Error::Dimension("weights or start point do not match the operator".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter("regularisation weights must be nonnegative".into()));
    }
    let mut lip = 1.01 * power_iteration(dim, |x| op.apply(x), |r| op.adjoint(r), 100);
    if !(lip > 0.0) {
        lip = 1.0;
    }
    let penalty = |x: &[C64]| -> f64 { x.iter().zip(weights).map(|(v, w)| w * v.norm()).sum() };

    let mut x: Vec<C64> = x0.map_or_else(|| vec![C64::new(0.0, 0.0); dim], <[C64]>::to_vec);
    let mut bx = op.apply(&x);
    let resid = |bx: &[C64]| -> Vec<C64> { bx.iter().zip(y).map(|(a, b)| a - b).collect() };
    let mut f_x = 0.5 * norm_sq(&resid(&bx)) + penalty(&x);
    let mut trace = vec![f_x];
    let mut yk = x.clone();
    let mut byk = bx.clone();
    let mut t = 1.0f64;
    let mut restarted = true;
    let mut iterations = 0;
    let mut converged = f_x == 0.0;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let ry = resid(&byk);
        let smooth_y = 0.5 * norm_sq(&ry);
        let grad = op.adjoint(&ry);
        let (x_new, bx_new, smooth_new) = loop {
            let cand: Vec<C64> = yk
                .iter()
                .zip(&grad)
                .zip(weights)
                .map(|((v, g), w)| soft_threshold(v - g / lip, w / lip))
                .collect();
            let bc = op.apply(&cand);
            let s = 0.5 * norm_sq(&resid(&bc));
            let diff: Vec<C64> = cand.iter().zip(&yk).map(|(a, b)| a - b).collect();
            let model = smooth_y + dot_re(&grad, &diff) + 0.5 * lip * norm_sq(&diff);
            if s <= model * (1.0 + 1e-12) + 1e-300 {
                break (cand, bc, s);
            }
            lip *= 2.0;
            if !lip.is_finite() {
                return Err(Error::Divergence("step size underflow in proximal gradient".into()));
            }
        };
        let f_new = smooth_new + penalty(&x_new);
        if !f_new.is_finite() {
            return Err(Error::Divergence(format!("objective became {f_new}")));
        }
        if f_new > f_x {
            if restarted {
                // a plain proximal step could not decrease: numerically stationary
                converged = true;
                break;
            }
            t = 1.0;
            yk.clone_from(&x);
            byk.clone_from(&bx);
            restarted = true;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_new;
        yk = x_new.iter().zip(&x).map(|(a, b)| a + (a - b) * mom).collect();
        byk = bx_new.iter().zip(&bx).map(|(a, b)| a + (a - b) * mom).collect();
        t = t_new;
        restarted = false;
        let change = (f_x - f_new).abs();
        x = x_new;
        bx = bx_new;
        let prev = f_x;
        f_x = f_new;
        trace.push(f_x);
        if change <= opts.tol * prev.abs() || f_x == 0.0 {
            converged = true;
        }
    }
    Ok(ProxOutcome {
        x,
        trace,
        iterations,
        converged,
    })
}
