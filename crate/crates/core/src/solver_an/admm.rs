//! Reference ADMM solver for the semidefinite program, splitting the PSD
//! block from the quadratic and l1 terms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::problem::{assemble, AnProblem, SdpState};
use super::toeplitz::hermitian_toeplitz;
use crate::error::{Error, Result};
use crate::linalg::{project_psd, soft_threshold, C64};
use crate::signal_model::EffectiveChannel;
use crate::solver_l1::{weighted_lasso, LinearMap, ProxOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmOptions {
    /// Initial augmented-Lagrangian penalty.
    pub rho: f64,
    pub max_iter: usize,
    /// Relative primal/dual residual tolerance.
    pub tol: f64,
    /// Residual balancing of the penalty.
    pub adapt: bool,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iter: 5000,
            tol: 1e-6,
            adapt: true,
        }
    }
}

/// `sqrt(w) Phi` for the error-vector subproblem of a dense link.
struct WeightedLink<'a> {
    channel: &'a EffectiveChannel,
    sqrt_w: &'a [f64],
}

impl LinearMap for WeightedLink<'_> {
    fn dim_in(&self) -> usize {
        self.channel.n_symbols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.channel.apply(x).iter().zip(self.sqrt_w).map(|(y, w)| y * w).collect()
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let scaled: Vec<C64> = y.iter().zip(self.sqrt_w).map(|(a, w)| a * w).collect();
        self.channel.adjoint(&scaled)
    }
}

pub fn admm_solve(problem: &AnProblem, opts: &AdmmOptions, warm: Option<&SdpState>) -> Result<SdpState> {
    problem.validate()?;
    if !(opts.rho > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidParameter("ADMM needs rho > 0 and max_iter >= 1".into()));
    }
    let n = problem.n();
    let k = problem.k();
    let m = problem.m();
    let dim = n + k;
    let lambda = problem.lambda;
    let gamma = problem.gamma;
    let row_energy: Vec<f64> = (0..n)
        .map(|r| problem.dbar.row(r).iter().map(|z| z.norm_sqr()).sum())
        .collect();

    let (mut w, mut mult, mut rho, mut v) = match warm {
        Some(s) if s.w.nrows() == dim && s.v.len() == m => (s.w.clone(), s.multiplier.clone(), s.rho, s.v.clone()),
        _ => (DMatrix::zeros(dim, dim), DMatrix::zeros(dim, dim), opts.rho, vec![C64::new(0.0, 0.0); m]),
    };
    let mut best: Option<(f64, SdpState)> = None;
    let inner = ProxOptions {
        max_iter: 500,
        tol: 1e-12,
    };

    for it in 1..=opts.max_iter {
        let s = &w - &mult / C64::new(rho, 0.0);
        // Toeplitz block
        let mut u = vec![C64::new(0.0, 0.0); n];
        u[0] = C64::new(
            (0..n).map(|j| s[(j, j)].re).sum::<f64>() / n as f64 - lambda / (2.0 * rho * n as f64),
            0.0,
        );
        for (d, ud) in u.iter_mut().enumerate().skip(1) {
            let acc: C64 = (0..n - d).map(|j| s[(j + d, j)] + s[(j, j + d)].conj()).sum();
            *ud = acc / (2.0 * (n - d) as f64);
        }
        // trace block
        let st = s.view((n, n), (k, k));
        let mut t = (st + st.adjoint()) * C64::new(0.5, 0.0);
        for i in 0..k {
            t[(i, i)] -= C64::new(lambda / (2.0 * rho), 0.0);
        }
        // interference block and errors
        let sx = s.view((n, 0), (k, n));
        let sxh = s.view((0, n), (n, k));
        let mut x = (sx + sxh.adjoint()) * C64::new(0.5, 0.0);
        let target: Vec<C64> = problem
            .z
            .iter()
            .zip(problem.apply_interference(&x))
            .map(|(z, a)| z - a)
            .collect();
        let weight: Vec<f64> = row_energy.iter().map(|e| 2.0 * rho / (e + 2.0 * rho)).collect();
        match problem.channel {
            EffectiveChannel::Diagonal(d) => {
                for i in 0..m {
                    let g = d[i];
                    let g2 = g.norm_sqr();
                    v[i] = if g2 == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        soft_threshold(g.conj() * target[i] / g2, gamma / (weight[i] * g2))
                    };
                }
            }
            EffectiveChannel::Dense { .. } => {
                let sqrt_w: Vec<f64> = weight.iter().map(|w| w.sqrt()).collect();
                let y: Vec<C64> = target.iter().zip(&sqrt_w).map(|(t, w)| t * w).collect();
                let op = WeightedLink {
                    channel: problem.channel,
                    sqrt_w: &sqrt_w,
                };
                v = weighted_lasso(&op, &y, &vec![gamma; m], Some(&v), &inner)?.x;
            }
        }
        let phi_v = problem.channel.apply(&v);
        for col in 0..n {
            let theta = (target[col] - phi_v[col]) / (row_energy[col] + 2.0 * rho);
            for c in 0..k {
                x[(c, col)] += problem.dbar[(col, c)].conj() * theta;
            }
        }

        let top = hermitian_toeplitz(&u);
        let block = assemble(&top, &x, &t);
        let w_new = project_psd(&(&block + &mult / C64::new(rho, 0.0)));
        let gap = &block - &w_new;
        mult += &gap * C64::new(rho, 0.0);
        let primal = gap.norm();
        let dual = rho * (&w_new - &w).norm();
        w = w_new;

        let root = (dim as f64).sqrt();
        let eps_pri = opts.tol * (root + block.norm().max(w.norm()));
        let eps_dual = opts.tol * (root + mult.norm());
        let score = (primal / eps_pri).max(dual / eps_dual);
        let converged = primal <= eps_pri && dual <= eps_dual;
        let improves = best.as_ref().is_none_or(|(b, _)| score < *b);
        if converged || improves {
            let state = SdpState {
                x,
                u,
                t,
                v: v.clone(),
                w: w.clone(),
                multiplier: mult.clone(),
                rho,
                iterations: it,
                converged,
                primal_residual: primal,
                dual_residual: dual,
            };
            if converged {
                return Ok(state);
            }
            best = Some((score, state));
        }
        if opts.adapt && it % 10 == 0 {
            if primal > 10.0 * dual {
                rho *= 2.0;
            } else if dual > 10.0 * primal {
                rho /= 2.0;
            }
        }
        if !primal.is_finite() {
            return Err(Error::Divergence("ADMM residual became non-finite".into()));
        }
    }
    let (_, mut state) = best.expect("at least one iteration ran");
    state.iterations = opts.max_iter;
    state.converged = false;
    Ok(state)
}
