//! The atomic-norm estimation problem and its factored surrogate.
//!
//! Complex gradients are returned as `df/dRe + i df/dIm`, i.e. twice the
//! derivative with respect to the conjugate variable, so that a first-order
//! change of `f` along `D` is `Re <G, D>`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::smooth::{smoothed_l1, smoothed_l1_grad};
use super::toeplitz::{hermitian_toeplitz, toeplitz_project};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, C64};
use crate::signal_model::EffectiveChannel;

/// `min 1/2 |z - Phi v - A(X)|^2 + lambda ||X||_atomic + gamma ||v||_1`
/// where `A(X)_k = sum_c Dbar[k, c] X[c, k]`.
#[derive(Clone, Copy, Debug)]
pub struct AnProblem<'a> {
    pub z: &'a [C64],
    /// `N x K` dictionary spectra.
    pub dbar: &'a DMatrix<C64>,
    pub channel: &'a EffectiveChannel,
    pub lambda: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    /// Number of columns of the factor.
    pub rank_cap: usize,
    /// Smoothing level of the l1 surrogate.
    pub mu: f64,
    /// Weight of the Toeplitz-deviation penalty.
    pub penalty: f64,
    /// Gradient-norm stopping tolerance.
    pub grad_tol: f64,
}

impl Default for FactorParams {
    fn default() -> Self {
        Self {
            rank_cap: 10,
            mu: 0.01,
            penalty: 5.0,
            grad_tol: 0.01,
        }
    }
}

/// `Z = V V^H` with `V = [V_U; V_X]` (`N + K` rows) plus the error vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorState {
    pub factor: DMatrix<C64>,
    pub errors: Vec<C64>,
    pub params: FactorParams,
}

impl FactorState {
    fn split(&self, n: usize) -> (DMatrix<C64>, DMatrix<C64>) {
        let k = self.factor.nrows() - n;
        (self.factor.rows(0, n).into_owned(), self.factor.rows(n, k).into_owned())
    }

    /// The `K x N` interference block `V_X V_U^H`.
    pub fn x_matrix(&self, n: usize) -> DMatrix<C64> {
        let (vu, vx) = self.split(n);
        vx * vu.adjoint()
    }

    pub fn z_matrix(&self) -> DMatrix<C64> {
        &self.factor * self.factor.adjoint()
    }
}

/// Variables of the semidefinite program and the PSD split variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpState {
    pub x: DMatrix<C64>,
    /// First column of the Hermitian Toeplitz block.
    pub u: Vec<C64>,
    pub t: DMatrix<C64>,
    pub v: Vec<C64>,
    /// PSD copy of the block matrix `[[Toep(u), X^H], [X, T]]`.
    pub w: DMatrix<C64>,
    /// Multiplier of the constraint `block = W`.
    pub multiplier: DMatrix<C64>,
    /// Final augmented-Lagrangian penalty.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpState {
    pub fn block_matrix(&self) -> DMatrix<C64> {
        assemble(&hermitian_toeplitz(&self.u), &self.x, &self.t)
    }
}

pub(crate) fn assemble(top: &DMatrix<C64>, x: &DMatrix<C64>, t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = top.nrows();
    let k = t.nrows();
    let mut m = DMatrix::zeros(n + k, n + k);
    m.view_mut((0, 0), (n, n)).copy_from(top);
    m.view_mut((n, 0), (k, n)).copy_from(x);
    m.view_mut((0, n), (n, k)).copy_from(&x.adjoint());
    m.view_mut((n, n), (k, k)).copy_from(t);
    m
}

impl AnProblem<'_> {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn k(&self) -> usize {
        self.dbar.ncols()
    }

    pub fn m(&self) -> usize {
        self.channel.n_symbols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dbar.nrows() != self.n() || self.channel.n_rows() != self.n() {
            return Err(Error::Dimension("residual, dictionary and link sizes differ".into()));
        }
        if !(self.lambda >= 0.0 && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter("weights must be nonnegative".into()));
        }
        Ok(())
    }

    /// `A(X)`.
    pub fn apply_interference(&self, x: &DMatrix<C64>) -> Vec<C64> {
        (0..self.n())
            .map(|k| (0..self.k()).map(|c| self.dbar[(k, c)] * x[(c, k)]).sum())
            .collect()
    }

    /// Adjoint of [`AnProblem::apply_interference`]: `A*(e)[c, k] = conj(Dbar[k, c]) e_k`.
    pub fn adjoint_interference(&self, e: &[C64]) -> DMatrix<C64> {
        DMatrix::from_fn(self.k(), self.n(), |c, k| self.dbar[(k, c)].conj() * e[k])
    }

    /// `z - Phi v - A(X)`.
    pub fn residual(&self, x: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
        let phi_v = self.channel.apply(v);
        self.z
            .iter()
            .zip(phi_v)
            .zip(self.apply_interference(x))
            .map(|((z, p), a)| z - p - a)
            .collect()
    }

    /// Objective on explicit blocks of `Z`. `mu = None` uses the exact l1
    /// norm; `penalty` weights the Toeplitz deviation of `U`.
    pub fn objective_blocks(
        &self,
        u: &DMatrix<C64>,
        x: &DMatrix<C64>,
        t: &DMatrix<C64>,
        v: &[C64],
        mu: Option<f64>,
        penalty: f64,
    ) -> f64 {
        let n = self.n() as f64;
        let e = self.residual(x, v);
        let dev = if penalty > 0.0 {
            (u - toeplitz_project(u)).norm_squared()
        } else {
            0.0
        };
        let l1 = match mu {
            Some(mu) => smoothed_l1(v, mu),
            None => v.iter().map(|z| z.norm()).sum(),
        };
        0.5 * norm_sq(&e)
            + self.lambda / (2.0 * n) * u.trace().re
            + self.lambda / 2.0 * t.trace().re
            + penalty / 2.0 * dev
            + self.gamma * l1
    }

    /// Objective of a full `(N + K)`-square `Z`.
    pub fn objective_z(&self, z: &DMatrix<C64>, v: &[C64], mu: Option<f64>, penalty: f64) -> f64 {
        let n = self.n();
        let k = self.k();
        let u = z.view((0, 0), (n, n)).into_owned();
        let x = z.view((n, 0), (k, n)).into_owned();
        let t = z.view((n, n), (k, k)).into_owned();
        self.objective_blocks(&u, &x, &t, v, mu, penalty)
    }

    /// The semidefinite-program objective at `(u, X, T, v)`.
    pub fn sdp_objective(&self, s: &SdpState) -> f64 {
        let top = hermitian_toeplitz(&s.u);
        self.objective_blocks(&top, &s.x, &s.t, &s.v, None, 0.0)
    }

    /// Smoothed, penalised surrogate at `Z = V V^H`.
    pub fn factor_objective(&self, factor: &DMatrix<C64>, v: &[C64], params: &FactorParams) -> f64 {
        self.factor_eval(factor, v, params, false).0
    }

    /// Surrogate value and gradients with respect to `V` and `v`.
    pub fn factor_gradient(
        &self,
        factor: &DMatrix<C64>,
        v: &[C64],
        params: &FactorParams,
    ) -> (f64, DMatrix<C64>, Vec<C64>) {
        let (f, g) = self.factor_eval(factor, v, params, true);
        let (gv, ge) = g.expect("gradient requested");
        (f, gv, ge)
    }

    #[allow(clippy::type_complexity)]
    fn factor_eval(
        &self,
        factor: &DMatrix<C64>,
        v: &[C64],
        params: &FactorParams,
        want_grad: bool,
    ) -> (f64, Option<(DMatrix<C64>, Vec<C64>)>) {
        let n = self.n();
        let k = self.k();
        let nf = n as f64;
        let vu = factor.rows(0, n);
        let vx = factor.rows(n, k);
        let u = vu * vu.adjoint();
        let dev = &u - toeplitz_project(&u);
        let w = self.dbar * vx;
        let phi_v = self.channel.apply(v);
        let e: Vec<C64> = (0..n)
            .map(|row| {
                let ax: C64 = (0..vu.ncols()).map(|c| vu[(row, c)].conj() * w[(row, c)]).sum();
                self.z[row] - phi_v[row] - ax
            })
            .collect();
        let value = 0.5 * norm_sq(&e)
            + self.lambda / (2.0 * nf) * vu.norm_squared()
            + self.lambda / 2.0 * vx.norm_squared()
            + params.penalty / 2.0 * dev.norm_squared()
            + self.gamma * smoothed_l1(v, params.mu);
        if !want_grad {
            return (value, None);
        }
        let r = factor.ncols();
        let mut grad = DMatrix::zeros(n + k, r);
        let mut gu = vu * C64::new(self.lambda / nf, 0.0) + &dev * vu * C64::new(2.0 * params.penalty, 0.0);
        for c in 0..r {
            for (row, er) in e.iter().enumerate().take(n) {
                gu[(row, c)] -= er.conj() * w[(row, c)];
            }
        }
        let mut scaled_u = vu.into_owned();
        for (row, &s) in e.iter().enumerate().take(n) {
            scaled_u.row_mut(row).iter_mut().for_each(|x| *x *= s);
        }
        let gx = vx * C64::new(self.lambda, 0.0) - self.dbar.adjoint() * scaled_u;
        grad.rows_mut(0, n).copy_from(&gu);
        grad.rows_mut(n, k).copy_from(&gx);
        let data = self.channel.adjoint(&e);
        let reg = smoothed_l1_grad(v, params.mu);
        let gv = data
            .iter()
            .zip(reg)
            .map(|(d, s)| -d + s * self.gamma)
            .collect();
        (value, Some((grad, gv)))
    }
}
