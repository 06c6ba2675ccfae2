//! Nonlinear conjugate gradient with Armijo backtracking on the factored
//! surrogate.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::problem::{AnProblem, FactorState};
use crate::error::{Error, Result};
use crate::linalg::{dot_re, norm_sq, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    HestenesStiefel,
    PolakRibiere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CgOptions {
    pub max_iter: usize,
    pub beta_rule: BetaRule,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            beta_rule: BetaRule::HestenesStiefel,
            armijo: 1e-4,
            max_halvings: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

impl CgStatus {
    pub fn name(self) -> &'static str {
        match self {
            CgStatus::Converged => "converged",
            CgStatus::MaxIterations => "max_iter",
            CgStatus::LineSearchFailed => "line_search_failed",
        }
    }
}

/// Entry 0 describes the starting point (step 0).
#[derive(Clone, Debug, PartialEq)]
pub struct CgTrace {
    pub objective: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub step: Vec<f64>,
    pub status: CgStatus,
}

impl CgTrace {
    pub fn iterations(&self) -> usize {
        self.objective.len() - 1
    }
}

#[derive(Clone)]
struct Point {
    factor: DMatrix<C64>,
    errors: Vec<C64>,
}

impl Point {
    fn dot_re(&self, other: &Point) -> f64 {
        dot_re(self.factor.as_slice(), other.factor.as_slice()) + dot_re(&self.errors, &other.errors)
    }

    fn norm_sq(&self) -> f64 {
        self.factor.norm_squared() + norm_sq(&self.errors)
    }

    fn axpy(&self, a: f64, d: &Point) -> Point {
        Point {
            factor: &self.factor + &d.factor * C64::new(a, 0.0),
            errors: self.errors.iter().zip(&d.errors).map(|(x, y)| x + y * a).collect(),
        }
    }

    fn scale(&self, a: f64) -> Point {
        Point {
            factor: &self.factor * C64::new(a, 0.0),
            errors: self.errors.iter().map(|x| x * a).collect(),
        }
    }

    fn sub(&self, other: &Point) -> Point {
        self.axpy(-1.0, other)
    }
}

/// Minimises the surrogate from `init`, stopping when the joint gradient
/// norm drops to `init.params.grad_tol` or after `opts.max_iter` steps.
pub fn cg_solve(problem: &AnProblem, init: FactorState, opts: &CgOptions) -> Result<(FactorState, CgTrace)> {
    problem.validate()?;
    let params = init.params;
    if init.factor.nrows() != problem.n() + problem.k() || init.errors.len() != problem.m() {
        return Err(Error::Dimension("initial factor does not match the problem".into()));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let eval = |p: &Point| {
        let (f, gv, ge) = problem.factor_gradient(&p.factor, &p.errors, &params);
        (f, Point { factor: gv, errors: ge })
    };
    let value = |p: &Point| problem.factor_objective(&p.factor, &p.errors, &params);

    let mut x = Point {
        factor: init.factor,
        errors: init.errors,
    };
    let (mut f, mut g) = eval(&x);
    let mut gnorm = g.norm_sq().sqrt();
    let mut trace = CgTrace {
        objective: vec![f],
        grad_norm: vec![gnorm],
        step: vec![0.0],
        status: CgStatus::MaxIterations,
    };
    let mut dir: Option<Point> = None;
    let mut prev: Option<Point> = None;
    let mut last_step = 0.5;

    for _ in 0..opts.max_iter {
        if !f.is_finite() {
            return Err(Error::Divergence(format!("surrogate objective became {f}")));
        }
        if gnorm <= params.grad_tol {
            trace.status = CgStatus::Converged;
            break;
        }
        let steepest = g.scale(-1.0);
        let mut d = match (&dir, &prev) {
            (Some(d_prev), Some(g_prev)) => {
                let y = g.sub(g_prev);
                let omega = match opts.beta_rule {
                    BetaRule::HestenesStiefel => g.dot_re(&y) / d_prev.dot_re(&y),
                    BetaRule::PolakRibiere => g.dot_re(&y) / g_prev.norm_sq(),
                };
                if omega.is_finite() && omega > 0.0 {
                    steepest.axpy(omega, d_prev)
                } else {
                    steepest.clone()
                }
            }
            _ => steepest.clone(),
        };
        let mut slope = g.dot_re(&d);
        if !(slope < 0.0) {
            d = steepest;
            slope = -gnorm * gnorm;
        }
        let mut step = 2.0 * last_step;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand = x.axpy(step, &d);
            let fc = value(&cand);
            if fc <= f + opts.armijo * step * slope {
                accepted = Some(cand);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            trace.status = CgStatus::LineSearchFailed;
            break;
        };
        last_step = step;
        x = next;
        let (fn_, gn_) = eval(&x);
        prev = Some(std::mem::replace(&mut g, gn_));
        dir = Some(d);
        f = fn_;
        gnorm = g.norm_sq().sqrt();
        trace.objective.push(f);
        trace.grad_norm.push(gnorm);
        trace.step.push(step);
    }
    if trace.status == CgStatus::MaxIterations && gnorm <= params.grad_tol {
        trace.status = CgStatus::Converged;
    }
    Ok((
        FactorState {
            factor: x.factor,
            errors: x.errors,
            params,
        },
        trace,
    ))
}
