//! Small dense complex linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[inline]
pub fn cis(phase: f64) -> C64 {
    let (s, c) = phase.sin_cos();
    C64::new(c, s)
}

pub fn norm_sq(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    norm_sq(x).sqrt()
}

/// Real part of `<a, b> = sum conj(a_i) b_i`.
pub fn dot_re(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Complex soft-thresholding: proximal map of `t * |.|`.
#[inline]
pub fn soft_threshold(z: C64, t: f64) -> C64 {
    let m = z.norm();
    if m <= t {
        ZERO
    } else {
        z * ((m - t) / m)
    }
}

pub fn mat_vec(a: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut out = vec![ZERO; a.nrows()];
    for (c, &xc) in x.iter().enumerate() {
        if xc == ZERO {
            continue;
        }
        for (o, &aij) in out.iter_mut().zip(a.column(c).iter()) {
            *o += aij * xc;
        }
    }
    out
}

/// `A^H y`.
pub fn mat_adj_vec(a: &DMatrix<C64>, y: &[C64]) -> Vec<C64> {
    assert_eq!(a.nrows(), y.len());
    a.column_iter()
        .map(|col| col.iter().zip(y).map(|(aij, yi)| aij.conj() * yi).sum())
        .collect()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Projection onto the positive semidefinite cone (Frobenius metric).
pub fn project_psd(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let mut out = DMatrix::zeros(n, n);
    for (i, &lam) in values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let col = vectors.column(i);
        for c in 0..n {
            let s = col[c].conj() * lam;
            for r in 0..n {
                out[(r, c)] += col[r] * s;
            }
        }
    }
    out
}

/// Least-squares solution of `A x = b` via the SVD (handles rank deficiency).
pub fn least_squares(a: &DMatrix<C64>, b: &[C64]) -> Vec<C64> {
    let svd = a.clone().svd(true, true);
    let rhs = DVector::from_column_slice(b);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-12 * (a.nrows().max(a.ncols()) as f64);
    match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().cloned().collect(),
        Err(_) => vec![ZERO; a.ncols()],
    }
}

/// Largest eigenvalue of `A^H A` by power iteration, given matvec closures.
pub fn power_iteration<F, G>(dim: usize, apply: F, adjoint: G, iters: usize) -> f64
where
    F: Fn(&[C64]) -> Vec<C64>,
    G: Fn(&[C64]) -> Vec<C64>,
{
    if dim == 0 {
        return 0.0;
    }
    // deterministic, not aligned with any coordinate
    let mut x: Vec<C64> = (0..dim)
        .map(|i| cis(0.7 * i as f64 + 0.3 * (i * i) as f64) * (1.0 + (i % 3) as f64))
        .collect();
    let mut est = 0.0;
    for _ in 0..iters {
        let nx = norm(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = adjoint(&apply(&x));
        let new_est = dot_re(&x, &y);
        x = y;
        if (new_est - est).abs() <= 1e-10 * new_est.abs() {
            est = new_est;
            break;
        }
        est = new_est;
    }
    est
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Wraps a value into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Distance on the unit circle `[0, 1)`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_shrinks_modulus() {
        let z = C64::new(3.0, 4.0);
        let s = soft_threshold(z, 1.0);
        assert!((s.norm() - 4.0).abs() < 1e-12);
        assert!((s.arg() - z.arg()).abs() < 1e-12);
        assert_eq!(soft_threshold(z, 5.0), ZERO);
    }

    #[test]
    fn psd_projection_clips_negative_spectrum() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(0.0, -2.0), C64::new(1.0, 0.0)],
        );
        // eigenvalues 3 and -1
        let p = project_psd(&a);
        let (vals, _) = hermitian_eigen(&p);
        assert!(vals[0].abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let x = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(0.95, 0.05) - 0.1).abs() < 1e-12);
        assert!((circular_distance(0.2, 0.5) - 0.3).abs() < 1e-12);
    }
}
