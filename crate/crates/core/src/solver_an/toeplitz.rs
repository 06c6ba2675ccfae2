//! Toeplitz structure helpers.

use nalgebra::DMatrix;

use crate::linalg::C64;

/// Orthogonal projection onto Toeplitz matrices: every diagonal is replaced
/// by its mean. Hermitian inputs give Hermitian outputs.
pub fn toeplitz_project(u: &DMatrix<C64>) -> DMatrix<C64> {
    let n = u.nrows();
    assert_eq!(n, u.ncols(), "Toeplitz projection needs a square matrix");
    let (lower, upper) = diagonal_means(u);
    DMatrix::from_fn(n, n, |r, c| if r >= c { lower[r - c] } else { upper[c - r] })
}

/// Means of the diagonals below (`lower[d]`, entries `(j + d, j)`) and
/// above (`upper[d]`, entries `(j, j + d)`) the main diagonal; index 0 is
/// the main diagonal in both.
pub fn diagonal_means(u: &DMatrix<C64>) -> (Vec<C64>, Vec<C64>) {
    let n = u.nrows();
    let mut lower = vec![C64::new(0.0, 0.0); n];
    let mut upper = vec![C64::new(0.0, 0.0); n];
    for d in 0..n {
        let len = (n - d) as f64;
        let mut lo = C64::new(0.0, 0.0);
        let mut up = C64::new(0.0, 0.0);
        for j in 0..n - d {
            lo += u[(j + d, j)];
            up += u[(j, j + d)];
        }
        lower[d] = lo / len;
        upper[d] = up / len;
    }
    (lower, upper)
}

/// Hermitian Toeplitz matrix with first column `u` (`u[0]` taken real).
pub fn hermitian_toeplitz(u: &[C64]) -> DMatrix<C64> {
    let n = u.len();
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(u[0].re, 0.0)
        } else if r > c {
            u[r - c]
        } else {
            u[c - r].conj()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, cols: usize, data: &[f64]) -> DMatrix<C64> {
        DMatrix::from_row_slice(rows, cols, &data.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn hand_case() {
        let p = toeplitz_project(&cm(2, 2, &[1.0, 2.0, 4.0, 3.0]));
        assert_eq!(p, cm(2, 2, &[2.0, 2.0, 4.0, 2.0]));
    }

    #[test]
    fn toeplitz_is_fixed() {
        let u: Vec<C64> = (0..6).map(|i| C64::new(i as f64, (i * i) as f64 - 2.0)).collect();
        let t = hermitian_toeplitz(&u);
        assert!((toeplitz_project(&t) - &t).camax() < 1e-14);
    }

    #[test]
    fn idempotent() {
        let a = DMatrix::from_fn(8, 8, |r, c| C64::new(((r * 3 + c) as f64).sin(), ((r + 5 * c) as f64).cos()));
        let p = toeplitz_project(&a);
        assert!((toeplitz_project(&p) - &p).camax() < 1e-12);
    }
}
