//! Log-cosh smoothing of the complex l1 norm.

use crate::linalg::C64;

/// `log cosh(x)` without overflow.
#[inline]
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p()
}

/// `mu * sum_m log cosh(|v_m| / mu)`.
pub fn smoothed_l1(v: &[C64], mu: f64) -> f64 {
    v.iter().map(|z| mu * log_cosh(z.norm() / mu)).sum()
}

/// Gradient `tanh(|v_m| / mu) v_m / |v_m|`, zero where `v_m = 0`.
pub fn smoothed_l1_grad(v: &[C64], mu: f64) -> Vec<C64> {
    v.iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                z * ((a / mu).tanh() / a)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(smoothed_l1(&[C64::new(0.0, 0.0)], 0.01), 0.0);
        let v = smoothed_l1(&[C64::new(1.0, 0.0)], 0.01);
        assert!((v - (1.0 - 0.01 * std::f64::consts::LN_2)).abs() < 1e-9);
        assert!(smoothed_l1(&[C64::new(1e300, 0.0)], 1e-3).is_finite());
    }

    #[test]
    fn below_l1_within_gap() {
        let v: Vec<C64> = (0..20).map(|i| C64::new((i as f64 * 0.7).sin(), (i as f64).cos() * 0.01)).collect();
        let mu = 0.05;
        let l1: f64 = v.iter().map(|z| z.norm()).sum();
        let s = smoothed_l1(&v, mu);
        assert!(s <= l1);
        assert!(l1 - s <= 20.0 * mu * std::f64::consts::LN_2 + 1e-12);
    }

    #[test]
    fn gradient_zero_at_origin() {
        let g = smoothed_l1_grad(&[C64::new(0.0, 0.0), C64::new(3.0, 4.0)], 0.1);
        assert_eq!(g[0], C64::new(0.0, 0.0));
        assert!((g[1] - C64::new(0.6, 0.8) * (50f64).tanh()).norm() < 1e-15);
    }
}
