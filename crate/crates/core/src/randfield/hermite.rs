//! Gauss–Hermite quadrature and Hermite expansions of functions of a
//! standard normal variable.

use std::f64::consts::PI;

/// Nodes and weights for `∫ f(x) e^{-x²} dx ≈ Σ w_i f(x_i)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    const EPS: f64 = 3e-14;
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `E f(𝔤)` for `𝔤 ~ N(0,1)` by `points`-point Gauss–Hermite quadrature.
pub fn normal_expectation(points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite(points);
    let s2 = std::f64::consts::SQRT_2;
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(s2 * xi)).sum::<f64>() / PI.sqrt()
}

/// Probabilists' Hermite coefficients `c_k = E[Φ(𝔤) He_k(𝔤)]`, `k = 0..=order`,
/// so that `Φ = Σ c_k He_k / k!` and `E[Φ(𝔤₀)Φ(𝔤_r)] = Σ c_k² ρ^k / k!`.
pub fn hermite_coefficients(points: usize, order: usize, phi: impl Fn(f64) -> f64) -> Vec<f64> {
    let (x, w) = gauss_hermite(points);
    let s2 = std::f64::consts::SQRT_2;
    let mut c = vec![0.0; order + 1];
    for (&xi, &wi) in x.iter().zip(&w) {
        let s = s2 * xi;
        let fv = phi(s) * wi / PI.sqrt();
        let (mut he_prev, mut he) = (0.0, 1.0);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck += fv * he;
            let next = s * he - k as f64 * he_prev;
            he_prev = he;
            he = next;
        }
    }
    c
}

/// `Σ_{k ≤ K} c_k² ρ^k / k!` for coefficients from [`hermite_coefficients`].
pub fn hermite_covariance(coeffs: &[f64], rho: f64) -> f64 {
    let mut fact = 1.0;
    let mut rk = 1.0;
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
            rk *= rho;
        }
        acc += c * c * rk / fact;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_moments() {
        let (x, w) = gauss_hermite(64);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-12);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12);
        assert!((normal_expectation(64, |s| s.powi(4)) - 3.0).abs() < 1e-11);
        assert!(normal_expectation(64, |s| s.tanh()).abs() < 1e-15);
    }

    #[test]
    fn hermite_series_of_linear_function() {
        let c = hermite_coefficients(64, 4, |s| 2.0 * s);
        assert!((c[1] - 2.0).abs() < 1e-12);
        assert!(c[0].abs() < 1e-12 && c[2].abs() < 1e-12 && c[3].abs() < 1e-12);
        assert!((hermite_covariance(&c, 0.3) - 4.0 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn hermite_series_recovers_variance() {
        // At ρ = 1 the series is E Φ(𝔤)².
        let c = hermite_coefficients(64, 40, |s| s.tanh());
        let var = normal_expectation(64, |s| s.tanh().powi(2));
        assert!((hermite_covariance(&c, 1.0) - var).abs() < 1e-4);
    }
}
