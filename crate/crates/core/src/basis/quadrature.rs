use std::f64::consts::PI;

use crate::error::{FeneError, Result};

use super::jacobi::gauss_jacobi;

/// Tensor quadrature on the unit disk for `int (1 - |x|^2)^gamma q(x) dx`.
///
/// Radially the rule is Gauss-Jacobi in `t = 2r^2 - 1` with weight
/// `(1 - t)^gamma`; angularly it is the equispaced trapezoid rule. The weight
/// factor is folded into `weights`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub weight_exponent: f64,
    /// Polynomials `q` of total degree up to this value are integrated exactly.
    pub exactness: usize,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn([f64; 2]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

pub fn build_quadrature(n: usize, exactness: usize, weight_exponent: f64) -> Result<QuadratureRule> {
    if n != 2 {
        return Err(FeneError::UnsupportedDimension(n));
    }
    if !(weight_exponent > -1.0) || !weight_exponent.is_finite() {
        return Err(FeneError::param(
            "quadrature.weight_exponent",
            "must be finite and > -1",
        ));
    }
    // Angular sums kill every Fourier mode below n_angular, leaving a
    // polynomial of degree exactness/2 in t for the radial rule.
    let n_angular = exactness + 1;
    let n_radial = (exactness / 2) / 2 + 1;
    let (t, wt) = gauss_jacobi(n_radial, weight_exponent, 0.0);
    let radial_factor = 2f64.powf(-weight_exponent) / 4.0;
    let dtheta = 2.0 * PI / n_angular as f64;
    let mut nodes = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    for (ti, wi) in t.iter().zip(&wt) {
        let r = ((1.0 + ti) / 2.0).sqrt();
        for k in 0..n_angular {
            let th = dtheta * k as f64;
            nodes.push([r * th.cos(), r * th.sin()]);
            weights.push(wi * radial_factor * dtheta);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        weight_exponent,
        exactness,
        n_radial,
        n_angular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::function::gamma::ln_gamma;

    /// Closed form of `int_disk (1 - r^2)^g x^a y^b dx`.
    fn monomial_oracle(a: u32, b: u32, g: f64) -> f64 {
        if a % 2 == 1 || b % 2 == 1 {
            return 0.0;
        }
        let (af, bf) = (a as f64, b as f64);
        let h = (af + bf) / 2.0;
        let angular = 2.0
            * (ln_gamma((af + 1.0) / 2.0) + ln_gamma((bf + 1.0) / 2.0) - ln_gamma(h + 1.0)).exp();
        let radial = 0.5 * (ln_gamma(h + 1.0) + ln_gamma(g + 1.0) - ln_gamma(h + g + 2.0)).exp();
        angular * radial
    }

    #[test]
    fn worked_values() {
        let rule = build_quadrature(2, 20, 8.0).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), PI / 9.0, max_relative = 1e-13);
        assert_relative_eq!(rule.integrate(|x| x[0] * x[0]), PI / 180.0, max_relative = 1e-13);
        assert_relative_eq!(rule.integrate(|x| x[0] * x[0]), 0.01745329, max_relative = 1e-6);
        assert_eq!(rule.integrate(|_| 0.0), 0.0);
    }

    #[test]
    fn positivity_and_interior_nodes() {
        for &g in &[7.0, 8.0, 0.5, 49.0] {
            let rule = build_quadrature(2, 36, g).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!(rule.nodes.iter().all(|x| x[0] * x[0] + x[1] * x[1] < 1.0));
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(build_quadrature(2, 4, -1.0).is_err());
        assert!(build_quadrature(3, 4, 1.0).is_err());
    }

    #[test]
    fn all_monomials_to_exactness() {
        let deg = 24;
        for &g in &[8.0, 7.0, 3.3] {
            let rule = build_quadrature(2, deg, g).unwrap();
            for a in 0..=deg as u32 {
                for b in 0..=(deg as u32 - a) {
                    let q = rule.integrate(|x| x[0].powi(a as i32) * x[1].powi(b as i32));
                    let exact = monomial_oracle(a, b, g);
                    let scale = monomial_oracle(a + a % 2, b + b % 2, g);
                    assert!((q - exact).abs() <= 1e-12 * scale, "a={a} b={b} g={g}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn random_polynomials_are_exact(coeffs in prop::collection::vec(-1.0f64..1.0, 15),
                                         g in 1.5f64..20.0) {
            // random polynomial of total degree <= 4
            let mut terms = Vec::new();
            let mut k = 0;
            for a in 0..=4u32 {
                for b in 0..=(4 - a) {
                    terms.push((a, b, coeffs[k]));
                    k += 1;
                }
            }
            let rule = build_quadrature(2, 4, g).unwrap();
            let q = rule.integrate(|x| terms.iter()
                .map(|&(a, b, c)| c * x[0].powi(a as i32) * x[1].powi(b as i32)).sum());
            let exact: f64 = terms.iter().map(|&(a, b, c)| c * monomial_oracle(a, b, g)).sum();
            let scale: f64 = terms.iter()
                .map(|&(a, b, c)| c.abs() * monomial_oracle(a + a % 2, b + b % 2, g)).sum();
            prop_assert!((q - exact).abs() <= 1e-12 * scale);
        }
    }
}
