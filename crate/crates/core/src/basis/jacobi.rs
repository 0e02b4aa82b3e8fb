//! Jacobi polynomials `P_j^{(a,b)}` with real parameters and Gauss-Jacobi rules.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Values `P_0(t), ..., P_{nmax}(t)` by the three-term recurrence.
pub fn jacobi_values(nmax: usize, a: f64, b: f64, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if nmax == 0 {
        return;
    }
    out.push(0.5 * (a - b) + 0.5 * (a + b + 2.0) * t);
    for n in 2..=nmax {
        let nf = n as f64;
        let s = 2.0 * nf + a + b;
        let c0 = 2.0 * nf * (nf + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * t + a * a - b * b);
        let c2 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s;
        let next = (c1 * out[n - 1] - c2 * out[n - 2]) / c0;
        out.push(next);
    }
}

/// Single value and derivative of `P_n^{(a,b)}` at `t`.
pub fn jacobi_with_derivative(n: usize, a: f64, b: f64, t: f64) -> (f64, f64) {
    let mut buf = Vec::with_capacity(n + 1);
    jacobi_values(n, a, b, t, &mut buf);
    let p = buf[n];
    if n == 0 {
        return (p, 0.0);
    }
    jacobi_values(n - 1, a + 1.0, b + 1.0, t, &mut buf);
    let dp = 0.5 * (n as f64 + a + b + 1.0) * buf[n - 1];
    (p, dp)
}

/// `int_{-1}^{1} (1-t)^a (1+t)^b P_j(t)^2 dt`.
pub fn jacobi_norm_sq(j: usize, a: f64, b: f64) -> f64 {
    let jf = j as f64;
    let ln = (a + b + 1.0) * std::f64::consts::LN_2 - (2.0 * jf + a + b + 1.0).ln()
        + ln_gamma(jf + a + 1.0)
        + ln_gamma(jf + b + 1.0)
        - ln_gamma(jf + a + b + 1.0)
        - ln_gamma(jf + 1.0);
    ln.exp()
}

/// Gauss-Jacobi rule with `npts` nodes on `[-1, 1]` for the weight
/// `(1-t)^a (1+t)^b`, exact for polynomials of degree `2 npts - 1`.
///
/// Nodes come from the Golub-Welsch eigenproblem, polished by Newton steps on
/// `P_npts`; weights use the closed form in terms of `P'_npts`.
pub fn gauss_jacobi(npts: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1);
    assert!(a > -1.0 && b > -1.0);
    let mut jm = DMatrix::<f64>::zeros(npts, npts);
    for k in 0..npts {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jm[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < npts {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let nf = npts as f64;
    let ln_c = ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0)
        + (a + b + 1.0) * std::f64::consts::LN_2;
    let c = ln_c.exp();

    let mut weights = Vec::with_capacity(npts);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = jacobi_with_derivative(npts, a, b, *x);
            let step = p / dp;
            *x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = jacobi_with_derivative(npts, a, b, *x);
        weights.push(c / ((1.0 - *x * *x) * dp * dp));
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::beta::beta;

    #[test]
    fn low_order_closed_forms() {
        let mut v = Vec::new();
        let (a, b, t) = (2.5, 0.5, 0.3);
        jacobi_values(2, a, b, t, &mut v);
        assert_eq!(v[0], 1.0);
        assert_relative_eq!(v[1], 0.5 * (a - b) + 0.5 * (a + b + 2.0) * t);
        // Legendre is the a = b = 0 special case
        jacobi_values(3, 0.0, 0.0, t, &mut v);
        assert_relative_eq!(v[2], 0.5 * (3.0 * t * t - 1.0), max_relative = 1e-14);
        assert_relative_eq!(v[3], 0.5 * (5.0 * t.powi(3) - 3.0 * t), max_relative = 1e-14);
    }

    #[test]
    fn value_at_one_is_binomial() {
        let mut v = Vec::new();
        jacobi_values(12, 8.0, 3.0, 1.0, &mut v);
        // C(20, 12)
        assert_relative_eq!(v[12], 125970.0, max_relative = 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (a, b) = (8.0, 2.0);
        for &t in &[-0.7, 0.1, 0.85] {
            let (_, dp) = jacobi_with_derivative(7, a, b, t);
            let h = 1e-6;
            let fd = (jacobi_with_derivative(7, a, b, t + h).0
                - jacobi_with_derivative(7, a, b, t - h).0)
                / (2.0 * h);
            assert_relative_eq!(dp, fd, max_relative = 1e-7);
        }
    }

    #[test]
    fn rule_integrates_monomials() {
        for &(a, b) in &[(8.0, 0.0), (7.0, 0.0), (0.3, 1.7), (50.0, 0.0)] {
            let npts = 9;
            let (x, w) = gauss_jacobi(npts, a, b);
            assert!(w.iter().all(|&wi| wi > 0.0));
            assert!(x.iter().all(|&xi| xi > -1.0 && xi < 1.0));
            for k in 0..(2 * npts) {
                // int (1-t)^a (1+t)^b ((1+t)/2)^k dt = 2^{a+b+1} B(a+1, b+k+1)
                let exact = 2f64.powf(a + b + 1.0) * beta(a + 1.0, b + k as f64 + 1.0);
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * ((1.0 + xi) / 2.0).powi(k as i32))
                    .sum();
                assert_relative_eq!(q, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn norm_matches_quadrature() {
        let (a, b) = (8.0, 3.0);
        let (x, w) = gauss_jacobi(12, a, b);
        let mut v = Vec::new();
        for j in 0..8 {
            let q: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, wi)| {
                    jacobi_values(j, a, b, xi, &mut v);
                    wi * v[j] * v[j]
                })
                .sum();
            assert_relative_eq!(q, jacobi_norm_sq(j, a, b), max_relative = 1e-12);
        }
    }
}
