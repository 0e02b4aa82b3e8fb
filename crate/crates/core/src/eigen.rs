//! Principal eigenpair of the discrete Fokker-Planck pencil.
//!
//! `B_alpha = A_alpha^{-1} N` is the discrete inverse of `L + alpha`. Its
//! dominant eigenvalue `mu` maps to the principal eigenvalue `1/mu - alpha`
//! of `(S + D) c = lambda N c`, and the dominant eigenvector is the steady
//! distribution.

use nalgebra::linalg::{Cholesky, Schur, LU};
use nalgebra::{Complex, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::OperatorMatrices;
use crate::basis::DistributionField;
use crate::error::{FeneError, Result};
use crate::model::compute_j0;
use crate::observables::{ratio_bounds, GridSpec};
use crate::problem::Problem;

/// Largest system accepted by the dense eigensolver (degree 20 at n = 2).
pub const DENSE_LIMIT: usize = 231;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 50_000,
            seed: 0,
        }
    }
}

/// Certificate for a computed principal eigenpair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub principal_lambda: f64,
    pub eigen_residual: f64,
    pub iterations: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Only filled when a dense spectrum was computed.
    pub min_real_part: Option<f64>,
    /// `[re, im]` pairs, dense path only.
    pub spectrum: Vec<[f64; 2]>,
    pub mass: f64,
}

/// Factorized `A_alpha` (and its transpose) applying `B_alpha` and its
/// adjoint in the `N` inner product.
pub struct ShiftedInverse {
    lu: LU<f64, Dyn, Dyn>,
    lu_t: LU<f64, Dyn, Dyn>,
    mass: DMatrix<f64>,
    alpha: f64,
}

impl ShiftedInverse {
    pub fn new(mats: &OperatorMatrices) -> Result<Self> {
        let lu = mats.shifted.clone().lu();
        let lu_t = mats.shifted.transpose().lu();
        if !lu.is_invertible() || !lu_t.is_invertible() {
            return Err(FeneError::SingularOperator { alpha: mats.alpha });
        }
        Ok(ShiftedInverse {
            lu,
            lu_t,
            mass: mats.mass.clone(),
            alpha: mats.alpha,
        })
    }

    /// `A_alpha^{-1} N f`.
    pub fn apply(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu
            .solve(&(&self.mass * f))
            .ok_or(FeneError::SingularOperator { alpha: self.alpha })
    }

    /// `N`-adjoint of `B_alpha`: `A_alpha^{-T} N f`.
    pub fn apply_adjoint(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu_t
            .solve(&(&self.mass * f))
            .ok_or(FeneError::SingularOperator { alpha: self.alpha })
    }

    pub fn norm_n(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.mass * v)).sqrt()
    }

    pub fn inner_n(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.mass * b))
    }
}

/// Solves `A_alpha u = N f`, the discrete `L_alpha u = f`.
pub fn solve_b_alpha(mats: &OperatorMatrices, f: &DVector<f64>) -> Result<DVector<f64>> {
    if f.len() != mats.dim() {
        return Err(FeneError::DimensionMismatch {
            expected: mats.dim(),
            got: f.len(),
        });
    }
    ShiftedInverse::new(mats)?.apply(f)
}

fn start_vector(problem: &Problem, seed: u64) -> DVector<f64> {
    let eq = problem.equilibrium().coeffs;
    let scale = 1e-3 * eq[0].abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(eq.len(), |i, _| eq[i] + scale * rng.random_range(-1.0..1.0))
}

/// `||(S + D) c - lambda N c|| / ||N c||`.
pub fn eigen_residual(mats: &OperatorMatrices, c: &DVector<f64>, lambda: f64) -> f64 {
    let nc = &mats.mass * c;
    let r = &mats.stiffness * c + &mats.drift * c - &nc * lambda;
    r.norm() / nc.norm()
}

/// Power iteration on `B_alpha` from a seeded positive start vector.
///
/// The eigenvector is sign-fixed to positive mass and scaled to `int psi = b`.
/// Ratio bounds are taken on the default 200 x 200 polar check grid.
pub fn principal_eigenpair(
    problem: &Problem,
    config: &SolverConfig,
) -> Result<(DistributionField, EigenReport)> {
    principal_eigenpair_on_grid(problem, config, &GridSpec::default())
}

pub fn principal_eigenpair_on_grid(
    problem: &Problem,
    config: &SolverConfig,
    grid: &GridSpec,
) -> Result<(DistributionField, EigenReport)> {
    let mats = &problem.mats;
    let binv = ShiftedInverse::new(mats)?;
    let alpha = mats.alpha;

    let mut c = start_vector(problem, config.seed);
    c /= binv.norm_n(&c);
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let y = binv.apply(&c)?;
        let mu = binv.inner_n(&c, &y);
        let ny = binv.norm_n(&y);
        c = y / ny;
        lambda = 1.0 / mu - alpha;
        residual = eigen_residual(mats, &c, lambda);
        if residual <= config.tol {
            break;
        }
    }
    if !(residual <= config.tol) {
        return Err(FeneError::NotConverged {
            iterations,
            residual,
        });
    }

    if c[0] < 0.0 {
        c = -c;
    }
    let mut field = DistributionField::new(problem.basis.clone(), c)?;
    let scale = problem.params.b / field.mass();
    field = field.scaled(scale);
    let (min_ratio, max_ratio) = ratio_bounds(&field, grid);
    let report = EigenReport {
        principal_lambda: lambda,
        eigen_residual: residual,
        iterations,
        min_ratio,
        max_ratio,
        min_real_part: None,
        spectrum: Vec::new(),
        mass: field.mass(),
    };
    Ok((field, report))
}

/// Direct kernel of `S + D` with the constant-test row replaced by the mass
/// constraint; an iteration-free cross-check of the power method.
pub fn bordered_kernel(problem: &Problem) -> Result<DistributionField> {
    let mut op = problem.mats.operator();
    let n = op.nrows();
    let mut rhs = DVector::zeros(n);
    for j in 0..n {
        op[(0, j)] = 0.0;
    }
    op[(0, 0)] = problem.basis.mass_diagonal(0);
    rhs[0] = problem.params.b;
    let c = op
        .lu()
        .solve(&rhs)
        .ok_or(FeneError::SingularOperator { alpha: 0.0 })?;
    DistributionField::new(problem.basis.clone(), c)
}

/// Eigenvalues of the pencil `(S + D) c = lambda N c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<f64>>,
    pub alpha: f64,
}

impl Spectrum {
    pub fn min_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue of smallest modulus.
    pub fn principal(&self) -> Complex<f64> {
        *self
            .eigenvalues
            .iter()
            .min_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .expect("empty spectrum")
    }

    /// Distance from the principal eigenvalue to the nearest other one.
    pub fn principal_gap(&self) -> f64 {
        let p = self.principal();
        let mut skipped = false;
        let mut gap = f64::INFINITY;
        for z in &self.eigenvalues {
            if !skipped && *z == p {
                skipped = true;
                continue;
            }
            gap = gap.min((z - p).norm());
        }
        gap
    }

    /// Spectrum of `B_alpha` via the map `lambda -> 1 / (lambda + alpha)`,
    /// sorted by decreasing modulus.
    pub fn b_alpha_eigenvalues(&self) -> Vec<Complex<f64>> {
        let one = Complex::new(1.0, 0.0);
        let mut v: Vec<Complex<f64>> = self
            .eigenvalues
            .iter()
            .map(|z| one / (z + self.alpha))
            .collect();
        v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        v
    }

    pub fn as_pairs(&self) -> Vec<[f64; 2]> {
        self.eigenvalues.iter().map(|z| [z.re, z.im]).collect()
    }
}

fn eigenvalues_of(m: DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let schur = Schur::try_new(m, 1e-15, 100_000)
        .ok_or_else(|| FeneError::EigenFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

fn sort_complex(v: &mut [Complex<f64>]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Dense generalized eigensolve via the Cholesky factor of `N`.
pub fn full_spectrum(mats: &OperatorMatrices) -> Result<Spectrum> {
    let dim = mats.dim();
    if dim > DENSE_LIMIT {
        return Err(FeneError::DimensionTooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    let chol = Cholesky::new(mats.mass.clone())
        .ok_or_else(|| FeneError::EigenFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| FeneError::EigenFailure("singular Cholesky factor".into()))?;
    let c = &linv * mats.operator() * linv.transpose();
    let mut eigenvalues = eigenvalues_of(c)?;
    sort_complex(&mut eigenvalues);
    Ok(Spectrum {
        eigenvalues,
        alpha: mats.alpha,
    })
}

/// Eigenvalues of `A_alpha^{-1} N` computed directly, sorted by decreasing
/// modulus.
pub fn b_alpha_spectrum(mats: &OperatorMatrices) -> Result<Vec<Complex<f64>>> {
    let dim = mats.dim();
    if dim > DENSE_LIMIT {
        return Err(FeneError::DimensionTooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    let b = mats
        .shifted
        .clone()
        .lu()
        .solve(&mats.mass)
        .ok_or(FeneError::SingularOperator { alpha: mats.alpha })?;
    let mut v = eigenvalues_of(b)?;
    v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    Ok(v)
}

fn apply_power(binv: &ShiftedInverse, v: &DVector<f64>, m: usize, adjoint: bool) -> Result<DVector<f64>> {
    let mut w = v.clone();
    for _ in 0..m {
        w = if adjoint {
            binv.apply_adjoint(&w)?
        } else {
            binv.apply(&w)?
        };
    }
    Ok(w)
}

/// `||B_alpha^m||^{1/m}` in `L(L^2_M)`, the Gelfand proxy for the spectral
/// radius. The operator norm is found by power iteration on
/// `(B^m)^* B^m` from a seeded random start.
pub fn spectral_radius_estimate(mats: &OperatorMatrices, m: usize, seed: u64) -> Result<f64> {
    if m == 0 {
        return Err(FeneError::param("m", "must be >= 1"));
    }
    let binv = ShiftedInverse::new(mats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(mats.dim(), |_, _| rng.random_range(-1.0..1.0));
    v /= binv.norm_n(&v);
    let mut sigma = 0.0;
    for _ in 0..10_000 {
        let w = apply_power(&binv, &v, m, false)?;
        let s = binv.norm_n(&w);
        let z = apply_power(&binv, &w, m, true)?;
        let nz = binv.norm_n(&z);
        v = z / nz;
        if (s - sigma).abs() <= 1e-15 * s {
            sigma = s;
            break;
        }
        sigma = s;
    }
    // one more forward application with the converged right singular vector
    let w = apply_power(&binv, &v, m, false)?;
    let s = binv.norm_n(&w).max(sigma);
    Ok(s.powf(1.0 / m as f64))
}

/// Dominant eigenvalue of `B_alpha^power` by power iteration with an
/// `N`-Rayleigh quotient.
pub fn principal_eigenvalue_of_power(
    mats: &OperatorMatrices,
    power: usize,
    config: &SolverConfig,
) -> Result<f64> {
    let binv = ShiftedInverse::new(mats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut c = DVector::from_fn(mats.dim(), |i, _| {
        if i == 0 {
            1.0
        } else {
            1e-3 * rng.random_range(-1.0..1.0)
        }
    });
    c /= binv.norm_n(&c);
    let mut mu = 0.0;
    for _ in 0..config.max_iter {
        let y = apply_power(&binv, &c, power, false)?;
        let next = binv.inner_n(&c, &y);
        c = &y / binv.norm_n(&y);
        if (next - mu).abs() <= config.tol.min(1e-14) * next.abs() {
            mu = next;
            return Ok(mu);
        }
        mu = next;
    }
    Err(FeneError::NotConverged {
        iterations: config.max_iter,
        residual: f64::NAN,
    })
}

/// The spectral-radius inequality chain `Spr(B) >= mu_0^{1/(j0+3)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KreinRutmanCheck {
    pub j0: u32,
    pub power: usize,
    /// Dominant eigenvalue of `B_alpha^{j0+3}`.
    pub mu0: f64,
    pub lower_bound: f64,
    pub spr_estimate: f64,
}

impl KreinRutmanCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.spr_estimate >= self.lower_bound - slack
    }
}

pub fn krein_rutman_check(problem: &Problem, m: usize, config: &SolverConfig) -> Result<KreinRutmanCheck> {
    let j0 = compute_j0(problem.params.delta)?;
    let power = j0 as usize + 3;
    let mu0 = principal_eigenvalue_of_power(&problem.mats, power, config)?;
    let spr_estimate = spectral_radius_estimate(&problem.mats, m, config.seed)?;
    Ok(KreinRutmanCheck {
        j0,
        power,
        mu0,
        lower_bound: mu0.powf(1.0 / power as f64),
        spr_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DriftField, FeneParams};

    fn shear(wi: f64) -> DriftField {
        DriftField::from_row_major(2, &[0.0, wi, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let p = Problem::new(FeneParams::default(), shear(1.0), 8).unwrap();
        let u = solve_b_alpha(&p.mats, &DVector::zeros(p.basis.len())).unwrap();
        assert!(u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn equilibrium_is_scaled_by_inverse_alpha() {
        let p = Problem::new(FeneParams::default(), DriftField::none(2), 10).unwrap();
        let eq = p.equilibrium().coeffs;
        let u = solve_b_alpha(&p.mats, &eq).unwrap();
        let expect = &eq / p.mats.alpha;
        assert!((&u - &expect).norm() <= 1e-13 * expect.norm());
    }

    #[test]
    fn weak_maximum_principle_spot_check() {
        for drift in [DriftField::none(2), shear(1.0)] {
            let p = Problem::new(FeneParams::default(), drift, 12).unwrap();
            let f = DistributionField::project(p.basis.clone(), 30, |x| 1.0 + 0.5 * x[0]).unwrap();
            let u = solve_b_alpha(&p.mats, &f.coeffs).unwrap();
            let uf = DistributionField::new(p.basis.clone(), u).unwrap();
            let rule = crate::basis::build_quadrature(2, 28, 8.0).unwrap();
            let vals = uf.evaluate(&rule.nodes);
            assert!(vals.iter().all(|v| v.psi >= -1e-8));
        }
    }

    #[test]
    fn equilibrium_eigenpair_for_zero_drift() {
        let p = Problem::new(FeneParams::default(), DriftField::none(2), 12).unwrap();
        let (field, rep) = principal_eigenpair(&p, &SolverConfig::default()).unwrap();
        assert!(rep.principal_lambda.abs() <= 1e-10 * p.mats.alpha);
        assert!(field.relative_l2m_distance(&p.equilibrium()) <= 1e-10);
        assert!((rep.max_ratio / rep.min_ratio - 1.0).abs() <= 1e-10);
        assert!((rep.mass - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn power_iteration_matches_bordered_kernel() {
        let p = Problem::new(FeneParams::default(), shear(1.0), 12).unwrap();
        let (field, rep) = principal_eigenpair(&p, &SolverConfig::default()).unwrap();
        assert!(rep.principal_lambda.abs() <= 1e-8 * p.mats.alpha);
        assert!(rep.min_ratio > 0.0);
        let direct = bordered_kernel(&p).unwrap();
        assert!(field.relative_l2m_distance(&direct) <= 1e-9);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let p = Problem::new(FeneParams::default(), shear(1.0), 8).unwrap();
        let cfg = SolverConfig {
            tol: 1e-14,
            max_iter: 3,
            seed: 1,
        };
        assert!(matches!(
            principal_eigenpair(&p, &cfg),
            Err(FeneError::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn same_seed_is_bitwise_reproducible() {
        let p = Problem::new(FeneParams::default(), shear(1.0), 10).unwrap();
        let cfg = SolverConfig { seed: 9, ..Default::default() };
        let (a, ra) = principal_eigenpair(&p, &cfg).unwrap();
        let (b, rb) = principal_eigenpair(&p, &cfg).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a.coeffs, b.coeffs);
    }

    #[test]
    fn zero_drift_spectrum_is_real_and_nonnegative() {
        let p = Problem::new(FeneParams::default(), DriftField::none(2), 10).unwrap();
        let s = full_spectrum(&p.mats).unwrap();
        let scale = p.mats.stiffness.norm() / p.mats.mass.norm();
        assert!(s.eigenvalues.iter().all(|z| z.im.abs() <= 1e-9 * scale));
        assert!(s.min_real_part() >= -1e-10 * scale);
        let zeros = s.eigenvalues.iter().filter(|z| z.norm() <= 1e-9 * scale).count();
        assert_eq!(zeros, 1);
    }

    #[test]
    fn spectral_mapping() {
        let p = Problem::new(FeneParams::default(), shear(1.0), 8).unwrap();
        let s = full_spectrum(&p.mats).unwrap();
        let mapped = s.b_alpha_eigenvalues();
        let direct = b_alpha_spectrum(&p.mats).unwrap();
        assert_eq!(mapped.len(), direct.len());
        for z in &direct {
            let best = mapped.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-10 / p.mats.alpha, "{z} {best}");
        }
    }

    #[test]
    fn dense_refusal() {
        let p = Problem::new(FeneParams::default(), DriftField::none(2), 21).unwrap();
        assert!(matches!(
            full_spectrum(&p.mats),
            Err(FeneError::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn spectral_radius_for_zero_drift() {
        let p = Problem::new(FeneParams::default(), DriftField::none(2), 10).unwrap();
        let inv = 1.0 / p.mats.alpha;
        let mut prev = f64::INFINITY;
        for m in [4, 8, 16] {
            let s = spectral_radius_estimate(&p.mats, m, 3).unwrap();
            assert!(s <= prev * (1.0 + 1e-12));
            assert!(s >= inv * (1.0 - 1e-12));
            prev = s;
        }
        assert!((prev - inv).abs() <= 1e-10 * inv);
    }
}
