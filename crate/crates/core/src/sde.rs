//! Stochastic dumbbell oracle.
//!
//! The steady equation rewrites as `Delta psi = div((k + grad M / M) psi)`,
//! the stationary Fokker-Planck equation of
//!
//! ```text
//! dX = [k(X) - 2 delta X / (1 - |X|^2)] dt + sqrt(2) dW
//! ```
//!
//! This correspondence is our own derivation, not part of the analytic
//! theory. Paths are advanced by Euler-Maruyama; a proposal landing at
//! `|X| >= 1 - 1e-12` is retried with a halved step, and after
//! `max_halvings` failures the step is rejected and the walker stays put.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::DistributionField;
use crate::error::{FeneError, Result};
use crate::model::{DriftField, FeneParams};

const EDGE: f64 = 1.0 - 1e-12;
/// Largest tolerated fraction of outright rejected steps.
pub const MAX_REJECTION_RATE: f64 = 0.01;
/// Minimum number of batches for batch-means error bars.
pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdeConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub max_halvings: u32,
    /// Positions are stored every `record_stride` retained steps for
    /// histograms; moments use every step.
    pub record_stride: usize,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            dt: 1e-4,
            n_paths: 32,
            n_steps: 1_000_000,
            burn_in: 20_000,
            seed: 0,
            max_halvings: 8,
            record_stride: 100,
        }
    }
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FeneError::param("sde.dt", "must be finite and > 0"));
        }
        if self.n_paths < 1 {
            return Err(FeneError::param("sde.n_paths", "must be >= 1"));
        }
        if self.burn_in >= self.n_steps {
            return Err(FeneError::param("sde.burn_in", "must be smaller than sde.n_steps"));
        }
        if self.record_stride < 1 {
            return Err(FeneError::param("sde.record_stride", "must be >= 1"));
        }
        Ok(())
    }

    fn batches_per_path(&self) -> usize {
        MIN_BATCHES.div_ceil(self.n_paths).max(1)
    }

    fn retained(&self) -> usize {
        self.n_steps - self.burn_in
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchSums {
    count: u64,
    x: [f64; 3],
    r2: f64,
    r4: f64,
    // x_i x_j / (1 - r^2), row-major 3 x 3
    force: [f64; 9],
}

#[derive(Debug, Clone)]
struct PathResult {
    batches: Vec<BatchSums>,
    records: Vec<f64>,
    halvings: u64,
    rejected: u64,
    max_norm: f64,
}

/// Time-averaged statistics of an ensemble of independent paths.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub dim: usize,
    pub delta: f64,
    pub dt: f64,
    batches: Vec<BatchSums>,
    /// Recorded positions per path, flattened with stride `dim`.
    records: Vec<Vec<f64>>,
    batches_per_path: usize,
    pub total_steps: u64,
    pub halvings: u64,
    pub rejected: u64,
    /// Largest `|X|` over retained times.
    pub max_norm: f64,
}

/// Runs the stochastic dumbbell model to stationarity and collects
/// post-burn-in time averages.
pub fn simulate_stationary(params: &FeneParams, drift: &DriftField, config: &SdeConfig) -> Result<Ensemble> {
    config.validate()?;
    params.validate()?;
    let dim = params.n;
    if drift.dim() != dim {
        return Err(FeneError::DimensionMismatch {
            expected: dim,
            got: drift.dim(),
        });
    }
    let paths: Vec<PathResult> = (0..config.n_paths)
        .into_par_iter()
        .map(|p| simulate_path(p as u64, params.delta, dim, drift, config))
        .collect();

    let total_steps = (config.n_steps * config.n_paths) as u64;
    let mut ens = Ensemble {
        dim,
        delta: params.delta,
        dt: config.dt,
        batches: Vec::new(),
        records: Vec::with_capacity(paths.len()),
        batches_per_path: config.batches_per_path(),
        total_steps,
        halvings: 0,
        rejected: 0,
        max_norm: 0.0,
    };
    for p in paths {
        ens.batches.extend(p.batches);
        ens.records.push(p.records);
        ens.halvings += p.halvings;
        ens.rejected += p.rejected;
        ens.max_norm = ens.max_norm.max(p.max_norm);
    }
    let rate = ens.rejection_rate();
    if rate > MAX_REJECTION_RATE {
        return Err(FeneError::StepSize { rate, dt: config.dt });
    }
    Ok(ens)
}

fn simulate_path(path: u64, delta: f64, dim: usize, drift: &DriftField, cfg: &SdeConfig) -> PathResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path + 1);
    let nb = cfg.batches_per_path();
    let retained = cfg.retained();
    let mut out = PathResult {
        batches: vec![BatchSums::default(); nb],
        records: Vec::with_capacity(dim * (retained / cfg.record_stride + 1)),
        halvings: 0,
        rejected: 0,
        max_norm: 0.0,
    };
    let mut x = [0.0f64; 3];
    let mut k = [0.0f64; 3];
    let mut prop = [0.0f64; 3];
    for step in 0..cfg.n_steps {
        let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
        drift.eval(&x[..dim], &mut k[..dim]);
        let spring = 2.0 * delta / (1.0 - r2);
        let mut h = cfg.dt;
        let mut accepted = false;
        for attempt in 0..=cfg.max_halvings {
            if attempt > 0 {
                h *= 0.5;
                out.halvings += 1;
            }
            let s = (2.0 * h).sqrt();
            let mut p2 = 0.0;
            for i in 0..dim {
                let xi: f64 = rng.sample(StandardNormal);
                prop[i] = x[i] + (k[i] - spring * x[i]) * h + s * xi;
                p2 += prop[i] * prop[i];
            }
            if p2 < EDGE * EDGE {
                accepted = true;
                break;
            }
        }
        if accepted {
            x[..dim].copy_from_slice(&prop[..dim]);
        } else {
            out.rejected += 1;
        }
        if step < cfg.burn_in {
            continue;
        }
        let idx = step - cfg.burn_in;
        let b = &mut out.batches[idx * nb / retained];
        let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
        let inv = 1.0 / (1.0 - r2);
        b.count += 1;
        b.r2 += r2;
        b.r4 += r2 * r2;
        for i in 0..dim {
            b.x[i] += x[i];
            for j in 0..dim {
                b.force[3 * i + j] += x[i] * x[j] * inv;
            }
        }
        out.max_norm = out.max_norm.max(r2.sqrt());
        if idx.is_multiple_of(cfg.record_stride) {
            out.records.extend_from_slice(&x[..dim]);
        }
    }
    out
}

/// Monte Carlo estimate with batch-means standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Row-major shape of `value`.
    pub shape: Vec<usize>,
    pub n_effective: u64,
}

impl McEstimate {
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let k = i * self.shape.get(1).copied().unwrap_or(1) + j;
        (self.value[k], self.std_error[k])
    }

    pub fn scalar(&self) -> (f64, f64) {
        (self.value[0], self.std_error[0])
    }
}

fn batch_means<F>(batches: &[BatchSums], len: usize, f: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&BatchSums, &mut [f64]),
{
    let used: Vec<&BatchSums> = batches.iter().filter(|b| b.count > 0).collect();
    let nb = used.len() as f64;
    let mut means = vec![vec![0.0; len]; used.len()];
    for (m, b) in means.iter_mut().zip(&used) {
        f(b, m);
    }
    let mut value = vec![0.0; len];
    let mut se = vec![0.0; len];
    for k in 0..len {
        let mean = means.iter().map(|m| m[k]).sum::<f64>() / nb;
        let var = if nb > 1.0 {
            means.iter().map(|m| (m[k] - mean).powi(2)).sum::<f64>() / (nb - 1.0)
        } else {
            0.0
        };
        value[k] = mean;
        se[k] = (var / nb).sqrt();
    }
    (value, se)
}

impl Ensemble {
    pub fn n_batches(&self) -> usize {
        self.batches.iter().filter(|b| b.count > 0).count()
    }

    pub fn retained_samples(&self) -> u64 {
        self.batches.iter().map(|b| b.count).sum()
    }

    pub fn rejection_rate(&self) -> f64 {
        self.rejected as f64 / self.total_steps.max(1) as f64
    }

    /// `<|X|^2>` with effective sample size from the batch variance.
    pub fn radial_moment(&self) -> McEstimate {
        let (value, se) = batch_means(&self.batches, 1, |b, m| m[0] = b.r2 / b.count as f64);
        let n: u64 = self.retained_samples();
        let mean = self.batches.iter().map(|b| b.r2).sum::<f64>() / n as f64;
        let var = self.batches.iter().map(|b| b.r4).sum::<f64>() / n as f64 - mean * mean;
        let n_effective = if se[0] > 0.0 {
            ((var / (se[0] * se[0])).round() as u64).min(n)
        } else {
            n
        };
        McEstimate {
            value,
            std_error: se,
            shape: vec![1],
            n_effective,
        }
    }

    /// `<X>`.
    pub fn mean_position(&self) -> McEstimate {
        let d = self.dim;
        let (value, se) = batch_means(&self.batches, d, |b, m| {
            for (mi, xi) in m.iter_mut().zip(&b.x[..d]) {
                *mi = xi / b.count as f64;
            }
        });
        McEstimate {
            value,
            std_error: se,
            shape: vec![d],
            n_effective: self.n_batches() as u64,
        }
    }

    /// Recorded positions of path `p`.
    pub fn records(&self, p: usize) -> &[f64] {
        &self.records[p]
    }

    pub fn n_paths(&self) -> usize {
        self.records.len()
    }
}

/// Time-ensemble average of `mu b [2 delta X (x) X / (1 - |X|^2) - I]`.
pub fn estimate_stress(ensemble: &Ensemble, params: &FeneParams) -> McEstimate {
    let d = ensemble.dim;
    let scale = params.mu * params.b;
    let two_delta = 2.0 * ensemble.delta;
    let (value, se) = batch_means(&ensemble.batches, d * d, |b, m| {
        for i in 0..d {
            for j in 0..d {
                let avg = b.force[3 * i + j] / b.count as f64;
                let id = if i == j { 1.0 } else { 0.0 };
                m[d * i + j] = scale * (two_delta * avg - id);
            }
        }
    });
    McEstimate {
        value,
        std_error: se,
        shape: vec![d, d],
        n_effective: ensemble.n_batches() as u64,
    }
}

/// Polar bins over the unit disk, uniform in `r` and `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarBins {
    pub n_r: usize,
    pub n_theta: usize,
}

/// Geometry of a single polar bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinGeom {
    pub r0: f64,
    pub r1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl BinGeom {
    pub fn area(&self) -> f64 {
        0.5 * (self.r1 * self.r1 - self.r0 * self.r0) * (self.theta1 - self.theta0)
    }

    pub fn center(&self) -> [f64; 2] {
        let r = 0.5 * (self.r0 + self.r1);
        let t = 0.5 * (self.theta0 + self.theta1);
        [r * t.cos(), r * t.sin()]
    }

    pub fn center_theta(&self) -> f64 {
        0.5 * (self.theta0 + self.theta1)
    }
}

impl PolarBins {
    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn geom(&self, idx: usize) -> BinGeom {
        let i = idx / self.n_theta;
        let k = idx % self.n_theta;
        let dt = 2.0 * std::f64::consts::PI / self.n_theta as f64;
        BinGeom {
            r0: i as f64 / self.n_r as f64,
            r1: (i + 1) as f64 / self.n_r as f64,
            theta0: k as f64 * dt,
            theta1: (k + 1) as f64 * dt,
        }
    }

    fn locate(&self, x: &[f64]) -> usize {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let mut t = x[1].atan2(x[0]);
        if t < 0.0 {
            t += 2.0 * std::f64::consts::PI;
        }
        let i = ((r * self.n_r as f64) as usize).min(self.n_r - 1);
        let k = ((t / (2.0 * std::f64::consts::PI) * self.n_theta as f64) as usize).min(self.n_theta - 1);
        i * self.n_theta + k
    }
}

/// Normalized density histogram of the recorded positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub bins: PolarBins,
    /// Probability density per bin (integrates to one).
    pub density: Vec<f64>,
    pub std_error: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

/// Chi-square style comparison against a reference density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub chi2: f64,
    /// Number of bins with at least 10 samples.
    pub dof: usize,
}

impl Discrepancy {
    pub fn reduced(&self) -> f64 {
        self.chi2 / self.dof.max(1) as f64
    }
}

impl DensityHistogram {
    pub fn mass(&self) -> f64 {
        (0..self.bins.len())
            .map(|i| self.density[i] * self.bins.geom(i).area())
            .sum()
    }

    /// `sum ((d - d_ref) / se)^2` over bins holding at least 10 samples.
    /// `reference` returns the expected mean density over a bin.
    pub fn discrepancy<F: Fn(&BinGeom) -> f64>(&self, reference: F) -> Discrepancy {
        let mut chi2 = 0.0;
        let mut dof = 0;
        for i in 0..self.bins.len() {
            if self.counts[i] < 10 || self.std_error[i] <= 0.0 {
                continue;
            }
            let z = (self.density[i] - reference(&self.bins.geom(i))) / self.std_error[i];
            chi2 += z * z;
            dof += 1;
        }
        Discrepancy { chi2, dof }
    }

    /// `(<cos m theta>, <sin m theta>)` from bin centers.
    pub fn angular_moment(&self, m: usize) -> (f64, f64) {
        let mut c = 0.0;
        let mut s = 0.0;
        for i in 0..self.bins.len() {
            let g = self.bins.geom(i);
            let p = self.density[i] * g.area();
            let t = m as f64 * g.center_theta();
            c += p * t.cos();
            s += p * t.sin();
        }
        (c, s)
    }
}

/// Histogram of recorded positions (first two coordinates), with
/// batch-means errors from per-path time batches.
pub fn estimate_density_histogram(ensemble: &Ensemble, bins: PolarBins) -> Result<DensityHistogram> {
    if bins.n_r == 0 || bins.n_theta == 0 {
        return Err(FeneError::param("bins", "must have at least one bin per direction"));
    }
    let d = ensemble.dim;
    let nbins = bins.len();
    let area: Vec<f64> = (0..nbins).map(|i| bins.geom(i).area()).collect();
    let mut counts = vec![0u64; nbins];
    let mut batch_density: Vec<Vec<f64>> = Vec::new();
    for p in 0..ensemble.n_paths() {
        let rec = ensemble.records(p);
        let n = rec.len() / d;
        let nb = ensemble.batches_per_path.min(n.max(1));
        for b in 0..nb {
            let lo = b * n / nb;
            let hi = (b + 1) * n / nb;
            if hi <= lo {
                continue;
            }
            let mut local = vec![0u64; nbins];
            for s in lo..hi {
                local[bins.locate(&rec[s * d..s * d + 2])] += 1;
            }
            let tot = (hi - lo) as f64;
            batch_density.push((0..nbins).map(|i| local[i] as f64 / (tot * area[i])).collect());
            for i in 0..nbins {
                counts[i] += local[i];
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(FeneError::param("sde", "no recorded samples"));
    }
    let density: Vec<f64> = (0..nbins)
        .map(|i| counts[i] as f64 / (total as f64 * area[i]))
        .collect();
    let nb = batch_density.len() as f64;
    let std_error = (0..nbins)
        .map(|i| {
            if nb < 2.0 {
                return 0.0;
            }
            let mean = batch_density.iter().map(|b| b[i]).sum::<f64>() / nb;
            let var = batch_density.iter().map(|b| (b[i] - mean).powi(2)).sum::<f64>() / (nb - 1.0);
            (var / nb).sqrt()
        })
        .collect();
    Ok(DensityHistogram {
        bins,
        density,
        std_error,
        counts,
        total,
    })
}

/// Mean of `psi / b` over a bin by 6 x 6 midpoint
/// subdivision in `(r, theta)`.
pub fn field_bin_average(field: &DistributionField, b: f64, g: &BinGeom) -> f64 {
    const SUB: usize = 6;
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for i in 0..SUB {
        let r = g.r0 + (i as f64 + 0.5) / SUB as f64 * (g.r1 - g.r0);
        for k in 0..SUB {
            let t = g.theta0 + (k as f64 + 0.5) / SUB as f64 * (g.theta1 - g.theta0);
            acc += r * field.psi([r * t.cos(), r * t.sin()]);
            wsum += r;
        }
    }
    acc / wsum / b
}

/// Exact bin average of the equilibrium density `M / Z` (two dimensions).
pub fn equilibrium_bin_average(delta: f64, g: &BinGeom) -> f64 {
    // radial CDF of M / Z is 1 - (1 - r^2)^{delta + 1}
    let cdf = |r: f64| 1.0 - (1.0 - r * r).powf(delta + 1.0);
    let prob = (cdf(g.r1) - cdf(g.r0)) * (g.theta1 - g.theta0) / (2.0 * std::f64::consts::PI);
    prob / g.area()
}

/// Oracle summary serialized by the `oracle` and `compare` run modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub radial_moment: McEstimate,
    pub mean_position: McEstimate,
    pub stress: McEstimate,
    pub total_steps: u64,
    pub halvings: u64,
    pub rejected: u64,
    pub rejection_rate: f64,
    pub max_norm: f64,
}

impl OracleSummary {
    pub fn new(ens: &Ensemble, params: &FeneParams) -> Self {
        OracleSummary {
            radial_moment: ens.radial_moment(),
            mean_position: ens.mean_position(),
            stress: estimate_stress(ens, params),
            total_steps: ens.total_steps,
            halvings: ens.halvings,
            rejected: ens.rejected,
            rejection_rate: ens.rejection_rate(),
            max_norm: ens.max_norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SdeConfig {
        SdeConfig {
            dt: 1e-3,
            n_paths: 4,
            n_steps: 20_000,
            burn_in: 1_000,
            seed: 7,
            max_halvings: 8,
            record_stride: 5,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = quick();
        c.burn_in = c.n_steps;
        assert!(c.validate().is_err());
        let mut c = quick();
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = quick();
        c.n_paths = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn reproducible_and_inside_ball() {
        let p = FeneParams::default();
        let a = simulate_stationary(&p, &DriftField::none(2), &quick()).unwrap();
        let b = simulate_stationary(&p, &DriftField::none(2), &quick()).unwrap();
        assert_eq!(a.radial_moment(), b.radial_moment());
        assert_eq!(estimate_stress(&a, &p), estimate_stress(&b, &p));
        assert!(a.max_norm < 1.0);
        assert!(a.n_batches() >= MIN_BATCHES);
    }

    #[test]
    fn zero_mu_gives_exact_zero_stress() {
        let p = FeneParams::new(2, 8.0, 1.0, 0.0).unwrap();
        let e = simulate_stationary(&p, &DriftField::none(2), &quick()).unwrap();
        let s = estimate_stress(&e, &p);
        assert!(s.value.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn histogram_normalized() {
        let p = FeneParams::default();
        let e = simulate_stationary(&p, &DriftField::none(2), &quick()).unwrap();
        let h = estimate_density_histogram(&e, PolarBins { n_r: 8, n_theta: 6 }).unwrap();
        assert!((h.mass() - 1.0).abs() < 1e-12);
        assert!(estimate_density_histogram(&e, PolarBins { n_r: 0, n_theta: 6 }).is_err());
    }

    #[test]
    fn equilibrium_bins_sum_to_one() {
        let bins = PolarBins { n_r: 10, n_theta: 7 };
        let total: f64 = (0..bins.len())
            .map(|i| {
                let g = bins.geom(i);
                equilibrium_bin_average(8.0, &g) * g.area()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}
