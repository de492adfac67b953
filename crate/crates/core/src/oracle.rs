//! Monte Carlo verification of the angle-spread degradation model.
//!
//! Spatially correlated unit-variance complex Gaussian de-coherence fields
//! are synthesized on a grid over the aperture, the uncompensated aperture
//! integral is accumulated per trial, and the mean received power is
//! compared against the analytic `A_RIS * A_eff` prediction.
//!
//! The deterministic plane-wave phase factor is already compensated by the
//! surface phase profile, and that compensation is exact, so the simulated
//! integrand is the product of the two de-coherence fields alone.
//!
//! Sampling uses the separability of the Gaussian correlation: with 1-D
//! correlation factors `C_y` and `C_z` (Cholesky factors `L_y`, `L_z`) and
//! an iid standard complex Gaussian matrix `G`, the field `L_z G L_y^T` has
//! covariance `C_z (x) C_y`. Trials draw from independent substreams keyed
//! on `(master_seed, trial_index)` and are reduced in trial order, so a
//! result is bit-identical for any worker count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ris::{coherence_scales, effective_area, effective_area_exact};
use crate::scenario::{AngleSpreadSpec, ScatteredSegments};

const PI: f64 = std::f64::consts::PI;

/// Jitter ladder for the near-singular Gaussian correlation matrices.
const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Minimum trials for a meaningful standard error.
pub const MIN_TRIALS: usize = 100;

/// Uniform midpoint sampling of a rectangular aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureGrid {
    pub width_m: f64,
    pub height_m: f64,
    pub dy_m: f64,
    pub dz_m: f64,
    pub ny: usize,
    pub nz: usize,
}

impl ApertureGrid {
    /// Grid with the requested maximum spacings; the actual spacing divides
    /// the aperture exactly, so `ny * dy == width`.
    pub fn with_spacing(width_m: f64, height_m: f64, dy_max: f64, dz_max: f64) -> Result<Self> {
        for (key, v) in [
            ("width_m", width_m),
            ("height_m", height_m),
            ("dy_max", dy_max),
            ("dz_max", dz_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation {
                    key: key.into(),
                    message: format!("must be positive, got {v}"),
                });
            }
        }
        let ny = (width_m / dy_max).ceil().max(1.0) as usize;
        let nz = (height_m / dz_max).ceil().max(1.0) as usize;
        Ok(ApertureGrid {
            width_m,
            height_m,
            dy_m: width_m / ny as f64,
            dz_m: height_m / nz as f64,
            ny,
            nz,
        })
    }

    /// Grid sized for the coherence scales of `spreads` at wavenumber `k`:
    /// spacing at most a quarter coherence scale, and at least 16 cells per
    /// side so that even electrically small apertures resolve the windowed
    /// correlation.
    pub fn for_coherence(
        width_m: f64,
        height_m: f64,
        wavenumber_k: f64,
        spreads: &AngleSpreadSpec,
    ) -> Result<Self> {
        let lambda = 2.0 * PI / wavenumber_k;
        let scales = coherence_scales(lambda, spreads);
        let dy_max = (scales.w_coh_m / 4.0).min(width_m / 16.0);
        let dz_max = (scales.h_coh_m / 4.0).min(height_m / 16.0);
        Self::with_spacing(width_m, height_m, dy_max, dz_max)
    }

    /// Cell-center coordinates along the width, ascending.
    pub fn y_coords(&self) -> Vec<f64> {
        (0..self.ny)
            .map(|j| -self.width_m / 2.0 + (j as f64 + 0.5) * self.dy_m)
            .collect()
    }

    /// Cell-center coordinates along the height, ascending.
    pub fn z_coords(&self) -> Vec<f64> {
        (0..self.nz)
            .map(|i| -self.height_m / 2.0 + (i as f64 + 0.5) * self.dz_m)
            .collect()
    }

    /// Aperture area, m^2.
    pub fn area_m2(&self) -> f64 {
        self.width_m * self.height_m
    }

    fn same_sampling(&self, other: &ApertureGrid) -> bool {
        self.ny == other.ny
            && self.nz == other.nz
            && (self.dy_m - other.dy_m).abs() < 1e-12
            && (self.dz_m - other.dz_m).abs() < 1e-12
    }
}

/// Which segment's de-coherence factor a field realization represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Incident,
    Scattered,
}

/// One realization of a de-coherence field on the aperture grid,
/// `values[(i, j)]` at height index `i` and width index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub values: DMatrix<Complex64>,
    pub grid: ApertureGrid,
    pub role: FieldRole,
}

/// 1-D Gaussian correlation matrix `C[i][j] = exp(-k^2 (x_i - x_j)^2 s^2 / 2)`.
///
/// The diagonal is exactly one. Coordinates must be sorted ascending.
pub fn correlation_matrix_1d(coords: &[f64], spread_rad: f64, wavenumber_k: f64) -> DMatrix<f64> {
    assert!(spread_rad >= 0.0, "spread must be non-negative");
    assert!(wavenumber_k > 0.0, "wavenumber must be positive");
    assert!(
        coords.windows(2).all(|w| w[0] <= w[1]),
        "coordinates must be sorted ascending"
    );
    let n = coords.len();
    let c = wavenumber_k * wavenumber_k * spread_rad * spread_rad / 2.0;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            let d = coords[i] - coords[j];
            (-c * d * d).exp()
        }
    })
}

fn cholesky_with_jitter(matrix: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    for &jitter in &JITTER_LADDER {
        let mut m = matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = m.cholesky() {
            return Ok((chol.unpack(), jitter));
        }
    }
    Err(Error::Numeric(format!(
        "correlation factorization failed for a {} x {} matrix even with jitter {:.0e}",
        matrix.nrows(),
        matrix.ncols(),
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

/// Reusable sampler for correlated field pairs on a fixed grid.
pub struct CorrelatedFieldSampler {
    grid: ApertureGrid,
    segments: ScatteredSegments,
    l_y_t: DMatrix<f64>,
    l_z: DMatrix<f64>,
    jitter: f64,
    degenerate: bool,
}

impl CorrelatedFieldSampler {
    pub fn new(grid: ApertureGrid, spreads: &AngleSpreadSpec, wavenumber_k: f64) -> Result<Self> {
        let lambda = 2.0 * PI / wavenumber_k;
        let scales = coherence_scales(lambda, spreads);
        for (name, spacing, scale) in [
            ("dy", grid.dy_m, scales.w_coh_m),
            ("dz", grid.dz_m, scales.h_coh_m),
        ] {
            if scale.is_finite() && spacing > scale / 4.0 * (1.0 + 1e-12) {
                return Err(Error::Validation {
                    key: name.into(),
                    message: format!(
                        "grid spacing {spacing:.4e} m exceeds a quarter of the \
                         coherence scale {scale:.4e} m"
                    ),
                });
            }
        }
        let degenerate = matches!(spreads.scattered_segments, ScatteredSegments::None)
            || (spreads.azimuth_rms_rad == 0.0 && spreads.elevation_rms_rad == 0.0);
        if degenerate {
            return Ok(Self {
                grid,
                segments: spreads.scattered_segments,
                l_y_t: DMatrix::zeros(0, 0),
                l_z: DMatrix::zeros(0, 0),
                jitter: 0.0,
                degenerate,
            });
        }
        let c_y = correlation_matrix_1d(&grid.y_coords(), spreads.azimuth_rms_rad, wavenumber_k);
        let c_z = correlation_matrix_1d(&grid.z_coords(), spreads.elevation_rms_rad, wavenumber_k);
        let (l_y, jitter_y) = cholesky_with_jitter(&c_y)?;
        let (l_z, jitter_z) = cholesky_with_jitter(&c_z)?;
        Ok(Self {
            grid,
            segments: spreads.scattered_segments,
            l_y_t: l_y.transpose(),
            l_z,
            jitter: jitter_y.max(jitter_z),
            degenerate,
        })
    }

    /// Diagonal regularization that was required to factor the correlation
    /// matrices.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn constant_field(&self, role: FieldRole) -> FieldGrid {
        FieldGrid {
            values: DMatrix::from_element(self.grid.nz, self.grid.ny, Complex64::new(1.0, 0.0)),
            grid: self.grid,
            role,
        }
    }

    fn draw_correlated(&self, rng: &mut impl Rng, role: FieldRole) -> FieldGrid {
        let (nz, ny) = (self.grid.nz, self.grid.ny);
        // iid CN(0,1): real and imaginary parts N(0, 1/2)
        let sigma = std::f64::consts::FRAC_1_SQRT_2;
        let mut g_re = DMatrix::zeros(nz, ny);
        let mut g_im = DMatrix::zeros(nz, ny);
        // row-major fill order is part of the determinism contract
        for i in 0..nz {
            for j in 0..ny {
                g_re[(i, j)] = sigma * rng.sample::<f64, _>(StandardNormal);
                g_im[(i, j)] = sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let x_re = &self.l_z * (g_re * &self.l_y_t);
        let x_im = &self.l_z * (g_im * &self.l_y_t);
        FieldGrid {
            values: x_re.zip_map(&x_im, |re, im| Complex64::new(re, im)),
            grid: self.grid,
            role,
        }
    }

    /// Draw one (incident, scattered) field pair. With scatter on one
    /// segment only, the incident field is identically one; with no
    /// scattered segment both are.
    pub fn sample_pair(&self, rng: &mut impl Rng) -> (FieldGrid, FieldGrid) {
        if self.degenerate {
            return (
                self.constant_field(FieldRole::Incident),
                self.constant_field(FieldRole::Scattered),
            );
        }
        match self.segments {
            ScatteredSegments::Both => (
                self.draw_correlated(rng, FieldRole::Incident),
                self.draw_correlated(rng, FieldRole::Scattered),
            ),
            ScatteredSegments::RisToRxOnly => (
                self.constant_field(FieldRole::Incident),
                self.draw_correlated(rng, FieldRole::Scattered),
            ),
            ScatteredSegments::None => unreachable!("degenerate flag covers this"),
        }
    }
}

/// Deterministic per-trial substream seed derived from the master seed and
/// the trial index; the stream cipher key schedule does the mixing.
fn substream_seed(master_seed: u64, trial_index: u64) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&trial_index.to_le_bytes());
    seed[16..].copy_from_slice(b"corner-mc-stream");
    seed
}

fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(substream_seed(master_seed, trial_index))
}

/// Draw one independent field pair for the given seed.
pub fn sample_field_pair(
    grid: ApertureGrid,
    spreads: &AngleSpreadSpec,
    wavenumber_k: f64,
    seed: u64,
) -> Result<(FieldGrid, FieldGrid)> {
    let sampler = CorrelatedFieldSampler::new(grid, spreads, wavenumber_k)?;
    let mut rng = trial_rng(seed, 0);
    Ok(sampler.sample_pair(&mut rng))
}

/// Riemann sum of the product of the two fields over the aperture:
/// `dy dz sum_ij inc[i][j] * scat[i][j]`. Both fields all ones gives
/// exactly the aperture area.
pub fn aperture_integral(xi_inc: &FieldGrid, xi_scat: &FieldGrid) -> Result<Complex64> {
    if !xi_inc.grid.same_sampling(&xi_scat.grid) {
        return Err(Error::Shape(format!(
            "field grids differ: {}x{} vs {}x{}",
            xi_inc.grid.nz, xi_inc.grid.ny, xi_scat.grid.nz, xi_scat.grid.ny
        )));
    }
    let sum: Complex64 = xi_inc
        .values
        .iter()
        .zip(xi_scat.values.iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(sum * Complex64::new(xi_inc.grid.dy_m * xi_inc.grid.dz_m, 0.0))
}

/// Monte Carlo estimate of the mean aperture-integral power next to its
/// analytic predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub grid: ApertureGrid,
    pub segments: ScatteredSegments,
    /// Mean of |integral|^2 over the trials, m^4.
    pub mean_power: f64,
    /// Sample standard deviation / sqrt(trials).
    pub std_error: f64,
    pub trials: usize,
    /// Analytic `A_RIS * A_eff_exact` (windowed correlation integral), m^4.
    pub analytic_prediction: f64,
    /// Analytic `A_RIS * A_eff` with the min-approximation, m^4.
    pub analytic_min_approx: f64,
    pub master_seed: u64,
    /// Diagonal jitter used to factor the correlation matrices.
    pub jitter: f64,
}

/// Estimate the mean power of the uncompensated aperture integral over
/// independent correlated-field trials.
///
/// Trials are generated from per-trial substreams and reduced in trial
/// order: the estimate is bit-identical for any worker count.
pub fn mc_mean_power(
    grid: ApertureGrid,
    spreads: &AngleSpreadSpec,
    wavenumber_k: f64,
    trials: usize,
    master_seed: u64,
) -> Result<McEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::Validation {
            key: "trials".into(),
            message: format!("need at least {MIN_TRIALS} trials, got {trials}"),
        });
    }
    let sampler = CorrelatedFieldSampler::new(grid, spreads, wavenumber_k)?;

    let powers: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let (inc, scat) = sampler.sample_pair(&mut rng);
            aperture_integral(&inc, &scat)
                .expect("sampler produces matching grids")
                .norm_sqr()
        })
        .collect();

    // ordered reduction in trial-index order; a degenerate (constant)
    // sample has exactly zero spread rather than summation noise
    let n = powers.len() as f64;
    let (mean_power, std_error) = if powers.windows(2).all(|w| w[0] == w[1]) {
        (powers[0], 0.0)
    } else {
        let mean = powers.iter().sum::<f64>() / n;
        let var = powers.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };

    let lambda = 2.0 * PI / wavenumber_k;
    let a_ris = grid.area_m2();
    let a_eff_exact = effective_area_exact(grid.width_m, grid.height_m, lambda, spreads)?;
    let scales = coherence_scales(lambda, spreads);
    let a_eff_min = effective_area(grid.width_m, grid.height_m, &scales).a_eff_m2;

    Ok(McEstimate {
        grid,
        segments: spreads.scattered_segments,
        mean_power,
        std_error,
        trials,
        analytic_prediction: a_ris * a_eff_exact,
        analytic_min_approx: a_ris * a_eff_min,
        master_seed,
        jitter: sampler.jitter(),
    })
}

/// Verdict of the analytic-vs-Monte-Carlo comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    /// |z| <= 3.
    Pass,
    /// Zero-variance run reproducing the analytic value exactly.
    DegeneratePass,
    Fail,
}

impl OracleVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleVerdict::Pass => "pass",
            OracleVerdict::DegeneratePass => "degenerate_pass",
            OracleVerdict::Fail => "fail",
        }
    }

    pub fn passed(&self) -> bool {
        !matches!(self, OracleVerdict::Fail)
    }
}

/// Comparison record between a Monte Carlo estimate and the analytic model.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub aperture_w_m: f64,
    pub aperture_h_m: f64,
    pub trials: usize,
    pub mc_mean: f64,
    pub std_err: f64,
    pub analytic_exact: f64,
    pub analytic_min_approx: f64,
    pub z_score: f64,
    pub verdict: OracleVerdict,
    pub master_seed: u64,
    pub jitter: f64,
}

/// Judge an estimate against its analytic prediction at the 3-sigma level.
pub fn oracle_report(estimate: &McEstimate) -> OracleReport {
    let (z_score, verdict) = if estimate.std_error > 0.0 {
        let z = (estimate.mean_power - estimate.analytic_prediction) / estimate.std_error;
        (z, if z.abs() <= 3.0 { OracleVerdict::Pass } else { OracleVerdict::Fail })
    } else {
        let exact = (estimate.mean_power - estimate.analytic_prediction).abs()
            <= 1e-9 * estimate.analytic_prediction.abs();
        (0.0, if exact { OracleVerdict::DegeneratePass } else { OracleVerdict::Fail })
    };
    OracleReport {
        aperture_w_m: estimate.grid.width_m,
        aperture_h_m: estimate.grid.height_m,
        trials: estimate.trials,
        mc_mean: estimate.mean_power,
        std_err: estimate.std_error,
        analytic_exact: estimate.analytic_prediction,
        analytic_min_approx: estimate.analytic_min_approx,
        z_score,
        verdict,
        master_seed: estimate.master_seed,
        jitter: estimate.jitter,
    }
}

impl OracleReport {
    /// Line-oriented text form of the comparison.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "aperture_m            = {} x {}\n",
            self.aperture_w_m, self.aperture_h_m
        ));
        s.push_str(&format!("trials                = {}\n", self.trials));
        s.push_str(&format!("master_seed           = {}\n", self.master_seed));
        s.push_str(&format!("mc_mean_m4            = {:e}\n", self.mc_mean));
        s.push_str(&format!("std_err_m4            = {:e}\n", self.std_err));
        s.push_str(&format!("analytic_exact_m4     = {:e}\n", self.analytic_exact));
        s.push_str(&format!("analytic_min_approx_m4 = {:e}\n", self.analytic_min_approx));
        s.push_str(&format!("z_score               = {:.4}\n", self.z_score));
        s.push_str(&format!("jitter                = {:e}\n", self.jitter));
        s.push_str(&format!("verdict               = {}\n", self.verdict.as_str()));
        s
    }

    pub fn csv_header() -> &'static str {
        "aperture_w,aperture_h,trials,mc_mean,std_err,analytic_exact,analytic_min_approx,z_score,verdict"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{}",
            self.aperture_w_m,
            self.aperture_h_m,
            self.trials,
            self.mc_mean,
            self.std_err,
            self.analytic_exact,
            self.analytic_min_approx,
            self.z_score,
            self.verdict.as_str()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K28: f64 = 5.868366061464709e2;
    const PHI_RMS: f64 = 0.24434609527920614;
    const THETA_RMS: f64 = 0.010471975511965976;

    fn spreads(mode: ScatteredSegments) -> AngleSpreadSpec {
        AngleSpreadSpec {
            azimuth_rms_rad: PHI_RMS,
            elevation_rms_rad: THETA_RMS,
            scattered_segments: mode,
        }
    }

    #[test]
    fn grid_covers_the_aperture_exactly() {
        let g = ApertureGrid::for_coherence(0.3, 0.3, K28, &spreads(ScatteredSegments::Both)).unwrap();
        assert!((g.ny as f64 * g.dy_m - 0.3).abs() < 1e-12);
        assert!((g.nz as f64 * g.dz_m - 0.3).abs() < 1e-12);
        assert!(g.ny >= 16 && g.nz >= 16);
        let ys = g.y_coords();
        assert_eq!(ys.len(), g.ny);
        assert!(ys.windows(2).all(|w| w[1] > w[0]));
        assert!((ys[0] + 0.3 / 2.0 - g.dy_m / 2.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_matrix_basics() {
        let coords = [0.0, 0.01, 0.05];
        let c = correlation_matrix_1d(&coords, 0.0, K28);
        assert!(c.iter().all(|&v| v == 1.0));

        // lag with k * d * spread = sqrt(2) sits at exp(-1)
        let d = (2.0f64).sqrt() / (K28 * PHI_RMS);
        let c = correlation_matrix_1d(&[0.0, d], PHI_RMS, K28);
        assert!((c[(0, 1)] - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(c[(0, 0)], 1.0);
        assert_eq!(c[(1, 1)], 1.0);

        // decay below 1% past sqrt(2 ln 100) / (k * spread)
        let bound = (2.0 * (100.0f64).ln()).sqrt() / (K28 * PHI_RMS);
        let c = correlation_matrix_1d(&[0.0, bound * 1.001, bound * 2.0], PHI_RMS, K28);
        assert!(c[(0, 1)] < 0.01);
        let c = correlation_matrix_1d(&[0.0, bound * 0.999], PHI_RMS, K28);
        assert!(c[(0, 1)] > 0.01);
    }

    #[test]
    fn zero_spread_fields_are_identically_one() {
        let g = ApertureGrid::with_spacing(0.2, 0.2, 0.05, 0.05).unwrap();
        let (inc, scat) =
            sample_field_pair(g, &AngleSpreadSpec::none(), K28, 7).unwrap();
        assert!(inc.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(scat.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let integral = aperture_integral(&inc, &scat).unwrap();
        assert!((integral.re - 0.04).abs() < 1e-15);
        assert!(integral.im == 0.0);
    }

    #[test]
    fn one_segment_mode_keeps_incident_field_flat() {
        let g = ApertureGrid::for_coherence(0.1, 0.1, K28, &spreads(ScatteredSegments::RisToRxOnly))
            .unwrap();
        let (inc, scat) =
            sample_field_pair(g, &spreads(ScatteredSegments::RisToRxOnly), K28, 3).unwrap();
        assert!(inc.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(scat.values.iter().any(|v| *v != Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn single_point_samples_have_unit_variance() {
        // chi-squared test at significance 0.01 over 1e4 draws:
        // sum of 2|xi|^2 ~ chi2(2N), normal approximation
        let g = ApertureGrid::with_spacing(0.001, 0.001, 0.001, 0.001).unwrap();
        assert_eq!((g.ny, g.nz), (1, 1));
        let sampler = CorrelatedFieldSampler::new(g, &spreads(ScatteredSegments::Both), K28).unwrap();
        let n = 10_000;
        let mut sum = 0.0;
        for t in 0..n as u64 {
            let mut rng = trial_rng(99, t);
            let (_, scat) = sampler.sample_pair(&mut rng);
            sum += 2.0 * scat.values[(0, 0)].norm_sqr();
        }
        let dof = (2 * n) as f64;
        let z = (sum - dof) / (2.0 * dof).sqrt();
        assert!(z.abs() < 2.576, "chi-squared z = {z}");
        // empirical variance within 5% of one
        assert!((sum / dof - 1.0).abs() < 0.05, "variance {}", sum / dof);
    }

    #[test]
    fn lag_correlation_matches_the_gaussian_model() {
        // sample points a quarter coherence width apart; indices 0 and 4
        // are then separated by exactly one coherence width
        let w_coh = 1.236096384957778e-2;
        let g = ApertureGrid::with_spacing(2.0 * w_coh, 0.001, w_coh / 4.0, 0.001).unwrap();
        assert_eq!((g.ny, g.nz), (8, 1));
        let sampler = CorrelatedFieldSampler::new(g, &spreads(ScatteredSegments::Both), K28).unwrap();
        let lag = g.y_coords()[4] - g.y_coords()[0];
        assert!((lag - w_coh).abs() < 1e-15);
        let n = 10_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..n as u64 {
            let mut rng = trial_rng(4242, t);
            let (_, scat) = sampler.sample_pair(&mut rng);
            acc += scat.values[(0, 0)] * scat.values[(0, 4)].conj();
        }
        let rho = acc / n as f64;
        let c = K28 * K28 * lag * lag * PHI_RMS * PHI_RMS / 2.0;
        let expected = (-c).exp();
        assert!(
            (rho.re - expected).abs() < 0.03,
            "re rho {} vs {}",
            rho.re,
            expected
        );
        assert!(rho.im.abs() < 0.03);
    }

    #[test]
    fn conjugate_pairing_gives_real_nonnegative_integral() {
        let g = ApertureGrid::for_coherence(0.05, 0.05, K28, &spreads(ScatteredSegments::Both))
            .unwrap();
        let (_, scat) = sample_field_pair(g, &spreads(ScatteredSegments::Both), K28, 11).unwrap();
        let conj = FieldGrid {
            values: scat.values.map(|v| v.conj()),
            grid: scat.grid,
            role: FieldRole::Incident,
        };
        let integral = aperture_integral(&conj, &scat).unwrap();
        assert!(integral.re > 0.0);
        assert!(integral.im.abs() < 1e-12 * integral.re);
    }

    #[test]
    fn integral_is_linear_in_one_field() {
        let g = ApertureGrid::for_coherence(0.05, 0.05, K28, &spreads(ScatteredSegments::Both))
            .unwrap();
        let (_, scat) = sample_field_pair(g, &spreads(ScatteredSegments::Both), K28, 13).unwrap();
        let ones = FieldGrid {
            values: DMatrix::from_element(g.nz, g.ny, Complex64::new(1.0, 0.0)),
            grid: g,
            role: FieldRole::Incident,
        };
        let integral = aperture_integral(&ones, &scat).unwrap();
        let direct: Complex64 = scat.values.iter().sum();
        let expected = direct * Complex64::new(g.dy_m * g.dz_m, 0.0);
        assert!((integral - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn mismatched_grids_are_a_shape_error() {
        let g1 = ApertureGrid::with_spacing(0.1, 0.1, 0.05, 0.05).unwrap();
        let g2 = ApertureGrid::with_spacing(0.1, 0.1, 0.025, 0.05).unwrap();
        let (a, _) = sample_field_pair(g1, &AngleSpreadSpec::none(), K28, 1).unwrap();
        let (_, b) = sample_field_pair(g2, &AngleSpreadSpec::none(), K28, 1).unwrap();
        assert!(matches!(aperture_integral(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_spread_mean_power_is_area_squared() {
        let g = ApertureGrid::with_spacing(0.3, 0.2, 0.05, 0.05).unwrap();
        let est = mc_mean_power(g, &AngleSpreadSpec::none(), K28, 200, 5).unwrap();
        let a2 = (0.3f64 * 0.2).powi(2);
        assert!((est.mean_power - a2).abs() < 1e-15 * a2.max(1.0) + 1e-17);
        assert_eq!(est.std_error, 0.0);
        let report = oracle_report(&est);
        assert_eq!(report.verdict, OracleVerdict::DegeneratePass);
        assert!(report.verdict.passed());
    }

    #[test]
    fn estimates_are_deterministic_and_seed_sensitive() {
        let g = ApertureGrid::for_coherence(0.05, 0.05, K28, &spreads(ScatteredSegments::Both))
            .unwrap();
        let a = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 200, 77).unwrap();
        let b = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 200, 77).unwrap();
        assert_eq!(a.mean_power.to_bits(), b.mean_power.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 200, 78).unwrap();
        assert_ne!(a.mean_power.to_bits(), c.mean_power.to_bits());
    }

    #[test]
    fn std_error_shrinks_like_root_trials() {
        let g = ApertureGrid::for_coherence(0.1, 0.1, K28, &spreads(ScatteredSegments::Both))
            .unwrap();
        let small = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 500, 21).unwrap();
        let large = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 5000, 22).unwrap();
        let ratio = large.std_error * (10.0f64).sqrt() / small.std_error;
        assert!((ratio - 1.0).abs() < 0.2, "scaling ratio {ratio}");
    }

    #[test]
    fn mean_power_tracks_the_analytic_prediction() {
        let g = ApertureGrid::for_coherence(0.1, 0.1, K28, &spreads(ScatteredSegments::Both))
            .unwrap();
        let est = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 2000, 31).unwrap();
        let report = oracle_report(&est);
        assert_eq!(report.verdict, OracleVerdict::Pass, "{}", report.to_text());
        assert!(report.z_score.abs() <= 3.0);
    }

    #[test]
    fn too_few_trials_is_a_validation_error() {
        let g = ApertureGrid::with_spacing(0.1, 0.1, 0.01, 0.01).unwrap();
        let err = mc_mean_power(g, &AngleSpreadSpec::none(), K28, 10, 0).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        let g = ApertureGrid::with_spacing(0.3, 0.3, 0.01, 0.01).unwrap();
        // dy = 0.01 m but w_coh / 4 = 0.0031 m
        let err = CorrelatedFieldSampler::new(g, &spreads(ScatteredSegments::Both), K28)
            .err()
            .expect("coarse grid must be rejected");
        assert!(err.to_string().contains("coherence scale"), "{err}");
    }

    #[test]
    fn corrupted_prediction_fails_the_report() {
        let g = ApertureGrid::for_coherence(0.05, 0.05, K28, &spreads(ScatteredSegments::Both))
            .unwrap();
        let mut est = mc_mean_power(g, &spreads(ScatteredSegments::Both), K28, 500, 41).unwrap();
        est.analytic_prediction *= 10.0;
        let report = oracle_report(&est);
        assert_eq!(report.verdict, OracleVerdict::Fail);
        assert!(!report.verdict.passed());
    }

    #[test]
    fn report_serializes_to_csv() {
        let g = ApertureGrid::with_spacing(0.1, 0.1, 0.01, 0.01).unwrap();
        let est = mc_mean_power(g, &AngleSpreadSpec::none(), K28, 100, 1).unwrap();
        let report = oracle_report(&est);
        let row = report.to_csv_row();
        assert_eq!(row.split(',').count(), OracleReport::csv_header().split(',').count());
        assert!(row.ends_with("degenerate_pass"));
        assert!(report.to_text().contains("verdict"));
    }
}
