//! Analytic receive power from the reflecting surface: the ideal co-phased
//! case and the angle-spread-degraded case.
//!
//! Under angle spread the field across the aperture decorrelates on the
//! coherence scales `w_coh = lambda / (2 sqrt(pi) phi_rms)` and
//! `h_coh = lambda / (2 sqrt(pi) theta_rms)`. Power then scales with
//! `A_RIS * A_eff` instead of `A_RIS^2`, where the effective coherent area
//! is `A_eff ~= min(w_coh, w) * min(h_coh, h)`. The exact windowed
//! correlation integral behind that approximation is also provided.

use crate::error::Result;
use crate::gain::PathGain;
use crate::geometry::RisPath;
use crate::quad;
use crate::scenario::{AngleSpreadSpec, Scenario, ScatteredSegments};

const PI: f64 = std::f64::consts::PI;

/// Relative tolerance of the exact effective-area quadrature.
pub const EFFECTIVE_AREA_QUAD_TOL: f64 = 1e-8;

/// Aperture scales over which the channel field stays effectively
/// co-phased. Infinite when the corresponding spread vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceScales {
    pub w_coh_m: f64,
    pub h_coh_m: f64,
    pub segment_mode: ScatteredSegments,
}

/// Effective coherent aperture area next to the full geometric area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveArea {
    pub a_eff_m2: f64,
    pub a_ris_m2: f64,
}

impl EffectiveArea {
    /// `10 log10(a_eff / a_ris)`, the coherent-gain degradation in dB.
    pub fn degradation_db(&self) -> f64 {
        10.0 * (self.a_eff_m2 / self.a_ris_m2).log10()
    }
}

/// Coherence width and height for the given wavelength and spreads.
///
/// With scatter on one segment only, the product correlation loses one
/// Gaussian factor and each scale grows by exactly sqrt(2); with no
/// scattered segment (or a zero spread) the scale is reported as infinite
/// and downstream code clamps to the aperture dimension.
pub fn coherence_scales(wavelength_m: f64, spreads: &AngleSpreadSpec) -> CoherenceScales {
    assert!(wavelength_m > 0.0, "wavelength must be positive");
    let factor = match spreads.scattered_segments {
        ScatteredSegments::Both => 1.0,
        ScatteredSegments::RisToRxOnly => std::f64::consts::SQRT_2,
        ScatteredSegments::None => f64::INFINITY,
    };
    let scale = |rms: f64| {
        if rms <= 0.0 || !factor.is_finite() {
            f64::INFINITY
        } else {
            factor * wavelength_m / (2.0 * PI.sqrt() * rms)
        }
    };
    CoherenceScales {
        w_coh_m: scale(spreads.azimuth_rms_rad),
        h_coh_m: scale(spreads.elevation_rms_rad),
        segment_mode: spreads.scattered_segments,
    }
}

/// Min-approximation of the effective coherent area:
/// `A_eff = min(w_coh, w) * min(h_coh, h)`.
pub fn effective_area(w_m: f64, h_m: f64, scales: &CoherenceScales) -> EffectiveArea {
    assert!(w_m > 0.0 && h_m > 0.0, "aperture dimensions must be positive");
    EffectiveArea {
        a_eff_m2: scales.w_coh_m.min(w_m) * scales.h_coh_m.min(h_m),
        a_ris_m2: w_m * h_m,
    }
}

/// Gaussian exponent constant per dimension for the product correlation of
/// the two segment fields: `rho_inc * rho_scat = exp(-c u^2)`.
fn product_exponent(wavenumber_k: f64, rms: f64, mode: ScatteredSegments) -> f64 {
    let per_field = wavenumber_k * wavenumber_k * rms * rms / 2.0;
    match mode {
        ScatteredSegments::Both => 2.0 * per_field,
        ScatteredSegments::RisToRxOnly => per_field,
        ScatteredSegments::None => 0.0,
    }
}

/// Exact effective coherent area: the four-fold aperture correlation
/// integral reduced to difference coordinates with triangular windows,
///
/// ```text
/// A_eff_exact = (1 / A_RIS) *  int_{-w}^{w} int_{-h}^{h}
///               (w - |y_d|) (h - |z_d|) rho_inc rho_scat  dy_d dz_d
/// ```
///
/// evaluated as two separable 1-D adaptive quadratures. Zero spread makes
/// a dimension's factor exactly the aperture length.
pub fn effective_area_exact(
    w_m: f64,
    h_m: f64,
    wavelength_m: f64,
    spreads: &AngleSpreadSpec,
) -> Result<f64> {
    assert!(w_m > 0.0 && h_m > 0.0, "aperture dimensions must be positive");
    let k = 2.0 * PI / wavelength_m;
    let cy = product_exponent(k, spreads.azimuth_rms_rad, spreads.scattered_segments);
    let cz = product_exponent(k, spreads.elevation_rms_rad, spreads.scattered_segments);
    Ok(windowed_dimension(w_m, cy)? * windowed_dimension(h_m, cz)?)
}

/// One separable factor: `(2/L) int_0^L (L - u) exp(-c u^2) du`.
fn windowed_dimension(length: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(length);
    }
    let integral = quad::integrate(
        &|u: f64| (length - u) * (-c * u * u).exp(),
        0.0,
        length,
        EFFECTIVE_AREA_QUAD_TOL,
    )?;
    Ok(2.0 * integral / length)
}

/// Ideal co-phased surface path gain:
/// `A_RIS^2 cos^2(theta_inc) exp(-kappa (R_inc + R_scat)) / ((4 pi)^2 R_inc^2 R_scat^2)`.
///
/// Independent of frequency: the coherent aperture gain exactly cancels the
/// wavelength dependence of the two propagation legs.
pub fn ideal_ris_path_gain(path: &RisPath, scenario: &Scenario) -> PathGain {
    let a_ris = scenario.ris_area_m2();
    spread_area_gain(path, scenario, a_ris)
}

/// Angle-spread-degraded surface path gain: `A_RIS^2` is replaced by
/// `A_RIS * A_eff` with the min-approximation effective area.
pub fn spread_ris_path_gain(path: &RisPath, scenario: &Scenario) -> PathGain {
    let scales = coherence_scales(scenario.wavelength_m(), &scenario.angle_spread);
    let area = effective_area(scenario.ris_width_m, scenario.ris_height_m, &scales);
    spread_area_gain(path, scenario, area.a_eff_m2)
}

fn spread_area_gain(path: &RisPath, scenario: &Scenario, a_eff: f64) -> PathGain {
    let a_ris = scenario.ris_area_m2();
    let cos_inc = path.theta_inc_rad.cos();
    let absorption =
        (-scenario.absorption_np_per_m * (path.r_inc_m + path.r_scat_m)).exp();
    let linear = a_ris * a_eff * cos_inc * cos_inc * absorption
        / ((4.0 * PI).powi(2) * path.r_inc_m.powi(2) * path.r_scat_m.powi(2));
    PathGain::from_linear(linear)
}
