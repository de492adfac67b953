//! Closed-form receive path gain for the ambient around-the-corner
//! mechanisms: wedge diffraction at the building corners (geometric theory
//! of diffraction) and bistatic scatter from cylindrical street poles.
//!
//! Both models carry explicit validity guards: the GTD coefficient is
//! rejected near shadow/reflection boundaries where it diverges, and the
//! pole scattering width is rejected below its high-frequency limit or too
//! close to the forward-scatter direction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gain::PathGain;
use crate::geometry::{CornerPath, PolePath, RIGHT_ANGLE_WEDGE_N};
use crate::scenario::{Polarization, Scenario};

const PI: f64 = std::f64::consts::PI;

/// Guard on the cosine-difference denominators of the diffraction
/// coefficient. Below this magnitude the evaluation point is too close to
/// a shadow or reflection boundary for the plain GTD form to be valid.
pub const GTD_BOUNDARY_GUARD: f64 = 1e-3;

/// High-frequency validity limit for the cylinder scattering width.
pub const POLE_KA_LIMIT: f64 = 20.0;

/// Wedge diffraction coefficient, in sqrt-meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionCoefficient {
    pub value: Complex64,
    pub polarization: Polarization,
    pub wedge_n: f64,
}

impl DiffractionCoefficient {
    /// |D|^2, meters.
    pub fn magnitude_squared(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// Wedge diffraction coefficient for exterior angle `n pi`:
///
/// ```text
/// D = e^{i pi/4} sin(pi/n) / (n sqrt(2 pi k))
///     * [ 1/(cos(pi/n) - cos((phi_inc - phi_d)/n))
///         +- 1/(cos(pi/n) - cos((phi_inc + phi_d)/n)) ]
/// ```
///
/// with the upper sign for hard and the lower for soft polarization.
pub fn gtd_coefficient(
    phi_inc_rad: f64,
    phi_d_rad: f64,
    wedge_n: f64,
    wavenumber_k: f64,
    polarization: Polarization,
) -> Result<DiffractionCoefficient> {
    assert!(wavenumber_k > 0.0, "wavenumber must be positive");
    assert!(wedge_n > 0.0, "wedge factor must be positive");

    let cos_face = (PI / wedge_n).cos();
    let den_diff = cos_face - ((phi_inc_rad - phi_d_rad) / wedge_n).cos();
    let den_sum = cos_face - ((phi_inc_rad + phi_d_rad) / wedge_n).cos();
    let smallest = den_diff.abs().min(den_sum.abs());
    if smallest < GTD_BOUNDARY_GUARD {
        return Err(Error::GtdShadowBoundary {
            denominator: smallest,
            guard: GTD_BOUNDARY_GUARD,
        });
    }

    let bracket = match polarization {
        Polarization::Hard => 1.0 / den_diff + 1.0 / den_sum,
        Polarization::Soft => 1.0 / den_diff - 1.0 / den_sum,
    };
    let scale = (PI / wedge_n).sin() / (wedge_n * (2.0 * PI * wavenumber_k).sqrt());
    let value = Complex64::from_polar(1.0, PI / 4.0) * scale * bracket;
    Ok(DiffractionCoefficient {
        value,
        polarization,
        wedge_n,
    })
}

/// Receive path gain of one diffracted corner path:
/// `lambda^2 |D|^2 / (16 pi^2 r r' (r + r')) * exp(-kappa (r + r'))`.
pub fn diffraction_path_gain(path: &CornerPath, scenario: &Scenario) -> Result<PathGain> {
    let d = gtd_coefficient(
        path.phi_inc_rad,
        path.phi_d_rad,
        RIGHT_ANGLE_WEDGE_N,
        scenario.wavenumber(),
        scenario.polarization,
    )?;
    let lambda = scenario.wavelength_m();
    let (r, rp) = (path.r_post_m, path.r_pre_m);
    let total = r + rp;
    let linear = lambda * lambda * d.magnitude_squared() / (16.0 * PI * PI * r * rp * total)
        * (-scenario.absorption_np_per_m * total).exp();
    Ok(PathGain::from_linear(linear))
}

/// Bistatic scattering width of a perfectly conducting cylinder of radius
/// `a` in the high-frequency limit: `sigma = pi a cos(phi'/2)`, meters.
///
/// Valid for `ka > 20` and scattering angles away from forward scatter:
/// `|pi - phi'| > (ka)^(-1/3)`.
pub fn pole_scattering_width(
    radius_m: f64,
    phi_prime_rad: f64,
    wavenumber_k: f64,
) -> Result<f64> {
    assert!(radius_m > 0.0, "pole radius must be positive");
    let ka = wavenumber_k * radius_m;
    if ka <= POLE_KA_LIMIT {
        return Err(Error::BelowHighFrequencyLimit { ka, limit: POLE_KA_LIMIT });
    }
    let separation = (PI - phi_prime_rad).abs();
    let bound = ka.powf(-1.0 / 3.0);
    if separation <= bound {
        return Err(Error::ForwardScatter { separation, bound });
    }
    Ok(PI * radius_m * (phi_prime_rad / 2.0).cos())
}

/// Receive path gain of one pole-scattered path:
/// `lambda^2 sigma exp(-kappa (r1 + r2)) / (2 pi (4 pi)^2 r1 r2 (r1 + r2))`.
pub fn pole_path_gain(path: &PolePath, scenario: &Scenario) -> Result<PathGain> {
    let sigma = pole_scattering_width(
        scenario.pole_radius_m,
        path.phi_prime_rad,
        scenario.wavenumber(),
    )?;
    let lambda = scenario.wavelength_m();
    let (r1, r2) = (path.r1_m, path.r2_m);
    let total = r1 + r2;
    let linear = lambda * lambda * sigma * (-scenario.absorption_np_per_m * total).exp()
        / (2.0 * PI * (4.0 * PI).powi(2) * r1 * r2 * total);
    Ok(PathGain::from_linear(linear))
}
