//! Experiment description: carrier, street layout dimensions, pole and
//! surface parameters, absorption and channel angle spreads.
//!
//! A [`Scenario`] is a validated configuration. It can be built directly,
//! from a TOML document, or from a TOML document plus `key=value` override
//! strings. Unknown keys are a hard error so that typos cannot silently
//! fall back to defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Which link segments carry multipath scatter and therefore decorrelate
/// the field across the aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteredSegments {
    /// Both the transmitter-to-surface and surface-to-receiver segments scatter.
    Both,
    /// Only the surface-to-receiver segment scatters; the incident segment is
    /// a clean line of sight.
    RisToRxOnly,
    /// No scatter on either segment; reproduces the ideal co-phased case.
    None,
}

impl ScatteredSegments {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScatteredSegments::Both => "both",
            ScatteredSegments::RisToRxOnly => "ris_to_rx_only",
            ScatteredSegments::None => "none",
        }
    }
}

/// Boundary condition for wedge diffraction: electric field parallel (hard)
/// or perpendicular (soft) to the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Hard,
    Soft,
}

impl Polarization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarization::Hard => "hard",
            Polarization::Soft => "soft",
        }
    }
}

/// RMS angle spreads of the power angular spectrum, in radians, plus the
/// segment assignment of the scatter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSpreadSpec {
    /// RMS azimuth spread, radians.
    pub azimuth_rms_rad: f64,
    /// RMS elevation spread, radians.
    pub elevation_rms_rad: f64,
    pub scattered_segments: ScatteredSegments,
}

impl AngleSpreadSpec {
    /// Spread spec with no decorrelation at all (ideal co-phased case).
    pub fn none() -> Self {
        Self {
            azimuth_rms_rad: 0.0,
            elevation_rms_rad: 0.0,
            scattered_segments: ScatteredSegments::None,
        }
    }
}

/// Validated scenario description.
///
/// Layout convention (plan view, 2-D): two perpendicular streets of equal
/// width crossing at the origin. The transmitter sits on the centerline of
/// the first street at `(-tx_corner_distance_m, 0)`; the receiver on the
/// centerline of the cross street at `(0, -d)` for a distance `d` from the
/// intersection center. Antenna and surface mounting heights are equal, so
/// elevation enters only through the elevation angle spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Carrier frequency, Hz.
    pub frequency_hz: f64,
    /// Transmitter distance from the intersection center, m.
    pub tx_corner_distance_m: f64,
    /// Half width of each street, m.
    pub street_half_width_m: f64,
    /// Street pole radius `a`, m.
    pub pole_radius_m: f64,
    /// Diagonal offset of each pole from its building corner into the
    /// intersection, m.
    pub pole_setback_m: f64,
    /// Power absorption exponent `kappa`, Np/m, applied as
    /// `exp(-kappa * total path length)` to every mechanism.
    pub absorption_np_per_m: f64,
    /// Reflecting surface width (horizontal, along the wall), m.
    pub ris_width_m: f64,
    /// Reflecting surface height (vertical), m.
    pub ris_height_m: f64,
    pub angle_spread: AngleSpreadSpec,
    pub polarization: Polarization,
}

impl Default for Scenario {
    /// Canonical urban layout: 28 GHz, transmitter 100 m up the street,
    /// 20 m wide streets, 0.12 m poles set back 1 m from each corner,
    /// 0.005 Np/m absorption, a 0.3 x 0.3 m surface and 14deg/0.6deg
    /// azimuth/elevation spreads on both segments.
    fn default() -> Self {
        Scenario {
            frequency_hz: 28e9,
            tx_corner_distance_m: 100.0,
            street_half_width_m: 10.0,
            pole_radius_m: 0.12,
            pole_setback_m: 1.0,
            absorption_np_per_m: 0.005,
            ris_width_m: 0.3,
            ris_height_m: 0.3,
            angle_spread: AngleSpreadSpec {
                azimuth_rms_rad: 14f64.to_radians(),
                elevation_rms_rad: 0.6f64.to_radians(),
                scattered_segments: ScatteredSegments::Both,
            },
            polarization: Polarization::Hard,
        }
    }
}

impl Scenario {
    /// Wavelength `lambda = c / f`, m.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_PER_S / self.frequency_hz
    }

    /// Wavenumber `k = 2 pi / lambda`, 1/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_m()
    }

    /// Surface area `w * h`, m^2.
    pub fn ris_area_m2(&self) -> f64 {
        self.ris_width_m * self.ris_height_m
    }

    /// Check every field against its admissible range. Errors name the key.
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation {
                    key: key.into(),
                    message: format!("must be a positive finite number, got {v}"),
                });
            }
            Ok(())
        }
        fn non_negative(key: &str, v: f64) -> Result<()> {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation {
                    key: key.into(),
                    message: format!("must be a non-negative finite number, got {v}"),
                });
            }
            Ok(())
        }

        positive("frequency_hz", self.frequency_hz)?;
        positive("tx_corner_distance_m", self.tx_corner_distance_m)?;
        positive("street_half_width_m", self.street_half_width_m)?;
        positive("pole_radius_m", self.pole_radius_m)?;
        positive("pole_setback_m", self.pole_setback_m)?;
        non_negative("absorption_np_per_m", self.absorption_np_per_m)?;
        positive("ris_width_m", self.ris_width_m)?;
        positive("ris_height_m", self.ris_height_m)?;
        non_negative("angle_spread.azimuth_rms_rad", self.angle_spread.azimuth_rms_rad)?;
        non_negative(
            "angle_spread.elevation_rms_rad",
            self.angle_spread.elevation_rms_rad,
        )?;

        // Poles must stay inside the open intersection area.
        let diag = self.pole_setback_m / std::f64::consts::SQRT_2;
        if diag >= self.street_half_width_m {
            return Err(Error::Validation {
                key: "pole_setback_m".into(),
                message: format!(
                    "diagonal offset {diag:.3} m moves the pole past the intersection \
                     center (street half width {} m)",
                    self.street_half_width_m
                ),
            });
        }
        if self.tx_corner_distance_m <= self.street_half_width_m {
            return Err(Error::Validation {
                key: "tx_corner_distance_m".into(),
                message: "transmitter must sit outside the intersection footprint".into(),
            });
        }
        Ok(())
    }

    /// Parse and validate a TOML document. Unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        Self::from_toml_str_with_overrides(text, &[])
    }

    /// Parse a TOML document, apply dotted-key `key=value` overrides, then
    /// validate. Overrides are applied to the raw document, so an override
    /// of an unknown key fails exactly like an unknown key in the file.
    pub fn from_toml_str_with_overrides(text: &str, overrides: &[String]) -> Result<Scenario> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Validation {
            key: "<config>".into(),
            message: format!("TOML parse error: {e}"),
        })?;
        for spec in overrides {
            apply_override(&mut table, spec)?;
        }
        let scenario: Scenario = table.try_into().map_err(|e| Error::Validation {
            key: "<config>".into(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Scenario echo as ordered key/value pairs, used for output metadata.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        vec![
            ("frequency_hz".into(), format!("{:e}", self.frequency_hz)),
            ("tx_corner_distance_m".into(), format!("{}", self.tx_corner_distance_m)),
            ("street_half_width_m".into(), format!("{}", self.street_half_width_m)),
            ("pole_radius_m".into(), format!("{}", self.pole_radius_m)),
            ("pole_setback_m".into(), format!("{}", self.pole_setback_m)),
            ("absorption_np_per_m".into(), format!("{}", self.absorption_np_per_m)),
            ("ris_width_m".into(), format!("{}", self.ris_width_m)),
            ("ris_height_m".into(), format!("{}", self.ris_height_m)),
            (
                "angle_spread.azimuth_rms_rad".into(),
                format!("{}", self.angle_spread.azimuth_rms_rad),
            ),
            (
                "angle_spread.elevation_rms_rad".into(),
                format!("{}", self.angle_spread.elevation_rms_rad),
            ),
            (
                "angle_spread.scattered_segments".into(),
                self.angle_spread.scattered_segments.as_str().into(),
            ),
            ("polarization".into(), self.polarization.as_str().into()),
            ("wavelength_m".into(), format!("{:e}", self.wavelength_m())),
        ]
    }
}

/// Apply one `dotted.key=value` override to a parsed TOML tree.
fn apply_override(root: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| Error::Validation {
        key: spec.into(),
        message: "override must have the form key=value".into(),
    })?;
    let path = path.trim();
    let raw = raw.trim();
    if path.is_empty() {
        return Err(Error::Validation {
            key: spec.into(),
            message: "override key must not be empty".into(),
        });
    }

    let value = parse_override_value(raw).ok_or_else(|| Error::Validation {
        key: path.into(),
        message: format!("cannot parse override value `{raw}`"),
    })?;

    let mut table = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        if i + 1 == segments.len() {
            table.insert(seg.to_string(), value);
            return Ok(());
        }
        table = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()))
            .as_table_mut()
            .ok_or_else(|| Error::Validation {
                key: path.into(),
                message: format!("`{}` is not a table", segments[..=i].join(".")),
            })?;
    }
    unreachable!("override path has at least one segment");
}

/// Interpret an override value as TOML: numbers and booleans parse natively,
/// anything else falls back to a string.
fn parse_override_value(raw: &str) -> Option<toml::Value> {
    let as_toml = format!("v = {raw}");
    if let Ok(t) = as_toml.parse::<toml::Table>() {
        if let Some(v) = t.get("v") {
            return Some(v.clone());
        }
    }
    let quoted = format!("v = \"{raw}\"");
    quoted.parse::<toml::Table>().ok().and_then(|t| t.get("v").cloned())
}
