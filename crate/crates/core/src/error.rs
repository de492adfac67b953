//! Error types shared across the crate.

/// Errors produced by scenario validation, geometry resolution, the
/// closed-form mechanism models and the Monte Carlo field oracle.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value failed validation; `key` names the offending field.
    #[error("invalid configuration for `{key}`: {message}")]
    Validation { key: String, message: String },

    /// The requested layout cannot be resolved (e.g. a terminal inside a building).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// GTD diffraction evaluated too close to a shadow or reflection boundary.
    #[error(
        "GTD invalid near shadow boundary: denominator magnitude {denominator:.3e} \
         is below the guard {guard:.1e}"
    )]
    GtdShadowBoundary { denominator: f64, guard: f64 },

    /// Cylinder scattering width requested below its high-frequency validity limit.
    #[error("below high-frequency limit: ka = {ka:.3} must exceed {limit}")]
    BelowHighFrequencyLimit { ka: f64, limit: f64 },

    /// Cylinder scattering width requested too close to the forward-scatter direction.
    #[error(
        "scattering angle too close to forward scatter: |pi - phi'| = {separation:.4} \
         must exceed (ka)^(-1/3) = {bound:.4}"
    )]
    ForwardScatter { separation: f64, bound: f64 },

    /// The receiver sits behind the reflecting surface plane.
    #[error("receiver not illuminated: {0}")]
    NotIlluminated(String),

    /// A numerical routine (quadrature, factorization) failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Two gridded fields do not share the same sampling.
    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Error {
    /// Short machine-readable code used when a mechanism is reported absent
    /// from a sweep instead of aborting it.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "invalid_config",
            Error::Geometry(_) => "geometry",
            Error::GtdShadowBoundary { .. } => "gtd_shadow_boundary",
            Error::BelowHighFrequencyLimit { .. } => "pole_below_ka_limit",
            Error::ForwardScatter { .. } => "pole_forward_scatter",
            Error::NotIlluminated(_) => "ris_not_illuminated",
            Error::Numeric(_) => "numeric",
            Error::Shape(_) => "shape",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
