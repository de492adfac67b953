//! Plan-view resolution of the street-intersection layout: for a given
//! receiver position, the distances and angles consumed by each mechanism
//! model.
//!
//! Coordinate frame: intersection center at the origin, the transmitter
//! street along x (transmitter at negative x), the receiver street along y
//! (receiver at negative y). The four corner buildings occupy the quadrants
//! `|x| > hw && |y| > hw` where `hw` is the street half width.

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Exterior wedge angle factor for a right-angle building corner: the
/// exterior spans `n pi` with `n = 3/2`.
pub const RIGHT_ANGLE_WEDGE_N: f64 = 1.5;

const PI: f64 = std::f64::consts::PI;

/// A 2-D point in the plan-view frame, meters.
pub type Point = [f64; 2];

/// The four corner buildings of the intersection, tagged by compass
/// quadrant (transmitter to the west, receiver to the south).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    NorthWest,
    NorthEast,
    SouthWest,
    SouthEast,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::NorthWest,
        Quadrant::NorthEast,
        Quadrant::SouthWest,
        Quadrant::SouthEast,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Quadrant::NorthWest => "nw",
            Quadrant::NorthEast => "ne",
            Quadrant::SouthWest => "sw",
            Quadrant::SouthEast => "se",
        }
    }

    fn signs(&self) -> [f64; 2] {
        match self {
            Quadrant::NorthWest => [-1.0, 1.0],
            Quadrant::NorthEast => [1.0, 1.0],
            Quadrant::SouthWest => [-1.0, -1.0],
            Quadrant::SouthEast => [1.0, -1.0],
        }
    }
}

/// Resolved geometry for diffraction at one building corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerPath {
    pub quadrant: Quadrant,
    /// Pre-corner distance `r'` (transmitter to corner), m.
    pub r_pre_m: f64,
    /// Post-corner distance `r` (corner to receiver), m.
    pub r_post_m: f64,
    /// Incidence angle measured from the illuminated wall face through the
    /// wedge exterior, radians in `[0, n pi)`.
    pub phi_inc_rad: f64,
    /// Diffraction angle, same convention.
    pub phi_d_rad: f64,
}

/// Resolved geometry for bistatic scatter off one street pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolePath {
    pub quadrant: Quadrant,
    /// Transmitter-to-pole distance, m.
    pub r1_m: f64,
    /// Pole-to-receiver distance, m.
    pub r2_m: f64,
    /// Bistatic scattering angle between the pole-to-transmitter and
    /// pole-to-receiver directions; `pi` is forward scatter.
    pub phi_prime_rad: f64,
}

/// Resolved geometry for the surface-scattered path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisPath {
    /// Transmitter to surface center distance, m.
    pub r_inc_m: f64,
    /// Surface center to receiver distance, m.
    pub r_scat_m: f64,
    /// Incidence angle relative to the surface normal, radians in `[0, pi/2)`.
    pub theta_inc_rad: f64,
    /// Unit vector, transmitter toward surface center.
    pub s_hat: [f64; 3],
    /// Unit vector, surface center toward receiver.
    pub o_hat: [f64; 3],
}

/// Transmitter position implied by the scenario.
pub fn tx_position(scenario: &Scenario) -> Point {
    [-scenario.tx_corner_distance_m, 0.0]
}

/// Receiver position for a distance measured from the intersection center
/// along the receiver street centerline.
pub fn rx_position(rx_corner_distance_m: f64) -> Result<Point> {
    if !(rx_corner_distance_m.is_finite() && rx_corner_distance_m > 0.0) {
        return Err(Error::Validation {
            key: "rx_corner_distance_m".into(),
            message: format!("must be positive, got {rx_corner_distance_m}"),
        });
    }
    Ok([0.0, -rx_corner_distance_m])
}

/// Corner position of one building.
pub fn corner_position(scenario: &Scenario, quadrant: Quadrant) -> Point {
    let hw = scenario.street_half_width_m;
    let [sx, sy] = quadrant.signs();
    [sx * hw, sy * hw]
}

/// Pole position: offset diagonally into the intersection from its corner.
pub fn pole_position(scenario: &Scenario, quadrant: Quadrant) -> Point {
    let [cx, cy] = corner_position(scenario, quadrant);
    let d = scenario.pole_setback_m / std::f64::consts::SQRT_2;
    let [sx, sy] = quadrant.signs();
    [cx - sx * d, cy - sy * d]
}

/// Surface center: on the west-facing wall of the south-east corner
/// building, immediately below the corner so the upper edge touches it.
/// The outward normal points west, back toward the transmitter.
pub fn ris_center(scenario: &Scenario) -> Point {
    let hw = scenario.street_half_width_m;
    [hw, -(hw + scenario.ris_width_m / 2.0)]
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn ensure_outside_buildings(scenario: &Scenario, p: Point, who: &str) -> Result<()> {
    let hw = scenario.street_half_width_m;
    if p[0].abs() > hw && p[1].abs() > hw {
        return Err(Error::Geometry(format!(
            "{who} at ({:.3}, {:.3}) lies inside a building footprint",
            p[0], p[1]
        )));
    }
    Ok(())
}

fn ensure_separated(r: f64, what: &str) -> Result<f64> {
    if r <= 1e-9 {
        return Err(Error::Geometry(format!("{what} distance vanishes ({r:.3e} m)")));
    }
    Ok(r)
}

/// Angle of direction `v` (from the corner) measured from the wall face
/// that runs along the transmitter street, sweeping through the wedge
/// exterior. Returns a value in `[0, 2 pi)`; exterior directions fall in
/// `[0, 3 pi / 2]`.
fn wedge_angle(quadrant: Quadrant, v: Point) -> f64 {
    let [sx, sy] = quadrant.signs();
    // Face along the transmitter street points away from the intersection
    // in x; the sweep orientation keeps the exterior first.
    let face_angle = if sx > 0.0 { 0.0 } else { PI };
    let orientation = -sx * sy;
    let mut a = orientation * (v[1].atan2(v[0]) - face_angle);
    a %= 2.0 * PI;
    if a < 0.0 {
        a += 2.0 * PI;
    }
    a
}

/// Diffraction geometry for all four corners, receiver on the cross-street
/// centerline.
pub fn corner_paths(scenario: &Scenario, rx_corner_distance_m: f64) -> Result<[CornerPath; 4]> {
    corner_paths_between(scenario, tx_position(scenario), rx_position(rx_corner_distance_m)?)
}

/// Diffraction geometry for arbitrary terminal positions.
pub fn corner_paths_between(scenario: &Scenario, tx: Point, rx: Point) -> Result<[CornerPath; 4]> {
    ensure_outside_buildings(scenario, tx, "transmitter")?;
    ensure_outside_buildings(scenario, rx, "receiver")?;
    let n_pi = RIGHT_ANGLE_WEDGE_N * PI;
    let mut out = [None; 4];
    for (i, q) in Quadrant::ALL.into_iter().enumerate() {
        let c = corner_position(scenario, q);
        let r_pre = ensure_separated(dist(tx, c), "transmitter-to-corner")?;
        let r_post = ensure_separated(dist(rx, c), "corner-to-receiver")?;
        let phi_inc = wedge_angle(q, [tx[0] - c[0], tx[1] - c[1]]);
        let phi_d = wedge_angle(q, [rx[0] - c[0], rx[1] - c[1]]);
        for (label, phi) in [("transmitter", phi_inc), ("receiver", phi_d)] {
            if phi > n_pi {
                return Err(Error::Geometry(format!(
                    "{label} direction lies inside the {} corner wedge (angle {phi:.4} > {n_pi:.4})",
                    q.tag()
                )));
            }
        }
        out[i] = Some(CornerPath {
            quadrant: q,
            r_pre_m: r_pre,
            r_post_m: r_post,
            phi_inc_rad: phi_inc,
            phi_d_rad: phi_d,
        });
    }
    Ok(out.map(|p| p.expect("all four corners resolved")))
}

/// Pole-scatter geometry for all four poles, receiver on the cross-street
/// centerline.
pub fn pole_paths(scenario: &Scenario, rx_corner_distance_m: f64) -> Result<[PolePath; 4]> {
    pole_paths_between(scenario, tx_position(scenario), rx_position(rx_corner_distance_m)?)
}

/// Pole-scatter geometry for arbitrary terminal positions.
pub fn pole_paths_between(scenario: &Scenario, tx: Point, rx: Point) -> Result<[PolePath; 4]> {
    ensure_outside_buildings(scenario, tx, "transmitter")?;
    ensure_outside_buildings(scenario, rx, "receiver")?;
    let mut out = [None; 4];
    for (i, q) in Quadrant::ALL.into_iter().enumerate() {
        let p = pole_position(scenario, q);
        let r1 = ensure_separated(dist(tx, p), "transmitter-to-pole")?;
        let r2 = ensure_separated(dist(rx, p), "pole-to-receiver")?;
        let to_tx = [(tx[0] - p[0]) / r1, (tx[1] - p[1]) / r1];
        let to_rx = [(rx[0] - p[0]) / r2, (rx[1] - p[1]) / r2];
        let dot = (to_tx[0] * to_rx[0] + to_tx[1] * to_rx[1]).clamp(-1.0, 1.0);
        out[i] = Some(PolePath {
            quadrant: q,
            r1_m: r1,
            r2_m: r2,
            phi_prime_rad: dot.acos(),
        });
    }
    Ok(out.map(|p| p.expect("all four poles resolved")))
}

/// Surface path geometry, receiver on the cross-street centerline.
pub fn ris_path(scenario: &Scenario, rx_corner_distance_m: f64) -> Result<RisPath> {
    ris_path_between(scenario, tx_position(scenario), rx_position(rx_corner_distance_m)?)
}

/// Surface path geometry for arbitrary terminal positions.
pub fn ris_path_between(scenario: &Scenario, tx: Point, rx: Point) -> Result<RisPath> {
    ensure_outside_buildings(scenario, tx, "transmitter")?;
    ensure_outside_buildings(scenario, rx, "receiver")?;
    let c = ris_center(scenario);
    let normal = [-1.0, 0.0];
    let r_inc = ensure_separated(dist(tx, c), "transmitter-to-surface")?;
    let r_scat = ensure_separated(dist(c, rx), "surface-to-receiver")?;
    let s_hat = [(c[0] - tx[0]) / r_inc, (c[1] - tx[1]) / r_inc];
    let o_hat = [(rx[0] - c[0]) / r_scat, (rx[1] - c[1]) / r_scat];

    let cos_inc = -(s_hat[0] * normal[0] + s_hat[1] * normal[1]);
    if cos_inc <= 0.0 {
        return Err(Error::Geometry(
            "transmitter does not illuminate the surface front face".into(),
        ));
    }
    let facing = o_hat[0] * normal[0] + o_hat[1] * normal[1];
    if facing <= 0.0 {
        return Err(Error::NotIlluminated(format!(
            "receiver at ({:.3}, {:.3}) is behind the surface plane",
            rx[0], rx[1]
        )));
    }
    Ok(RisPath {
        r_inc_m: r_inc,
        r_scat_m: r_scat,
        theta_inc_rad: cos_inc.clamp(-1.0, 1.0).acos(),
        s_hat: [s_hat[0], s_hat[1], 0.0],
        o_hat: [o_hat[0], o_hat[1], 0.0],
    })
}
