//! Distance sweeps: evaluate every mechanism over a grid of receiver
//! positions, aggregate the ambient total, and emit curve tables.

use std::io::Write;

use rayon::prelude::*;

use crate::ambient::{diffraction_path_gain, pole_path_gain};
use crate::error::{Error, Result};
use crate::gain::PathGain;
use crate::geometry::{corner_paths, pole_paths, ris_path, Quadrant};
use crate::ris::{ideal_ris_path_gain, spread_ris_path_gain};
use crate::scenario::Scenario;

/// A mechanism either contributes a gain or is absent with a reason code;
/// zeros would silently corrupt the ambient total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechanismOutcome {
    Present(PathGain),
    Absent(&'static str),
}

impl MechanismOutcome {
    pub fn gain(&self) -> Option<PathGain> {
        match self {
            MechanismOutcome::Present(g) => Some(*g),
            MechanismOutcome::Absent(_) => None,
        }
    }

    pub fn reason(&self) -> Option<&'static str> {
        match self {
            MechanismOutcome::Present(_) => None,
            MechanismOutcome::Absent(r) => Some(r),
        }
    }

    fn from_result(r: Result<PathGain>) -> Result<Self> {
        match r {
            Ok(g) => Ok(MechanismOutcome::Present(g)),
            // validity-guard failures become absences; anything else aborts
            Err(
                e @ (Error::GtdShadowBoundary { .. }
                | Error::BelowHighFrequencyLimit { .. }
                | Error::ForwardScatter { .. }
                | Error::NotIlluminated(_)),
            ) => Ok(MechanismOutcome::Absent(e.reason_code())),
            Err(e) => Err(e),
        }
    }
}

/// All mechanism gains at one receiver distance. Corner and pole entries
/// are ordered `[nw, ne, sw, se]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rx_distance_m: f64,
    pub corners: [MechanismOutcome; 4],
    pub poles: [MechanismOutcome; 4],
    /// Incoherent sum of every present ambient mechanism.
    pub ambient_total: PathGain,
    pub ris_ideal: MechanismOutcome,
    pub ris_spread: MechanismOutcome,
    /// `ris_spread.db - ambient_total.db`; absent when either side is.
    pub ris_advantage_db: Option<f64>,
}

/// Sweep output: rows sorted by distance plus the full scenario echo.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub rows: Vec<SweepRow>,
}

/// Default receiver grid: 20 m to 200 m, logarithmic, 40 points.
pub fn default_distance_grid() -> Vec<f64> {
    let (start, stop, n) = (20.0f64, 200.0f64, 40);
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            start * (stop / start).powf(t)
        })
        .collect()
}

fn evaluate_row(scenario: &Scenario, rx_distance_m: f64) -> Result<SweepRow> {
    let corner_geo = corner_paths(scenario, rx_distance_m)?;
    let pole_geo = pole_paths(scenario, rx_distance_m)?;

    let mut corners = [MechanismOutcome::Absent("unevaluated"); 4];
    let mut poles = [MechanismOutcome::Absent("unevaluated"); 4];
    for (i, q) in Quadrant::ALL.into_iter().enumerate() {
        let c = corner_geo.iter().find(|p| p.quadrant == q).expect("four corners");
        let p = pole_geo.iter().find(|p| p.quadrant == q).expect("four poles");
        corners[i] = MechanismOutcome::from_result(diffraction_path_gain(c, scenario))?;
        poles[i] = MechanismOutcome::from_result(pole_path_gain(p, scenario))?;
    }

    let ambient_total = PathGain::sum(
        corners
            .iter()
            .chain(poles.iter())
            .filter_map(|m| m.gain()),
    );

    let (ris_ideal, ris_spread) = match ris_path(scenario, rx_distance_m) {
        Ok(path) => (
            MechanismOutcome::Present(ideal_ris_path_gain(&path, scenario)),
            MechanismOutcome::Present(spread_ris_path_gain(&path, scenario)),
        ),
        Err(e @ Error::NotIlluminated(_)) => {
            let code = e.reason_code();
            (MechanismOutcome::Absent(code), MechanismOutcome::Absent(code))
        }
        Err(e) => return Err(e),
    };

    let ris_advantage_db = match (ris_spread.gain(), ambient_total.linear() > 0.0) {
        (Some(g), true) => Some(g.db() - ambient_total.db()),
        _ => None,
    };

    Ok(SweepRow {
        rx_distance_m,
        corners,
        poles,
        ambient_total,
        ris_ideal,
        ris_spread,
        ris_advantage_db,
    })
}

/// Evaluate every mechanism at each receiver distance.
///
/// Distances must be positive, strictly ascending and outside the
/// intersection footprint. Mechanisms that fail a validity guard are
/// recorded absent with a reason code; the sweep itself only fails on
/// configuration or geometry errors.
pub fn run_sweep(scenario: &Scenario, rx_distances_m: &[f64]) -> Result<SweepResult> {
    scenario.validate()?;
    if rx_distances_m.is_empty() {
        return Err(Error::Validation {
            key: "rx_distances_m".into(),
            message: "distance list must not be empty".into(),
        });
    }
    if !rx_distances_m.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Validation {
            key: "rx_distances_m".into(),
            message: "distances must be strictly ascending".into(),
        });
    }
    let hw = scenario.street_half_width_m;
    if rx_distances_m[0] <= hw {
        return Err(Error::Validation {
            key: "rx_distances_m".into(),
            message: format!(
                "distances must lie outside the intersection footprint (> {hw} m), got {}",
                rx_distances_m[0]
            ),
        });
    }

    let rows: Result<Vec<SweepRow>> = rx_distances_m
        .par_iter()
        .map(|&d| evaluate_row(scenario, d))
        .collect();
    Ok(SweepResult {
        scenario: scenario.clone(),
        rows: rows?,
    })
}

const MECHANISM_COLUMNS: [&str; 4] = ["nw", "ne", "sw", "se"];

fn push_outcome(record: &mut Vec<String>, outcome: &MechanismOutcome) {
    match outcome {
        MechanismOutcome::Present(g) => {
            record.push(format!("{:e}", g.linear()));
            record.push(format!("{:e}", g.db()));
            record.push(String::new());
        }
        MechanismOutcome::Absent(reason) => {
            record.push(String::new());
            record.push(String::new());
            record.push((*reason).to_string());
        }
    }
}

/// Write the sweep as CSV: `#`-prefixed metadata lines carrying the full
/// scenario echo, a header row with units suffixes, then one row per
/// distance. Absent mechanisms appear as empty cells with the reason in
/// the sibling `_reason` column.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# ris-ambient sweep v{}", env!("CARGO_PKG_VERSION"))?;
    writeln!(
        out,
        "# rx distances measured from the intersection center along the receiver street centerline"
    )?;
    for (k, v) in result.scenario.to_key_values() {
        writeln!(out, "# {k} = {v}")?;
    }

    let mut header: Vec<String> = vec!["rx_distance_m".into()];
    for kind in ["corner", "pole"] {
        for q in MECHANISM_COLUMNS {
            header.push(format!("{kind}_{q}_linear"));
            header.push(format!("{kind}_{q}_db"));
            header.push(format!("{kind}_{q}_reason"));
        }
    }
    header.extend(
        [
            "ambient_total_linear",
            "ambient_total_db",
            "ris_ideal_linear",
            "ris_ideal_db",
            "ris_ideal_reason",
            "ris_spread_linear",
            "ris_spread_db",
            "ris_spread_reason",
            "ris_advantage_db",
        ]
        .map(String::from),
    );

    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&header)?;
    for row in &result.rows {
        let mut record: Vec<String> = vec![format!("{:e}", row.rx_distance_m)];
        for outcome in &row.corners {
            push_outcome(&mut record, outcome);
        }
        for outcome in &row.poles {
            push_outcome(&mut record, outcome);
        }
        record.push(format!("{:e}", row.ambient_total.linear()));
        record.push(format!("{:e}", row.ambient_total.db()));
        push_outcome(&mut record, &row.ris_ideal);
        push_outcome(&mut record, &row.ris_spread);
        record.push(
            row.ris_advantage_db
                .map(|v| format!("{v:e}"))
                .unwrap_or_default(),
        );
        writer.write_record(&record)?;
    }
    writer.flush()
}

/// CSV bytes of a sweep result.
pub fn to_csv_bytes(result: &SweepResult) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{AngleSpreadSpec, Polarization, ScatteredSegments};

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    #[test]
    fn default_grid_spans_twenty_to_two_hundred() {
        let g = default_distance_grid();
        assert_eq!(g.len(), 40);
        assert!((g[0] - 20.0).abs() < 1e-12);
        assert!((g[39] - 200.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        // logarithmic: constant ratio
        let r0 = g[1] / g[0];
        assert!(g.windows(2).all(|w| rel_eq(w[1] / w[0], r0, 1e-9)));
    }

    #[test]
    fn ambient_total_is_the_sum_of_present_mechanisms() {
        let s = Scenario::default();
        let result = run_sweep(&s, &default_distance_grid()).unwrap();
        for row in &result.rows {
            let sum: f64 = row
                .corners
                .iter()
                .chain(row.poles.iter())
                .filter_map(|m| m.gain().map(|g| g.linear()))
                .sum();
            assert!(rel_eq(sum, row.ambient_total.linear(), 1e-12));
            assert_eq!(
                row.ris_advantage_db.unwrap(),
                row.ris_spread.gain().unwrap().db() - row.ambient_total.db()
            );
        }
    }

    #[test]
    fn every_mechanism_is_monotone_beyond_twenty_meters() {
        let s = Scenario::default();
        let result = run_sweep(&s, &default_distance_grid()).unwrap();
        for pair in result.rows.windows(2) {
            for (a, b) in pair[0]
                .corners
                .iter()
                .chain(pair[0].poles.iter())
                .zip(pair[1].corners.iter().chain(pair[1].poles.iter()))
            {
                assert!(b.gain().unwrap().linear() <= a.gain().unwrap().linear());
            }
            assert!(
                pair[1].ris_ideal.gain().unwrap().linear()
                    <= pair[0].ris_ideal.gain().unwrap().linear()
            );
        }
    }

    #[test]
    fn low_frequency_marks_poles_absent_without_aborting() {
        let mut s = Scenario::default();
        s.frequency_hz = 1e9; // ka ~ 2.5, far below the validity limit
        let result = run_sweep(&s, &[30.0, 60.0]).unwrap();
        for row in &result.rows {
            for p in &row.poles {
                assert_eq!(p.reason(), Some("pole_below_ka_limit"));
            }
            for c in &row.corners {
                assert!(c.gain().is_some());
            }
            // ambient then consists of corners alone
            let corner_sum: f64 = row.corners.iter().filter_map(|m| m.gain()).map(|g| g.linear()).sum();
            assert!(rel_eq(corner_sum, row.ambient_total.linear(), 1e-12));
        }
    }

    #[test]
    fn distances_inside_the_intersection_are_rejected() {
        let s = Scenario::default();
        assert!(run_sweep(&s, &[]).is_err());
        assert!(run_sweep(&s, &[5.0, 30.0]).is_err());
        assert!(run_sweep(&s, &[30.0, 25.0]).is_err());
    }

    #[test]
    fn pole_scatter_dominates_corner_diffraction_at_28_ghz() {
        let s = Scenario::default();
        let result = run_sweep(&s, &default_distance_grid()).unwrap();
        for row in &result.rows {
            let poles: f64 = row.poles.iter().filter_map(|m| m.gain()).map(|g| g.linear()).sum();
            let corners: f64 =
                row.corners.iter().filter_map(|m| m.gain()).map(|g| g.linear()).sum();
            assert!(
                poles > corners,
                "at {} m poles {poles:e} vs corners {corners:e}",
                row.rx_distance_m
            );
        }
    }

    #[test]
    fn soft_polarization_is_weaker_than_hard() {
        let hard = Scenario::default();
        let soft = Scenario { polarization: Polarization::Soft, ..hard.clone() };
        let rh = run_sweep(&hard, &default_distance_grid()).unwrap();
        let rs = run_sweep(&soft, &default_distance_grid()).unwrap();
        for (a, b) in rh.rows.iter().zip(&rs.rows) {
            let sum = |row: &SweepRow| -> f64 {
                row.corners.iter().filter_map(|m| m.gain()).map(|g| g.linear()).sum()
            };
            assert!(sum(b) <= sum(a), "at {} m", a.rx_distance_m);
        }
    }

    #[test]
    fn spread_curve_sits_a_constant_distance_below_ideal() {
        let mut s = Scenario::default();
        s.ris_width_m = 0.3;
        s.ris_height_m = 0.3;
        let result = run_sweep(&s, &default_distance_grid()).unwrap();
        for row in &result.rows {
            let delta = row.ris_spread.gain().unwrap().db() - row.ris_ideal.gain().unwrap().db();
            assert!((delta + 14.021611).abs() < 0.5, "{delta}");
        }
    }

    #[test]
    fn eight_ghz_widens_nothing_but_the_pole_lead() {
        // the pole-over-diffraction gap grows with frequency
        let s28 = Scenario::default();
        let s8 = Scenario { frequency_hz: 8e9, ..s28.clone() };
        let r28 = run_sweep(&s28, &default_distance_grid()).unwrap();
        let r8 = run_sweep(&s8, &default_distance_grid()).unwrap();
        for (a, b) in r28.rows.iter().zip(&r8.rows) {
            let gap = |row: &SweepRow| {
                let p: f64 = row.poles.iter().filter_map(|m| m.gain()).map(|g| g.linear()).sum();
                let c: f64 = row.corners.iter().filter_map(|m| m.gain()).map(|g| g.linear()).sum();
                10.0 * (p / c).log10()
            };
            assert!(gap(a) > gap(b), "at {} m", a.rx_distance_m);
        }
    }

    #[test]
    fn csv_structure_and_round_trip() {
        let mut s = Scenario::default();
        s.angle_spread = AngleSpreadSpec {
            azimuth_rms_rad: 0.24434609527920614,
            elevation_rms_rad: 0.010471975511965976,
            scattered_segments: ScatteredSegments::Both,
        };
        let result = run_sweep(&s, &[25.0]).unwrap();
        let bytes = to_csv_bytes(&result);
        let text = String::from_utf8(bytes.clone()).unwrap();

        let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        assert!(comments.iter().any(|l| l.contains("frequency_hz")));
        assert!(comments.iter().any(|l| l.contains("polarization")));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 2, "header plus one row");

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(bytes.as_slice());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(&headers[0], "rx_distance_m");
        let record = reader.records().next().unwrap().unwrap();
        assert_eq!(record.len(), headers.len());

        let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
        let row = &result.rows[0];
        // parsing recovers the exact values
        let parsed: f64 = record[col("ambient_total_linear")].parse().unwrap();
        assert_eq!(parsed.to_bits(), row.ambient_total.linear().to_bits());
        let lin: f64 = record[col("corner_se_linear")].parse().unwrap();
        let db: f64 = record[col("corner_se_db")].parse().unwrap();
        assert!((db - 10.0 * lin.log10()).abs() < 1e-9);
        assert_eq!(&record[col("corner_se_reason")], "");
        let adv: f64 = record[col("ris_advantage_db")].parse().unwrap();
        assert_eq!(adv.to_bits(), row.ris_advantage_db.unwrap().to_bits());
    }

    #[test]
    fn absent_mechanisms_leave_empty_cells_with_reasons() {
        let mut s = Scenario::default();
        s.frequency_hz = 1e9;
        let result = run_sweep(&s, &[30.0]).unwrap();
        let bytes = to_csv_bytes(&result);
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(bytes.as_slice());
        let headers = reader.headers().unwrap().clone();
        let record = reader.records().next().unwrap().unwrap();
        let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
        assert_eq!(&record[col("pole_nw_linear")], "");
        assert_eq!(&record[col("pole_nw_db")], "");
        assert_eq!(&record[col("pole_nw_reason")], "pole_below_ka_limit");
    }
}
