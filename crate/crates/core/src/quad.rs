//! Adaptive Simpson quadrature for the smooth 1-D integrands used by the
//! exact effective-area reduction.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to the requested relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    assert!(b >= a, "integration bounds must be ordered");
    assert!(rel_tol > 0.0, "tolerance must be positive");
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    // absolute floor keeps the recursion finite when the integral is ~0
    let scale = whole.abs().max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, rel_tol * scale, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "quadrature failed to converge on [{a:.6}, {b:.6}]: residual {:.3e} above {:.3e}",
            delta.abs(),
            15.0 * tol
        )));
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|x: f64| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_matches_series_value() {
        // int_0^1 exp(-x^2) dx = 0.7468241328124271 (series evaluation)
        let v = integrate(&|x: f64| (-x * x).exp(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 0.7468241328124271).abs() < 1e-9, "{v}");
    }

    #[test]
    fn sharp_gaussian_converges() {
        // width 1e-4 inside a unit interval
        let c = 1e8;
        let v = integrate(&|x: f64| (-c * x * x).exp(), 0.0, 1.0, 1e-8).unwrap();
        let exact = 0.5 * (std::f64::consts::PI / c).sqrt();
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(&|_| 1.0, 1.0, 1.0, 1e-8).unwrap(), 0.0);
    }
}
