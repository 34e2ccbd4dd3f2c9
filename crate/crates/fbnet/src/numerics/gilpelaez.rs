//! Gil-Pelaez inversion: recover a CDF from a characteristic function,
//!
//!   F(x) = 1/2 - (1/pi) int_0^inf Im(e^{-i w x} phi(w)) / w dw.
//!
//! After the Im(.) cancellation the integrand is finite at w -> 0, but the
//! quadrature still starts at a small t_min to avoid evaluating at w = 0.
//! The semi-infinite range is covered by doubling panels [T, 2T]; the tail is
//! truncated once a panel's contribution is below the absolute tolerance and
//! |phi(T)|/T has fallen below it as well.

use num_complex::Complex64;

use super::quad::{integrate, Interval, IntegrationSpec};
use crate::{Error, Result};

/// Unclamped Gil-Pelaez CDF estimate; may land slightly outside [0, 1]
/// because of truncation error.
pub fn gil_pelaez_cdf_raw<F: Fn(f64) -> Complex64>(
    charfn: F,
    x: f64,
    spec: &IntegrationSpec,
) -> Result<f64> {
    let t_min = match spec.interval {
        Interval::SemiInfinite { a } if a > 0.0 => a,
        _ => 1e-6,
    };
    let integrand = |w: f64| {
        let rot = Complex64::from_polar(1.0, -w * x);
        (rot * charfn(w)).im / w
    };

    let panel_spec = |lo: f64, hi: f64| {
        IntegrationSpec::finite(lo, hi)
            .expect("valid panel")
            .with_tolerances(spec.rel_tol.max(1e-12), 0.125 * spec.abs_tol)
            .expect("valid tolerances")
            .with_max_subdivisions(spec.max_subdivisions)
    };
    // A panel whose own error bound is already negligible is good enough even
    // if the inner driver could not certify its tighter tolerance.
    let integrate_panel = |lo: f64, hi: f64| -> Result<f64> {
        match integrate(&integrand, &panel_spec(lo, hi)) {
            Ok(v) => Ok(v),
            Err(Error::NonConvergence {
                estimate,
                error_bound,
            }) if error_bound < 0.5 * spec.abs_tol => Ok(estimate),
            Err(e) => Err(e),
        }
    };

    // Panels grow geometrically but are capped at a fixed number of
    // oscillation periods of e^{-iwx} so the inner quadrature stays cheap.
    let period_cap = if x.abs() > 0.0 {
        64.0 * std::f64::consts::TAU / x.abs()
    } else {
        f64::INFINITY
    };

    // First-order tail of int_T^inf e^{-iwx} phi(w)/w dw by integration by
    // parts; the neglected remainder is O(|phi(T)| / (xT)^2).
    let tail_estimate = |t: f64| -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let psi = charfn(t) / t * Complex64::from_polar(1.0, -t * x);
        (psi / Complex64::new(0.0, x)).im
    };

    // The integrand has a finite limit at w -> 0 after the Im cancellation;
    // cover [0, t_min] by a midpoint estimate instead of evaluating at 0.
    let mut total = t_min * integrand(0.5 * t_min);
    let mut lo = t_min;
    let mut hi = (t_min.max(0.5) * 2.0).min(lo + period_cap);
    let mut small_panels = 0usize;
    let mut converged = false;
    const MAX_PANELS: usize = 100_000;

    for _ in 0..MAX_PANELS {
        let contribution = integrate_panel(lo, hi)?;
        total += contribution;
        let phi_norm = charfn(hi).norm();
        let tail_small = phi_norm / hi < spec.abs_tol;
        let correction_accurate =
            x != 0.0 && 4.0 * phi_norm / (x * hi * x * hi) < spec.abs_tol;
        if correction_accurate {
            total += tail_estimate(hi);
            converged = true;
            break;
        }
        if contribution.abs() < spec.abs_tol && tail_small {
            small_panels += 1;
            // two consecutive negligible panels guard against hitting an
            // oscillation null
            if small_panels >= 2 {
                total += tail_estimate(hi);
                converged = true;
                break;
            }
        } else {
            small_panels = 0;
        }
        lo = hi;
        hi = (2.0 * hi).min(lo + period_cap);
    }

    if !converged {
        return Err(Error::NonConvergence {
            estimate: 0.5 - total / std::f64::consts::PI,
            error_bound: f64::NAN,
        });
    }
    Ok(0.5 - total / std::f64::consts::PI)
}

/// CDF value in [0, 1] recovered from a characteristic function.
pub fn gil_pelaez_cdf<F: Fn(f64) -> Complex64>(
    charfn: F,
    x: f64,
    spec: &IntegrationSpec,
) -> Result<f64> {
    Ok(gil_pelaez_cdf_raw(charfn, x, spec)?.clamp(0.0, 1.0))
}

/// Default spec for Gil-Pelaez inversions (abs 1e-9, panels from 1e-6).
#[cfg(test)]
fn default_spec() -> IntegrationSpec {
    IntegrationSpec::semi_infinite(1e-6)
        .expect("valid")
        .with_tolerances(1e-9, 1e-9)
        .expect("valid")
        .with_max_subdivisions(4000)
}
