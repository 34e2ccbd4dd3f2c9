//! Gauss hypergeometric function 2F1(a, b; c; z) for the parameter pattern
//! needed by the interference Laplace transforms: c > b > 0 and z on the
//! non-positive real axis (or the imaginary axis, for characteristic
//! functions).
//!
//! Evaluation is by the Euler integral
//!
//!   2F1(a,b;c;z) = G(c)/(G(b)G(c-b)) int_0^1 t^{b-1}(1-t)^{c-b-1}(1-zt)^{-a} dt
//!
//! with the endpoint singularities removed by the substitutions t = s^{1/b}
//! (left) and 1-t = w^{1/(c-b)} (right), so the adaptive quadrature only ever
//! sees smooth integrands. The defining power series is used for small |z|
//! and doubles as an independent cross-check.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use super::quad::{integrate, integrate_complex, IntegrationSpec};
use crate::{Error, Result};

fn check_params(b: f64, c: f64) -> Result<()> {
    if !(c > b && b > 0.0) {
        return Err(Error::Domain(format!(
            "2F1 evaluation requires c > b > 0, got b={b}, c={c}"
        )));
    }
    Ok(())
}

/// Power-series evaluation of 2F1(a, b; c; z), valid for |z| < 1.
///
/// Converges geometrically for |z| < 0.5, which is the regime where it is
/// used both as the fast path and as the series oracle.
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "2F1 series requires |z| < 1, got {z}"
        )));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..1000 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= 0.25 * f64::EPSILON * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        estimate: sum,
        error_bound: term.abs(),
    })
}

fn euler_prefactor(b: f64, c: f64) -> f64 {
    (ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b)).exp()
}

/// Euler-integral evaluation for real z <= 0, after singularity-removing
/// substitutions at both endpoints.
fn euler_real(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let g = |t: f64| (1.0 - z * t).powf(-a);
    let cb = c - b;
    let spec = |lo: f64, hi: f64| {
        IntegrationSpec::finite(lo, hi)
            .expect("valid interval")
            .with_tolerances(1e-12, 1e-15)
            .expect("valid tolerances")
    };

    // left half t in [0, 1/2]: substitute s = t^b
    let left = if b < 1.0 {
        let hi = 0.5f64.powf(b);
        integrate(
            |s: f64| {
                let t = s.powf(1.0 / b);
                (1.0 - t).powf(cb - 1.0) * g(t) / b
            },
            &spec(0.0, hi),
        )?
    } else {
        integrate(
            |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(cb - 1.0) * g(t),
            &spec(0.0, 0.5),
        )?
    };

    // right half t in [1/2, 1] via u = 1 - t: substitute w = u^(c-b)
    let right = if cb < 1.0 {
        let hi = 0.5f64.powf(cb);
        integrate(
            |w: f64| {
                let u = w.powf(1.0 / cb);
                (1.0 - u).powf(b - 1.0) * g(1.0 - u) / cb
            },
            &spec(0.0, hi),
        )?
    } else {
        integrate(
            |u: f64| u.powf(cb - 1.0) * (1.0 - u).powf(b - 1.0) * g(1.0 - u),
            &spec(0.0, 0.5),
        )?
    };

    Ok(euler_prefactor(b, c) * (left + right))
}

/// 2F1(a, b; c; z) for c > b > 0 and z <= 0.
pub fn gauss_2f1_nonpos(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_params(b, c)?;
    if !(z <= 0.0) {
        return Err(Error::Domain(format!(
            "gauss_2f1_nonpos requires z <= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > -0.5 {
        gauss_2f1_series(a, b, c, z)
    } else {
        euler_real(a, b, c, z)
    }
}

/// 2F1(1, b; c; z) for complex z off the branch cut [1, inf), via the Euler
/// integral with a complex integrand. Used to evaluate interference Laplace
/// transforms at imaginary argument (characteristic functions).
pub fn gauss_2f1_unit_a_complex(b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    check_params(b, c)?;
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(Error::Domain(
            "2F1 Euler integral undefined on the branch cut [1, inf)".to_string(),
        ));
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    let g = |t: f64| one / (one - z * t);
    let cb = c - b;
    let spec = |hi: f64| {
        IntegrationSpec::finite(0.0, hi)
            .expect("valid interval")
            .with_tolerances(1e-12, 1e-15)
            .expect("valid tolerances")
    };

    let left = if b < 1.0 {
        integrate_complex(
            |s: f64| {
                let t = s.powf(1.0 / b);
                g(t) * (1.0 - t).powf(cb - 1.0) / b
            },
            &spec(0.5f64.powf(b)),
        )?
    } else {
        integrate_complex(
            |t: f64| g(t) * t.powf(b - 1.0) * (1.0 - t).powf(cb - 1.0),
            &spec(0.5),
        )?
    };
    let right = if cb < 1.0 {
        integrate_complex(
            |w: f64| {
                let u = w.powf(1.0 / cb);
                g(1.0 - u) * (1.0 - u).powf(b - 1.0) / cb
            },
            &spec(0.5f64.powf(cb)),
        )?
    } else {
        integrate_complex(
            |u: f64| g(1.0 - u) * u.powf(cb - 1.0) * (1.0 - u).powf(b - 1.0),
            &spec(0.5),
        )?
    };

    Ok((left + right) * euler_prefactor(b, c))
}
