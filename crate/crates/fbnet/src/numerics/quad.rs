//! Adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The kernel is the 15-point Kronrod / 7-point Gauss pair with the usual
//! QUADPACK error rescaling; the driver bisects the interval with the worst
//! error estimate until the global tolerance is met. Semi-infinite intervals
//! [a, inf) are mapped to (0, 1) via x = a + t/(1-t).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

/// Integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    /// Finite interval [a, b].
    Finite { a: f64, b: f64 },
    /// Semi-infinite interval [a, inf).
    SemiInfinite { a: f64 },
}

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrationSpec {
    pub interval: Interval,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl IntegrationSpec {
    /// Finite-interval spec with default tolerances (rel 1e-10, abs 1e-14).
    pub fn finite(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidConfig(format!(
                "finite interval requires a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self {
            interval: Interval::Finite { a, b },
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 5000,
        })
    }

    /// Semi-infinite spec [a, inf) with default tolerances.
    pub fn semi_infinite(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "semi-infinite interval requires finite a, got {a}"
            )));
        }
        Ok(Self {
            interval: Interval::SemiInfinite { a },
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 5000,
        })
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "tolerances must be positive".to_string(),
            ));
        }
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        Ok(self)
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions.max(1);
        self
    }
}

// 15-point Kronrod abscissae (positive half) and weights, 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 15-point Gauss-Kronrod panel. Returns (result, error estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv = [0.0f64; 15];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            // Kronrod points with odd index coincide with the Gauss-7 points.
            res_gauss += WG[j / 2] * fsum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    res_gauss += f_center * WG[3];
    let err = ((res_kronrod - res_gauss) * half).abs();
    (
        res_kronrod * half,
        rescale_error(err, res_abs * half.abs(), res_asc * half.abs()),
    )
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    result: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    let (r, e) = qk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        result: r,
        error: e,
    });
    let mut total = r;
    let mut total_err = e;

    for _ in 0..max_subdivisions {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol || !total.is_finite() {
            break;
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval narrowed to machine precision; keep its estimate.
            total_err -= worst.error;
            total_err += 50.0 * f64::EPSILON * worst.result.abs();
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            continue;
        }
        let (r1, e1) = qk15(f, worst.a, mid);
        let (r2, e2) = qk15(f, mid, worst.b);
        total += r1 + r2 - worst.result;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            result: r1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            result: r2,
            error: e2,
        });
    }

    if !total.is_finite() {
        return Err(Error::Domain(
            "integrand produced a non-finite value".to_string(),
        ));
    }
    let tol = abs_tol.max(rel_tol * total.abs());
    if total_err > tol {
        return Err(Error::NonConvergence {
            estimate: total,
            error_bound: total_err,
        });
    }
    Ok(total)
}

/// Adaptive estimate of the integral of `f` over the spec's interval.
///
/// Integrable endpoint singularities are handled by bisection (the Kronrod
/// nodes never touch the endpoints); semi-infinite intervals are transformed
/// to (0, 1).
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &IntegrationSpec) -> Result<f64> {
    match spec.interval {
        Interval::Finite { a, b } => adaptive(
            &f,
            a,
            b,
            spec.rel_tol,
            spec.abs_tol,
            spec.max_subdivisions,
        ),
        Interval::SemiInfinite { a } => {
            let g = |t: f64| {
                let omt = 1.0 - t;
                let x = a + t / omt;
                if !x.is_finite() {
                    return 0.0;
                }
                let v = f(x) / (omt * omt);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            adaptive(
                &g,
                0.0,
                1.0,
                spec.rel_tol,
                spec.abs_tol,
                spec.max_subdivisions,
            )
        }
    }
}

/// Complex-valued integral computed as two real quadratures.
pub(crate) fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    spec: &IntegrationSpec,
) -> Result<Complex64> {
    let re = integrate(|x| f(x).re, spec)?;
    let im = integrate(|x| f(x).im, spec)?;
    Ok(Complex64::new(re, im))
}
