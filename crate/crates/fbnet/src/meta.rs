//! Coding-rate meta distribution in the finite-blocklength regime: the
//! fraction of links whose conditional success probability
//! P(R_{n,eps}(SIR) > R_t | geometry) exceeds a reliability target p_t.
//!
//! At high SIR the dispersion factor K is ~1 and the conditional success
//! probability reduces to the closed product prod_i 1/(1 + T (r0/r_i)^eta)
//! with T = 2^(Rt + a - b) - 1, whose moments have a single radial integral.
//! The distribution is then recovered either by Gil-Pelaez inversion of the
//! imaginary moments or by a beta fit to the first two.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::network::NetworkConfig;
use crate::numerics::{gil_pelaez_cdf_raw, integrate, reg_inc_beta, IntegrationSpec};
use crate::outage::{fbr_rate_threshold, penalty_terms, OutageQuery};
use crate::sim::NetworkRealization;
use crate::{Error, Result};

/// A meta-distribution question: the outage query (target rate, code) at a
/// fixed serving distance, interference-limited.
#[derive(Debug, Clone, Copy)]
pub struct MetaQuery {
    query: OutageQuery,
    r0: f64,
}

impl MetaQuery {
    pub fn new(query: OutageQuery, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidConfig(format!("r0 must be > 0, got {r0}")));
        }
        Ok(Self { query, r0 })
    }

    pub fn query(&self) -> &OutageQuery {
        &self.query
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Effective SIR threshold T = 2^(Rt + a - b) - 1 of the high-SIR
    /// approximation.
    pub fn sir_threshold(&self) -> f64 {
        let p = penalty_terms(self.query.coding());
        2f64.powf(self.query.target_rate() + p.a - p.b) - 1.0
    }

    /// The asymptotic-regime counterpart (a = b = 0), same machinery.
    pub fn ar_baseline(&self) -> ArMetaQuery {
        ArMetaQuery {
            t: 2f64.powf(self.query.target_rate()) - 1.0,
            r0: self.r0,
        }
    }
}

/// AR-baseline meta query: the same moment machinery with a = b = 0.
#[derive(Debug, Clone, Copy)]
pub struct ArMetaQuery {
    t: f64,
    r0: f64,
}

/// First two moments plus the beta fit parameters.
#[derive(Debug, Clone, Copy)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    /// Beta fit (theta, beta) with theta the first moment; None when the
    /// moments are degenerate (m2 <= m1^2).
    pub beta_params: Option<(f64, f64)>,
}

/// Approximate moment of the conditional success probability at complex
/// order d:
///
///   M_d = exp{ -2 pi lambda int_{r0}^inf r (1 - (1 + T (r0/r)^eta)^-d) dr }.
///
/// The radial integral is mapped to (0, 1] by x = (r0/r)^eta and the
/// endpoint singularity removed by x = s^(eta/(eta-2)).
pub fn approx_moment(cfg: &NetworkConfig, meta: &MetaQuery, d: Complex64) -> Result<Complex64> {
    moment_for_threshold(cfg, meta.r0(), meta.sir_threshold(), d)
}

/// Same moment with the AR threshold (a = b = 0).
pub fn approx_moment_ar(cfg: &NetworkConfig, meta: &ArMetaQuery, d: Complex64) -> Result<Complex64> {
    moment_for_threshold(cfg, meta.r0, meta.t, d)
}

fn moment_for_threshold(
    cfg: &NetworkConfig,
    r0: f64,
    t: f64,
    d: Complex64,
) -> Result<Complex64> {
    if d.re < 0.0 {
        return Err(Error::Domain(format!(
            "moment order needs Re(d) >= 0, got {d}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!(
            "high-SIR approximation needs a nonnegative threshold; got T = {t} \
             (target rate below b - a)"
        )));
    }
    if t == 0.0 || d.norm_sqr() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    // With y = ln(1 + T (r0/r)^eta) the radial integral becomes
    //   int r (1 - e^{-dy}) dr = (r0^2/2) [ d J(d) - 1 + e^{-d L1} ],
    //   J(d) = int_0^L1 e^{-dy} G(y) dy,  G(y) = ((e^y - 1)/T)^{-2/eta},
    // with L1 = ln(1+T); J is evaluated by a Filon scheme that stays cheap
    // at any (complex) frequency d.
    let l1 = t.ln_1p();
    let j = fourier_of_g(cfg.eta(), t, l1, d);
    let bracket = d * j - 1.0 + (-d * l1).exp();
    let exponent = bracket * (-std::f64::consts::PI * cfg.lambda() * r0 * r0);
    Ok(exponent.exp())
}

/// int_0^{y_star} e^{-dy} y^alpha dy via the incomplete-gamma series
/// gamma(alpha+1, d y*) / d^(alpha+1); requires |d| y* <~ 30.
fn head_power_integral(alpha: f64, d: Complex64, y_star: f64) -> Complex64 {
    let s = alpha + 1.0;
    let z = d * y_star;
    // gamma(s, z) = z^s e^{-z} sum_n z^n / (s (s+1) ... (s+n))
    let mut term = Complex64::new(1.0 / s, 0.0);
    let mut sum = term;
    for n in 1..200 {
        term *= z / (s + n as f64);
        sum += term;
        if term.norm_sqr() < 1e-32 * sum.norm_sqr() {
            break;
        }
    }
    // gamma(s,z)/d^s = y*^s e^{-z} sum  (the z^s cancels against d^s)
    y_star.powf(s) * (-z).exp() * sum
}

/// J(d) = int_0^L1 e^{-dy} G(y) dy with G(y) = ((e^y - 1)/T)^{-q}, q = 2/eta.
/// Head [0, y*]: G expanded as y^{-q}(1 + c1 y + c2 y^2 + c3 y^3), each
/// power integrated by the incomplete-gamma series. Tail [y*, L1]:
/// piecewise-quadratic G on a geometric mesh with the e^{-dy} factor
/// integrated exactly per panel, so the cost is set by G's smoothness
/// rather than the oscillation frequency.
fn fourier_of_g(eta: f64, t: f64, l1: f64, d: Complex64) -> Complex64 {
    let q = 2.0 / eta;
    let tq = t.powf(q);
    let g = |y: f64| tq * y.exp_m1().powf(-q);
    let dn = d.norm();
    let y_star = (8.0 / dn.max(1.0)).min(0.05).min(l1 / 8.0);

    // (e^y - 1)^{-q} = y^{-q} (1 + c1 y + c2 y^2 + c3 y^3 + O(y^4))
    let c1 = -q / 2.0;
    let c2 = q * (3.0 * q - 1.0) / 24.0;
    let c3 = q * (-1.0 / 24.0 + (q + 1.0) / 12.0 - (q + 1.0) * (q + 2.0) / 48.0);
    let mut total = tq
        * (head_power_integral(-q, d, y_star)
            + c1 * head_power_integral(1.0 - q, d, y_star)
            + c2 * head_power_integral(2.0 - q, d, y_star)
            + c3 * head_power_integral(3.0 - q, d, y_star));

    // geometric mesh on [y*, L1], quadratic through (y0, ymid, y1)
    let ratio = 1.0 + 4e-3;
    let mut y0 = y_star;
    let mut g0 = g(y0);
    let mut e0 = (-d * y0).exp();
    while y0 < l1 {
        let y1 = (y0 * ratio).min(l1);
        let h = y1 - y0;
        let g1 = g(y1);
        let gm = g(y0 + 0.5 * h);
        let e1 = (-d * y1).exp();
        // g(y0 + u) ~ a + b u + c u^2
        let a = g0;
        let b = (4.0 * gm - 3.0 * g0 - g1) / h;
        let c = 2.0 * (g0 - 2.0 * gm + g1) / (h * h);
        let dh = d * h;
        let (f0, f1, f2) = if dh.norm() > 1e-3 {
            let edh = (-dh).exp();
            let f0 = (1.0 - edh) / d;
            let f1 = (1.0 - (1.0 + dh) * edh) / (d * d);
            let f2 = (2.0 - (2.0 + 2.0 * dh + dh * dh) * edh) / (d * d * d);
            (f0, f1, f2)
        } else {
            // series in dh, relative error O(|dh|^4)
            let f0 = h * (1.0 - dh / 2.0 + dh * dh / 6.0 - dh * dh * dh / 24.0);
            let f1 = h * h
                * (0.5 - dh / 3.0 + dh * dh / 8.0 - dh * dh * dh / 30.0);
            let f2 = h * h * h
                * (1.0 / 3.0 - dh / 4.0 + dh * dh / 10.0 - dh * dh * dh / 36.0);
            (f0, f1, f2)
        };
        total += e0 * (f0 * a + f1 * b + f2 * c);
        y0 = y1;
        g0 = g1;
        e0 = e1;
    }
    total
}

/// Direct adaptive-quadrature route for the same moment (independent of the
/// Filon kernel); used as a cross-check oracle in tests and kept accurate
/// only for moderate |Im d|.
#[allow(dead_code)]
pub(crate) fn moment_by_quadrature(
    cfg: &NetworkConfig,
    r0: f64,
    t: f64,
    d: Complex64,
) -> Result<Complex64> {
    if t == 0.0 || d.norm_sqr() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let eta = cfg.eta();
    let p = eta / (eta - 2.0);
    // phi(x) = (1 - (1+Tx)^{-d})/x, finite at x -> 0 (limit d T)
    let phi = |x: f64| -> Complex64 {
        if x < 1e-280 {
            return d * t;
        }
        let log1p_tx = (t * x).ln_1p();
        let one = Complex64::new(1.0, 0.0);
        (one - (-d * log1p_tx).exp()) / x
    };
    let spec = IntegrationSpec::finite(0.0, 1.0)?
        .with_tolerances(1e-11, 1e-14)?
        .with_max_subdivisions(20_000);
    let re = integrate(|s: f64| phi(s.powf(p)).re, &spec)?;
    let im = integrate(|s: f64| phi(s.powf(p)).im, &spec)?;
    let radial = Complex64::new(re, im) * (r0 * r0 / eta) * p;
    let exponent = radial * (-2.0 * std::f64::consts::PI * cfg.lambda());
    Ok(exponent.exp())
}

/// First two real moments and the beta fit.
pub fn moment_set(cfg: &NetworkConfig, meta: &MetaQuery) -> Result<MomentSet> {
    let m1 = approx_moment(cfg, meta, Complex64::new(1.0, 0.0))?.re;
    let m2 = approx_moment(cfg, meta, Complex64::new(2.0, 0.0))?.re;
    Ok(build_moment_set(m1, m2))
}

fn build_moment_set(m1: f64, m2: f64) -> MomentSet {
    let var = m2 - m1 * m1;
    let beta_params = if var > 1e-14 && m1 > 0.0 && m1 < 1.0 {
        let beta = (m1 - m2) * (1.0 - m1) / var;
        Some((m1, beta))
    } else {
        None
    };
    MomentSet { m1, m2, beta_params }
}

/// Meta distribution (fraction of links with success probability > p_t) by
/// Gil-Pelaez inversion of the imaginary moments:
/// F(p_t) = 1/2 + (1/pi) int_0^inf Im(e^{-t ln p_t} M_jt)/t dt.
pub fn meta_cdf_gilpelaez(cfg: &NetworkConfig, meta: &MetaQuery, p_t: f64) -> Result<f64> {
    meta_gp_for(cfg, meta.r0(), meta.sir_threshold(), p_t).map(|v| v.clamp(0.0, 1.0))
}

/// Unclamped Gil-Pelaez value (diagnostics / invariant checks).
pub fn meta_cdf_gilpelaez_raw(cfg: &NetworkConfig, meta: &MetaQuery, p_t: f64) -> Result<f64> {
    meta_gp_for(cfg, meta.r0(), meta.sir_threshold(), p_t)
}

/// AR-baseline meta distribution via the same inversion.
pub fn meta_cdf_gilpelaez_ar(cfg: &NetworkConfig, meta: &ArMetaQuery, p_t: f64) -> Result<f64> {
    meta_gp_for(cfg, meta.r0, meta.t, p_t).map(|v| v.clamp(0.0, 1.0))
}

fn meta_gp_for(cfg: &NetworkConfig, r0: f64, t: f64, p_t: f64) -> Result<f64> {
    if !(p_t > 0.0 && p_t < 1.0) {
        return Err(Error::Domain(format!(
            "reliability target must lie in (0,1), got {p_t}"
        )));
    }
    // ln P_s has characteristic function w -> M_{jw}; the meta distribution
    // is the CCDF of P_s at p_t, i.e. 1 - F_{ln Ps}(ln p_t)
    let charfn = |w: f64| -> Complex64 {
        moment_for_threshold(cfg, r0, t, Complex64::new(0.0, w))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let spec = IntegrationSpec::semi_infinite(1e-6)?
        .with_tolerances(1e-8, 2e-7)?
        .with_max_subdivisions(3000);
    let cdf = gil_pelaez_cdf_raw(charfn, p_t.ln(), &spec)?;
    Ok(1.0 - cdf)
}

/// Meta distribution through the beta approximation:
/// F(p_t) ~ 1 - I_{p_t}(m1 (m1 - m2)/(m2 - m1^2), (1 - m1)(m1 - m2)/(m2 - m1^2)).
pub fn meta_cdf_beta(cfg: &NetworkConfig, meta: &MetaQuery, p_t: f64) -> Result<f64> {
    if !(p_t > 0.0 && p_t < 1.0) {
        return Err(Error::Domain(format!(
            "reliability target must lie in (0,1), got {p_t}"
        )));
    }
    let ms = moment_set(cfg, meta)?;
    beta_ccdf(&ms, p_t)
}

/// AR-baseline beta approximation.
pub fn meta_cdf_beta_ar(cfg: &NetworkConfig, meta: &ArMetaQuery, p_t: f64) -> Result<f64> {
    let m1 = approx_moment_ar(cfg, meta, Complex64::new(1.0, 0.0))?.re;
    let m2 = approx_moment_ar(cfg, meta, Complex64::new(2.0, 0.0))?.re;
    beta_ccdf(&build_moment_set(m1, m2), p_t)
}

fn beta_ccdf(ms: &MomentSet, p_t: f64) -> Result<f64> {
    match ms.beta_params {
        Some((theta, beta)) => {
            let var = ms.m2 - ms.m1 * ms.m1;
            let x = ms.m1 * (ms.m1 - ms.m2) / var;
            let y = (1.0 - ms.m1) * (ms.m1 - ms.m2) / var;
            let _ = (theta, beta);
            Ok(1.0 - reg_inc_beta(p_t, x, y)?)
        }
        // degenerate variance: success probability is a point mass at m1
        None => Ok(if ms.m1 > p_t { 1.0 } else { 0.0 }),
    }
}

/// How to evaluate the conditional success probability of one realization.
pub enum SuccessProbMode<'a> {
    /// Closed product over interferer distances (high-SIR approximation,
    /// interferer and serving fading integrated analytically).
    Approximate,
    /// Exact threshold on the finite-blocklength rate: serving fading
    /// integrated analytically, interferer fading sampled `draws` times.
    Exact { draws: usize, rng: &'a mut ChaCha8Rng },
}

/// Conditional success probability P(R_{n,eps}(SIR) > R_t | geometry) for a
/// given realization, interference-limited (SIR-based).
pub fn success_prob_conditional(
    cfg: &NetworkConfig,
    meta: &MetaQuery,
    realization: &NetworkRealization,
    mode: SuccessProbMode<'_>,
) -> Result<f64> {
    let r0 = realization.r0;
    if realization
        .interferer_distances
        .iter()
        .any(|&d| d <= r0)
    {
        return Err(Error::InvalidConfig(
            "interferer distances must exceed the serving distance".to_string(),
        ));
    }
    let eta = cfg.eta();
    match mode {
        SuccessProbMode::Approximate => {
            let t = meta.sir_threshold();
            Ok(realization
                .interferer_distances
                .iter()
                .map(|&r| 1.0 / (1.0 + t * (r0 / r).powf(eta)))
                .product())
        }
        SuccessProbMode::Exact { draws, rng } => {
            if draws == 0 {
                return Err(Error::InvalidConfig("draws must be >= 1".to_string()));
            }
            let vt = fbr_rate_threshold(meta.query())?;
            let weights: Vec<f64> = realization
                .interferer_distances
                .iter()
                .map(|&r| (r0 / r).powf(eta))
                .collect();
            let mut acc = 0.0f64;
            for _ in 0..draws {
                let interference: f64 = weights
                    .iter()
                    .map(|&w| {
                        let e: f64 = rng.random();
                        w * -(1.0 - e).ln()
                    })
                    .sum();
                acc += (-vt * interference).exp();
            }
            Ok(acc / draws as f64)
        }
    }
}

use rand::Rng as _;
