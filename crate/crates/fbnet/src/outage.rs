//! Rate outage in the asymptotic and finite-blocklength regimes, and the
//! guaranteed-reliability metric.
//!
//! With K(v) = sqrt(1 - 1/(1+v)^2) the finite-blocklength rate at SINR v is
//! log2(1+v) - a K(v) + b, where a = log2(e) Qinv(eps)/sqrt(n) and
//! b = log2(n)/(2n). Replacing K by its extremes 0 and 1 sandwiches the
//! outage probability between the asymptotic-regime outage at target R_t
//! (lower) and at R_t + a - b (upper).

use crate::network::NetworkConfig;
use crate::numerics::{integrate, q_function, IntegrationSpec};
use crate::rate::CodingConfig;
use crate::{Error, Result};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// A rate-outage question: target rate plus the code parameters, with eps
/// interpreted as the FER threshold.
#[derive(Debug, Clone, Copy)]
pub struct OutageQuery {
    target_rate: f64,
    coding: CodingConfig,
}

impl OutageQuery {
    pub fn new(target_rate: f64, coding: CodingConfig) -> Result<Self> {
        if !(target_rate >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target rate must be >= 0, got {target_rate}"
            )));
        }
        Ok(Self {
            target_rate,
            coding,
        })
    }

    pub fn target_rate(&self) -> f64 {
        self.target_rate
    }

    pub fn coding(&self) -> &CodingConfig {
        &self.coding
    }
}

/// The two blocklength penalties of the outage bounds.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyTerms {
    /// a = sqrt(log2(e)^2 / n) Qinv(eps_bar)
    pub a: f64,
    /// b = log2(n) / (2n)
    pub b: f64,
}

/// Penalty terms (a, b) for a coding configuration.
pub fn penalty_terms(coding: &CodingConfig) -> PenaltyTerms {
    PenaltyTerms {
        a: LOG2_E * coding.dispersion_multiplier(),
        b: coding.correction(),
    }
}

/// Lower/upper outage pair from the K(v) extremes.
#[derive(Debug, Clone, Copy)]
pub struct OutageBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Asymptotic-regime rate outage at fixed r0:
/// O(r0, R_t) = 1 - e^{-(2^Rt - 1)/alpha0} L_Bg((2^Rt - 1)/(P r0^-eta)).
pub fn outage_ar(cfg: &NetworkConfig, r0: f64, target_rate: f64) -> Result<f64> {
    if !(target_rate >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "target rate must be >= 0, got {target_rate}"
        )));
    }
    if target_rate == 0.0 {
        return Ok(0.0);
    }
    let mu = 2f64.powf(target_rate) - 1.0;
    let s = cfg.mean_rx_power(r0);
    let noise_factor = (-mu * cfg.noise() / s).exp();
    Ok(1.0 - noise_factor * cfg.laplace_b_gaussian(r0, mu / s)?)
}

/// Finite-blocklength outage bounds at fixed r0: the lower bound is the AR
/// outage at R_t, the upper bound shifts the target to R_t + a - b.
pub fn outage_bounds(cfg: &NetworkConfig, r0: f64, query: &OutageQuery) -> Result<OutageBounds> {
    let p = penalty_terms(query.coding());
    let lower = outage_ar(cfg, r0, query.target_rate())?;
    let upper = outage_ar(cfg, r0, (query.target_rate() + p.a - p.b).max(0.0))?;
    Ok(OutageBounds { lower, upper })
}

/// Spatially averaged upper-bound outage:
/// 1 - int_0^inf 2 pi lambda r e^{-mu/alpha0(r) - pi lambda r^2} L_Bg(mu r^eta/P) dr
/// with mu = 2^(Rt + a - b) - 1.
pub fn outage_spatial_upper(cfg: &NetworkConfig, query: &OutageQuery) -> Result<f64> {
    let p = penalty_terms(query.coding());
    let shifted = (query.target_rate() + p.a - p.b).max(0.0);
    outage_spatial_ar(cfg, shifted)
}

/// Spatially averaged AR outage at an explicit target rate (used both for
/// the AR baseline and, with the shifted rate, the FBR upper bound).
pub fn outage_spatial_ar(cfg: &NetworkConfig, target_rate: f64) -> Result<f64> {
    if target_rate == 0.0 {
        return Ok(0.0);
    }
    let mu = 2f64.powf(target_rate) - 1.0;
    let dist = cfg.serving_distance();
    let r_hi = dist.quantile(1.0 - 1e-10)?;
    let spec = IntegrationSpec::finite(1e-9, r_hi)?
        .with_tolerances(1e-9, 1e-12)?
        .with_max_subdivisions(800);
    let kept = integrate(
        |r0: f64| {
            let s = cfg.mean_rx_power(r0);
            let noise_factor = (-mu * cfg.noise() / s).exp();
            noise_factor
                * cfg.laplace_b_gaussian(r0, mu / s).unwrap_or(f64::NAN)
                * dist.pdf(r0)
        },
        &spec,
    )?;
    Ok((1.0 - kept).clamp(0.0, 1.0))
}

/// Closed-form spatial upper bound for eta = 4:
/// 1 - pi lambda sqrt(pi P/(sw2 mu)) e^{sw2 mu z^2/(4P)} Q(sqrt(z^2 mu sw2/(2P)))
/// with mu = 2^(Rt + a - b) - 1 and
/// z = lambda pi P (sqrt(mu) arctan(sqrt(mu)) + 1) / (sw2 mu).
pub fn outage_spatial_eta4(cfg: &NetworkConfig, query: &OutageQuery) -> Result<f64> {
    if cfg.eta() != 4.0 {
        return Err(Error::Domain(format!(
            "closed form requires eta = 4, got {}",
            cfg.eta()
        )));
    }
    if !(cfg.noise() > 0.0) {
        return Err(Error::Domain(
            "closed form requires positive noise power".to_string(),
        ));
    }
    let p = penalty_terms(query.coding());
    let shifted = (query.target_rate() + p.a - p.b).max(0.0);
    if shifted == 0.0 {
        return Ok(0.0);
    }
    let mu = 2f64.powf(shifted) - 1.0;
    let pi = std::f64::consts::PI;
    let lam = cfg.lambda();
    let pw = cfg.power();
    let sw2 = cfg.noise();
    let z = lam * pi * pw / (sw2 * mu) * (mu.sqrt() * mu.sqrt().atan() + 1.0);
    // e^{sw2 mu z^2/(4P)} Q(sqrt(z^2 mu sw2/(2P))) evaluated stably via the
    // scaled complementary error function when the exponent is large
    let w2 = z * z * mu * sw2 / (2.0 * pw); // argument of Q is sqrt(w2)
    let kept = pi * lam * (pi * pw / (sw2 * mu)).sqrt() * exp_x2_half_q(w2.sqrt());
    Ok((1.0 - kept).clamp(0.0, 1.0))
}

/// e^{x^2/2} Q(x), stable for large x via the asymptotic continued fraction.
fn exp_x2_half_q(x: f64) -> f64 {
    if x < 25.0 {
        (0.5 * x * x).exp() * q_function(x)
    } else {
        // Q(x) ~ phi(x)/x (1 - 1/x^2 + 3/x^4 - ...)
        let inv2 = 1.0 / (x * x);
        (1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2)
            / (x * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Where the reliability is evaluated: a fixed serving distance or the
/// spatial average over the Rayleigh law.
#[derive(Debug, Clone, Copy)]
pub enum Geometry {
    FixedR0(f64),
    Spatial,
}

/// Guaranteed reliability in the finite-blocklength regime,
/// (1 - O_upper)(1 - eps_bar).
pub fn reliability(cfg: &NetworkConfig, query: &OutageQuery, geometry: Geometry) -> Result<f64> {
    let outage = match geometry {
        Geometry::FixedR0(r0) => outage_bounds(cfg, r0, query)?.upper,
        Geometry::Spatial => outage_spatial_upper(cfg, query)?,
    };
    Ok((1.0 - outage) * (1.0 - query.coding().eps()))
}

/// Reliability from an externally estimated outage (e.g. simulated).
pub fn reliability_from_outage(outage: f64, eps_bar: f64) -> f64 {
    (1.0 - outage) * (1.0 - eps_bar)
}

/// Asymptotic-regime reliability, 1 - O_ar.
pub fn reliability_ar(cfg: &NetworkConfig, target_rate: f64, geometry: Geometry) -> Result<f64> {
    let outage = match geometry {
        Geometry::FixedR0(r0) => outage_ar(cfg, r0, target_rate)?,
        Geometry::Spatial => outage_spatial_ar(cfg, target_rate)?,
    };
    Ok(1.0 - outage)
}

/// Monte Carlo estimate of the M-ary constellation rate outage
/// P(R^(M)_{n,eps}(SINR) < R_t), which has no closed form. Fixed r0 when
/// the plan carries one, spatial otherwise. Returns the estimate with its
/// batch-means confidence interval.
pub fn outage_qam_mc(
    cfg: &NetworkConfig,
    query: &OutageQuery,
    constellation: &crate::constellation::Constellation,
    plan: &crate::sim::SimPlan,
) -> Result<crate::sim::Estimate> {
    let log2m = constellation.bits_per_symbol() as f64;
    if query.target_rate() >= log2m + penalty_terms(query.coding()).b {
        // the constellation rate is capped at log2(M) + b
        return Ok(crate::sim::Estimate {
            mean: 1.0,
            std_err: 0.0,
            samples: plan.realizations,
        });
    }
    crate::sim::empirical_outage(
        cfg,
        query,
        plan,
        &crate::sim::RateMode::Qam(constellation.clone()),
        crate::sim::FadingAverage::Sampled,
    )
}

/// SINR threshold v_t such that the finite-blocklength rate
/// log2(1+v) - a K(v) + b crosses the target from below on its increasing
/// branch; {rate < R_t} = [0, v_t) exactly when R_t > b.
pub fn fbr_rate_threshold(query: &OutageQuery) -> Result<f64> {
    let p = penalty_terms(query.coding());
    let rt = query.target_rate();
    if rt <= p.b {
        return Err(Error::Domain(format!(
            "target rate {rt} must exceed the correction term {}; the \
             sub-threshold event is not an SINR interval there",
            p.b
        )));
    }
    let f = |v: f64| {
        let k = if v <= 0.0 {
            0.0
        } else {
            let t = 1.0 + v;
            (1.0 - 1.0 / (t * t)).sqrt()
        };
        (1.0 + v).log2() - p.a * k + p.b
    };
    // f(mu_u) >= R_t by construction; bisect on [0, mu_u]
    let mut hi = 2f64.powf(rt + p.a - p.b) - 1.0;
    if f(hi) < rt {
        // guard: expand (cannot happen analytically, but cheap)
        for _ in 0..64 {
            hi *= 2.0;
            if f(hi) >= rt {
                break;
            }
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < rt {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::awgn_fbr_rate;

    fn coding(n: u32, eps: f64) -> CodingConfig {
        CodingConfig::new(n, eps).unwrap()
    }

    fn query(rt: f64, n: u32, eps: f64) -> OutageQuery {
        OutageQuery::new(rt, coding(n, eps)).unwrap()
    }

    #[test]
    fn penalty_values() {
        // a = log2(e) Qinv(0.01)/sqrt(128) = 0.296648, b = 7/256
        let p = penalty_terms(&coding(128, 1e-2));
        assert!((p.a - 0.296648).abs() < 5e-6, "a = {}", p.a);
        assert!((p.b - 7.0 / 256.0).abs() < 1e-15);
        // eps -> 0.5 kills a
        let loose = penalty_terms(&coding(128, 0.499999));
        assert!(loose.a.abs() < 1e-4);
        // quadrupling n halves a
        let p4 = penalty_terms(&coding(512, 1e-2));
        assert!((p4.a - p.a / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ar_outage_limits() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        assert_eq!(outage_ar(&cfg, 200.0, 0.0).unwrap(), 0.0);
        assert!(outage_ar(&cfg, 200.0, 40.0).unwrap() > 1.0 - 1e-9);
        assert!(outage_ar(&cfg, 200.0, -1.0).is_err());
        // no interference: 1 - e^{-(2^Rt-1)/alpha0}
        let sparse = NetworkConfig::new(1e-300, 1.0, 4.0, 1e-12).unwrap();
        let r0 = 100.0;
        let alpha0 = sparse.link(r0).unwrap().avg_snr();
        let rt = 2.0;
        let expected = 1.0 - (-(2f64.powf(rt) - 1.0) / alpha0).exp();
        let got = outage_ar(&sparse, r0, rt).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn outage_monotone_in_rate_r0_lambda() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        let mut prev = 0.0;
        for i in 1..=20 {
            let rt = 0.3 * i as f64;
            let o = outage_ar(&cfg, 200.0, rt).unwrap();
            assert!(o >= prev);
            prev = o;
        }
        let mut prev = 0.0;
        for i in 1..=10 {
            let o = outage_ar(&cfg, 60.0 * i as f64, 1.0).unwrap();
            assert!(o >= prev);
            prev = o;
        }
        let denser = NetworkConfig::from_km_units(9.0, 4.0, 0.0).unwrap();
        assert!(outage_ar(&denser, 200.0, 1.0).unwrap() > outage_ar(&cfg, 200.0, 1.0).unwrap());
    }

    #[test]
    fn bounds_order_and_shift_identity() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        let q = query(1.0, 128, 1e-6);
        let b = outage_bounds(&cfg, 200.0, &q).unwrap();
        assert!(b.lower <= b.upper);
        // upper(Rt) = lower(Rt + a - b) exactly
        let p = penalty_terms(q.coding());
        let shifted = outage_bounds(&cfg, 200.0, &query(1.0 + p.a - p.b, 128, 1e-6)).unwrap();
        assert!((b.upper - shifted.lower).abs() < 1e-14);
    }

    #[test]
    fn paper_operating_point_lower_bound() {
        // r0 = 200 m, lambda = 1/km^2, n = 128, eps = 1e-6, 0 dB, Rt = 1:
        // the AR lower bound evaluates to ~0.10
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        let b = outage_bounds(&cfg, 200.0, &query(1.0, 128, 1e-6)).unwrap();
        assert!((b.lower - 0.0954).abs() < 0.003, "lower = {}", b.lower);
        assert!(b.upper > 0.13 && b.upper < 0.20, "upper = {}", b.upper);
    }

    #[test]
    fn spatial_quadrature_vs_closed_form_eta4() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        for i in 0..=20 {
            let rt = 0.1 + 5.9 * i as f64 / 20.0;
            let q = query(rt, 128, 1e-2);
            let quad = outage_spatial_upper(&cfg, &q).unwrap();
            let closed = outage_spatial_eta4(&cfg, &q).unwrap();
            assert!(
                (quad - closed).abs() < 1e-6,
                "Rt={rt}: {quad} vs {closed}"
            );
        }
    }

    #[test]
    fn spatial_limits_and_monotonicity() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        let big = query(50.0, 128, 1e-2);
        assert!(outage_spatial_eta4(&cfg, &big).unwrap() > 1.0 - 1e-6);
        // larger eps_bar shrinks a and the outage
        let strict = outage_spatial_upper(&cfg, &query(1.0, 128, 1e-6)).unwrap();
        let loose = outage_spatial_upper(&cfg, &query(1.0, 128, 1e-2)).unwrap();
        assert!(loose < strict);
        // eta != 4 rejected by the closed form
        let cfg35 = NetworkConfig::from_km_units(1.0, 3.5, 0.0).unwrap();
        assert!(outage_spatial_eta4(&cfg35, &query(1.0, 128, 1e-2)).is_err());
    }

    #[test]
    fn reliability_shape() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        // O = 0 gives 1 - eps_bar
        assert!((reliability_from_outage(0.0, 0.01) - 0.99).abs() < 1e-15);
        // reliability <= 1 - eps_bar always
        for &eps in &[1e-6, 1e-4, 1e-2, 0.1] {
            let t = reliability(&cfg, &query(1.0, 128, eps), Geometry::FixedR0(250.0)).unwrap();
            assert!(t <= 1.0 - eps + 1e-12);
            assert!(t >= 0.0);
        }
        // interior maximum of T(eps_bar) in [1e-3, 1e-1]
        let mut best = (0.0f64, 0.0f64);
        let mut at_edges = (0.0f64, 0.0f64);
        let grid: Vec<f64> = (0..=30)
            .map(|i| 10f64.powf(-6.0 + 5.6 * i as f64 / 30.0))
            .collect();
        for &eps in &grid {
            let t = reliability(&cfg, &query(1.0, 128, eps), Geometry::FixedR0(250.0)).unwrap();
            if t > best.1 {
                best = (eps, t);
            }
        }
        at_edges.0 = reliability(&cfg, &query(1.0, 128, grid[0]), Geometry::FixedR0(250.0)).unwrap();
        at_edges.1 = reliability(
            &cfg,
            &query(1.0, 128, *grid.last().unwrap()),
            Geometry::FixedR0(250.0),
        )
        .unwrap();
        assert!(best.0 > 1e-3 && best.0 < 1e-1, "argmax at {}", best.0);
        assert!(best.1 > at_edges.0 && best.1 > at_edges.1);
    }

    #[test]
    fn qam_outage_floor_and_cap() {
        use crate::constellation::make_qam;
        use crate::sim::SimPlan;
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        let c = make_qam(4).unwrap();
        let plan = SimPlan::new(4000, 1, 99)
            .unwrap()
            .with_fixed_r0(200.0)
            .with_region_scale(12.0);
        // target above log2(M) + b: outage is 1 by the rate cap
        let capped = outage_qam_mc(&cfg, &query(2.1, 128, 1e-2), &c, &plan).unwrap();
        assert_eq!(capped.mean, 1.0);
        // Gaussian-codebook outage lower-bounds the constellation outage
        let q = query(1.0, 128, 1e-2);
        let est = outage_qam_mc(&cfg, &q, &c, &plan).unwrap();
        let floor = outage_bounds(&cfg, 200.0, &q).unwrap().lower;
        assert!(
            est.mean + 3.0 * est.ci99() > floor,
            "{} vs floor {floor}",
            est.mean
        );
    }

    #[test]
    fn threshold_solver_inverts_rate() {
        for &(n, eps) in &[(128u32, 1e-2f64), (128, 1e-6), (2048, 1e-5)] {
            for &rt in &[0.1, 0.5, 1.0, 3.0, 6.0] {
                let q = query(rt, n, eps);
                let vt = fbr_rate_threshold(&q).unwrap();
                let r = awgn_fbr_rate(vt, q.coding());
                assert!(
                    (r.rate - rt).abs() < 1e-9 * (1.0 + rt),
                    "n={n} eps={eps} rt={rt}: rate({vt}) = {}",
                    r.rate
                );
                // below the threshold the rate is below target
                let r_lo = awgn_fbr_rate(0.9 * vt, q.coding());
                assert!(r_lo.rate < rt);
            }
        }
        // target below the correction term is rejected
        assert!(fbr_rate_threshold(&query(0.01, 128, 1e-2)).is_err());
    }

    #[test]
    fn threshold_between_mu_bounds() {
        let q = query(1.0, 128, 1e-6);
        let p = penalty_terms(q.coding());
        let vt = fbr_rate_threshold(&q).unwrap();
        let mu_l = 2f64.powf(1.0) - 1.0;
        let mu_u = 2f64.powf(1.0 + p.a - p.b) - 1.0;
        assert!(vt > mu_l && vt < mu_u, "{mu_l} < {vt} < {mu_u}");
    }
}
