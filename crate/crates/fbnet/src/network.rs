//! Downlink network parameterization and interference statistics.
//!
//! Base stations form a planar PPP of intensity lambda; the tagged user sits
//! at the origin at distance r0 from its serving BS. Conditioned on r0, the
//! aggregate interference admits an equivalence-in-distribution
//! representation sqrt(B) g with g standard complex Gaussian, and everything
//! here is a functional of the Laplace transform of B: the closed
//! Gaussian-codebook form, its truncated-series counterpart for arbitrary
//! constellations, the first two moments, the moment-matched Gamma
//! approximation, and the resulting conditional SINR density.
//!
//! Internal units are SI: meters, watts, BS per square meter.

use num_complex::Complex64;
use rand::Rng;
use statrs::function::gamma::gamma_lr;

use crate::numerics::{
    gauss_2f1_nonpos, gauss_2f1_unit_a_complex, gil_pelaez_cdf, IntegrationSpec,
};
use crate::{Error, Result};

/// Static network parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    lambda: f64,
    power: f64,
    eta: f64,
    noise: f64,
}

impl NetworkConfig {
    /// `lambda` in BS/m^2, `power` in watts, `eta` dimensionless (> 2),
    /// `noise` in watts (0 allowed for interference-limited analysis).
    pub fn new(lambda: f64, power: f64, eta: f64, noise: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be > 0: {lambda}")));
        }
        if !(power > 0.0) {
            return Err(Error::InvalidConfig(format!("power must be > 0: {power}")));
        }
        if !(eta > 2.0) {
            return Err(Error::InvalidConfig(format!("eta must be > 2: {eta}")));
        }
        if !(noise >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise must be >= 0: {noise}")));
        }
        Ok(Self {
            lambda,
            power,
            eta,
            noise,
        })
    }

    /// Kilometer-based parameterization: density in BS/km^2 and a transmit
    /// SNR P/sigma_w^2 in dB understood with distances measured in km (so a
    /// link at r0 meters has average SNR (P/sigma_w^2) (r0/1000)^-eta).
    /// Transmit power is normalized to 1 W.
    pub fn from_km_units(lambda_per_km2: f64, eta: f64, tx_snr_db: f64) -> Result<Self> {
        let snr = 10f64.powf(tx_snr_db / 10.0);
        let noise = 1000f64.powf(-eta) / snr;
        Self::new(lambda_per_km2 * 1e-6, 1.0, eta, noise)
    }

    /// Interference-limited variant (no noise), km-based density.
    pub fn interference_limited(lambda_per_km2: f64, eta: f64) -> Result<Self> {
        Self::new(lambda_per_km2 * 1e-6, 1.0, eta, 0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn power(&self) -> f64 {
        self.power
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Mean received signal power at distance r0: P r0^-eta.
    pub fn mean_rx_power(&self, r0: f64) -> f64 {
        self.power * r0.powf(-self.eta)
    }

    /// Link geometry at serving distance r0 (meters).
    pub fn link(&self, r0: f64) -> Result<LinkGeometry> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidConfig(format!("r0 must be > 0: {r0}")));
        }
        let avg_snr = if self.noise == 0.0 {
            f64::INFINITY
        } else {
            self.mean_rx_power(r0) / self.noise
        };
        Ok(LinkGeometry { r0, avg_snr })
    }

    /// Laplace transform of the Gaussian-codebook interference power,
    ///
    ///   L(u) = exp{ -2 pi lambda u P r0^(2-eta) / (eta-2)
    ///               * 2F1(1, 1-2/eta; 2-2/eta; -u P / r0^eta) }.
    pub fn laplace_b_gaussian(&self, r0: f64, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!(
                "Laplace transform argument must be >= 0: {u}"
            )));
        }
        if u == 0.0 {
            return Ok(1.0);
        }
        let b = 1.0 - 2.0 / self.eta;
        let c = 2.0 - 2.0 / self.eta;
        let z = -u * self.power / r0.powf(self.eta);
        let f = gauss_2f1_nonpos(1.0, b, c, z)?;
        let exponent = -2.0 * std::f64::consts::PI * self.lambda * u * self.power
            * r0.powf(2.0 - self.eta)
            / (self.eta - 2.0)
            * f;
        Ok(exponent.exp())
    }

    /// Characteristic function of the Gaussian-codebook interference power,
    /// i.e. the Laplace transform continued to u = -i omega.
    pub fn interference_charfn(&self, r0: f64, omega: f64) -> Result<Complex64> {
        if omega == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let b = 1.0 - 2.0 / self.eta;
        let c = 2.0 - 2.0 / self.eta;
        let u = Complex64::new(0.0, -omega);
        let z = -u * self.power / r0.powf(self.eta);
        let f = gauss_2f1_unit_a_complex(b, c, z)?;
        let exponent = -u * f
            * (2.0 * std::f64::consts::PI * self.lambda * self.power
                * r0.powf(2.0 - self.eta)
                / (self.eta - 2.0));
        Ok(exponent.exp())
    }

    /// Truncated-series Laplace transform of the interference power for an
    /// arbitrary unit-power constellation with even moments E|s|^2k,
    ///
    ///   L(u) = exp{ sum_k (-1)^k 2 pi lambda r0^2 (P/r0^eta)^k
    ///               E|s|^2k u^k / ((eta k - 2) k!) }.
    ///
    /// Returns the value together with the magnitude of the last retained
    /// exponent term; errors out if that term is still significant.
    pub fn laplace_b_series(
        &self,
        r0: f64,
        u: f64,
        moments: &ConstellationMoments,
        terms: usize,
    ) -> Result<SeriesLaplace> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!(
                "Laplace transform argument must be >= 0: {u}"
            )));
        }
        let k_max = terms.min(moments.len());
        if k_max == 0 {
            return Err(Error::InvalidConfig(
                "series evaluation needs at least one moment".to_string(),
            ));
        }
        let prefactor = 2.0 * std::f64::consts::PI * self.lambda * r0 * r0;
        let x = u * self.power / r0.powf(self.eta);
        let mut exponent = 0.0f64;
        let mut term = 0.0f64;
        let mut pow = 1.0f64; // x^k / k!
        let mut sign = 1.0f64;
        for k in 1..=k_max {
            pow *= x / k as f64;
            sign = -sign;
            term = sign * prefactor * pow * moments.moment(k) / (self.eta * k as f64 - 2.0);
            exponent += term;
        }
        let last_term = term.abs();
        if last_term > 1e-10 * exponent.abs().max(1.0) {
            return Err(Error::Truncation { last_term });
        }
        Ok(SeriesLaplace {
            value: exponent.exp(),
            last_term,
        })
    }

    /// Closed-form first two moments of the interference power.
    pub fn b_moments(&self, r0: f64) -> InterferenceMoments {
        let pi = std::f64::consts::PI;
        let mean = 2.0 * pi * self.lambda * r0.powf(2.0 - self.eta) * self.power
            / (self.eta - 2.0);
        let second = mean * mean
            + pi * self.lambda * r0.powf(2.0 - 2.0 * self.eta) * self.power * self.power
                / (self.eta - 1.0);
        InterferenceMoments {
            mean,
            second_moment: second,
        }
    }

    /// Gamma approximation of the interference power by moment matching:
    /// shape q = 4 pi lambda r0^2 (eta-1)/(eta-2)^2,
    /// scale theta = (eta-2) P / (2 (eta-1) r0^eta).
    pub fn gamma_fit(&self, r0: f64) -> GammaApprox {
        let pi = std::f64::consts::PI;
        let shape = 4.0 * pi * self.lambda * r0 * r0 * (self.eta - 1.0)
            / ((self.eta - 2.0) * (self.eta - 2.0));
        let scale =
            (self.eta - 2.0) * self.power / (2.0 * (self.eta - 1.0) * r0.powf(self.eta));
        GammaApprox { shape, scale }
    }

    /// CDF of the interference power, either through the moment-matched
    /// Gamma law or by Gil-Pelaez inversion of the exact characteristic
    /// function.
    pub fn interference_cdf(&self, r0: f64, x: f64, method: CdfMethod) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "interference CDF argument must be > 0: {x}"
            )));
        }
        match method {
            CdfMethod::Gamma => Ok(self.gamma_fit(r0).cdf(x)),
            CdfMethod::Exact => {
                // Rescale B to units of the Gamma scale so the inversion
                // works on O(1) quantities.
                let scale = self.gamma_fit(r0).scale;
                let spec = IntegrationSpec::semi_infinite(1e-6)?
                    .with_tolerances(1e-9, 1e-8)?
                    .with_max_subdivisions(4000);
                gil_pelaez_cdf(
                    |w| {
                        self.interference_charfn(r0, w / scale)
                            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                    },
                    x / scale,
                    &spec,
                )
            }
        }
    }

    /// Conditional SINR density under the Gamma interference approximation,
    ///
    ///   f(v|r0) = e^{-v sw2/(P r0^-eta)} / (P r0^-eta)
    ///             * ((1 + theta r0^eta v / P) sw2 + q theta)
    ///             / (1 + theta r0^eta v / P)^(q+1).
    pub fn sinr_pdf_gamma(&self, r0: f64, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        let s = self.mean_rx_power(r0);
        let GammaApprox { shape, scale } = self.gamma_fit(r0);
        let t = 1.0 + scale * v / s;
        (-v * self.noise / s).exp() / s * (t * self.noise + shape * scale) / t.powf(shape + 1.0)
    }

    /// Survival function of the conditional SINR under the Gamma
    /// approximation: P(SINR > v | r0) = e^{-v/alpha0} (1 + theta r0^eta v/P)^-q.
    pub fn sinr_survival_gamma(&self, r0: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 1.0;
        }
        let s = self.mean_rx_power(r0);
        let GammaApprox { shape, scale } = self.gamma_fit(r0);
        (-v * self.noise / s).exp() * (1.0 + scale * v / s).powf(-shape)
    }

    /// Distribution of the serving distance r0 (nearest PPP point).
    pub fn serving_distance(&self) -> ServingDistance {
        ServingDistance {
            lambda: self.lambda,
        }
    }
}

/// Result of the truncated-series Laplace transform.
#[derive(Debug, Clone, Copy)]
pub struct SeriesLaplace {
    pub value: f64,
    /// Magnitude of the last retained exponent term.
    pub last_term: f64,
}

/// Serving distance r0 and the derived average SNR alpha0 = P r0^-eta / sw2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    r0: f64,
    avg_snr: f64,
}

impl LinkGeometry {
    pub fn r0(&self) -> f64 {
        self.r0
    }
    /// Average SNR alpha0; +inf for interference-limited configs.
    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }
}

/// First two moments of the interference power.
#[derive(Debug, Clone, Copy)]
pub struct InterferenceMoments {
    pub mean: f64,
    pub second_moment: f64,
}

impl InterferenceMoments {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// Moment-matched Gamma(shape, scale) approximation of the interference
/// power.
#[derive(Debug, Clone, Copy)]
pub struct GammaApprox {
    pub shape: f64,
    pub scale: f64,
}

impl GammaApprox {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, x / self.scale)
        }
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
}

/// Interference CDF evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfMethod {
    /// Gil-Pelaez inversion of the exact characteristic function.
    Exact,
    /// Moment-matched Gamma law.
    Gamma,
}

/// Even absolute moments E|s|^2k, k = 1..K, of a unit-power constellation.
#[derive(Debug, Clone)]
pub struct ConstellationMoments {
    moments: Vec<f64>,
}

impl ConstellationMoments {
    /// Moments supplied directly; E|s|^2 must be 1 (unit average power).
    pub fn new(moments: Vec<f64>) -> Result<Self> {
        if moments.is_empty() {
            return Err(Error::InvalidConfig("need at least E|s|^2".to_string()));
        }
        if (moments[0] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "unit average power required, E|s|^2 = {}",
                moments[0]
            )));
        }
        if moments.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidConfig(
                "even moments must be nonnegative".to_string(),
            ));
        }
        Ok(Self { moments })
    }

    /// Gaussian codebook: E|s|^2k = k!.
    pub fn gaussian(k_max: usize) -> Self {
        let mut m = Vec::with_capacity(k_max);
        let mut f = 1.0f64;
        for k in 1..=k_max {
            f *= k as f64;
            m.push(f);
        }
        Self { moments: m }
    }

    /// Constant-modulus symbols (PSK/4-QAM): E|s|^2k = 1.
    pub fn constant_modulus(k_max: usize) -> Self {
        Self {
            moments: vec![1.0; k_max],
        }
    }

    /// E|s|^2k of `symbols`, assumed unit average power.
    pub fn from_symbols(symbols: &[Complex64], k_max: usize) -> Self {
        let mut m = vec![0.0f64; k_max];
        for s in symbols {
            let p = s.norm_sqr();
            let mut pk = 1.0;
            for slot in m.iter_mut() {
                pk *= p;
                *slot += pk;
            }
        }
        for slot in m.iter_mut() {
            *slot /= symbols.len() as f64;
        }
        Self { moments: m }
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    /// E|s|^{2k}, 1-indexed.
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k - 1]
    }
}

/// Rayleigh law of the distance to the nearest PPP point:
/// f(r) = 2 pi lambda r e^{-pi lambda r^2}.
#[derive(Debug, Clone, Copy)]
pub struct ServingDistance {
    lambda: f64,
}

impl ServingDistance {
    pub fn pdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let pl = std::f64::consts::PI * self.lambda;
        2.0 * pl * r * (-pl * r * r).exp()
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        -(-std::f64::consts::PI * self.lambda * r * r).exp_m1()
    }

    /// Inverse CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("quantile requires p in [0,1): {p}")));
        }
        Ok(((-(1.0 - p).ln()) / (std::f64::consts::PI * self.lambda)).sqrt())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        // 1 - u in (0, 1]; avoids ln(0)
        ((-(1.0 - u).ln()) / (std::f64::consts::PI * self.lambda)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg_eta4() -> NetworkConfig {
        NetworkConfig::new(1e-6, 1.0, 4.0, 1e-12).unwrap()
    }

    /// eta = 4 closed form from the spatial-outage derivation:
    /// L(u) = exp{-pi lambda sqrt(uP) arctan(sqrt(uP)/r0^2)}.
    fn laplace_eta4(cfg: &NetworkConfig, r0: f64, u: f64) -> f64 {
        let up = (u * cfg.power()).sqrt();
        (-std::f64::consts::PI * cfg.lambda() * up * (up / (r0 * r0)).atan()).exp()
    }

    #[test]
    fn config_invariants() {
        assert!(NetworkConfig::new(0.0, 1.0, 4.0, 0.0).is_err());
        assert!(NetworkConfig::new(1e-6, -1.0, 4.0, 0.0).is_err());
        assert!(NetworkConfig::new(1e-6, 1.0, 2.0, 0.0).is_err());
        assert!(NetworkConfig::new(1e-6, 1.0, 4.0, -1.0).is_err());
        let cfg = cfg_eta4();
        assert!(cfg.link(0.0).is_err());
        let g = cfg.link(150.0).unwrap();
        let expected = 150f64.powf(-4.0) / 1e-12;
        assert!((g.avg_snr() - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn laplace_at_origin_and_eta4_point() {
        let cfg = cfg_eta4();
        assert_eq!(cfg.laplace_b_gaussian(150.0, 0.0).unwrap(), 1.0);
        // u = r0^4/P makes arctan(1) = pi/4:
        // L = exp(-pi lambda r0^2 pi/4) ~ 0.94600
        let r0 = 150.0f64;
        let u = r0.powi(4);
        let v = cfg.laplace_b_gaussian(r0, u).unwrap();
        let expected =
            (-std::f64::consts::PI * 1e-6 * r0 * r0 * std::f64::consts::FRAC_PI_4).exp();
        assert!((v - expected).abs() < 1e-8, "{v} vs {expected}");
        assert!((v - 0.94600).abs() < 5e-6);
        assert!(cfg.laplace_b_gaussian(r0, -1.0).is_err());
    }

    #[test]
    fn laplace_eta4_closed_form_across_grid() {
        // 1e-8 relative agreement over u in [1e-3, 1e3] * r0^4 / P
        let cfg = cfg_eta4();
        let r0 = 200.0f64;
        for i in 0..=100 {
            let log_u = -3.0 + 6.0 * i as f64 / 100.0;
            let u = 10f64.powf(log_u) * r0.powi(4) / cfg.power();
            let via_2f1 = cfg.laplace_b_gaussian(r0, u).unwrap();
            let closed = laplace_eta4(&cfg, r0, u);
            assert!(
                (via_2f1 - closed).abs() <= 1e-8 * closed,
                "u={u}: {via_2f1} vs {closed}"
            );
        }
    }

    #[test]
    fn laplace_monotonicity() {
        let cfg = cfg_eta4();
        let r0 = 150.0f64;
        let mut prev = 1.0;
        for i in 1..=40 {
            let u = r0.powi(4) * i as f64 / 10.0;
            let v = cfg.laplace_b_gaussian(r0, u).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        // decreasing in lambda pointwise
        let denser = NetworkConfig::new(4e-6, 1.0, 4.0, 1e-12).unwrap();
        let u = r0.powi(4);
        assert!(
            denser.laplace_b_gaussian(r0, u).unwrap() < cfg.laplace_b_gaussian(r0, u).unwrap()
        );
    }

    #[test]
    fn laplace_vanishing_density() {
        let sparse = NetworkConfig::new(1e-300, 1.0, 4.0, 1e-12).unwrap();
        for &u in &[1e-9, 1.0, 1e9] {
            assert!((sparse.laplace_b_gaussian(100.0, u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn series_matches_gaussian_closed_form() {
        let cfg = cfg_eta4();
        let r0 = 150.0f64;
        let moments = ConstellationMoments::gaussian(20);
        for i in 1..=10 {
            let u = 0.01 * i as f64 * r0.powf(cfg.eta()) / cfg.power();
            let series = cfg.laplace_b_series(r0, u, &moments, 20).unwrap();
            let closed = cfg.laplace_b_gaussian(r0, u).unwrap();
            assert!(
                (series.value - closed).abs() <= 1e-6 * closed + series.last_term,
                "u={u}: {} vs {closed}",
                series.value
            );
        }
    }

    #[test]
    fn series_first_order_is_mean() {
        // constant-modulus first-order exponent term = -E{B} u
        let cfg = cfg_eta4();
        let r0 = 150.0f64;
        let u = 1e-3f64 * r0.powf(cfg.eta());
        let exponent = -2.0 * std::f64::consts::PI * cfg.lambda() * r0 * r0
            * (cfg.power() / r0.powf(cfg.eta()))
            * u
            / (cfg.eta() - 2.0);
        let mean = cfg.b_moments(r0).mean;
        assert!((exponent - (-mean * u)).abs() < 1e-15 * (mean * u).abs());
    }

    #[test]
    fn series_truncation_error_reported() {
        let cfg = cfg_eta4();
        let r0 = 150.0f64;
        // huge argument: alternating series cannot settle in 20 terms
        let u = 100.0 * r0.powf(cfg.eta());
        let m = ConstellationMoments::gaussian(20);
        match cfg.laplace_b_series(r0, u, &m, 20) {
            Err(Error::Truncation { last_term }) => assert!(last_term > 0.0),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn moments_closed_forms() {
        let cfg = cfg_eta4();
        let m = cfg.b_moments(150.0);
        // mean = 2 pi 1e-6 150^-2 / 2 = pi 1e-6 / 22500
        let expected = std::f64::consts::PI * 1e-6 / 22500.0;
        assert!((m.mean - expected).abs() < 1e-15 * expected);
        assert!((m.mean - 1.3963e-10).abs() < 1e-14);
        // variance = pi lambda r0^(2-2 eta) P^2 / (eta-1)
        let var = std::f64::consts::PI * 1e-6 * 150f64.powf(-6.0) / 3.0;
        assert!((m.variance() - var).abs() < 1e-12 * var);
        // lambda -> 0 limit
        let sparse = NetworkConfig::new(1e-300, 1.0, 4.0, 0.0).unwrap();
        assert!(sparse.b_moments(150.0).mean < 1e-290);
    }

    #[test]
    fn gamma_fit_values_and_identities() {
        let cfg = cfg_eta4();
        let r0 = 150.0f64;
        let fit = cfg.gamma_fit(r0);
        assert!((fit.shape - 0.212058).abs() < 1e-6);
        assert!((fit.scale - 6.5844e-10).abs() < 1e-13);
        // moment matching identities, 1e-10 relative
        let m = cfg.b_moments(r0);
        assert!((fit.mean() - m.mean).abs() < 1e-10 * m.mean);
        assert!((fit.shape * fit.scale * fit.scale - m.variance()).abs() < 1e-10 * m.variance());
        // q = mean^2/var, theta = var/mean
        assert!((fit.shape - m.mean * m.mean / m.variance()).abs() < 1e-10 * fit.shape);
        assert!((fit.scale - m.variance() / m.mean).abs() < 1e-10 * fit.scale);
        // doubling lambda doubles q, leaves theta unchanged
        let denser = NetworkConfig::new(2e-6, 1.0, 4.0, 1e-12).unwrap();
        let fit2 = denser.gamma_fit(r0);
        assert!((fit2.shape - 2.0 * fit.shape).abs() < 1e-12 * fit.shape);
        assert!((fit2.scale - fit.scale).abs() < 1e-15);
    }

    #[test]
    fn neg_log_laplace_derivative_matches_mean() {
        // d/du of -log L(u) at u = 0 equals E{B} (finite difference, 1e-4 rel)
        let cfg = cfg_eta4();
        let r0 = 250.0;
        let mean = cfg.b_moments(r0).mean;
        let h = 1e-6 / mean;
        let deriv = -(cfg.laplace_b_gaussian(r0, h).unwrap().ln()) / h;
        assert!((deriv - mean).abs() < 1e-4 * mean, "{deriv} vs {mean}");
    }

    #[test]
    fn interference_cdf_exact_matches_mc_oracle() {
        // Frozen oracle: 2e6-realization Monte Carlo of
        // B = sum P |s_i|^2 r_i^-eta with Exp(1) powers on the annulus
        // [r0, 30/sqrt(pi lambda)], lambda = 1e-6, r0 = 150, eta = 4.
        let cfg = cfg_eta4();
        let r0 = 150.0f64;
        let scale = cfg.gamma_fit(r0).scale;
        for &(mult, f_mc, tol) in &[
            (0.5, 0.90680, 0.003),
            (2.0, 0.97912, 0.002),
            (8.0, 0.99913, 0.001),
        ] {
            let exact = cfg
                .interference_cdf(r0, mult * scale, CdfMethod::Exact)
                .unwrap();
            assert!(
                (exact - f_mc).abs() < tol,
                "x = {mult} theta: exact {exact} vs MC {f_mc}"
            );
        }
        // monotone in x, and the Gamma route matches the fit's own CDF
        let fit = cfg.gamma_fit(r0);
        let mut prev = 0.0;
        for i in 1..=8 {
            let x = fit.scale * i as f64 / 2.0;
            let g = cfg.interference_cdf(r0, x, CdfMethod::Gamma).unwrap();
            assert!((g - fit.cdf(x)).abs() < 1e-14);
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn sinr_pdf_normalizes_and_limits() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 10.0).unwrap();
        let r0 = 250.0;
        let spec = IntegrationSpec::semi_infinite(0.0)
            .unwrap()
            .with_tolerances(1e-9, 1e-10)
            .unwrap();
        let total = integrate(|v| cfg.sinr_pdf_gamma(r0, v), &spec).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "got {total}");
        // v = 0 value: (sw2 + q theta)/(P r0^-eta)
        let fit = cfg.gamma_fit(r0);
        let expected = (cfg.noise() + fit.shape * fit.scale) / cfg.mean_rx_power(r0);
        assert!((cfg.sinr_pdf_gamma(r0, 0.0) - expected).abs() < 1e-12 * expected);
        // q -> 0 (lambda -> 0): exponential with mean alpha0
        let sparse = NetworkConfig::new(1e-30, 1.0, 4.0, 1e-12).unwrap();
        let alpha0 = sparse.link(r0).unwrap().avg_snr();
        for &v in &[0.1 * alpha0, alpha0, 3.0 * alpha0] {
            let f = sparse.sinr_pdf_gamma(r0, v);
            let expo = (-v / alpha0).exp() / alpha0;
            assert!((f - expo).abs() < 1e-6 * expo, "{f} vs {expo}");
        }
    }

    #[test]
    fn serving_distance_law() {
        let cfg = cfg_eta4();
        let d = cfg.serving_distance();
        let spec = IntegrationSpec::semi_infinite(0.0)
            .unwrap()
            .with_tolerances(1e-10, 1e-12)
            .unwrap();
        let total = integrate(|r| d.pdf(r), &spec).unwrap();
        assert!((total - 1.0).abs() < 1e-9);
        // mode at 1/sqrt(2 pi lambda)
        let mode = 1.0 / (2.0 * std::f64::consts::PI * 1e-6).sqrt();
        let eps = 1e-3 * mode;
        assert!(d.pdf(mode) > d.pdf(mode - eps) && d.pdf(mode) > d.pdf(mode + eps));
        // median = sqrt(ln 2 / (pi lambda)) ~ 469.7 m
        let median = d.quantile(0.5).unwrap();
        assert!((median - (2f64.ln() / (std::f64::consts::PI * 1e-6)).sqrt()).abs() < 1e-9);
        assert!((median - 469.7).abs() < 0.05);
    }

    #[test]
    fn serving_distance_sampler_matches_cdf() {
        let cfg = cfg_eta4();
        let d = cfg.serving_distance();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000usize;
        let mut samples: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, &r) in samples.iter().enumerate() {
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            let c = d.cdf(r);
            ks = ks.max((c - emp_hi).abs()).max((c - emp_lo).abs());
        }
        assert!(ks < 0.015, "KS = {ks}");
    }

    #[test]
    fn km_units_roundtrip() {
        // 0 dB transmit SNR in km units at r0 = 200 m gives alpha0 = 625
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
        let a0 = cfg.link(200.0).unwrap().avg_snr();
        assert!((a0 - 625.0).abs() < 1e-9 * 625.0, "alpha0 = {a0}");
    }
}
