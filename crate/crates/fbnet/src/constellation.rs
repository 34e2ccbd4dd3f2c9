//! Finite-constellation achievable rates.
//!
//! For an M-ary constellation with unit average power the conditional mutual
//! information and the conditional dispersion (variance of the information
//! density) at SINR v are plane integrals against the Gaussian weight
//! e^{-||t||^2}:
//!
//!   I(v)  = log2 M - (1/(M pi)) sum_m  int e^{-||t||^2} g_m(t) dt,
//!   V(v)  = (1/M) sum_m { E[g_m^2] - E[g_m]^2 },   E[.] = (1/pi) int e^{-||t||^2} (.) dt,
//!   g_m(t) = log2 sum_l exp(-2 sqrt(v) t.(s_m - s_l) - v ||s_m - s_l||^2),
//!
//! evaluated with a shared Gauss-Hermite rule. Network averages integrate
//! these against the Gamma-approximate SINR density; a lookup table built
//! once per constellation keeps the repeated averaging cheap.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::network::{LinkGeometry, NetworkConfig};
use crate::numerics::{integrate, Hermite2dRule, IntegrationSpec};
use crate::rate::{average_over_r0, CodingConfig, RateResult};
use crate::{Error, Result};

/// Default Gauss-Hermite order per dimension. The integrands are softplus
/// sums whose analytic strip narrows like 1/sqrt(v); 192^2 nodes keep both
/// the MI and the dispersion within ~5e-8 for M <= 16 across v <= 100
/// (checked against order 384).
pub const DEFAULT_HERMITE_ORDER: usize = 192;

fn default_rule() -> &'static Hermite2dRule {
    static RULE: OnceLock<Hermite2dRule> = OnceLock::new();
    RULE.get_or_init(|| Hermite2dRule::new(DEFAULT_HERMITE_ORDER))
}

/// An M-ary complex constellation with unit average power and a bit
/// labeling.
#[derive(Debug, Clone)]
pub struct Constellation {
    name: String,
    symbols: Vec<Complex64>,
    labels: Vec<u32>,
    // cached pairwise differences d_ml = s_m - s_l as (re, im, |d|^2)
    diffs: Vec<(f64, f64, f64)>,
    // one symbol per dihedral-symmetry orbit with its multiplicity; the
    // Gaussian weight shares the symmetries, so per-symbol expectations of
    // g_m coincide within an orbit
    orbit_reps: Vec<(usize, f64)>,
}

impl Constellation {
    /// Builds a constellation after checking unit power, distinctness, and
    /// that the labels form a bijection onto {0,1}^log2(M).
    pub fn new(name: impl Into<String>, symbols: Vec<Complex64>, labels: Vec<u32>) -> Result<Self> {
        let m = symbols.len();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "constellation order must be a power of two >= 2, got {m}"
            )));
        }
        if labels.len() != m {
            return Err(Error::InvalidConfig(
                "labels must match the symbol count".to_string(),
            ));
        }
        let mut seen = vec![false; m];
        for &l in &labels {
            let idx = l as usize;
            if idx >= m || seen[idx] {
                return Err(Error::InvalidConfig(format!(
                    "labels must be a bijection onto 0..{m}"
                )));
            }
            seen[idx] = true;
        }
        let avg_power: f64 = symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / m as f64;
        if (avg_power - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "unit average power required, got {avg_power}"
            )));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if (symbols[i] - symbols[j]).norm_sqr() < 1e-24 {
                    return Err(Error::InvalidConfig("symbols must be distinct".to_string()));
                }
            }
        }
        let mut diffs = Vec::with_capacity(m * m);
        for sm in &symbols {
            for sl in &symbols {
                let d = sm - sl;
                diffs.push((d.re, d.im, d.norm_sqr()));
            }
        }
        let orbit_reps = symmetry_orbits(&symbols);
        Ok(Self {
            name: name.into(),
            symbols,
            labels,
            diffs,
            orbit_reps,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.symbols.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.symbols.len().trailing_zeros() as usize
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Smallest squared distance between distinct symbols.
    pub fn min_dist_sq(&self) -> f64 {
        self.diffs
            .iter()
            .map(|d| d.2)
            .filter(|&dd| dd > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// The eight signed-axis transforms of the plane (sign flips and swap).
fn dihedral(t: usize, s: Complex64) -> Complex64 {
    let (a, b) = if t & 4 != 0 { (s.im, s.re) } else { (s.re, s.im) };
    Complex64::new(
        if t & 1 != 0 { -a } else { a },
        if t & 2 != 0 { -b } else { b },
    )
}

/// Groups symbols into orbits under the dihedral transforms that map the
/// constellation onto itself. Returns one representative per orbit with the
/// orbit size as weight.
fn symmetry_orbits(symbols: &[Complex64]) -> Vec<(usize, f64)> {
    let m = symbols.len();
    let find = |s: Complex64| -> Option<usize> {
        symbols
            .iter()
            .position(|&x| (x - s).norm_sqr() < 1e-20)
    };
    // transforms that permute the symbol set
    let valid: Vec<usize> = (0..8)
        .filter(|&t| symbols.iter().all(|&s| find(dihedral(t, s)).is_some()))
        .collect();
    let mut orbit = vec![usize::MAX; m];
    let mut reps = Vec::new();
    for i in 0..m {
        if orbit[i] != usize::MAX {
            continue;
        }
        let rep = reps.len();
        let mut stack = vec![i];
        orbit[i] = rep;
        let mut size = 0f64;
        while let Some(j) = stack.pop() {
            size += 1.0;
            for &t in &valid {
                let k = find(dihedral(t, symbols[j])).expect("closed under valid transforms");
                if orbit[k] == usize::MAX {
                    orbit[k] = rep;
                    stack.push(k);
                }
            }
        }
        reps.push((i, size));
    }
    reps
}

/// Gray code of an index.
fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// Unit-power M-QAM. M = 2 is BPSK on the real axis, M = 4 is QPSK, M = 8
/// the rectangular 4x2 grid, M = 16 the square grid, with per-dimension
/// Gray labeling.
pub fn make_qam(m: usize) -> Result<Constellation> {
    let (re_levels, im_levels) = match m {
        2 => (2usize, 1usize),
        4 => (2, 2),
        8 => (4, 2),
        16 => (4, 4),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "unsupported constellation order {m} (expected 2, 4, 8, or 16)"
            )))
        }
    };
    let pam = |levels: usize, idx: usize| 2.0 * idx as f64 - (levels as f64 - 1.0);
    // average power of the unnormalized grid
    let dim_power = |levels: usize| -> f64 {
        (0..levels).map(|i| pam(levels, i).powi(2)).sum::<f64>() / levels as f64
    };
    let norm = (dim_power(re_levels) + dim_power(im_levels)).sqrt();
    let re_bits = re_levels.trailing_zeros();
    let mut symbols = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for ii in 0..im_levels {
        for ri in 0..re_levels {
            symbols.push(Complex64::new(
                pam(re_levels, ri) / norm,
                pam(im_levels, ii) / norm,
            ));
            labels.push(gray(ri as u32) | (gray(ii as u32) << re_bits));
        }
    }
    let name = match m {
        2 => "BPSK".to_string(),
        4 => "4-QAM".to_string(),
        other => format!("{other}-QAM"),
    };
    Constellation::new(name, symbols, labels)
}

/// log2 of sum_l exp(-2 sqrt(v) t.d_ml - v ||d_ml||^2) via log-sum-exp.
#[inline]
fn g_m(diffs: &[(f64, f64, f64)], sqrt_v: f64, v: f64, t1: f64, t2: f64) -> f64 {
    let mut max_x = 0.0f64; // the l = m term has exponent 0
    let mut exps = [0.0f64; 16];
    debug_assert!(diffs.len() <= 16);
    for (i, &(dre, dim, dd)) in diffs.iter().enumerate() {
        let x = -2.0 * sqrt_v * (t1 * dre + t2 * dim) - v * dd;
        exps[i] = x;
        if x > max_x {
            max_x = x;
        }
    }
    let mut sum = 0.0f64;
    for &x in &exps[..diffs.len()] {
        sum += (x - max_x).exp();
    }
    (max_x + sum.ln()) * std::f64::consts::LOG2_E
}

/// Conditional mutual information (bits/use) of the constellation over an
/// AWGN channel at SINR `v`, with an explicit Hermite rule.
pub fn cond_mi_with_rule(c: &Constellation, v: f64, rule: &Hermite2dRule) -> f64 {
    let m = c.order();
    let log2m = (m as f64).log2();
    if v <= 0.0 {
        return 0.0;
    }
    let sqrt_v = v.sqrt();
    let mut total = 0.0f64;
    for &(mi, mult) in &c.orbit_reps {
        let diffs = &c.diffs[mi * m..(mi + 1) * m];
        let mut acc = 0.0f64;
        for (&(t1, t2), &w) in rule.nodes().iter().zip(rule.weights()) {
            acc += w * g_m(diffs, sqrt_v, v, t1, t2);
        }
        total += mult * acc;
    }
    (log2m - total / (m as f64 * std::f64::consts::PI)).max(0.0)
}

/// Conditional dispersion V_M (bits^2/use^2): the per-symbol variance of the
/// information density, averaged over symbols. Shares quadrature nodes
/// between the squared-log and log terms.
pub fn cond_dispersion_with_rule(c: &Constellation, v: f64, rule: &Hermite2dRule) -> f64 {
    let m = c.order();
    if v <= 0.0 {
        return 0.0;
    }
    let sqrt_v = v.sqrt();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let mut total = 0.0f64;
    for &(mi, mult) in &c.orbit_reps {
        let diffs = &c.diffs[mi * m..(mi + 1) * m];
        let mut first = 0.0f64;
        let mut second = 0.0f64;
        for (&(t1, t2), &w) in rule.nodes().iter().zip(rule.weights()) {
            let g = g_m(diffs, sqrt_v, v, t1, t2);
            first += w * g;
            second += w * g * g;
        }
        first *= inv_pi;
        second *= inv_pi;
        total += mult * (second - first * first).max(0.0);
    }
    total / m as f64
}

/// [`cond_mi_with_rule`] with the default order-48 rule.
pub fn cond_mi(c: &Constellation, v: f64) -> f64 {
    cond_mi_with_rule(c, v, default_rule())
}

/// [`cond_dispersion_with_rule`] with the default order-48 rule.
pub fn cond_dispersion(c: &Constellation, v: f64) -> f64 {
    cond_dispersion_with_rule(c, v, default_rule())
}

/// Monotone-cubic (PCHIP) lookup table of cond_mi and sqrt(cond_dispersion)
/// over SINR, built once per constellation. Beyond `v_max` the MI has
/// saturated to log2(M) and the dispersion to 0 (both to ~1e-12), so the
/// table extends by those constants.
#[derive(Debug, Clone)]
pub struct QamRateLut {
    v: Vec<f64>,
    mi: Vec<f64>,
    mi_deriv: Vec<f64>,
    sd: Vec<f64>,
    sd_deriv: Vec<f64>,
    log2m: f64,
    v_max: f64,
}

/// Fritsch-Carlson monotone cubic slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0f64; n];
    if n < 2 {
        return d;
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d
}

fn cubic_eval(x: &[f64], y: &[f64], d: &[f64], xq: f64) -> f64 {
    let n = x.len();
    if xq <= x[0] {
        return y[0];
    }
    if xq >= x[n - 1] {
        return y[n - 1];
    }
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x[mid] <= xq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = x[hi] - x[lo];
    let t = (xq - x[lo]) / h;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y[lo] + h10 * h * d[lo] + h01 * y[hi] + h11 * h * d[hi]
}

impl QamRateLut {
    pub fn new(c: &Constellation) -> Self {
        Self::with_rule(c, default_rule())
    }

    pub fn with_rule(c: &Constellation, rule: &Hermite2dRule) -> Self {
        // MI gap and dispersion decay like exp(-v dmin^2/4); spread nodes in
        // log(1 + v/v0) out to where both are < 1e-12.
        let dmin2 = c.min_dist_sq();
        let v_max = (120.0 / dmin2).max(50.0);
        let v0 = 1e-2;
        let n_nodes = 480usize;
        let t_max = (1.0 + v_max / v0).ln();
        let mut v = Vec::with_capacity(n_nodes + 1);
        v.push(0.0);
        for i in 1..=n_nodes {
            v.push(v0 * ((t_max * i as f64 / n_nodes as f64).exp() - 1.0));
        }
        let mi: Vec<f64> = v.iter().map(|&vv| cond_mi_with_rule(c, vv, rule)).collect();
        let sd: Vec<f64> = v
            .iter()
            .map(|&vv| cond_dispersion_with_rule(c, vv, rule).sqrt())
            .collect();
        let mi_deriv = pchip_slopes(&v, &mi);
        let sd_deriv = pchip_slopes(&v, &sd);
        Self {
            v,
            mi,
            mi_deriv,
            sd,
            sd_deriv,
            log2m: (c.order() as f64).log2(),
            v_max,
        }
    }

    pub fn mi(&self, v: f64) -> f64 {
        if v >= self.v_max {
            self.log2m
        } else {
            cubic_eval(&self.v, &self.mi, &self.mi_deriv, v)
        }
    }

    pub fn sqrt_dispersion(&self, v: f64) -> f64 {
        if v >= self.v_max {
            0.0
        } else {
            cubic_eval(&self.v, &self.sd, &self.sd_deriv, v)
        }
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn log2m(&self) -> f64 {
        self.log2m
    }

    /// Finite-blocklength rate at a realized SINR.
    pub fn fbr_rate(&self, v: f64, coding: &CodingConfig) -> f64 {
        self.mi(v) - self.sqrt_dispersion(v) * coding.dispersion_multiplier()
            + coding.correction()
    }
}

/// Averages `g` against the Gamma-approximate SINR density at fixed r0 over
/// [0, v_max]; the caller accounts for the tail mass beyond v_max.
fn average_against_sinr<F: Fn(f64) -> f64>(
    cfg: &NetworkConfig,
    r0: f64,
    v_max: f64,
    g: F,
) -> Result<f64> {
    // split at alpha0: the density changes character there when noise matters
    let alpha0 = cfg.link(r0)?.avg_snr();
    let split = if alpha0.is_finite() && alpha0 > 1e-6 && alpha0 < v_max {
        alpha0
    } else {
        v_max / 2.0
    };
    let spec_lo = IntegrationSpec::finite(0.0, split)?
        .with_tolerances(1e-8, 1e-11)?
        .with_max_subdivisions(600);
    let spec_hi = IntegrationSpec::finite(split, v_max)?
        .with_tolerances(1e-8, 1e-11)?
        .with_max_subdivisions(600);
    let f = |v: f64| g(v) * cfg.sinr_pdf_gamma(r0, v);
    Ok(integrate(&f, &spec_lo)? + integrate(&f, &spec_hi)?)
}

/// Average coding rate of an M-ary constellation at fixed serving distance,
/// averaging the conditional MI and square-root dispersion against the
/// Gamma-approximate SINR law.
pub fn avg_rate_qam_fixed_r0(
    c: &Constellation,
    cfg: &NetworkConfig,
    geom: &LinkGeometry,
    coding: &CodingConfig,
) -> Result<RateResult> {
    let lut = QamRateLut::new(c);
    avg_rate_qam_fixed_r0_with_lut(&lut, cfg, geom, coding)
}

/// As [`avg_rate_qam_fixed_r0`] but reusing a prebuilt per-constellation
/// table (the expensive part) across calls.
pub fn avg_rate_qam_fixed_r0_with_lut(
    lut: &QamRateLut,
    cfg: &NetworkConfig,
    geom: &LinkGeometry,
    coding: &CodingConfig,
) -> Result<RateResult> {
    let r0 = geom.r0();
    let v_max = lut.v_max();
    // beyond v_max: mi = log2 M exactly (to table accuracy), dispersion = 0
    let tail = cfg.sinr_survival_gamma(r0, v_max);
    let mi = average_against_sinr(cfg, r0, v_max, |v| lut.mi(v))? + lut.log2m() * tail;
    let sd = average_against_sinr(cfg, r0, v_max, |v| lut.sqrt_dispersion(v))?;
    Ok(RateResult {
        rate: mi - sd * coding.dispersion_multiplier() + coding.correction(),
        capacity_term: mi,
        dispersion_term: sd * coding.dispersion_multiplier(),
        correction_term: coding.correction(),
    })
}

/// Spatial average of the constellation rate over the Rayleigh
/// serving-distance law.
pub fn avg_rate_qam_spatial(
    c: &Constellation,
    cfg: &NetworkConfig,
    coding: &CodingConfig,
) -> Result<RateResult> {
    let lut = QamRateLut::new(c);
    avg_rate_qam_spatial_with_lut(&lut, cfg, coding)
}

pub fn avg_rate_qam_spatial_with_lut(
    lut: &QamRateLut,
    cfg: &NetworkConfig,
    coding: &CodingConfig,
) -> Result<RateResult> {
    let v_max = lut.v_max();
    let mi = average_over_r0(cfg, |r0| {
        let tail = cfg.sinr_survival_gamma(r0, v_max);
        Ok(average_against_sinr(cfg, r0, v_max, |v| lut.mi(v))? + lut.log2m() * tail)
    })?;
    let sd = average_over_r0(cfg, |r0| {
        average_against_sinr(cfg, r0, v_max, |v| lut.sqrt_dispersion(v))
    })?;
    Ok(RateResult {
        rate: mi - sd * coding.dispersion_multiplier() + coding.correction(),
        capacity_term: mi,
        dispersion_term: sd * coding.dispersion_multiplier(),
        correction_term: coding.correction(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qam_geometry() {
        // BPSK: {-1, +1}
        let b = make_qam(2).unwrap();
        assert_eq!(b.order(), 2);
        assert!(b.symbols().iter().any(|s| (s.re - 1.0).abs() < 1e-15 && s.im == 0.0));
        assert!(b.symbols().iter().any(|s| (s.re + 1.0).abs() < 1e-15 && s.im == 0.0));
        // QPSK: (+-1 +-j)/sqrt(2)
        let q = make_qam(4).unwrap();
        for s in q.symbols() {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((s.re.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        // 16-QAM: grid (+-1, +-3)/sqrt(10) per dimension, unit power
        let s16 = make_qam(16).unwrap();
        let p: f64 = s16.symbols().iter().map(|s| s.norm_sqr()).sum::<f64>() / 16.0;
        assert!((p - 1.0).abs() < 1e-12);
        let scale = 10f64.sqrt();
        for s in s16.symbols() {
            let (a, b) = ((s.re * scale).abs().round(), (s.im * scale).abs().round());
            assert!((a == 1.0 || a == 3.0) && (b == 1.0 || b == 3.0));
        }
        // 8-QAM: rectangular 4x2
        let s8 = make_qam(8).unwrap();
        let p8: f64 = s8.symbols().iter().map(|s| s.norm_sqr()).sum::<f64>() / 8.0;
        assert!((p8 - 1.0).abs() < 1e-12);
        assert!(make_qam(32).is_err());
    }

    #[test]
    fn labels_are_bijective_and_gray_adjacent() {
        for m in [2usize, 4, 8, 16] {
            let c = make_qam(m).unwrap();
            let mut seen = vec![false; m];
            for &l in c.labels() {
                assert!(!seen[l as usize]);
                seen[l as usize] = true;
            }
        }
        // horizontally adjacent 16-QAM symbols differ in exactly one bit
        let c = make_qam(16).unwrap();
        for row in 0..4 {
            for col in 0..3 {
                let a = c.labels()[row * 4 + col];
                let b = c.labels()[row * 4 + col + 1];
                assert_eq!((a ^ b).count_ones(), 1);
            }
        }
    }

    #[test]
    fn mi_limits() {
        for m in [2usize, 4, 8, 16] {
            let c = make_qam(m).unwrap();
            assert_eq!(cond_mi(&c, 0.0), 0.0);
            let sat = cond_mi(&c, 1e4);
            assert!(
                (sat - (m as f64).log2()).abs() < 1e-9,
                "M={m}: {sat} vs {}",
                (m as f64).log2()
            );
        }
    }

    #[test]
    fn mi_matches_1d_oracle_for_bpsk() {
        // frozen mpmath quadrature oracle for the 1-D BPSK reduction
        let c = make_qam(2).unwrap();
        for (v, expected) in [
            (0.5, 0.4859441541329353),
            (1.0, 0.7214515907903881),
            (2.0, 0.9128222857744822),
            (4.0, 0.9904618221304519),
        ] {
            let got = cond_mi(&c, v);
            assert!((got - expected).abs() < 2e-8, "v={v}: {got} vs {expected}");
        }
    }

    #[test]
    fn qpsk_decomposes_into_bpsk_pair() {
        let b = make_qam(2).unwrap();
        let q = make_qam(4).unwrap();
        for &v in &[0.5, 1.0, 2.0, 4.0] {
            let lhs = cond_mi(&q, v);
            let rhs = 2.0 * cond_mi(&b, v / 2.0);
            assert!((lhs - rhs).abs() < 1e-6, "v={v}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn dispersion_limits_and_bpsk_value() {
        let c = make_qam(2).unwrap();
        assert_eq!(cond_dispersion(&c, 0.0), 0.0);
        assert!(cond_dispersion(&c, 1e4) < 1e-8);
        // frozen mpmath oracle: Var_t[g(t)] at v = 1 and v = 0.25
        let v1 = cond_dispersion(&c, 1.0);
        assert!((v1 - 0.5332719404785635).abs() < 2e-8, "got {v1}");
        let v025 = cond_dispersion(&c, 0.25);
        assert!((v025 - 0.5544362756400662).abs() < 2e-8, "got {v025}");
    }

    #[test]
    fn dispersion_nonnegative_and_mi_monotone_grid() {
        for m in [2usize, 4, 8, 16] {
            let c = make_qam(m).unwrap();
            let mut prev = 0.0;
            for i in 0..40 {
                let v = 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
                let mi = cond_mi(&c, v);
                assert!(mi >= prev - 1e-12, "M={m} v={v}");
                assert!(cond_dispersion(&c, v) >= 0.0);
                prev = mi;
            }
        }
    }

    #[test]
    fn mi_ordered_in_m_at_moderate_snr() {
        // nested-grid dominance; checked at moderate v where it is clear-cut
        for &v in &[0.5, 1.0, 2.0, 5.0, 20.0] {
            let m2 = cond_mi(&make_qam(2).unwrap(), v);
            let m4 = cond_mi(&make_qam(4).unwrap(), v);
            let m16 = cond_mi(&make_qam(16).unwrap(), v);
            assert!(m16 >= m4 - 1e-9 && m4 >= m2 - 1e-9, "v={v}: {m2} {m4} {m16}");
        }
    }

    #[test]
    fn quadrature_order_robustness() {
        // doubling the Hermite order moves MI and dispersion by < 1e-7
        let big = Hermite2dRule::new(2 * DEFAULT_HERMITE_ORDER);
        for m in [4usize, 16] {
            let c = make_qam(m).unwrap();
            for &v in &[0.3, 3.0, 30.0, 60.0, 100.0] {
                let a = cond_mi(&c, v);
                let b = cond_mi_with_rule(&c, v, &big);
                assert!((a - b).abs() < 1e-7, "M={m} v={v}: {a} vs {b}");
                let da = cond_dispersion(&c, v);
                let db = cond_dispersion_with_rule(&c, v, &big);
                assert!((da - db).abs() < 1e-7, "M={m} v={v}: {da} vs {db}");
            }
        }
    }

    #[test]
    fn lut_matches_direct_evaluation() {
        let c = make_qam(16).unwrap();
        let lut = QamRateLut::new(&c);
        for i in 0..30 {
            let v = 10f64.powf(-2.0 + 4.5 * i as f64 / 29.0);
            let lm = lut.mi(v);
            let dm = cond_mi(&c, v);
            assert!((lm - dm).abs() < 5e-6, "v={v}: {lm} vs {dm}");
            let ls = lut.sqrt_dispersion(v);
            let ds = cond_dispersion(&c, v).sqrt();
            assert!((ls - ds).abs() < 5e-6, "v={v}: {ls} vs {ds}");
        }
    }

    #[test]
    fn qam_rate_bounded_and_increasing_toward_gaussian() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 10.0).unwrap();
        let geom = cfg.link(150.0).unwrap();
        let coding = CodingConfig::new(128, 1e-2).unwrap();
        let mut prev = 0.0;
        for m in [2usize, 4, 16] {
            let r = avg_rate_qam_fixed_r0(&make_qam(m).unwrap(), &cfg, &geom, &coding).unwrap();
            assert!(r.rate <= (m as f64).log2() + coding.correction());
            assert!(r.rate > prev, "M={m}");
            prev = r.rate;
        }
        let gauss = crate::rate::avg_rate_fixed_r0(&cfg, &geom, &coding).unwrap();
        assert!(prev < gauss.rate);
    }

    #[test]
    fn qam_spatial_bounded_by_log2m() {
        let cfg = NetworkConfig::from_km_units(1.0, 4.0, 20.0).unwrap();
        let coding = CodingConfig::new(512, 1e-2).unwrap();
        let c = make_qam(4).unwrap();
        let r = avg_rate_qam_spatial(&c, &cfg, &coding).unwrap();
        assert!(r.rate > 0.0 && r.rate <= 2.0 + coding.correction());
    }
}
