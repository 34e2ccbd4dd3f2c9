//! Polar coding: Gaussian-approximation construction, encoding by the
//! Arikan kernel power, and successive cancellation decoding.
//!
//! Index convention is natural order throughout (no bit reversal): the
//! encoder applies x = u F^(x)m in place, and the decoder's recursive split
//! decodes the check branch (worse channel) first, so synthetic channel 0 is
//! always the most degraded one.

use crate::{Error, Result};

/// A polar code: length, dimension, frozen mask, and the design SNR used to
/// pick the frozen set.
#[derive(Debug, Clone)]
pub struct PolarCode {
    n: usize,
    k: usize,
    frozen: Vec<bool>,
    design_snr_db: f64,
}

/// ln phi(x) for the Gaussian-approximation density evolution, where
/// phi(x) is the expected tanh functional of an N(x, 2x) LLR.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 10.0 {
        0.0218 - 0.4527 * x.powf(0.86)
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - 0.25 * x + (-10.0 / (7.0 * x)).ln_1p()
    }
}

/// Inverse of ln_phi by bisection (ln_phi is strictly decreasing).
fn ln_phi_inv(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = (-8.0 * target).max(64.0);
    while ln_phi(hi) > target {
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLRs of the n synthetic channels under Gaussian-approximation
/// density evolution from a BPSK channel at `es_n0_db`.
fn ga_channel_means(n: usize, es_n0_db: f64) -> Vec<f64> {
    let m0 = 4.0 * 10f64.powf(es_n0_db / 10.0);
    let mut means = vec![m0];
    while means.len() < n {
        let mut next = Vec::with_capacity(means.len() * 2);
        for &m in &means {
            // check node: phi_new = 1 - (1 - phi)^2 = 2 phi - phi^2,
            // in log domain lnphi_new = lnphi + ln(2 - phi)
            let lp = ln_phi(m);
            let check = ln_phi_inv(lp + (2.0 - lp.exp()).ln());
            next.push(check);
            next.push(2.0 * m);
        }
        means = next;
    }
    means
}

impl PolarCode {
    /// Builds an (n, k) polar code with the frozen set chosen as the n-k
    /// least reliable synthetic channels at `design_snr_db` (Es/N0 of the
    /// underlying binary-input channel).
    pub fn construct(n: usize, k: usize, design_snr_db: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "code length must be a power of two >= 2, got {n}"
            )));
        }
        if k > n {
            return Err(Error::InvalidConfig(format!(
                "dimension {k} exceeds length {n}"
            )));
        }
        let means = ga_channel_means(n, design_snr_db);
        let mut order: Vec<usize> = (0..n).collect();
        // ascending reliability; ties broken by index for determinism
        order.sort_by(|&a, &b| {
            means[a]
                .partial_cmp(&means[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut frozen = vec![false; n];
        for &idx in order.iter().take(n - k) {
            frozen[idx] = true;
        }
        Ok(Self {
            n,
            k,
            frozen,
            design_snr_db,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }
    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Encodes k information bits into an n-bit codeword: frozen positions
    /// carry 0, and the u-vector is transformed by the kernel power.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::InvalidConfig(format!(
                "expected {} information bits, got {}",
                self.k,
                info.len()
            )));
        }
        let mut x = vec![0u8; self.n];
        let mut it = info.iter();
        for (xi, &fz) in x.iter_mut().zip(self.frozen.iter()) {
            if !fz {
                *xi = *it.next().expect("length checked") & 1;
            }
        }
        polar_transform(&mut x);
        Ok(x)
    }

    /// Successive cancellation decoding. LLR convention: positive means
    /// bit 0 is more likely. Returns the k information bits.
    pub fn sc_decode(&self, llrs: &[f64]) -> Result<Vec<u8>> {
        if llrs.len() != self.n {
            return Err(Error::InvalidConfig(format!(
                "expected {} channel LLRs, got {}",
                self.n,
                llrs.len()
            )));
        }
        let mut u_hat = vec![0u8; self.n];
        let mut scratch = llrs.to_vec();
        sc_recurse(&mut scratch, &self.frozen, 0, &mut u_hat);
        Ok(self
            .frozen
            .iter()
            .zip(u_hat.iter())
            .filter(|(fz, _)| !**fz)
            .map(|(_, &b)| b)
            .collect())
    }

    /// Decoded u-vector to codeword bits (the kernel power is an involution).
    pub fn reencode_u(&self, u: &[u8]) -> Vec<u8> {
        let mut x = u.to_vec();
        polar_transform(&mut x);
        x
    }
}

/// In-place x = u F^(x)m over GF(2); self-inverse.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut len = 1;
    while len < n {
        let mut i = 0;
        while i < n {
            for j in i..i + len {
                bits[j] ^= bits[j + len];
            }
            i += 2 * len;
        }
        len *= 2;
    }
}

const LLR_CLAMP: f64 = 40.0;

/// Check-node combination, exact boxplus with clamping.
fn f_combine(a: f64, b: f64) -> f64 {
    let a = a.clamp(-LLR_CLAMP, LLR_CLAMP);
    let b = b.clamp(-LLR_CLAMP, LLR_CLAMP);
    2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh()
}

/// Variable-node combination with the decided left partial sum.
fn g_combine(a: f64, b: f64, left_bit: u8) -> f64 {
    if left_bit == 0 {
        b + a
    } else {
        b - a
    }
}

/// Recursive SC on `llr` (length = subtree size) for u indices starting at
/// `base`; fills hard decisions into `u_hat` and returns the subtree's
/// codeword bits in place of `llr`'s integer counterpart.
fn sc_recurse(llr: &mut [f64], frozen: &[bool], base: usize, u_hat: &mut [u8]) -> Vec<u8> {
    let n = llr.len();
    if n == 1 {
        let bit = if frozen[base] {
            0
        } else if llr[0] < 0.0 {
            1
        } else {
            0
        };
        u_hat[base] = bit;
        return vec![bit];
    }
    let half = n / 2;
    let mut left_llr: Vec<f64> = (0..half).map(|j| f_combine(llr[j], llr[j + half])).collect();
    let left_bits = sc_recurse(&mut left_llr, frozen, base, u_hat);
    let mut right_llr: Vec<f64> = (0..half)
        .map(|j| g_combine(llr[j], llr[j + half], left_bits[j]))
        .collect();
    let right_bits = sc_recurse(&mut right_llr, frozen, base + half, u_hat);
    let mut out = vec![0u8; n];
    for j in 0..half {
        out[j] = left_bits[j] ^ right_bits[j];
        out[j + half] = right_bits[j];
    }
    out
}
