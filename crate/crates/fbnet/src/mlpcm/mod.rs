//! Multilevel polar-coded modulation with multistage decoding.
//!
//! A message of k log2(M) bits is split into log2(M) equal-rate
//! sub-messages, each polar-encoded to length n; symbol j collects bit j of
//! every codeword and maps it to an M-QAM point under a set-partitioning
//! labeling (level 1 is the finest partition bit). The receiver demaps and
//! decodes level by level, re-encoding each decision to condition the next
//! stage's demapper.

mod polar;

pub use polar::{polar_transform, PolarCode};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constellation::{make_qam, Constellation};
use crate::network::NetworkConfig;
use crate::sim::SimPlan;
use crate::{Error, Result};

/// Multilevel scheme: a constellation, one equal-rate polar code per bit
/// level, and the set-partitioning label map.
#[derive(Debug, Clone)]
pub struct MlpcmScheme {
    constellation: Constellation,
    codes: Vec<PolarCode>,
    /// symbol index for each set-partitioning label
    symbol_of_label: Vec<usize>,
}

/// Set-partitioning labels for the rectangular QAM grids produced by
/// [`make_qam`]: per-dimension natural-binary PAM indices, interleaved LSB
/// first (level 1 = finest partition).
fn sp_labels(m: usize) -> Result<Vec<usize>> {
    let (re_levels, im_levels) = match m {
        2 => (2usize, 1usize),
        4 => (2, 2),
        8 => (4, 2),
        16 => (4, 4),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "unsupported constellation order {m}"
            )))
        }
    };
    let re_bits = re_levels.trailing_zeros() as usize;
    let im_bits = im_levels.trailing_zeros() as usize;
    let mut labels = Vec::with_capacity(m);
    // symbol order must match make_qam: row-major, imaginary outer
    for ii in 0..im_levels {
        for ri in 0..re_levels {
            let mut label = 0usize;
            let mut pos = 0;
            for bit in 0..re_bits.max(im_bits) {
                if bit < re_bits {
                    label |= ((ri >> bit) & 1) << pos;
                    pos += 1;
                }
                if bit < im_bits {
                    label |= ((ii >> bit) & 1) << pos;
                    pos += 1;
                }
            }
            labels.push(label);
        }
    }
    Ok(labels)
}

impl MlpcmScheme {
    /// Equal per-level rate k/n, frozen sets from Gaussian-approximation
    /// density evolution at `design_snr_db`.
    pub fn new(m: usize, n: usize, k_per_level: usize, design_snr_db: f64) -> Result<Self> {
        let constellation = make_qam(m)?;
        let levels = constellation.bits_per_symbol();
        let code = PolarCode::construct(n, k_per_level, design_snr_db)?;
        let codes = vec![code; levels];
        let label_of_symbol = sp_labels(m)?;
        let mut symbol_of_label = vec![usize::MAX; m];
        for (sym, &label) in label_of_symbol.iter().enumerate() {
            symbol_of_label[label] = sym;
        }
        debug_assert!(symbol_of_label.iter().all(|&s| s != usize::MAX));
        Ok(Self {
            constellation,
            codes,
            symbol_of_label,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn levels(&self) -> usize {
        self.codes.len()
    }

    pub fn n(&self) -> usize {
        self.codes[0].n()
    }

    pub fn k_per_level(&self) -> usize {
        self.codes[0].k()
    }

    pub fn codes(&self) -> &[PolarCode] {
        &self.codes
    }

    /// Total information bits per frame.
    pub fn message_len(&self) -> usize {
        self.k_per_level() * self.levels()
    }

    /// Information rate in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.message_len() as f64 / self.n() as f64
    }

    /// Symbol for a set-partitioning bit pattern.
    pub fn symbol_for_label(&self, label: usize) -> Complex64 {
        self.constellation.symbols()[self.symbol_of_label[label]]
    }
}

/// Maps a levels x n bit matrix (row i = codeword of level i+1) to n
/// constellation symbols through the set-partitioning labeling.
pub fn ml_map(scheme: &MlpcmScheme, codewords: &[Vec<u8>]) -> Result<Vec<Complex64>> {
    let levels = scheme.levels();
    let n = scheme.n();
    if codewords.len() != levels || codewords.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidConfig(format!(
            "expected a {levels} x {n} bit matrix"
        )));
    }
    Ok((0..n)
        .map(|j| {
            let mut label = 0usize;
            for (i, row) in codewords.iter().enumerate() {
                label |= ((row[j] & 1) as usize) << i;
            }
            scheme.symbol_for_label(label)
        })
        .collect())
}

/// One use of the (conditionally Gaussian) channel: effective complex gain
/// of the serving link and total Gaussian noise-plus-interference variance.
#[derive(Debug, Clone, Copy)]
pub struct ChannelUse {
    pub gain: Complex64,
    pub noise_var: f64,
}

/// Demapper LLR of bit level `level` (0-based) given the decided bits of
/// earlier levels:
///
///   ln[ sum_{s: b_level = 0, prev match} e^{-|y - g s|^2 / N} /
///       sum_{s: b_level = 1, prev match} e^{-|y - g s|^2 / N} ].
pub fn stage_llr(
    y: Complex64,
    gain: Complex64,
    noise_var: f64,
    scheme: &MlpcmScheme,
    level: usize,
    prev_bits: &[u8],
) -> f64 {
    debug_assert_eq!(prev_bits.len(), level);
    let mut max0 = f64::NEG_INFINITY;
    let mut max1 = f64::NEG_INFINITY;
    let mut args = [0.0f64; 16];
    let mut which = [false; 16];
    let m = scheme.symbol_of_label.len();
    let mut count = 0usize;
    for label in 0..m {
        let mut matches = true;
        for (i, &pb) in prev_bits.iter().enumerate() {
            if ((label >> i) & 1) as u8 != pb {
                matches = false;
                break;
            }
        }
        if !matches {
            continue;
        }
        let s = scheme.symbol_for_label(label);
        let d = y - gain * s;
        let metric = -d.norm_sqr() / noise_var;
        let is_one = (label >> level) & 1 == 1;
        args[count] = metric;
        which[count] = is_one;
        count += 1;
        if is_one {
            max1 = max1.max(metric);
        } else {
            max0 = max0.max(metric);
        }
    }
    let mut sum0 = 0.0f64;
    let mut sum1 = 0.0f64;
    for i in 0..count {
        if which[i] {
            sum1 += (args[i] - max1).exp();
        } else {
            sum0 += (args[i] - max0).exp();
        }
    }
    (max0 + sum0.ln()) - (max1 + sum1.ln())
}

/// Result of one frame: the recovered message and which levels erred.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub decoded: Vec<u8>,
    pub level_errors: Vec<bool>,
}

impl DecodeOutcome {
    /// Frame error: any level in error.
    pub fn frame_error(&self) -> bool {
        self.level_errors.iter().any(|&e| e)
    }
}

/// Encodes, transmits over one channel use per symbol, and multistage
/// decodes. With `genie` the demapper of stage i is fed the true earlier
/// codewords instead of the decided ones (error-propagation diagnostics).
pub fn transmit_decode(
    scheme: &MlpcmScheme,
    message: &[u8],
    channel: &ChannelUse,
    rng: &mut ChaCha8Rng,
    genie: bool,
) -> Result<DecodeOutcome> {
    let levels = scheme.levels();
    let k = scheme.k_per_level();
    let n = scheme.n();
    if message.len() != scheme.message_len() {
        return Err(Error::InvalidConfig(format!(
            "message must have {} bits, got {}",
            scheme.message_len(),
            message.len()
        )));
    }
    // demultiplex and encode each level
    let submessages: Vec<&[u8]> = (0..levels).map(|i| &message[i * k..(i + 1) * k]).collect();
    let codewords: Vec<Vec<u8>> = submessages
        .iter()
        .zip(scheme.codes.iter())
        .map(|(sub, code)| code.encode(sub))
        .collect::<Result<_>>()?;
    let tx = ml_map(scheme, &codewords)?;

    // conditionally Gaussian channel
    let sd = (channel.noise_var / 2.0).sqrt();
    let y: Vec<Complex64> = tx
        .iter()
        .map(|s| {
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random();
            let r = sd * (-2.0 * u1.ln()).sqrt();
            let phi = std::f64::consts::TAU * u2;
            channel.gain * s + Complex64::new(r * phi.cos(), r * phi.sin())
        })
        .collect();

    // multistage decoding
    let mut decided_codewords: Vec<Vec<u8>> = Vec::with_capacity(levels);
    let mut decoded = Vec::with_capacity(scheme.message_len());
    let mut level_errors = Vec::with_capacity(levels);
    let mut llrs = vec![0.0f64; n];
    for (i, code) in scheme.codes.iter().enumerate() {
        let prev_rows: &[Vec<u8>] = if genie {
            &codewords[..i]
        } else {
            &decided_codewords[..]
        };
        let mut prev = vec![0u8; i];
        for (j, llr) in llrs.iter_mut().enumerate() {
            for (b, row) in prev.iter_mut().zip(prev_rows.iter()) {
                *b = row[j];
            }
            *llr = stage_llr(y[j], channel.gain, channel.noise_var, scheme, i, &prev);
        }
        let info = code.sc_decode(&llrs)?;
        level_errors.push(info != submessages[i]);
        decided_codewords.push(code.encode(&info)?);
        decoded.extend_from_slice(&info);
    }
    Ok(DecodeOutcome {
        decoded,
        level_errors,
    })
}

/// A channel model that draws an independent state per frame.
pub trait FrameChannel: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> ChannelUse;
    /// Mean SNR (signal power over mean noise-plus-interference), used as
    /// the polar design SNR for the sweep.
    fn mean_snr(&self) -> f64;
}

/// Static AWGN at a fixed SNR (unit noise variance, real gain sqrt(snr)).
#[derive(Debug, Clone, Copy)]
pub struct AwgnChannel {
    pub snr: f64,
}

impl FrameChannel for AwgnChannel {
    fn sample(&self, _rng: &mut ChaCha8Rng) -> ChannelUse {
        ChannelUse {
            gain: Complex64::new(self.snr.sqrt(), 0.0),
            noise_var: 1.0,
        }
    }

    fn mean_snr(&self) -> f64 {
        self.snr
    }
}

/// Downlink network channel at fixed serving distance: per frame a fresh
/// PPP interference realization and Rayleigh serving fade; the demapper
/// treats interference as Gaussian at its realized power.
#[derive(Debug, Clone)]
pub struct NetworkChannel {
    cfg: NetworkConfig,
    r0: f64,
    region_scale: f64,
}

impl NetworkChannel {
    pub fn new(cfg: NetworkConfig, r0: f64, region_scale: f64) -> Self {
        Self {
            cfg,
            r0,
            region_scale,
        }
    }
}

impl FrameChannel for NetworkChannel {
    fn sample(&self, rng: &mut ChaCha8Rng) -> ChannelUse {
        let plan = SimPlan {
            realizations: 1,
            fading_draws: 1,
            region_scale: self.region_scale,
            seed: 0,
            fixed_r0: Some(self.r0),
        };
        let real = crate::sim::sample_realization(&self.cfg, &plan, rng);
        ChannelUse {
            gain: real.h0 * (self.cfg.power() * self.r0.powf(-self.cfg.eta())).sqrt(),
            noise_var: self.cfg.noise() + real.interference_power,
        }
    }

    fn mean_snr(&self) -> f64 {
        self.cfg.mean_rx_power(self.r0) / (self.cfg.noise() + self.cfg.b_moments(self.r0).mean)
    }
}

/// One sweep result: at this channel, the largest equal-level k whose
/// measured FER stays at or below the target.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub k_per_level: usize,
    /// k log2(M) / n bits per channel use; 0 when no k met the target.
    pub achieved_rate: f64,
    pub fer_at_rate: f64,
    /// 99% binomial confidence half-width of fer_at_rate.
    pub fer_ci: f64,
}

/// Measures the FER of a scheme over `frames` frames; aborts early once the
/// error count proves the target unreachable for this k.
pub fn measure_fer<C: FrameChannel>(
    scheme: &MlpcmScheme,
    channel: &C,
    frames: usize,
    seed: u64,
    abort_above: Option<f64>,
) -> Result<(f64, usize)> {
    const CHUNK: usize = 256;
    let chunks = frames.div_ceil(CHUNK);
    let max_errors = abort_above.map(|t| (t * frames as f64).floor() as usize);
    let mut errors = 0usize;
    let mut done = 0usize;
    let mut chunk_idx = 0usize;
    while chunk_idx < chunks {
        // a stripe of chunks in parallel, then an early-abort check
        let stripe_end = (chunk_idx + rayon::current_num_threads().max(4)).min(chunks);
        let stripe: Vec<Result<(usize, usize)>> = (chunk_idx..stripe_end)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = ((c + 1) * CHUNK).min(frames);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let mut errs = 0usize;
                for _ in lo..hi {
                    let message: Vec<u8> = (0..scheme.message_len())
                        .map(|_| rng.random_range(0..2u8))
                        .collect();
                    let state = channel.sample(&mut rng);
                    let out = transmit_decode(scheme, &message, &state, &mut rng, false)?;
                    if out.frame_error() {
                        errs += 1;
                    }
                }
                Ok((errs, hi - lo))
            })
            .collect();
        for r in stripe {
            let (e, n) = r?;
            errors += e;
            done += n;
        }
        chunk_idx = stripe_end;
        if let Some(cap) = max_errors {
            if errors > cap {
                // already more errors than a full run may have at the target
                return Ok((errors as f64 / done as f64, done));
            }
        }
    }
    Ok((errors as f64 / frames as f64, frames))
}

/// The rate-sweep protocol: at each channel point, raise the per-level k in
/// steps of `k_step` until the measured FER exceeds `target_fer`, and
/// report the last k that met it. Per-point design SNR equals the channel's
/// mean SNR.
pub fn rate_sweep<C: FrameChannel>(
    m: usize,
    n: usize,
    points: &[(f64, C)],
    target_fer: f64,
    frames: usize,
    k_step: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if k_step == 0 || frames == 0 {
        return Err(Error::InvalidConfig(
            "k_step and frames must be positive".to_string(),
        ));
    }
    let levels = make_qam(m)?.bits_per_symbol();
    let mut results = Vec::with_capacity(points.len());
    let mut k_start = k_step;
    for (pi, (snr_db, channel)) in points.iter().enumerate() {
        let design_db = 10.0 * channel.mean_snr().log10();
        let mut best: Option<(usize, f64, usize)> = None;
        let mut k = k_start;
        while k <= n {
            let scheme = MlpcmScheme::new(m, n, k, design_db)?;
            let point_seed = seed ^ ((pi as u64) << 48) ^ ((k as u64) << 24);
            let (fer, used) =
                measure_fer(&scheme, channel, frames, point_seed, Some(target_fer))?;
            if fer <= target_fer {
                best = Some((k, fer, used));
                k += k_step;
            } else {
                break;
            }
        }
        // the warm start may already sit above the achievable k; walk down
        let mut k_down = k_start;
        while best.is_none() && k_down > k_step {
            k_down -= k_step;
            let scheme = MlpcmScheme::new(m, n, k_down, design_db)?;
            let point_seed = seed ^ ((pi as u64) << 48) ^ ((k_down as u64) << 24);
            let (fer, used) =
                measure_fer(&scheme, channel, frames, point_seed, Some(target_fer))?;
            if fer <= target_fer {
                best = Some((k_down, fer, used));
            }
        }
        let point = match best {
            Some((k_best, fer, used)) => SweepPoint {
                snr_db: *snr_db,
                k_per_level: k_best,
                achieved_rate: (k_best * levels) as f64 / n as f64,
                fer_at_rate: fer,
                fer_ci: 2.5758 * (fer * (1.0 - fer) / used as f64).sqrt(),
            },
            None => SweepPoint {
                snr_db: *snr_db,
                k_per_level: 0,
                achieved_rate: 0.0,
                fer_at_rate: 1.0,
                fer_ci: 0.0,
            },
        };
        // warm start: achieved rate is monotone in SNR
        k_start = point.k_per_level.max(k_step);
        results.push(point);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sp_labels_bijective() {
        for m in [2usize, 4, 8, 16] {
            let labels = sp_labels(m).unwrap();
            let mut seen = vec![false; m];
            for &l in &labels {
                assert!(l < m && !seen[l]);
                seen[l] = true;
            }
        }
    }

    #[test]
    fn bpsk_map_is_sign() {
        // M = 2: the two labels map to antipodal unit symbols
        let scheme = MlpcmScheme::new(2, 64, 32, 0.0).unwrap();
        let s0 = scheme.symbol_for_label(0);
        let s1 = scheme.symbol_for_label(1);
        assert!((s0.re.abs() - 1.0).abs() < 1e-12 && s0.im == 0.0);
        assert!((s0 + s1).norm() < 1e-12);
    }

    #[test]
    fn all_zero_matrix_maps_to_label_zero_symbol() {
        let scheme = MlpcmScheme::new(4, 16, 8, 0.0).unwrap();
        let rows = vec![vec![0u8; 16], vec![0u8; 16]];
        let syms = ml_map(&scheme, &rows).unwrap();
        let expected = scheme.symbol_for_label(0);
        assert!(syms.iter().all(|&s| (s - expected).norm() < 1e-15));
        // shape mismatch rejected
        let bad = vec![vec![0u8; 8], vec![0u8; 16]];
        assert!(ml_map(&scheme, &bad).is_err());
    }

    #[test]
    fn level1_sees_min_distance_partition() {
        // flipping the level-1 bit moves to the nearest-neighbor subset
        let scheme = MlpcmScheme::new(16, 16, 8, 0.0).unwrap();
        let dmin = scheme.constellation().min_dist_sq().sqrt();
        let s0 = scheme.symbol_for_label(0b0000);
        let s1 = scheme.symbol_for_label(0b0001);
        assert!(((s0 - s1).norm() - dmin).abs() < 1e-12);
        // flipping the top bit moves further
        let s_top = scheme.symbol_for_label(0b1000);
        assert!((s0 - s_top).norm() > dmin + 1e-12);
    }

    #[test]
    fn stage_llr_signs_and_symmetry() {
        let scheme = MlpcmScheme::new(2, 64, 32, 0.0).unwrap();
        let gain = Complex64::new(1.0, 0.0);
        // y exactly on the bit-0 symbol at high SNR: large positive LLR
        let s0 = scheme.symbol_for_label(0);
        let llr = stage_llr(s0, gain, 1e-3, &scheme, 0, &[]);
        assert!(llr > 100.0);
        // y = 0 equidistant: zero LLR
        let mid = stage_llr(Complex64::new(0.0, 0.0), gain, 0.5, &scheme, 0, &[]);
        assert!(mid.abs() < 1e-12);
    }

    #[test]
    fn qpsk_level2_reduces_to_bpsk_of_surviving_dimension() {
        // after fixing the level-1 (real-axis) bit, the level-2 LLR equals
        // the BPSK LLR of the imaginary coordinate: 4 Re(y_im a)/noise with
        // amplitude a = 1/sqrt(2)
        let scheme = MlpcmScheme::new(4, 16, 8, 0.0).unwrap();
        let gain = Complex64::new(1.0, 0.0);
        let noise = 0.7;
        let y = Complex64::new(0.3, -0.45);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        for prev in [0u8, 1u8] {
            let llr = stage_llr(y, gain, noise, &scheme, 1, &[prev]);
            // which imaginary sign carries bit 0 at this level?
            let s_b0 = scheme.symbol_for_label(prev as usize); // level-2 bit 0
            let expected = 4.0 * y.im * s_b0.im.signum() * a / noise;
            assert!(
                (llr - expected).abs() < 1e-9,
                "prev={prev}: {llr} vs {expected}"
            );
        }
    }

    #[test]
    fn noiseless_roundtrip_all_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &m in &[2usize, 4, 8, 16] {
            for &n in &[64usize, 128] {
                let scheme = MlpcmScheme::new(m, n, n / 2, 2.0).unwrap();
                let channel = ChannelUse {
                    gain: Complex64::new(1.0, 0.0),
                    noise_var: 1e-12,
                };
                for _ in 0..25 {
                    let msg: Vec<u8> = (0..scheme.message_len())
                        .map(|_| rng.random_range(0..2u8))
                        .collect();
                    let out = transmit_decode(&scheme, &msg, &channel, &mut rng, false).unwrap();
                    assert!(!out.frame_error(), "M={m} n={n}");
                    assert_eq!(out.decoded, msg);
                }
            }
        }
    }

    #[test]
    fn frame_error_is_or_of_level_errors() {
        let scheme = MlpcmScheme::new(4, 64, 48, -2.0).unwrap();
        let channel = ChannelUse {
            gain: Complex64::new(0.5, 0.0),
            noise_var: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut saw_error = false;
        for _ in 0..200 {
            let msg: Vec<u8> = (0..scheme.message_len())
                .map(|_| rng.random_range(0..2u8))
                .collect();
            let out = transmit_decode(&scheme, &msg, &channel, &mut rng, false).unwrap();
            assert_eq!(out.frame_error(), out.level_errors.iter().any(|&e| e));
            assert_eq!(out.frame_error(), out.decoded != msg);
            saw_error |= out.frame_error();
        }
        assert!(saw_error, "operating point should produce some errors");
    }

    #[test]
    fn genie_never_worse_than_decided() {
        // with genie-correct previous stages the FER cannot be
        // (statistically) worse than with decided previous stages
        let scheme = MlpcmScheme::new(16, 64, 28, 6.0).unwrap();
        let channel = AwgnChannel {
            snr: 10f64.powf(0.65),
        };
        let frames = 3000;
        let mut errs = (0usize, 0usize);
        for f in 0..frames {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + f as u64);
            let msg: Vec<u8> = (0..scheme.message_len())
                .map(|_| rng.random_range(0..2u8))
                .collect();
            let state = channel.sample(&mut rng);
            let snapshot = rng.clone();
            let decided = transmit_decode(&scheme, &msg, &state, &mut rng, false).unwrap();
            let mut rng2 = snapshot;
            let genie = transmit_decode(&scheme, &msg, &state, &mut rng2, true).unwrap();
            if decided.frame_error() {
                errs.0 += 1;
            }
            if genie.frame_error() {
                errs.1 += 1;
            }
        }
        let (fer_decided, fer_genie) = (
            errs.0 as f64 / frames as f64,
            errs.1 as f64 / frames as f64,
        );
        let ci = 3.0 * (fer_decided * (1.0 - fer_decided) / frames as f64).sqrt();
        assert!(
            fer_genie <= fer_decided + ci,
            "genie {fer_genie} vs decided {fer_decided}"
        );
    }

    #[test]
    fn per_level_fer_ordering_under_genie() {
        // under set partitioning, level 1 is least protected at equal rates
        // (checked with genie feeding so levels are independent)
        let scheme = MlpcmScheme::new(4, 128, 64, 3.0).unwrap();
        let channel = AwgnChannel {
            snr: 10f64.powf(0.42),
        };
        let frames = 4000;
        let mut level_errs = vec![0usize; scheme.levels()];
        for f in 0..frames {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + f as u64);
            let msg: Vec<u8> = (0..scheme.message_len())
                .map(|_| rng.random_range(0..2u8))
                .collect();
            let state = channel.sample(&mut rng);
            let out = transmit_decode(&scheme, &msg, &state, &mut rng, true).unwrap();
            for (slot, &e) in level_errs.iter_mut().zip(out.level_errors.iter()) {
                if e {
                    *slot += 1;
                }
            }
        }
        // level 1 should not be better than the last level beyond noise
        let first = level_errs[0] as f64;
        let last = *level_errs.last().unwrap() as f64;
        assert!(
            first + 3.0 * first.max(9.0).sqrt() >= last,
            "level FERs {level_errs:?}"
        );
    }

    #[test]
    fn fer_monotone_in_snr_awgn() {
        // measured FER decreases (within CI) as SNR rises over a 6 dB sweep
        let scheme = MlpcmScheme::new(4, 128, 64, 2.0).unwrap();
        let mut prev_fer = 1.0f64;
        for (i, snr_db) in [-1.0f64, 1.0, 3.0, 5.0].iter().enumerate() {
            let channel = AwgnChannel {
                snr: 10f64.powf(snr_db / 10.0),
            };
            let (fer, n) = measure_fer(&scheme, &channel, 3000, 77 + i as u64, None).unwrap();
            let ci = 3.0 * (fer.max(1e-4) * (1.0 - fer) / n as f64).sqrt();
            assert!(fer <= prev_fer + ci, "snr {snr_db}: {fer} vs prev {prev_fer}");
            prev_fer = fer;
        }
    }

    #[test]
    fn sweep_basics() {
        // rate 0 at hopeless SNR; positive and increasing at workable SNRs
        let points: Vec<(f64, AwgnChannel)> = [-12.0f64, 2.0, 6.0]
            .iter()
            .map(|&db| {
                (
                    db,
                    AwgnChannel {
                        snr: 10f64.powf(db / 10.0),
                    },
                )
            })
            .collect();
        let sweep = rate_sweep(4, 64, &points, 1e-1, 800, 8, 31).unwrap();
        assert_eq!(sweep[0].achieved_rate, 0.0);
        assert!(sweep[1].achieved_rate > 0.0);
        assert!(sweep[2].achieved_rate >= sweep[1].achieved_rate);
        for p in &sweep[1..] {
            assert!(p.fer_at_rate <= 1e-1);
        }
    }
}
