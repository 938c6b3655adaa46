//! Deterministic random-number machinery for the simulation engine.
//!
//! The generator is SplitMix64 (canonical constants), chosen because it is
//! trivially replicable in any language: `state += 0x9E3779B97F4A7C15`, then
//! the two-round xor-multiply finalizer. Uniforms take the top 53 bits.
//!
//! Each replication `h` of a run seeded with `s` draws from an independent
//! stream seeded with `mix(mix(s + PHI) + PHI * (h + 1))`, so results do not
//! depend on scheduling.
//!
//! Binomial draws invert the CDF by mode-centered pmf summation: the pmf at
//! the mode comes from log-gamma, neighbours from the two-sided recurrence.
//! This stays exact (to f64 resolution) for n up to 1e6 and runs in
//! O(sqrt(n p (1-p))) expected steps, where walking up from k = 0 would
//! underflow.

use crate::numerics::ln_gamma;

const PHI: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer, also used as the stream-derivation hash.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// The stream for replication `replication` of a run seeded with `seed`.
    pub fn for_replication(seed: u64, replication: u64) -> Self {
        let a = mix(seed.wrapping_add(PHI));
        SplitMix64::new(mix(
            a.wrapping_add(PHI.wrapping_mul(replication.wrapping_add(1)))
        ))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(PHI);
        mix(self.state)
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

fn ln_binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    // (1-p)^(n-k) via ln_1p for accuracy at small p
    ln_choose + kf * p.ln() + (nf - kf) * (-p).ln_1p()
}

/// Smallest `k` with `F(k) >= u` for the Binomial(n, p) CDF `F`.
pub fn binomial_inverse_cdf(n: u64, p: f64, u: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let nf = n as f64;
    let mode = (((nf + 1.0) * p).floor() as u64).min(n);

    let pmf_mode = ln_binomial_pmf(n, mode, p).exp();
    // descending recurrence: pmf(k-1) = pmf(k) * k (1-p) / ((n-k+1) p)
    let mut cdf_mode = pmf_mode;
    {
        let mut term = pmf_mode;
        let mut k = mode;
        while k > 0 {
            term *= (k as f64) * (1.0 - p) / ((nf - k as f64 + 1.0) * p);
            cdf_mode += term;
            k -= 1;
            if term <= cdf_mode * 1e-17 {
                break;
            }
        }
    }

    if u <= cdf_mode {
        // walk down from the mode
        let mut k = mode;
        let mut cdf = cdf_mode;
        let mut term = pmf_mode;
        while k > 0 {
            let below = cdf - term;
            if below < u {
                return k;
            }
            cdf = below;
            term *= (k as f64) * (1.0 - p) / ((nf - k as f64 + 1.0) * p);
            k -= 1;
        }
        0
    } else {
        // ascending recurrence: pmf(k+1) = pmf(k) (n-k) p / ((k+1)(1-p))
        let mut k = mode;
        let mut cdf = cdf_mode;
        let mut term = pmf_mode;
        while k < n {
            term *= (nf - k as f64) * p / ((k as f64 + 1.0) * (1.0 - p));
            k += 1;
            cdf += term;
            if cdf >= u {
                return k;
            }
        }
        n
    }
}

/// One multinomial draw over the eight cells by sequential conditional
/// binomials; always consumes exactly seven uniforms.
pub fn multinomial_draw(n: u64, probs: &[f64; 8], rng: &mut SplitMix64) -> [f64; 8] {
    let mut out = [0.0; 8];
    let mut remaining_n = n;
    let mut remaining_p = 1.0;
    for i in 0..7 {
        let u = rng.next_f64();
        let cond = if remaining_p > 0.0 {
            (probs[i] / remaining_p).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = binomial_inverse_cdf(remaining_n, cond, u);
        out[i] = k as f64;
        remaining_n -= k;
        remaining_p -= probs[i];
    }
    out[7] = remaining_n as f64;
    out
}
