//! Scalar kernels shared by every module: standard normal tails in log space,
//! two-sided marginal p-values on the `-log p` scale, AR(1) Gaussian vectors,
//! and a counter-based random stream keyed by `(seed, stream_id)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};


use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this point the upper tail is evaluated with the asymptotic series.
const ASYMPTOTIC_CUTOFF: f64 = 8.0;

fn check_finite(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("expected a finite value, got {z}")))
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain(format!("quantile probability {p} outside [0, 1]")));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

/// Log of `φ(z)/z · Σ (-1)^n (2n-1)!! / z^(2n)`, the Mills-ratio expansion of
/// the upper tail. Terms are summed until they stop shrinking.
fn log_sf_asymptotic(z: f64) -> f64 {
    let inv_z2 = 1.0 / (z * z);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..200 {
        let next = -term * (2 * n - 1) as f64 * inv_z2;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -0.5 * z * z - LN_SQRT_2PI - z.ln() + sum.ln()
}

/// `log(1 - Φ(z))`, finite for every finite `z`.
///
/// Exact-erfc evaluation up to `z = 8`, asymptotic expansion beyond. Negative
/// arguments go through `ln_1p` of the opposite tail.
pub fn normal_sf_log(z: f64) -> Result<f64> {
    check_finite(z)?;
    Ok(if z < 0.0 {
        (-normal_sf(-z)).ln_1p()
    } else if z <= ASYMPTOTIC_CUTOFF {
        normal_sf(z).ln()
    } else {
        log_sf_asymptotic(z)
    })
}

/// `R = -log p` for the two-sided normal p-value `p = 2(1 - Φ(|z|))`.
pub fn neg_log_two_sided_p(z: f64) -> Result<f64> {
    check_finite(z)?;
    let a = z.abs();
    let r = if a < 0.5 {
        // p = 1 - erf(a/√2); keep precision near p = 1.
        -(-libm::erf(a / std::f64::consts::SQRT_2)).ln_1p()
    } else if a <= ASYMPTOTIC_CUTOFF {
        -libm::erfc(a / std::f64::consts::SQRT_2).ln()
    } else {
        -(std::f64::consts::LN_2 + log_sf_asymptotic(a))
    };
    Ok(r.max(0.0))
}

/// Mixes a list of integers into one 64-bit stream identifier.
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3_u64;
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

/// Derives a child seed from a parent seed and an index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id in the nonce word, so distinct ids
/// never overlap and any stream can be opened independently of the others.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..=upper`.
    pub fn index_inclusive(&mut self, upper: usize) -> usize {
        self.inner.random_range(0..=upper)
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, values: &mut [T]) {
        for i in (1..values.len()).rev() {
            let j = self.index_inclusive(i);
            values.swap(i, j);
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn check_ar1_coefficient(c: f64) -> Result<()> {
    if (0.0..1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain(format!("AR(1) coefficient {c} outside [0, 1)")))
    }
}

/// Draws `Z ~ N(0, A)` with `A[k][k'] = c^|k-k'|` by the AR(1) recursion.
pub fn sample_ar1_vector(k: usize, c: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Domain("AR(1) vector length must be at least 1".into()));
    }
    let mut out = vec![0.0; k];
    fill_ar1(&mut out, c, rng)?;
    Ok(out)
}

/// Same as [`sample_ar1_vector`] but writes into a caller-owned buffer.
pub fn fill_ar1(out: &mut [f64], c: f64, rng: &mut RngStream) -> Result<()> {
    check_ar1_coefficient(c)?;
    let innovation_sd = (1.0 - c * c).sqrt();
    let mut prev = 0.0;
    for (i, slot) in out.iter_mut().enumerate() {
        let eps = rng.standard_normal();
        prev = if i == 0 { eps } else { c * prev + innovation_sd * eps };
        *slot = prev;
    }
    Ok(())
}
