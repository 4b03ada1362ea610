//! Shared parameter arithmetic: total degree, verification windows, the
//! analytic threshold, and memory estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default per-polynomial memory ceiling: 4 GiB.
pub const DEFAULT_MEMORY_CEILING: u64 = 4 << 30;

/// Parameters of one polynomial: products over blocks j = 0..=m of the
/// factors (1 + q^(kj+l)) for l = 1..=k-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyParams {
    pub k: u32,
    pub m: u32,
    /// Total degree k(k-1)(m+1)^2/2, kept alongside (k, m) so it is
    /// validated once and then read everywhere.
    pub degree: u64,
}

impl PolyParams {
    pub fn new(k: i64, m: i64) -> Result<Self> {
        let degree = total_degree(k, m)?;
        Ok(PolyParams {
            k: k as u32,
            m: m as u32,
            degree,
        })
    }

    /// Number of binomial factors, (k-1)(m+1). The coefficient sum is
    /// 2 to this power, so it also bounds every coefficient's bit length.
    pub fn factor_count(&self) -> u64 {
        (self.k as u64 - 1) * (self.m as u64 + 1)
    }

    /// Exponents of the factors applied in block j: kj+1 ..= kj+k-1.
    pub fn block_exponents(k: u32, j: u32) -> impl Iterator<Item = u64> {
        let base = k as u64 * j as u64;
        (1..k as u64).map(move |l| base + l)
    }

    /// Upper bound for one serialized coefficient in bytes (magnitude only).
    pub fn max_coeff_bytes(&self) -> u64 {
        self.factor_count() / 8 + 2
    }

    /// Rough in-memory footprint of the dense coefficient array: one heap
    /// allocation of 64-bit limbs per coefficient plus container overhead.
    pub fn estimated_bytes(&self) -> u64 {
        let limbs = self.factor_count().div_ceil(64);
        (self.degree + 1) * (8 * limbs + 48)
    }
}

/// Total degree N(k, m) = k(k-1)(m+1)^2/2. Rejects k < 2 and m < 0.
pub fn total_degree(k: i64, m: i64) -> Result<u64> {
    if k < 2 || m < 0 {
        return Err(Error::InvalidParams { k, m });
    }
    let (k, m) = (k as u64, m as u64);
    // k(k-1) is even, so the division is exact.
    Ok(k * (k - 1) / 2 * (m + 1) * (m + 1))
}

/// Largest m below the analytic threshold 8k^(3/2), i.e. the largest m with
/// m^2 < 64k^3. Integer arithmetic throughout: when 64k^3 is a perfect
/// square (k = 4, 9, 16, ...) the threshold itself is an integer and is
/// excluded, matching the strict inequality.
pub fn threshold_m_max(k: u32) -> u64 {
    let k = k as u64;
    (64 * k * k * k - 1).isqrt()
}

/// Verification window for level m: positions n with
/// ceil(k(k-1)m^2/4) <= n <= floor(k(k-1)(m+1)^2/4). The lower end is the
/// midpoint of the previous level's degree, the upper end the midpoint of
/// this level's, so consecutive windows tile the first halves.
pub fn weak_window(k: u32, m: u32) -> (u64, u64) {
    let kk = k as u64 * (k as u64 - 1);
    let m = m as u64;
    let lo = (kk * m * m).div_ceil(4);
    let hi = kk * (m + 1) * (m + 1) / 4;
    (lo.max(1), hi)
}

/// Largest oscillation frequency mu = N - 2n over the window of level m:
/// k(k-1)(2m+1)/2.
pub fn mu_cap(k: u32, m: u32) -> u64 {
    let k = k as u64;
    k * (k - 1) * (2 * m as u64 + 1) / 2
}
