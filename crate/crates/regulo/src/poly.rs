//! Dense exact-coefficient arrays for the distinct-part product
//! Π_{j=0..m} Π_{l=1..k-1} (1 + q^(kj+l)), built one binomial factor at a
//! time and extendable block by block.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::{PolyParams, DEFAULT_MEMORY_CEILING};

/// Coefficient array c[0..=N] for one (k, m); index n holds the number of
/// k-regular partitions of n into distinct parts with largest part <= km+k-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensePolynomial {
    params: PolyParams,
    coeffs: Vec<BigUint>,
}

/// Multiplies the array in place by (1 + q^e). The caller must have resized
/// the array so the new degree fits. Updates run in descending n so every
/// read c[n - e] still sees the pre-multiplication value.
pub fn multiply_binomial(coeffs: &mut [BigUint], e: usize) {
    assert!(e >= 1 && e < coeffs.len(), "array must accommodate degree e");
    for n in (e..coeffs.len()).rev() {
        let (tail, head) = coeffs.split_at_mut(n);
        let lower = &tail[n - e];
        if !lower.is_zero() {
            head[0] += lower;
        }
    }
}

/// All factor exponents of D_{k,m} in schedule order (block-major).
pub fn factor_exponents(k: u32, m: u32) -> Vec<u64> {
    (0..=m)
        .flat_map(|j| PolyParams::block_exponents(k, j))
        .collect()
}

fn apply_block(coeffs: &mut Vec<BigUint>, k: u32, j: u32, ceiling: u64) -> Result<()> {
    let next = PolyParams::new(k as i64, j as i64)?;
    let needed = next.estimated_bytes();
    if needed > ceiling {
        return Err(Error::MemoryCeiling {
            needed,
            limit: ceiling,
        });
    }
    coeffs.resize(next.degree as usize + 1, BigUint::zero());
    for e in PolyParams::block_exponents(k, j) {
        multiply_binomial(coeffs, e as usize);
    }
    Ok(())
}

impl DensePolynomial {
    /// Builds D_{k,m} from scratch under the default 4 GiB ceiling.
    pub fn build(k: i64, m: i64) -> Result<Self> {
        Self::build_with_ceiling(k, m, DEFAULT_MEMORY_CEILING)
    }

    pub fn build_with_ceiling(k: i64, m: i64, ceiling: u64) -> Result<Self> {
        let params = PolyParams::new(k, m)?;
        let mut coeffs = vec![BigUint::one()];
        for j in 0..=params.m {
            apply_block(&mut coeffs, params.k, j, ceiling)?;
        }
        Ok(DensePolynomial { params, coeffs })
    }

    /// Reassembles a polynomial from parts that are already known to be
    /// consistent (checkpoint loading). Verifies the length invariant only.
    pub(crate) fn from_parts(params: PolyParams, coeffs: Vec<BigUint>) -> Result<Self> {
        if coeffs.len() as u64 != params.degree + 1 {
            return Err(Error::InvalidParams {
                k: params.k as i64,
                m: params.m as i64,
            });
        }
        Ok(DensePolynomial { params, coeffs })
    }

    /// Applies the next block of k-1 factors in place, advancing m by one.
    /// The result is bit-identical to build(k, m+1).
    pub fn extend(&mut self) -> Result<()> {
        self.extend_with_ceiling(DEFAULT_MEMORY_CEILING)
    }

    pub fn extend_with_ceiling(&mut self, ceiling: u64) -> Result<()> {
        let next_m = self.params.m + 1;
        apply_block(&mut self.coeffs, self.params.k, next_m, ceiling)?;
        self.params = PolyParams::new(self.params.k as i64, next_m as i64)?;
        Ok(())
    }

    pub fn params(&self) -> PolyParams {
        self.params
    }

    pub fn degree(&self) -> u64 {
        self.params.degree
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, n: u64) -> &BigUint {
        &self.coeffs[n as usize]
    }

    pub fn coefficient_sum(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }

    /// SHA-256 over the canonical coefficient serialization (the same record
    /// layout the checkpoint body uses), as lowercase hex.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for c in &self.coeffs {
            hash_coeff(&mut hasher, c);
        }
        hex_string(&hasher.finalize())
    }
}

/// One canonical coefficient record: little-endian u32 byte length, then the
/// little-endian magnitude. Zero serializes as length 0.
pub(crate) fn hash_coeff(hasher: &mut Sha256, c: &BigUint) {
    let bytes = if c.is_zero() {
        Vec::new()
    } else {
        c.to_bytes_le()
    };
    hasher.update((bytes.len() as u32).to_le_bytes());
    hasher.update(&bytes);
}

pub(crate) fn hex_string(digest: &[u8]) -> String {
    let mut s = String::with_capacity(digest.len() * 2);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Convenience used by tests and the oracle comparison: coefficients as a
/// plain vector of u64 where they fit, erroring out otherwise.
pub fn small_coeffs(p: &DensePolynomial) -> Option<Vec<u64>> {
    p.coeffs.iter().map(u64::try_from).map(|r| r.ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::total_degree;

    fn nums(xs: &[u64]) -> Vec<BigUint> {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn multiply_binomial_hand_convolutions() {
        // (1 + q + q^2 + q^3)(1 + q^2)
        let mut c = nums(&[1, 1, 1, 1, 0, 0]);
        multiply_binomial(&mut c, 2);
        assert_eq!(c, nums(&[1, 1, 2, 2, 1, 1]));

        // 1 * (1 + q^5)
        let mut c = nums(&[1, 0, 0, 0, 0, 0]);
        multiply_binomial(&mut c, 5);
        assert_eq!(c, nums(&[1, 0, 0, 0, 0, 1]));

        // (1+q)(1+q^2)(1+q^3) * (1+q^4)
        let mut c = nums(&[1, 1, 1, 2, 1, 1, 1, 0, 0, 0, 0]);
        multiply_binomial(&mut c, 4);
        assert_eq!(c, nums(&[1, 1, 1, 2, 2, 2, 2, 2, 1, 1, 1]));
    }

    #[test]
    fn build_small_tables() {
        let p = DensePolynomial::build(4, 0).unwrap();
        assert_eq!(small_coeffs(&p).unwrap(), vec![1, 1, 1, 2, 1, 1, 1]);
        let p = DensePolynomial::build(5, 0).unwrap();
        assert_eq!(
            small_coeffs(&p).unwrap(),
            vec![1, 1, 1, 2, 2, 2, 2, 2, 1, 1, 1]
        );
    }

    #[test]
    fn build_4_1_coefficient_of_q10() {
        let p = DensePolynomial::build(4, 1).unwrap();
        assert_eq!(p.degree(), 24);
        assert_eq!(p.coeff(10), &BigUint::from(4u32));
    }

    #[test]
    fn extend_matches_build() {
        for (k, m) in [(4, 1), (5, 3), (8, 2), (3, 4), (2, 5)] {
            let mut p = DensePolynomial::build(k, m - 1).unwrap();
            p.extend().unwrap();
            let q = DensePolynomial::build(k, m).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn global_invariants_small() {
        for (k, m) in [(2, 3), (3, 2), (4, 3), (6, 1), (7, 0), (10, 1)] {
            let p = DensePolynomial::build(k, m).unwrap();
            assert!(p.is_symmetric(), "k={k} m={m}");
            assert!(p.coeff(0).is_one());
            assert!(p.coeff(p.degree()).is_one());
            let bits = (k - 1) as u64 * (m + 1) as u64;
            assert_eq!(p.coefficient_sum(), BigUint::one() << bits);
        }
    }

    #[test]
    fn first_coeffs_for_k_at_least_4() {
        // Parts 1, 2, 3 are all k-regular once k >= 4, so the leading
        // coefficients are 1, 1, 1, 2 independent of m. (For k = 3 the part
        // 3 is excluded and c[3] drops to 1, so the check starts at k = 4.)
        for k in 4..=9i64 {
            for m in 0..=2i64 {
                let p = DensePolynomial::build(k, m).unwrap();
                let c: Vec<u64> = (0..4).map(|n| u64::try_from(p.coeff(n)).unwrap()).collect();
                assert_eq!(c, vec![1, 1, 1, 2], "k={k} m={m}");
            }
        }
        let p = DensePolynomial::build(3, 2).unwrap();
        assert_eq!(p.coeff(3), &BigUint::one());
    }

    #[test]
    fn factor_order_independence() {
        let canonical = DensePolynomial::build(5, 2).unwrap();
        let mut exps = factor_exponents(5, 2);
        exps.reverse();
        let degree = canonical.degree() as usize;
        let mut coeffs = vec![BigUint::zero(); degree + 1];
        coeffs[0] = BigUint::one();
        for e in exps {
            multiply_binomial(&mut coeffs, e as usize);
        }
        assert_eq!(coeffs, canonical.coeffs);
    }

    #[test]
    fn memory_ceiling_is_enforced() {
        let err = DensePolynomial::build_with_ceiling(10, 200, 1 << 20).unwrap_err();
        assert!(matches!(err, Error::MemoryCeiling { .. }));
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let p = DensePolynomial::build(4, 2).unwrap();
        let q = DensePolynomial::build(4, 2).unwrap();
        assert_eq!(p.digest(), q.digest());
        let r = DensePolynomial::build(4, 3).unwrap();
        assert_ne!(p.digest(), r.digest());
    }

    #[test]
    fn total_degree_matches_factor_sum() {
        for (k, m) in [(2, 4), (5, 3), (9, 2)] {
            let sum: u64 = factor_exponents(k, m).iter().sum();
            assert_eq!(sum, total_degree(k as i64, m as i64).unwrap());
        }
    }
}
