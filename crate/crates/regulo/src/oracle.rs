//! Brute-force ground truth for the coefficient arrays: counts and
//! enumerates k-regular partitions into distinct parts directly over the
//! allowed part set, never through polynomial products.
//!
//! Two strengths are provided. `PureEnumeration` walks every subset of the
//! part set in Gray-code order and histograms the subset sums, which is as
//! independent from the engine as it gets but exponential in the part count.
//! `DynamicProgramming` runs a subset-sum table over one part at a time;
//! mathematically that is the same convolution the engine performs, so the
//! independence is in code only, but it reaches much larger degrees.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::total_degree;

/// Allowed part sizes for (k, m): 1 <= p <= km+k-1 with p not divisible by k.
#[derive(Debug, Clone)]
pub struct PartSet {
    pub k: u32,
    pub m: u32,
    parts: Vec<u64>,
}

impl PartSet {
    pub fn new(k: i64, m: i64) -> Result<Self> {
        total_degree(k, m)?;
        let (k, m) = (k as u32, m as u32);
        let max = k as u64 * m as u64 + k as u64 - 1;
        let parts: Vec<u64> = (1..=max).filter(|p| p % k as u64 != 0).collect();
        debug_assert_eq!(parts.len() as u64, (k as u64 - 1) * (m as u64 + 1));
        Ok(PartSet { k, m, parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn max_part(&self) -> u64 {
        *self.parts.last().expect("part set is never empty")
    }
}

/// A partition with strictly decreasing parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition(pub Vec<u64>);

impl Partition {
    pub fn weight(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    DynamicProgramming,
    PureEnumeration,
}

/// Caps and thread count for the oracle. The pure mode visits 2^|parts|
/// subsets, so its caps bound the part count as well as the degree.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub dp_max_degree: u64,
    pub pure_max_degree: u64,
    pub pure_max_parts: u32,
    pub threads: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            dp_max_degree: 200_000,
            pure_max_degree: 2_000,
            pure_max_parts: 40,
            threads: 1,
        }
    }
}

/// Number of k-regular partitions of n into distinct parts with largest
/// part <= km+k-1. Negative n counts zero partitions.
pub fn count(k: i64, m: i64, n: i64) -> Result<BigUint> {
    let set = PartSet::new(k, m)?;
    if n < 0 {
        return Ok(BigUint::zero());
    }
    let parts = set.parts();
    if parts.len() > 64 {
        return Err(Error::OracleCap(format!(
            "{} parts is past the recursive-count cap of 64",
            parts.len()
        )));
    }
    let mut suffix = vec![0u64; parts.len() + 1];
    for i in (0..parts.len()).rev() {
        suffix[i] = suffix[i + 1] + parts[i];
    }
    fn rec(parts: &[u64], suffix: &[u64], i: usize, rem: u64) -> BigUint {
        if rem == 0 {
            return BigUint::one();
        }
        if i >= parts.len() || rem > suffix[i] {
            return BigUint::zero();
        }
        let mut total = BigUint::zero();
        for j in i..parts.len() {
            if parts[j] > rem {
                break;
            }
            total += rec(parts, suffix, j + 1, rem - parts[j]);
        }
        total
    }
    Ok(rec(parts, &suffix, 0, n as u64))
}

/// All qualifying partitions of n, each written with strictly decreasing
/// parts, ordered largest-first lexicographically. Errors out once more
/// than `cap` partitions accumulate.
pub fn enumerate(k: i64, m: i64, n: i64, cap: usize) -> Result<Vec<Partition>> {
    let set = PartSet::new(k, m)?;
    if n < 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut acc = Vec::new();
    descend(
        set.parts(),
        set.max_part(),
        n as u64,
        &mut acc,
        &mut out,
        cap,
    )?;
    Ok(out)
}

fn descend(
    parts: &[u64],
    bound: u64,
    rem: u64,
    acc: &mut Vec<u64>,
    out: &mut Vec<Partition>,
    cap: usize,
) -> Result<()> {
    if rem == 0 {
        if out.len() >= cap {
            return Err(Error::OutputCap { cap });
        }
        out.push(Partition(acc.clone()));
        return Ok(());
    }
    // Largest usable part first; parts is ascending, so walk it backwards
    // from the first element <= min(bound, rem).
    let limit = bound.min(rem);
    let start = parts.partition_point(|&p| p <= limit);
    for j in (0..start).rev() {
        let p = parts[j];
        acc.push(p);
        descend(parts, p - 1, rem - p, acc, out, cap)?;
        acc.pop();
    }
    Ok(())
}

/// Full table of counts for 0..=N in the requested mode, default caps.
pub fn count_table(k: i64, m: i64, mode: TableMode) -> Result<Vec<BigUint>> {
    count_table_with(k, m, mode, &OracleOptions::default())
}

pub fn count_table_with(
    k: i64,
    m: i64,
    mode: TableMode,
    opts: &OracleOptions,
) -> Result<Vec<BigUint>> {
    let set = PartSet::new(k, m)?;
    let degree = total_degree(k, m)?;
    match mode {
        TableMode::DynamicProgramming => {
            if degree > opts.dp_max_degree {
                return Err(Error::OracleCap(format!(
                    "degree {degree} is past the DP cap of {}",
                    opts.dp_max_degree
                )));
            }
            Ok(dp_table(set.parts(), degree as usize))
        }
        TableMode::PureEnumeration => {
            if degree > opts.pure_max_degree {
                return Err(Error::OracleCap(format!(
                    "degree {degree} is past the pure-enumeration cap of {}",
                    opts.pure_max_degree
                )));
            }
            if set.parts().len() as u32 > opts.pure_max_parts {
                return Err(Error::OracleCap(format!(
                    "{} parts means 2^{} subsets, past the pure-enumeration cap of {} parts",
                    set.parts().len(),
                    set.parts().len(),
                    opts.pure_max_parts
                )));
            }
            let counts = pure_table(set.parts(), degree as usize, opts.threads.max(1));
            Ok(counts.into_iter().map(BigUint::from).collect())
        }
    }
}

/// Subset-sum table processed one part at a time, in descending index so a
/// part is never used twice. Kept deliberately self-contained instead of
/// sharing code with the engine's factor loop.
fn dp_table(parts: &[u64], degree: usize) -> Vec<BigUint> {
    let mut table = vec![BigUint::zero(); degree + 1];
    table[0] = BigUint::one();
    for &p in parts {
        let p = p as usize;
        for n in (p..=degree).rev() {
            let (head, tail) = table.split_at_mut(n);
            let lower = &head[n - p];
            if !lower.is_zero() {
                tail[0] += lower;
            }
        }
    }
    table
}

/// Histogram of subset sums over every one of the 2^|parts| subsets,
/// visited in Gray-code order so each step touches a single part.
fn pure_table(parts: &[u64], degree: usize, threads: usize) -> Vec<u64> {
    let p = parts.len() as u32;
    let total: u64 = 1u64 << p;
    if p <= 12 || threads <= 1 {
        let mut counts = vec![0u64; degree + 1];
        if p <= 12 {
            gray_range_simple(parts, 0, total, &mut counts);
        } else {
            gray_range_blocked(parts, 0, total, &mut counts);
        }
        return counts;
    }
    // Split the index range on 16-aligned boundaries; each worker owns a
    // private histogram and the results add up.
    let threads = threads.min((total / 16) as usize).max(1);
    let chunk = (total / threads as u64) & !15;
    let mut histograms = vec![vec![0u64; degree + 1]; threads];
    std::thread::scope(|scope| {
        for (t, hist) in histograms.iter_mut().enumerate() {
            let lo = t as u64 * chunk;
            let hi = if t + 1 == threads {
                total
            } else {
                lo + chunk
            };
            scope.spawn(move || gray_range_blocked(parts, lo, hi, hist));
        }
    });
    let mut counts = vec![0u64; degree + 1];
    for hist in histograms {
        for (c, h) in counts.iter_mut().zip(hist) {
            *c += h;
        }
    }
    counts
}

fn initial_state(parts: &[u64], index: u64) -> (u64, usize) {
    let cur = index ^ (index >> 1);
    let mut sum = 0usize;
    for (j, &p) in parts.iter().enumerate() {
        if cur >> j & 1 == 1 {
            sum += p as usize;
        }
    }
    (cur, sum)
}

/// Plain Gray walk over sequence indices [lo, hi).
fn gray_range_simple(parts: &[u64], lo: u64, hi: u64, counts: &mut [u64]) {
    let (mut cur, mut sum) = initial_state(parts, lo);
    counts[sum] += 1;
    for i in lo + 1..hi {
        let t = i.trailing_zeros() as usize;
        cur ^= 1u64 << t;
        if cur >> t & 1 == 1 {
            sum += parts[t] as usize;
        } else {
            sum -= parts[t] as usize;
        }
        counts[sum] += 1;
    }
}

/// Gray walk unrolled in blocks of 16. Within a block the toggled bits are
/// 0..=3 in a fixed pattern with fixed directions (the low four bits of the
/// Gray code cycle back to their block-start state), so fifteen of every
/// sixteen steps run branch-free with precomputed signed deltas.
fn gray_range_blocked(parts: &[u64], lo: u64, hi: u64, counts: &mut [u64]) {
    debug_assert!(lo % 16 == 0 && hi % 16 == 0 && hi > lo);
    debug_assert!(parts.len() >= 5);
    let (mut cur, mut sum) = initial_state(parts, lo);
    counts[sum] += 1;

    let p0 = parts[0] as usize;
    let p1 = parts[1] as usize;
    let p2 = parts[2] as usize;
    let n0 = p0.wrapping_neg();
    let n1 = p1.wrapping_neg();
    let n2 = p2.wrapping_neg();
    // Signed delta for bit 3 keyed by its current value, and for the
    // occasional high-bit toggle keyed by (bit, new value).
    let tbl3 = [parts[3] as usize, (parts[3] as usize).wrapping_neg()];
    let mut delta = vec![0usize; parts.len() * 2];
    for (j, &p) in parts.iter().enumerate() {
        delta[j * 2] = (p as usize).wrapping_neg();
        delta[j * 2 + 1] = p as usize;
    }

    let mut block = lo;
    loop {
        // Steps block+1 ..= block+15: bits 0..=3, fixed toggle order
        // 0,1,0,2,0,1,0,3,0,1,0,2,0,1,0 with the signs below.
        sum = sum.wrapping_add(p0);
        counts[sum] += 1;
        sum = sum.wrapping_add(p1);
        counts[sum] += 1;
        sum = sum.wrapping_add(n0);
        counts[sum] += 1;
        sum = sum.wrapping_add(p2);
        counts[sum] += 1;
        sum = sum.wrapping_add(p0);
        counts[sum] += 1;
        sum = sum.wrapping_add(n1);
        counts[sum] += 1;
        sum = sum.wrapping_add(n0);
        counts[sum] += 1;
        sum = sum.wrapping_add(tbl3[(cur >> 3 & 1) as usize]);
        counts[sum] += 1;
        sum = sum.wrapping_add(p0);
        counts[sum] += 1;
        sum = sum.wrapping_add(p1);
        counts[sum] += 1;
        sum = sum.wrapping_add(n0);
        counts[sum] += 1;
        sum = sum.wrapping_add(n2);
        counts[sum] += 1;
        sum = sum.wrapping_add(p0);
        counts[sum] += 1;
        sum = sum.wrapping_add(n1);
        counts[sum] += 1;
        sum = sum.wrapping_add(n0);
        counts[sum] += 1;
        cur ^= 8;

        // Step block+16 crosses into the next block and toggles bit >= 4.
        block += 16;
        if block >= hi {
            break;
        }
        let t = block.trailing_zeros() as usize;
        cur ^= 1u64 << t;
        let on = (cur >> t & 1) as usize;
        sum = sum.wrapping_add(delta[t * 2 + on]);
        counts[sum] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn as_u64(table: &[BigUint]) -> Vec<u64> {
        table.iter().map(|c| u64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn part_set_contents() {
        let s = PartSet::new(4, 1).unwrap();
        assert_eq!(s.parts(), &[1, 2, 3, 5, 6, 7]);
        assert_eq!(s.max_part(), 7);
        let s = PartSet::new(8, 2).unwrap();
        assert_eq!(s.parts().len(), 21);
        assert!(s.parts().iter().all(|p| p % 8 != 0));
        assert_eq!(s.max_part(), 23);
    }

    #[test]
    fn count_examples() {
        assert_eq!(count(4, 1, 10).unwrap(), BigUint::from(4u32));
        assert_eq!(count(4, 5, 4).unwrap(), BigUint::from(1u32));
        assert_eq!(count(4, 5, 3).unwrap(), BigUint::from(2u32));
        // Subsets of {1..7, 9..15, 17..23} summing to 5: {5}, {1,4}, {2,3}.
        assert_eq!(count(8, 2, 5).unwrap(), BigUint::from(3u32));
        assert_eq!(count(4, 1, -3).unwrap(), BigUint::zero());
    }

    #[test]
    fn enumerate_example_order() {
        let got = enumerate(4, 1, 10, 100).unwrap();
        let expect = vec![
            Partition(vec![7, 3]),
            Partition(vec![7, 2, 1]),
            Partition(vec![6, 3, 1]),
            Partition(vec![5, 3, 2]),
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn enumerate_edge_cases() {
        assert_eq!(enumerate(6, 2, 0, 10).unwrap(), vec![Partition(vec![])]);
        // No subset of {1, 2, 3} reaches 7.
        assert_eq!(enumerate(4, 0, 7, 10).unwrap(), Vec::<Partition>::new());
        assert!(matches!(
            enumerate(4, 3, 24, 3),
            Err(Error::OutputCap { cap: 3 })
        ));
    }

    #[test]
    fn enumerate_agrees_with_count() {
        for n in 0..=24 {
            let listed = enumerate(4, 1, n, 10_000).unwrap();
            assert_eq!(BigUint::from(listed.len()), count(4, 1, n).unwrap());
            for part in &listed {
                assert_eq!(part.weight(), n as u64);
                assert!(part.0.windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn tables_match_expectations() {
        let t = count_table(4, 0, TableMode::DynamicProgramming).unwrap();
        assert_eq!(as_u64(&t), vec![1, 1, 1, 2, 1, 1, 1]);
        let t = count_table(5, 0, TableMode::PureEnumeration).unwrap();
        assert_eq!(as_u64(&t), vec![1, 1, 1, 2, 2, 2, 2, 2, 1, 1, 1]);
    }

    #[test]
    fn modes_agree() {
        for (k, m) in [(2, 6), (3, 3), (4, 2), (5, 1), (7, 1), (10, 0)] {
            let dp = count_table(k, m, TableMode::DynamicProgramming).unwrap();
            let pure = count_table(k, m, TableMode::PureEnumeration).unwrap();
            assert_eq!(dp, pure, "k={k} m={m}");
        }
    }

    #[test]
    fn blocked_walk_matches_simple_walk() {
        // 17 parts forces the blocked path; compare against the simple walk.
        let set = PartSet::new(3, 8).unwrap();
        let parts = set.parts();
        assert_eq!(parts.len(), 18);
        let degree: usize = parts.iter().sum::<u64>() as usize;
        let mut simple = vec![0u64; degree + 1];
        gray_range_simple(parts, 0, 1 << parts.len(), &mut simple);
        let mut blocked = vec![0u64; degree + 1];
        gray_range_blocked(parts, 0, 1 << parts.len(), &mut blocked);
        assert_eq!(simple, blocked);
    }

    #[test]
    fn threaded_pure_table_matches() {
        // (4, 4) has 15 parts, enough to take the blocked multi-chunk path.
        let opts = OracleOptions {
            threads: 3,
            ..OracleOptions::default()
        };
        let threaded = count_table_with(4, 4, TableMode::PureEnumeration, &opts).unwrap();
        let single = count_table(4, 4, TableMode::PureEnumeration).unwrap();
        assert_eq!(threaded, single);
        let dp = count_table(4, 4, TableMode::DynamicProgramming).unwrap();
        assert_eq!(threaded, dp);
    }

    #[test]
    fn table_sums_and_symmetry() {
        for (k, m) in [(4, 3), (6, 1), (9, 0)] {
            let t = count_table(k, m, TableMode::DynamicProgramming).unwrap();
            let sum: BigUint = t.iter().sum();
            let bits = (k as u64 - 1) * (m as u64 + 1);
            assert_eq!(sum, BigUint::one() << bits);
            let n = t.len();
            for i in 0..n / 2 {
                assert_eq!(t[i], t[n - 1 - i]);
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        // N(10, 66) = 201,005 is just over the DP degree cap.
        assert!(matches!(
            count_table(10, 66, TableMode::DynamicProgramming),
            Err(Error::OracleCap(_))
        ));
        // N(10, 6) = 2205 is over the pure-mode degree cap.
        assert!(matches!(
            count_table(10, 6, TableMode::PureEnumeration),
            Err(Error::OracleCap(_))
        ));
        // 41 parts trips the part cap even though the degree would pass.
        let opts = OracleOptions {
            pure_max_degree: 100_000,
            ..OracleOptions::default()
        };
        assert!(matches!(
            count_table_with(42, 0, TableMode::PureEnumeration, &opts),
            Err(Error::OracleCap(_))
        ));
    }
}
