//! Symmetry and unimodality verdicts, window checks, and the finite
//! verification drivers built on them.
//!
//! The certificate driver works on the first half of each coefficient array
//! only. That is sound because symmetry is checked first: for a symmetric
//! array, unimodality is equivalent to the first half being nondecreasing.
//! Each level's window starts at the midpoint of the previous level's
//! degree, and positions below it are nondecreasing whenever the previous
//! level was unimodal (appending a block shifts coefficients only upward by
//! at least km+1), so base case plus windows cover every intermediate
//! polynomial. Where the midpoint of an odd degree falls between windows,
//! the step across it is flat by symmetry and needs no check.

use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::error::{Error, Result};
use crate::params::{threshold_m_max, total_degree, weak_window, DEFAULT_MEMORY_CEILING};
use crate::poly::DensePolynomial;
use crate::report::tool_version;

/// Result of the first-half unimodality scan of one polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnimodalityVerdict {
    pub k: u32,
    pub m: u32,
    pub degree: u64,
    pub is_symmetric: bool,
    /// Positions n in [1, ceil(N/2)] with c[n] < c[n-1], ascending.
    pub violations: Vec<u64>,
    pub is_unimodal: bool,
    /// Smallest s with c[n] >= c[n-1] + 1 for every s <= n <= ceil(N/2).
    pub strict_from: Option<u64>,
}

pub fn check_symmetric(p: &DensePolynomial) -> bool {
    p.is_symmetric()
}

fn first_asymmetry(p: &DensePolynomial) -> Option<u64> {
    let c = p.coeffs();
    let n = c.len();
    (0..n / 2).find(|&i| c[i] != c[n - 1 - i]).map(|i| i as u64)
}

/// Scans the first half for descents. Asymmetric input is an error: without
/// symmetry the first-half criterion no longer characterizes unimodality.
pub fn check_unimodal(p: &DensePolynomial) -> Result<UnimodalityVerdict> {
    if let Some(n) = first_asymmetry(p) {
        return Err(Error::NotSymmetric { n });
    }
    let c = p.coeffs();
    let half = p.degree().div_ceil(2);
    let mut violations = Vec::new();
    for n in 1..=half {
        if c[n as usize] < c[n as usize - 1] {
            violations.push(n);
        }
    }
    let mut strict_from = None;
    for n in (1..=half).rev() {
        if c[n as usize] > c[n as usize - 1] {
            strict_from = Some(n);
        } else {
            break;
        }
    }
    let params = p.params();
    Ok(UnimodalityVerdict {
        k: params.k,
        m: params.m,
        degree: params.degree,
        is_symmetric: true,
        is_unimodal: violations.is_empty(),
        violations,
        strict_from,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    Weak,
    Strict,
}

/// Outcome of one nondecrease scan over a window of positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowCheck {
    pub m: u32,
    pub window: [u64; 2],
    pub mode: WindowMode,
    pub passed: bool,
    pub first_failure: Option<u64>,
}

/// Checks c[n] >= c[n-1] (weak) or c[n] >= c[n-1] + 1 (strict) for every n
/// in [lo, hi].
pub fn check_window(
    p: &DensePolynomial,
    lo: u64,
    hi: u64,
    mode: WindowMode,
) -> Result<WindowCheck> {
    if lo < 1 || lo > hi || hi > p.degree() {
        return Err(Error::WindowOutOfRange {
            lo,
            hi,
            degree: p.degree(),
        });
    }
    let (weak_failure, strict_failure) = scan_window(p, lo, hi);
    let first_failure = match mode {
        WindowMode::Weak => weak_failure,
        WindowMode::Strict => strict_failure,
    };
    Ok(WindowCheck {
        m: p.params().m,
        window: [lo, hi],
        mode,
        passed: first_failure.is_none(),
        first_failure,
    })
}

/// One pass recording the first weak failure (c[n] < c[n-1]) and the first
/// strict failure (c[n] <= c[n-1]).
fn scan_window(p: &DensePolynomial, lo: u64, hi: u64) -> (Option<u64>, Option<u64>) {
    let c = p.coeffs();
    let mut weak = None;
    let mut strict = None;
    for n in lo..=hi {
        let (prev, cur) = (&c[n as usize - 1], &c[n as usize]);
        if strict.is_none() && cur <= prev {
            strict = Some(n);
            if cur < prev {
                weak = Some(n);
                break;
            }
        } else if weak.is_none() && cur < prev {
            weak = Some(n);
            break;
        }
    }
    (weak, strict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateStatus {
    Verified,
    Refuted,
}

/// The concrete failing comparison accompanying a refuted status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefutationWitness {
    pub m: u32,
    pub n: u64,
    /// Decimal strings: coefficients outgrow every fixed-width integer.
    pub previous: String,
    pub current: String,
}

/// Per-level record of the certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRecord {
    pub m: u32,
    pub window: [u64; 2],
    pub mode: WindowMode,
    pub passed: bool,
    pub first_failure: Option<u64>,
    /// Whether the stronger +1 inequality also held over the window. It is
    /// recorded, never required.
    pub strict_held: bool,
    pub coeff_digest: String,
}

/// Machine-readable record that the finite hypotheses hold for (k, m0):
/// base case unimodal and every window up to the threshold nondecreasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationCertificate {
    pub k: u32,
    pub m0: u32,
    /// Largest level covered by the sweep. Full runs stop right below the
    /// analytic threshold; a capped run records the cap it ran to.
    pub threshold_m_max: u64,
    pub status: CertificateStatus,
    pub base_case: UnimodalityVerdict,
    pub levels: Vec<LevelRecord>,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RefutationWitness>,
}

/// Controls for the certificate driver.
#[derive(Debug, Clone)]
pub struct CertifyOptions {
    /// Cap on the level sweep, for testing and sharding. None runs to the
    /// analytic threshold.
    pub m_max: Option<u64>,
    pub memory_ceiling: u64,
    pub checkpoint_dir: Option<PathBuf>,
    pub resume: bool,
    /// Emit a progress line on stderr after every completed level.
    pub verbose: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            m_max: None,
            memory_ceiling: DEFAULT_MEMORY_CEILING,
            checkpoint_dir: None,
            resume: false,
            verbose: false,
        }
    }
}

/// Sidecar state written next to the rolling checkpoint so a run can resume
/// after the last completed level.
#[derive(Debug, Serialize, Deserialize)]
struct PartialState {
    k: u32,
    m0: u32,
    base_case: UnimodalityVerdict,
    levels: Vec<LevelRecord>,
}

fn sidecar_file(dir: &Path, k: u32, m0: u32) -> PathBuf {
    dir.join(format!("regulo-k{k}-m0{m0}.partial.json"))
}

fn write_sidecar(dir: &Path, state: &PartialState) -> Result<()> {
    let path = sidecar_file(dir, state.k, state.m0);
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_vec_pretty(state)?)?;
    std::fs::rename(&tmp, &path)?;
    Ok(())
}

fn witness_at(p: &DensePolynomial, n: u64) -> RefutationWitness {
    RefutationWitness {
        m: p.params().m,
        n,
        previous: p.coeff(n - 1).to_string(),
        current: p.coeff(n).to_string(),
    }
}

/// Certifies unimodality of the whole family for (k, m0): checks the base
/// case outright, then the window of every level m0 < m <= threshold on
/// incrementally extended polynomials. Any failing check refutes with a
/// witness; the sweep stops there. Requires k >= 5 (the k = 4 family has
/// its own profile driver with a genuine exceptional position).
pub fn certify_unimodality(
    k: i64,
    m0: i64,
    opts: &CertifyOptions,
) -> Result<VerificationCertificate> {
    if !(5..=i64::from(u32::MAX)).contains(&k) {
        return Err(Error::UnsupportedK {
            k,
            reason: if k == 4 {
                "the k = 4 family is handled by the exception-profile driver".into()
            } else {
                "the window driver requires k >= 5".into()
            },
        });
    }
    total_degree(k, m0)?;
    let (k32, m0_32) = (k as u32, m0 as u32);
    let cap = opts
        .m_max
        .map_or(threshold_m_max(k32), |m| m.min(threshold_m_max(k32)));

    // Fresh start or resume from the rolling checkpoint plus sidecar.
    let resumable = opts.checkpoint_dir.as_deref().and_then(|dir| {
        let ckpt = checkpoint::checkpoint_file(dir, k32, m0_32);
        let side = sidecar_file(dir, k32, m0_32);
        (opts.resume && ckpt.is_file() && side.is_file()).then_some((ckpt, side))
    });
    let (mut poly, base_case, mut levels) = match resumable {
        Some((ckpt_path, side_path)) => {
            let poly = checkpoint::load(&ckpt_path)?;
            let state: PartialState =
                serde_json::from_slice(&std::fs::read(&side_path)?)?;
            let consistent = state.k == k32
                && state.m0 == m0_32
                && poly.params().k == k32
                && poly.params().m == state.levels.last().map_or(m0_32, |l| l.m);
            if !consistent {
                return Err(Error::CorruptCheckpoint {
                    path: side_path,
                    reason: "sidecar state disagrees with the checkpoint".into(),
                });
            }
            if opts.verbose {
                eprintln!(
                    "resuming k={k32} m0={m0_32} from completed level m={}",
                    poly.params().m
                );
            }
            (poly, state.base_case, state.levels)
        }
        None => {
            let poly = DensePolynomial::build_with_ceiling(k, m0, opts.memory_ceiling)?;
            let base = check_unimodal(&poly)?;
            if let Some(dir) = opts.checkpoint_dir.as_deref() {
                std::fs::create_dir_all(dir)?;
                checkpoint::save(&poly, &checkpoint::checkpoint_file(dir, k32, m0_32))?;
                write_sidecar(
                    dir,
                    &PartialState {
                        k: k32,
                        m0: m0_32,
                        base_case: base.clone(),
                        levels: Vec::new(),
                    },
                )?;
            }
            (poly, base, Vec::new())
        }
    };

    let mut refuted = !base_case.is_unimodal;
    let mut witness = if refuted && poly.params().m == m0_32 {
        base_case.violations.first().map(|&n| witness_at(&poly, n))
    } else {
        None
    };
    // A resumed run that had already failed must not sweep past the failure.
    // The rolling checkpoint sits at the failing level, so the witness can
    // be reconstructed from it.
    if let Some(failed) = levels.last().filter(|l| !l.passed) {
        refuted = true;
        if witness.is_none() && poly.params().m == failed.m {
            witness = failed.first_failure.map(|n| witness_at(&poly, n));
        }
    }

    if !refuted {
        let start = poly.params().m + 1;
        for m in start..=cap as u32 {
            poly.extend_with_ceiling(opts.memory_ceiling)?;
            let (lo, hi) = weak_window(k32, m);
            let (weak_failure, strict_failure) = scan_window(&poly, lo, hi);
            let record = LevelRecord {
                m,
                window: [lo, hi],
                mode: WindowMode::Weak,
                passed: weak_failure.is_none(),
                first_failure: weak_failure,
                strict_held: strict_failure.is_none(),
                coeff_digest: poly.digest(),
            };
            let passed = record.passed;
            levels.push(record);
            if let Some(dir) = opts.checkpoint_dir.as_deref() {
                checkpoint::save(&poly, &checkpoint::checkpoint_file(dir, k32, m0_32))?;
                write_sidecar(
                    dir,
                    &PartialState {
                        k: k32,
                        m0: m0_32,
                        base_case: base_case.clone(),
                        levels: levels.clone(),
                    },
                )?;
            }
            if opts.verbose {
                eprintln!(
                    "level m={m}/{cap}: window [{lo}, {hi}] {}",
                    if passed { "passed" } else { "FAILED" }
                );
            }
            if !passed {
                witness = weak_failure.map(|n| witness_at(&poly, n));
                refuted = true;
                break;
            }
        }
    }

    Ok(VerificationCertificate {
        k: k32,
        m0: m0_32,
        threshold_m_max: cap,
        status: if refuted {
            CertificateStatus::Refuted
        } else {
            CertificateStatus::Verified
        },
        base_case,
        levels,
        tool_version: tool_version().to_string(),
        witness,
    })
}

/// Structural statement behind the driver: each level's window begins no
/// later than one past the midpoint of the previous level's degree and ends
/// at the midpoint of its own.
pub fn windows_cover_first_halves(k: u32, m0: u32, m_max: u64) -> bool {
    let mut prev_half = total_degree(k as i64, m0 as i64).unwrap().div_ceil(2);
    for m in (m0 as u64 + 1)..=m_max {
        let (lo, hi) = weak_window(k, m as u32);
        let degree = total_degree(k as i64, m as i64).unwrap();
        if lo > prev_half + 1 || hi != degree / 2 {
            return false;
        }
        prev_half = degree.div_ceil(2);
    }
    true
}

/// One row of the k = 4 exception profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct K4ProfileRow {
    pub m: u32,
    pub violations: Vec<u64>,
    pub expected: Vec<u64>,
    pub matches_expected: bool,
    /// First five coefficients are 1, 1, 1, 2, 1 for every m.
    pub leading_ok: bool,
}

/// Report of the k = 4 sweep: the first-half violation set of every level
/// up to m_max, checked against the known profile (empty at m = 0, exactly
/// position 4 afterwards; the mirror position 6(m+1)^2 - 4 is implied by
/// symmetry), plus the two handoff windows at m = 64.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct K4ProfileReport {
    pub m_max: u32,
    pub rows: Vec<K4ProfileRow>,
    pub windows_at_64: Option<[WindowCheck; 2]>,
    pub all_match: bool,
    pub tool_version: String,
}

pub fn k4_exception_profile(m_max: u32, memory_ceiling: u64) -> Result<K4ProfileReport> {
    let mut poly = DensePolynomial::build_with_ceiling(4, 0, memory_ceiling)?;
    let mut rows = Vec::with_capacity(m_max as usize + 1);
    let mut windows_at_64 = None;
    for m in 0..=m_max {
        if m > 0 {
            poly.extend_with_ceiling(memory_ceiling)?;
        }
        let verdict = check_unimodal(&poly)?;
        let expected: Vec<u64> = if m == 0 { vec![] } else { vec![4] };
        let leading_ok = [1u32, 1, 1, 2, 1]
            .iter()
            .enumerate()
            .all(|(n, &v)| *poly.coeff(n as u64) == BigUint::from(v));
        rows.push(K4ProfileRow {
            m,
            matches_expected: verdict.violations == expected,
            violations: verdict.violations,
            expected,
            leading_ok,
        });
        if m == 64 {
            // Handoff windows: nondecreasing on [5, 12m+20], strictly
            // increasing on [12m+21, 3(m+1)^2].
            let weak = check_window(&poly, 5, 12 * 64 + 20, WindowMode::Weak)?;
            let strict =
                check_window(&poly, 12 * 64 + 21, 3 * 65 * 65, WindowMode::Strict)?;
            windows_at_64 = Some([weak, strict]);
        }
    }
    let all_match = rows.iter().all(|r| r.matches_expected && r.leading_ok)
        && windows_at_64
            .as_ref()
            .is_none_or(|w| w.iter().all(|c| c.passed));
    Ok(K4ProfileReport {
        m_max,
        rows,
        windows_at_64,
        all_match,
        tool_version: tool_version().to_string(),
    })
}

fn coeff_or_zero(table: &DensePolynomial, n: i64) -> BigUint {
    if n < 0 || n as u64 > table.degree() {
        BigUint::zero()
    } else {
        table.coeff(n as u64).clone()
    }
}

/// The eight shifts relating level m to level m-1 for k = 4: the subset
/// sums of the new factor exponents 4m+1, 4m+2, 4m+3.
fn k4_shifts(m: i64) -> [i64; 8] {
    [
        0,
        4 * m + 1,
        4 * m + 2,
        4 * m + 3,
        8 * m + 3,
        8 * m + 4,
        8 * m + 5,
        12 * m + 6,
    ]
}

/// Verifies the k = 4 recurrence at one position: the level-m coefficient
/// of n equals the sum of level-(m-1) coefficients at the eight shifts.
pub fn check_recurrence_k4(m: i64, n: i64) -> Result<bool> {
    if m < 1 {
        return Err(Error::InvalidParams { k: 4, m });
    }
    let cur = DensePolynomial::build(4, m)?;
    let prev = DensePolynomial::build(4, m - 1)?;
    Ok(recurrence_holds(&cur, &prev, &k4_shifts(m), n))
}

/// Sweeps the k = 4 recurrence over every position of level m; returns the
/// first failing n, if any.
pub fn check_recurrence_k4_sweep(m: i64) -> Result<Option<u64>> {
    if m < 1 {
        return Err(Error::InvalidParams { k: 4, m });
    }
    let cur = DensePolynomial::build(4, m)?;
    let prev = DensePolynomial::build(4, m - 1)?;
    let shifts = k4_shifts(m);
    Ok((0..=cur.degree()).find(|&n| !recurrence_holds(&cur, &prev, &shifts, n as i64)))
}

fn recurrence_holds(
    cur: &DensePolynomial,
    prev: &DensePolynomial,
    shifts: &[i64],
    n: i64,
) -> bool {
    let mut sum = BigUint::zero();
    for &s in shifts {
        sum += coeff_or_zero(prev, n - s);
    }
    coeff_or_zero(cur, n) == sum
}

/// Subset sums of the new factor exponents km+1 ..= km+k-1, one per choice
/// vector, duplicates included.
fn general_shifts(k: i64, m: i64) -> Vec<i64> {
    let exps: Vec<i64> = (1..k).map(|l| k * m + l).collect();
    let mut shifts = Vec::with_capacity(1 << exps.len());
    for mask in 0u32..1 << exps.len() {
        let s: i64 = exps
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, &e)| e)
            .sum();
        shifts.push(s);
    }
    shifts
}

/// Verifies the block recurrence for general k at one position: the level-m
/// coefficient equals the sum over all 2^(k-1) choice vectors of shifted
/// level-(m-1) coefficients. Guarded against combinatorial blowup at k > 16.
pub fn check_recurrence_general(k: i64, m: i64, n: i64) -> Result<bool> {
    let (cur, prev, shifts) = general_recurrence_tables(k, m)?;
    Ok(recurrence_holds(&cur, &prev, &shifts, n))
}

pub fn check_recurrence_general_sweep(k: i64, m: i64) -> Result<Option<u64>> {
    let (cur, prev, shifts) = general_recurrence_tables(k, m)?;
    Ok((0..=cur.degree()).find(|&n| !recurrence_holds(&cur, &prev, &shifts, n as i64)))
}

fn general_recurrence_tables(
    k: i64,
    m: i64,
) -> Result<(DensePolynomial, DensePolynomial, Vec<i64>)> {
    if m < 1 {
        return Err(Error::InvalidParams { k, m });
    }
    if k > 16 {
        return Err(Error::RecurrenceGuard { k });
    }
    let cur = DensePolynomial::build(k, m)?;
    let prev = DensePolynomial::build(k, m - 1)?;
    Ok((cur, prev, general_shifts(k, m)))
}
