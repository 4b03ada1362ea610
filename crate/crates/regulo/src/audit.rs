//! Numerical companions to the analytic positivity argument.
//!
//! On the unit circle the generating product collapses to a cosine
//! product, giving the coefficients a Fourier-integral form:
//!
//!   d(n) = (2^(p+1) / pi) * Int_0^(pi/2) cos(mu t) * prod cos(e t) dt
//!
//! with p the factor count, e ranging over the admissible exponents, and
//! mu = N - 2n. Consecutive-coefficient differences hinge on the related
//! oscillatory integral
//!
//!   I(mu) = Int_0^(pi/2) t * sin(mu t) * prod cos(e t) dt
//!
//! split at 2pi/(k(k-1)(2m+1)) and pi/(2km + 2(k-1)) into a dominant head,
//! a mid part, and a tail. This module evaluates all of that with adaptive
//! quadrature and checks the explicit constants of the argument: the head
//! lower bound 3.34 mu / (k^(9/2) m^(9/2)), the mid/tail ratio caps
//! 5.89e-9 and 0.55, the growth constant c(m) with its 0.26 k^3 cap, and
//! the product envelope E with its exp(-0.381 m - 0.224) bound.
//!
//! Everything here is floating point. The checks are numerical
//! spot-checks of proved inequalities, evidence and never proof, and every
//! report says so.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{mu_cap, threshold_m_max, total_degree, PolyParams};
use crate::poly::factor_exponents;
use crate::quad::{integrate, QuadratureResult, QuadratureSpec};
use crate::report::tool_version;

/// Status string carried by every audit report.
pub const EVIDENCE: &str = "numerical spot-check";

/// Below this magnitude, running cosine products switch to sign plus
/// natural-log accumulation so they never underflow to zero silently.
const LOG_SWITCH: f64 = 1e-280;

/// Pole exclusion radius around multiples of pi/(2k).
const POLE_RADIUS: f64 = 1e-8;

fn kahan_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let y = term - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// A product kept as sign and log magnitude once it leaves the comfortable
/// range of f64.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignedLogProduct {
    /// -1.0, 0.0, or 1.0.
    pub sign: f64,
    /// Natural log of the magnitude; -inf when the product is exactly zero.
    pub log_magnitude: f64,
}

impl SignedLogProduct {
    /// Collapses back to f64; underflows to signed zero when the magnitude
    /// is below f64 range, which is fine for integration.
    pub fn value(&self) -> f64 {
        self.sign * self.log_magnitude.exp()
    }
}

/// prod cos(e * theta) over the admissible exponents e of (k, m), with the
/// log-magnitude switch below 1e-280.
pub fn cos_product_parts(k: u32, m: u32, theta: f64) -> SignedLogProduct {
    let mut acc = 1.0f64;
    let mut sign = 1.0f64;
    let mut log_extra = 0.0f64;
    let mut comp = 0.0f64;
    let mut folded = false;
    for e in factor_exponents(k, m) {
        acc *= (e as f64 * theta).cos();
        if acc == 0.0 {
            return SignedLogProduct {
                sign: 0.0,
                log_magnitude: f64::NEG_INFINITY,
            };
        }
        if acc.abs() < LOG_SWITCH {
            sign *= acc.signum();
            kahan_add(&mut log_extra, &mut comp, acc.abs().ln());
            acc = 1.0;
            folded = true;
        }
    }
    sign *= acc.signum();
    let log_magnitude = if folded {
        log_extra + acc.abs().ln()
    } else {
        acc.abs().ln()
    };
    SignedLogProduct {
        sign,
        log_magnitude,
    }
}

pub fn cos_product(k: u32, m: u32, theta: f64) -> f64 {
    cos_product_parts(k, m, theta).value()
}

/// Plain running product for integrands: contributions small enough to
/// underflow are also too small to matter at the quadrature tolerance.
fn raw_cos_product(exps: &[f64], theta: f64) -> f64 {
    let mut acc = 1.0f64;
    for &e in exps {
        acc *= (e * theta).cos();
    }
    acc
}

fn float_exponents(k: u32, m: u32) -> Vec<f64> {
    factor_exponents(k, m).iter().map(|&e| e as f64).collect()
}

/// Seed panel count for an integrand with content up to `freq` on a range
/// of width `width`: a bit over one panel per oscillation period.
fn oscillation_panels(width: f64, freq: f64, spec: &QuadratureSpec) -> usize {
    let periods = width * freq / (2.0 * PI);
    let panels = (periods * 1.3).ceil() as usize + 4;
    panels.min((spec.max_evaluations / 60).max(1) as usize)
}

/// Reconstructs one coefficient through the Fourier integral. The guard on
/// the factor count keeps the 2^(p+1) scale factor in a range where the
/// quadrature tolerance still resolves integer coefficients.
pub fn coefficient_by_quadrature(
    k: i64,
    m: i64,
    n: u64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    let params = PolyParams::new(k, m)?;
    if params.factor_count() > 40 {
        return Err(Error::ResolutionGuard(format!(
            "coefficient quadrature needs (k-1)(m+1) <= 40 factors, got {}",
            params.factor_count()
        )));
    }
    if n > params.degree {
        return Err(Error::ResolutionGuard(format!(
            "coefficient index {n} exceeds the degree {}",
            params.degree
        )));
    }
    let nn = params.degree as f64;
    let mu = nn - 2.0 * n as f64;
    let exps = float_exponents(params.k, params.m);
    let scale = 2f64.powi(params.factor_count() as i32 + 1) / PI;
    let panels = oscillation_panels(PI / 2.0, mu.abs() + nn, spec);
    let r = integrate(
        |t| (mu * t).cos() * raw_cos_product(&exps, t),
        0.0,
        PI / 2.0,
        spec,
        panels,
    )?;
    Ok(QuadratureResult {
        value: scale * r.value,
        error_estimate: scale * r.error_estimate,
        ..r
    })
}

/// The oscillatory integral I(mu) split into head, mid, and tail.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralSplit {
    pub value: f64,
    pub error_estimate: f64,
    pub i1: QuadratureResult,
    pub i2: QuadratureResult,
    pub i3: QuadratureResult,
}

/// Split points: head ends at 2pi/(k(k-1)(2m+1)), mid at pi/(2km+2(k-1)).
pub fn split_points(k: u32, m: u32) -> (f64, f64) {
    let b1 = 2.0 * PI / (f64::from(k) * f64::from(k - 1) * f64::from(2 * m + 1));
    let b2 = PI / (2.0 * f64::from(k) * f64::from(m) + 2.0 * f64::from(k - 1));
    (b1, b2)
}

/// Evaluates I(mu) = Int_0^(pi/2) t sin(mu t) prod cos(e t) dt in its three
/// parts. Any finite mu is accepted; the audits sample (0, k(k-1)(2m+1)/2].
pub fn eval_i(k: i64, m: i64, mu: f64, spec: &QuadratureSpec) -> Result<IntegralSplit> {
    let params = PolyParams::new(k, m)?;
    if !mu.is_finite() {
        return Err(Error::SampleOutOfDomain(format!(
            "mu must be finite, got {mu}"
        )));
    }
    let exps = float_exponents(params.k, params.m);
    let (b1, b2) = split_points(params.k, params.m);
    let freq = mu.abs() + params.degree as f64 + 1.0;
    let f = |t: f64| t * (mu * t).sin() * raw_cos_product(&exps, t);
    let i1 = integrate(&f, 0.0, b1, spec, oscillation_panels(b1, freq, spec))?;
    let i2 = integrate(&f, b1, b2, spec, oscillation_panels(b2 - b1, freq, spec))?;
    let i3 = integrate(
        &f,
        b2,
        PI / 2.0,
        spec,
        oscillation_panels(PI / 2.0 - b2, freq, spec),
    )?;
    Ok(IntegralSplit {
        value: i1.value + i2.value + i3.value,
        error_estimate: i1.error_estimate + i2.error_estimate + i3.error_estimate,
        i1,
        i2,
        i3,
    })
}

/// Sign with a dead zone: 0 when the magnitude is inside the error bar.
fn definite_sign(value: f64, error: f64) -> i8 {
    if value > error {
        1
    } else if value < -error {
        -1
    } else {
        0
    }
}

/// Agreement between the finite difference of quadrature coefficients at
/// n-1, n and the sign of I at the matched frequency mu = N - 2n + 1 (the
/// midpoint of the two coefficient frequencies).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConsistencyCheck {
    pub k: u32,
    pub m: u32,
    pub n: u64,
    pub mu: f64,
    pub difference: f64,
    pub difference_error: f64,
    pub integral: f64,
    pub integral_error: f64,
    pub signs_agree: bool,
}

pub fn coefficient_difference_consistency(
    k: i64,
    m: i64,
    n: u64,
    spec: &QuadratureSpec,
) -> Result<ConsistencyCheck> {
    let params = PolyParams::new(k, m)?;
    if n < 1 || n > params.degree {
        return Err(Error::SampleOutOfDomain(format!(
            "difference position must satisfy 1 <= n <= {}, got {n}",
            params.degree
        )));
    }
    let hi = coefficient_by_quadrature(k, m, n, spec)?;
    let lo = coefficient_by_quadrature(k, m, n - 1, spec)?;
    let mu = params.degree as f64 - 2.0 * n as f64 + 1.0;
    let integral = eval_i(k, m, mu, spec)?;
    let difference = hi.value - lo.value;
    let difference_error = hi.error_estimate + lo.error_estimate;
    let s_diff = definite_sign(difference, difference_error.max(1e-9));
    let s_int = definite_sign(integral.value, integral.error_estimate);
    Ok(ConsistencyCheck {
        k: params.k,
        m: params.m,
        n,
        mu,
        difference,
        difference_error,
        integral: integral.value,
        integral_error: integral.error_estimate,
        signs_agree: !(s_diff != 0 && s_int != 0 && s_diff != s_int),
    })
}

// ---- trig identities -------------------------------------------------

/// Sum of sin^2(j x) for j = 1..=n, closed form. Fails near sin x = 0.
pub fn sin_sq_closed(n: u64, x: f64) -> Result<f64> {
    if x.sin().abs() < POLE_RADIUS {
        return Err(Error::SampleOutOfDomain(format!(
            "sin x too close to a pole at x = {x}"
        )));
    }
    let nf = n as f64;
    Ok(nf / 2.0 - ((2.0 * nf + 1.0) * x).sin() / (4.0 * x.sin()) + 0.25)
}

/// Sum of sin^4(j x) for j = 1..=n, closed form. Fails near sin x = 0 or
/// sin 2x = 0.
pub fn sin_quartic_closed(n: u64, x: f64) -> Result<f64> {
    if x.sin().abs() < POLE_RADIUS || (2.0 * x).sin().abs() < POLE_RADIUS {
        return Err(Error::SampleOutOfDomain(format!(
            "sin x or sin 2x too close to a pole at x = {x}"
        )));
    }
    let nf = n as f64;
    Ok(3.0 * nf / 8.0 - ((2.0 * nf + 1.0) * x).sin() / (4.0 * x.sin())
        + ((2.0 * nf + 1.0) * 2.0 * x).sin() / (16.0 * (2.0 * x).sin())
        + 3.0 / 16.0)
}

pub fn sin_sq_direct(n: u64, x: f64) -> f64 {
    let (mut sum, mut comp) = (0.0, 0.0);
    for j in 1..=n {
        kahan_add(&mut sum, &mut comp, (j as f64 * x).sin().powi(2));
    }
    sum
}

pub fn sin_quartic_direct(n: u64, x: f64) -> f64 {
    let (mut sum, mut comp) = (0.0, 0.0);
    for j in 1..=n {
        kahan_add(&mut sum, &mut comp, (j as f64 * x).sin().powi(4));
    }
    sum
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityAudit {
    pub samples: u64,
    pub tolerance: f64,
    pub max_error_quadratic: f64,
    pub max_error_quartic: f64,
    pub passed: bool,
    pub evidence: &'static str,
    pub tool_version: String,
}

/// Compares both closed forms against direct summation on an
/// x_samples-by-n_samples grid of random pole-avoiding samples with a
/// fixed-seed generator, to absolute tolerance 1e-10 per sample.
pub fn check_identities(x_samples: usize, n_samples: usize, seed: u64) -> Result<IdentityAudit> {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(x_samples);
    while xs.len() < x_samples {
        let x: f64 = rng.gen_range(0.005..PI - 0.005);
        if x.sin().abs() >= POLE_RADIUS && (2.0 * x).sin().abs() >= POLE_RADIUS {
            xs.push(x);
        }
    }
    let ns: Vec<u64> = (0..n_samples).map(|_| rng.gen_range(1..=300)).collect();
    let mut max_sq = 0.0f64;
    let mut max_quartic = 0.0f64;
    for &x in &xs {
        for &n in &ns {
            max_sq = max_sq.max((sin_sq_closed(n, x)? - sin_sq_direct(n, x)).abs());
            max_quartic =
                max_quartic.max((sin_quartic_closed(n, x)? - sin_quartic_direct(n, x)).abs());
        }
    }
    Ok(IdentityAudit {
        samples: (x_samples * n_samples) as u64,
        tolerance: TOL,
        max_error_quadratic: max_sq,
        max_error_quartic: max_quartic,
        passed: max_sq <= TOL && max_quartic <= TOL,
        evidence: EVIDENCE,
        tool_version: tool_version().to_string(),
    })
}

// ---- explicit constants ----------------------------------------------

/// -log cos 1, the constant in the growth bound.
pub fn gamma() -> f64 {
    -1f64.cos().ln()
}

/// Closed form of the growth constant c(m) for k-regular products,
/// decreasing in m past the m >= 8 k^(3/2) threshold.
pub fn c_of_m(k: u32, m: u32) -> f64 {
    let kf = f64::from(k);
    let mf = f64::from(m);
    let a = kf * kf * (kf - 1.0) * (kf - 1.0);
    let quad = a * (1.0 / (3.0 * mf) + 1.0 / (3.0 * mf * mf) + 1.0 / (12.0 * mf * mf * mf));
    let lin = gamma()
        * kf
        * (kf - 1.0)
        * (kf / 3.0
            + kf / mf
            + (6.0 * kf - 1.0) / (6.0 * mf * mf)
            + (2.0 * kf - 1.0) / (6.0 * mf * mf * mf));
    quad + lin
}

/// The cap 0.26 k^3 that c(m) stays below at and past the threshold.
pub fn c_cap(k: u32) -> f64 {
    0.26 * f64::from(k).powi(3)
}

/// The product envelope bound exp(-0.381 m - 0.224).
pub fn envelope_bound(m: u32) -> f64 {
    (-0.381 * f64::from(m) - 0.224).exp()
}

/// Head lower bound 3.34 mu / (k^(9/2) m^(9/2)).
pub fn i1_lower_bound(k: u32, m: u32, mu: f64) -> f64 {
    3.34 * mu / (f64::from(k).powf(4.5) * f64::from(m).powf(4.5))
}

/// Mid-to-head ratio envelope f(m) = pi^3 k^(9/2) m^(3/2) / 5130 *
/// exp(-pi^2 m / (6k)), decreasing in m for k >= 4.
pub fn mid_ratio_envelope(k: u32, m: u32) -> f64 {
    let (kf, mf) = (f64::from(k), f64::from(m));
    PI.powi(3) * kf.powf(4.5) * mf.powf(1.5) / 5130.0 * (-PI * PI * mf / (6.0 * kf)).exp()
}

/// Tail-to-head ratio envelope g(m) = pi^3 k^(9/2) m^(9/2) / (3.34 * 24) *
/// exp(-0.381 m - 0.224), decreasing in m past the threshold.
pub fn tail_ratio_envelope(k: u32, m: u32) -> f64 {
    let (kf, mf) = (f64::from(k), f64::from(m));
    PI.powi(3) * kf.powf(4.5) * mf.powf(4.5) / (3.34 * 24.0) * (-0.381 * mf - 0.224).exp()
}

/// f at the threshold m = 8 k^(3/2), as a function of k alone (constant
/// factors dropped): exp(-4 pi^2 sqrt(k) / 3) k^(27/4), decreasing for
/// k >= 4.
pub fn mid_ratio_peak(k: u32) -> f64 {
    let kf = f64::from(k);
    (-4.0 * PI * PI * kf.sqrt() / 3.0).exp() * kf.powf(6.75)
}

/// g at the threshold, as a function of k alone:
/// exp(-3.048 k^(3/2) - 0.224) k^(45/4), decreasing for k >= 4.
pub fn tail_ratio_peak(k: u32) -> f64 {
    let kf = f64::from(k);
    (-3.048 * kf.powf(1.5) - 0.224).exp() * kf.powf(11.25)
}

// ---- the product envelope E ------------------------------------------

fn nearest_pole_distance(k: u32, theta: f64) -> f64 {
    let step = PI / (2.0 * f64::from(k));
    let i = (theta / step).round();
    (theta - i * step).abs()
}

/// Exponent of the closed-form envelope E: from the two sum identities
/// applied to |cos y| <= exp(-sin^2(y)/2 - sin^4(y)/4) over the admissible
/// exponents, all partial sums collapsing to four sine-quotient terms.
fn envelope_exponent(k: u32, m: u32, theta: f64) -> Result<f64> {
    if nearest_pole_distance(k, theta) < POLE_RADIUS {
        return Err(Error::SampleOutOfDomain(format!(
            "theta = {theta} is within {POLE_RADIUS} of a pole i*pi/(2k)"
        )));
    }
    let p = f64::from(k - 1) * f64::from(m + 1);
    let a = 2.0 * f64::from(k) * f64::from(m) + 2.0 * f64::from(k) - 1.0;
    let b = f64::from(2 * m + 1) * f64::from(k);
    Ok(-11.0 * p / 32.0 + 3.0 * (a * theta).sin() / (16.0 * theta.sin())
        - (2.0 * a * theta).sin() / (64.0 * (2.0 * theta).sin())
        - 3.0 * (b * theta).sin() / (16.0 * (f64::from(k) * theta).sin())
        + (2.0 * b * theta).sin() / (64.0 * (2.0 * f64::from(k) * theta).sin()))
}

/// The closed-form envelope E(theta) >= |prod cos(e theta)|, defined away
/// from the poles i*pi/(2k).
pub fn upper_envelope(k: u32, m: u32, theta: f64) -> Result<f64> {
    Ok(envelope_exponent(k, m, theta)?.exp())
}

/// Exponent of the envelope by direct summation of -S2/2 - S4/4, defined
/// everywhere and immune to underflow; cross-checks the closed form.
fn direct_exponent(k: u32, m: u32, theta: f64) -> f64 {
    let (mut s2, mut c2) = (0.0, 0.0);
    let (mut s4, mut c4) = (0.0, 0.0);
    for e in factor_exponents(k, m) {
        let s = (e as f64 * theta).sin();
        kahan_add(&mut s2, &mut c2, s * s);
        kahan_add(&mut s4, &mut c4, s * s * s * s);
    }
    -s2 / 2.0 - s4 / 4.0
}

/// The same envelope by direct summation, exp(-S2/2 - S4/4); used to
/// cross-check the closed form.
pub fn upper_envelope_direct(k: u32, m: u32, theta: f64) -> f64 {
    direct_exponent(k, m, theta).exp()
}

// ---- audit drivers ----------------------------------------------------

/// One sampled frequency of the bound audit.
#[derive(Debug, Clone, Serialize)]
pub struct BoundAuditRow {
    pub mu: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub positive_with_margin: bool,
    pub i1_floor: f64,
    pub i1_above_floor: bool,
    pub i2_cap: f64,
    pub i2_within_cap: bool,
    pub i3_cap: f64,
    pub i3_within_cap: bool,
}

/// Aggregate of the envelope checks over sampled theta.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeAudit {
    pub k: u32,
    pub m: u32,
    pub theta_samples: usize,
    /// exp(-0.381 m - 0.224).
    pub bound: f64,
    /// Largest sampled E(theta); must stay under `bound`.
    pub max_envelope: f64,
    pub envelope_below_bound: bool,
    /// Largest log-domain excess of |prod cos| over E; <= 0 means bounded.
    pub max_product_log_excess: f64,
    pub product_below_envelope: bool,
    /// Largest |log E_closed - log E_direct| across samples.
    pub max_closed_direct_gap: f64,
    pub closed_matches_direct: bool,
}

/// Envelope spot-check at `samples` evenly spaced theta over
/// [pi/(2km+2(k-1)), pi/2), nudged off the poles.
pub fn check_envelope(k: u32, m: u32, samples: usize) -> Result<EnvelopeAudit> {
    let (_, b2) = split_points(k, m);
    let hi = PI / 2.0 - 1e-6;
    let n = samples.max(2);
    let mut max_envelope = f64::MIN;
    let mut max_excess = f64::MIN;
    let mut max_gap = 0.0f64;
    for j in 0..n {
        let mut theta = b2 + (hi - b2) * j as f64 / (n - 1) as f64;
        if nearest_pole_distance(k, theta) < POLE_RADIUS {
            theta += 1e-6;
        }
        let log_e = envelope_exponent(k, m, theta)?;
        max_envelope = max_envelope.max(log_e.exp());
        let prod = cos_product_parts(k, m, theta);
        // Compare in the log domain; 1e-6 of slack there is a relative
        // 1e-6 in value, covering f64 noise in ~200-factor products.
        max_excess = max_excess.max(prod.log_magnitude - log_e);
        max_gap = max_gap.max((log_e - direct_exponent(k, m, theta)).abs());
    }
    let bound = envelope_bound(m);
    Ok(EnvelopeAudit {
        k,
        m,
        theta_samples: n,
        bound,
        max_envelope,
        envelope_below_bound: max_envelope < bound,
        max_product_log_excess: max_excess,
        product_below_envelope: max_excess <= 1e-6,
        max_closed_direct_gap: max_gap,
        closed_matches_direct: max_gap <= 1e-6,
    })
}

/// Full numerical audit of the positivity argument at one (k, m): the
/// split integral at sampled frequencies with the head floor and the
/// mid/tail ratio caps, the growth constant against its cap, and the
/// envelope checks.
#[derive(Debug, Clone, Serialize)]
pub struct BoundAudit {
    pub k: u32,
    pub m: u32,
    pub mu_cap: f64,
    pub rows: Vec<BoundAuditRow>,
    pub c_value: f64,
    pub c_cap: f64,
    pub c_within_cap: bool,
    pub envelope: EnvelopeAudit,
    pub all_passed: bool,
    pub evidence: &'static str,
    pub tool_version: String,
}

/// Runs the bound audit with `mu_samples` evenly spaced frequencies in
/// (0, k(k-1)(2m+1)/2], the cap included, and `theta_samples` envelope
/// points. Meaningful for m at or past the 8 k^(3/2) threshold, where the
/// argument's inequalities are claimed.
pub fn run_bound_audit(
    k: u32,
    m: u32,
    mu_samples: usize,
    theta_samples: usize,
    spec: &QuadratureSpec,
) -> Result<BoundAudit> {
    total_degree(k as i64, m as i64)?;
    if u64::from(m) <= threshold_m_max(k) {
        return Err(Error::SampleOutOfDomain(format!(
            "bound audit expects m past the 8k^(3/2) threshold; for k = {k} that means m >= {}",
            threshold_m_max(k) + 1
        )));
    }
    let cap = mu_cap(k, m) as f64;
    let samples = mu_samples.max(1);
    let mut rows = Vec::with_capacity(samples);
    for i in 1..=samples {
        let mu = cap * i as f64 / samples as f64;
        let split = eval_i(k as i64, m as i64, mu, spec)?;
        let (e1, e2, e3) = (
            split.i1.error_estimate,
            split.i2.error_estimate,
            split.i3.error_estimate,
        );
        let i1_floor = i1_lower_bound(k, m, mu);
        let i2_cap_val = 5.89e-9 * (split.i1.value + e1) + e2;
        let i3_cap_val = 0.55 * (split.i1.value + e1) + e3;
        rows.push(BoundAuditRow {
            mu,
            value: split.value,
            error_estimate: split.error_estimate,
            i1: split.i1.value,
            i2: split.i2.value,
            i3: split.i3.value,
            positive_with_margin: split.value - split.error_estimate > 0.0,
            i1_floor,
            i1_above_floor: split.i1.value >= i1_floor - e1,
            i2_cap: i2_cap_val,
            i2_within_cap: split.i2.value.abs() <= i2_cap_val,
            i3_cap: i3_cap_val,
            i3_within_cap: split.i3.value.abs() <= i3_cap_val,
        });
    }
    let envelope = check_envelope(k, m, theta_samples)?;
    let c_value = c_of_m(k, m);
    let c_cap_val = c_cap(k);
    let rows_ok = rows.iter().all(|r| {
        r.positive_with_margin && r.i1_above_floor && r.i2_within_cap && r.i3_within_cap
    });
    let envelope_ok = envelope.envelope_below_bound
        && envelope.product_below_envelope
        && envelope.closed_matches_direct;
    Ok(BoundAudit {
        k,
        m,
        mu_cap: cap,
        rows,
        c_value,
        c_cap: c_cap_val,
        c_within_cap: c_value <= c_cap_val,
        envelope,
        all_passed: rows_ok && envelope_ok && c_value <= c_cap_val,
        evidence: EVIDENCE,
        tool_version: tool_version().to_string(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantRow {
    pub k: u32,
    pub m: u32,
    pub c_value: f64,
    pub c_cap: f64,
    pub within_cap: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneRow {
    pub k: u32,
    pub mid_ratio_decreasing: bool,
    pub tail_ratio_decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsAudit {
    pub gamma: f64,
    pub gamma_reference: f64,
    pub gamma_ok: bool,
    pub c_rows: Vec<ConstantRow>,
    pub monotone_rows: Vec<MonotoneRow>,
    pub peaks_decreasing_in_k: bool,
    pub envelopes: Vec<EnvelopeAudit>,
    pub quadrature_rows: Vec<BoundAuditRow>,
    pub all_passed: bool,
    pub evidence: &'static str,
    pub tool_version: String,
}

/// Smallest m with m^2 >= 64 k^3, the threshold the decreasing-in-m claims
/// start from.
fn threshold_start(k: u32) -> u32 {
    (threshold_m_max(k) + 1) as u32
}

/// Checks the explicit constants across sampled k: gamma to its printed
/// six decimals, c(m) under 0.26 k^3, the ratio envelopes decreasing in m,
/// their threshold peaks decreasing in k, the envelope E under its bound,
/// and (for k where the run stays cheap) the head floor and ratio caps by
/// quadrature at one mid-range frequency.
pub fn check_constants(
    k_samples: &[u32],
    m_samples: usize,
    theta_samples: usize,
    spec: &QuadratureSpec,
) -> Result<ConstantsAudit> {
    const GAMMA_REFERENCE: f64 = 0.615626;
    if k_samples.iter().any(|&k| k < 4) {
        return Err(Error::SampleOutOfDomain(
            "constants audit needs k >= 4".into(),
        ));
    }
    let g = gamma();
    let gamma_ok = (g - GAMMA_REFERENCE).abs() < 5e-7;
    let mut c_rows = Vec::new();
    let mut monotone_rows = Vec::new();
    let mut envelopes = Vec::new();
    let mut quadrature_rows = Vec::new();
    let mut all = gamma_ok;
    for &k in k_samples {
        let m_start = threshold_start(k);
        let ms: Vec<u32> = (0..m_samples.max(2) as u32).map(|j| m_start + j * k).collect();
        for &m in &ms {
            let row = ConstantRow {
                k,
                m,
                c_value: c_of_m(k, m),
                c_cap: c_cap(k),
                within_cap: c_of_m(k, m) <= c_cap(k),
            };
            all &= row.within_cap;
            c_rows.push(row);
        }
        let mono = MonotoneRow {
            k,
            mid_ratio_decreasing: ms
                .windows(2)
                .all(|w| mid_ratio_envelope(k, w[1]) < mid_ratio_envelope(k, w[0])),
            tail_ratio_decreasing: ms
                .windows(2)
                .all(|w| tail_ratio_envelope(k, w[1]) < tail_ratio_envelope(k, w[0])),
        };
        all &= mono.mid_ratio_decreasing && mono.tail_ratio_decreasing;
        monotone_rows.push(mono);
        let env = check_envelope(k, m_start, theta_samples)?;
        all &= env.envelope_below_bound && env.product_below_envelope && env.closed_matches_direct;
        envelopes.push(env);
        // The quadrature spot-check costs grow like (k m)^2 through the
        // oscillation count; keep it to runs of modest degree.
        if total_degree(k as i64, m_start as i64)? <= 30_000 {
            let audit = run_bound_audit(k, m_start, 1, 2, spec)?;
            let row = audit.rows.into_iter().next().expect("one sampled mu");
            all &= row.positive_with_margin
                && row.i1_above_floor
                && row.i2_within_cap
                && row.i3_within_cap;
            quadrature_rows.push(row);
        }
    }
    let mut sorted = k_samples.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let peaks_decreasing_in_k = sorted
        .windows(2)
        .all(|w| mid_ratio_peak(w[1]) < mid_ratio_peak(w[0]) && tail_ratio_peak(w[1]) < tail_ratio_peak(w[0]));
    all &= peaks_decreasing_in_k;
    Ok(ConstantsAudit {
        gamma: g,
        gamma_reference: GAMMA_REFERENCE,
        gamma_ok,
        c_rows,
        monotone_rows,
        peaks_decreasing_in_k,
        envelopes,
        quadrature_rows,
        all_passed: all,
        evidence: EVIDENCE,
        tool_version: tool_version().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::DensePolynomial;
    use num_traits::ToPrimitive;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn cos_product_values() {
        // 12 cos factors at a small angle, against high-precision
        // reference.
        let v = cos_product(4, 1, 0.01);
        assert!((v - 0.9938155157830691868601).abs() < 1e-14, "{v}");
        // Exponents 1, 2, 3 at pi/2: two near-zero factors survive as a
        // positive product around 1.12e-32.
        let v = cos_product(4, 0, std::f64::consts::FRAC_PI_2);
        assert!((v - 1.1248198369963932e-32).abs() < 1e-45, "{v}");
        assert_eq!(cos_product(4, 0, 0.0), 1.0);
    }

    #[test]
    fn log_switch_engages_without_changing_small_cases() {
        // Near pi/2 every odd exponent contributes a factor around 1e-16,
        // so the (4, 64) product dives far below f64 range; the signed-log
        // form still carries the magnitude.
        let p = cos_product_parts(4, 64, std::f64::consts::FRAC_PI_2);
        assert!(p.log_magnitude < -2000.0, "log mag {}", p.log_magnitude);
        assert!(p.sign == 1.0 || p.sign == -1.0);
        assert_eq!(p.value(), 0.0);
        // Tiny but representable: no fold, and the log form is consistent.
        let p = cos_product_parts(4, 64, 1.3);
        assert!(p.log_magnitude < -100.0 && p.log_magnitude > -700.0);
        assert!((p.value().abs().ln() - p.log_magnitude).abs() < 1e-9);
        // Moderate case: the two paths agree.
        let p = cos_product_parts(4, 2, 0.4);
        let direct: f64 = factor_exponents(4, 2)
            .iter()
            .map(|&e| (e as f64 * 0.4).cos())
            .product();
        assert!((p.value() - direct).abs() < 1e-15);
    }

    #[test]
    fn coefficient_quadrature_matches_exact() {
        let poly = DensePolynomial::build(4, 1).unwrap();
        for n in 0..=poly.degree() {
            let r = coefficient_by_quadrature(4, 1, n, &spec()).unwrap();
            let exact = poly.coeff(n).to_u64().unwrap() as f64;
            let tol = r.error_estimate.max(1e-6);
            assert!(
                (r.value - exact).abs() <= tol,
                "n={n}: {} vs {exact}",
                r.value
            );
        }
    }

    #[test]
    fn coefficient_quadrature_guards() {
        assert!(matches!(
            coefficient_by_quadrature(5, 10, 0, &spec()),
            Err(Error::ResolutionGuard(_))
        ));
        assert!(matches!(
            coefficient_by_quadrature(4, 1, 100, &spec()),
            Err(Error::ResolutionGuard(_))
        ));
    }

    #[test]
    fn split_integral_reference_values() {
        // Head, mid, tail at (4, 2), mu = 35, against high-precision
        // reference values.
        let s = eval_i(4, 2, 35.0, &spec()).unwrap();
        assert!((s.i1.value - 0.00133423896245675).abs() < 1e-9);
        assert!((s.i2.value - -5.16799940046329e-5).abs() < 1e-9);
        assert!((s.i3.value - 0.000291473081117876).abs() < 1e-9);
        assert!((s.value - 0.00157403204956999).abs() < 1e-9);
        // A genuinely negative value below the threshold regime.
        let s = eval_i(5, 1, 20.0, &spec()).unwrap();
        assert!((s.value - -0.000448222591299479).abs() < 1e-9);
    }

    #[test]
    fn split_sums_to_single_shot() {
        let s = eval_i(4, 3, 12.0, &spec()).unwrap();
        let exps = float_exponents(4, 3);
        let whole = integrate(
            |t| t * (12.0 * t).sin() * raw_cos_product(&exps, t),
            0.0,
            PI / 2.0,
            &spec(),
            64,
        )
        .unwrap();
        assert!((s.value - whole.value).abs() <= s.error_estimate + whole.error_estimate + 1e-12);
    }

    #[test]
    fn head_floor_at_the_threshold_level() {
        // I1 at (4, 64): reference 1.34514135668e-10 at mu = 1 and
        // 9.73529140909e-8 at the cap, both above the stated floor.
        let s = eval_i(4, 64, 1.0, &spec()).unwrap();
        assert!((s.i1.value - 1.34514135668e-10).abs() < 1e-16);
        assert!(s.i1.value >= i1_lower_bound(4, 64, 1.0));
        let s = eval_i(4, 64, 774.0, &spec()).unwrap();
        assert!((s.i1.value - 9.73529140909e-8).abs() < 1e-13);
        assert!(s.i1.value >= i1_lower_bound(4, 64, 774.0));
    }

    #[test]
    fn consistency_at_4_2() {
        // d(10) - d(9) = 6 - 5 = 1 and I at the matched mu = 35 is
        // positive.
        let c = coefficient_difference_consistency(4, 2, 10, &spec()).unwrap();
        assert_eq!(c.mu, 35.0);
        assert!((c.difference - 1.0).abs() < 1e-4);
        assert!(c.integral > 0.0);
        assert!(c.signs_agree);
    }

    #[test]
    fn identity_closed_forms() {
        // Single term: sum = sin^2(1).
        assert!((sin_sq_closed(1, 1.0).unwrap() - 1f64.sin().powi(2)).abs() < 1e-14);
        // x = pi/7, n = 5 and a quartic case at x = 0.3, n = 50.
        assert!((sin_sq_closed(5, PI / 7.0).unwrap() - sin_sq_direct(5, PI / 7.0)).abs() < 1e-12);
        assert!(
            (sin_quartic_closed(50, 0.3).unwrap() - sin_quartic_direct(50, 0.3)).abs() < 1e-12
        );
        assert!(matches!(
            sin_sq_closed(3, PI),
            Err(Error::SampleOutOfDomain(_))
        ));
        assert!(matches!(
            sin_quartic_closed(3, PI / 2.0),
            Err(Error::SampleOutOfDomain(_))
        ));
    }

    #[test]
    fn identity_sampling_passes() {
        let audit = check_identities(40, 5, 7).unwrap();
        assert!(audit.passed, "max errors {} / {}", audit.max_error_quadratic, audit.max_error_quartic);
        assert_eq!(audit.samples, 200);
    }

    #[test]
    fn gamma_and_growth_constants() {
        assert!((gamma() - 0.61562647038601426215).abs() < 1e-15);
        assert!((c_of_m(4, 64) - 11.080454557170855).abs() < 1e-12);
        assert!((c_of_m(4, 70) - 10.973517059237508).abs() < 1e-12);
        assert!((c_cap(4) - 16.64).abs() < 1e-12);
        assert!(c_of_m(4, 64) <= c_cap(4));
    }

    #[test]
    fn envelope_reference_value() {
        let e = upper_envelope(4, 64, 0.2).unwrap();
        assert!((e / 5.95716125104e-30 - 1.0).abs() < 1e-10, "{e}");
        for theta in [0.2, 0.7, 1.2, 1.5] {
            let log_e = envelope_exponent(4, 64, theta).unwrap();
            let d = direct_exponent(4, 64, theta);
            assert!((log_e - d).abs() < 1e-9, "theta {theta}: {log_e} vs {d}");
            let p = cos_product_parts(4, 64, theta);
            assert!(p.log_magnitude <= log_e + 1e-9);
            assert!(log_e.exp() <= envelope_bound(64));
        }
        assert!((envelope_bound(64) / 2.0553292e-11 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn envelope_pole_rejection() {
        // pi/8 is a pole of the k = 4 closed form.
        assert!(matches!(
            upper_envelope(4, 3, PI / 8.0),
            Err(Error::SampleOutOfDomain(_))
        ));
        // Slightly off the pole both forms exist and agree.
        let theta = PI / 8.0 + 1e-4;
        let log_e = envelope_exponent(4, 3, theta).unwrap();
        assert!((log_e - direct_exponent(4, 3, theta)).abs() < 1e-9);
    }

    #[test]
    fn envelope_check_passes_at_64() {
        let env = check_envelope(4, 64, 50).unwrap();
        assert!(env.envelope_below_bound);
        assert!(env.product_below_envelope);
        assert!(env.closed_matches_direct, "gap {}", env.max_closed_direct_gap);
    }

    #[test]
    fn bound_audit_small_sample() {
        let audit = run_bound_audit(4, 64, 2, 20, &spec()).unwrap();
        assert!(audit.all_passed);
        assert_eq!(audit.rows.len(), 2);
        assert_eq!(audit.rows[1].mu, 774.0);
        assert!(audit.rows[1].positive_with_margin);
        assert_eq!(audit.evidence, "numerical spot-check");
        // Below the threshold the audit refuses to claim anything.
        assert!(matches!(
            run_bound_audit(4, 63, 2, 10, &spec()),
            Err(Error::SampleOutOfDomain(_))
        ));
    }

    #[test]
    fn constants_audit_small_sample() {
        let audit = check_constants(&[4, 5, 6], 3, 12, &spec()).unwrap();
        assert!(audit.all_passed);
        assert!(audit.gamma_ok);
        assert_eq!(audit.monotone_rows.len(), 3);
        // Only k = 4 stays under the quadrature size cutoff here.
        assert_eq!(audit.quadrature_rows.len(), 1);
        assert!(matches!(
            check_constants(&[3], 2, 5, &spec()),
            Err(Error::SampleOutOfDomain(_))
        ));
    }

    #[test]
    fn peak_monotonicity() {
        for k in 4..16 {
            assert!(mid_ratio_peak(k + 1) < mid_ratio_peak(k));
            assert!(tail_ratio_peak(k + 1) < tail_ratio_peak(k));
        }
        for m in [64u32, 70, 80, 100] {
            assert!(mid_ratio_envelope(4, m + 4) < mid_ratio_envelope(4, m));
            assert!(tail_ratio_envelope(4, m + 4) < tail_ratio_envelope(4, m));
        }
    }
}
