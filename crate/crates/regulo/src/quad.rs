//! Adaptive Gauss-Kronrod quadrature for the oscillatory integrals in the
//! analytic audit.
//!
//! Each panel is evaluated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss rule gives the error estimate. The panel with the largest
//! estimate is bisected until the absolute tolerance is met or the
//! evaluation budget runs out. The integrands here oscillate like
//! cos(mu theta) with mu up to the bandwidth of the polynomial, so callers
//! seed the subdivision with roughly one panel per oscillation period.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Positive abscissae of the 15-point Kronrod rule on [-1, 1], descending;
/// the final entry is the center. Gauss points are the odd-index entries.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Weights of the embedded 7-point Gauss rule; WG[j] pairs with XGK[2j+1]
/// and WG[3] with the center node.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Absolute tolerance on the summed error estimate per integral.
    pub abs_tolerance: f64,
    /// Hard cap on integrand evaluations before giving up.
    pub max_evaluations: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tolerance: 1e-12,
            max_evaluations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Kronrod-with-embedded-Gauss evaluation over [a, b].
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[(j - 1) / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: half * kronrod,
        error: (half * (kronrod - gauss)).abs(),
    }
}

/// Integrates f over [a, b] to the spec's absolute tolerance, starting from
/// `initial_panels` equal subdivisions (use about one per oscillation
/// period for wavy integrands; anything >= 1 is safe for smooth ones).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    initial_panels: usize,
) -> Result<QuadratureResult> {
    if !(a < b) {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            panels: 0,
        });
    }
    let initial = initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(initial + 64);
    let mut evaluations = 0u64;
    let width = (b - a) / initial as f64;
    for i in 0..initial {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == initial { b } else { lo + width };
        heap.push(gk15(&f, lo, hi));
        evaluations += 15;
    }
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();

    while total_error > spec.abs_tolerance {
        if evaluations + 30 > spec.max_evaluations {
            return Err(Error::QuadratureDidNotConverge {
                error_estimate: total_error,
                tolerance: spec.abs_tolerance,
                evaluations,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // The panel collapsed to machine resolution; its estimate is
            // as good as it gets.
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evaluations += 30;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let panels = heap.len();
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    for p in heap {
        value += p.value;
        error_estimate += p.error;
    }
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
        panels,
    })
}
