//! Exact-arithmetic verification toolkit for the generating polynomials of
//! partitions into distinct parts not divisible by k, with all parts at
//! most km + k - 1.
//!
//! The product of (1 + q^e) over those admissible exponents e has
//! coefficients counting the partitions by weight. The polynomial is
//! symmetric of degree k(k-1)(m+1)^2/2, and this crate checks, with exact
//! big-integer arithmetic, where the coefficient sequence is unimodal:
//!
//! - [`poly`] builds the dense coefficient array by repeated binomial
//!   multiplication, a block of k - 1 factors per level of m.
//! - [`oracle`] counts and enumerates the partitions themselves, entirely
//!   independently of the polynomial arithmetic, as a cross-check.
//! - [`checker`] scans for symmetry, descents, and window conditions, and
//!   drives the per-family certification sweep with checkpoint/resume.
//! - [`quad`] and [`audit`] numerically exercise the analytic side: the
//!   Fourier-integral form of the coefficients, the split oscillatory
//!   integral behind the positivity argument, and its explicit constants.
//! - [`checkpoint`] and [`report`] handle the binary snapshot format and
//!   the JSON report envelope.

pub mod audit;
pub mod checker;
pub mod checkpoint;
pub mod error;
pub mod oracle;
pub mod params;
pub mod poly;
pub mod quad;
pub mod report;

pub use error::{Error, Result};
