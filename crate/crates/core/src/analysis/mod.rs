//! Analytical frame-unavailability results.
//!
//! All bounds are built on the Janson-type tail inequality for sums of
//! dependent Bernoulli variables, where dependence enters only through the
//! chromatic number of a dependency graph.

mod bounds;
mod exact;
mod system;
mod union;

use serde::Serialize;

use crate::error::{invalid, Result};

pub use bounds::{fer_bound, ldb_asymptote, ldb_asymptote_value, ldb_fup, ldb_threshold};
pub use exact::{brute_force_fup, exact_fup, BruteForceOracle, MAX_ENUMERATED_BITS};
pub use system::{DecoderSpec, SystemConfig, SystemParams};
pub use union::{ub_fup, UnionBound, MAX_UNION_SERVERS};

/// `φ(x) = (1 + x) ln(1 + x) − x`.
pub fn phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid("x", format!("phi requires x >= 0, got {x}")));
    }
    if x < 1e-4 {
        // x²/2 − x³/6 + x⁴/12 − x⁵/20
        let x2 = x * x;
        return Ok(x2 * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 12.0 - x / 20.0))));
    }
    Ok((1.0 + x) * x.ln_1p() - x)
}

/// Janson tail bound `exp(−S/(b²χ) · φ(4bτ/(5S)))` on
/// `Pr[X ≤ E X − τ]` (and, symmetrically, the upper tail).
pub fn janson_lower_tail(s: f64, b: f64, chi: f64, tau: f64) -> Result<f64> {
    if !(s >= 0.0) || !(b >= 0.0) || !(tau >= 0.0) {
        return Err(invalid(
            "janson",
            format!("need S, b, tau >= 0 (S={s}, b={b}, tau={tau})"),
        ));
    }
    if !(chi >= 1.0) {
        return Err(invalid("chi", format!("chromatic number {chi} < 1")));
    }
    if tau == 0.0 {
        return Ok(1.0);
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if b == 0.0 {
        return Err(invalid("b", "must be positive when S > 0 and tau > 0"));
    }
    let exponent = s / (b * b * chi) * phi(4.0 * b * tau / (5.0 * s))?;
    Ok((-exponent).exp())
}

/// A bound that may be undefined at the requested point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: Option<f64>,
    pub reason: Option<String>,
}

impl BoundValue {
    pub fn applicable(value: f64) -> Self {
        Self {
            value: Some(value.clamp(0.0, 1.0)),
            reason: None,
        }
    }

    pub fn not_applicable(reason: impl Into<String>) -> Self {
        Self {
            value: None,
            reason: Some(reason.into()),
        }
    }

    pub fn is_applicable(&self) -> bool {
        self.value.is_some()
    }
}
