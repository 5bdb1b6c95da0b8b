//! Arithmetic on the extended nonnegative reals `[0, ∞]`.
//!
//! Values are plain `f64` with `f64::INFINITY` standing for `+∞`. The only
//! places where IEEE semantics disagree with the convention used throughout
//! the crate are `0 · ∞` (IEEE gives NaN, we need 0) and `∞ − ∞`; the helpers
//! here cover both.

/// `+∞`.
pub const INF: f64 = f64::INFINITY;

/// Product with the convention `0 · ∞ = 0`.
#[inline]
pub fn mul(weight: f64, value: f64) -> f64 {
    if weight == 0.0 {
        0.0
    } else {
        weight * value
    }
}

/// Distance between two extended values: `∞` vs `∞` is 0, `∞` vs finite is `∞`.
#[inline]
pub fn distance(a: f64, b: f64) -> f64 {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => 0.0,
        (false, false) => (a - b).abs(),
        _ => INF,
    }
}

/// `a ≤ b + tol`, with `∞ ≤ ∞` true.
#[inline]
pub fn le_tol(a: f64, b: f64, tol: f64) -> bool {
    if b.is_infinite() {
        true
    } else if a.is_infinite() {
        false
    } else {
        a <= b + tol
    }
}

/// Formats a value the way the text outputs do: `inf` for `+∞`.
pub fn display(value: f64) -> String {
    if value.is_infinite() {
        "inf".to_string()
    } else {
        format!("{value}")
    }
}
