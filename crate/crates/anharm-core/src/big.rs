//! Working-precision plumbing around `rug::Float`.
//!
//! All arithmetic in one computation runs at a single uniform decimal
//! precision `P >= 16`. Internally values carry `bits_for_digits(P)` bits;
//! results are always constructed with an explicit precision so that the
//! uniform-precision invariant cannot drift.

use rug::float::ParseFloatError;
use rug::{Float, Rational};

use crate::error::SolverError;

/// A real number at run-time-configurable precision.
pub type BigReal = Float;

/// Minimum supported working precision in decimal digits.
pub const MIN_DIGITS: u32 = 16;

const LOG2_10: f64 = 3.321928094887362;
const LOG10_2: f64 = 0.30102999566398114;

/// Binary precision backing `digits` decimal digits, with guard bits.
pub fn bits_for_digits(digits: u32) -> u32 {
    let digits = digits.max(MIN_DIGITS);
    (digits as f64 * LOG2_10).ceil() as u32 + 16
}

/// Decimal digits faithfully carried by a `bits`-bit float.
pub fn digits_for_bits(bits: u32) -> u32 {
    ((bits as f64) * LOG10_2).floor() as u32
}

/// New value at `prec` bits from anything rug accepts.
pub fn big<T>(prec: u32, value: T) -> BigReal
where
    Float: rug::Assign<T>,
{
    Float::with_val(prec, value)
}

/// Parse a decimal (`-0.25`, `1e-3`) or rational (`1/2000`) literal at `prec` bits.
pub fn parse_real(text: &str, prec: u32) -> Result<BigReal, SolverError> {
    let text = text.trim();
    if text.contains('/') {
        let rat: Rational = text
            .parse()
            .map_err(|_| SolverError::NumberSyntax(text.to_owned()))?;
        return Ok(Float::with_val(prec, &rat));
    }
    let incomplete =
        Float::parse(text).map_err(|_: ParseFloatError| SolverError::NumberSyntax(text.to_owned()))?;
    Ok(Float::with_val(prec, incomplete))
}

/// Decimal string that re-parses to the identical value at the same precision.
///
/// MPFR chooses enough digits for an exact round-trip when `digits = None`.
pub fn dec_string(value: &BigReal) -> String {
    if value.is_zero() {
        return "0".to_owned();
    }
    let s = value.to_string_radix(10, None);
    s
}

/// Decimal string truncated to `digits` significant digits.
pub fn dec_string_digits(value: &BigReal, digits: usize) -> String {
    value.to_string_radix(10, Some(digits.max(1)))
}

/// log10(|value|) as an f64 scale estimate; -inf for zero.
pub fn log10_abs(value: &BigReal) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, exp) = value.to_f64_exp();
    exp as f64 * LOG10_2 + m.abs().log10()
}

/// 10^k at `prec` bits.
pub fn ten_pow(prec: u32, k: i32) -> BigReal {
    Float::with_val(prec, 10).pow(k)
}

use rug::ops::Pow;

/// Exact conversion to a rational (every finite float is rational).
pub fn to_rational(value: &BigReal) -> Rational {
    value.to_rational().expect("finite float")
}
