//! Numeric modes.
//!
//! Every model is parameterised by one [`Number`] type, so a model and all
//! values derived from it always share a mode. [`Rational`] is the exact
//! mode (arbitrary precision, always in lowest terms); `f64` is the float
//! mode, where comparisons go through explicit tolerances.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseNumberError;

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Which arithmetic a model uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumericMode {
    Exact,
    Float,
}

impl NumericMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NumericMode::Exact => "exact",
            NumericMode::Float => "float",
        }
    }
}

impl Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NumericMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "rational" => Ok(NumericMode::Exact),
            "float" | "f64" => Ok(NumericMode::Float),
            other => Err(format!("unknown numeric mode `{other}` (expected exact|float)")),
        }
    }
}

/// Tolerances used by float mode. Exact mode ignores them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Target absolute error of iterative value computations.
    pub epsilon: f64,
    /// Slack for equality tests (Opt membership, tie detection).
    pub eta: f64,
    /// Slack for row-stochasticity checks.
    pub stochastic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            epsilon: 1e-10,
            eta: 1e-9,
            stochastic: 1e-12,
        }
    }
}

impl Tolerances {
    /// Checks that every slack is positive and finite and that `eta` covers
    /// the value error: computed values are within `epsilon` of the truth, so
    /// an optimal action can miss the Bellman equality by up to `2·epsilon`.
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("epsilon", self.epsilon), ("eta", self.eta), ("stochastic", self.stochastic)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.eta < 2.0 * self.epsilon {
            return Err(format!("eta ({}) must be at least twice epsilon ({})", self.eta, self.epsilon));
        }
        Ok(())
    }
}

/// Scalar field used for probabilities, values and rewards.
pub trait Number:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const MODE: NumericMode;

    fn from_rational(r: &Rational) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    fn to_f64(&self) -> f64;

    /// The exact value, if this mode carries one.
    fn to_rational(&self) -> Option<Rational>;

    /// Equality up to `tol` (exact mode: plain equality).
    fn near(&self, other: &Self, tol: f64) -> bool;

    /// Magnitude used to rank pivot candidates.
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Whether a value is treated as zero under `tol`.
    fn is_negligible(&self, tol: f64) -> bool {
        self.near(&Self::zero(), tol)
    }

    /// Strictly greater than `other` by more than `tol`.
    fn exceeds(&self, other: &Self, tol: f64) -> bool {
        !self.near(other, tol) && self > other
    }
}

impl Number for Rational {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn near(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

impl Number for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_rational(r: &Rational) -> Self {
        Number::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        None
    }

    fn near(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

/// Parses `"p/q"`, integers and decimals (`"0.125"`, `"-3"`, `"1e-3"`) exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseNumberError> {
    let s = text.trim();
    let err = || ParseNumberError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| err())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses a probability or reward literal into the requested mode.
pub fn parse_number<N: Number>(text: &str) -> Result<N, ParseNumberError> {
    parse_rational(text).map(|r| N::from_rational(&r))
}

/// Renders a rational as `"p"` or `"p/q"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A mode-tagged value as it appears in reports.
#[derive(Clone, Debug, PartialEq)]
pub enum NumericValue {
    Exact(Rational),
    Float(f64),
}

impl NumericValue {
    pub fn of<N: Number>(v: &N) -> Self {
        match v.to_rational() {
            Some(r) => NumericValue::Exact(r),
            None => NumericValue::Float(v.to_f64()),
        }
    }

    pub fn mode(&self) -> NumericMode {
        match self {
            NumericValue::Exact(_) => NumericMode::Exact,
            NumericValue::Float(_) => NumericMode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            NumericValue::Exact(r) => Number::to_f64(r),
            NumericValue::Float(f) => *f,
        }
    }

    /// Lossless textual form: `"p/q"` in exact mode, shortest round-trip
    /// decimal in float mode.
    pub fn render(&self) -> String {
        match self {
            NumericValue::Exact(r) => format_rational(r),
            NumericValue::Float(f) => format!("{f}"),
        }
    }
}

impl Display for NumericValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
