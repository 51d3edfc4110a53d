//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! [`Scalar`] covers the field operations needed by matrix construction,
//! elimination, polynomial arithmetic and the simplex method. It is
//! implemented for `f32`, `f64` and [`BigRational`]; for the rational type
//! every tolerance collapses to zero, which turns rank decisions, the
//! simplex and the Kirchhoff column sums into exact computations.
//!
//! [`Real`] adds the transcendental operations (`ln`, `exp`, `powf`) needed
//! by rate evaluation, Lyapunov functions and integration.

use std::fmt::{Debug, Display};
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// The threshold standing for the floating-point tolerance `v`.
    /// Exact types return zero.
    fn tol(v: f64) -> Self;

    /// True when arithmetic is exact (no rounding).
    fn is_exact() -> bool;

    fn magnitude(&self) -> Self;

    /// Parses a decimal literal (`12`, `0.008`, `1e-3`) or a ratio `p/q`.
    fn from_decimal_str(s: &str) -> Option<Self>;

    /// Text that [`Scalar::from_decimal_str`] maps back to the same value.
    fn to_decimal_string(&self) -> String;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("small integer")
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    /// `|self| <= threshold`.
    fn is_within(&self, threshold: &Self) -> bool {
        self.magnitude() <= *threshold
    }

    /// True if the value is an integer; used for stoichiometric exponents.
    fn as_integer(&self) -> Option<i64> {
        let v = self.to_f64()?;
        let r = v.round();
        if Self::from_f64(r)? == *self {
            Some(r as i64)
        } else {
            None
        }
    }
}

/// Floating-point scalars.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn tol(v: f64) -> Self {
                v as $t
            }

            fn is_exact() -> bool {
                false
            }

            fn magnitude(&self) -> Self {
                <$t>::abs(*self)
            }

            fn from_decimal_str(s: &str) -> Option<Self> {
                let s = s.trim();
                if let Some((p, q)) = s.split_once('/') {
                    let p = p.trim().parse::<f64>().ok()?;
                    let q = q.trim().parse::<f64>().ok()?;
                    if q == 0.0 {
                        return None;
                    }
                    return Some((p / q) as $t);
                }
                let v = <$t as FromStr>::from_str(s).ok()?;
                v.is_finite().then_some(v)
            }

            fn to_decimal_string(&self) -> String {
                // Display gives the shortest string that parses back exactly.
                format!("{}", self)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn tol(_v: f64) -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }

    fn from_decimal_str(s: &str) -> Option<Self> {
        parse_rational(s.trim())
    }

    fn to_decimal_string(&self) -> String {
        rational_to_string(self)
    }

    fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }
}

/// Exact parse of a decimal literal with optional exponent, or `p/q`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p.trim())?;
        let q = parse_rational(q.trim())?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Finite decimal when the denominator has only factors 2 and 5, `p/q` otherwise.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut d = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10u32), places));
    let digits = scaled.to_integer();
    let negative = digits.is_negative();
    let mut text = digits.abs().to_string();
    if text.len() <= places {
        text = format!("{}{}", "0".repeat(places + 1 - text.len()), text);
    }
    let split = text.len() - places;
    let out = format!("{}.{}", &text[..split], &text[split..]);
    if negative {
        format!("-{out}")
    } else {
        out
    }
}

pub(crate) fn max_abs<T: Scalar>(values: &[T]) -> T {
    values
        .iter()
        .fold(T::zero(), |acc, v| T::max_of(acc, v.magnitude()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn decimal_literals_parse_exactly() {
        assert_eq!(q("0.008"), BigRational::new(8.into(), 1000.into()));
        assert_eq!(q("1e-3"), BigRational::new(1.into(), 1000.into()));
        assert_eq!(q("-98"), BigRational::from_integer((-98).into()));
        assert_eq!(q("2/6"), BigRational::new(1.into(), 3.into()));
        assert_eq!(q(".5"), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("1.2.3").is_none());
        assert!(parse_rational("x").is_none());
        assert!(parse_rational("").is_none());
    }

    #[test]
    fn rational_printing_round_trips() {
        for s in ["0.008", "-98", "12.5", "1/3", "0.02", "-0.0625"] {
            let r = q(s);
            assert_eq!(q(&rational_to_string(&r)), r, "{s}");
        }
        assert_eq!(rational_to_string(&q("0.0100")), "0.01");
        assert_eq!(rational_to_string(&q("-1/8")), "-0.125");
    }

    #[test]
    fn float_printing_round_trips() {
        for v in [0.008f64, 1.0 / 3.0, -98.0, 1e-300, 6.02e23] {
            let s = v.to_decimal_string();
            assert_eq!(f64::from_decimal_str(&s), Some(v));
        }
    }

    #[test]
    fn integer_detection() {
        assert_eq!(2.0f64.as_integer(), Some(2));
        assert_eq!(2.5f64.as_integer(), None);
        assert_eq!(q("4/2").as_integer(), Some(2));
        assert_eq!(q("1/2").as_integer(), None);
    }
}
