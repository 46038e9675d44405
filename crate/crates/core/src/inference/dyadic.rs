use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The number `mantissa · 2^exponent`, kept with an odd mantissa (or zero
/// mantissa and exponent).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: i64,
}

impl DyadicRational {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        DyadicRational {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        DyadicRational {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::new(BigInt::one(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Self::new(BigInt::one(), e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// `r` cut to `bits` fractional binary digits, rounding toward zero.
    pub fn truncate(r: &BigRational, bits: u32) -> Self {
        let scaled = r.numer() << bits as usize;
        // `/` on BigInt rounds toward zero
        Self::new(scaled / r.denom(), -(bits as i64))
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as usize,
            )
        }
    }

    /// Nearest `f64`, for display only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (&self.mantissa >> shift as usize)
            .to_string()
            .parse::<f64>()
            .unwrap_or(f64::NAN);
        let e = self.exponent + shift;
        let e = e.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        top * 2f64.powi(e)
    }

    /// `-log2(self)` rounded up, for positive values.
    pub fn ceil_log2_recip(&self) -> Option<i64> {
        if !self.mantissa.is_positive() {
            return None;
        }
        Some(-self.exponent - (self.mantissa.bits() as i64 - 1))
    }

    /// Decimal expansion with `digits` digits after the point, rounded toward zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let r = self.to_rational();
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = (r.numer() * &scale) / r.denom();
        let neg = scaled.is_negative() || (scaled.is_zero() && self.is_negative());
        let (int, frac) = scaled.abs().div_rem(&scale);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{int}");
        }
        format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            write!(f, "{}", &self.mantissa << self.exponent as usize)
        } else {
            write!(f, "{}*2^{}", self.mantissa, self.exponent)
        }
    }
}

fn align(a: &DyadicRational, b: &DyadicRational) -> (BigInt, BigInt, i64) {
    let e = a.exponent.min(b.exponent);
    (
        &a.mantissa << (a.exponent - e) as usize,
        &b.mantissa << (b.exponent - e) as usize,
        e,
    )
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = align(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: Self) -> DyadicRational {
        let (a, b, e) = align(self, rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: Self) -> DyadicRational {
        let (a, b, e) = align(self, rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: Self) -> DyadicRational {
        DyadicRational::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicJson {
    mantissa: String,
    exponent: i64,
}

impl Serialize for DyadicRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DyadicJson {
            mantissa: self.mantissa.to_string(),
            exponent: self.exponent,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DyadicJson::deserialize(d)?;
        let m = parse_mantissa(&j.mantissa).map_err(serde::de::Error::custom)?;
        Ok(DyadicRational::new(m, j.exponent))
    }
}

fn parse_mantissa(s: &str) -> Result<BigInt> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("`{s}` is not an integer mantissa")))
}

/// Non-negative fixed-point value `m / 2^bits` as a dyadic.
pub(crate) fn from_fixed(m: BigInt, bits: u32) -> DyadicRational {
    debug_assert!(m.sign() != Sign::Minus);
    DyadicRational::new(m, -(bits as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_form() {
        let x = DyadicRational::new(BigInt::from(12), -4);
        assert_eq!(x.mantissa(), &BigInt::from(3));
        assert_eq!(x.exponent(), -2);
        assert_eq!(
            DyadicRational::new(BigInt::zero(), 7),
            DyadicRational::zero()
        );
    }

    #[test]
    fn truncation_rounds_toward_zero() {
        // 1/3 = 0.0101 0101… in binary
        assert_eq!(
            DyadicRational::truncate(&q(1, 3), 4).to_rational(),
            q(5, 16)
        );
        assert_eq!(
            DyadicRational::truncate(&q(-1, 3), 4).to_rational(),
            q(-5, 16)
        );
        assert_eq!(
            DyadicRational::truncate(&q(3, 8), 10).to_rational(),
            q(3, 8)
        );
    }

    #[test]
    fn arithmetic_matches_rationals() {
        let a = DyadicRational::new(BigInt::from(3), -3);
        let b = DyadicRational::new(BigInt::from(5), 1);
        assert_eq!((&a + &b).to_rational(), q(83, 8));
        assert_eq!((&a - &b).to_rational(), q(-77, 8));
        assert_eq!((&a * &b).to_rational(), q(15, 4));
        assert!(a < b);
    }

    #[test]
    fn decimal_and_log() {
        let x = DyadicRational::new(BigInt::from(3), -2);
        assert_eq!(x.to_decimal(3), "0.750");
        assert_eq!((-&x).to_decimal(1), "-0.7");
        assert_eq!(DyadicRational::pow2(-5).ceil_log2_recip(), Some(5));
        // 3/16: 1/x = 5.33…, log2 = 2.41…, ceil = 3
        assert_eq!(
            DyadicRational::new(BigInt::from(3), -4).ceil_log2_recip(),
            Some(3)
        );
        assert!((x.to_f64() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let x = DyadicRational::new(BigInt::from(-7), -9);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"mantissa":"-7","exponent":-9}"#);
        let y: DyadicRational = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
