//! Exact rationals extended with `+inf` and `-inf`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("0/0 is not a rational")]
    ZeroOverZero,
    #[error("cannot parse rational literal {0:?}")]
    Parse(String),
    #[error("mediant of {0} and {1} is not a boundary mediant (requires lower < upper)")]
    UndefinedMediant(Rational, Rational),
    #[error("{0} is not finite")]
    NotFinite(Rational),
}

/// An irreducible fraction `num/den` with `den >= 0`.
///
/// The infinities are stored as `1/0` and `-1/0`, zero as `0/1`. Every
/// constructor normalizes, so structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, RationalError> {
        let mut num = num.into();
        let mut den = den.into();
        if den.is_zero() {
            if num.is_zero() {
                return Err(RationalError::ZeroOverZero);
            }
            return Ok(if num.is_positive() {
                Self::infinity()
            } else {
                Self::neg_infinity()
            });
        }
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if !g.is_one() {
            num /= &g;
            den /= &g;
        }
        Ok(Rational { num, den })
    }

    /// Builds a fraction that is already known to be irreducible with a
    /// non-negative denominator (e.g. a Stern-Brocot mediant). Not checked:
    /// a gcd per tree step would dominate deep walks.
    pub(crate) fn from_coprime(num: BigInt, den: BigInt) -> Self {
        debug_assert!(!den.is_negative());
        if den.is_zero() {
            debug_assert!(num.abs().is_one());
        }
        Rational { num, den }
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational {
            num: n.into(),
            den: BigInt::one(),
        }
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn infinity() -> Self {
        Rational {
            num: BigInt::one(),
            den: BigInt::zero(),
        }
    }

    pub fn neg_infinity() -> Self {
        Rational {
            num: -BigInt::one(),
            den: BigInt::zero(),
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_finite(&self) -> bool {
        !self.den.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn sign(&self) -> Sign {
        self.num.sign()
    }

    pub fn abs(&self) -> Self {
        Rational {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn require_finite(&self) -> Result<&Self, RationalError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(RationalError::NotFinite(self.clone()))
        }
    }

    /// Number of bits of the fraction: `bitlen(|num|) + bitlen(den)`, and 1
    /// for zero. `bitlen(0)` is taken to be 1, so both infinities weigh 2.
    pub fn bit_size(&self) -> u64 {
        if self.num.is_zero() {
            return 1;
        }
        bitlen(self.num.magnitude()) + bitlen(self.den.magnitude())
    }
}

/// Number of binary digits of `x`, with `bitlen(0) = 1`.
pub fn bitlen(x: &BigUint) -> u64 {
    x.bits().max(1)
}

/// The mediant `(p.num + q.num) / (p.den + q.den)`, reduced.
///
/// The pair of opposite infinities has the tree root `0/1` as its mediant.
pub fn mediant(p: &Rational, q: &Rational) -> Rational {
    if !p.is_finite() && !q.is_finite() && p != q {
        return Rational::zero();
    }
    Rational::new(&p.num + &q.num, &p.den + &q.den).expect("denominator sum of a mediant is never 0/0")
}

/// Mediant of an ordered boundary pair `lower < upper`.
pub fn boundary_mediant(lower: &Rational, upper: &Rational) -> Result<Rational, RationalError> {
    if lower >= upper {
        return Err(RationalError::UndefinedMediant(lower.clone(), upper.clone()));
    }
    Ok(mediant(lower, upper))
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_finite(), other.is_finite()) {
            (true, true) => (&self.num * &other.den).cmp(&(&other.num * &self.den)),
            // infinities are +-1/0, so the numerator sign orders them
            (false, false) => self.num.cmp(&other.num),
            (false, true) => {
                if self.num.is_positive() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (true, false) => other.cmp(self).reverse(),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_finite() {
            return f.write_str(if self.num.is_positive() { "inf" } else { "-inf" });
        }
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `a/b`, a bare integer `a`, and `inf` / `+inf` / `-inf`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || RationalError::Parse(s.to_string());
        match t {
            "inf" | "+inf" => return Ok(Rational::infinity()),
            "-inf" => return Ok(Rational::neg_infinity()),
            _ => {}
        }
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = n.parse().map_err(|_| err())?;
        let den: BigInt = d.parse().map_err(|_| err())?;
        if den.is_negative() {
            return Err(err());
        }
        Rational::new(num, den).map_err(|_| err())
    }
}

#[derive(Serialize, Deserialize)]
struct RationalJson {
    num: String,
    den: String,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RationalJson {
            num: self.num.to_string(),
            den: self.den.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RationalJson::deserialize(deserializer)?;
        let num: BigInt = raw.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = raw.den.parse().map_err(D::Error::custom)?;
        if den.is_negative() {
            return Err(D::Error::custom("negative denominator"));
        }
        Rational::new(num, den).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn normalizes() {
        assert_eq!(Rational::new(4, -6).unwrap(), r("-2/3"));
        assert_eq!(Rational::new(0, 7).unwrap(), Rational::zero());
        assert_eq!(Rational::new(-5, 0).unwrap(), Rational::neg_infinity());
        assert_eq!(Rational::new(0, 0), Err(RationalError::ZeroOverZero));
    }

    #[test]
    fn total_order_with_infinities() {
        let mut v = vec![r("inf"), r("3/2"), r("-inf"), r("-2/3"), r("0"), r("1/2")];
        v.sort();
        assert_eq!(v, vec![r("-inf"), r("-2/3"), r("0"), r("1/2"), r("3/2"), r("inf")]);
    }

    #[test]
    fn mediant_examples() {
        assert_eq!(mediant(&r("-inf"), &r("inf")), r("0/1"));
        assert_eq!(mediant(&r("0/1"), &r("inf")), r("1/1"));
        assert_eq!(mediant(&r("1/2"), &r("2/3")), r("3/5"));
        assert_eq!(mediant(&r("inf"), &r("inf")), r("inf"));
        assert!(boundary_mediant(&r("inf"), &r("-inf")).is_err());
        assert!(boundary_mediant(&r("1/2"), &r("1/2")).is_err());
        assert_eq!(boundary_mediant(&r("-inf"), &r("inf")).unwrap(), r("0"));
    }

    #[test]
    fn bit_sizes() {
        assert_eq!(r("0/1").bit_size(), 1);
        assert_eq!(r("1/1").bit_size(), 2);
        assert_eq!(r("23/108").bit_size(), 12);
        assert_eq!(r("inf").bit_size(), 2);
        assert_eq!(r("-inf").bit_size(), 2);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(r(" 7 ").to_string(), "7/1");
        assert_eq!(r("13/2").to_string(), "13/2");
        assert_eq!(r("-inf").to_string(), "-inf");
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("0/0".parse::<Rational>().is_err());
    }

    #[test]
    fn json_uses_decimal_strings() {
        let q = r("-23/108");
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"num":"-23","den":"108"}"#);
        let back: Rational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        let unreduced: Rational = serde_json::from_str(r#"{"num":"4","den":"6"}"#).unwrap();
        assert_eq!(unreduced, r("2/3"));
        assert!(serde_json::from_str::<Rational>(r#"{"num":"1","den":"-2"}"#).is_err());
    }
}
