//! Exact arithmetic: arbitrary-precision rationals and the quadratic field
//! ℚ(√5), which is where the uniform-capacity expansion factor `2+√5` lives.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn from_u64(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Canonical `p/q` rendering (always with a slash, `q > 0`, reduced).
pub fn fmt_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses the canonical `p/q` form used by the file formats. Anything that
/// is not reduced, has a non-positive denominator or lacks the slash is
/// rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let (p, q) =
        text.split_once('/').ok_or_else(|| Error::Parse(format!("rational `{text}` is not of the form p/q")))?;
    let numer = parse_bigint(p, text)?;
    let denom = parse_bigint(q, text)?;
    if !denom.is_positive() {
        return Err(Error::Parse(format!("rational `{text}` has non-positive denominator")));
    }
    if !numer.gcd(&denom).is_one() {
        return Err(Error::Parse(format!("rational `{text}` is not reduced")));
    }
    Ok(Rational::new_raw(numer, denom))
}

/// Lenient parser for command-line values: accepts `p`, `p/q` and
/// non-reduced fractions.
pub fn parse_rational_lenient(text: &str) -> Result<Rational> {
    match text.split_once('/') {
        Some((p, q)) => {
            let denom = parse_bigint(q, text)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!("rational `{text}` has zero denominator")));
            }
            Ok(Rational::new(parse_bigint(p, text)?, denom))
        }
        None => Ok(Rational::from_integer(parse_bigint(text, text)?)),
    }
}

fn parse_bigint(part: &str, whole: &str) -> Result<BigInt> {
    let digits = part.strip_prefix('-').unwrap_or(part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed rational `{whole}`")));
    }
    part.parse::<BigInt>().map_err(|_| Error::Parse(format!("malformed rational `{whole}`")))
}

/// An element `a + b√5` of ℚ(√5) with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    pub rational: Rational,
    pub surd: Rational,
}

impl Quadratic {
    pub fn new(rational: Rational, surd: Rational) -> Self {
        Quadratic { rational, surd }
    }

    pub fn from_rational(value: Rational) -> Self {
        Quadratic::new(value, Rational::zero())
    }

    pub fn from_int(value: i64) -> Self {
        Quadratic::from_rational(int(value))
    }

    /// The golden ratio `(1+√5)/2`.
    pub fn golden() -> Self {
        Quadratic::new(rat(1, 2), rat(1, 2))
    }

    /// `2+√5 = 1 + 2·golden = 3 + 2/golden`, the uniform-case expansion.
    pub fn two_plus_sqrt5() -> Self {
        Quadratic::new(int(2), int(1))
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.rational)
    }

    pub fn signum(&self) -> Ordering {
        let a = self.rational.cmp(&Rational::zero());
        let b = self.surd.cmp(&Rational::zero());
        match (a, b) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            // Opposite signs: compare a² against 5b².
            (sa, _) => {
                let a2 = &self.rational * &self.rational;
                let b2 = &self.surd * &self.surd * int(5);
                match a2.cmp(&b2) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                }
            }
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Quadratic::new(&self.rational * factor, &self.surd * factor)
    }

    pub fn recip(&self) -> Option<Self> {
        let norm = &self.rational * &self.rational - &self.surd * &self.surd * int(5);
        if norm.is_zero() {
            return None;
        }
        Some(Quadratic::new(&self.rational / &norm, -&self.surd / &norm))
    }

    /// Exact test `lhs ≤ self · rhs` for rationals `lhs` and `rhs`.
    pub fn bounds(&self, lhs: &Rational, rhs: &Rational) -> bool {
        (self.scale(rhs) - Quadratic::from_rational(lhs.clone())).signum() != Ordering::Less
    }

    /// Decimal approximation, for human-facing output only.
    pub fn approx(&self) -> f64 {
        to_f64(&self.rational) + to_f64(&self.surd) * 5f64.sqrt()
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

impl Ord for Quadratic {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }
}

impl PartialOrd for Quadratic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Quadratic {
    type Output = Quadratic;
    fn add(self, rhs: Quadratic) -> Quadratic {
        Quadratic::new(self.rational + rhs.rational, self.surd + rhs.surd)
    }
}

impl Sub for Quadratic {
    type Output = Quadratic;
    fn sub(self, rhs: Quadratic) -> Quadratic {
        Quadratic::new(self.rational - rhs.rational, self.surd - rhs.surd)
    }
}

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Quadratic {
        Quadratic::new(-self.rational, -self.surd)
    }
}

impl Mul for Quadratic {
    type Output = Quadratic;
    fn mul(self, rhs: Quadratic) -> Quadratic {
        let five = int(5);
        Quadratic::new(
            &self.rational * &rhs.rational + &self.surd * &rhs.surd * five,
            &self.rational * &rhs.surd + &self.surd * &rhs.rational,
        )
    }
}

impl From<Rational> for Quadratic {
    fn from(value: Rational) -> Self {
        Quadratic::from_rational(value)
    }
}

impl fmt::Display for Quadratic {
    /// `p/q` for rationals, `2+sqrt5` for the uniform expansion constant and
    /// `p/q+r/s*sqrt5` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return f.write_str(&fmt_rational(&self.rational));
        }
        if *self == Quadratic::two_plus_sqrt5() {
            return f.write_str("2+sqrt5");
        }
        let sign = if self.surd.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}*sqrt5", fmt_rational(&self.rational), sign, fmt_rational(&self.surd.abs()))
    }
}

impl FromStr for Quadratic {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        if text == "2+sqrt5" {
            return Ok(Quadratic::two_plus_sqrt5());
        }
        let Some(body) = text.strip_suffix("*sqrt5") else {
            return Ok(Quadratic::from_rational(parse_rational(text)?));
        };
        // Split at the sign separating the two coordinates (skip a leading '-').
        let split = body
            .char_indices()
            .skip(1)
            .find(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Parse(format!("malformed quadratic `{text}`")))?;
        let rational = parse_rational(&body[..split])?;
        let mut surd = parse_rational(&body[split + 1..])?;
        if body.as_bytes()[split] == b'-' {
            surd = -surd;
        }
        Ok(Quadratic::new(rational, surd))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_rational_round_trip() {
        for text in ["0/1", "-3/7", "5/1", "1059/250"] {
            assert_eq!(fmt_rational(&parse_rational(text).unwrap()), text);
        }
    }

    #[test]
    fn non_canonical_rationals_rejected() {
        for text in ["2/4", "1/0", "1/-2", "3", "1/ 2", "+1/2", "a/b", ""] {
            assert!(parse_rational(text).is_err(), "{text} accepted");
        }
    }

    #[test]
    fn lenient_accepts_integers_and_unreduced() {
        assert_eq!(parse_rational_lenient("2/120").unwrap(), rat(1, 60));
        assert_eq!(parse_rational_lenient("7").unwrap(), int(7));
        assert!(parse_rational_lenient("1/0").is_err());
    }

    #[test]
    fn golden_identities() {
        let c = Quadratic::golden();
        // 1 + 2c = 3 + 2/c = 2 + √5.
        let one_plus_2c = Quadratic::from_int(1) + c.scale(&int(2));
        let three_plus = Quadratic::from_int(3) + c.recip().unwrap().scale(&int(2));
        assert_eq!(one_plus_2c, Quadratic::two_plus_sqrt5());
        assert_eq!(three_plus, Quadratic::two_plus_sqrt5());
        // c² = c + 1.
        assert_eq!(c.clone() * c.clone(), c + Quadratic::from_int(1));
    }

    #[test]
    fn ordering_around_two_plus_sqrt5() {
        let beta = Quadratic::two_plus_sqrt5();
        assert!(Quadratic::from_rational(rat(4236, 1000)) < beta);
        assert!(Quadratic::from_rational(rat(4237, 1000)) > beta);
        assert!(Quadratic::from_rational(rat(424, 100)) > beta);
        assert!(Quadratic::from_int(3) < beta);
        let shaved = beta.clone() - Quadratic::from_rational(rat(1, 1000));
        assert!(Quadratic::from_rational(rat(1059, 250)) > shaved);
    }

    #[test]
    fn bounds_is_exact() {
        let beta = Quadratic::two_plus_sqrt5();
        // 3 ≤ (2+√5)·1 and 4.236 ≤ (2+√5)·1 but not 4.2361.
        assert!(beta.bounds(&int(3), &int(1)));
        assert!(beta.bounds(&rat(1059, 250), &int(1)));
        assert!(!beta.bounds(&rat(42361, 10000), &int(1)));
        assert!(Quadratic::from_int(5).bounds(&int(10), &int(2)));
        assert!(!Quadratic::from_int(5).bounds(&rat(101, 10), &int(2)));
    }

    #[test]
    fn quadratic_text_round_trip() {
        let values = [
            Quadratic::two_plus_sqrt5(),
            Quadratic::from_int(5),
            Quadratic::new(rat(1, 2), rat(-3, 4)),
            Quadratic::new(rat(-1, 2), rat(1, 2)),
        ];
        for v in values {
            let text = v.to_string();
            assert_eq!(text.parse::<Quadratic>().unwrap(), v, "{text}");
        }
        assert_eq!(Quadratic::two_plus_sqrt5().to_string(), "2+sqrt5");
    }
}
