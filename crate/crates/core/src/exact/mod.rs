//! Exact number types shared by every layer: rationals, sums of rational
//! powers of `p`, and cyclotomic combinations of additive-character values.

mod cyclo;
mod power;

pub use cyclo::Cyclo;
pub use power::PowerSum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `base^exp` for a possibly negative exponent.
pub fn rat_pow(base: &Rat, exp: i64) -> Rat {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n - d).clamp(-1000, 1000);
        let scaled = if shift > 0 {
            x / Rat::from_integer(BigInt::one() << shift as usize)
        } else {
            x * Rat::from_integer(BigInt::one() << (-shift) as usize)
        };
        scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
    })
}

/// Formats a rational as `num/den`, or just `num` for integers.
pub fn fmt_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRatError(pub String);

/// Parses `"n"`, `"n/d"` or `"-n/d"`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = || ParseRatError(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rat::new(n, d))
}

/// Floor of a rational as an `i64`.
pub fn floor_i64(x: &Rat) -> i64 {
    x.floor().to_integer().to_i64().expect("exponent out of range")
}

pub fn is_positive(x: &Rat) -> bool {
    x.is_positive()
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod ratstr {
    use super::{fmt_rat, parse_rat, Rat};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            S(String),
            I(i64),
        }
        match Repr::deserialize(d)? {
            Repr::S(s) => parse_rat(&s).map_err(D::Error::custom),
            Repr::I(i) => Ok(super::int(i)),
        }
    }

    /// Optional rational, `null` when absent.
    pub mod option {
        use super::super::{fmt_rat, Rat};
        use serde::Serializer;

        pub fn serialize<S: Serializer>(x: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(r) => s.serialize_some(&fmt_rat(r)),
                None => s.serialize_none(),
            }
        }
    }

    /// Sequences of rationals.
    pub mod vec {
        use super::super::{fmt_rat, Rat};
        use serde::ser::{SerializeSeq, Serializer};

        pub fn serialize<S: Serializer>(x: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(x.len()))?;
            for r in x {
                seq.serialize_element(&fmt_rat(r))?;
            }
            seq.end()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("8/9").unwrap(), rat(8, 9));
        assert_eq!(parse_rat("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(fmt_rat(&rat(15, 26)), "15/26");
        assert_eq!(fmt_rat(&int(-7)), "-7");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn huge_rationals_convert() {
        let big = rat_pow(&int(3), 900);
        let x = rat_to_f64(&(big.clone() / (big * int(2))));
        assert!((x - 0.5).abs() < 1e-15);
    }
}
