//! Exact arithmetic of `Q_p` restricted to rational points.
//!
//! Elements are plain [`Rat`] values; the prime is carried by a [`Qp`]
//! context. Absolute values are exact powers of `p`, the additive character
//! is the standard one trivial on `Z_p`, and discs are closed balls with
//! radius an exact power of `p`.

mod character;
mod disc;
mod integrals;

pub use character::{CharacterPhase, ExactComplex};
pub use disc::{Disc, DiscDifference, DiscError};
pub use integrals::{
    ball_character_moment_integral, ball_moment, brute_ball_moment_integral, brute_sphere_decomposition,
    sphere_character_integral,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{int, rat_pow, Rat};

/// Rational point of the p-adic field. The prime lives in a [`Qp`] context.
pub type PAdicScalar = Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
}

/// The field `Q_p` (residue degree 1, uniformiser `π = p`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Qp {
    p: u32,
}

impl TryFrom<u32> for Qp {
    type Error = PadicError;
    fn try_from(p: u32) -> Result<Self, Self::Error> {
        Qp::new(p)
    }
}

impl From<Qp> for u32 {
    fn from(q: Qp) -> u32 {
        q.p
    }
}

impl Qp {
    /// Residue field degree `f`; every formula with `|π| = p^{-f}` uses it.
    pub const RESIDUE_DEGREE: u32 = 1;

    pub fn new(p: u32) -> Result<Self, PadicError> {
        let is_prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
        if is_prime {
            Ok(Self { p })
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn p_int(&self) -> BigInt {
        BigInt::from(self.p)
    }

    /// `p^k` as a rational.
    pub fn pow(&self, k: i64) -> Rat {
        rat_pow(&int(self.p as i64), k)
    }

    /// The uniformiser `π = p`.
    pub fn uniformiser(&self) -> Rat {
        int(self.p as i64)
    }

    /// `|π| = p^{-f}`.
    pub fn abs_uniformiser(&self) -> Rat {
        self.pow(-(Self::RESIDUE_DEGREE as i64))
    }

    /// Residue field size `p^f`.
    pub fn residue_size(&self) -> u32 {
        self.p.pow(Self::RESIDUE_DEGREE)
    }

    pub fn int_valuation(&self, n: &BigInt) -> Option<i64> {
        if n.is_zero() {
            return None;
        }
        let p = self.p_int();
        let mut n = n.abs();
        let mut v = 0;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                return Some(v);
            }
            n = q;
            v += 1;
        }
    }

    /// Exact valuation; `None` encodes `+∞` (the value at zero).
    pub fn valuation(&self, x: &Rat) -> Option<i64> {
        let vn = self.int_valuation(x.numer())?;
        let vd = self.int_valuation(x.denom()).expect("nonzero denominator");
        Some(vn - vd)
    }

    /// Exponent `k` with `|x| = p^k`; `None` at zero.
    pub fn abs_exp(&self, x: &Rat) -> Option<i64> {
        self.valuation(x).map(|v| -v)
    }

    /// `k` with `x = p^k` as a rational number, if `x` is such a power.
    pub fn log_exact(&self, x: &Rat) -> Option<i64> {
        let v = self.valuation(x)?;
        (self.pow(v) == *x).then_some(v)
    }

    /// `|x|_p = p^{-v(x)}`, and `0` at zero.
    pub fn abs(&self, x: &Rat) -> Rat {
        match self.valuation(x) {
            Some(v) => self.pow(-v),
            None => Rat::zero(),
        }
    }

    /// Additive character phase: the p-adic fractional part of `x`, so that
    /// `χ(x) = exp(2πi·phase)` and `x - phase ∈ Z_p`.
    pub fn character_phase(&self, x: &Rat) -> CharacterPhase {
        let Some(v) = self.valuation(x) else {
            return CharacterPhase::zero();
        };
        if v >= 0 {
            return CharacterPhase::zero();
        }
        let k = (-v) as usize;
        let modulus = num_traits::pow(self.p_int(), k);
        // x = a / (p^k b') with p ∤ b'; need n ≡ a b'^{-1} (mod p^k)
        let b_prime = x.denom() / &modulus;
        let inv = mod_inverse(&b_prime, &modulus);
        let n = (x.numer() * inv).mod_floor(&modulus);
        CharacterPhase::new(Rat::new(n, modulus))
    }

    /// Truncation of `x` modulo `p^{-t} Z_p`: the canonical representative
    /// of the disc of radius `p^t` around `x`.
    pub fn canonical_center(&self, x: &Rat, radius_exp: i64) -> Rat {
        let scaled = x * self.pow(radius_exp);
        self.character_phase(&scaled).value().clone() * self.pow(-radius_exp)
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    if m.is_one() {
        return BigInt::zero();
    }
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}
