use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SchottkyError;
use crate::exact::Rat;
use crate::padic::Qp;

/// `x ↦ (ax+b)/(cx+d)` with integer entries of content 1.
///
/// The sign is fixed so the first nonzero entry is positive; two matrices
/// define the same map iff they are equal after this normalisation.
///
/// Serialised as `[a, b, c, d]`; entries are JSON integers when they fit in
/// `i64` and decimal strings otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[IntRepr; 4]", into = "[IntRepr; 4]")]
pub struct MoebiusMap {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Num(i64),
    Str(String),
}

impl TryFrom<[IntRepr; 4]> for MoebiusMap {
    type Error = SchottkyError;
    fn try_from(m: [IntRepr; 4]) -> Result<Self, SchottkyError> {
        let mut out = Vec::with_capacity(4);
        for e in m {
            out.push(match e {
                IntRepr::Num(n) => BigInt::from(n),
                IntRepr::Str(s) => s.trim().parse().map_err(|_| SchottkyError::BadEntry(s))?,
            });
        }
        let [a, b, c, d]: [BigInt; 4] = out.try_into().unwrap();
        Self::new(a, b, c, d)
    }
}

impl From<MoebiusMap> for [IntRepr; 4] {
    fn from(m: MoebiusMap) -> Self {
        [m.a, m.b, m.c, m.d].map(|x| match i64::try_from(&x) {
            Ok(n) => IntRepr::Num(n),
            Err(_) => IntRepr::Str(x.to_string()),
        })
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl MoebiusMap {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self, SchottkyError> {
        if (&a * &d - &b * &c).is_zero() {
            return Err(SchottkyError::DegenerateMatrix);
        }
        let g = a.gcd(&b).gcd(&c).gcd(&d);
        let (mut a, mut b, mut c, mut d) = (a / &g, b / &g, c / &g, d / &g);
        let first = [&a, &b, &c, &d].into_iter().find(|x| !x.is_zero()).cloned().unwrap();
        if first.is_negative() {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        Ok(Self { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self, SchottkyError> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self { a: BigInt::one(), b: BigInt::zero(), c: BigInt::zero(), d: BigInt::one() }
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// `-d/c`, or `None` when the pole is `∞`.
    pub fn pole(&self) -> Option<Rat> {
        (!self.c.is_zero()).then(|| Rat::new(-self.d.clone(), self.c.clone()))
    }

    /// Image of `∞`: `a/c`, or `None` when it is `∞` itself.
    pub fn at_infinity(&self) -> Option<Rat> {
        (!self.c.is_zero()).then(|| Rat::new(self.a.clone(), self.c.clone()))
    }

    fn denom_at(&self, x: &Rat) -> Rat {
        Rat::from(self.c.clone()) * x + Rat::from(self.d.clone())
    }

    pub fn apply(&self, x: &Rat) -> Result<Rat, SchottkyError> {
        let den = self.denom_at(x);
        if den.is_zero() {
            return Err(SchottkyError::PoleHit(x.clone()));
        }
        Ok((Rat::from(self.a.clone()) * x + Rat::from(self.b.clone())) / den)
    }

    /// `|det| / |cx+d|²`.
    pub fn derivative_abs(&self, qp: Qp, x: &Rat) -> Result<Rat, SchottkyError> {
        let den = self.denom_at(x);
        if den.is_zero() {
            return Err(SchottkyError::PoleHit(x.clone()));
        }
        let da = qp.abs(&den);
        Ok(qp.abs(&Rat::from(self.det())) / (&da * &da))
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.d.clone(), -self.b.clone(), -self.c.clone(), self.a.clone()).unwrap()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            &self.a * &other.a + &self.b * &other.c,
            &self.a * &other.b + &self.b * &other.d,
            &self.c * &other.a + &self.d * &other.c,
            &self.c * &other.b + &self.d * &other.d,
        )
        .unwrap()
    }

    /// `|tr²/det| > 1`: the map has two fixed points in `P¹(Q_p)` with
    /// distinct multiplier absolute values.
    pub fn is_hyperbolic(&self, qp: Qp) -> bool {
        let tr = Rat::from(self.trace());
        let det = Rat::from(self.det());
        qp.abs(&(&tr * &tr)) > qp.abs(&det)
    }
}

/// Returns `(|γx - γy|, |γ'(x)|^{1/2} |γ'(y)|^{1/2} |x - y|)`.
///
/// The square root is exact: the product of the derivatives is
/// `|det|² / (|cx+d||cy+d|)²`.
pub fn moebius_distance_identity_check(
    qp: Qp,
    gamma: &MoebiusMap,
    x: &Rat,
    y: &Rat,
) -> Result<(Rat, Rat), SchottkyError> {
    let gx = gamma.apply(x)?;
    let gy = gamma.apply(y)?;
    let lhs = qp.abs(&(gx - gy));
    let prod = gamma.derivative_abs(qp, x)? * gamma.derivative_abs(qp, y)?;
    let e = qp.log_exact(&prod).expect("absolute values are powers of p");
    debug_assert!(e % 2 == 0);
    let rhs = qp.pow(e / 2) * qp.abs(&(x - y));
    Ok((lhs, rhs))
}
