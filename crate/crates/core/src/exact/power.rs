use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{floor_i64, fmt_rat, int, rat_pow, rat_to_f64, Rat};

/// A finite sum `Σ c_f · p^f` with rational coefficients and rational
/// exponents `f ∈ [0, 1)`.
///
/// Integer parts of exponents are folded into the coefficients, so two sums
/// are equal exactly when their term maps are equal. Sums over kernel terms
/// `p^{-α_g ℓ} |x - y|^{-α}` with rational `α, α_g` stay exact and
/// order-independent in this form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PowerSum {
    p: u32,
    terms: BTreeMap<Rat, Rat>,
}

impl PowerSum {
    pub fn zero(p: u32) -> Self {
        Self { p, terms: BTreeMap::new() }
    }

    pub fn one(p: u32) -> Self {
        Self::from_rat(p, Rat::one())
    }

    pub fn from_rat(p: u32, r: Rat) -> Self {
        let mut s = Self::zero(p);
        s.add_term(Rat::zero(), r);
        s
    }

    /// `coeff · p^exp`.
    pub fn monomial(p: u32, coeff: Rat, exp: &Rat) -> Self {
        let fl = floor_i64(exp);
        let frac = exp - int(fl);
        let c = coeff * rat_pow(&int(p as i64), fl);
        let mut s = Self::zero(p);
        s.add_term(frac, c);
        s
    }

    /// `p^exp`.
    pub fn p_pow(p: u32, exp: &Rat) -> Self {
        Self::monomial(p, Rat::one(), exp)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    fn add_term(&mut self, frac: Rat, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(frac) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational, if no irrational power of `p` occurs.
    pub fn as_rat(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Rat::zero()).cloned(),
            _ => None,
        }
    }

    /// True when every coefficient is nonnegative (so the value is ≥ 0).
    pub fn has_nonneg_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Single-term sums `c·p^f`, as `(c, f)`.
    pub fn as_monomial(&self) -> Option<(Rat, Rat)> {
        match self.terms.len() {
            0 => Some((Rat::zero(), Rat::zero())),
            1 => self.terms.iter().next().map(|(f, c)| (c.clone(), f.clone())),
            _ => None,
        }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero(self.p);
        }
        Self {
            p: self.p,
            terms: self.terms.iter().map(|(f, c)| (f.clone(), c * r)).collect(),
        }
    }

    /// Inverse of a monomial; `None` for zero or multi-term sums.
    pub fn monomial_recip(&self) -> Option<Self> {
        let (c, f) = self.as_monomial()?;
        if c.is_zero() {
            return None;
        }
        Some(Self::monomial(self.p, c.recip(), &-f))
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p as f64;
        self.terms
            .iter()
            .map(|(f, c)| rat_to_f64(c) * p.powf(rat_to_f64(f)))
            .sum()
    }
}

impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                if e.is_zero() {
                    fmt_rat(c)
                } else {
                    format!("{}*{}^({})", fmt_rat(c), self.p, fmt_rat(e))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl AddAssign<&PowerSum> for PowerSum {
    fn add_assign(&mut self, rhs: &PowerSum) {
        debug_assert_eq!(self.p, rhs.p);
        for (f, c) in &rhs.terms {
            self.add_term(f.clone(), c.clone());
        }
    }
}

impl Add<&PowerSum> for &PowerSum {
    type Output = PowerSum;
    fn add(self, rhs: &PowerSum) -> PowerSum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Neg for &PowerSum {
    type Output = PowerSum;
    fn neg(self) -> PowerSum {
        PowerSum {
            p: self.p,
            terms: self.terms.iter().map(|(f, c)| (f.clone(), -c)).collect(),
        }
    }
}

impl Sub<&PowerSum> for &PowerSum {
    type Output = PowerSum;
    fn sub(self, rhs: &PowerSum) -> PowerSum {
        self + &(-rhs)
    }
}

impl Mul<&PowerSum> for &PowerSum {
    type Output = PowerSum;
    fn mul(self, rhs: &PowerSum) -> PowerSum {
        debug_assert_eq!(self.p, rhs.p);
        let mut out = PowerSum::zero(self.p);
        let p = int(self.p as i64);
        for (f1, c1) in &self.terms {
            for (f2, c2) in &rhs.terms {
                let mut f = f1 + f2;
                let mut c = c1 * c2;
                if f >= Rat::one() {
                    f -= Rat::one();
                    c *= &p;
                }
                out.add_term(f, c);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn integer_exponents_fold_into_coefficients() {
        let a = PowerSum::p_pow(3, &int(-2));
        assert_eq!(a.as_rat(), Some(rat(1, 9)));
        let b = PowerSum::p_pow(3, &rat(5, 2));
        assert_eq!(b.as_rat(), None);
        assert_eq!(b.as_monomial(), Some((int(9), rat(1, 2))));
    }

    #[test]
    fn half_powers_multiply_to_rationals() {
        let s = PowerSum::p_pow(3, &rat(1, 2));
        assert_eq!((&s * &s).as_rat(), Some(int(3)));
        let t = PowerSum::p_pow(3, &rat(-1, 2));
        assert_eq!((&s * &t).as_rat(), Some(int(1)));
    }

    #[test]
    fn addition_cancels_exactly() {
        let s = PowerSum::p_pow(5, &rat(1, 3));
        let z = &s - &s;
        assert!(z.is_zero());
        let sum = &(&s + &PowerSum::one(5)) - &PowerSum::one(5);
        assert_eq!(sum, s);
    }

    #[test]
    fn float_value() {
        let s = &PowerSum::p_pow(2, &rat(1, 2)) + &PowerSum::from_rat(2, rat(1, 4));
        assert!((s.to_f64() - (2f64.sqrt() + 0.25)).abs() < 1e-15);
    }
}
