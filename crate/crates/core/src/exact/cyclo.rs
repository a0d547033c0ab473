use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{rat_to_f64, PowerSum, Rat};

/// Exact element `Σ c_φ · e^{2πiφ}` with phases `φ ∈ [0,1)` whose
/// denominators are powers of `p`, and [`PowerSum`] coefficients.
///
/// Values are kept in a canonical basis of the cyclotomic field
/// `Q(ζ_{p^K})`: the exponents `a mod p^K` whose leading base-`p` digit is not
/// `p - 1`. Any term with leading digit `p - 1` is rewritten with the relation
/// `Σ_i ζ^{b + i p^{K-1}} = 0`, so equality and zero tests are structural.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cyclo {
    p: u32,
    terms: BTreeMap<Rat, PowerSum>,
}

fn reduce_phase(x: &Rat) -> Rat {
    x - x.floor()
}

impl Cyclo {
    pub fn zero(p: u32) -> Self {
        Self { p, terms: BTreeMap::new() }
    }

    pub fn from_power_sum(c: PowerSum) -> Self {
        Self::term(c, &Rat::zero())
    }

    pub fn from_rat(p: u32, r: Rat) -> Self {
        Self::from_power_sum(PowerSum::from_rat(p, r))
    }

    /// `c · e^{2πi phase}`.
    pub fn term(c: PowerSum, phase: &Rat) -> Self {
        let mut s = Self::zero(c.p());
        s.push(reduce_phase(phase), c);
        s.normalize();
        s
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    fn push(&mut self, phase: Rat, c: PowerSum) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(phase) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn denominator_exponent(&self, phase: &Rat) -> u32 {
        let p = BigInt::from(self.p);
        let mut d = phase.denom().clone();
        let mut k = 0;
        while d > BigInt::one() {
            let (q, r) = d.div_rem(&p);
            debug_assert!(r.is_zero(), "phase denominator must be a power of p");
            d = q;
            k += 1;
        }
        k
    }

    fn normalize(&mut self) {
        let k = self
            .terms
            .keys()
            .map(|ph| self.denominator_exponent(ph))
            .max()
            .unwrap_or(0);
        if k == 0 {
            return;
        }
        let p = BigInt::from(self.p);
        let step = num_traits::pow(p.clone(), (k - 1) as usize);
        let n = &step * &p;
        let top = BigInt::from(self.p - 1);
        let offending: Vec<Rat> = self
            .terms
            .keys()
            .filter(|ph| {
                let a = (*ph * Rat::from_integer(n.clone())).to_integer();
                a.div_floor(&step) == top
            })
            .cloned()
            .collect();
        for ph in offending {
            let c = self.terms.remove(&ph).expect("present");
            let a = (&ph * Rat::from_integer(n.clone())).to_integer();
            let low = a.mod_floor(&step);
            for i in 0..(self.p - 1) {
                let e = &low + &step * BigInt::from(i);
                self.push(Rat::new(e, n.clone()), -&c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a real [`PowerSum`] when no nontrivial phase remains.
    pub fn as_real(&self) -> Option<PowerSum> {
        match self.terms.len() {
            0 => Some(PowerSum::zero(self.p)),
            1 => self.terms.get(&Rat::zero()).cloned(),
            _ => None,
        }
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.p);
        for (ph, c) in &self.terms {
            out.push(reduce_phase(&-ph), c.clone());
        }
        out.normalize();
        out
    }

    pub fn scale(&self, c: &PowerSum) -> Self {
        let mut out = Self::zero(self.p);
        for (ph, a) in &self.terms {
            out.push(ph.clone(), a * c);
        }
        out
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        self.scale(&PowerSum::from_rat(self.p, r.clone()))
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|(ph, c)| Complex64::from_polar(c.to_f64(), std::f64::consts::TAU * rat_to_f64(ph)))
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &PowerSum)> {
        self.terms.iter()
    }

    /// Number of base-`p` digits needed for the phases present.
    pub fn max_phase_digits(&self) -> u32 {
        self.terms.keys().map(|ph| self.denominator_exponent(ph)).max().unwrap_or(0)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(ph, c)| {
                if ph.is_zero() {
                    format!("({c})")
                } else {
                    format!("({c})*e(2pi i*{ph})")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl AddAssign<&Cyclo> for Cyclo {
    fn add_assign(&mut self, rhs: &Cyclo) {
        for (ph, c) in &rhs.terms {
            self.push(ph.clone(), c.clone());
        }
        self.normalize();
    }
}

impl Add<&Cyclo> for &Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        Cyclo {
            p: self.p,
            terms: self.terms.iter().map(|(ph, c)| (ph.clone(), -c)).collect(),
        }
    }
}

impl Sub<&Cyclo> for &Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self + &(-rhs)
    }
}

impl Mul<&Cyclo> for &Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        let mut out = Cyclo::zero(self.p);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.push(reduce_phase(&(a + b)), x * y);
            }
        }
        out.normalize();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn root(p: u32, phase: Rat) -> Cyclo {
        Cyclo::term(PowerSum::one(p), &phase)
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for p in [2u32, 3, 5, 7] {
            for k in 1..=3u32 {
                let n = (p as i64).pow(k);
                let mut s = Cyclo::zero(p);
                for a in 0..n {
                    s += &root(p, rat(a, n));
                }
                assert!(s.is_zero(), "p={p} k={k}: {s}");
            }
        }
    }

    #[test]
    fn partial_sums_do_not_vanish() {
        let s = &root(3, rat(1, 3)) + &root(3, rat(2, 3));
        assert_eq!(s, Cyclo::from_rat(3, int(-1)));
        let t = &root(5, rat(1, 25)) + &root(5, rat(2, 25));
        assert!(!t.is_zero());
    }

    #[test]
    fn multiplication_adds_phases() {
        let a = root(3, rat(1, 9));
        let b = root(3, rat(8, 9));
        assert_eq!(&a * &b, Cyclo::from_rat(3, int(1)));
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn complex_conversion_matches() {
        let a = root(3, rat(1, 9));
        let z = a.to_complex();
        assert!((z.arg() - std::f64::consts::TAU / 9.0).abs() < 1e-14);
        let s = &root(3, rat(1, 3)) + &root(3, rat(2, 3));
        assert!((s.to_complex().re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn canonical_across_levels() {
        // ζ_9^3 = ζ_3, and both spellings normalize identically
        let a = root(3, rat(3, 9));
        let b = root(3, rat(1, 3));
        assert_eq!(a, b);
        let c = &(&root(3, rat(1, 9)) + &b) - &root(3, rat(1, 9));
        assert_eq!(c, b);
    }
}
