use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exact::{ratstr, Cyclo, PowerSum, Rat};

/// `χ(x) = exp(2πi·phase)` with an exact phase in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterPhase(#[serde(with = "ratstr")] Rat);

impl CharacterPhase {
    pub fn zero() -> Self {
        Self(Rat::zero())
    }

    /// Reduces `phase` modulo 1.
    pub fn new(phase: Rat) -> Self {
        let r = &phase - phase.floor();
        Self(r)
    }

    pub fn value(&self) -> &Rat {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.0 + &other.0)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.0)
    }
}

impl fmt::Display for CharacterPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::exact::fmt_rat(&self.0))
    }
}

/// A complex number `magnitude · χ-phase` with an exact magnitude
/// `c·p^e` (rational `e`, so square roots of powers of `p` are exact).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactComplex {
    pub magnitude: PowerSum,
    pub phase: CharacterPhase,
}

impl ExactComplex {
    pub fn zero(p: u32) -> Self {
        Self { magnitude: PowerSum::zero(p), phase: CharacterPhase::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { magnitude: &self.magnitude * &other.magnitude, phase: self.phase.add(&other.phase) }
    }

    pub fn conj(&self) -> Self {
        Self { magnitude: self.magnitude.clone(), phase: self.phase.neg() }
    }

    pub fn to_cyclo(&self) -> Cyclo {
        Cyclo::term(self.magnitude.clone(), self.phase.value())
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        self.to_cyclo().to_complex()
    }
}
