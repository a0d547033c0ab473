use std::collections::HashMap;

use crate::exact::{Cyclo, Rat};
use crate::measure::MeasureProfile;
use crate::padic::{Disc, Qp};

/// Level-`m` partition of `F` minus zero-cores: every piece is split into
/// discs of radius `min(piece radius, p^{-m})`.
#[derive(Clone, Debug)]
pub struct StateSpace {
    qp: Qp,
    level: u32,
    states: Vec<Disc>,
    piece_of: Vec<usize>,
    densities: Vec<Rat>,
    weights: Vec<Rat>,
    index: HashMap<Disc, usize>,
}

impl StateSpace {
    pub fn new(profile: &MeasureProfile, level: u32) -> Self {
        let qp = profile.qp();
        let target = -(level as i64);
        let mut states = Vec::new();
        let mut piece_of = Vec::new();
        let mut densities = Vec::new();
        for (k, piece) in profile.pieces().iter().enumerate() {
            let discs = if piece.disc.radius_exp() > target {
                piece.disc.descendants_at(qp, target)
            } else {
                vec![piece.disc.clone()]
            };
            for d in discs {
                states.push(d);
                piece_of.push(k);
                densities.push(piece.density.clone());
            }
        }
        let weights = states.iter().zip(&densities).map(|(d, c)| c * d.haar(qp)).collect();
        let index = states.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        Self { qp, level, states, piece_of, densities, weights, index }
    }

    pub fn qp(&self) -> Qp {
        self.qp
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Disc] {
        &self.states
    }

    pub fn piece_of(&self, i: usize) -> usize {
        self.piece_of[i]
    }

    pub fn density(&self, i: usize) -> &Rat {
        &self.densities[i]
    }

    /// `|ω|(state_i)`.
    pub fn weight(&self, i: usize) -> &Rat {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn total_weight(&self) -> Rat {
        self.weights.iter().sum()
    }

    pub fn index_of(&self, d: &Disc) -> Option<usize> {
        self.index.get(d).copied()
    }

    pub fn locate(&self, x: &Rat) -> Option<usize> {
        self.states.iter().position(|d| d.contains(self.qp, x))
    }

    /// Indices of states contained in `d`.
    pub fn states_in(&self, d: &Disc) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.states[i].is_subset_of(self.qp, d)).collect()
    }
}

/// Exact function constant on the states of a [`StateSpace`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelFunction {
    pub level: u32,
    pub values: Vec<Cyclo>,
}

impl LevelFunction {
    pub fn zero(space: &StateSpace) -> Self {
        Self { level: space.level(), values: vec![Cyclo::zero(space.qp().p()); space.len()] }
    }

    pub fn constant(space: &StateSpace, c: Cyclo) -> Self {
        Self { level: space.level(), values: vec![c; space.len()] }
    }

    pub fn indicator(space: &StateSpace, d: &Disc) -> Self {
        let p = space.qp().p();
        let values = space
            .states()
            .iter()
            .map(|s| if s.is_subset_of(space.qp(), d) { Cyclo::from_rat(p, Rat::from_integer(1.into())) } else { Cyclo::zero(p) })
            .collect();
        Self { level: space.level(), values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Cyclo::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { level: self.level, values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { level: self.level, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Cyclo) -> Self {
        Self { level: self.level, values: self.values.iter().map(|a| a * c).collect() }
    }

    /// `⟨u, v⟩_ω = Σ_s u_s conj(v_s) |ω|(s)`.
    pub fn inner(&self, other: &Self, space: &StateSpace) -> Cyclo {
        let mut acc = Cyclo::zero(space.qp().p());
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            if a.is_zero() || b.is_zero() {
                continue;
            }
            acc += &(a * &b.conj()).scale_rat(space.weight(i));
        }
        acc
    }

    pub fn to_complex(&self) -> Vec<num_complex::Complex64> {
        self.values.iter().map(Cyclo::to_complex).collect()
    }

    pub fn max_abs_diff(&self, other: &[num_complex::Complex64]) -> f64 {
        self.to_complex().iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
