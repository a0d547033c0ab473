//! Locally constant wavelets `ψ_{B,j}` on discs inside the fundamental
//! domain, their group-invariant extensions, and level-`m` analysis.

mod state;

pub use state::{LevelFunction, StateSpace};

use serde::{Deserialize, Serialize};

use crate::exact::{int, rat, Cyclo, PowerSum, Rat};
use crate::measure::MeasureProfile;
use crate::padic::{Disc, ExactComplex, Qp};
use crate::schottky::{SchottkyError, SchottkyGroup};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WaveletError {
    #[error("support {0} is not contained in a single density piece")]
    NotAdmissible(Disc),
    #[error("wavelet index {j} outside 1..{p}")]
    BadIndex { j: u32, p: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `haar(B)^{-1/2}`.
    Haar,
    /// `(C_B · haar(B))^{-1/2}`: unit norm in `L²(|ω|)`.
    Omega,
}

/// `ψ_{B,j}(x) = A · χ(p^{t-1} j x)` on `B = D(c, t)`, zero elsewhere, with
/// `A = p^{-e/2}` where `p^e` is the normalising mass of `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wavelet {
    pub support: Disc,
    pub j: u32,
    pub norm_exp: i64,
}

impl Wavelet {
    pub fn haar(qp: Qp, support: Disc, j: u32) -> Result<Self, WaveletError> {
        Self::with_density(qp, support, j, &int(1))
    }

    /// Normalised in `L²(C·dx)` on the support; `density` must be a power of `p`.
    pub fn with_density(qp: Qp, support: Disc, j: u32, density: &Rat) -> Result<Self, WaveletError> {
        if j == 0 || j >= qp.p() {
            return Err(WaveletError::BadIndex { j, p: qp.p() });
        }
        let c = qp.log_exact(density).expect("density is a power of p");
        Ok(Self { norm_exp: c + support.radius_exp(), support, j })
    }

    pub fn normalized(
        profile: &MeasureProfile,
        support: Disc,
        j: u32,
        norm: Normalization,
    ) -> Result<Self, WaveletError> {
        let qp = profile.qp();
        let density = profile.density_on(&support).ok_or_else(|| WaveletError::NotAdmissible(support.clone()))?.clone();
        match norm {
            Normalization::Haar => Self::haar(qp, support, j),
            Normalization::Omega => Self::with_density(qp, support, j, &density),
        }
    }

    pub fn magnitude(&self, p: u32) -> PowerSum {
        PowerSum::p_pow(p, &rat(-self.norm_exp, 2))
    }

    pub fn eval(&self, qp: Qp, x: &Rat) -> ExactComplex {
        if !self.support.contains(qp, x) {
            return ExactComplex::zero(qp.p());
        }
        let arg = qp.pow(self.support.radius_exp() - 1) * int(self.j as i64) * x;
        ExactComplex { magnitude: self.magnitude(qp.p()), phase: qp.character_phase(&arg) }
    }

    /// Values on a level-`m` state space; the support must be a union of states.
    pub fn on_states(&self, space: &StateSpace) -> LevelFunction {
        let qp = space.qp();
        let values = space
            .states()
            .iter()
            .map(|s| {
                if s.is_subset_of(qp, &self.support) {
                    self.eval(qp, s.center()).to_cyclo()
                } else {
                    Cyclo::zero(qp.p())
                }
            })
            .collect();
        LevelFunction { level: space.level(), values }
    }
}

/// `ψ^Γ(γx) = ψ(x)` for `x ∈ F`.
#[derive(Clone, Debug)]
pub struct InvariantWavelet<'a> {
    pub base: Wavelet,
    pub group: &'a SchottkyGroup,
}

impl InvariantWavelet<'_> {
    pub fn eval(&self, z: &Rat, max_steps: usize) -> Result<ExactComplex, SchottkyError> {
        let (x, _) = self.group.reduce_to_domain(z, max_steps)?;
        Ok(self.base.eval(self.group.qp(), &x))
    }
}

/// Supports inside a single piece whose children are level-`m` states.
pub fn admissible_supports(profile: &MeasureProfile, level: u32) -> Vec<Disc> {
    let qp = profile.qp();
    let lowest = 1 - level as i64;
    let mut out = Vec::new();
    for piece in profile.pieces() {
        for t in (lowest..=piece.disc.radius_exp()).rev() {
            out.extend(piece.disc.descendants_at(qp, t));
        }
    }
    out
}

pub fn admissible_wavelets(profile: &MeasureProfile, level: u32, norm: Normalization) -> Vec<Wavelet> {
    let p = profile.qp().p();
    admissible_supports(profile, level)
        .into_iter()
        .flat_map(|b| (1..p).map(move |j| (b.clone(), j)))
        .map(|(b, j)| Wavelet::normalized(profile, b, j, norm).expect("admissible support"))
        .collect()
}

/// `∫ ψ d|ω|`, exactly zero for admissible supports.
pub fn wavelet_mean(w: &Wavelet, profile: &MeasureProfile) -> Result<Cyclo, WaveletError> {
    let qp = profile.qp();
    let density = profile.density_on(&w.support).ok_or_else(|| WaveletError::NotAdmissible(w.support.clone()))?;
    let mut acc = Cyclo::zero(qp.p());
    for child in w.support.children(qp) {
        acc += &w.eval(qp, child.center()).to_cyclo().scale_rat(&(density * child.haar(qp)));
    }
    Ok(acc)
}

/// `⟨ψ1, ψ2⟩_ω`, evaluated on the children of the smaller support.
pub fn inner_product(w1: &Wavelet, w2: &Wavelet, profile: &MeasureProfile) -> Result<Cyclo, WaveletError> {
    let qp = profile.qp();
    for w in [w1, w2] {
        if profile.density_on(&w.support).is_none() {
            return Err(WaveletError::NotAdmissible(w.support.clone()));
        }
    }
    if !w1.support.intersects(qp, &w2.support) {
        return Ok(Cyclo::zero(qp.p()));
    }
    let small = if w1.support.radius_exp() <= w2.support.radius_exp() { &w1.support } else { &w2.support };
    let density = profile.density_on(small).unwrap();
    let mut acc = Cyclo::zero(qp.p());
    for child in small.children(qp) {
        let c = child.center();
        let v = w1.eval(qp, c).mul(&w2.eval(qp, c).conj());
        acc += &v.to_cyclo().scale_rat(&(density * child.haar(qp)));
    }
    Ok(acc)
}

/// `u = mean·1 + Σ c_w ψ_w + residual`, with the residual orthogonal to
/// constants and to every wavelet.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub mean: Cyclo,
    pub coefficients: Vec<(Wavelet, Cyclo)>,
    pub residual: LevelFunction,
}

/// Projects onto constants and the given `L²(|ω|)`-orthonormal wavelets.
pub fn analyze(u: &LevelFunction, space: &StateSpace, wavelets: &[Wavelet]) -> Decomposition {
    let p = space.qp().p();
    let one = LevelFunction::constant(space, Cyclo::from_rat(p, int(1)));
    let mean = u.inner(&one, space).scale_rat(&(Rat::from_integer(1.into()) / space.total_weight()));
    let mut residual = u.sub(&one.scale(&mean));
    let mut coefficients = Vec::with_capacity(wavelets.len());
    for w in wavelets {
        let psi = w.on_states(space);
        let c = u.inner(&psi, space);
        residual = residual.sub(&psi.scale(&c));
        coefficients.push((w.clone(), c));
    }
    Decomposition { mean, coefficients, residual }
}

pub fn synthesize(d: &Decomposition, space: &StateSpace) -> LevelFunction {
    let mut u = LevelFunction::constant(space, d.mean.clone()).add(&d.residual);
    for (w, c) in &d.coefficients {
        u = u.add(&w.on_states(space).scale(c));
    }
    u
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub level: u32,
    pub dim: usize,
    pub n_constants: usize,
    pub n_wavelets: usize,
    pub gap: usize,
}

/// Dimension of level-`m` functions against constants plus admissible
/// wavelets, for every level `0..=m`.
pub fn completeness_census(profile: &MeasureProfile, level: u32) -> Vec<CensusRow> {
    let p = profile.qp().p() as usize;
    (0..=level)
        .map(|m| {
            let dim = StateSpace::new(profile, m).len();
            let n_wavelets = admissible_supports(profile, m).len() * (p - 1);
            CensusRow { level: m, dim, n_constants: 1, n_wavelets, gap: dim - 1 - n_wavelets }
        })
        .collect()
}
