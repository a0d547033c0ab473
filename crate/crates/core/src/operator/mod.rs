//! The kernel operator on the fundamental domain: exact application with
//! certified truncation of group sums, eigenvalue formulas, the level-`m`
//! generator matrix and the audit tables.

mod apply;
mod audit;
mod generator;
mod lambda;

pub use apply::{apply_operator, kernel, local_integral_closed_form, vladimirov_local_integral, OperatorValue};
pub use audit::{audit_identities, distance_identity_tally, AuditOptions, AuditReport, Tally};
pub use generator::{dirichlet_form, generator_matrix, GeneratorMatrix};
pub use lambda::{
    lambda_exact, lambda_exact_at, lambda_series, lambda_transform, spectrum, LambdaExact, LambdaSeries, LambdaTransform,
    Spectrum, SpectrumEntry,
};

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::exact::{fmt_rat, int, rat_to_f64, PowerSum, Rat};
use crate::measure::{MeasureProfile, RationalFunctionDatum};
use crate::padic::{Disc, Qp};
use crate::schottky::{Element, FundamentalDomain, SchottkyError, SchottkyGroup};
use crate::wavelets::WaveletError;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_WORDS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("growth condition fails: p^alpha_g = {p}^{alpha_g} must exceed 2g = {two_g}")]
    GrowthCondition { p: u32, alpha_g: String, two_g: usize },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("points coincide")]
    CoincidentPoints,
    #[error("{0} is not in the fundamental domain outside zero-cores")]
    NotInDomain(String),
    #[error("function is not locally constant at level {0}")]
    NotLocallyConstant(u32),
    #[error("eigenvalue ratio is not constant over {0}")]
    RatioNotConstant(Disc),
    #[error("pole of the map lies in the fundamental domain")]
    PoleInsideDomain,
    #[error("no rational function datum: the density transform needs |f|")]
    NoDatum,
    #[error("image of {0} is not an affine disc")]
    ImageNotAffine(Disc),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Schottky(#[from] SchottkyError),
}

/// How distances between translated points are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `|βx − γy| := |x − β⁻¹γy|`: translated quantities equal their
    /// representatives in `F`.
    #[default]
    Transport,
    /// Distances and densities computed in `K`.
    Ambient,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Transport => "transport",
            Mode::Ambient => "ambient",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "transport" => Ok(Mode::Transport),
            "ambient" => Ok(Mode::Ambient),
            _ => Err(format!("unknown mode {s:?} (expected transport or ambient)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    Length(usize),
    Tolerance(f64),
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::Tolerance(DEFAULT_TOLERANCE)
    }
}

/// Everything the operator needs, with the group elements up to the
/// resolved cutoff length precomputed.
#[derive(Clone, Debug)]
pub struct OperatorConfig {
    group: SchottkyGroup,
    domain: FundamentalDomain,
    profile: MeasureProfile,
    datum: Option<RationalFunctionDatum>,
    alpha: Rat,
    alpha_g: Rat,
    mode: Mode,
    cutoff: Cutoff,
    cutoff_len: usize,
    elements: Vec<Element>,
    lengths: Vec<usize>,
    mu_inv: Rat,
    d_min: Rat,
}

/// `p^{num} > (2g)^{den}` for `α_g = num/den`.
pub fn growth_condition_holds(p: u32, alpha_g: &Rat, genus: usize) -> bool {
    if genus == 0 {
        return true;
    }
    let num = alpha_g.numer().to_u32().unwrap_or(u32::MAX);
    let den = alpha_g.denom().to_u32().unwrap_or(u32::MAX);
    num_bigint::BigInt::from(p).pow(num) > num_bigint::BigInt::from(2 * genus).pow(den)
}

impl OperatorConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        group: SchottkyGroup,
        profile: MeasureProfile,
        datum: Option<RationalFunctionDatum>,
        alpha: Rat,
        alpha_g: Rat,
        mode: Mode,
        cutoff: Cutoff,
        max_words: usize,
    ) -> Result<Self, OperatorError> {
        if !crate::exact::is_positive(&alpha) {
            return Err(OperatorError::NonPositive("alpha"));
        }
        if !crate::exact::is_positive(&alpha_g) {
            return Err(OperatorError::NonPositive("alpha_g"));
        }
        let p = group.qp().p();
        if !growth_condition_holds(p, &alpha_g, group.genus()) {
            return Err(OperatorError::GrowthCondition { p, alpha_g: fmt_rat(&alpha_g), two_g: 2 * group.genus() });
        }
        let domain = group.fundamental_domain();
        let mu_inv = int(1) / domain.haar();
        let d_min = domain.min_hole_distance(group.qp());
        let mut cfg = Self {
            group,
            domain,
            profile,
            datum,
            alpha,
            alpha_g,
            mode,
            cutoff,
            cutoff_len: 0,
            elements: Vec::new(),
            lengths: Vec::new(),
            mu_inv,
            d_min,
        };
        let g = cfg.group.genus();
        let words_up_to = |l: usize| -> u128 { (0..=l).map(|k| crate::schottky::word_count(g, k)).sum() };
        let len = match cutoff {
            Cutoff::Length(l) => l,
            Cutoff::Tolerance(eps) => {
                let mut l = 0usize;
                while g > 0 && cfg.tail_bound(1.0, l).value > eps && words_up_to(l + 1) <= max_words as u128 {
                    l += 1;
                }
                l
            }
        };
        cfg.cutoff_len = if g == 0 { 0 } else { len };
        let blocks = cfg.group.elements(cfg.cutoff_len);
        for (l, block) in blocks.into_iter().enumerate() {
            for e in block {
                cfg.lengths.push(l);
                cfg.elements.push(e);
            }
        }
        Ok(cfg)
    }

    pub fn qp(&self) -> Qp {
        self.group.qp()
    }

    pub fn group(&self) -> &SchottkyGroup {
        &self.group
    }

    pub fn domain(&self) -> &FundamentalDomain {
        &self.domain
    }

    pub fn profile(&self) -> &MeasureProfile {
        &self.profile
    }

    pub fn datum(&self) -> Option<&RationalFunctionDatum> {
        self.datum.as_ref()
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn alpha_g(&self) -> &Rat {
        &self.alpha_g
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    /// Maximal word length included in group sums.
    pub fn cutoff_len(&self) -> usize {
        self.cutoff_len
    }

    /// Group elements with `ℓ ≤ cutoff_len`, with their lengths.
    pub fn elements(&self) -> impl Iterator<Item = (usize, &Element)> {
        self.lengths.iter().copied().zip(&self.elements)
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// `μ_K(F)^{-1}`.
    pub fn mu_inv(&self) -> &Rat {
        &self.mu_inv
    }

    pub fn d_min(&self) -> &Rat {
        &self.d_min
    }

    /// Same data with a different mode.
    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    /// `p^{-α_g ℓ - α e}` as an exact power of `p`.
    fn weight_exponent(&self, len: usize, dist_exp: i64) -> Rat {
        -(&self.alpha_g * int(len as i64)) - &self.alpha * int(dist_exp)
    }

    /// `Σ_{ℓ > L} 2g(2g−1)^{ℓ−1} p^{−α_g ℓ} = (2g/(2g−1)) r^{L+1}/(1−r)` with
    /// `r = (2g−1)p^{−α_g}`.
    pub fn geometric_tail(&self, len: usize) -> TailBound {
        let g = self.group.genus();
        if g == 0 {
            return TailBound { value: 0.0, exact: Some(int(0)) };
        }
        let p = self.qp().p();
        let m = (2 * g - 1) as i64;
        let lead = int(2 * g as i64) / int(m);
        let value = {
            let r = m as f64 * (p as f64).powf(-rat_to_f64(&self.alpha_g));
            rat_to_f64(&lead) * r.powi(len as i32 + 1) / (1.0 - r)
        };
        let exact = self.alpha_g.is_integer().then(|| {
            let ag = self.alpha_g.to_integer().to_i64().unwrap();
            let r = int(m) * self.qp().pow(-ag);
            &lead * crate::exact::rat_pow(&r, len as i64 + 1) / (int(1) - r)
        });
        TailBound { value, exact }
    }

    /// Certified bound on the discarded `ℓ > L` part of an operator value:
    /// `2‖u‖_∞ μ(F)^{-1} |ω|(F) d_min^{-α} Σ_{ℓ>L} …`.
    pub fn tail_bound(&self, sup_u: f64, len: usize) -> TailBound {
        let geo = self.geometric_tail(len);
        let base = int(2) * &self.mu_inv * self.profile.total_mass();
        let dmin_pow = rat_to_f64(&self.d_min).powf(-rat_to_f64(&self.alpha));
        let value = sup_u * rat_to_f64(&base) * dmin_pow * geo.value;
        let exact = match (&geo.exact, self.alpha.is_integer(), sup_u == 1.0) {
            (Some(e), true, true) => {
                let a = self.alpha.to_integer().to_i64().unwrap();
                Some(base * crate::exact::rat_pow(&self.d_min, -a) * e)
            }
            _ => None,
        };
        TailBound { value, exact }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub value: f64,
    #[serde(with = "crate::exact::ratstr::option")]
    pub exact: Option<Rat>,
}

/// Collects terms `coeff · p^{exp}` by exponent before building a [`PowerSum`].
#[derive(Clone, Debug)]
pub(crate) struct PowerAccumulator {
    p: u32,
    terms: BTreeMap<Rat, Rat>,
}

impl PowerAccumulator {
    pub fn new(p: u32) -> Self {
        Self { p, terms: BTreeMap::new() }
    }

    pub fn add(&mut self, exp: Rat, coeff: Rat) {
        *self.terms.entry(exp).or_insert_with(|| int(0)) += coeff;
    }

    pub fn finish(&self) -> PowerSum {
        let mut s = PowerSum::zero(self.p);
        for (e, c) in &self.terms {
            s += &PowerSum::monomial(self.p, c.clone(), e);
        }
        s
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::tate_cfg;
    use super::*;
    use crate::exact::{rat, rat_pow};
    use crate::fixtures::genus_two_group;

    #[test]
    fn tate_tail_closed_form() {
        let cfg = tate_cfg(Mode::Transport, Cutoff::Length(10));
        for l in [1usize, 5, 10, 20] {
            let t = cfg.tail_bound(1.0, l);
            assert_eq!(t.exact.unwrap(), int(9) * rat_pow(&int(3), -(l as i64)));
            assert!((t.value - 9.0 * 3f64.powi(-(l as i32))).abs() < 1e-15);
        }
        let auto = tate_cfg(Mode::Transport, Cutoff::Tolerance(1e-12));
        assert_eq!(auto.cutoff_len(), 28);
        assert_eq!(auto.n_elements(), 57);
    }

    #[test]
    fn growth_condition() {
        assert!(growth_condition_holds(3, &int(1), 1));
        assert!(!growth_condition_holds(3, &int(1), 2));
        assert!(growth_condition_holds(3, &int(2), 2));
        assert!(growth_condition_holds(3, &rat(3, 2), 2));
        assert!(!growth_condition_holds(3, &rat(5, 4), 2));
        let g = genus_two_group();
        let prof = MeasureProfile::build(g.qp(), &RationalFunctionDatum::constant(int(1)), &g.fundamental_domain(), 1).unwrap();
        let err = OperatorConfig::new(g, prof, None, int(1), int(1), Mode::Transport, Cutoff::Length(2), 1000);
        assert!(matches!(err, Err(OperatorError::GrowthCondition { .. })));
    }

    #[test]
    fn genus_two_ratio() {
        // 3^{α_g} = 7 is not rational-exponent friendly; check α_g = 2 ratio 3/9
        let g = genus_two_group();
        let prof = MeasureProfile::build(g.qp(), &RationalFunctionDatum::constant(int(1)), &g.fundamental_domain(), 1).unwrap();
        let cfg = OperatorConfig::new(g, prof, None, int(1), int(2), Mode::Transport, Cutoff::Length(3), 1000).unwrap();
        let a = cfg.geometric_tail(3).exact.unwrap();
        let b = cfg.geometric_tail(4).exact.unwrap();
        assert_eq!(b / a, rat(1, 3));
        assert_eq!(cfg.n_elements(), 1 + 4 + 12 + 36);
    }
}
