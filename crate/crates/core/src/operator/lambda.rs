use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::apply::apply_operator;
use super::{Mode, OperatorConfig, OperatorError, PowerAccumulator};
use crate::exact::{int, rat_to_f64, ratstr, Cyclo, PowerSum, Rat};
use crate::padic::Disc;
use crate::schottky::{disc_image, GroupWord, MoebiusMap, SchottkyError};
use crate::wavelets::{admissible_supports, Normalization, StateSpace, Wavelet, WaveletError};

fn ps_f64<S: serde::Serializer>(x: &PowerSum, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Truncated `Σ_γ p^{-α_g ℓ(γ)} δ(b, γb)^{-α}` plus, in genus 1, the exact
/// geometric remainder when each direction has settled into a constant
/// rational ratio over its last three terms.
struct DeltaSeries {
    partial: PowerSum,
    remainder: Option<PowerSum>,
}

fn delta_series(cfg: &OperatorConfig, b: &Disc) -> Result<DeltaSeries, OperatorError> {
    let qp = cfg.qp();
    let mut acc = PowerAccumulator::new(qp.p());
    let mut directions: BTreeMap<i32, Vec<Rat>> = BTreeMap::new();
    for (len, e) in cfg.elements() {
        let exp = if e.word.is_identity() {
            int(0)
        } else {
            let img = disc_image(qp, &e.map, b).map_err(|err| match err {
                SchottkyError::PoleInsideDisc(_) => OperatorError::ImageNotAffine(b.clone()),
                other => other.into(),
            })?;
            let dist = b.distance(qp, &img).map_err(SchottkyError::from)?;
            cfg.weight_exponent(len, qp.log_exact(&dist).expect("distance is a power of p"))
        };
        if cfg.group().genus() == 1 && !e.word.is_identity() {
            directions.entry(e.word.letters()[0]).or_default().push(exp.clone());
        }
        acc.add(exp, int(1));
    }
    let partial = acc.finish();
    let remainder = if cfg.group().genus() == 1 && cfg.cutoff_len() >= 4 {
        let mut total = PowerSum::zero(qp.p());
        let mut ok = true;
        for exps in directions.values() {
            let n = exps.len();
            let steps: Vec<Rat> = (n - 3..n).map(|i| &exps[i] - &exps[i - 1]).collect();
            let step = &steps[0];
            if steps.iter().any(|s| s != step) || !step.is_integer() || *step >= int(0) {
                ok = false;
                break;
            }
            let r = qp.pow(step.to_integer().try_into().unwrap());
            let coeff = &r / (int(1) - &r);
            total += &PowerSum::monomial(qp.p(), coeff, &exps[n - 1]);
        }
        ok.then_some(total)
    } else {
        None
    };
    Ok(DeltaSeries { partial, remainder })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaSeries {
    #[serde(serialize_with = "ps_f64")]
    pub value: PowerSum,
    #[serde(serialize_with = "ps_f64")]
    pub partial: PowerSum,
    pub closed_form: bool,
    /// Bound on `value − partial` from the geometric majorant.
    pub tail_bound: f64,
    pub cutoff_len: usize,
}

/// `C_B μ(F)^{-1} p^{t} Σ_γ p^{-α_g ℓ(γ)} δ(B, γB)^{-α}` for `B = D(c, t)`.
pub fn lambda_series(cfg: &OperatorConfig, b: &Disc) -> Result<LambdaSeries, OperatorError> {
    let qp = cfg.qp();
    let c_b = cfg.profile().density_on(b).ok_or_else(|| WaveletError::NotAdmissible(b.clone()))?;
    let pre = c_b * cfg.mu_inv() * qp.pow(b.radius_exp());
    let series = delta_series(cfg, b)?;
    let dmin_pow = rat_to_f64(cfg.d_min()).powf(-rat_to_f64(cfg.alpha()));
    let tail_bound = rat_to_f64(&pre) * dmin_pow * cfg.geometric_tail(cfg.cutoff_len()).value;
    let partial = series.partial.scale(&pre);
    let (value, closed_form) = match series.remainder {
        Some(r) => {
            let r = r.scale(&pre);
            // the extrapolated remainder must respect the certified bound
            if r.to_f64() <= tail_bound * (1.0 + 1e-9) {
                (&partial + &r, true)
            } else {
                (partial.clone(), false)
            }
        }
        None => (partial.clone(), false),
    };
    Ok(LambdaSeries { value, partial, closed_form, tail_bound, cutoff_len: cfg.cutoff_len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaExact {
    #[serde(serialize_with = "ps_f64")]
    pub value: PowerSum,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

pub fn lambda_exact(cfg: &OperatorConfig, b: &Disc, j: u32) -> Result<LambdaExact, OperatorError> {
    lambda_exact_at(cfg, b, j, &GroupWord::identity())
}

/// `−𝓗ψ(βx)/ψ(x)` for `ψ = ψ_{B,j}`, checked constant over two points in
/// every child of `B`. The truncated value is a lower bound; `hi` adds the
/// certified tail.
pub fn lambda_exact_at(cfg: &OperatorConfig, b: &Disc, j: u32, beta: &GroupWord) -> Result<LambdaExact, OperatorError> {
    let qp = cfg.qp();
    let w = Wavelet::normalized(cfg.profile(), b.clone(), j, Normalization::Omega)?;
    let level = (1 - b.radius_exp()).max(0) as u32;
    let space = StateSpace::new(cfg.profile(), level);
    let u = w.on_states(&space);
    let shift = qp.pow(b.radius_exp() - 2);
    let points: Vec<Rat> = b
        .children(qp)
        .into_iter()
        .flat_map(|c| {
            let x = c.center().clone();
            let y = &x + int(1) / &shift;
            [x, y]
        })
        .collect();
    let inv_sq = qp.pow(w.norm_exp);
    let mut value: Option<PowerSum> = None;
    let mut tail = 0.0f64;
    for x in &points {
        let out = apply_operator(cfg, &u, &space, beta, x)?;
        let psi = w.eval(qp, x).to_cyclo();
        let ratio: Cyclo = (-&(&out.value * &psi.conj())).scale_rat(&inv_sq);
        let r = ratio.as_real().ok_or_else(|| OperatorError::RatioNotConstant(b.clone()))?;
        match &value {
            None => value = Some(r),
            Some(v) if *v == r => {}
            Some(_) => return Err(OperatorError::RatioNotConstant(b.clone())),
        }
        let mag = w.magnitude(qp.p()).to_f64();
        tail = tail.max(out.tail_bound.map_or(f64::INFINITY, |t| t / mag));
    }
    let value = value.expect("at least one sample");
    let lo = value.to_f64();
    Ok(LambdaExact { hi: lo + tail, lo, value, samples: points.len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub radius_exp: i64,
    #[serde(with = "ratstr")]
    pub density: Rat,
    #[serde(serialize_with = "ps_f64")]
    pub lambda_series: PowerSum,
    pub lambda_series_f64: f64,
    pub lambda_series_closed_form: bool,
    #[serde(serialize_with = "ps_f64")]
    pub lambda_exact: PowerSum,
    pub lambda_exact_lo: f64,
    pub lambda_exact_hi: f64,
    pub multiplicity: usize,
    pub witnesses: Vec<Disc>,
    /// Both eigenvalue columns agree across all witnesses.
    pub class_constant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub level: u32,
    pub mode: Mode,
    pub cutoff_len: usize,
    pub tail_bound: f64,
    /// `(ℓ, number of group elements of length ℓ)` used in the sums.
    pub word_census: Vec<(usize, usize)>,
    pub entries: Vec<SpectrumEntry>,
}

/// Eigenvalue classes of admissible wavelets at level `m`, grouped by
/// `(radius, density)`.
pub fn spectrum(cfg: &OperatorConfig, level: u32) -> Result<Spectrum, OperatorError> {
    let p = cfg.qp().p() as usize;
    let mut classes: BTreeMap<(i64, Rat), Vec<Disc>> = BTreeMap::new();
    for b in admissible_supports(cfg.profile(), level) {
        let c = cfg.profile().density_on(&b).unwrap().clone();
        classes.entry((b.radius_exp(), c)).or_default().push(b);
    }
    let entries: Result<Vec<SpectrumEntry>, OperatorError> = classes
        .into_par_iter()
        .map(|((t, c), discs)| {
            let mut series = Vec::new();
            let mut exacts = Vec::new();
            for b in &discs {
                series.push(lambda_series(cfg, b)?);
                exacts.push(lambda_exact(cfg, b, 1)?);
            }
            let class_constant = series.iter().all(|l| l.value == series[0].value)
                && exacts.iter().all(|l| l.value == exacts[0].value);
            Ok(SpectrumEntry {
                radius_exp: t,
                density: c,
                lambda_series_f64: series[0].value.to_f64(),
                lambda_series_closed_form: series[0].closed_form,
                lambda_series: series[0].value.clone(),
                lambda_exact: exacts[0].value.clone(),
                lambda_exact_lo: exacts.iter().map(|l| l.lo).fold(f64::INFINITY, f64::min),
                lambda_exact_hi: exacts.iter().map(|l| l.hi).fold(f64::NEG_INFINITY, f64::max),
                multiplicity: discs.len() * (p - 1),
                witnesses: discs,
                class_constant,
            })
        })
        .collect();
    let mut census: BTreeMap<usize, usize> = BTreeMap::new();
    for (len, _) in cfg.elements() {
        *census.entry(len).or_default() += 1;
    }
    Ok(Spectrum {
        level,
        mode: cfg.mode(),
        cutoff_len: cfg.cutoff_len(),
        tail_bound: cfg.tail_bound(1.0, cfg.cutoff_len()).value,
        word_census: census.into_iter().collect(),
        entries: entries?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaTransform {
    pub mode: Mode,
    #[serde(serialize_with = "ps_f64")]
    pub original: PowerSum,
    /// `C_B |f(φy)| |φ'(y)| μ(φF)^{-1} p^{t̃} Σ_γ p^{-α_g ℓ} δ(φB, γφB)^{-α}`.
    #[serde(serialize_with = "ps_f64")]
    pub transformed: PowerSum,
    pub factor: f64,
    /// The same expression with `C_B |f(φy)| |φ'(y)|` replaced by the ambient
    /// density `C_{φB}`.
    #[serde(serialize_with = "ps_f64_opt")]
    pub direct_ambient: Option<PowerSum>,
}

fn ps_f64_opt<S: serde::Serializer>(x: &Option<PowerSum>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Eigenvalue of `B` carried to `φ(B)`. In transport mode translated data
/// equal their representatives, so the value is unchanged.
pub fn lambda_transform(cfg: &OperatorConfig, phi: &MoebiusMap, b: &Disc) -> Result<LambdaTransform, OperatorError> {
    let qp = cfg.qp();
    let original = lambda_series(cfg, b)?.value;
    if cfg.mode() == Mode::Transport {
        return Ok(LambdaTransform { mode: cfg.mode(), transformed: original.clone(), original, factor: 1.0, direct_ambient: None });
    }
    if phi.pole().is_some_and(|z| cfg.domain().contains(qp, &z)) {
        return Err(OperatorError::PoleInsideDomain);
    }
    let datum = cfg.datum().ok_or(OperatorError::NoDatum)?;
    let c_b = cfg.profile().density_on(b).ok_or_else(|| WaveletError::NotAdmissible(b.clone()))?;
    let y = b.center();
    let phy = phi.apply(y)?;
    let c_phi = datum.abs_at(qp, &phy).ok_or(OperatorError::NotInDomain(crate::exact::fmt_rat(&phy)))?;
    let c_dphi = phi.derivative_abs(qp, y)?;
    let mut mu_phi = int(0);
    for piece in cfg.domain().pieces() {
        mu_phi += disc_image(qp, phi, piece)?.haar(qp);
    }
    let phi_b = disc_image(qp, phi, b)?;
    let series = delta_series(cfg, &phi_b)?;
    let sigma = match series.remainder {
        Some(r) => &series.partial + &r,
        None => series.partial,
    };
    let common = qp.pow(phi_b.radius_exp()) / &mu_phi;
    let transformed = sigma.scale(&(c_b * c_phi * c_dphi * &common));
    let direct_ambient = crate::measure::local_abs(qp, datum, &phi_b).ok().map(|c| sigma.scale(&(c * &common)));
    Ok(LambdaTransform {
        mode: cfg.mode(),
        factor: transformed.to_f64() / original.to_f64(),
        original,
        transformed,
        direct_ambient,
    })
}
