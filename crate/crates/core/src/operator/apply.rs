use rayon::prelude::*;

use super::{Mode, OperatorConfig, OperatorError, PowerAccumulator};
use crate::exact::{fmt_rat, int, rat_to_f64, Cyclo, PowerSum, Rat};
use crate::padic::Qp;
use crate::schottky::GroupWord;
use crate::wavelets::{LevelFunction, StateSpace, Wavelet};

/// `H_α(βx, γy) = μ(F)^{-1} p^{-α_g ℓ(β⁻¹γ)} |βx − γy|^{-α}`.
pub fn kernel(cfg: &OperatorConfig, beta: &GroupWord, x: &Rat, gamma: &GroupWord, y: &Rat) -> Result<PowerSum, OperatorError> {
    let g = cfg.group();
    let w = beta.inverse().compose(gamma);
    let diff = match cfg.mode() {
        Mode::Transport => x - g.word_map(&w).apply(y)?,
        Mode::Ambient => g.word_map(beta).apply(x)? - g.word_map(gamma).apply(y)?,
    };
    let e = cfg.qp().abs_exp(&diff).ok_or(OperatorError::CoincidentPoints)?;
    Ok(PowerSum::monomial(cfg.qp().p(), cfg.mu_inv().clone(), &cfg.weight_exponent(w.len(), e)))
}

/// Operator value with the certified bound on the truncated group sum.
#[derive(Clone, Debug)]
pub struct OperatorValue {
    pub value: Cyclo,
    /// `None` when no uniform bound is available (ambient mode with a
    /// non-affine translation).
    pub tail_bound: Option<f64>,
}

/// `𝓗u(βx) = Σ_γ ∫_F H_α(βx, γy)(u(y) − u(x)) |ω(y)|` for a level-`m` function.
///
/// Each state `s` is a disc on which `|βx − γy|` is constant (the images
/// `γ(s)` avoid `βx`), so every term is an exact product of a state mass and
/// a power of `p`.
pub fn apply_operator(
    cfg: &OperatorConfig,
    u: &LevelFunction,
    space: &StateSpace,
    beta: &GroupWord,
    x: &Rat,
) -> Result<OperatorValue, OperatorError> {
    if u.values.len() != space.len() || u.level != space.level() {
        return Err(OperatorError::NotLocallyConstant(space.level()));
    }
    let qp = cfg.qp();
    let sx = space.locate(x).ok_or_else(|| OperatorError::NotInDomain(fmt_rat(x)))?;
    let ux = &u.values[sx];
    let g = cfg.group();
    let (bx, beta_map) = match cfg.mode() {
        Mode::Transport => (x.clone(), None),
        Mode::Ambient => {
            let m = g.word_map(beta);
            (m.apply(x)?, Some(m))
        }
    };
    let terms: Result<Vec<Cyclo>, OperatorError> = (0..space.len())
        .into_par_iter()
        .filter(|&s| s != sx && u.values[s] != *ux)
        .map(|s| {
            let c = space.states()[s].center();
            let mut acc = PowerAccumulator::new(qp.p());
            for (len, e) in cfg.elements() {
                let mut y = e.map.apply(c)?;
                if let Some(b) = &beta_map {
                    y = b.apply(&y)?;
                }
                let d = qp.abs_exp(&(&bx - y)).ok_or(OperatorError::CoincidentPoints)?;
                acc.add(cfg.weight_exponent(len, d), int(1));
            }
            let diff = &u.values[s] - ux;
            Ok(diff.scale(&acc.finish()).scale_rat(&(space.weight(s) * cfg.mu_inv())))
        })
        .collect();
    let mut value = Cyclo::zero(qp.p());
    for t in terms? {
        value += &t;
    }
    let sup_u = u.to_complex().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let base = cfg.tail_bound(sup_u, cfg.cutoff_len()).value;
    let tail_bound = match &beta_map {
        None => Some(base),
        Some(b) if b.is_identity() => Some(base),
        Some(b) if b.entries()[2].sign() == num_bigint::Sign::NoSign => {
            let scale = rat_to_f64(&b.derivative_abs(qp, &int(0))?);
            Some(base * scale.powf(-rat_to_f64(cfg.alpha())))
        }
        Some(_) => None,
    };
    Ok(OperatorValue { value, tail_bound })
}

/// `∫_B |x − y|^{-α} (ψ(y) − ψ(x)) dy` by summing over the children of `B`
/// not containing `x`, on which `|x − y| = p^t` and `ψ` is constant.
pub fn vladimirov_local_integral(qp: Qp, w: &Wavelet, alpha: &Rat, x: &Rat) -> Result<Cyclo, OperatorError> {
    let b = &w.support;
    if !b.contains(qp, x) {
        return Err(OperatorError::NotInDomain(fmt_rat(x)));
    }
    let psi_x = w.eval(qp, x).to_cyclo();
    let dist = PowerSum::p_pow(qp.p(), &(-alpha * int(b.radius_exp())));
    let mut acc = Cyclo::zero(qp.p());
    for child in b.children(qp) {
        if child.contains(qp, x) {
            continue;
        }
        let diff = &w.eval(qp, child.center()).to_cyclo() - &psi_x;
        acc += &diff.scale(&dist).scale_rat(&child.haar(qp));
    }
    Ok(acc)
}

/// `−p^{t(1−α)} ψ(x)` for `B = D(c, t)`.
pub fn local_integral_closed_form(qp: Qp, w: &Wavelet, alpha: &Rat, x: &Rat) -> Cyclo {
    let t = int(w.support.radius_exp());
    let factor = PowerSum::p_pow(qp.p(), &(&t * (int(1) - alpha)));
    (-&w.eval(qp, x).to_cyclo()).scale(&factor)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::tate_cfg;
    use super::super::Cutoff;
    use super::*;
    use crate::exact::rat;
    use crate::padic::Disc;
    use crate::wavelets::Normalization;

    #[test]
    fn kernel_examples() {
        let cfg = tate_cfg(Mode::Transport, Cutoff::Length(4));
        let one = GroupWord::identity();
        let g1 = GroupWord::new([1]);
        assert_eq!(kernel(&cfg, &one, &int(1), &g1, &int(1)).unwrap().as_rat().unwrap(), rat(3, 8));
        // β = γ, x ≠ y: ℓ(β⁻¹γ) = 0
        assert_eq!(kernel(&cfg, &g1, &int(1), &g1, &int(2)).unwrap().as_rat().unwrap(), rat(9, 8));
        let g2 = GroupWord::new([1, 1]);
        let k1 = kernel(&cfg, &one, &int(1), &g1, &int(1)).unwrap().as_rat().unwrap();
        let k2 = kernel(&cfg, &one, &int(1), &g2, &int(1)).unwrap().as_rat().unwrap();
        assert_eq!(k2 / k1, rat(1, 3));
        assert!(matches!(kernel(&cfg, &one, &int(1), &one, &int(1)), Err(OperatorError::CoincidentPoints)));
        let amb = tate_cfg(Mode::Ambient, Cutoff::Length(4));
        // |9 − 9·2| = 1/9 in the ambient reading
        assert_eq!(kernel(&amb, &g1, &int(1), &g1, &int(2)).unwrap().as_rat().unwrap(), rat(81, 8));
    }

    #[test]
    fn local_integral_matches_closed_form() {
        for p in [2u32, 3, 5] {
            let q = Qp::new(p).unwrap();
            for t in -2..=2i64 {
                let b = Disc::new(q, &int(1), t);
                for alpha in [int(0), int(1), rat(1, 2), rat(5, 3)] {
                    for j in 1..p {
                        let w = Wavelet::haar(q, b.clone(), j).unwrap();
                        for child in b.children(q) {
                            let x = child.center();
                            assert_eq!(
                                vladimirov_local_integral(q, &w, &alpha, x).unwrap(),
                                local_integral_closed_form(q, &w, &alpha, x)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn local_integral_examples() {
        let q = Qp::new(3).unwrap();
        let w = Wavelet::haar(q, Disc::new(q, &int(1), -1), 1).unwrap();
        let psi = w.eval(q, &int(1)).to_cyclo();
        assert_eq!(vladimirov_local_integral(q, &w, &int(1), &int(1)).unwrap(), -&psi);
        // α = 0: −p^t ψ(x)
        assert_eq!(vladimirov_local_integral(q, &w, &int(0), &int(1)).unwrap(), (-&psi).scale_rat(&rat(1, 3)));
        let w0 = Wavelet::haar(q, Disc::new(q, &int(0), 0), 2).unwrap();
        let psi0 = w0.eval(q, &int(4)).to_cyclo();
        assert_eq!(vladimirov_local_integral(q, &w0, &rat(7, 2), &int(4)).unwrap(), -&psi0);
    }

    #[test]
    fn constants_vanish_and_wavelet_is_eigenfunction() {
        let cfg = tate_cfg(Mode::Transport, Cutoff::Tolerance(1e-12));
        let q = cfg.qp();
        let space = StateSpace::new(cfg.profile(), 2);
        let c = LevelFunction::constant(&space, Cyclo::from_rat(3, rat(2, 5)));
        let one = GroupWord::identity();
        assert!(apply_operator(&cfg, &c, &space, &one, &int(1)).unwrap().value.is_zero());
        let w = Wavelet::normalized(cfg.profile(), Disc::new(q, &int(1), -1), 1, Normalization::Omega).unwrap();
        let u = w.on_states(&space);
        let out = apply_operator(&cfg, &u, &space, &one, &int(1)).unwrap();
        let psi = w.eval(q, &int(1)).to_cyclo();
        let lam = (&out.value - &(-&psi).scale_rat(&rat(81, 26))).to_complex().norm();
        assert!(lam <= out.tail_bound.unwrap(), "{lam}");
        assert!(apply_operator(&cfg, &u, &space, &one, &int(2)).unwrap().value.is_zero());
        assert!(apply_operator(&cfg, &u, &space, &one, &int(3)).unwrap().value.is_zero());
    }

    #[test]
    fn ambient_translation_scales_by_nine() {
        let tr = tate_cfg(Mode::Transport, Cutoff::Length(12));
        let amb = tr.with_mode(Mode::Ambient);
        let q = tr.qp();
        let space = StateSpace::new(tr.profile(), 2);
        let w = Wavelet::normalized(tr.profile(), Disc::new(q, &int(1), -1), 2, Normalization::Omega).unwrap();
        let u = w.on_states(&space);
        let g1 = GroupWord::new([1]);
        let id = GroupWord::identity();
        let base = apply_operator(&tr, &u, &space, &id, &int(4)).unwrap().value;
        assert_eq!(apply_operator(&tr, &u, &space, &g1, &int(4)).unwrap().value, base);
        assert_eq!(apply_operator(&amb, &u, &space, &id, &int(4)).unwrap().value, base);
        let moved = apply_operator(&amb, &u, &space, &g1, &int(4)).unwrap();
        assert_eq!(moved.value, base.scale_rat(&int(9)));
    }
}
