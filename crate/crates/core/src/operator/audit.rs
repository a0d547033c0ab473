use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::apply::{local_integral_closed_form, vladimirov_local_integral};
use super::{lambda_exact, lambda_exact_at, lambda_series, Mode, OperatorConfig, OperatorError};
use crate::exact::{fmt_rat, int, rat, Rat};
use crate::measure::{invariance_audit, InvarianceRow};
use crate::padic::{Disc, Qp};
use crate::schottky::{disc_image, moebius_distance_identity_check, GroupWord, MoebiusMap};
use crate::wavelets::{admissible_supports, completeness_census, CensusRow, Wavelet};

#[derive(Clone, Debug, Serialize)]
pub struct Tally {
    pub instances: usize,
    pub holding: usize,
    pub verdict: bool,
}

impl Tally {
    fn new() -> Self {
        Self { instances: 0, holding: 0, verdict: true }
    }

    fn record(&mut self, ok: bool) {
        self.instances += 1;
        if ok {
            self.holding += 1;
        } else {
            self.verdict = false;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistancePair {
    pub disc: Disc,
    pub beta: String,
    pub gamma: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalIntegralRow {
    pub p: u32,
    pub radius_exp: i64,
    pub alpha: String,
    /// `−value/ψ(x)` from the sphere decomposition.
    pub computed_factor: String,
    /// `|π|^{-d}` as stated in the source formula.
    pub stated_factor: String,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueComparison {
    pub disc: Disc,
    pub lambda_series: f64,
    pub lambda_exact_lo: f64,
    pub lambda_exact_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslationRow {
    pub disc: Disc,
    pub beta: String,
    pub transport: f64,
    pub ambient: f64,
    pub factor: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub p: u32,
    pub genus: usize,
    pub alpha: String,
    pub alpha_g: String,
    pub cutoff_len: usize,
    /// `|γx − γy| = |γ'(x)|^{1/2}|γ'(y)|^{1/2}|x − y|` on random instances.
    pub distance_identity: Tally,
    /// `|βx − γy| = |βx − γ(c_B)| ≥ radius(γB)` for `x ∈ F∖B`, `y ∈ B`.
    pub image_distance_lower_bound: Tally,
    /// `dist(βB, γB) = dist(B, β⁻¹γB)`.
    pub translated_distance: Tally,
    pub translated_distance_counterexamples: Vec<DistancePair>,
    pub local_integral: Vec<LocalIntegralRow>,
    /// Form invariance and the stronger density and isometry equalities.
    pub density_invariance: Vec<InvarianceRow>,
    pub completeness: Vec<CensusRow>,
    pub eigenvalue_formula: Vec<EigenvalueComparison>,
    pub ambient_translation: Vec<TranslationRow>,
}

#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub random_instances: usize,
    pub seed: u64,
    /// Word length for the enumerated distance checks.
    pub max_len: usize,
    pub level: u32,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { random_instances: 10_000, seed: 0, max_len: 4, level: 2 }
    }
}

fn random_map(rng: &mut ChaCha8Rng) -> MoebiusMap {
    loop {
        let e: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-40..=40));
        if let Ok(m) = MoebiusMap::from_i64(e[0], e[1], e[2], e[3]) {
            return m;
        }
    }
}

fn random_rat(rng: &mut ChaCha8Rng, p: u32) -> Rat {
    let k = rng.gen_range(-3..=3);
    rat(rng.gen_range(-500..=500), rng.gen_range(1..=60)) * Qp::new(p).unwrap().pow(k)
}

pub fn distance_identity_tally(qp: Qp, n: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    while t.instances < n {
        let g = random_map(&mut rng);
        let x = random_rat(&mut rng, qp.p());
        let y = random_rat(&mut rng, qp.p());
        if let Ok((l, r)) = moebius_distance_identity_check(qp, &g, &x, &y) {
            t.record(l == r);
        }
    }
    t
}

fn sample_points(qp: Qp, d: &Disc) -> Vec<Rat> {
    d.children(qp).into_iter().map(|c| c.center().clone()).collect()
}

/// Runs every audit table on the configuration.
pub fn audit_identities(cfg: &OperatorConfig, opts: &AuditOptions) -> Result<AuditReport, OperatorError> {
    let qp = cfg.qp();
    let g = cfg.group();
    let supports = admissible_supports(cfg.profile(), opts.level);
    let elements: Vec<_> = g.elements(opts.max_len).into_iter().flatten().collect();

    let mut lower = Tally::new();
    let outside: Vec<Rat> = crate::wavelets::StateSpace::new(cfg.profile(), opts.level)
        .states()
        .iter()
        .map(|s| s.center().clone())
        .collect();
    for b in &supports {
        let ys = sample_points(qp, b);
        for beta in &elements {
            for gamma in &elements {
                let Ok(gb) = disc_image(qp, &gamma.map, b) else { continue };
                let gc = gamma.map.apply(b.center())?;
                for x in outside.iter().filter(|x| !b.contains(qp, x)) {
                    let bx = beta.map.apply(x)?;
                    let reference = qp.abs(&(&bx - &gc));
                    for y in &ys {
                        let d = qp.abs(&(&bx - gamma.map.apply(y)?));
                        lower.record(d == reference && d >= gb.radius(qp));
                    }
                }
            }
        }
    }

    let mut translated = Tally::new();
    let mut counterexamples = Vec::new();
    let short: Vec<_> = elements.iter().filter(|e| e.word.len() <= 2).collect();
    for b in &supports {
        for beta in &short {
            for gamma in &short {
                if beta.word == gamma.word {
                    continue;
                }
                let rel = g.word_map(&beta.word.inverse().compose(&gamma.word));
                let (Ok(bb), Ok(gb), Ok(rb)) =
                    (disc_image(qp, &beta.map, b), disc_image(qp, &gamma.map, b), disc_image(qp, &rel, b))
                else {
                    continue;
                };
                let (Ok(lhs), Ok(rhs)) = (bb.distance(qp, &gb), b.distance(qp, &rb)) else { continue };
                translated.record(lhs == rhs);
                if lhs != rhs && counterexamples.len() < 16 {
                    counterexamples.push(DistancePair {
                        disc: b.clone(),
                        beta: beta.word.to_string(),
                        gamma: gamma.word.to_string(),
                        lhs: fmt_rat(&lhs),
                        rhs: fmt_rat(&rhs),
                    });
                }
            }
        }
    }

    let mut local = Vec::new();
    for t in -2..=1i64 {
        for alpha in [int(0), rat(1, 2), int(1), int(2)] {
            let b = Disc::new(qp, &int(1), t);
            let w = Wavelet::haar(qp, b.clone(), 1).unwrap();
            let x = b.center().clone();
            let v = vladimirov_local_integral(qp, &w, &alpha, &x)?;
            debug_assert_eq!(v, local_integral_closed_form(qp, &w, &alpha, &x));
            let psi = w.eval(qp, &x).to_cyclo();
            let factor = (-&(&v * &psi.conj())).scale_rat(&qp.pow(w.norm_exp)).as_real().expect("real ratio");
            let stated = qp.pow(t);
            local.push(LocalIntegralRow {
                p: qp.p(),
                radius_exp: t,
                alpha: fmt_rat(&alpha),
                agree: factor.as_rat().as_ref() == Some(&stated),
                computed_factor: factor.to_string(),
                stated_factor: fmt_rat(&stated),
            });
        }
    }

    let density_invariance = match cfg.datum() {
        Some(d) => invariance_audit(cfg.profile(), d, g),
        None => Vec::new(),
    };

    let mut eig = Vec::new();
    let mut trans = Vec::new();
    let tr = cfg.with_mode(Mode::Transport);
    let amb = cfg.with_mode(Mode::Ambient);
    for b in supports.iter().take(4) {
        let lp = lambda_series(cfg, b)?;
        let le = lambda_exact(cfg, b, 1)?;
        eig.push(EigenvalueComparison {
            disc: b.clone(),
            lambda_series: lp.value.to_f64(),
            lambda_exact_lo: le.lo,
            lambda_exact_hi: le.hi,
        });
        for i in 1..=g.genus() {
            let beta = GroupWord::generator(i, false);
            let a = lambda_exact_at(&tr, b, 1, &beta)?.lo;
            let m = lambda_exact_at(&amb, b, 1, &beta)?.lo;
            trans.push(TranslationRow { disc: b.clone(), beta: beta.to_string(), transport: a, ambient: m, factor: m / a });
        }
    }

    Ok(AuditReport {
        p: qp.p(),
        genus: g.genus(),
        alpha: fmt_rat(cfg.alpha()),
        alpha_g: fmt_rat(cfg.alpha_g()),
        cutoff_len: cfg.cutoff_len(),
        distance_identity: distance_identity_tally(qp, opts.random_instances, opts.seed),
        image_distance_lower_bound: lower,
        translated_distance: translated,
        translated_distance_counterexamples: counterexamples,
        local_integral: local,
        density_invariance,
        completeness: completeness_census(cfg.profile(), opts.level + 1),
        eigenvalue_formula: eig,
        ambient_translation: trans,
    })
}
