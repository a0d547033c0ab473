//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits nonzero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mumford_heat::exact::{int, rat, Cyclo, PowerSum, Rat};
use mumford_heat::fixtures::{tate_datum, tate_group};
use mumford_heat::heat::{empirical_validation, resolvent_solve, sample_paths, solve_cauchy, HeatKernel};
use mumford_heat::measure::MeasureProfile;
use mumford_heat::operator::{
    apply_operator, audit_identities, generator_matrix, lambda_exact, lambda_exact_at, lambda_series, lambda_transform,
    spectrum, AuditOptions, Cutoff, Mode, OperatorConfig, DEFAULT_MAX_WORDS,
};
use mumford_heat::padic::{
    ball_character_moment_integral, brute_ball_moment_integral, brute_sphere_decomposition, sphere_character_integral,
    Disc, Qp,
};
use mumford_heat::schottky::{enumerate_words, word_count, GroupWord};
use mumford_heat::wavelets::{admissible_wavelets, inner_product, Normalization, StateSpace};

const INTEGRAL_CASES: usize = 1000;
const EIGEN_REL_TOL: f64 = 1e-10;
const SPECTRUM_REL_TOL: f64 = 1e-8;
const SEMIGROUP_TOL: f64 = 1e-9;
const STOCHASTIC_TOL: f64 = 1e-12;
const DECAY_REL_TOL: f64 = 1e-6;
const MC_PATHS: usize = 100_000;
const MC_SIGMA: f64 = 4.0;
const MC_SECONDS: f64 = 60.0;
const AUDIT_INSTANCES: usize = 10_000;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tate(mode: Mode) -> OperatorConfig {
    let g = tate_group();
    let prof = MeasureProfile::build(g.qp(), &tate_datum(), &g.fundamental_domain(), 2).unwrap();
    OperatorConfig::new(g, prof, Some(tate_datum()), int(1), int(1), mode, Cutoff::Tolerance(1e-12), DEFAULT_MAX_WORDS)
        .unwrap()
}

fn b1(q: Qp) -> Disc {
    Disc::new(q, &int(1), -1)
}

fn random_point(rng: &mut ChaCha8Rng, q: Qp, v: i64) -> Rat {
    let p = q.p() as i64;
    let unit = loop {
        let n = rng.gen_range(1..200i64);
        if n % p != 0 {
            break n;
        }
    };
    let den = loop {
        let d = rng.gen_range(1..50i64);
        if d % p != 0 {
            break d;
        }
    };
    rat(unit, den) * q.pow(v)
}

fn exact_integrals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for i in 0..INTEGRAL_CASES {
        let q = Qp::new([2, 3, 5][i % 3]).unwrap();
        let m = rng.gen_range(0..=2u32);
        let k = rng.gen_range(-2..=2i64);
        let v = rng.gen_range(-k - 3..=-k + 2);
        let a = if rng.gen_bool(0.05) { int(0) } else { random_point(&mut rng, q, v) };
        if sphere_character_integral(q, &a, k, m as i64) != brute_sphere_decomposition(q, &a, k, k, m as i64) {
            bad += 1;
        }
        if ball_character_moment_integral(q, &a, k, m) != brute_ball_moment_integral(q, &a, k, m) {
            bad += 1;
        }
    }
    check(bad == 0, format!("{} sphere and {} ball cases, {bad} mismatches", INTEGRAL_CASES, INTEGRAL_CASES))
}

fn worked_eigenvalue() -> Outcome {
    let cfg = tate(Mode::Transport);
    let l = lambda_series(&cfg, &b1(cfg.qp())).map_err(|e| e.to_string())?;
    check(l.value.as_rat() == Some(rat(15, 26)), format!("lambda_series(D(1,-1)) = {}", l.value))
}

fn eigen_relation() -> Outcome {
    let cfg = tate(Mode::Transport);
    let q = cfg.qp();
    let one = GroupWord::identity();
    let space = StateSpace::new(cfg.profile(), 3);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut j_independent = true;
    for level in 2..=3 {
        for w in admissible_wavelets(cfg.profile(), level, Normalization::Omega) {
            let lam = lambda_exact(&cfg, &w.support, w.j).map_err(|e| e.to_string())?;
            let lam1 = lambda_exact(&cfg, &w.support, 1).map_err(|e| e.to_string())?;
            j_independent &= lam.value == lam1.value;
            let u = w.on_states(&space);
            let scale = lam.value.to_f64() * w.magnitude(q.p()).to_f64();
            for s in space.states() {
                let x = s.center();
                let out = apply_operator(&cfg, &u, &space, &one, x).map_err(|e| e.to_string())?;
                let bound = out.tail_bound.unwrap_or(f64::INFINITY);
                let err = if w.support.contains(q, x) {
                    let psi = w.eval(q, x).to_cyclo();
                    (&out.value + &psi.scale(&lam.value)).to_complex().norm()
                } else {
                    out.value.to_complex().norm()
                };
                if err > bound || bound > EIGEN_REL_TOL * scale {
                    return Err(format!("{} j={} at {}: residual {err:e}, bound {bound:e}", w.support, w.j, x));
                }
                worst = worst.max(err / scale);
                checked += 1;
            }
        }
    }
    let classes = spectrum(&cfg, 3).map_err(|e| e.to_string())?;
    let class_constant = classes.entries.iter().all(|e| e.class_constant);
    check(
        j_independent && class_constant,
        format!(
            "{checked} point checks, worst relative residual {worst:.1e}, j-independent {j_independent}, class-constant {class_constant}"
        ),
    )
}

fn orthonormality() -> Outcome {
    let cfg = tate(Mode::Transport);
    let ws = admissible_wavelets(cfg.profile(), 3, Normalization::Omega);
    let one = Cyclo::from_power_sum(PowerSum::one(3));
    let mut bad = 0;
    for (i, a) in ws.iter().enumerate() {
        for (k, b) in ws.iter().enumerate() {
            let g = inner_product(a, b, cfg.profile()).map_err(|e| e.to_string())?;
            let ok = if i == k { g == one } else { g.is_zero() };
            bad += usize::from(!ok);
        }
    }
    check(bad == 0, format!("{0}x{0} Gram matrix, {bad} entries differ from the identity", ws.len()))
}

fn generator_semigroup() -> Outcome {
    let cfg = tate(Mode::Transport);
    let q = generator_matrix(&cfg, 2).map_err(|e| e.to_string())?;
    let rows_zero = q.row_sums().iter().all(PowerSum::is_zero);
    let off_ok = q.off_diagonal_nonnegative();
    let k = HeatKernel::new(&q);
    let p = |t| k.transition(t).map_err(|e| e.to_string());
    let (a, b, c) = (p(0.3)?, p(0.7)?, p(1.0)?);
    let ck = (&a.p * &b.p - &c.p).amax();
    let drift = c.p.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let lam = lambda_exact(&cfg, &b1(cfg.qp()), 1).map_err(|e| e.to_string())?.value.to_f64();
    let lines = k.eigen_lines();
    let wav: Vec<_> = lines.iter().filter(|l| l.kind == "wavelet").collect();
    let spec_ok = wav.len() == 1 && wav[0].multiplicity == 4 && (wav[0].rate - lam).abs() / lam < SPECTRUM_REL_TOL;
    let gap: Vec<String> =
        lines.iter().filter(|l| l.kind == "gap").map(|l| format!("{:.6}x{}", l.rate, l.multiplicity)).collect();
    check(
        rows_zero && off_ok && ck < SEMIGROUP_TOL && drift < STOCHASTIC_TOL && spec_ok,
        format!(
            "rows sum to 0: {rows_zero}, off-diagonal >= 0: {off_ok}, |P.3 P.7 - P1| = {ck:.1e}, |P1 1 - 1| = {drift:.1e}, wavelet rate {:.12} (x{}) vs {lam:.12}, gap rates [{}]",
            wav.first().map_or(f64::NAN, |l| l.rate),
            wav.first().map_or(0, |l| l.multiplicity),
            gap.join(", ")
        ),
    )
}

/// `1_{D(4,-2)} - 1_{D(1,-2)}` on the level-2 states.
fn real_wavelet(q: &mumford_heat::operator::GeneratorMatrix) -> Vec<f64> {
    q.states
        .iter()
        .map(|d| {
            if *d == Disc::new(q.qp, &int(4), -2) {
                1.0
            } else if *d == Disc::new(q.qp, &int(1), -2) {
                -1.0
            } else {
                0.0
            }
        })
        .collect()
}

fn heat_decay() -> Outcome {
    let cfg = tate(Mode::Transport);
    let q = generator_matrix(&cfg, 2).map_err(|e| e.to_string())?;
    let lam = lambda_exact(&cfg, &b1(cfg.qp()), 1).map_err(|e| e.to_string())?.value.to_f64();
    let k = HeatKernel::new(&q);
    let h0 = real_wavelet(&q);
    let a = h0.iter().position(|x| *x > 0.5).unwrap();
    let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1 / lam).collect();
    let sol = solve_cauchy(&k, &h0, &times).map_err(|e| e.to_string())?;
    let ys: Vec<f64> = sol.values.iter().map(|v| v[a].ln()).collect();
    let n = times.len() as f64;
    let (mt, my) = (times.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = times.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let var: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    let fitted = -cov / var;
    let rel = (fitted - lam).abs() / lam;
    check(rel < DECAY_REL_TOL, format!("fitted rate {fitted:.12} vs {lam:.12} over [0, 5/lambda], relative error {rel:.1e}"))
}

fn resolvent() -> Outcome {
    let cfg = tate(Mode::Transport);
    let q = generator_matrix(&cfg, 2).map_err(|e| e.to_string())?;
    let k = HeatKernel::new(&q);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut min_u = f64::INFINITY;
    for _ in 0..100 {
        let h: Vec<f64> = (0..q.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let u = resolvent_solve(&k, 1.0, &h).map_err(|e| e.to_string())?;
        let sup = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        worst = worst.max(sup(&u) / sup(&h));
        min_u = min_u.min(u.iter().copied().fold(f64::INFINITY, f64::min));
    }
    check(min_u >= 0.0 && worst <= 1.0 + 1e-12, format!("100 cases: min u = {min_u:.3e}, max |u|/|h| = {worst:.6}"))
}

fn monte_carlo() -> Outcome {
    let cfg = tate(Mode::Transport);
    let q = generator_matrix(&cfg, 2).map_err(|e| e.to_string())?;
    let k = HeatKernel::new(&q);
    let start = Instant::now();
    let paths = sample_paths(&k.q, 0, MC_PATHS, 1.0, 42).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let row = k.transition(1.0).map_err(|e| e.to_string())?.row(0);
    let rep = empirical_validation(&paths, &[1.0], &[row], MC_SIGMA);
    let again = sample_paths(&k.q, 0, MC_PATHS, 1.0, 42).map_err(|e| e.to_string())?;
    let bytes = |p: &[mumford_heat::heat::PathSample]| serde_json::to_vec(p).unwrap();
    let identical = bytes(&paths) == bytes(&again);
    check(
        rep.pass && identical && elapsed < MC_SECONDS,
        format!(
            "{MC_PATHS} paths in {elapsed:.2} s, max |z| = {:.2} (limit {MC_SIGMA}), chi2 = {:.2} on {} dof, byte-identical rerun {identical}",
            rep.rows[0].max_abs_z, rep.rows[0].chi_square, rep.rows[0].degrees_of_freedom
        ),
    )
}

fn audit() -> Outcome {
    let tr = tate(Mode::Transport);
    let amb = tr.with_mode(Mode::Ambient);
    let q = tr.qp();
    let rep = audit_identities(&tr, &AuditOptions { random_instances: AUDIT_INSTANCES, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let identity = rep.distance_identity.verdict && rep.distance_identity.instances == AUDIT_INSTANCES;
    let lower = rep.image_distance_lower_bound.verdict;
    let instance = rep.translated_distance_counterexamples.iter().any(|c| {
        c.disc == b1(q) && c.beta == "g1" && c.gamma == "g1 g1" && c.lhs == "1/9" && c.rhs == "1"
    });
    let alpha_rows = rep.local_integral.iter().all(|r| r.agree == (r.alpha == "0" || r.radius_exp == 0))
        && rep.local_integral.iter().any(|r| !r.agree);
    let g1 = GroupWord::new([1]);
    let mut transport_invariant = true;
    let mut ambient_factor_nine = true;
    let space_supports = mumford_heat::wavelets::admissible_supports(tr.profile(), 2);
    for b in &space_supports {
        let base = lambda_exact(&tr, b, 1).map_err(|e| e.to_string())?.value;
        transport_invariant &= lambda_exact_at(&tr, b, 1, &g1).map_err(|e| e.to_string())?.value == base;
        ambient_factor_nine &= lambda_exact_at(&amb, b, 1, &g1).map_err(|e| e.to_string())?.value == base.scale(&int(9));
    }
    let gamma1 = tr.group().generators()[0].clone();
    let t_tr = lambda_transform(&tr, &gamma1, &b1(q)).map_err(|e| e.to_string())?;
    let t_amb = lambda_transform(&amb, &gamma1, &b1(q)).map_err(|e| e.to_string())?;
    transport_invariant &= t_tr.transformed == t_tr.original;
    let amb_exact = t_amb.transformed.as_rat().map(|r| mumford_heat::exact::fmt_rat(&r));
    check(
        identity && lower && instance && alpha_rows && transport_invariant && ambient_factor_nine && amb_exact.is_some(),
        format!(
            "distance identity {}/{}, image lower bound {}/{}, translated-distance instance 1/9 vs 1 found {instance}, local-integral alpha rows {alpha_rows}, transport invariant {transport_invariant}, ambient x9 {ambient_factor_nine}, ambient transform 15/26 -> {}",
            rep.distance_identity.holding,
            rep.distance_identity.instances,
            rep.image_distance_lower_bound.holding,
            rep.image_distance_lower_bound.instances,
            amb_exact.unwrap_or_else(|| t_amb.transformed.to_string())
        ),
    )
}

fn word_census() -> Outcome {
    let mut bad = Vec::new();
    for g in 1..=3usize {
        let words = enumerate_words(g, 8);
        for (l, ws) in words.iter().enumerate().skip(1) {
            let expected = 2 * g as u128 * (2 * g as u128 - 1).pow(l as u32 - 1);
            if ws.len() as u128 != expected || word_count(g, l) != expected {
                bad.push(format!("g={g} l={l}: {} vs {expected}", ws.len()));
            }
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "g = 1, 2, 3 and lengths 1..8 all match".into() } else { bad.join("; ") })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact integral suite", exact_integrals),
        ("worked eigenvalue 15/26", worked_eigenvalue),
        ("eigen-relation within certified tail", eigen_relation),
        ("wavelet orthonormality", orthonormality),
        ("generator and semigroup", generator_semigroup),
        ("heat decay rate", heat_decay),
        ("resolvent positivity and contraction", resolvent),
        ("Monte Carlo against P_1", monte_carlo),
        ("audit suite", audit),
        ("word census", word_census),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS [{:>2}] {name}: {d} ({secs:.2} s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {d} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
