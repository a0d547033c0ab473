//! Closed-form character integrals over spheres and balls, and the
//! residue-class oracle they are checked against.

use num_traits::{One, Zero};

use super::Qp;
use crate::exact::{int, Cyclo, PowerSum, Rat};

/// `C(m) = (1 - |π|) / (1 - |π|^{m+1})`.
fn moment_constant(qp: Qp, m: u32) -> Rat {
    let pi = qp.abs_uniformiser();
    (Rat::one() - &pi) / (Rat::one() - qp.pow(-(m as i64 + 1)))
}

/// `|π|^n`.
fn pi_pow(qp: Qp, n: i64) -> Rat {
    qp.pow(-n)
}

/// `∫_{|x| = |π|^k} χ(a x) |x|^m dx`, three-case closed form on `|a|`.
pub fn sphere_character_integral(qp: Qp, a: &Rat, k: i64, m: i64) -> Rat {
    let base = pi_pow(qp, k * (m + 1));
    match qp.abs_exp(a) {
        None => base * (Rat::one() - qp.abs_uniformiser()),
        Some(e) if e <= k => base * (Rat::one() - qp.abs_uniformiser()),
        Some(e) if e == k + 1 => -pi_pow(qp, k * (m + 1) + 1),
        Some(_) => Rat::zero(),
    }
}

/// `∫_{|x| ≤ |π|^ℓ} |x|^n dx = C(n)|π|^{ℓ(n+1)}`.
pub fn ball_moment(qp: Qp, ell: i64, n: u32) -> Rat {
    moment_constant(qp, n) * pi_pow(qp, ell * (n as i64 + 1))
}

/// `∫_{|x| ≤ |π|^ℓ} χ(a x) |x|^m dx` with `|a| = |π|^{d-1}`.
///
/// For `ℓ ≥ 1-d` this is `C(m)|π|^{ℓ(m+1)}`; otherwise the only nontrivial
/// sphere is `k = -d`, giving `C(m)|π|^{(1-d)(m+1)} - |π|^{1-d(m+1)}` for
/// every `ℓ ≤ -d`. The value vanishes exactly when `m = 0` and `ℓ ≤ -d`.
pub fn ball_character_moment_integral(qp: Qp, a: &Rat, ell: i64, m: u32) -> Rat {
    let Some(v) = qp.valuation(a) else {
        return ball_moment(qp, ell, m);
    };
    let d = v + 1;
    let mm = m as i64;
    if ell >= 1 - d {
        ball_moment(qp, ell, m)
    } else {
        ball_moment(qp, 1 - d, m) - pi_pow(qp, 1 - d * (mm + 1))
    }
}

/// Brute-force oracle: sums `∫_{|x|=|π|^k} χ(ax)|x|^m dx` for
/// `k_min ≤ k ≤ k_max` by enumerating unit residue classes modulo the
/// precision at which `χ(ax)` is locally constant.
pub fn brute_sphere_decomposition(qp: Qp, a: &Rat, k_min: i64, k_max: i64, m: i64) -> Rat {
    (k_min..=k_max).map(|k| brute_sphere(qp, a, k, m)).sum()
}

fn brute_sphere(qp: Qp, a: &Rat, k: i64, m: i64) -> Rat {
    let p = qp.p() as i64;
    // sphere x = p^k u with u a unit; χ(a p^k u) depends on u mod p^n
    let n = match qp.valuation(a) {
        None => 0,
        Some(v) => (-(v + k)).max(0),
    };
    let sphere_measure = qp.pow(-k) * (Rat::one() - qp.abs_uniformiser());
    let abs_pow = qp.pow(-k * m);
    if n == 0 {
        return sphere_measure * abs_pow;
    }
    let modulus = p.pow(n as u32);
    let class_measure = qp.pow(-k) * qp.pow(-n);
    let scaled = a * qp.pow(k);
    let mut acc = Cyclo::zero(qp.p());
    for u in (1..modulus).filter(|u| u % p != 0) {
        let ph = qp.character_phase(&(&scaled * int(u)));
        acc += &Cyclo::term(PowerSum::one(qp.p()), ph.value());
    }
    let total = acc
        .as_real()
        .and_then(|s| s.as_rat())
        .expect("character sum over a full unit residue system is rational");
    total * class_measure * abs_pow
}

/// Oracle for the ball integral: brute spheres from `ℓ` up to the first
/// sphere on which the character is trivial, plus the geometric tail of
/// plain moments beyond it.
pub fn brute_ball_moment_integral(qp: Qp, a: &Rat, ell: i64, m: u32) -> Rat {
    let trivial_from = match qp.valuation(a) {
        None => ell,
        Some(v) => ell.max(-v),
    };
    let head = if trivial_from > ell {
        brute_sphere_decomposition(qp, a, ell, trivial_from - 1, m as i64)
    } else {
        Rat::zero()
    };
    // Σ_{k ≥ K} (1 - 1/p) p^{-k(m+1)} = first term / (1 - ratio)
    let ratio = qp.pow(-(m as i64 + 1));
    let first = (Rat::one() - qp.abs_uniformiser()) * qp.pow(-trivial_from * (m as i64 + 1));
    head + first / (Rat::one() - ratio)
}
